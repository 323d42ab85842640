#include <vbcast/experiment.hpp>

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace vbcast;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name)
{
  const auto p = fs::temp_directory_path() / ("vbcast_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p)
{
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

ExperimentConfig small_config()
{
  return parse_config_string("[experiment]\nseed = 7\n"
                             "[policy]\nvariants = traditional, proposed:cat1, proposed:cat3\ncw = 15, 127\n"
                             "[contention]\nn_sta = 10, 20\n"
                             "[sim]\nperiods = 60\n");
}

void run_pipeline(ExperimentConfig c, const fs::path& dir)
{
  c.out = dir.string();
  const auto s = make_scenario(c);
  {
    std::ofstream f(dir / "scenario.txt", std::ios::binary);
    write_scenario(f, s);
  }
  {
    std::ofstream f(dir / "analytic.csv", std::ios::binary);
    write_analytic_csv(f, analyze_grid(c, s));
  }
  simulate_grid(c, s, dir);
  write_report(c, dir / "analytic.csv", dir / "manifest.csv", dir);
}

} // namespace

TEST(Config, EmptyTextGivesDefaults)
{
  const auto c = parse_config_string("");
  EXPECT_EQ(canonical_config(c), canonical_config(ExperimentConfig{}));
  EXPECT_EQ(c.variants.size(), 4u);
  EXPECT_EQ(c.cws, (std::vector<std::uint32_t>{15, 127, 511}));
}

TEST(Config, CanonicalRoundTrip)
{
  auto c = small_config();
  c.mac.slots_per_beacon_override = 1500;
  c.tolerances.delay_rel = 0.25;
  const auto text = canonical_config(c);
  EXPECT_EQ(canonical_config(parse_config_string(text)), text);
}

TEST(Config, PolicyAndCategoriesForm)
{
  const auto c = parse_config_string("[policy]\npolicy = traditional, proposed\ncategories = cat1, cat2\n");
  ASSERT_EQ(c.variants.size(), 3u);
  EXPECT_EQ(c.variants[2].label(), "proposed:cat2");
}

TEST(Config, CommentsAccepted)
{
  EXPECT_NO_THROW(parse_config_string("# note\n[sim]\n# periods below\nperiods = 5\n"));
  const auto c = parse_config_string("[sim]\nperiods = 5   ; trailing\n[policy]\ncw = 15, 127 # two\n");
  EXPECT_EQ(c.periods, 5u);
  EXPECT_EQ(c.cws, (std::vector<std::uint32_t>{15, 127}));
}

TEST(Config, RejectsUnorderedThresholds)
{
  try {
    parse_config_string("[scenario]\nth1 = 500\nth2 = 300\n");
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("th2"), std::string::npos) << msg;
    EXPECT_NE(msg.find("th1"), std::string::npos) << msg;
  }
}

TEST(Config, RejectsUnknownKeysAndBadValues)
{
  EXPECT_THROW(parse_config_string("[sim]\nperiod = 5\n"), ConfigError);
  EXPECT_THROW(parse_config_string("[bogus]\nx = 1\n"), ConfigError);
  EXPECT_THROW(parse_config_string("[sim]\nperiods = many\n"), ConfigError);
  EXPECT_THROW(parse_config_string("[policy]\nvariants = proposed\n"), ConfigError);
  EXPECT_THROW(parse_config_string("[policy]\ncw = 2\nvariants = proposed:cat1\n"), ConfigError);
  EXPECT_THROW(parse_config_string("[scenario]\ndensity = -1\n"), ConfigError);
}

TEST(Experiment, AnalyzeGridOneWindowHasSixteenRows)
{
  auto c = parse_config_string("[policy]\ncw = 127\n");
  const auto rows = analyze_grid(c, make_scenario(c));
  ASSERT_EQ(rows.size(), 16u);
  for (const auto& r : rows) {
    ASSERT_TRUE(r.result) << r.error;
    EXPECT_EQ(r.key.cw, 127u);
  }
  EXPECT_EQ(rows.front().key.policy, PolicyKind::Traditional);
  EXPECT_EQ(rows.back().key.category, Category::Cat3);
  EXPECT_EQ(rows.back().key.n_sta, 80u);
}

TEST(Experiment, AnalyticCsvRoundTrip)
{
  auto c = small_config();
  const auto rows = analyze_grid(c, make_scenario(c));
  std::stringstream ss;
  write_analytic_csv(ss, rows);
  EXPECT_EQ(ss.str().substr(0, ss.str().find('\n')), kAnalyticHeader);
  const auto back = read_analytic_csv(ss);
  ASSERT_EQ(back.size(), rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    EXPECT_EQ(back[i].key, rows[i].key);
    ASSERT_TRUE(back[i].result);
    EXPECT_NEAR(back[i].result->tau, rows[i].result->tau, 1e-8 * rows[i].result->tau);
    EXPECT_NEAR(back[i].result->r, rows[i].result->r, 1e-8 * rows[i].result->r);
  }
}

TEST(Experiment, ContendersHaveRequestedSizeAndCategories)
{
  const auto c = small_config();
  const auto s = make_scenario(c);
  for (std::uint32_t n : {10u, 20u, 80u}) {
    const auto nodes = contenders(c, s, n);
    EXPECT_EQ(nodes.size(), n);
    std::array<bool, 4> seen{};
    for (const auto& v : nodes)
      seen[index_of(v.category)] = true;
    EXPECT_TRUE(seen[0]);
    EXPECT_TRUE(seen[2]);
    EXPECT_TRUE(std::is_sorted(nodes.begin(), nodes.end(),
                               [](const VehicleNode& a, const VehicleNode& b) { return a.id < b.id; }));
  }
  EXPECT_THROW(contenders(c, s, 81), std::invalid_argument);
}

TEST(Experiment, PipelineIsByteDeterministic)
{
  const auto c = small_config();
  const auto a = fresh_dir("det_a");
  const auto b = fresh_dir("det_b");
  run_pipeline(c, a);
  run_pipeline(c, b);
  std::size_t files = 0;
  for (const auto& entry : fs::directory_iterator(a)) {
    const auto name = entry.path().filename();
    ASSERT_TRUE(fs::exists(b / name)) << name;
    EXPECT_EQ(slurp(entry.path()), slurp(b / name)) << name;
    ++files;
  }
  EXPECT_GT(files, 10u);

  auto d = c;
  d.seed = 8;
  const auto other = fresh_dir("det_c");
  run_pipeline(d, other);
  EXPECT_NE(slurp(a / "scenario.txt"), slurp(other / "scenario.txt"));
  fs::remove_all(a);
  fs::remove_all(b);
  fs::remove_all(other);
}

TEST(Experiment, OutcomeFilesConserveAndFullConnectivityHasNoHiddenNodes)
{
  auto c = small_config();
  c.full_connectivity = true;
  const auto dir = fresh_dir("fullconn");
  run_pipeline(c, dir);
  std::ifstream mf(dir / "manifest.csv");
  const auto m = read_manifest(mf);
  ASSERT_EQ(m.entries.size(), 2u * 2u * 2u);
  for (const auto& e : m.entries) {
    ASSERT_EQ(e.status, "ok");
    const auto o = load_outcome(dir, e.stem, m.periods);
    for (const auto& n : o.counters) {
      EXPECT_EQ(n.total(), c.periods);
      EXPECT_EQ(n.hn, 0u);
    }
  }
  fs::remove_all(dir);
}

TEST(Experiment, LoadedOutcomeMatchesSimulation)
{
  const auto c = small_config();
  const auto s = make_scenario(c);
  const auto dir = fresh_dir("reload");
  const auto m = simulate_grid(c, s, dir);
  const auto& p = m.entries.front().point;
  const auto direct = run_simulation(sim_config(c, p, contenders(c, s, p.n_sta)));
  const auto loaded = load_outcome(dir, m.entries.front().stem, c.periods);
  EXPECT_EQ(loaded.counters, direct.counters);
  EXPECT_EQ(loaded.results, direct.results);
  EXPECT_EQ(loaded.categories, direct.categories);
  fs::remove_all(dir);
}

TEST(Experiment, ReportJoinsEveryRow)
{
  const auto c = small_config();
  const auto dir = fresh_dir("report");
  run_pipeline(c, dir);
  const auto report = slurp(dir / "report.csv");
  EXPECT_EQ(report.substr(0, report.find('\n')), kReportHeader);
  // 3 variants x 2 windows x 2 sizes x 6 metrics, plus the header.
  EXPECT_EQ(std::count(report.begin(), report.end(), '\n'), 3 * 2 * 2 * 6 + 1);
  EXPECT_EQ(report.find("nan,nan"), std::string::npos);
  const auto irt = slurp(dir / "irt_cw15.csv");
  EXPECT_EQ(std::count(irt.begin(), irt.end(), '\n'), 3 * 2 * 30 + 1);
  fs::remove_all(dir);
}
