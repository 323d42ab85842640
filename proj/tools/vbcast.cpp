// vbcast: drop / analyze / simulate / report / sweep.

#include <vbcast/experiment.hpp>

#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

namespace fs = std::filesystem;
using namespace vbcast;

namespace {

struct GlobalOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  bool full_connectivity = false;
  std::optional<std::uint64_t> periods;
  bool zero_based_irt = false;
  bool include_uncategorized = false;
};

ExperimentConfig load(const GlobalOptions& g)
{
  ExperimentConfig c;
  if (!g.config_path.empty()) {
    std::ifstream in(g.config_path);
    if (!in)
      throw std::runtime_error("cannot open config " + g.config_path);
    c = parse_config(in);
  }
  if (g.seed)
    c.seed = *g.seed;
  if (g.out)
    c.out = *g.out;
  if (g.full_connectivity)
    c.full_connectivity = true;
  if (g.periods)
    c.periods = *g.periods;
  if (g.zero_based_irt)
    c.zero_based_irt = true;
  if (g.include_uncategorized)
    c.include_uncategorized = true;
  c.validate();
  return c;
}

SpatialScenario drop(const ExperimentConfig& c)
{
  const auto s = make_scenario(c);
  fs::create_directories(c.out);
  const fs::path path = fs::path(c.out) / "scenario.txt";
  std::ofstream f(path, std::ios::binary);
  if (!f)
    throw std::runtime_error("cannot write " + path.string());
  write_scenario(f, s);
  const auto counts = s.category_counts();
  std::cout << "wrote " << path.string() << " (" << s.nodes.size() << " nodes)\n";
  for (auto cat : kAllCategories)
    std::cout << "  " << to_string(cat) << ": " << counts[index_of(cat)] << '\n';
  return s;
}

int analyze_cmd(const ExperimentConfig& c)
{
  const auto rows = analyze_grid(c, make_scenario(c));
  fs::create_directories(c.out);
  const fs::path path = fs::path(c.out) / "analytic.csv";
  std::ofstream f(path, std::ios::binary);
  write_analytic_csv(f, rows);
  for (const auto& r : rows)
    if (!r.result)
      std::cerr << "warning: " << to_string(r.key.policy) << '/' << category_label(r.key.category) << " cw="
                << r.key.cw << " n_sta=" << r.key.n_sta << ": " << r.error << '\n';
  std::cout << "wrote " << path.string() << " (" << rows.size() << " rows)\n";
  return 0;
}

int simulate_cmd(const ExperimentConfig& c)
{
  const auto m = simulate_grid(c, make_scenario(c), c.out);
  int failed = 0;
  for (const auto& e : m.entries)
    if (e.status != "ok") {
      ++failed;
      std::cerr << "warning: " << e.stem << ": " << e.status << '\n';
    }
  std::cout << "wrote " << m.entries.size() << " simulation points to " << c.out << '\n';
  return failed ? 1 : 0;
}

int report_cmd(const ExperimentConfig& c, const std::string& analytic, const std::string& manifest)
{
  const fs::path a = analytic.empty() ? fs::path(c.out) / "analytic.csv" : fs::path(analytic);
  const fs::path m = manifest.empty() ? fs::path(c.out) / "manifest.csv" : fs::path(manifest);
  const auto set = write_report(c, a, m, c.out);
  write_summary(std::cout, set);
  return set.pass ? 0 : 1;
}

} // namespace

int main(int argc, char** argv)
{
  CLI::App app{"Distance-prioritised backoff for vehicular safety broadcast: analytic model and slotted simulator"};
  app.require_subcommand(1);

  GlobalOptions g;
  app.add_option("--config", g.config_path, "Experiment config file")->check(CLI::ExistingFile);
  app.add_option("--seed", g.seed, "Master seed");
  app.add_option("--out", g.out, "Output directory");
  app.add_flag("--full-connectivity", g.full_connectivity, "Every node senses every other node");
  app.add_option("--periods", g.periods, "Beacon periods per simulation point");
  app.add_flag("--zero-based-irt", g.zero_based_irt, "Report IRT as failures before a success");
  app.add_flag("--include-uncategorized", g.include_uncategorized, "Report uncategorized nodes in 'all' rows");

  auto* drop_sc = app.add_subcommand("drop", "Drop nodes and write scenario.txt");
  auto* analyze_sc = app.add_subcommand("analyze", "Evaluate the analytic grid into analytic.csv");
  auto* simulate_sc = app.add_subcommand("simulate", "Run the simulation grid");
  auto* report_sc = app.add_subcommand("report", "Join analytic and simulation results");
  std::string analytic_path;
  std::string manifest_path;
  report_sc->add_option("--analytic", analytic_path, "Analytic CSV (default <out>/analytic.csv)");
  report_sc->add_option("--manifest", manifest_path, "Simulation manifest (default <out>/manifest.csv)");
  auto* sweep_sc = app.add_subcommand("sweep", "drop + analyze + simulate + report");

  CLI11_PARSE(app, argc, argv);

  try {
    const auto c = load(g);
    if (drop_sc->parsed()) {
      drop(c);
      return 0;
    }
    if (analyze_sc->parsed())
      return analyze_cmd(c);
    if (simulate_sc->parsed())
      return simulate_cmd(c);
    if (report_sc->parsed())
      return report_cmd(c, analytic_path, manifest_path);
    if (sweep_sc->parsed()) {
      drop(c);
      analyze_cmd(c);
      const int sim_status = simulate_cmd(c);
      const int report_status = report_cmd(c, "", "");
      return sim_status || report_status ? 1 : 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
