#pragma once

// Experiment orchestration: drop, analytic grid, simulation grid, report.
//
// Seeds: every random stream derives from the master seed via
// derive_seed(master, tag) = mix64(master ^ mix64(tag)). The scenario drop
// uses tag kDropTag, the contender subsample for an n_sta value uses
// kSubsampleTag + attempt * 2^32 + n_sta, and simulation point i uses i.

#include <vbcast/analytic.hpp>
#include <vbcast/config.hpp>
#include <vbcast/geometry.hpp>
#include <vbcast/metrics.hpp>
#include <vbcast/rng.hpp>
#include <vbcast/sim.hpp>

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace vbcast {

inline constexpr std::uint64_t kDropTag = 0xD809'0000'0000'0001ULL;
inline constexpr std::uint64_t kSubsampleTag = 0x5AB5'0000'0000'0000ULL;
inline constexpr int kSubsampleAttempts = 64;

inline std::string fmt9(double v)
{
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

inline SpatialScenario make_scenario(const ExperimentConfig& c)
{
  return drop_nodes(c.region, c.thresholds, c.density, c.drop_mode, derive_seed(c.seed, kDropTag));
}

/// Categories the variants need represented among the contenders.
inline std::vector<Category> required_categories(const ExperimentConfig& c)
{
  std::vector<Category> req;
  for (const auto& v : c.variants)
    if (v.category && std::find(req.begin(), req.end(), *v.category) == req.end())
      req.push_back(*v.category);
  return req;
}

/// The n_sta contenders for a sweep point. Subsample mode draws n_sta nodes
/// of `scenario` without replacement; rescale mode drops a fresh scenario
/// whose density yields exactly n_sta nodes. Draws are retried (with fresh
/// derived seeds) until every required category is present, keeping the
/// last attempt if that never happens.
inline std::vector<VehicleNode> contenders(const ExperimentConfig& c, const SpatialScenario& scenario,
                                           std::uint32_t n_sta)
{
  const auto required = required_categories(c);
  std::vector<VehicleNode> chosen;
  for (int attempt = 0; attempt < kSubsampleAttempts; ++attempt) {
    const Seed seed = derive_seed(c.seed, kSubsampleTag + (static_cast<std::uint64_t>(attempt) << 32) + n_sta);
    if (c.n_sta_mode == NStaMode::Subsample) {
      if (n_sta > scenario.nodes.size())
        throw std::invalid_argument("n_sta " + std::to_string(n_sta) + " exceeds the " +
                                    std::to_string(scenario.nodes.size()) + "-node drop");
      std::vector<VehicleNode> pool = scenario.nodes;
      Rng rng(seed);
      for (std::uint32_t i = 0; i < n_sta; ++i) {
        const auto j = rng.uniform_int(i, pool.size() - 1);
        std::swap(pool[i], pool[j]);
      }
      pool.resize(n_sta);
      std::sort(pool.begin(), pool.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
      chosen = std::move(pool);
    } else {
      chosen = drop_nodes(c.region, c.thresholds, n_sta / c.region.area(), DropMode::FixedCount, seed).nodes;
    }
    bool ok = true;
    for (auto cat : required)
      ok = ok && std::any_of(chosen.begin(), chosen.end(), [&](const auto& n) { return n.category == cat; });
    if (ok)
      break;
  }
  return chosen;
}

inline ContentionConfig contention_config(const ExperimentConfig& c, const Variant& v, std::uint32_t cw,
                                          const std::vector<VehicleNode>& nodes)
{
  ContentionConfig cc;
  std::uint32_t active = 0;
  for (const auto& n : nodes)
    if (!(c.silence_uncategorized && n.category == Category::Uncategorized))
      ++active;
  cc.n_sta = std::max<std::uint32_t>(active, 1);
  cc.policy = c.policy(v.policy, cw);
  cc.category = v.category.value_or(Category::Cat1);
  cc.params = c.mac;
  cc.mix = CategoryMix::from_nodes(nodes, !c.silence_uncategorized);
  return cc;
}

// ---------------------------------------------------------------------------
// Analytic grid
// ---------------------------------------------------------------------------

struct AnalyticRow {
  GridKey key{};
  std::optional<AnalyticalResult> result;
  std::string error;
};

inline constexpr const char* kAnalyticHeader = "policy,category,cw,n_sta,tau,e_nbo,e_texp_s,e_tbo_s,t_suc_s,e_t_s,r";

/// Rows in variant-major, then cw, then n_sta order.
inline std::vector<AnalyticRow> analyze_grid(const ExperimentConfig& c, const SpatialScenario& scenario)
{
  std::map<std::uint32_t, std::vector<VehicleNode>> pools;
  for (auto n : c.n_sta)
    pools.emplace(n, contenders(c, scenario, n));

  std::vector<AnalyticRow> rows;
  for (const auto& v : c.variants)
    for (auto cw : c.cws)
      for (auto n : c.n_sta) {
        AnalyticRow row;
        row.key = GridKey{v.policy, v.category, cw, n};
        try {
          row.result = analyze(contention_config(c, v, cw, pools.at(n)), c.tol, c.max_iter);
          // Report under the grid's n_sta even when silencing shrinks the contender count.
          row.result->n_sta = n;
        } catch (const std::exception& e) {
          row.error = e.what();
        }
        rows.push_back(std::move(row));
      }
  return rows;
}

inline void write_analytic_csv(std::ostream& os, const std::vector<AnalyticRow>& rows)
{
  os << kAnalyticHeader << '\n';
  for (const auto& row : rows) {
    os << to_string(row.key.policy) << ',' << category_label(row.key.category) << ',' << row.key.cw << ','
       << row.key.n_sta;
    if (row.result) {
      const auto& r = *row.result;
      for (double v : {r.tau, r.e_nbo, r.e_texp, r.e_tbo, r.t_suc, r.e_t, r.r})
        os << ',' << fmt9(v);
    } else {
      for (int i = 0; i < 7; ++i)
        os << ",nan";
    }
    os << '\n';
  }
}

namespace detail {
inline std::vector<std::string> split_csv(const std::string& line)
{
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string f;
  while (std::getline(ss, f, ','))
    out.push_back(f);
  if (!line.empty() && line.back() == ',')
    out.emplace_back();
  return out;
}

inline std::string read_file(const std::filesystem::path& p)
{
  std::ifstream in(p, std::ios::binary);
  if (!in)
    throw std::runtime_error("cannot open " + p.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline std::ofstream open_out(const std::filesystem::path& p)
{
  std::ofstream out(p, std::ios::binary);
  if (!out)
    throw std::runtime_error("cannot write " + p.string());
  return out;
}
} // namespace detail

/// Parses the analytic CSV. Rows holding "nan" come back without a result.
inline std::vector<AnalyticRow> read_analytic_csv(std::istream& is)
{
  std::string line;
  if (!std::getline(is, line) || line != kAnalyticHeader)
    throw std::runtime_error("analytic csv: unexpected header");
  std::vector<AnalyticRow> rows;
  while (std::getline(is, line)) {
    if (line.empty())
      continue;
    const auto f = detail::split_csv(line);
    if (f.size() != 11)
      throw std::runtime_error("analytic csv: expected 11 fields in '" + line + "'");
    AnalyticRow row;
    row.key.policy = parse_policy_kind(f[0]);
    row.key.category = parse_category_label(f[1]);
    row.key.cw = static_cast<std::uint32_t>(std::stoul(f[2]));
    row.key.n_sta = static_cast<std::uint32_t>(std::stoul(f[3]));
    if (f[4] == "nan") {
      row.error = "not converged";
    } else {
      AnalyticalResult r;
      r.policy = row.key.policy;
      r.category = row.key.category.value_or(Category::Cat1);
      r.cw = row.key.cw;
      r.n_sta = row.key.n_sta;
      r.tau = std::stod(f[4]);
      r.e_nbo = std::stod(f[5]);
      r.e_texp = std::stod(f[6]);
      r.e_tbo = std::stod(f[7]);
      r.t_suc = std::stod(f[8]);
      r.e_t = std::stod(f[9]);
      r.r = std::stod(f[10]);
      row.result = r;
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Simulation grid
// ---------------------------------------------------------------------------

struct SimPoint {
  std::uint64_t index = 0;
  PolicyKind policy = PolicyKind::Traditional;
  std::uint32_t cw = 0;
  std::uint32_t n_sta = 0;
  Seed seed = 0;
};

/// Simulation points: policy kind, then cw, then n_sta. One run serves every
/// category of its policy.
inline std::vector<SimPoint> sim_points(const ExperimentConfig& c)
{
  std::vector<SimPoint> pts;
  std::uint64_t index = 0;
  for (auto kind : c.policy_kinds())
    for (auto cw : c.cws)
      for (auto n : c.n_sta) {
        pts.push_back({index, kind, cw, n, derive_seed(c.seed, index)});
        ++index;
      }
  return pts;
}

inline SimConfig sim_config(const ExperimentConfig& c, const SimPoint& p, std::vector<VehicleNode> nodes)
{
  SimConfig s;
  s.nodes = std::move(nodes);
  s.policy = c.policy(p.policy, p.cw);
  s.params = c.mac;
  s.sense_range = c.sense_range;
  s.n_periods = c.periods;
  s.seed = p.seed;
  s.full_connectivity = c.full_connectivity;
  s.random_phase = c.random_phase;
  s.silence_uncategorized = c.silence_uncategorized;
  return s;
}

inline std::string point_stem(const SimPoint& p)
{
  return "sim_" + std::string(to_string(p.policy)) + "_cw" + std::to_string(p.cw) + "_n" + std::to_string(p.n_sta);
}

inline constexpr const char* kOutcomeHeader = "node_id,category,delivered,sync,hn,expired";
inline constexpr const char* kBackoffHeader = "node_id,transmitted,elapsed_slots_sum,elapsed_slots_sumsq";

inline void write_outcome_csv(std::ostream& os, const SimOutcome& o)
{
  os << kOutcomeHeader << '\n';
  for (std::size_t i = 0; i < o.node_count(); ++i) {
    const auto& c = o.counters[i];
    os << o.node_ids[i] << ',' << to_string(o.categories[i]) << ',' << c.delivered << ',' << c.sync << ',' << c.hn
       << ',' << c.expired << '\n';
  }
}

inline void write_success_bits(std::ostream& os, const SimOutcome& o)
{
  for (std::size_t i = 0; i < o.node_count(); ++i)
    os << o.success_bits(i) << '\n';
}

inline void write_results(std::ostream& os, const SimOutcome& o)
{
  for (const auto& r : o.results)
    os << r << '\n';
}

inline void write_backoff_csv(std::ostream& os, const SimOutcome& o)
{
  os << kBackoffHeader << '\n';
  for (std::size_t i = 0; i < o.node_count(); ++i) {
    const auto& c = o.counters[i];
    os << o.node_ids[i] << ',' << c.transmitted() << ',' << c.elapsed_sum << ',' << c.elapsed_sumsq << '\n';
  }
}

/// Rebuilds the parts of an outcome the estimators read from the per-point
/// files.
inline SimOutcome load_outcome(const std::filesystem::path& dir, const std::string& stem, std::uint64_t periods)
{
  SimOutcome o;
  o.n_periods = periods;
  {
    std::istringstream in(detail::read_file(dir / (stem + ".csv")));
    std::string line;
    std::getline(in, line);
    if (line != kOutcomeHeader)
      throw std::runtime_error(stem + ".csv: unexpected header");
    while (std::getline(in, line)) {
      const auto f = detail::split_csv(line);
      if (f.size() != 6)
        throw std::runtime_error(stem + ".csv: malformed row");
      o.node_ids.push_back(static_cast<std::uint32_t>(std::stoul(f[0])));
      o.categories.push_back(parse_category(f[1]));
      NodeCounters c;
      c.delivered = std::stoull(f[2]);
      c.sync = std::stoull(f[3]);
      c.hn = std::stoull(f[4]);
      c.expired = std::stoull(f[5]);
      o.counters.push_back(c);
    }
  }
  {
    std::istringstream in(detail::read_file(dir / (stem + "_backoff.csv")));
    std::string line;
    std::getline(in, line);
    std::size_t i = 0;
    while (std::getline(in, line)) {
      const auto f = detail::split_csv(line);
      if (f.size() != 4 || i >= o.counters.size())
        throw std::runtime_error(stem + "_backoff.csv: malformed row");
      o.counters[i].elapsed_sum = std::stoull(f[2]);
      o.counters[i].elapsed_sumsq = std::stoull(f[3]);
      ++i;
    }
  }
  {
    std::istringstream in(detail::read_file(dir / (stem + "_results.txt")));
    std::string line;
    while (std::getline(in, line))
      o.results.push_back(line);
    if (o.results.size() != o.counters.size())
      throw std::runtime_error(stem + "_results.txt: node count mismatch");
  }
  return o;
}

struct SimManifestEntry {
  SimPoint point{};
  std::string status;  ///< "ok" or "error: ..."
  std::string stem;
};

struct SimManifest {
  Seed master_seed = 0;
  std::uint64_t periods = 0;
  bool full_connectivity = false;
  bool random_phase = false;
  std::vector<SimManifestEntry> entries;
};

inline constexpr const char* kManifestHeader = "index,policy,cw,n_sta,seed,status,stem";

inline void write_manifest(std::ostream& os, const SimManifest& m)
{
  os << "# master_seed=" << m.master_seed << '\n'
     << "# seed_rule=mix64(master_seed ^ mix64(index)), mix64=splitmix64 finalizer\n"
     << "# periods=" << m.periods << '\n'
     << "# full_connectivity=" << (m.full_connectivity ? "true" : "false") << '\n'
     << "# random_phase=" << (m.random_phase ? "true" : "false") << '\n'
     << kManifestHeader << '\n';
  for (const auto& e : m.entries)
    os << e.point.index << ',' << to_string(e.point.policy) << ',' << e.point.cw << ',' << e.point.n_sta << ','
       << e.point.seed << ',' << e.status << ',' << e.stem << '\n';
}

inline SimManifest read_manifest(std::istream& is)
{
  SimManifest m;
  std::string line;
  bool header = false;
  auto value = [](const std::string& l) { return l.substr(l.find('=') + 1); };
  while (std::getline(is, line)) {
    if (line.empty())
      continue;
    if (line[0] == '#') {
      if (line.rfind("# master_seed=", 0) == 0)
        m.master_seed = std::stoull(value(line));
      else if (line.rfind("# periods=", 0) == 0)
        m.periods = std::stoull(value(line));
      else if (line.rfind("# full_connectivity=", 0) == 0)
        m.full_connectivity = value(line) == "true";
      else if (line.rfind("# random_phase=", 0) == 0)
        m.random_phase = value(line) == "true";
      continue;
    }
    if (!header) {
      if (line != kManifestHeader)
        throw std::runtime_error("manifest: unexpected header");
      header = true;
      continue;
    }
    const auto f = detail::split_csv(line);
    if (f.size() != 7)
      throw std::runtime_error("manifest: malformed row");
    SimManifestEntry e;
    e.point.index = std::stoull(f[0]);
    e.point.policy = parse_policy_kind(f[1]);
    e.point.cw = static_cast<std::uint32_t>(std::stoul(f[2]));
    e.point.n_sta = static_cast<std::uint32_t>(std::stoul(f[3]));
    e.point.seed = std::stoull(f[4]);
    e.status = f[5];
    e.stem = f[6];
    m.entries.push_back(std::move(e));
  }
  return m;
}

/// Runs every simulation point and writes its files plus manifest.csv into
/// `dir`. A failing point is recorded in the manifest and skipped.
inline SimManifest simulate_grid(const ExperimentConfig& c, const SpatialScenario& scenario,
                                 const std::filesystem::path& dir)
{
  std::filesystem::create_directories(dir);
  SimManifest m;
  m.master_seed = c.seed;
  m.periods = c.periods;
  m.full_connectivity = c.full_connectivity;
  m.random_phase = c.random_phase;
  for (const auto& p : sim_points(c)) {
    SimManifestEntry e;
    e.point = p;
    e.stem = point_stem(p);
    try {
      const auto outcome = run_simulation(sim_config(c, p, contenders(c, scenario, p.n_sta)));
      auto f1 = detail::open_out(dir / (e.stem + ".csv"));
      write_outcome_csv(f1, outcome);
      auto f2 = detail::open_out(dir / (e.stem + "_bits.txt"));
      write_success_bits(f2, outcome);
      auto f3 = detail::open_out(dir / (e.stem + "_results.txt"));
      write_results(f3, outcome);
      auto f4 = detail::open_out(dir / (e.stem + "_backoff.csv"));
      write_backoff_csv(f4, outcome);
      e.status = "ok";
    } catch (const std::exception& ex) {
      std::string msg = ex.what();
      std::replace(msg.begin(), msg.end(), ',', ';');
      e.status = "error: " + msg;
    }
    m.entries.push_back(std::move(e));
  }
  auto mf = detail::open_out(dir / "manifest.csv");
  write_manifest(mf, m);
  return m;
}

// ---------------------------------------------------------------------------
// Report
// ---------------------------------------------------------------------------

struct SweepRow {
  GridKey key{};
  std::optional<AnalyticalResult> analytic;
  std::optional<EmpiricalEstimates> empirical;
  std::optional<ComparisonReport> comparison;
  std::string error;
};

struct SweepResultSet {
  std::vector<SweepRow> rows;
  std::vector<std::string> warnings;
  bool pass = true;
};

inline constexpr const char* kReportHeader = "metric,policy,category,cw,n_sta,analytic,empirical,ci";

/// Joins analytic rows with simulation outcomes on (policy, category, cw,
/// n_sta) and compares each point.
inline SweepResultSet join_results(const ExperimentConfig& c, const std::vector<AnalyticRow>& analytic,
                                   const SimManifest& manifest, const std::filesystem::path& sim_dir)
{
  SweepResultSet set;
  std::map<std::string, SimOutcome> loaded;
  for (const auto& a : analytic) {
    SweepRow row;
    row.key = a.key;
    row.analytic = a.result;
    const auto it = std::find_if(manifest.entries.begin(), manifest.entries.end(), [&](const auto& e) {
      return e.point.policy == a.key.policy && e.point.cw == a.key.cw && e.point.n_sta == a.key.n_sta;
    });
    const std::string where = to_string(a.key.policy).data() + std::string("/") + category_label(a.key.category) +
                              "/cw" + std::to_string(a.key.cw) + "/n" + std::to_string(a.key.n_sta);
    if (it == manifest.entries.end()) {
      row.error = "missing simulation point";
    } else if (it->status != "ok") {
      row.error = it->status;
    } else {
      auto found = loaded.find(it->stem);
      if (found == loaded.end())
        found = loaded.emplace(it->stem, load_outcome(sim_dir, it->stem, manifest.periods)).first;
      row.empirical = estimate(found->second, c.mac, a.key, c.include_uncategorized);
      if (!row.empirical)
        row.error = "no node of the tagged category";
    }
    if (!a.result && row.error.empty())
      row.error = "analytic point failed: " + a.error;
    if (row.analytic && row.empirical)
      row.comparison = compare(*row.analytic, *row.empirical, c.tolerances);
    if (!row.error.empty())
      set.warnings.push_back(where + ": " + row.error);
    set.pass = set.pass && row.comparison && row.comparison->pass;
    set.rows.push_back(std::move(row));
  }
  return set;
}

inline void write_report_csv(std::ostream& os, const SweepResultSet& set)
{
  os << kReportHeader << '\n';
  for (const auto& row : set.rows) {
    const std::string prefix = std::string(to_string(row.key.policy)) + ',' + category_label(row.key.category) + ',' +
                               std::to_string(row.key.cw) + ',' + std::to_string(row.key.n_sta);
    auto emit = [&](const char* metric, std::optional<double> a, std::optional<double> e, std::optional<double> ci) {
      os << metric << ',' << prefix << ',' << (a ? fmt9(*a) : "nan") << ',' << (e ? fmt9(*e) : "nan") << ','
         << (ci ? fmt9(*ci) : "nan") << '\n';
    };
    const auto* a = row.analytic ? &*row.analytic : nullptr;
    const auto* e = row.empirical ? &*row.empirical : nullptr;
    auto av = [&](double AnalyticalResult::*m) -> std::optional<double> {
      return a ? std::optional(a->*m) : std::nullopt;
    };
    emit("tau", av(&AnalyticalResult::tau), e ? std::optional(e->tau.value) : std::nullopt,
         e ? std::optional(e->tau.half_width) : std::nullopt);
    emit("e_nbo", av(&AnalyticalResult::e_nbo), e && e->e_nbo ? std::optional(e->e_nbo->value) : std::nullopt,
         e && e->e_nbo ? std::optional(e->e_nbo->half_width) : std::nullopt);
    emit("e_t", av(&AnalyticalResult::e_t), e ? std::optional(e->delay.delay) : std::nullopt, std::nullopt);
    emit("r", av(&AnalyticalResult::r), e ? std::optional(e->r) : std::nullopt, std::nullopt);
    emit("p_col", a ? std::optional(a->p_col_assumed) : std::nullopt, e ? std::optional(e->p_col) : std::nullopt,
         std::nullopt);
    emit("expiration_rate", a ? std::optional(1.0 - a->tau) : std::nullopt,
         e ? std::optional(e->expiration_rate) : std::nullopt, std::nullopt);
  }
}

inline constexpr const char* kIrtHeader =
    "policy,category,n_sta,n_bcn,analytic_pmf,analytic_cdf,empirical_pmf,empirical_cdf";

/// IRT tables for rows with cw == c.irt_cw. With zero_based the n_bcn column
/// counts failures before a success (gap - 1).
inline void write_irt_csv(std::ostream& os, const ExperimentConfig& c, const SweepResultSet& set)
{
  os << kIrtHeader << '\n';
  for (const auto& row : set.rows) {
    if (row.key.cw != c.irt_cw || !row.analytic || !row.empirical || !(row.analytic->tau > 0.0))
      continue;
    const auto law = irt_distribution(row.analytic->tau, c.irt_n_max);
    for (std::size_t n = 1; n <= c.irt_n_max; ++n) {
      os << to_string(row.key.policy) << ',' << category_label(row.key.category) << ',' << row.key.n_sta << ','
         << (c.zero_based_irt ? n - 1 : n) << ',' << fmt9(law.at(n)) << ',' << fmt9(law.cdf(n)) << ','
         << fmt9(row.empirical->irt.pmf(n)) << ',' << fmt9(row.empirical->irt.cdf(n)) << '\n';
    }
  }
}

inline void write_summary(std::ostream& os, const SweepResultSet& set)
{
  std::size_t passed = 0;
  for (const auto& row : set.rows) {
    os << to_string(row.key.policy) << ' ' << category_label(row.key.category) << " cw=" << row.key.cw
       << " n_sta=" << row.key.n_sta << ": ";
    if (!row.comparison) {
      os << "FAIL (" << row.error << ")\n";
      continue;
    }
    os << (row.comparison->pass ? "PASS" : "FAIL");
    for (const auto& m : row.comparison->metrics)
      os << ' ' << m.metric << " analytic=" << fmt9(m.analytic) << " empirical=" << fmt9(m.empirical)
         << " dev=" << fmt9(m.relative ? m.rel_dev : m.abs_dev) << (m.pass ? "" : " [out of tolerance]");
    os << '\n';
    passed += row.comparison->pass;
  }
  for (const auto& w : set.warnings)
    os << "warning: " << w << '\n';
  os << "overall: " << (set.pass ? "PASS" : "FAIL") << " (" << passed << '/' << set.rows.size()
     << " points within tolerance)\n";
}

/// Writes report.csv, irt_cw<irt_cw>.csv and summary.txt into `dir`.
inline SweepResultSet write_report(const ExperimentConfig& c, const std::filesystem::path& analytic_csv,
                                   const std::filesystem::path& manifest_csv, const std::filesystem::path& dir)
{
  std::istringstream a(detail::read_file(analytic_csv));
  std::istringstream m(detail::read_file(manifest_csv));
  const auto set = join_results(c, read_analytic_csv(a), read_manifest(m), manifest_csv.parent_path());
  std::filesystem::create_directories(dir);
  auto r = detail::open_out(dir / "report.csv");
  write_report_csv(r, set);
  auto i = detail::open_out(dir / ("irt_cw" + std::to_string(c.irt_cw) + ".csv"));
  write_irt_csv(i, c, set);
  auto s = detail::open_out(dir / "summary.txt");
  write_summary(s, set);
  return set;
}

} // namespace vbcast
