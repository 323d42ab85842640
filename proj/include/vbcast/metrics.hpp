#pragma once

// Empirical estimators over simulation outcomes and analytic-vs-empirical
// comparison.

#include <vbcast/analytic.hpp>
#include <vbcast/sim.hpp>

#include <boost/math/distributions/chi_squared.hpp>

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace vbcast {

/// Identifies a grid point. A missing category means "all reported nodes"
/// (used for the traditional policy, which ignores categories).
struct GridKey {
  PolicyKind policy = PolicyKind::Traditional;
  std::optional<Category> category;
  std::uint32_t cw = 0;
  std::uint32_t n_sta = 0;

  friend bool operator==(const GridKey&, const GridKey&) = default;
};

inline std::string category_label(const std::optional<Category>& c)
{
  return c ? std::string(to_string(*c)) : std::string("all");
}

inline std::optional<Category> parse_category_label(std::string_view s)
{
  if (s == "all")
    return std::nullopt;
  return parse_category(s);
}

/// Which outcome nodes an estimate aggregates over.
struct NodeScope {
  std::optional<Category> category;
  bool include_uncategorized = false;

  bool admits(Category c) const noexcept
  {
    if (category)
      return c == *category;
    return include_uncategorized || c != Category::Uncategorized;
  }
};

struct ProportionEstimate {
  double value = 0.0;
  double half_width = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  std::uint64_t trials = 0;

  bool covers(double x) const noexcept { return x >= lower - 1e-12 && x <= upper + 1e-12; }
};

/// 95% interval: normal approximation, Wilson score at or near the
/// boundaries (fewer than 5 expected successes or failures).
inline ProportionEstimate proportion_ci(std::uint64_t successes, std::uint64_t trials)
{
  if (trials == 0)
    throw std::invalid_argument("proportion_ci: no trials");
  constexpr double z = 1.959963984540054;
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  ProportionEstimate e;
  e.value = p;
  e.trials = trials;
  if (n * p < 5.0 || n * (1.0 - p) < 5.0) {
    const double z2 = z * z;
    const double centre = (p + z2 / (2 * n)) / (1 + z2 / n);
    const double spread = z * std::sqrt(p * (1 - p) / n + z2 / (4 * n * n)) / (1 + z2 / n);
    e.lower = std::max(0.0, centre - spread);
    e.upper = std::min(1.0, centre + spread);
    e.half_width = (e.upper - e.lower) / 2.0;
  } else {
    e.half_width = z * std::sqrt(p * (1 - p) / n);
    e.lower = std::max(0.0, p - e.half_width);
    e.upper = std::min(1.0, p + e.half_width);
  }
  return e;
}

namespace detail {
struct ScopeTotals {
  std::uint64_t nodes = 0;
  NodeCounters sum{};
};

inline ScopeTotals totals(const SimOutcome& o, const NodeScope& scope)
{
  ScopeTotals t;
  for (std::size_t i = 0; i < o.node_count(); ++i) {
    if (!scope.admits(o.categories[i]))
      continue;
    ++t.nodes;
    const auto& c = o.counters[i];
    t.sum.delivered += c.delivered;
    t.sum.sync += c.sync;
    t.sum.hn += c.hn;
    t.sum.expired += c.expired;
    t.sum.elapsed_sum += c.elapsed_sum;
    t.sum.elapsed_sumsq += c.elapsed_sumsq;
  }
  return t;
}
} // namespace detail

/// Per-beacon transmit fraction (Delivered + SYNC + HN) / periods over the
/// scope's nodes. nullopt when the scope holds no node.
inline std::optional<ProportionEstimate> estimate_tau(const SimOutcome& o, const NodeScope& scope = {})
{
  const auto t = detail::totals(o, scope);
  if (t.nodes == 0)
    return std::nullopt;
  return proportion_ci(t.sum.transmitted(), t.sum.total());
}

struct MeanEstimate {
  double value = 0.0;
  double half_width = 0.0;
  std::uint64_t samples = 0;
};

/// Mean slots from generation to transmission over transmitted packets.
inline std::optional<MeanEstimate> estimate_backoff_slots(const SimOutcome& o, const NodeScope& scope = {})
{
  const auto t = detail::totals(o, scope);
  const std::uint64_t n = t.sum.transmitted();
  if (n == 0)
    return std::nullopt;
  const double mean = static_cast<double>(t.sum.elapsed_sum) / n;
  const double var = n > 1 ? std::max(0.0, (static_cast<double>(t.sum.elapsed_sumsq) - n * mean * mean) / (n - 1))
                           : 0.0;
  return MeanEstimate{mean, 1.959963984540054 * std::sqrt(var / n), n};
}

struct DelayEstimate {
  double delay = 0.0;          ///< (1 - tau) T_exp + tau (T_bo + T_suc)
  double tau = 0.0;
  double expiration = 0.0;     ///< t_ibi * wasted periods per transmission
  double transmitted = 0.0;    ///< mean latency of transmitted packets
  double transmitted_half_width = 0.0;
};

/// Packet latency estimate. Transmitted packets cost elapsed slots * t_slot +
/// T_suc. Expired packets are accounted in whole beacon periods: t_ibi times
/// the wasted periods per transmission, or times the mean failure-run length
/// when nothing was transmitted.
inline std::optional<DelayEstimate> estimate_delay(const SimOutcome& o, const MacParameters& params,
                                                   const NodeScope& scope = {})
{
  const auto t = detail::totals(o, scope);
  if (t.nodes == 0)
    return std::nullopt;
  DelayEstimate d;
  const std::uint64_t tx = t.sum.transmitted();
  const std::uint64_t total = t.sum.total();
  d.tau = static_cast<double>(tx) / total;
  const double t_suc = success_time(params);
  if (tx > 0) {
    const auto nbo = *estimate_backoff_slots(o, scope);
    d.transmitted = nbo.value * params.t_slot + t_suc;
    d.transmitted_half_width = nbo.half_width * params.t_slot;
    d.expiration = params.t_ibi * static_cast<double>(t.sum.expired) / tx;
  } else {
    std::uint64_t runs = 0;
    for (std::size_t i = 0; i < o.node_count(); ++i) {
      if (!scope.admits(o.categories[i]))
        continue;
      const auto& r = o.results[i];
      for (std::size_t p = 0; p < r.size(); ++p)
        if (r[p] == static_cast<char>(BeaconResult::Expired) &&
            (p == 0 || r[p - 1] != static_cast<char>(BeaconResult::Expired)))
          ++runs;
    }
    d.expiration = runs ? params.t_ibi * static_cast<double>(t.sum.expired) / runs : 0.0;
  }
  d.delay = (1.0 - d.tau) * d.expiration + d.tau * d.transmitted;
  return d;
}

/// Empirical inter-reception law. counts[n - 1] = number of gaps of n periods.
struct IrtEstimate {
  std::vector<std::uint64_t> counts;
  std::uint64_t gaps = 0;
  std::uint64_t sequences_without_gaps = 0;

  double pmf(std::size_t n) const noexcept
  {
    return gaps && n >= 1 && n <= counts.size() ? static_cast<double>(counts[n - 1]) / gaps : 0.0;
  }

  double cdf(std::size_t n) const noexcept
  {
    if (!gaps)
      return 0.0;
    std::uint64_t s = 0;
    for (std::size_t i = 1; i <= std::min(n, counts.size()); ++i)
      s += counts[i - 1];
    return static_cast<double>(s) / gaps;
  }

  double mean() const noexcept
  {
    if (!gaps)
      return 0.0;
    double m = 0.0;
    for (std::size_t n = 1; n <= counts.size(); ++n)
      m += static_cast<double>(n) * counts[n - 1];
    return m / gaps;
  }

  std::size_t max_gap() const noexcept { return counts.size(); }
};

/// Gaps between consecutive '1's; "11" gives a gap of 1. Sequences with fewer
/// than two successes add no gap and are counted separately.
inline IrtEstimate estimate_irt(const std::vector<std::string>& sequences)
{
  IrtEstimate e;
  for (const auto& s : sequences) {
    std::optional<std::size_t> last;
    bool any_gap = false;
    for (std::size_t p = 0; p < s.size(); ++p) {
      if (s[p] != '1')
        continue;
      if (last) {
        const std::size_t gap = p - *last;
        if (e.counts.size() < gap)
          e.counts.resize(gap, 0);
        ++e.counts[gap - 1];
        ++e.gaps;
        any_gap = true;
      }
      last = p;
    }
    if (!any_gap)
      ++e.sequences_without_gaps;
  }
  return e;
}

inline std::vector<std::string> success_sequences(const SimOutcome& o, const NodeScope& scope = {})
{
  std::vector<std::string> seqs;
  for (std::size_t i = 0; i < o.node_count(); ++i)
    if (scope.admits(o.categories[i]))
      seqs.push_back(o.success_bits(i));
  return seqs;
}

struct GoodnessOfFit {
  double statistic = 0.0;
  std::size_t bins = 0;
  double dof = 0.0;
  double p_value = 1.0;
  bool rejected = false;
};

/// Pearson chi-square of observed gaps against Geometric(p) on {1, 2, ...}.
/// Adjacent bins are pooled left to right until each expects at least 5;
/// the last bin absorbs the whole tail.
inline GoodnessOfFit geometric_gof(const IrtEstimate& irt, double p, double alpha = 0.01,
                                   unsigned estimated_params = 1)
{
  if (!(p > 0.0 && p <= 1.0))
    throw std::domain_error("geometric_gof: p must be in (0, 1]");
  if (irt.gaps == 0)
    throw std::invalid_argument("geometric_gof: no gaps observed");
  const double total = static_cast<double>(irt.gaps);

  struct Bin {
    double observed = 0.0;
    double expected = 0.0;
  };
  std::vector<Bin> bins;
  Bin current;
  double survive = 1.0;  // P(X >= n)
  const std::size_t last_n = std::max<std::size_t>(irt.max_gap(), 1);
  for (std::size_t n = 1;; ++n) {
    const double pn = survive * p;
    survive *= 1.0 - p;
    current.observed += n <= irt.counts.size() ? static_cast<double>(irt.counts[n - 1]) : 0.0;
    current.expected += total * pn;
    const double tail_expected = total * survive;
    if (current.expected >= 5.0 && tail_expected >= 5.0) {
      bins.push_back(current);
      current = {};
    }
    if (n >= last_n && tail_expected < 5.0) {
      // Fold the remaining tail into the open bin (or the previous one).
      current.expected += tail_expected;
      if (current.expected < 5.0 && !bins.empty()) {
        bins.back().observed += current.observed;
        bins.back().expected += current.expected;
      } else {
        bins.push_back(current);
      }
      break;
    }
  }

  GoodnessOfFit g;
  g.bins = bins.size();
  for (const auto& b : bins)
    if (b.expected > 0.0)
      g.statistic += (b.observed - b.expected) * (b.observed - b.expected) / b.expected;
    else if (b.observed > 0.0)
      g.statistic = std::numeric_limits<double>::infinity();
  g.dof = static_cast<double>(bins.size()) - 1.0 - estimated_params;
  if (g.dof < 1.0) {
    // Degenerate law (p = 1 or too few bins): only an exact match passes.
    g.p_value = g.statistic == 0.0 ? 1.0 : 0.0;
  } else if (std::isinf(g.statistic)) {
    g.p_value = 0.0;
  } else {
    boost::math::chi_squared dist(g.dof);
    g.p_value = boost::math::cdf(boost::math::complement(dist, g.statistic));
  }
  g.rejected = g.p_value < alpha;
  return g;
}

struct EmpiricalEstimates {
  GridKey key{};
  ProportionEstimate tau{};
  std::optional<MeanEstimate> e_nbo;
  DelayEstimate delay{};
  double r = 0.0;
  double p_col = 0.0;           ///< collisions / transmissions
  double expiration_rate = 0.0; ///< expired / periods
  double collision_rate = 0.0;  ///< collisions / periods
  IrtEstimate irt{};
  std::uint64_t nodes = 0;
  std::uint64_t periods = 0;
};

/// All estimates for one scope. nullopt when the scope holds no node.
inline std::optional<EmpiricalEstimates> estimate(const SimOutcome& o, const MacParameters& params,
                                                  const GridKey& key, bool include_uncategorized = false)
{
  const NodeScope scope{key.category, include_uncategorized};
  const auto t = detail::totals(o, scope);
  if (t.nodes == 0)
    return std::nullopt;
  EmpiricalEstimates e;
  e.key = key;
  e.tau = *estimate_tau(o, scope);
  e.e_nbo = estimate_backoff_slots(o, scope);
  e.delay = *estimate_delay(o, params, scope);
  e.r = e.delay.delay > 0.0 ? e.delay.tau * success_time(params) / e.delay.delay : 0.0;
  const std::uint64_t tx = t.sum.transmitted();
  const std::uint64_t col = t.sum.sync + t.sum.hn;
  e.p_col = tx ? static_cast<double>(col) / tx : 0.0;
  e.expiration_rate = static_cast<double>(t.sum.expired) / t.sum.total();
  e.collision_rate = static_cast<double>(col) / t.sum.total();
  e.irt = estimate_irt(success_sequences(o, scope));
  e.nodes = t.nodes;
  e.periods = o.n_periods;
  return e;
}

struct Tolerances {
  double tau_abs = 0.05;
  std::optional<double> e_nbo_rel;
  std::optional<double> delay_rel;
  std::optional<double> r_rel;
};

struct MetricComparison {
  std::string metric;
  double analytic = 0.0;
  double empirical = 0.0;
  double abs_dev = 0.0;
  double rel_dev = 0.0;
  double tolerance = 0.0;
  bool relative = false;
  bool pass = true;
};

struct ComparisonReport {
  GridKey key{};
  std::vector<MetricComparison> metrics;
  bool pass = true;

  const MetricComparison* find(std::string_view name) const
  {
    for (const auto& m : metrics)
      if (m.metric == name)
        return &m;
    return nullptr;
  }
};

/// Compares the enabled metrics; a report passes iff all of them do.
inline ComparisonReport compare(const AnalyticalResult& a, const EmpiricalEstimates& e, const Tolerances& tol = {})
{
  const GridKey analytic_key{a.policy, a.policy == PolicyKind::Traditional ? e.key.category : std::optional(a.category),
                             a.cw, a.n_sta};
  if (!(analytic_key == e.key))
    throw std::invalid_argument("compare: analytic and empirical results describe different configurations");

  ComparisonReport rep;
  rep.key = e.key;
  auto add = [&](std::string name, double av, double ev, double t, bool relative) {
    MetricComparison m;
    m.metric = std::move(name);
    m.analytic = av;
    m.empirical = ev;
    m.abs_dev = std::abs(av - ev);
    m.rel_dev = av != 0.0 ? m.abs_dev / std::abs(av) : (m.abs_dev == 0.0 ? 0.0 : std::numeric_limits<double>::infinity());
    m.tolerance = t;
    m.relative = relative;
    m.pass = (relative ? m.rel_dev : m.abs_dev) <= t;
    rep.pass = rep.pass && m.pass;
    rep.metrics.push_back(std::move(m));
  };
  add("tau", a.tau, e.tau.value, tol.tau_abs, false);
  if (tol.e_nbo_rel && e.e_nbo)
    add("e_nbo", a.e_nbo, e.e_nbo->value, *tol.e_nbo_rel, true);
  if (tol.delay_rel)
    add("e_t", a.e_t, e.delay.delay, *tol.delay_rel, true);
  if (tol.r_rel)
    add("r", a.r, e.r, *tol.r_rel, true);
  return rep;
}

} // namespace vbcast
