#pragma once

// Analytical performance model for one tagged station.
//
// The per-beacon transmit probability tau is the fixed point of a slotted
// contention model: the tagged station draws B from its backoff range and
// needs B idle slots before it can transmit; each slot is busy with
// probability p_busy = 1 - (1 - tau_other / S)^(n_sta - 1), S being the slots
// per beacon. The busy slots met before the B-th idle one follow a negative
// binomial law, so tau = E_B[ P(B + K <= S - 1) ]. Latency, throughput and
// the inter-reception time law follow from tau in closed form.

#include <vbcast/geometry.hpp>
#include <vbcast/mac.hpp>
#include <vbcast/policy.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace vbcast {

/// Share of contenders in each category, indexed by index_of(Category).
struct CategoryMix {
  std::array<double, 4> weights{1.0, 0.0, 0.0, 0.0};

  /// Proportions of a node set; `include_uncategorized` = false drops them.
  static CategoryMix from_nodes(const std::vector<VehicleNode>& nodes, bool include_uncategorized = true)
  {
    CategoryMix mix;
    mix.weights = {};
    for (const auto& n : nodes)
      if (include_uncategorized || n.category != Category::Uncategorized)
        mix.weights[index_of(n.category)] += 1.0;
    mix.normalize();
    return mix;
  }

  /// Expected proportions for a uniform drop (area of each distance annulus
  /// clipped to the region is approximated by the full annulus).
  static CategoryMix from_geometry(const RegionSpec& region, const CategoryThresholds& th)
  {
    constexpr double pi = 3.14159265358979323846;
    const double a = region.area();
    CategoryMix mix;
    mix.weights[0] = pi * th.th1 * th.th1 / a;
    mix.weights[1] = pi * (th.th2 * th.th2 - th.th1 * th.th1) / a;
    mix.weights[2] = pi * (th.th3 * th.th3 - th.th2 * th.th2) / a;
    mix.weights[3] = std::max(0.0, 1.0 - mix.weights[0] - mix.weights[1] - mix.weights[2]);
    mix.normalize();
    return mix;
  }

  void normalize()
  {
    double total = 0.0;
    for (double w : weights)
      total += w;
    if (total <= 0.0)
      throw std::invalid_argument("category mix: no contenders");
    for (double& w : weights)
      w /= total;
  }

  friend bool operator==(const CategoryMix&, const CategoryMix&) = default;
};

struct ContentionConfig {
  std::uint32_t n_sta = 1;
  BackoffPolicy policy{};
  Category category = Category::Cat1;
  MacParameters params{};
  CategoryMix mix{};

  void validate() const
  {
    if (n_sta < 1)
      throw std::invalid_argument("contention: n_sta must be at least 1");
    policy.validate();
    params.validate();
  }
};

struct TauSolution {
  double tau = 1.0;
  std::uint32_t iterations = 0;
  double residual = 0.0;
  double p_busy = 0.0;
  bool converged = false;
  /// Fixed-point transmit probability of each backoff chunk (Cat1, Cat2,
  /// Cat3/uncategorized); all equal under the traditional policy.
  std::array<double, 3> tau_by_chunk{1.0, 1.0, 1.0};
};

class ConvergenceError : public std::runtime_error {
public:
  ConvergenceError(const std::string& what, TauSolution last)
      : std::runtime_error(what), last_(last)
  {
  }
  const TauSolution& last() const noexcept { return last_; }

private:
  TauSolution last_;
};

namespace detail {

struct ChunkStats {
  double tx_prob = 0.0;       ///< E_B[P(B + K <= S - 1)]
  double elapsed_mass = 0.0;  ///< E_B[E[(B + K) 1{B + K <= S - 1}]]
};

/// Negative-binomial accounting for one backoff range under a per-slot busy
/// probability.
inline ChunkStats chunk_stats(const BackoffRange& range, double p_busy, std::uint32_t slots)
{
  ChunkStats out;
  const double p_idle = 1.0 - p_busy;
  const double log_idle = std::log(p_idle);
  const double log_busy = std::log(p_busy);
  const double width = range.width();
  for (std::uint32_t b = range.lo; b <= range.hi; ++b) {
    if (b > slots - 1)
      break;
    const std::uint32_t max_busy = slots - 1 - b;
    double mass = 0.0;
    double elapsed = 0.0;
    if (b == 0 || p_busy <= 0.0) {
      mass = 1.0;
      elapsed = b;
    } else if (p_idle > 0.0) {
      double log_pmf = b * log_idle;
      double peak = -std::numeric_limits<double>::infinity();
      for (std::uint32_t k = 0; k <= max_busy; ++k) {
        const double pmf = std::exp(log_pmf);
        mass += pmf;
        elapsed += pmf * static_cast<double>(b + k);
        peak = std::max(peak, log_pmf);
        // Past the mode the terms only shrink; stop once negligible.
        if (log_pmf < peak - 45.0 && pmf < 1e-20 * mass)
          break;
        log_pmf += std::log(static_cast<double>(b + k)) - std::log(static_cast<double>(k + 1)) + log_busy;
      }
    }
    out.tx_prob += std::min(mass, 1.0) / width;
    out.elapsed_mass += elapsed / width;
  }
  return out;
}

inline double busy_probability(double tau_other, std::uint32_t n_sta, std::uint32_t slots)
{
  if (n_sta <= 1)
    return 0.0;
  const double per_slot = std::clamp(tau_other / slots, 0.0, 1.0);
  return 1.0 - std::pow(1.0 - per_slot, static_cast<double>(n_sta - 1));
}

inline std::size_t chunk_of(Category c) noexcept
{
  return c == Category::Uncategorized ? 2 : index_of(c);
}

} // namespace detail

/// Chunk ranges under `policy` in chunk order (Cat1, Cat2, Cat3).
inline std::array<BackoffRange, 3> chunk_ranges(const BackoffPolicy& policy)
{
  return {backoff_range(policy, Category::Cat1), backoff_range(policy, Category::Cat2),
          backoff_range(policy, Category::Cat3)};
}

/// Contender weight of each chunk; uncategorized nodes contend in Cat3's chunk.
inline std::array<double, 3> chunk_weights(const ContentionConfig& c)
{
  if (c.policy.kind == PolicyKind::Traditional)
    return {1.0, 0.0, 0.0};
  const auto& w = c.mix.weights;
  return {w[0], w[1], w[2] + w[3]};
}

/// One application of the fixed-point map. Returns per-chunk tau and the
/// busy probability induced by `tau_chunks`.
inline std::array<double, 3> tau_map(const ContentionConfig& c, const std::array<double, 3>& tau_chunks,
                                     double* p_busy_out = nullptr)
{
  const auto ranges = chunk_ranges(c.policy);
  const auto weights = chunk_weights(c);
  const std::uint32_t slots = c.params.slots_per_beacon();
  double tau_other = 0.0;
  for (std::size_t i = 0; i < 3; ++i)
    tau_other += weights[i] * tau_chunks[i];
  const double p_busy = detail::busy_probability(tau_other, c.n_sta, slots);
  if (p_busy_out)
    *p_busy_out = p_busy;

  std::array<double, 3> next{};
  if (c.policy.kind == PolicyKind::Traditional) {
    const double t = detail::chunk_stats(ranges[0], p_busy, slots).tx_prob;
    next = {t, t, t};
  } else {
    for (std::size_t i = 0; i < 3; ++i)
      next[i] = detail::chunk_stats(ranges[i], p_busy, slots).tx_prob;
  }
  return next;
}

/// Damped fixed-point iteration from tau = 1 with damping 0.5. Stops when one
/// application of the map moves every chunk by less than `tol`; the returned
/// tau is the point at which that residual was measured.
inline TauSolution solve_tau(const ContentionConfig& c, double tol = 1e-10, std::uint32_t max_iter = 1000)
{
  c.validate();
  if (!(tol > 0.0))
    throw std::invalid_argument("solve_tau: tolerance must be positive");
  constexpr double damping = 0.5;

  TauSolution sol;
  std::array<double, 3> tau{1.0, 1.0, 1.0};
  for (std::uint32_t it = 1; it <= max_iter; ++it) {
    double p_busy = 0.0;
    const auto mapped = tau_map(c, tau, &p_busy);
    double residual = 0.0;
    for (std::size_t i = 0; i < 3; ++i)
      residual = std::max(residual, std::abs(mapped[i] - tau[i]));
    sol.iterations = it;
    sol.residual = residual;
    sol.p_busy = p_busy;
    sol.tau_by_chunk = tau;
    sol.tau = tau[detail::chunk_of(c.category)];
    if (residual < tol) {
      sol.converged = true;
      return sol;
    }
    for (std::size_t i = 0; i < 3; ++i)
      tau[i] = (1.0 - damping) * mapped[i] + damping * tau[i];
  }
  return sol;
}

/// Expected slots from packet generation to transmission for the tagged
/// station, conditioned on transmitting before expiration, at the busy
/// probability implied by `sol`.
inline double expected_backoff_slots(const ContentionConfig& c, const TauSolution& sol)
{
  const auto range = backoff_range(c.policy, c.category);
  const auto stats = detail::chunk_stats(range, sol.p_busy, c.params.slots_per_beacon());
  if (stats.tx_prob <= 0.0)
    return std::numeric_limits<double>::quiet_NaN();
  return stats.elapsed_mass / stats.tx_prob;
}

/// E[T_exp] = t_ibi (1 - tau) / tau.
inline double expiration_time(double tau, const MacParameters& p)
{
  if (!(tau > 0.0 && tau <= 1.0))
    throw std::domain_error("expiration_time: tau must be in (0, 1]");
  return p.t_ibi * (1.0 - tau) / tau;
}

/// E[T_bo] = t_slot E[N_bo].
inline double backoff_time(double e_nbo, const MacParameters& p)
{
  if (!(e_nbo >= 0.0))
    throw std::domain_error("backoff_time: expected slots must be non-negative");
  return p.t_slot * e_nbo;
}

/// E[T] = (1 - tau) E[T_exp] + tau (E[T_bo] + T_suc), collisions neglected.
inline double average_latency(double tau, double e_texp, double e_tbo, double t_suc) noexcept
{
  return (1.0 - tau) * e_texp + tau * (e_tbo + t_suc);
}

/// R = tau T_suc / E[T].
inline double normalized_throughput(double tau, double t_suc, double e_t)
{
  if (!(e_t > 0.0))
    throw std::domain_error("normalized_throughput: latency must be positive");
  const double r = tau * t_suc / e_t;
  if (!(r >= 0.0 && r <= 1.0 + 1e-12))
    throw std::logic_error("normalized_throughput: result outside [0, 1]");
  return std::min(r, 1.0);
}

struct AnalyticalResult {
  PolicyKind policy = PolicyKind::Traditional;
  Category category = Category::Cat1;
  std::uint32_t cw = 0;
  std::uint32_t n_sta = 0;

  double tau = 0.0;
  double e_nbo = 0.0;
  double e_texp = 0.0;
  double e_tbo = 0.0;
  double t_suc = 0.0;
  double e_t = 0.0;
  double r = 0.0;
  double p_col_assumed = 0.0;

  TauSolution solution{};

  /// Latency recombined from the stored parts.
  double recombined_latency() const noexcept { return average_latency(tau, e_texp, e_tbo, t_suc); }
};

/// Full model for one configuration. Throws ConvergenceError when the tau
/// iteration does not settle within `max_iter`.
inline AnalyticalResult analyze(const ContentionConfig& c, double tol = 1e-10, std::uint32_t max_iter = 1000)
{
  const TauSolution sol = solve_tau(c, tol, max_iter);
  if (!sol.converged)
    throw ConvergenceError("solve_tau did not converge (residual " + std::to_string(sol.residual) + ")", sol);

  AnalyticalResult r;
  r.policy = c.policy.kind;
  r.category = c.category;
  r.cw = c.policy.cw;
  r.n_sta = c.n_sta;
  r.solution = sol;
  r.tau = sol.tau;
  r.e_nbo = expected_backoff_slots(c, sol);
  r.e_texp = expiration_time(r.tau, c.params);
  r.e_tbo = backoff_time(r.e_nbo, c.params);
  r.t_suc = success_time(c.params);
  r.e_t = average_latency(r.tau, r.e_texp, r.e_tbo, r.t_suc);
  r.r = normalized_throughput(r.tau, r.t_suc, r.e_t);
  return r;
}

/// Geometric inter-reception law truncated at n_max beacon periods.
struct IrtDistribution {
  double tau = 1.0;
  std::vector<double> pmf;  ///< pmf[n - 1] = P(IRT = n), n = 1..n_max
  double truncation_mass = 0.0;

  std::size_t n_max() const noexcept { return pmf.size(); }

  double at(std::size_t n) const noexcept { return n >= 1 && n <= pmf.size() ? pmf[n - 1] : 0.0; }

  double cdf(std::size_t n) const noexcept
  {
    double s = 0.0;
    for (std::size_t i = 1; i <= std::min(n, pmf.size()); ++i)
      s += pmf[i - 1];
    return s;
  }

  /// Mean of the truncated part plus the exact geometric tail beyond n_max.
  double mean() const noexcept
  {
    double m = 0.0;
    for (std::size_t n = 1; n <= pmf.size(); ++n)
      m += static_cast<double>(n) * pmf[n - 1];
    if (tau > 0.0)
      m += truncation_mass * (static_cast<double>(pmf.size()) + 1.0 / tau);
    return m;
  }
};

inline IrtDistribution irt_distribution(double tau, std::size_t n_max)
{
  if (!(tau > 0.0 && tau <= 1.0))
    throw std::domain_error("irt_distribution: tau must be in (0, 1]");
  if (n_max < 1)
    throw std::domain_error("irt_distribution: n_max must be at least 1");
  IrtDistribution d;
  d.tau = tau;
  d.pmf.resize(n_max);
  double survive = 1.0;  // (1 - tau)^(n - 1)
  for (std::size_t n = 1; n <= n_max; ++n) {
    d.pmf[n - 1] = survive * tau;
    survive *= 1.0 - tau;
  }
  d.truncation_mass = survive;
  return d;
}

} // namespace vbcast
