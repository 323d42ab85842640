#pragma once

// Backoff-counter allocation: the uniform full-window baseline and the
// distance-prioritised scheme that splits the window into three chunks.

#include <vbcast/geometry.hpp>
#include <vbcast/rng.hpp>

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace vbcast {

enum class PolicyKind : std::uint8_t { Traditional, Proposed };

inline std::string_view to_string(PolicyKind k) noexcept
{
  return k == PolicyKind::Traditional ? "traditional" : "proposed";
}

inline PolicyKind parse_policy_kind(std::string_view s)
{
  if (s == "traditional")
    return PolicyKind::Traditional;
  if (s == "proposed")
    return PolicyKind::Proposed;
  throw std::invalid_argument("unknown policy '" + std::string(s) + "'");
}

/// Inclusive slot range [lo, hi].
struct BackoffRange {
  std::uint32_t lo = 0;
  std::uint32_t hi = 0;

  std::uint32_t width() const noexcept { return hi - lo + 1; }
  double mean() const noexcept { return (static_cast<double>(lo) + hi) / 2.0; }
  bool contains(std::uint32_t v) const noexcept { return v >= lo && v <= hi; }

  friend bool operator==(const BackoffRange&, const BackoffRange&) = default;
};

struct BackoffPolicy {
  PolicyKind kind = PolicyKind::Traditional;
  std::uint32_t cw = 127;
  std::optional<CategoryThresholds> thresholds;

  static BackoffPolicy traditional(std::uint32_t cw) { return {PolicyKind::Traditional, cw, std::nullopt}; }

  static BackoffPolicy proposed(std::uint32_t cw, CategoryThresholds th = {})
  {
    return {PolicyKind::Proposed, cw, th};
  }

  void validate() const
  {
    if (cw < 1)
      throw std::invalid_argument("policy: cw must be positive");
    if (kind == PolicyKind::Proposed) {
      if (cw < 3)
        throw std::invalid_argument("policy: proposed scheme needs cw >= 3");
      if (!thresholds)
        throw std::invalid_argument("policy: proposed scheme needs category thresholds");
      thresholds->validate();
    }
  }

  friend bool operator==(const BackoffPolicy&, const BackoffPolicy&) = default;
};

/// Slot range a node of `category` draws its backoff from. Proposed chunks
/// cut at floor((cw-1)/3) and floor(2(cw-1)/3); a shared endpoint goes to the
/// lower chunk. Uncategorized nodes use the Cat3 chunk.
inline BackoffRange backoff_range(const BackoffPolicy& policy, Category category)
{
  policy.validate();
  const std::uint32_t top = policy.cw - 1;
  if (policy.kind == PolicyKind::Traditional)
    return {0, top};
  const std::uint32_t cut1 = top / 3;
  const std::uint32_t cut2 = (2 * top) / 3;
  switch (category) {
  case Category::Cat1: return {0, cut1};
  case Category::Cat2: return {cut1 + 1, cut2};
  case Category::Cat3:
  case Category::Uncategorized: return {cut2 + 1, top};
  }
  return {0, top};
}

inline std::uint32_t draw_backoff(const BackoffRange& range, Rng& rng)
{
  return static_cast<std::uint32_t>(rng.uniform_int(range.lo, range.hi));
}

inline std::uint32_t draw_backoff(const BackoffPolicy& policy, Category category, Rng& rng)
{
  return draw_backoff(backoff_range(policy, category), rng);
}

} // namespace vbcast
