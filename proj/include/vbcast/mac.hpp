#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>

namespace vbcast {

/// MAC timing constants. Durations in seconds.
struct MacParameters {
  double t_ibi = 0.100;          ///< inter-broadcast interval
  double t_slot = 50e-6;
  double difs = 128e-6;
  double sifs = 28e-6;
  double header_airtime = 40e-6; ///< PHY/MAC header airtime (Hdr)
  std::uint32_t payload_bytes = 40;
  double data_rate = 6e6;        ///< bits per second
  double t_prop = 1e-6;
  /// Overrides floor(t_ibi / t_slot) when set.
  std::optional<std::uint32_t> slots_per_beacon_override;

  double payload_airtime() const noexcept { return 8.0 * payload_bytes / data_rate; }

  std::uint32_t slots_per_beacon() const noexcept
  {
    if (slots_per_beacon_override)
      return *slots_per_beacon_override;
    // Guard against 0.1 / 50e-6 landing just below an integer.
    return static_cast<std::uint32_t>(std::floor(t_ibi / t_slot + 1e-9));
  }

  void validate() const
  {
    if (!(t_ibi > 0 && t_slot > 0 && difs > 0 && sifs > 0 && t_prop > 0 && data_rate > 0))
      throw std::invalid_argument("mac: durations and data rate must be positive");
    if (header_airtime < 0)
      throw std::invalid_argument("mac: header airtime must be non-negative");
    if (slots_per_beacon() < 1)
      throw std::invalid_argument("mac: a beacon period must hold at least one slot");
  }

  friend bool operator==(const MacParameters&, const MacParameters&) = default;
};

/// Hdr + Pld + SIFS + T_prop.
inline double success_time(const MacParameters& p) noexcept
{
  return p.header_airtime + p.payload_airtime() + p.sifs + p.t_prop;
}

/// Whole slots a transmission keeps the medium busy: ceil((DIFS + T_suc) / t_slot).
inline std::uint32_t occupancy_slots(const MacParameters& p) noexcept
{
  const double slots = (p.difs + success_time(p)) / p.t_slot;
  return static_cast<std::uint32_t>(std::ceil(slots - 1e-9));
}

} // namespace vbcast
