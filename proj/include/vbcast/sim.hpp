#pragma once

// Slotted Monte Carlo engine for saturated per-beacon broadcast.
//
// Every node generates one packet per beacon period and draws a backoff from
// its policy range. A pending node transmits at the first slot in which its
// counter is zero and no neighbour transmission is in progress; otherwise the
// counter decrements on every slot it senses idle. A transmission keeps the
// medium busy for occupancy_slots() slots. Packets still pending when the
// next one is generated expire.
//
// The loop jumps between events (transmission starts and ends, counters
// reaching zero, packet generation), so a period costs O(events * nodes)
// rather than O(slots * nodes).

#include <vbcast/geometry.hpp>
#include <vbcast/mac.hpp>
#include <vbcast/policy.hpp>
#include <vbcast/rng.hpp>

#include <algorithm>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace vbcast {

enum class BeaconResult : char {
  Delivered = 'D',
  CollidedSync = 'S',
  CollidedHidden = 'H',
  Expired = 'E',
};

/// Hook that pins the backoff of (node index, period); nullopt draws normally.
using BackoffHook = std::function<std::optional<std::uint32_t>(std::size_t node, std::uint64_t period)>;

struct SimConfig {
  /// Contending nodes. Node order fixes RNG consumption and output order.
  std::vector<VehicleNode> nodes;
  BackoffPolicy policy{};
  MacParameters params{};
  double sense_range = 700.0;
  std::uint64_t n_periods = 1000;
  Seed seed = 1;
  bool full_connectivity = false;
  /// Give each node a fixed random phase offset instead of aligned periods.
  bool random_phase = false;
  /// Uncategorized nodes do not transmit at all (they are removed up front).
  bool silence_uncategorized = false;
  BackoffHook backoff_hook;
  /// Keep every transmission event in the outcome.
  bool record_events = false;
};

/// One transmission. Slots are absolute; `end` is exclusive.
struct TxEvent {
  std::uint32_t node = 0;
  std::uint64_t packet = 0;
  std::uint64_t generated = 0;
  std::uint64_t start = 0;
  std::uint64_t end = 0;
  std::uint32_t drawn_backoff = 0;

  friend bool operator==(const TxEvent&, const TxEvent&) = default;
};

struct CollisionLabel {
  bool sync = false;
  bool hn = false;
  std::uint32_t hn_receivers = 0;
  /// Overlap with a neighbour that started in a different slot (must never
  /// happen under carrier sensing).
  bool sensing_violation = false;

  BeaconResult result() const noexcept
  {
    if (sync)
      return BeaconResult::CollidedSync;
    if (hn)
      return BeaconResult::CollidedHidden;
    return BeaconResult::Delivered;
  }
};

/// Labels `events[index]` against every other event in `events`.
/// SYNC: a neighbour started in the same slot. HN: a non-neighbour's
/// transmission overlaps it at some receiver adjacent to both.
inline CollisionLabel label_transmission(const std::vector<TxEvent>& events, std::size_t index,
                                         const Adjacency& adj)
{
  const TxEvent& e = events[index];
  CollisionLabel label;
  std::vector<std::uint32_t> receivers;
  for (std::size_t k = 0; k < events.size(); ++k) {
    if (k == index)
      continue;
    const TxEvent& o = events[k];
    if (o.node == e.node)
      continue;
    const bool overlap = o.start < e.end && e.start < o.end;
    if (!overlap)
      continue;
    if (adj.adjacent(e.node, o.node)) {
      if (o.start == e.start)
        label.sync = true;
      else
        label.sensing_violation = true;
      continue;
    }
    for (std::uint32_t r : adj.neighbors(e.node))
      if (r != o.node && adj.adjacent(o.node, r))
        receivers.push_back(r);
  }
  if (!receivers.empty()) {
    std::sort(receivers.begin(), receivers.end());
    receivers.erase(std::unique(receivers.begin(), receivers.end()), receivers.end());
    label.hn = true;
    label.hn_receivers = static_cast<std::uint32_t>(receivers.size());
  }
  return label;
}

/// Collision taxonomy for a window of transmissions.
inline std::vector<CollisionLabel> classify_collision(const std::vector<TxEvent>& events, const Adjacency& adj)
{
  std::vector<CollisionLabel> labels;
  labels.reserve(events.size());
  for (std::size_t i = 0; i < events.size(); ++i)
    labels.push_back(label_transmission(events, i, adj));
  return labels;
}

struct NodeCounters {
  std::uint64_t delivered = 0;
  std::uint64_t sync = 0;
  std::uint64_t hn = 0;
  std::uint64_t expired = 0;
  std::uint64_t elapsed_sum = 0;    ///< slots from generation to transmission
  std::uint64_t elapsed_sumsq = 0;

  std::uint64_t transmitted() const noexcept { return delivered + sync + hn; }
  std::uint64_t total() const noexcept { return transmitted() + expired; }

  friend bool operator==(const NodeCounters&, const NodeCounters&) = default;
};

struct SimDiagnostics {
  std::uint64_t transmissions = 0;
  std::uint64_t sync_and_hn = 0;     ///< events carrying both labels
  std::uint64_t hn_receiver_hits = 0;
  std::uint64_t sensing_violations = 0;
  std::uint64_t backoff_underruns = 0; ///< elapsed slots below the drawn backoff

  friend bool operator==(const SimDiagnostics&, const SimDiagnostics&) = default;
};

struct SimOutcome {
  std::uint64_t n_periods = 0;
  Seed seed = 0;
  PolicyKind policy = PolicyKind::Traditional;
  std::uint32_t cw = 0;
  std::uint32_t slots_per_beacon = 0;
  std::uint32_t occupancy = 0;
  bool full_connectivity = false;
  bool random_phase = false;

  std::vector<std::uint32_t> node_ids;
  std::vector<Category> categories;
  std::vector<NodeCounters> counters;
  /// results[i][p]: outcome of node i's packet in period p.
  std::vector<std::string> results;
  SimDiagnostics diagnostics{};
  std::vector<TxEvent> events;  ///< only with SimConfig::record_events

  std::size_t node_count() const noexcept { return counters.size(); }

  /// '1' for Delivered periods, '0' otherwise.
  std::string success_bits(std::size_t node) const
  {
    std::string bits(results[node].size(), '0');
    for (std::size_t p = 0; p < bits.size(); ++p)
      if (results[node][p] == static_cast<char>(BeaconResult::Delivered))
        bits[p] = '1';
    return bits;
  }

  friend bool operator==(const SimOutcome&, const SimOutcome&) = default;
};

namespace detail {

class SlotEngine {
public:
  SlotEngine(const SimConfig& cfg, std::vector<VehicleNode> nodes)
      : cfg_(cfg), nodes_(std::move(nodes)), rng_(cfg.seed)
  {
    n_ = nodes_.size();
    slots_ = cfg.params.slots_per_beacon();
    occupancy_ = std::max<std::uint32_t>(1, occupancy_slots(cfg.params));
    adj_ = cfg.full_connectivity ? Adjacency::complete(n_) : build_adjacency(nodes_, cfg.sense_range);
    for (const auto& node : nodes_)
      ranges_.push_back(backoff_range(cfg.policy, node.category));

    out_.n_periods = cfg.n_periods;
    out_.seed = cfg.seed;
    out_.policy = cfg.policy.kind;
    out_.cw = cfg.policy.cw;
    out_.slots_per_beacon = slots_;
    out_.occupancy = occupancy_;
    out_.full_connectivity = cfg.full_connectivity;
    out_.random_phase = cfg.random_phase;
    out_.counters.assign(n_, {});
    out_.results.assign(n_, std::string(cfg.n_periods, '?'));
    for (const auto& node : nodes_) {
      out_.node_ids.push_back(node.id);
      out_.categories.push_back(node.category);
    }

    counter_.assign(n_, 0);
    drawn_.assign(n_, 0);
    pending_.assign(n_, 0);
    generated_at_.assign(n_, 0);
    packets_.assign(n_, 0);
    next_gen_.assign(n_, 0);
    active_nb_.assign(n_, 0);
    if (cfg.random_phase)
      for (auto& g : next_gen_)
        g = rng_.uniform_int(0, slots_ - 1);
  }

  SimOutcome run() &&
  {
    constexpr std::uint64_t never = std::numeric_limits<std::uint64_t>::max();
    std::uint64_t max_offset = 0;
    for (auto g : next_gen_)
      max_offset = std::max(max_offset, g);
    const std::uint64_t horizon = max_offset + cfg_.n_periods * slots_;
    std::uint64_t next_flush = slots_;

    std::uint64_t t = 0;
    std::vector<std::uint32_t> starters;
    while (t < horizon) {
      end_transmissions(t);
      if (t >= next_flush) {
        flush(t);
        next_flush = (t / slots_ + 1) * slots_;
      }

      for (std::size_t i = 0; i < n_; ++i) {
        if (pending_[i] && generated_at_[i] + slots_ == t)
          expire(i);
        if (next_gen_[i] == t)
          generate(i, t);
      }

      starters.clear();
      for (std::size_t i = 0; i < n_; ++i)
        if (pending_[i] && counter_[i] == 0 && active_nb_[i] == 0)
          starters.push_back(static_cast<std::uint32_t>(i));
      for (auto i : starters)
        start_transmission(i, t);

      std::uint64_t next = horizon;
      for (const auto& a : active_)
        next = std::min(next, a.end);
      for (std::size_t i = 0; i < n_; ++i) {
        if (next_gen_[i] != never)
          next = std::min(next, next_gen_[i]);
        if (pending_[i]) {
          next = std::min(next, generated_at_[i] + slots_);
          if (active_nb_[i] == 0)
            next = std::min(next, t + counter_[i]);
        }
      }
      const std::uint64_t step = next - t;
      for (std::size_t i = 0; i < n_; ++i)
        if (pending_[i] && active_nb_[i] == 0)
          counter_[i] -= static_cast<std::uint32_t>(step);
      t = next;
    }
    end_transmissions(never);
    for (std::size_t i = 0; i < n_; ++i)
      if (pending_[i])
        expire(i);
    flush(never);
    return std::move(out_);
  }

private:
  struct Active {
    std::uint64_t end;
    std::uint32_t node;
  };

  void generate(std::size_t i, std::uint64_t t)
  {
    const std::uint64_t period = packets_[i];
    std::optional<std::uint32_t> forced;
    if (cfg_.backoff_hook)
      forced = cfg_.backoff_hook(i, period);
    const std::uint32_t b = forced ? *forced : draw_backoff(ranges_[i], rng_);
    counter_[i] = b;
    drawn_[i] = b;
    pending_[i] = 1;
    generated_at_[i] = t;
    ++packets_[i];
    next_gen_[i] = packets_[i] < cfg_.n_periods ? t + slots_ : std::numeric_limits<std::uint64_t>::max();
  }

  void expire(std::size_t i)
  {
    pending_[i] = 0;
    out_.results[i][packets_[i] - 1] = static_cast<char>(BeaconResult::Expired);
    ++out_.counters[i].expired;
  }

  void start_transmission(std::uint32_t i, std::uint64_t t)
  {
    pending_[i] = 0;
    std::uint64_t end = t + occupancy_;
    if (!cfg_.random_phase)
      end = std::min(end, (t / slots_ + 1) * slots_);
    buffer_.push_back({i, packets_[i] - 1, generated_at_[i], t, end, drawn_[i]});
    labelled_.push_back(0);
    active_.push_back({end, i});
    for (auto nb : adj_.neighbors(i))
      ++active_nb_[nb];

    const std::uint64_t elapsed = t - generated_at_[i];
    auto& c = out_.counters[i];
    c.elapsed_sum += elapsed;
    c.elapsed_sumsq += elapsed * elapsed;
    if (elapsed < drawn_[i])
      ++out_.diagnostics.backoff_underruns;
    ++out_.diagnostics.transmissions;
  }

  void end_transmissions(std::uint64_t t)
  {
    auto it = std::remove_if(active_.begin(), active_.end(), [&](const Active& a) {
      if (a.end > t)
        return false;
      for (auto nb : adj_.neighbors(a.node))
        --active_nb_[nb];
      return true;
    });
    active_.erase(it, active_.end());
  }

  /// Labels every buffered transmission that ended by `t`, then drops the
  /// ones no unlabelled transmission can still overlap.
  void flush(std::uint64_t t)
  {
    for (std::size_t k = 0; k < buffer_.size(); ++k) {
      if (labelled_[k] || buffer_[k].end > t)
        continue;
      const CollisionLabel label = label_transmission(buffer_, k, adj_);
      labelled_[k] = 1;
      const TxEvent& e = buffer_[k];
      const BeaconResult r = label.result();
      out_.results[e.node][e.packet] = static_cast<char>(r);
      auto& c = out_.counters[e.node];
      switch (r) {
      case BeaconResult::Delivered: ++c.delivered; break;
      case BeaconResult::CollidedSync: ++c.sync; break;
      case BeaconResult::CollidedHidden: ++c.hn; break;
      case BeaconResult::Expired: break;
      }
      if (label.sync && label.hn)
        ++out_.diagnostics.sync_and_hn;
      out_.diagnostics.hn_receiver_hits += label.hn_receivers;
      if (label.sensing_violation)
        ++out_.diagnostics.sensing_violations;
    }

    std::uint64_t min_open_start = std::numeric_limits<std::uint64_t>::max();
    for (std::size_t k = 0; k < buffer_.size(); ++k)
      if (!labelled_[k])
        min_open_start = std::min(min_open_start, buffer_[k].start);
    const std::uint64_t horizon = std::min(min_open_start, t);

    std::size_t w = 0;
    for (std::size_t k = 0; k < buffer_.size(); ++k) {
      const bool keep = !labelled_[k] || buffer_[k].end > horizon;
      if (!keep && cfg_.record_events)
        out_.events.push_back(buffer_[k]);
      if (keep) {
        buffer_[w] = buffer_[k];
        labelled_[w] = labelled_[k];
        ++w;
      }
    }
    buffer_.resize(w);
    labelled_.resize(w);
  }

  const SimConfig& cfg_;
  std::vector<VehicleNode> nodes_;
  Rng rng_;
  std::size_t n_ = 0;
  std::uint32_t slots_ = 0;
  std::uint32_t occupancy_ = 1;
  Adjacency adj_;
  std::vector<BackoffRange> ranges_;

  std::vector<std::uint32_t> counter_;
  std::vector<std::uint32_t> drawn_;
  std::vector<std::uint8_t> pending_;
  std::vector<std::uint64_t> generated_at_;
  std::vector<std::uint64_t> packets_;
  std::vector<std::uint64_t> next_gen_;
  std::vector<std::uint32_t> active_nb_;
  std::vector<Active> active_;
  std::vector<TxEvent> buffer_;
  std::vector<std::uint8_t> labelled_;

  SimOutcome out_;
};

} // namespace detail

/// Runs the simulation. Throws std::invalid_argument on an empty node set or
/// an inconsistent configuration.
inline SimOutcome run_simulation(const SimConfig& config)
{
  config.policy.validate();
  config.params.validate();
  if (config.n_periods < 1)
    throw std::invalid_argument("simulation: need at least one beacon period");
  if (!config.full_connectivity && !(config.sense_range > 0.0))
    throw std::invalid_argument("simulation: sense range must be positive");

  std::vector<VehicleNode> nodes;
  for (const auto& n : config.nodes)
    if (!(config.silence_uncategorized && n.category == Category::Uncategorized))
      nodes.push_back(n);
  if (nodes.empty())
    throw std::invalid_argument("simulation: no contending nodes");
  if (config.policy.cw > config.params.slots_per_beacon())
    throw std::invalid_argument("simulation: cw exceeds the slots in a beacon period");

  return detail::SlotEngine(config, std::move(nodes)).run();
}

/// (SYNC + HN) / transmissions; nullopt when nothing was transmitted.
inline std::optional<double> empirical_pcol(const SimOutcome& outcome)
{
  std::uint64_t tx = 0;
  std::uint64_t col = 0;
  for (const auto& c : outcome.counters) {
    tx += c.transmitted();
    col += c.sync + c.hn;
  }
  if (tx == 0)
    return std::nullopt;
  return static_cast<double>(col) / static_cast<double>(tx);
}

} // namespace vbcast
