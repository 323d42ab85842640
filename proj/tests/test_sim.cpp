#include <vbcast/analytic.hpp>
#include <vbcast/sim.hpp>

#include <gtest/gtest.h>

#include <map>
#include <utility>

using namespace vbcast;

namespace {

std::vector<VehicleNode> line_nodes(std::initializer_list<double> xs, double y = 0.0)
{
  const RegionSpec r{};
  const CategoryThresholds th{};
  std::vector<VehicleNode> v;
  std::uint32_t id = 0;
  for (double x : xs)
    v.push_back(make_node(id++, {x, y}, r, th));
  return v;
}

SimConfig basic(std::vector<VehicleNode> nodes, BackoffPolicy policy, std::uint64_t periods, Seed seed = 1)
{
  SimConfig c;
  c.nodes = std::move(nodes);
  c.policy = policy;
  c.n_periods = periods;
  c.seed = seed;
  return c;
}

BackoffHook fixed_backoffs(std::vector<std::uint32_t> b)
{
  return [b](std::size_t node, std::uint64_t) -> std::optional<std::uint32_t> { return b[node]; };
}

// Two mutually sensing nodes drawing a and b in a beacon of S slots where a
// transmission holds the medium for L slots.
std::pair<char, char> two_node_outcome(std::uint32_t a, std::uint32_t b, std::uint32_t slots, std::uint32_t occ)
{
  if (a == b)
    return {'S', 'S'};
  const bool a_first = a < b;
  const std::uint32_t later = a_first ? b : a;
  const char second = later + occ < slots ? 'D' : 'E';
  return a_first ? std::pair{'D', second} : std::pair{second, 'D'};
}

std::map<std::pair<char, char>, double> exact_two_node(std::uint32_t cw, std::uint32_t slots, std::uint32_t occ)
{
  std::map<std::pair<char, char>, double> dist;
  for (std::uint32_t a = 0; a < cw; ++a)
    for (std::uint32_t b = 0; b < cw; ++b)
      dist[two_node_outcome(a, b, slots, occ)] += 1.0 / (cw * cw);
  return dist;
}

double tv_distance_two_node(std::uint32_t cw, std::uint32_t slots, MacParameters params, std::uint64_t periods)
{
  params.slots_per_beacon_override = slots;
  auto c = basic(line_nodes({0, 10}), BackoffPolicy::traditional(cw), periods, 2024);
  c.params = params;
  c.full_connectivity = true;
  const auto o = run_simulation(c);
  std::map<std::pair<char, char>, double> emp;
  for (std::uint64_t p = 0; p < periods; ++p)
    emp[{o.results[0][p], o.results[1][p]}] += 1.0 / periods;
  const auto exact = exact_two_node(cw, slots, occupancy_slots(params));
  std::map<std::pair<char, char>, double> all = exact;
  for (const auto& [k, v] : emp)
    all[k] += 0.0;
  double tv = 0.0;
  for (const auto& [k, unused] : all) {
    const double e = exact.count(k) ? exact.at(k) : 0.0;
    const double m = emp.count(k) ? emp.at(k) : 0.0;
    tv += std::abs(e - m);
  }
  return tv / 2.0;
}

} // namespace

TEST(Sim, SingleNodeAlwaysDelivers)
{
  for (auto policy : {BackoffPolicy::traditional(511), BackoffPolicy::proposed(511)}) {
    const auto o = run_simulation(basic(line_nodes({100}), policy, 500));
    EXPECT_EQ(o.counters[0].delivered, 500u);
    EXPECT_EQ(o.results[0], std::string(500, 'D'));
  }
}

TEST(Sim, SimultaneousNeighboursCollideSync)
{
  auto c = basic(line_nodes({0, 100}), BackoffPolicy::traditional(15), 50);
  c.backoff_hook = fixed_backoffs({0, 0});
  const auto o = run_simulation(c);
  EXPECT_EQ(o.results[0], std::string(50, 'S'));
  EXPECT_EQ(o.results[1], std::string(50, 'S'));
}

TEST(Sim, HiddenPairCollidesAtSharedReceiver)
{
  // A and C are out of range of each other; B hears both.
  auto c = basic(line_nodes({-600, 0, 600}), BackoffPolicy::traditional(127), 20);
  c.backoff_hook = fixed_backoffs({3, 50, 3});
  c.record_events = true;
  const auto o = run_simulation(c);
  EXPECT_EQ(o.results[0], std::string(20, 'H'));
  EXPECT_EQ(o.results[2], std::string(20, 'H'));
  EXPECT_EQ(o.results[1], std::string(20, 'D'));
  EXPECT_EQ(o.diagnostics.sensing_violations, 0u);
  EXPECT_EQ(o.diagnostics.hn_receiver_hits, 40u);
  // B freezes during the busy slots, so it starts after its 50 idle slots
  // plus the 6 busy ones.
  for (const auto& e : o.events) {
    if (e.node == 1) {
      EXPECT_EQ(e.start - e.generated, 56u);
    }
  }
}

TEST(Sim, ClassifyCollisionCases)
{
  const auto nodes = line_nodes({-600, 0, 600});
  const auto adj = build_adjacency(nodes, 700.0);

  // Same-slot neighbours.
  auto l = classify_collision({{0, 0, 0, 5, 11, 5}, {1, 0, 0, 5, 11, 5}}, adj);
  EXPECT_TRUE(l[0].sync);
  EXPECT_TRUE(l[1].sync);
  EXPECT_EQ(l[0].result(), BeaconResult::CollidedSync);

  // Disjoint in time.
  l = classify_collision({{0, 0, 0, 0, 6, 0}, {2, 0, 0, 6, 12, 6}}, adj);
  EXPECT_EQ(l[0].result(), BeaconResult::Delivered);
  EXPECT_EQ(l[1].result(), BeaconResult::Delivered);

  // Non-adjacent overlap with a common receiver, staggered.
  l = classify_collision({{0, 0, 0, 0, 6, 0}, {2, 0, 0, 3, 9, 3}}, adj);
  EXPECT_TRUE(l[0].hn);
  EXPECT_TRUE(l[1].hn);
  EXPECT_EQ(l[0].hn_receivers, 1u);
  EXPECT_EQ(l[1].result(), BeaconResult::CollidedHidden);

  // Staggered neighbours overlapping is flagged, not silently labelled.
  l = classify_collision({{0, 0, 0, 0, 6, 0}, {1, 0, 0, 2, 8, 2}}, adj);
  EXPECT_TRUE(l[0].sensing_violation);
  EXPECT_FALSE(l[0].sync);

  // Far apart with no common receiver: no interference.
  const auto far = line_nodes({-900, 900});
  const auto adj_far = build_adjacency(far, 700.0);
  l = classify_collision({{0, 0, 0, 0, 6, 0}, {1, 0, 0, 0, 6, 0}}, adj_far);
  EXPECT_EQ(l[0].result(), BeaconResult::Delivered);
}

TEST(Sim, OutcomesConserveAndRespectCarrierSense)
{
  for (auto full : {false, true})
    for (std::uint32_t cw : {15u, 127u, 511u}) {
      const auto s = drop_nodes({}, {}, 2e-5, DropMode::FixedCount, 31);
      auto c = basic(s.nodes, BackoffPolicy::proposed(cw), 200, 17);
      c.full_connectivity = full;
      const auto o = run_simulation(c);
      for (std::size_t i = 0; i < o.node_count(); ++i) {
        EXPECT_EQ(o.counters[i].total(), 200u);
        EXPECT_EQ(o.results[i].find('?'), std::string::npos);
      }
      EXPECT_EQ(o.diagnostics.sensing_violations, 0u);
      EXPECT_EQ(o.diagnostics.backoff_underruns, 0u);
      if (full) {
        for (const auto& n : o.counters)
          EXPECT_EQ(n.hn, 0u);
      }
    }
}

TEST(Sim, RandomPhaseConserves)
{
  const auto s = drop_nodes({}, {}, 2e-5, DropMode::FixedCount, 32);
  auto c = basic(s.nodes, BackoffPolicy::traditional(127), 100, 3);
  c.random_phase = true;
  const auto o = run_simulation(c);
  for (const auto& n : o.counters)
    EXPECT_EQ(n.total(), 100u);
  EXPECT_EQ(o.diagnostics.sensing_violations, 0u);
}

TEST(Sim, SeedDeterminism)
{
  const auto s = drop_nodes({}, {}, 2e-5, DropMode::FixedCount, 33);
  auto c = basic(s.nodes, BackoffPolicy::proposed(127), 100, 99);
  EXPECT_EQ(run_simulation(c), run_simulation(c));
  auto d = c;
  d.seed = 100;
  EXPECT_NE(run_simulation(c).results, run_simulation(d).results);
}

TEST(Sim, SilencedUncategorizedAreRemoved)
{
  auto nodes = line_nodes({0, 100, 1500});
  ASSERT_EQ(nodes[2].category, Category::Uncategorized);
  auto c = basic(nodes, BackoffPolicy::proposed(127), 10);
  c.silence_uncategorized = true;
  EXPECT_EQ(run_simulation(c).node_count(), 2u);
  c.nodes = {nodes[2]};
  EXPECT_THROW(run_simulation(c), std::invalid_argument);
}

TEST(Sim, RejectsBadConfig)
{
  auto c = basic({}, BackoffPolicy::traditional(15), 10);
  EXPECT_THROW(run_simulation(c), std::invalid_argument);
  c.nodes = line_nodes({0});
  c.n_periods = 0;
  EXPECT_THROW(run_simulation(c), std::invalid_argument);
  c.n_periods = 10;
  c.params.slots_per_beacon_override = 8;
  c.policy = BackoffPolicy::traditional(15);
  EXPECT_THROW(run_simulation(c), std::invalid_argument);
}

TEST(Sim, Cat1DeliversMoreThanCat3UnderContention)
{
  const auto s = drop_nodes({}, {}, 2e-5, DropMode::FixedCount, 34);
  auto c = basic(s.nodes, BackoffPolicy::proposed(127), 300, 5);
  c.full_connectivity = true;
  c.params.slots_per_beacon_override = 300;
  const auto o = run_simulation(c);
  double tx[4] = {0, 0, 0, 0}, tot[4] = {0, 0, 0, 0};
  for (std::size_t i = 0; i < o.node_count(); ++i) {
    tx[index_of(o.categories[i])] += o.counters[i].transmitted();
    tot[index_of(o.categories[i])] += o.counters[i].total();
  }
  ASSERT_GT(tot[0], 0.0);
  ASSERT_GT(tot[2], 0.0);
  EXPECT_GT(tx[0] / tot[0], tx[2] / tot[2]);
}

TEST(Sim, TwoNodeEnumerationSmallOccupancy)
{
  // A 200 us slot makes a transmission hold the medium for two slots, so the
  // later node can still fit inside an 8-slot beacon.
  MacParameters p;
  p.t_slot = 200e-6;
  ASSERT_EQ(occupancy_slots(p), 2u);
  EXPECT_LT(tv_distance_two_node(5, 8, p, 40000), 0.02);
}

TEST(Sim, TwoNodeEnumerationDefaultTiming)
{
  EXPECT_LT(tv_distance_two_node(3, 4, {}, 40000), 0.02);
  EXPECT_LT(tv_distance_two_node(4, 4, {}, 40000), 0.02);
}

TEST(Sim, TauMatchesAnalyticUnderFullConnectivity)
{
  const auto s = drop_nodes({}, {}, 2e-5, DropMode::FixedCount, 35);
  std::vector<VehicleNode> nodes(s.nodes.begin(), s.nodes.begin() + 20);
  auto c = basic(nodes, BackoffPolicy::traditional(127), 2000, 6);
  c.full_connectivity = true;
  const auto o = run_simulation(c);
  std::uint64_t tx = 0, total = 0;
  for (const auto& n : o.counters) {
    tx += n.transmitted();
    total += n.total();
  }
  ContentionConfig cc;
  cc.n_sta = 20;
  cc.policy = c.policy;
  EXPECT_NEAR(static_cast<double>(tx) / total, solve_tau(cc).tau, 0.05);
}

TEST(Sim, EmpiricalPcol)
{
  auto c = basic(line_nodes({0, 100}), BackoffPolicy::traditional(15), 10);
  c.backoff_hook = fixed_backoffs({0, 0});
  EXPECT_DOUBLE_EQ(*empirical_pcol(run_simulation(c)), 1.0);
  c.backoff_hook = fixed_backoffs({0, 1});
  c.policy = BackoffPolicy::traditional(3);
  c.params.slots_per_beacon_override = 4;
  // Node 1 is frozen past the period end every time.
  EXPECT_DOUBLE_EQ(*empirical_pcol(run_simulation(c)), 0.0);
}
