#pragma once

// Spatial scenario: vehicles dropped on a rectangle around a danger source,
// grouped into risk categories by their distance to it.

#include <vbcast/rng.hpp>

#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace vbcast {

struct Point2D {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point2D&, const Point2D&) = default;
};

/// Rectangle of `width` x `height` meters centred on the coordinate origin.
struct RegionSpec {
  double width = 2000.0;
  double height = 2000.0;
  Point2D danger{};

  double area() const noexcept { return width * height; }
  double x_min() const noexcept { return -width / 2.0; }
  double y_min() const noexcept { return -height / 2.0; }

  bool contains(Point2D p) const noexcept
  {
    return p.x >= x_min() && p.x <= -x_min() && p.y >= y_min() && p.y <= -y_min();
  }

  void validate() const
  {
    if (!(width > 0.0) || !(height > 0.0) || !std::isfinite(width) || !std::isfinite(height))
      throw std::invalid_argument("region: width and height must be positive");
    if (!contains(danger))
      throw std::invalid_argument("region: danger source must lie inside the region");
  }

  friend bool operator==(const RegionSpec&, const RegionSpec&) = default;
};

struct CategoryThresholds {
  double th1 = 300.0;
  double th2 = 500.0;
  double th3 = 700.0;

  void validate() const
  {
    if (!(0.0 < th1 && th1 < th2 && th2 < th3))
      throw std::invalid_argument("thresholds: require 0 < th1 < th2 < th3");
  }

  friend bool operator==(const CategoryThresholds&, const CategoryThresholds&) = default;
};

/// Risk category, ordered from most to least dangerous.
enum class Category : std::uint8_t { Cat1 = 0, Cat2 = 1, Cat3 = 2, Uncategorized = 3 };

inline constexpr std::array<Category, 4> kAllCategories{
    Category::Cat1, Category::Cat2, Category::Cat3, Category::Uncategorized};

inline constexpr std::size_t index_of(Category c) noexcept { return static_cast<std::size_t>(c); }

inline std::string_view to_string(Category c) noexcept
{
  switch (c) {
  case Category::Cat1: return "cat1";
  case Category::Cat2: return "cat2";
  case Category::Cat3: return "cat3";
  case Category::Uncategorized: return "uncategorized";
  }
  return "?";
}

inline Category parse_category(std::string_view s)
{
  for (Category c : kAllCategories)
    if (s == to_string(c))
      return c;
  throw std::invalid_argument("unknown category '" + std::string(s) + "'");
}

struct VehicleNode {
  std::uint32_t id = 0;
  Point2D position{};
  double distance_to_danger = 0.0;
  Category category = Category::Uncategorized;

  friend bool operator==(const VehicleNode&, const VehicleNode&) = default;
};

enum class DropMode : std::uint8_t { FixedCount, PoissonCount };

inline std::string_view to_string(DropMode m) noexcept
{
  return m == DropMode::FixedCount ? "fixed" : "poisson";
}

inline DropMode parse_drop_mode(std::string_view s)
{
  if (s == "fixed")
    return DropMode::FixedCount;
  if (s == "poisson")
    return DropMode::PoissonCount;
  throw std::invalid_argument("unknown drop mode '" + std::string(s) + "'");
}

struct SpatialScenario {
  RegionSpec region{};
  CategoryThresholds thresholds{};
  std::vector<VehicleNode> nodes;
  double density = 2e-5;
  Seed seed = 0;
  DropMode drop_mode = DropMode::FixedCount;

  /// Node count per category, indexed by index_of(Category).
  std::array<std::size_t, 4> category_counts() const
  {
    std::array<std::size_t, 4> counts{};
    for (const auto& n : nodes)
      ++counts[index_of(n.category)];
    return counts;
  }

  friend bool operator==(const SpatialScenario&, const SpatialScenario&) = default;
};

inline double distance_to_danger(Point2D position, Point2D danger) noexcept
{
  return std::hypot(position.x - danger.x, position.y - danger.y);
}

/// Category for distance `d`; a distance equal to a threshold belongs to the
/// more dangerous side.
inline Category categorize(double d, const CategoryThresholds& th)
{
  if (!(d >= 0.0))
    throw std::invalid_argument("categorize: distance must be non-negative");
  if (d <= th.th1)
    return Category::Cat1;
  if (d <= th.th2)
    return Category::Cat2;
  if (d <= th.th3)
    return Category::Cat3;
  return Category::Uncategorized;
}

inline VehicleNode make_node(std::uint32_t id, Point2D p, const RegionSpec& region,
                             const CategoryThresholds& th)
{
  const double d = distance_to_danger(p, region.danger);
  return VehicleNode{id, p, d, categorize(d, th)};
}

/// Drops vehicles uniformly over `region`. FixedCount places round(density *
/// area) nodes; PoissonCount draws the count from Poisson(density * area).
inline SpatialScenario drop_nodes(const RegionSpec& region, const CategoryThresholds& thresholds,
                                  double density, DropMode mode, Seed seed)
{
  if (!(density > 0.0) || !std::isfinite(density))
    throw std::invalid_argument("drop_nodes: density must be positive");
  region.validate();
  thresholds.validate();

  Rng rng(seed);
  const double mean = density * region.area();
  const std::uint64_t count = mode == DropMode::FixedCount
                                  ? static_cast<std::uint64_t>(std::llround(mean))
                                  : rng.poisson(mean);

  SpatialScenario s;
  s.region = region;
  s.thresholds = thresholds;
  s.density = density;
  s.seed = seed;
  s.drop_mode = mode;
  s.nodes.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    const double x = region.x_min() + region.width * rng.uniform01();
    const double y = region.y_min() + region.height * rng.uniform01();
    s.nodes.push_back(make_node(static_cast<std::uint32_t>(i), {x, y}, region, thresholds));
  }
  return s;
}

/// Symmetric, irreflexive neighbour relation over node indices.
class Adjacency {
public:
  Adjacency() = default;

  explicit Adjacency(std::size_t n) : n_(n), matrix_(n * n, 0), neighbors_(n) {}

  static Adjacency complete(std::size_t n)
  {
    Adjacency a(n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j)
        a.connect(i, j);
    return a;
  }

  void connect(std::size_t i, std::size_t j)
  {
    if (i == j || adjacent(i, j))
      return;
    matrix_[i * n_ + j] = matrix_[j * n_ + i] = 1;
    neighbors_[i].push_back(static_cast<std::uint32_t>(j));
    neighbors_[j].push_back(static_cast<std::uint32_t>(i));
    ++edges_;
  }

  bool adjacent(std::size_t i, std::size_t j) const noexcept { return matrix_[i * n_ + j] != 0; }
  const std::vector<std::uint32_t>& neighbors(std::size_t i) const noexcept { return neighbors_[i]; }
  std::size_t size() const noexcept { return n_; }
  std::size_t edge_count() const noexcept { return edges_; }
  bool is_complete() const noexcept { return n_ < 2 || edges_ == n_ * (n_ - 1) / 2; }

private:
  std::size_t n_ = 0;
  std::size_t edges_ = 0;
  std::vector<std::uint8_t> matrix_;
  std::vector<std::vector<std::uint32_t>> neighbors_;
};

/// Nodes i and j are adjacent iff their distance is at most `sense_range`.
inline Adjacency build_adjacency(const std::vector<VehicleNode>& nodes, double sense_range)
{
  if (!(sense_range > 0.0))
    throw std::invalid_argument("build_adjacency: sense range must be positive");
  Adjacency a(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i)
    for (std::size_t j = i + 1; j < nodes.size(); ++j)
      if (distance_to_danger(nodes[i].position, nodes[j].position) <= sense_range)
        a.connect(i, j);
  return a;
}

inline Adjacency build_adjacency(const SpatialScenario& scenario, double sense_range)
{
  return build_adjacency(scenario.nodes, sense_range);
}

// ---------------------------------------------------------------------------
// Scenario text format
//
//   region <width> <height> <danger_x> <danger_y>
//   thresholds <th1> <th2> <th3>
//   density <lambda>
//   seed <u64>
//   mode fixed|poisson
//   <id> <x> <y> <distance> <category>      (one line per node)
// ---------------------------------------------------------------------------

namespace detail {
inline std::string fmt_fixed6(double v)
{
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

inline std::string fmt_g9(double v)
{
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}
} // namespace detail

inline void write_scenario(std::ostream& os, const SpatialScenario& s)
{
  using detail::fmt_fixed6;
  os << "region " << fmt_fixed6(s.region.width) << ' ' << fmt_fixed6(s.region.height) << ' '
     << fmt_fixed6(s.region.danger.x) << ' ' << fmt_fixed6(s.region.danger.y) << '\n';
  os << "thresholds " << fmt_fixed6(s.thresholds.th1) << ' ' << fmt_fixed6(s.thresholds.th2) << ' '
     << fmt_fixed6(s.thresholds.th3) << '\n';
  os << "density " << detail::fmt_g9(s.density) << '\n';
  os << "seed " << s.seed << '\n';
  os << "mode " << to_string(s.drop_mode) << '\n';
  for (const auto& n : s.nodes)
    os << n.id << ' ' << fmt_fixed6(n.position.x) << ' ' << fmt_fixed6(n.position.y) << ' '
       << fmt_fixed6(n.distance_to_danger) << ' ' << to_string(n.category) << '\n';
}

/// Parses the scenario text format. Node distance and category are
/// recomputed from the (rounded) position and checked against the file.
inline SpatialScenario read_scenario(std::istream& is)
{
  SpatialScenario s;
  s.nodes.clear();
  std::string line;
  int headers = 0;
  std::size_t line_no = 0;
  auto fail = [&](const std::string& what) {
    throw std::runtime_error("scenario line " + std::to_string(line_no) + ": " + what);
  };
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty())
      continue;
    std::istringstream ls(line);
    std::string head;
    ls >> head;
    if (head == "region") {
      if (!(ls >> s.region.width >> s.region.height >> s.region.danger.x >> s.region.danger.y))
        fail("malformed region");
      ++headers;
    } else if (head == "thresholds") {
      if (!(ls >> s.thresholds.th1 >> s.thresholds.th2 >> s.thresholds.th3))
        fail("malformed thresholds");
      ++headers;
    } else if (head == "density") {
      if (!(ls >> s.density))
        fail("malformed density");
      ++headers;
    } else if (head == "seed") {
      if (!(ls >> s.seed))
        fail("malformed seed");
      ++headers;
    } else if (head == "mode") {
      std::string m;
      ls >> m;
      s.drop_mode = parse_drop_mode(m);
      ++headers;
    } else {
      VehicleNode n;
      std::string cat;
      std::istringstream ns(line);
      if (!(ns >> n.id >> n.position.x >> n.position.y >> n.distance_to_danger >> cat))
        fail("malformed node");
      n.category = parse_category(cat);
      const double d = distance_to_danger(n.position, s.region.danger);
      if (std::abs(d - n.distance_to_danger) > 1e-5)
        fail("distance inconsistent with position");
      if (categorize(n.distance_to_danger, s.thresholds) != n.category)
        fail("category inconsistent with distance");
      s.nodes.push_back(n);
    }
  }
  if (headers != 5)
    throw std::runtime_error("scenario: missing header lines");
  s.region.validate();
  s.thresholds.validate();
  return s;
}

} // namespace vbcast
