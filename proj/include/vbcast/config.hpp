#pragma once

// Experiment configuration: an INI-style file with fixed sections.
//
//   [experiment] seed, out
//   [scenario]   width, height, danger_x, danger_y, density, drop_mode,
//                th1, th2, th3, sense_range
//   [policy]     variants (or policy + categories), cw,
//                include_uncategorized, silence_uncategorized
//   [mac]        t_ibi, t_slot, difs, sifs, header_airtime, payload_bytes,
//                data_rate, t_prop, slots_per_beacon
//   [contention] n_sta, n_sta_mode
//   [sim]        periods, full_connectivity, random_phase
//   [analytic]   tol, max_iter
//   [report]     tau_tol, e_nbo_rel, delay_rel, r_rel, irt_cw, irt_n_max,
//                zero_based_irt
//
// Lists are comma separated. Lines starting with ';' or '#' are comments.
// Unknown sections or keys are rejected.

#include <vbcast/geometry.hpp>
#include <vbcast/mac.hpp>
#include <vbcast/metrics.hpp>
#include <vbcast/policy.hpp>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace vbcast {

class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A policy column of the grid: the traditional scheme, or the proposed one
/// evaluated for a tagged category.
struct Variant {
  PolicyKind policy = PolicyKind::Traditional;
  std::optional<Category> category;

  std::string label() const
  {
    return policy == PolicyKind::Traditional ? "traditional" : "proposed:" + std::string(to_string(*category));
  }

  static Variant parse(const std::string& s)
  {
    if (s == "traditional")
      return {PolicyKind::Traditional, std::nullopt};
    const std::string prefix = "proposed:";
    if (s.rfind(prefix, 0) == 0)
      return {PolicyKind::Proposed, parse_category(s.substr(prefix.size()))};
    throw std::invalid_argument("unknown variant '" + s + "'");
  }

  friend bool operator==(const Variant&, const Variant&) = default;
};

enum class NStaMode : std::uint8_t { Subsample, Rescale };

struct ExperimentConfig {
  Seed seed = 1;
  std::string out = "out";

  RegionSpec region{};
  CategoryThresholds thresholds{};
  double density = 2e-5;
  DropMode drop_mode = DropMode::FixedCount;
  double sense_range = 700.0;

  std::vector<Variant> variants{{PolicyKind::Traditional, std::nullopt},
                                {PolicyKind::Proposed, Category::Cat1},
                                {PolicyKind::Proposed, Category::Cat2},
                                {PolicyKind::Proposed, Category::Cat3}};
  std::vector<std::uint32_t> cws{15, 127, 511};
  bool include_uncategorized = false;
  bool silence_uncategorized = false;

  MacParameters mac{};

  std::vector<std::uint32_t> n_sta{10, 20, 40, 80};
  NStaMode n_sta_mode = NStaMode::Subsample;

  std::uint64_t periods = 1000;
  bool full_connectivity = false;
  bool random_phase = false;

  double tol = 1e-10;
  std::uint32_t max_iter = 1000;

  Tolerances tolerances{};
  std::uint32_t irt_cw = 15;
  std::uint32_t irt_n_max = 30;
  bool zero_based_irt = false;

  /// Policy kinds present among the variants, in first-seen order.
  std::vector<PolicyKind> policy_kinds() const
  {
    std::vector<PolicyKind> kinds;
    for (const auto& v : variants)
      if (std::find(kinds.begin(), kinds.end(), v.policy) == kinds.end())
        kinds.push_back(v.policy);
    return kinds;
  }

  BackoffPolicy policy(PolicyKind kind, std::uint32_t cw) const
  {
    return kind == PolicyKind::Traditional ? BackoffPolicy::traditional(cw) : BackoffPolicy::proposed(cw, thresholds);
  }

  void validate() const
  {
    auto require = [](bool ok, const std::string& what) {
      if (!ok)
        throw ConfigError("config: " + what);
    };
    require(region.width > 0 && region.height > 0, "scenario.width/scenario.height must be positive");
    require(region.contains(region.danger), "scenario.danger_x/danger_y must lie inside the region");
    require(thresholds.th1 > 0, "scenario.th1 must be positive");
    require(thresholds.th2 > thresholds.th1, "scenario.th2 must exceed scenario.th1");
    require(thresholds.th3 > thresholds.th2, "scenario.th3 must exceed scenario.th2");
    require(density > 0, "scenario.density must be positive");
    require(sense_range > 0, "scenario.sense_range must be positive");
    require(!variants.empty(), "policy.variants must not be empty");
    require(!cws.empty(), "policy.cw must not be empty");
    for (auto cw : cws) {
      require(cw >= 1, "policy.cw values must be positive");
      for (const auto& v : variants)
        require(v.policy == PolicyKind::Traditional || cw >= 3, "policy.cw must be >= 3 for the proposed scheme");
    }
    require(!n_sta.empty(), "contention.n_sta must not be empty");
    for (auto n : n_sta)
      require(n >= 1, "contention.n_sta values must be at least 1");
    require(periods >= 1, "sim.periods must be at least 1");
    require(tol > 0, "analytic.tol must be positive");
    require(max_iter >= 1, "analytic.max_iter must be at least 1");
    require(tolerances.tau_abs >= 0, "report.tau_tol must be non-negative");
    require(irt_n_max >= 1, "report.irt_n_max must be at least 1");
    try {
      mac.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("config: [mac] ") + e.what());
    }
  }
};

namespace detail {

inline std::string trim(const std::string& s)
{
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos)
    return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_list(const std::string& s)
{
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (auto t = trim(item); !t.empty())
      out.push_back(t);
  return out;
}

inline std::string g9(double v)
{
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

template <typename T>
std::string join(const std::vector<T>& xs)
{
  std::string s;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i)
      s += ", ";
    if constexpr (std::is_same_v<T, std::string>)
      s += xs[i];
    else
      s += std::to_string(xs[i]);
  }
  return s;
}

class KeyReader {
public:
  KeyReader(const boost::property_tree::ptree& tree) : tree_(tree) {}

  std::optional<std::string> get(const std::string& section, const std::string& key)
  {
    seen_.insert(section + "." + key);
    auto sec = tree_.get_child_optional(section);
    if (!sec)
      return std::nullopt;
    auto v = sec->get_optional<std::string>(boost::property_tree::ptree::path_type(key, '\0'));
    if (!v)
      return std::nullopt;
    return trim(*v);
  }

  template <typename T>
  void read(const std::string& section, const std::string& key, T& target)
  {
    auto v = get(section, key);
    if (!v)
      return;
    target = convert<T>(section + "." + key, *v);
  }

  template <typename T>
  static T convert(const std::string& name, const std::string& raw)
  {
    try {
      if constexpr (std::is_same_v<T, bool>) {
        if (raw == "true" || raw == "1" || raw == "yes")
          return true;
        if (raw == "false" || raw == "0" || raw == "no")
          return false;
        throw std::invalid_argument("not a boolean");
      } else if constexpr (std::is_same_v<T, std::string>) {
        return raw;
      } else if constexpr (std::is_floating_point_v<T>) {
        std::size_t used = 0;
        const double v = std::stod(raw, &used);
        if (used != raw.size())
          throw std::invalid_argument("trailing characters");
        return v;
      } else {
        if (!raw.empty() && raw[0] == '-')
          throw std::invalid_argument("negative value");
        std::size_t used = 0;
        const unsigned long long v = std::stoull(raw, &used);
        if (used != raw.size() || v > std::numeric_limits<T>::max())
          throw std::invalid_argument("out of range");
        return static_cast<T>(v);
      }
    } catch (const std::exception& e) {
      throw ConfigError("config: " + name + ": cannot parse '" + raw + "' (" + e.what() + ")");
    }
  }

  /// Rejects keys that were never asked for.
  void check_unknown() const
  {
    for (const auto& [section, keys] : tree_) {
      if (keys.empty() && !keys.data().empty())
        throw ConfigError("config: key '" + section + "' outside any section");
      for (const auto& kv : keys)
        if (!seen_.count(section + "." + kv.first))
          throw ConfigError("config: unknown key " + section + "." + kv.first);
    }
  }

private:
  const boost::property_tree::ptree& tree_;
  std::set<std::string> seen_;
};

} // namespace detail

inline ExperimentConfig parse_config(std::istream& is)
{
  // Strip '#' and ';' comments, whole-line or trailing after whitespace;
  // the ini reader itself only knows whole-line ';'.
  std::stringstream cleaned;
  std::string line;
  while (std::getline(is, line)) {
    for (std::size_t i = 0; i < line.size(); ++i)
      if ((line[i] == '#' || line[i] == ';') && (i == 0 || std::isspace(static_cast<unsigned char>(line[i - 1])))) {
        line.erase(i);
        break;
      }
    cleaned << line << '\n';
  }

  boost::property_tree::ptree tree;
  try {
    boost::property_tree::ini_parser::read_ini(cleaned, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }

  ExperimentConfig c;
  detail::KeyReader r(tree);
  r.read("experiment", "seed", c.seed);
  r.read("experiment", "out", c.out);

  r.read("scenario", "width", c.region.width);
  r.read("scenario", "height", c.region.height);
  r.read("scenario", "danger_x", c.region.danger.x);
  r.read("scenario", "danger_y", c.region.danger.y);
  r.read("scenario", "density", c.density);
  if (auto v = r.get("scenario", "drop_mode")) {
    try {
      c.drop_mode = parse_drop_mode(*v);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("config: scenario.drop_mode: ") + e.what());
    }
  }
  r.read("scenario", "th1", c.thresholds.th1);
  r.read("scenario", "th2", c.thresholds.th2);
  r.read("scenario", "th3", c.thresholds.th3);
  r.read("scenario", "sense_range", c.sense_range);

  auto variants = r.get("policy", "variants");
  auto policy = r.get("policy", "policy");
  auto categories = r.get("policy", "categories");
  try {
    if (variants && policy)
      throw ConfigError("config: policy.variants and policy.policy are mutually exclusive");
    if (variants) {
      c.variants.clear();
      for (const auto& s : detail::split_list(*variants))
        c.variants.push_back(Variant::parse(s));
    } else if (policy) {
      std::vector<Category> cats{Category::Cat1, Category::Cat2, Category::Cat3};
      if (categories) {
        cats.clear();
        for (const auto& s : detail::split_list(*categories))
          cats.push_back(parse_category(s));
      }
      c.variants.clear();
      for (const auto& s : detail::split_list(*policy)) {
        if (parse_policy_kind(s) == PolicyKind::Traditional)
          c.variants.push_back({PolicyKind::Traditional, std::nullopt});
        else
          for (auto cat : cats)
            c.variants.push_back({PolicyKind::Proposed, cat});
      }
    } else if (categories) {
      throw ConfigError("config: policy.categories requires policy.policy");
    }
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config: policy: ") + e.what());
  }
  if (auto v = r.get("policy", "cw")) {
    c.cws.clear();
    for (const auto& s : detail::split_list(*v))
      c.cws.push_back(detail::KeyReader::convert<std::uint32_t>("policy.cw", s));
  }
  r.read("policy", "include_uncategorized", c.include_uncategorized);
  r.read("policy", "silence_uncategorized", c.silence_uncategorized);

  r.read("mac", "t_ibi", c.mac.t_ibi);
  r.read("mac", "t_slot", c.mac.t_slot);
  r.read("mac", "difs", c.mac.difs);
  r.read("mac", "sifs", c.mac.sifs);
  r.read("mac", "header_airtime", c.mac.header_airtime);
  r.read("mac", "payload_bytes", c.mac.payload_bytes);
  r.read("mac", "data_rate", c.mac.data_rate);
  r.read("mac", "t_prop", c.mac.t_prop);
  if (auto v = r.get("mac", "slots_per_beacon"))
    c.mac.slots_per_beacon_override = detail::KeyReader::convert<std::uint32_t>("mac.slots_per_beacon", *v);

  if (auto v = r.get("contention", "n_sta")) {
    c.n_sta.clear();
    for (const auto& s : detail::split_list(*v))
      c.n_sta.push_back(detail::KeyReader::convert<std::uint32_t>("contention.n_sta", s));
  }
  if (auto v = r.get("contention", "n_sta_mode")) {
    if (*v == "subsample")
      c.n_sta_mode = NStaMode::Subsample;
    else if (*v == "rescale")
      c.n_sta_mode = NStaMode::Rescale;
    else
      throw ConfigError("config: contention.n_sta_mode must be subsample or rescale");
  }

  r.read("sim", "periods", c.periods);
  r.read("sim", "full_connectivity", c.full_connectivity);
  r.read("sim", "random_phase", c.random_phase);

  r.read("analytic", "tol", c.tol);
  r.read("analytic", "max_iter", c.max_iter);

  r.read("report", "tau_tol", c.tolerances.tau_abs);
  auto opt = [&](const char* key, std::optional<double>& target) {
    if (auto v = r.get("report", key))
      target = detail::KeyReader::convert<double>(std::string("report.") + key, *v);
  };
  opt("e_nbo_rel", c.tolerances.e_nbo_rel);
  opt("delay_rel", c.tolerances.delay_rel);
  opt("r_rel", c.tolerances.r_rel);
  r.read("report", "irt_cw", c.irt_cw);
  r.read("report", "irt_n_max", c.irt_n_max);
  r.read("report", "zero_based_irt", c.zero_based_irt);

  r.check_unknown();
  c.validate();
  return c;
}

inline ExperimentConfig parse_config_string(const std::string& text)
{
  std::istringstream is(text);
  return parse_config(is);
}

/// Canonical form: every key, fixed order, '%.9g' numbers.
inline std::string canonical_config(const ExperimentConfig& c)
{
  using detail::g9;
  std::ostringstream os;
  auto b = [](bool v) { return v ? "true" : "false"; };
  os << "[experiment]\n"
     << "seed = " << c.seed << "\n"
     << "out = " << c.out << "\n\n";
  os << "[scenario]\n"
     << "width = " << g9(c.region.width) << "\n"
     << "height = " << g9(c.region.height) << "\n"
     << "danger_x = " << g9(c.region.danger.x) << "\n"
     << "danger_y = " << g9(c.region.danger.y) << "\n"
     << "density = " << g9(c.density) << "\n"
     << "drop_mode = " << to_string(c.drop_mode) << "\n"
     << "th1 = " << g9(c.thresholds.th1) << "\n"
     << "th2 = " << g9(c.thresholds.th2) << "\n"
     << "th3 = " << g9(c.thresholds.th3) << "\n"
     << "sense_range = " << g9(c.sense_range) << "\n\n";
  std::vector<std::string> labels;
  for (const auto& v : c.variants)
    labels.push_back(v.label());
  os << "[policy]\n"
     << "variants = " << detail::join(labels) << "\n"
     << "cw = " << detail::join(c.cws) << "\n"
     << "include_uncategorized = " << b(c.include_uncategorized) << "\n"
     << "silence_uncategorized = " << b(c.silence_uncategorized) << "\n\n";
  os << "[mac]\n"
     << "t_ibi = " << g9(c.mac.t_ibi) << "\n"
     << "t_slot = " << g9(c.mac.t_slot) << "\n"
     << "difs = " << g9(c.mac.difs) << "\n"
     << "sifs = " << g9(c.mac.sifs) << "\n"
     << "header_airtime = " << g9(c.mac.header_airtime) << "\n"
     << "payload_bytes = " << c.mac.payload_bytes << "\n"
     << "data_rate = " << g9(c.mac.data_rate) << "\n"
     << "t_prop = " << g9(c.mac.t_prop) << "\n";
  if (c.mac.slots_per_beacon_override)
    os << "slots_per_beacon = " << *c.mac.slots_per_beacon_override << "\n";
  os << "\n[contention]\n"
     << "n_sta = " << detail::join(c.n_sta) << "\n"
     << "n_sta_mode = " << (c.n_sta_mode == NStaMode::Subsample ? "subsample" : "rescale") << "\n\n";
  os << "[sim]\n"
     << "periods = " << c.periods << "\n"
     << "full_connectivity = " << b(c.full_connectivity) << "\n"
     << "random_phase = " << b(c.random_phase) << "\n\n";
  os << "[analytic]\n"
     << "tol = " << g9(c.tol) << "\n"
     << "max_iter = " << c.max_iter << "\n\n";
  os << "[report]\n"
     << "tau_tol = " << g9(c.tolerances.tau_abs) << "\n";
  if (c.tolerances.e_nbo_rel)
    os << "e_nbo_rel = " << g9(*c.tolerances.e_nbo_rel) << "\n";
  if (c.tolerances.delay_rel)
    os << "delay_rel = " << g9(*c.tolerances.delay_rel) << "\n";
  if (c.tolerances.r_rel)
    os << "r_rel = " << g9(*c.tolerances.r_rel) << "\n";
  os << "irt_cw = " << c.irt_cw << "\n"
     << "irt_n_max = " << c.irt_n_max << "\n"
     << "zero_based_irt = " << b(c.zero_based_irt) << "\n";
  return os.str();
}

} // namespace vbcast
