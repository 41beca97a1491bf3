#pragma once

// JSON scenario configuration and the subcommand runners behind the
// swarmlink tool. Runners are pure: they return artifacts (name + bytes)
// and leave writing to the caller.

#include <charconv>
#include <concepts>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "swarmlink/channel.hpp"
#include "swarmlink/dynamics.hpp"
#include "swarmlink/error.hpp"
#include "swarmlink/formation.hpp"
#include "swarmlink/linkbudget.hpp"
#include "swarmlink/network.hpp"
#include "swarmlink/rng.hpp"
#include "swarmlink/swarm_opt.hpp"
#include "swarmlink/wind.hpp"

namespace swarmlink::scenario {

using json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;

/// Every violation found in a config, as "field.path: constraint".
class Issues {
 public:
  void add(const std::string& path, const std::string& constraint) {
    list_.push_back(path + ": " + constraint);
  }
  bool empty() const { return list_.empty(); }
  const std::vector<std::string>& list() const { return list_; }
  std::string joined() const {
    std::string s;
    for (const auto& v : list_) s += (s.empty() ? "" : "; ") + v;
    return s;
  }

 private:
  std::vector<std::string> list_;
};

/// Thrown when a config fails validation; carries the full list.
class ValidationError : public ConfigError {
 public:
  explicit ValidationError(Issues issues)
      : ConfigError(issues.joined()), issues_(std::move(issues)) {}
  const Issues& issues() const { return issues_; }

 private:
  Issues issues_;
};

namespace internal {

// Typed, path-aware reads from one JSON object. Type mismatches are
// recorded and the fallback is returned, so a single pass finds everything.
class Section {
 public:
  Section(const json* j, std::string path, Issues& issues)
      : j_(j), path_(std::move(path)), issues_(&issues) {
    if (j_ && !j_->is_object()) {
      issues_->add(path_, "must be an object");
      j_ = nullptr;
    }
  }

  bool present() const { return j_ != nullptr; }
  bool has(const char* key) const { return j_ && j_->contains(key); }
  std::string at(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
  const std::string& path() const { return path_; }
  const json* raw(const char* key) const { return has(key) ? &(*j_)[key] : nullptr; }

  void check(bool ok, const std::string& key, const std::string& constraint) const {
    if (!ok) issues_->add(at(key), constraint);
  }

  Section child(const char* key) const { return Section(raw(key), at(key), *issues_); }

  double number(const char* key, double fallback) const {
    const json* v = raw(key);
    if (!v) return fallback;
    if (!v->is_number()) {
      issues_->add(at(key), "must be a number");
      return fallback;
    }
    return v->get<double>();
  }

  std::optional<double> maybe_number(const char* key) const {
    if (!has(key)) return std::nullopt;
    return number(key, 0.0);
  }

  long long integer(const char* key, long long fallback) const {
    const json* v = raw(key);
    if (!v) return fallback;
    if (!v->is_number_integer()) {
      issues_->add(at(key), "must be an integer");
      return fallback;
    }
    return v->get<long long>();
  }

  bool boolean(const char* key, bool fallback) const {
    const json* v = raw(key);
    if (!v) return fallback;
    if (!v->is_boolean()) {
      issues_->add(at(key), "must be true or false");
      return fallback;
    }
    return v->get<bool>();
  }

  std::string text(const char* key, const std::string& fallback) const {
    const json* v = raw(key);
    if (!v) return fallback;
    if (!v->is_string()) {
      issues_->add(at(key), "must be a string");
      return fallback;
    }
    return v->get<std::string>();
  }

  std::vector<double> numbers(const char* key, std::vector<double> fallback) const {
    const json* v = raw(key);
    if (!v) return fallback;
    std::vector<double> out;
    if (!v->is_array()) {
      issues_->add(at(key), "must be an array of numbers");
      return fallback;
    }
    for (const auto& e : *v) {
      if (!e.is_number()) {
        issues_->add(at(key), "must be an array of numbers");
        return fallback;
      }
      out.push_back(e.get<double>());
    }
    return out;
  }

  Vec3 vec3(const char* key, const Vec3& fallback) const {
    if (!has(key)) return fallback;
    const auto v = numbers(key, {});
    if (v.size() != 3) {
      issues_->add(at(key), "must hold exactly 3 numbers");
      return fallback;
    }
    return {v[0], v[1], v[2]};
  }

  template <class Enum>
  Enum choice(const char* key, Enum fallback,
              const std::vector<std::pair<std::string, Enum>>& options) const {
    if (!has(key)) return fallback;
    const std::string s = text(key, "");
    for (const auto& [name, e] : options)
      if (name == s) return e;
    std::string allowed;
    for (const auto& o : options) allowed += (allowed.empty() ? "" : "|") + o.first;
    issues_->add(at(key), "must be one of " + allowed);
    return fallback;
  }

  /// Flags keys not in `known`.
  void only(std::initializer_list<std::string_view> known) const {
    if (!j_) return;
    for (const auto& [k, _] : j_->items())
      if (std::find(known.begin(), known.end(), k) == known.end())
        issues_->add(at(k), "unknown key");
  }

 private:
  const json* j_;
  std::string path_;
  Issues* issues_;
};

}  // namespace internal

// ---------------------------------------------------------------------------
// Configuration model

struct UavConfig {
  int id = 1;
  dynamics::UavParams params;
  dynamics::UavState initial;
  std::optional<Vec3> target;  ///< dynamics subcommand; defaults to hover in place
  double target_heading = 0.0;
};

struct WindConfig {
  wind::TurbulenceSpec turbulence;
  std::optional<wind::WindShearCoeff> shear;
  double shear_delta_wind = 1.0;  ///< m/s step in mean wind
  double sample_spacing = 1.0;    ///< m
  std::size_t n_samples = 4096;
  double psd_omega_min = 1e-4;    ///< rad/m
  double psd_omega_max = 1.0;
  std::size_t psd_points = 200;
};

enum class Algorithm { Pso, Gwo, Wpa };
enum class Benchmark { Sphere, Rastrigin };

struct OptimizerConfig {
  Algorithm algorithm = Algorithm::Pso;
  Benchmark function = Benchmark::Sphere;
  int dim = 10;
  double lower = -5.12;
  double upper = 5.12;
  opt::PsoConfig pso;
  opt::GwoConfig gwo;
  opt::WpaConfig wpa;
};

struct FormationConfig {
  formation::RoleGraph roles;
  Vec3 leader_velocity = Vec3(1.0, 0.0, 0.0);
  double leader_heading = 0.0;
  formation::MovementGains gains;
};

struct ChannelConfig {
  channel::LinkParams link;
  channel::FadingParams fading;  ///< rician_k used for the Rician curve
  double sweep_min = 1.0;
  double sweep_max = 1e5;
  std::size_t sweep_points = 400;
  std::vector<double> ebn0_db{0, 2, 4, 6, 8};
  std::uint64_t n_bits = 100000;
  std::size_t constellation_symbols = 500;
  double constellation_ebn0_db = 10.0;
};

struct BudgetConfig {
  budget::AntennaSpec antenna;
  budget::BudgetItems items;
  budget::BudgetMode mode = budget::BudgetMode::PaperLiteral;
};

struct BerDistConfig {
  budget::BerDistanceScenario scenario;
  budget::BerFormula formula = budget::BerFormula::Standard;
  std::optional<double> noise_bandwidth_hz;
};

struct ApfConfig {
  Vec3 start = Vec3::Zero();
  network::ObstacleField field;
  network::ApfParams params;
};

struct NetworkConfig {
  network::TopologyKind kind = network::TopologyKind::MultiLayerAdHoc;
  int n_uavs = 6;
  int n_groups = 2;
  double link_range = 100.0;
  /// Ground station first; drawn uniformly in a cube of half-width
  /// `area_half_width` around the origin when absent.
  std::optional<std::vector<Vec3>> positions;
  double area_half_width = 50.0;
  int src = 1;
  int dst = 2;
  int ttl = 16;
  double per_hop_delay_s = 1e-3;
  std::optional<ApfConfig> apf;
};

struct OutputSpec {
  std::string what;
  std::string path;
  std::string format;
};

struct ScenarioConfig {
  std::optional<std::uint64_t> seed;
  double dt = 0.01;
  double duration = 10.0;
  int record_every = 10;
  std::vector<UavConfig> uavs;
  formation::MovementGains control;
  std::optional<WindConfig> wind;
  std::optional<OptimizerConfig> optimizer;
  std::optional<FormationConfig> formation;
  std::optional<ChannelConfig> channel;
  std::optional<BudgetConfig> budget;
  std::optional<BerDistConfig> berdist;
  std::optional<NetworkConfig> network;
  std::vector<OutputSpec> outputs;
};

/// Artifact names, their default file names and formats.
struct ArtifactInfo {
  std::string_view what;
  std::string_view file;
  std::string_view format;
};

inline constexpr ArtifactInfo kArtifacts[] = {
    {"dynamics_trace", "dynamics_trace.csv", "csv"},
    {"wind_psd", "wind_psd.csv", "csv"},
    {"wind_series", "wind_series.csv", "csv"},
    {"wind_shear", "wind_shear.json", "json"},
    {"optimizer_trace", "optimizer_trace.csv", "csv"},
    {"optimizer_summary", "optimizer_summary.json", "json"},
    {"formation_trace", "formation_trace.csv", "csv"},
    {"formation_summary", "formation_summary.json", "json"},
    {"channel_sweep", "channel_sweep.csv", "csv"},
    {"channel_constellation", "channel_constellation.csv", "csv"},
    {"channel_ber", "channel_ber.csv", "csv"},
    {"budget_report", "budget_report.txt", "text"},
    {"budget_json", "budget.json", "json"},
    {"berdist_curve", "berdist_curve.csv", "csv"},
    {"network_report", "network_report.json", "json"},
    {"apf_trajectory", "apf_trajectory.csv", "csv"},
};

inline const ArtifactInfo* find_artifact(std::string_view what) {
  for (const auto& a : kArtifacts)
    if (a.what == what) return &a;
  return nullptr;
}

// ---------------------------------------------------------------------------
// Parsing

namespace internal {

inline dynamics::PidGains parse_gains(const Section& s, dynamics::PidGains g) {
  g.kp = s.number("kp", g.kp);
  g.kd = s.number("kd", g.kd);
  g.ki = s.number("ki", g.ki);
  s.check(g.kp >= 0, "kp", "kp ≥ 0");
  s.check(g.kd >= 0, "kd", "kd ≥ 0");
  s.check(g.ki >= 0, "ki", "ki ≥ 0");
  return g;
}

inline formation::MovementGains parse_movement_gains(const Section& s) {
  formation::MovementGains g;
  if (!s.present()) return g;
  s.only({"position", "attitude"});
  g.position = parse_gains(s.child("position"), g.position);
  g.attitude = parse_gains(s.child("attitude"), g.attitude);
  return g;
}

inline UavConfig parse_uav(const Section& s, int fallback_id) {
  UavConfig u;
  s.only({"id", "params", "initial_state", "target", "target_heading"});
  u.id = static_cast<int>(s.integer("id", fallback_id));
  const Section p = s.child("params");
  p.only({"mass", "gravity", "thrust_coeff", "rotor_inertia", "air_density", "rotor_disc_area"});
  u.params.mass = p.number("mass", u.params.mass);
  u.params.gravity = p.number("gravity", u.params.gravity);
  u.params.thrust_coeff = p.number("thrust_coeff", u.params.thrust_coeff);
  u.params.rotor_inertia = p.number("rotor_inertia", u.params.rotor_inertia);
  u.params.air_density = p.number("air_density", u.params.air_density);
  u.params.rotor_disc_area = p.number("rotor_disc_area", u.params.rotor_disc_area);
  p.check(u.params.mass > 0, "mass", "mass > 0");
  p.check(u.params.gravity >= 0, "gravity", "gravity ≥ 0");
  p.check(u.params.thrust_coeff > 0, "thrust_coeff", "thrust_coeff > 0");
  p.check(u.params.rotor_inertia > 0, "rotor_inertia", "rotor_inertia > 0");
  p.check(u.params.air_density >= 0, "air_density", "air_density ≥ 0");

  const Section st = s.child("initial_state");
  st.only({"position", "velocity", "euler", "euler_rates", "rotor_speeds"});
  u.initial.position = st.vec3("position", u.initial.position);
  u.initial.velocity = st.vec3("velocity", u.initial.velocity);
  u.initial.euler = st.vec3("euler", u.initial.euler);
  u.initial.euler_rates = st.vec3("euler_rates", u.initial.euler_rates);
  if (st.has("rotor_speeds")) {
    const auto w = st.numbers("rotor_speeds", {});
    if (w.size() == 4 && std::all_of(w.begin(), w.end(), [](double x) { return x >= 0; }))
      u.initial.rotor_speeds = Vec4(w[0], w[1], w[2], w[3]);
    else
      st.check(false, "rotor_speeds", "4 numbers, each ≥ 0");
  }
  if (s.has("target")) u.target = s.vec3("target", u.initial.position);
  u.target_heading = s.number("target_heading", 0.0);
  return u;
}

inline WindConfig parse_wind(const Section& s) {
  WindConfig w;
  s.only({"turbulence", "shear", "shear_delta_wind", "sample_spacing", "n_samples",
          "psd_omega_min", "psd_omega_max", "psd_points"});
  const Section t = s.child("turbulence");
  t.only({"model", "sigma", "length"});
  w.turbulence.model = t.choice<wind::TurbulenceModel>(
      "model", wind::TurbulenceModel::Dryden,
      {{"dryden", wind::TurbulenceModel::Dryden}, {"von_karman", wind::TurbulenceModel::VonKarman}});
  w.turbulence.sigma = t.vec3("sigma", w.turbulence.sigma);
  w.turbulence.length = t.vec3("length", w.turbulence.length);
  t.check((w.turbulence.sigma.array() >= 0).all(), "sigma", "sigma ≥ 0");
  t.check((w.turbulence.length.array() > 0).all(), "length", "length > 0");
  if (s.has("shear")) {
    const Section sh = s.child("shear");
    sh.only({"p"});
    w.shear = wind::WindShearCoeff{sh.number("p", 0.0)};
    sh.check(std::abs(w.shear->p) < 1.0, "p", "|p| < 1");
  }
  w.shear_delta_wind = s.number("shear_delta_wind", w.shear_delta_wind);
  w.sample_spacing = s.number("sample_spacing", w.sample_spacing);
  s.check(w.sample_spacing > 0, "sample_spacing", "sample_spacing > 0");
  const auto n = s.integer("n_samples", static_cast<long long>(w.n_samples));
  s.check(n >= 2 && (n & (n - 1)) == 0, "n_samples", "power of two ≥ 2");
  w.n_samples = n >= 2 ? static_cast<std::size_t>(n) : 2;
  w.psd_omega_min = s.number("psd_omega_min", w.psd_omega_min);
  w.psd_omega_max = s.number("psd_omega_max", w.psd_omega_max);
  s.check(w.psd_omega_min > 0 && w.psd_omega_min < w.psd_omega_max, "psd_omega_min",
          "0 < psd_omega_min < psd_omega_max");
  const auto pts = s.integer("psd_points", static_cast<long long>(w.psd_points));
  s.check(pts >= 2, "psd_points", "psd_points ≥ 2");
  w.psd_points = pts >= 2 ? static_cast<std::size_t>(pts) : 2;
  return w;
}

inline OptimizerConfig parse_optimizer(const Section& s) {
  OptimizerConfig o;
  s.only({"algorithm", "function", "dim", "lower", "upper", "pso", "gwo", "wpa"});
  o.algorithm = s.choice<Algorithm>(
      "algorithm", o.algorithm,
      {{"pso", Algorithm::Pso}, {"gwo", Algorithm::Gwo}, {"wpa", Algorithm::Wpa}});
  o.function = s.choice<Benchmark>("function", o.function,
                                   {{"sphere", Benchmark::Sphere}, {"rastrigin", Benchmark::Rastrigin}});
  o.dim = static_cast<int>(s.integer("dim", o.dim));
  s.check(o.dim >= 1, "dim", "dim ≥ 1");
  o.lower = s.number("lower", o.lower);
  o.upper = s.number("upper", o.upper);
  s.check(o.lower < o.upper, "lower", "lower < upper");

  const Section p = s.child("pso");
  p.only({"n_particles", "c1", "c2", "inertia", "paper_literal", "velocity_limit", "max_iters",
          "target_value"});
  o.pso.n_particles = static_cast<int>(p.integer("n_particles", o.pso.n_particles));
  o.pso.c1 = p.number("c1", o.pso.c1);
  o.pso.c2 = p.number("c2", o.pso.c2);
  o.pso.inertia = p.number("inertia", o.pso.inertia);
  o.pso.paper_literal = p.boolean("paper_literal", o.pso.paper_literal);
  o.pso.velocity_limit = p.number("velocity_limit", o.pso.velocity_limit);
  o.pso.max_iters = static_cast<int>(p.integer("max_iters", o.pso.max_iters));
  o.pso.target_value = p.maybe_number("target_value");
  p.check(o.pso.n_particles >= 2, "n_particles", "n_particles ≥ 2");
  p.check(o.pso.c1 >= 0, "c1", "c1 ≥ 0");
  p.check(o.pso.c2 >= 0, "c2", "c2 ≥ 0");
  p.check(o.pso.inertia >= 0, "inertia", "inertia ≥ 0");
  p.check(o.pso.max_iters >= 1, "max_iters", "max_iters ≥ 1");

  const Section g = s.child("gwo");
  g.only({"n_wolves", "max_iters", "target_value"});
  o.gwo.n_wolves = static_cast<int>(g.integer("n_wolves", o.gwo.n_wolves));
  o.gwo.max_iters = static_cast<int>(g.integer("max_iters", o.gwo.max_iters));
  o.gwo.target_value = g.maybe_number("target_value");
  g.check(o.gwo.n_wolves >= 4, "n_wolves", "n_wolves ≥ 4");
  g.check(o.gwo.max_iters >= 1, "max_iters", "max_iters ≥ 1");

  const Section w = s.child("wpa");
  w.only({"n_wolves", "max_iters", "step_coeff", "distance_threshold", "scout_max_repeats",
          "scout_directions", "renew_fraction", "target_value"});
  o.wpa.n_wolves = static_cast<int>(w.integer("n_wolves", o.wpa.n_wolves));
  o.wpa.max_iters = static_cast<int>(w.integer("max_iters", o.wpa.max_iters));
  o.wpa.step_coeff = w.number("step_coeff", o.wpa.step_coeff);
  o.wpa.distance_threshold = w.number("distance_threshold", o.wpa.distance_threshold);
  o.wpa.scout_max_repeats = static_cast<int>(w.integer("scout_max_repeats", o.wpa.scout_max_repeats));
  o.wpa.scout_directions = static_cast<int>(w.integer("scout_directions", o.wpa.scout_directions));
  o.wpa.renew_fraction = w.number("renew_fraction", o.wpa.renew_fraction);
  o.wpa.target_value = w.maybe_number("target_value");
  w.check(o.wpa.n_wolves >= 3, "n_wolves", "n_wolves ≥ 3");
  w.check(o.wpa.max_iters >= 1, "max_iters", "max_iters ≥ 1");
  w.check(o.wpa.renew_fraction > 0 && o.wpa.renew_fraction < 1, "renew_fraction", "0 < β < 1");
  w.check(o.wpa.step_coeff > 0, "step_coeff", "step_coeff > 0");
  w.check(o.wpa.distance_threshold > 0, "distance_threshold", "distance_threshold > 0");
  w.check(o.wpa.scout_max_repeats > 0, "scout_max_repeats", "scout_max_repeats > 0");
  w.check(o.wpa.scout_directions > 0, "scout_directions", "scout_directions > 0");
  return o;
}

inline FormationConfig parse_formation(const Section& s, Issues& issues) {
  FormationConfig f;
  s.only({"root", "edges", "leader_velocity", "leader_heading", "gains"});
  f.roles.root = static_cast<int>(s.integer("root", 0));
  f.leader_velocity = s.vec3("leader_velocity", f.leader_velocity);
  f.leader_heading = s.number("leader_heading", f.leader_heading);
  f.gains = parse_movement_gains(s.child("gains"));
  const json* edges = s.raw("edges");
  if (!edges || !edges->is_array() || edges->empty()) {
    s.check(false, "edges", "non-empty array of role edges");
    return f;
  }
  for (std::size_t i = 0; i < edges->size(); ++i) {
    const Section e(&(*edges)[i], s.at("edges") + "[" + std::to_string(i) + "]", issues);
    e.only({"leader", "follower", "mode", "offset", "relative_heading"});
    formation::RoleEdge edge;
    edge.leader = static_cast<int>(e.integer("leader", 0));
    edge.follower = static_cast<int>(e.integer("follower", 0));
    edge.spec.mode = e.choice<formation::FormationMode>(
        "mode", formation::FormationMode::FixedGlobalDifference,
        {{"fgd", formation::FormationMode::FixedGlobalDifference},
         {"df", formation::FormationMode::DoubleFixation}});
    edge.spec.offset = e.vec3("offset", Vec3::Zero());
    edge.spec.relative_heading = e.number("relative_heading", 0.0);
    f.roles.edges.push_back(edge);
  }
  try {
    f.roles.validate();
  } catch (const StructuralError& err) {
    s.check(false, "edges", err.what());
  }
  return f;
}

inline channel::LinkParams parse_link(const Section& s, channel::LinkParams l) {
  s.only({"tx_power", "tx_gain", "rx_gain", "wavelength", "distance", "tx_height", "rx_height",
          "ground_reflection"});
  l.tx_power = s.number("tx_power", l.tx_power);
  l.tx_gain = s.number("tx_gain", l.tx_gain);
  l.rx_gain = s.number("rx_gain", l.rx_gain);
  l.wavelength = s.number("wavelength", l.wavelength);
  l.distance = s.number("distance", l.distance);
  l.tx_height = s.number("tx_height", l.tx_height);
  l.rx_height = s.number("rx_height", l.rx_height);
  l.ground_reflection = s.number("ground_reflection", l.ground_reflection);
  s.check(l.tx_power > 0, "tx_power", "tx_power > 0");
  s.check(l.tx_gain > 0, "tx_gain", "tx_gain > 0");
  s.check(l.rx_gain > 0, "rx_gain", "rx_gain > 0");
  s.check(l.wavelength > 0, "wavelength", "wavelength > 0");
  s.check(l.distance > 0, "distance", "distance > 0");
  s.check(l.tx_height > 0, "tx_height", "tx_height > 0");
  s.check(l.rx_height > 0, "rx_height", "rx_height > 0");
  s.check(std::abs(l.ground_reflection) <= 1, "ground_reflection", "|ground_reflection| ≤ 1");
  return l;
}

inline ChannelConfig parse_channel(const Section& s) {
  ChannelConfig c;
  s.only({"link", "rician_k_db", "sweep_min", "sweep_max", "sweep_points", "ebn0_db", "n_bits",
          "constellation_symbols", "constellation_ebn0_db"});
  c.link = parse_link(s.child("link"), c.link);
  const double k_db = s.number("rician_k_db", 10.0);
  c.fading.rician_k = channel::from_db(k_db);
  c.sweep_min = s.number("sweep_min", c.sweep_min);
  c.sweep_max = s.number("sweep_max", c.sweep_max);
  s.check(c.sweep_min > 0 && c.sweep_min < c.sweep_max, "sweep_min", "0 < sweep_min < sweep_max");
  const auto pts = s.integer("sweep_points", static_cast<long long>(c.sweep_points));
  s.check(pts >= 2, "sweep_points", "sweep_points ≥ 2");
  c.sweep_points = pts >= 2 ? static_cast<std::size_t>(pts) : 2;
  c.ebn0_db = s.numbers("ebn0_db", c.ebn0_db);
  const auto bits = s.integer("n_bits", static_cast<long long>(c.n_bits));
  s.check(bits >= 10000 && bits % 2 == 0, "n_bits", "even and ≥ 10000");
  c.n_bits = bits >= 10000 ? static_cast<std::uint64_t>(bits + bits % 2) : 10000;
  const auto syms = s.integer("constellation_symbols", static_cast<long long>(c.constellation_symbols));
  s.check(syms >= 1, "constellation_symbols", "constellation_symbols ≥ 1");
  c.constellation_symbols = syms >= 1 ? static_cast<std::size_t>(syms) : 1;
  c.constellation_ebn0_db = s.number("constellation_ebn0_db", c.constellation_ebn0_db);
  return c;
}

inline std::vector<budget::BudgetLineItem> parse_items(const Section& s, const char* key,
                                                       Issues& issues,
                                                       std::vector<budget::BudgetLineItem> fallback) {
  const json* arr = s.raw(key);
  if (!arr) return fallback;
  if (!arr->is_array()) {
    s.check(false, key, "array of {label, value_db}");
    return fallback;
  }
  std::vector<budget::BudgetLineItem> out;
  for (std::size_t i = 0; i < arr->size(); ++i) {
    const Section e(&(*arr)[i], s.at(key) + "[" + std::to_string(i) + "]", issues);
    e.only({"label", "value_db"});
    budget::BudgetLineItem item{e.text("label", ""), e.number("value_db", 0.0)};
    e.check(!item.label.empty(), "label", "non-empty label");
    e.check(e.has("value_db"), "value_db", "required");
    out.push_back(item);
  }
  return out;
}

inline BudgetConfig parse_budget(const Section& s, Issues& issues) {
  BudgetConfig b;
  b.antenna = budget::reference_antenna();
  s.only({"antenna", "items", "mode"});
  const Section a = s.child("antenna");
  a.only({"freq_low", "freq_high", "gain_dbi", "vswr", "input_power", "input_impedance",
          "rx_threshold_dbm", "link_length", "operational_temp", "standard_temp"});
  auto& an = b.antenna;
  an.freq_low = a.number("freq_low", an.freq_low);
  an.freq_high = a.number("freq_high", an.freq_high);
  an.gain_dbi = a.number("gain_dbi", an.gain_dbi);
  an.vswr = a.number("vswr", an.vswr);
  an.input_power = a.number("input_power", an.input_power);
  an.input_impedance = a.number("input_impedance", an.input_impedance);
  an.rx_threshold_dbm = a.number("rx_threshold_dbm", an.rx_threshold_dbm);
  an.link_length = a.number("link_length", an.link_length);
  an.operational_temp = a.number("operational_temp", an.operational_temp);
  an.standard_temp = a.number("standard_temp", an.standard_temp);
  a.check(an.vswr >= 1.0, "vswr", "vswr ≥ 1");
  a.check(an.freq_low > 0 && an.freq_low < an.freq_high, "freq_low", "0 < freq_low < freq_high");
  a.check(an.input_power > 0, "input_power", "input_power > 0");
  a.check(an.input_impedance > 0, "input_impedance", "input_impedance > 0");
  a.check(an.link_length > 0, "link_length", "link_length > 0");
  a.check(an.operational_temp >= 0, "operational_temp", "operational_temp ≥ 0");
  a.check(an.standard_temp > 0, "standard_temp", "standard_temp > 0");

  b.mode = s.choice<budget::BudgetMode>(
      "mode", b.mode,
      {{"paper", budget::BudgetMode::PaperLiteral}, {"corrected", budget::BudgetMode::CorrectedSum}});

  // Without an items section the reference tables are used verbatim.
  b.items = budget::reference_items();
  if (!s.has("items")) return b;
  const Section it = s.child("items");
  it.only({"tx", "losses", "rx", "rx_threshold_db", "interference_margin_db",
           "noise_bandwidth_hz", "printed"});
  budget::BudgetItems items;
  items.tx = parse_items(it, "tx", issues, {});
  items.losses = parse_items(it, "losses", issues, {});
  items.rx = parse_items(it, "rx", issues, {});
  items.rx_threshold_db = it.maybe_number("rx_threshold_db");
  items.interference_margin_db = it.number("interference_margin_db", 0.0);
  items.noise_bandwidth_hz = it.maybe_number("noise_bandwidth_hz");
  it.check(items.rx_threshold_db.has_value(), "rx_threshold_db", "required");
  it.check(items.noise_bandwidth_hz.value_or(0.0) > 0, "noise_bandwidth_hz", "noise_bandwidth_hz > 0");
  auto need = [&](const char* list, const std::vector<budget::BudgetLineItem>& v, const char* label) {
    it.check(budget::internal::find_item(v, label) != nullptr, list,
             std::string("must contain \"") + label + "\"");
  };
  need("tx", items.tx, "Tx Power");
  need("tx", items.tx, "Tx Gain");
  need("losses", items.losses, "Path Loss");
  need("rx", items.rx, "Rx Gain");
  const Section p = it.child("printed");
  p.only({"eirp_db", "total_path_loss_db", "total_rx_gain_db", "noise_figure_db",
          "total_noise_power_dbm", "rsl_db"});
  items.printed.eirp_db = p.maybe_number("eirp_db");
  items.printed.total_path_loss_db = p.maybe_number("total_path_loss_db");
  items.printed.total_rx_gain_db = p.maybe_number("total_rx_gain_db");
  items.printed.noise_figure_db = p.maybe_number("noise_figure_db");
  items.printed.total_noise_power_dbm = p.maybe_number("total_noise_power_dbm");
  items.printed.rsl_db = p.numbers("rsl_db", {});
  b.items = std::move(items);
  return b;
}

inline BerDistConfig parse_berdist(const Section& s) {
  BerDistConfig c;
  s.only({"link", "data_rate", "noise_power_dbm", "min_distance", "max_distance", "points",
          "formula", "noise_bandwidth_hz"});
  auto& sc = c.scenario;
  sc.link = parse_link(s.child("link"), sc.link);
  sc.data_rate = s.number("data_rate", sc.data_rate);
  sc.noise_power_dbm = s.number("noise_power_dbm", sc.noise_power_dbm);
  sc.min_distance = s.number("min_distance", sc.min_distance);
  sc.max_distance = s.number("max_distance", sc.max_distance);
  const auto pts = s.integer("points", static_cast<long long>(sc.points));
  s.check(sc.data_rate > 0, "data_rate", "data_rate > 0");
  s.check(sc.min_distance > 0 && sc.min_distance < sc.max_distance, "min_distance",
          "0 < min_distance < max_distance");
  s.check(pts >= 2, "points", "points ≥ 2");
  sc.points = pts >= 2 ? static_cast<std::size_t>(pts) : 2;
  c.formula = s.choice<budget::BerFormula>(
      "formula", c.formula,
      {{"standard", budget::BerFormula::Standard}, {"paper", budget::BerFormula::PaperLiteral}});
  c.noise_bandwidth_hz = s.maybe_number("noise_bandwidth_hz");
  s.check(c.noise_bandwidth_hz.value_or(1.0) > 0, "noise_bandwidth_hz", "noise_bandwidth_hz > 0");
  return c;
}

inline NetworkConfig parse_network(const Section& s, Issues& issues) {
  using network::TopologyKind;
  NetworkConfig n;
  s.only({"kind", "n_uavs", "n_groups", "link_range", "positions", "area_half_width", "src", "dst",
          "ttl", "per_hop_delay_s", "apf"});
  n.kind = s.choice<TopologyKind>("kind", n.kind,
                                  {{"star", TopologyKind::Star},
                                   {"multi_star", TopologyKind::MultiStar},
                                   {"single_group", TopologyKind::SingleGroupAdHoc},
                                   {"multi_group", TopologyKind::MultiGroupAdHoc},
                                   {"multi_layer", TopologyKind::MultiLayerAdHoc}});
  n.n_uavs = static_cast<int>(s.integer("n_uavs", n.n_uavs));
  n.n_groups = static_cast<int>(s.integer("n_groups", n.n_groups));
  n.link_range = s.number("link_range", n.link_range);
  n.area_half_width = s.number("area_half_width", n.area_half_width);
  n.src = static_cast<int>(s.integer("src", n.src));
  n.dst = static_cast<int>(s.integer("dst", n.dst));
  n.ttl = static_cast<int>(s.integer("ttl", n.ttl));
  n.per_hop_delay_s = s.number("per_hop_delay_s", n.per_hop_delay_s);
  s.check(n.n_uavs >= 1, "n_uavs", "n_uavs ≥ 1");
  s.check(n.n_groups >= 1 && n.n_groups <= std::max(1, n.n_uavs), "n_groups", "1 ≤ n_groups ≤ n_uavs");
  s.check(n.link_range > 0, "link_range", "link_range > 0");
  s.check(n.area_half_width > 0, "area_half_width", "area_half_width > 0");
  s.check(n.src >= 0 && n.src <= n.n_uavs, "src", "0 ≤ src ≤ n_uavs");
  s.check(n.dst >= 0 && n.dst <= n.n_uavs, "dst", "0 ≤ dst ≤ n_uavs");
  s.check(n.ttl >= 0, "ttl", "ttl ≥ 0");
  s.check(n.per_hop_delay_s >= 0, "per_hop_delay_s", "per_hop_delay_s ≥ 0");
  if (const json* pos = s.raw("positions")) {
    std::vector<Vec3> pts;
    bool ok = pos->is_array();
    if (ok)
      for (const auto& p : *pos) {
        if (!p.is_array() || p.size() != 3 ||
            !std::all_of(p.begin(), p.end(), [](const json& x) { return x.is_number(); })) {
          ok = false;
          break;
        }
        pts.emplace_back(p[0].get<double>(), p[1].get<double>(), p[2].get<double>());
      }
    s.check(ok, "positions", "array of [x, y, z]");
    s.check(!ok || static_cast<int>(pts.size()) == n.n_uavs + 1, "positions",
            "n_uavs + 1 entries, ground station first");
    if (ok) n.positions = std::move(pts);
  }
  if (s.has("apf")) {
    const Section a = s.child("apf");
    a.only({"start", "goal", "obstacles", "bounds_min", "bounds_max", "attract_gain", "repel_gain",
            "influence_radius", "descent_rate", "max_step", "max_steps", "goal_tolerance",
            "stall_tolerance", "stall_window"});
    ApfConfig apf;
    apf.start = a.vec3("start", apf.start);
    apf.field.goal = a.vec3("goal", apf.field.goal);
    apf.field.bounds_min = a.vec3("bounds_min", apf.field.bounds_min);
    apf.field.bounds_max = a.vec3("bounds_max", apf.field.bounds_max);
    auto& p = apf.params;
    p.attract_gain = a.number("attract_gain", p.attract_gain);
    p.repel_gain = a.number("repel_gain", p.repel_gain);
    p.influence_radius = a.number("influence_radius", p.influence_radius);
    p.descent_rate = a.number("descent_rate", p.descent_rate);
    p.max_step = a.number("max_step", p.max_step);
    p.max_steps = static_cast<int>(a.integer("max_steps", p.max_steps));
    p.goal_tolerance = a.number("goal_tolerance", p.goal_tolerance);
    p.stall_tolerance = a.number("stall_tolerance", p.stall_tolerance);
    p.stall_window = static_cast<int>(a.integer("stall_window", p.stall_window));
    a.check(p.influence_radius > 0, "influence_radius", "influence_radius > 0");
    a.check(p.descent_rate > 0, "descent_rate", "descent_rate > 0");
    a.check(p.max_step > 0, "max_step", "max_step > 0");
    a.check(p.max_steps > 0, "max_steps", "max_steps > 0");
    a.check((apf.field.bounds_min.array() < apf.field.bounds_max.array()).all(), "bounds_min",
            "bounds_min < bounds_max");
    if (const json* obs = a.raw("obstacles")) {
      if (!obs->is_array()) a.check(false, "obstacles", "array of {center, radius}");
      else
        for (std::size_t i = 0; i < obs->size(); ++i) {
          const Section o(&(*obs)[i], a.at("obstacles") + "[" + std::to_string(i) + "]", issues);
          o.only({"center", "radius"});
          network::Obstacle ob{o.vec3("center", Vec3::Zero()), o.number("radius", 1.0)};
          o.check(ob.radius > 0, "radius", "radius > 0");
          apf.field.obstacles.push_back(ob);
        }
    }
    a.check(apf.field.clearance(apf.start) > 0, "start", "start outside every obstacle");
    n.apf = apf;
  }
  return n;
}

}  // namespace internal

/// Parses and validates a config; collects every violation.
inline ScenarioConfig parse_config(const json& root, Issues& issues) {
  using internal::Section;
  ScenarioConfig c;
  const Section s(&root, "", issues);
  if (!s.present()) return c;
  s.only({"seed", "dt", "duration", "record_every", "uavs", "control", "wind", "optimizer",
          "formation", "channel", "budget", "berdist", "network", "outputs"});

  if (s.has("seed")) {
    const json& v = root["seed"];
    if (v.is_number_unsigned() || (v.is_number_integer() && v.get<long long>() >= 0))
      c.seed = v.get<std::uint64_t>();
    else
      s.check(false, "seed", "non-negative integer");
  }
  c.dt = s.number("dt", c.dt);
  c.duration = s.number("duration", c.duration);
  c.record_every = static_cast<int>(s.integer("record_every", c.record_every));
  s.check(c.dt > 0, "dt", "dt > 0");
  s.check(c.duration > 0, "duration", "duration > 0");
  s.check(c.record_every >= 1, "record_every", "record_every ≥ 1");
  c.control = internal::parse_movement_gains(s.child("control"));

  if (const json* uavs = s.raw("uavs")) {
    if (!uavs->is_array()) {
      s.check(false, "uavs", "array of UAV entries");
    } else {
      std::set<int> ids;
      for (std::size_t i = 0; i < uavs->size(); ++i) {
        const Section u(&(*uavs)[i], "uavs[" + std::to_string(i) + "]", issues);
        c.uavs.push_back(internal::parse_uav(u, static_cast<int>(i) + 1));
        u.check(ids.insert(c.uavs.back().id).second, "id", "unique UAV id");
      }
    }
  }

  if (s.has("wind")) c.wind = internal::parse_wind(s.child("wind"));
  if (s.has("optimizer")) c.optimizer = internal::parse_optimizer(s.child("optimizer"));
  if (s.has("formation")) {
    c.formation = internal::parse_formation(s.child("formation"), issues);
    std::set<int> ids;
    for (const auto& u : c.uavs) ids.insert(u.id);
    for (const auto& e : c.formation->roles.edges)
      s.check(ids.contains(e.follower), "formation.edges",
              "follower " + std::to_string(e.follower) + " resolves to a UAV id");
  }
  if (s.has("channel")) c.channel = internal::parse_channel(s.child("channel"));
  if (s.has("budget")) c.budget = internal::parse_budget(s.child("budget"), issues);
  if (s.has("berdist")) c.berdist = internal::parse_berdist(s.child("berdist"));
  if (s.has("network")) c.network = internal::parse_network(s.child("network"), issues);

  const bool stochastic = c.wind || c.optimizer || c.channel ||
                          (c.network && !c.network->positions);
  s.check(!stochastic || c.seed.has_value(), "seed",
          "required when wind, optimizer, channel or random network positions are configured");

  if (const json* outs = s.raw("outputs")) {
    if (!outs->is_array()) {
      s.check(false, "outputs", "array of {what, path, format}");
    } else {
      for (std::size_t i = 0; i < outs->size(); ++i) {
        const Section o(&(*outs)[i], "outputs[" + std::to_string(i) + "]", issues);
        o.only({"what", "path", "format"});
        OutputSpec spec{o.text("what", ""), o.text("path", ""), o.text("format", "")};
        const ArtifactInfo* info = find_artifact(spec.what);
        o.check(info != nullptr, "what", "known artifact name");
        o.check(!spec.path.empty(), "path", "non-empty path");
        if (info && spec.format.empty()) spec.format = std::string(info->format);
        if (info)
          o.check(spec.format == info->format, "format",
                  "must be " + std::string(info->format) + " for " + spec.what);
        c.outputs.push_back(spec);
      }
    }
  }
  return c;
}

/// Throws ValidationError listing every violation.
inline ScenarioConfig load_config(const json& root) {
  Issues issues;
  ScenarioConfig c = parse_config(root, issues);
  if (!issues.empty()) throw ValidationError(std::move(issues));
  return c;
}

// ---------------------------------------------------------------------------
// Formatting

/// Shortest representation that round-trips; identical across runs.
inline std::string num(double v) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

class Csv {
 public:
  explicit Csv(std::initializer_list<std::string_view> header) {
    bool first = true;
    for (auto h : header) {
      out_ << (first ? "" : ",") << h;
      first = false;
    }
    out_ << '\n';
  }
  template <class... T>
  void row(const T&... cells) {
    bool first = true;
    ((out_ << (first ? "" : ",") << cell(cells), first = false), ...);
    out_ << '\n';
  }
  std::string str() const { return out_.str(); }

 private:
  static std::string cell(double v) { return num(v); }
  template <std::integral I>
  static std::string cell(I v) {
    return std::to_string(v);
  }
  static std::string cell(const std::string& v) { return v; }
  static std::string cell(const char* v) { return v; }
  std::ostringstream out_;
};

inline json vec_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

// ---------------------------------------------------------------------------
// Runners

struct Artifact {
  std::string what;
  std::string content;
};

struct RunOptions {
  std::optional<std::uint64_t> seed;             ///< overrides config seed
  std::optional<budget::BudgetMode> mode;        ///< overrides budget.mode
  unsigned workers = 1;                          ///< Monte Carlo threads
  bool sweep_only = false;                       ///< channel: power sweep only
};

inline std::uint64_t module_seed(const ScenarioConfig& c, const RunOptions& o, std::string_view tag) {
  const auto base = o.seed ? o.seed : c.seed;
  if (!base) throw ValidationError([] {
      Issues i;
      i.add("seed", "required by this subcommand");
      return i;
    }());
  return derive_seed(*base, tag);
}

template <class T>
const T& require_section(const std::optional<T>& section, const char* name) {
  if (!section) {
    Issues i;
    i.add(name, std::string("section required by '") + name + "'");
    throw ValidationError(std::move(i));
  }
  return *section;
}

inline std::vector<Artifact> run_dynamics(const ScenarioConfig& c) {
  if (c.uavs.empty()) {
    Issues i;
    i.add("uavs", "at least one UAV required by 'dynamics'");
    throw ValidationError(std::move(i));
  }
  Csv csv({"time", "uav", "x", "y", "z", "vx", "vy", "vz", "yaw", "pitch", "roll", "thrust"});
  const auto steps = static_cast<long>(std::llround(c.duration / c.dt));
  for (const auto& u : c.uavs) {
    const formation::Pose target{u.target.value_or(u.initial.position), u.target_heading};
    dynamics::UavState s = u.initial;
    double thrust = dynamics::altitude_thrust(s, u.params, 0.0);
    auto emit = [&](double t) {
      csv.row(t, u.id, s.position.x(), s.position.y(), s.position.z(), s.velocity.x(),
              s.velocity.y(), s.velocity.z(), s.euler[0], s.euler[1], s.euler[2], thrust);
    };
    emit(0.0);
    for (long k = 1; k <= steps; ++k) {
      const auto in = formation::movement_step(s, target, c.control, u.params, c.dt);
      thrust = in.total_thrust;
      s = dynamics::step_state(s, in, u.params, c.dt);
      if (k % c.record_every == 0 || k == steps) emit(static_cast<double>(k) * c.dt);
    }
  }
  return {{"dynamics_trace", csv.str()}};
}

inline std::vector<Artifact> run_wind(const ScenarioConfig& c, const RunOptions& o) {
  const WindConfig& w = require_section(c.wind, "wind");
  const std::uint64_t seed = module_seed(c, o, "wind");
  std::vector<Artifact> out;

  Csv psd({"omega", "phi_u", "phi_v", "phi_w"});
  for (double om : budget::log_space(w.psd_omega_min, w.psd_omega_max, w.psd_points))
    psd.row(om, wind::turbulence_psd(w.turbulence, wind::Component::U, om),
            wind::turbulence_psd(w.turbulence, wind::Component::V, om),
            wind::turbulence_psd(w.turbulence, wind::Component::W, om));
  out.push_back({"wind_psd", psd.str()});

  std::vector<std::vector<double>> series;
  for (int k = 0; k < 3; ++k)
    series.push_back(wind::synthesize_turbulence(w.turbulence, static_cast<wind::Component>(k),
                                                 w.sample_spacing, w.n_samples,
                                                 derive_seed(seed, "component", k)));
  Csv ser({"x", "u", "v", "w"});
  for (std::size_t i = 0; i < w.n_samples; ++i)
    ser.row(static_cast<double>(i) * w.sample_spacing, series[0][i], series[1][i], series[2][i]);
  out.push_back({"wind_series", ser.str()});

  if (w.shear) {
    const auto r = wind::wind_shear_response(*w.shear, w.shear_delta_wind);
    json j{{"schema_version", kSchemaVersion},
           {"p", w.shear->p},
           {"delta_wind", w.shear_delta_wind},
           {"delta_ground_speed", r.delta_ground_speed},
           {"delta_airspeed", r.delta_airspeed}};
    out.push_back({"wind_shear", j.dump(2) + "\n"});
  }
  return out;
}

inline std::vector<Artifact> run_optimize(const ScenarioConfig& c, const RunOptions& o) {
  const OptimizerConfig& oc = require_section(c.optimizer, "optimizer");
  const std::uint64_t seed = module_seed(c, o, "optimizer");
  const auto space = opt::SearchSpace::cube(oc.dim, oc.lower, oc.upper);
  auto fitness = [&](const opt::Point& x) {
    return oc.function == Benchmark::Sphere ? opt::sphere(x) : opt::rastrigin(x);
  };
  opt::OptimizerRun run;
  std::string name;
  switch (oc.algorithm) {
    case Algorithm::Pso: {
      auto cfg = oc.pso;
      cfg.seed = seed;
      run = opt::pso_optimize(fitness, space, cfg);
      name = "pso";
      break;
    }
    case Algorithm::Gwo: {
      auto cfg = oc.gwo;
      cfg.seed = seed;
      run = opt::gwo_optimize(fitness, space, cfg);
      name = "gwo";
      break;
    }
    case Algorithm::Wpa: {
      auto cfg = oc.wpa;
      cfg.seed = seed;
      run = opt::wpa_optimize(fitness, space, cfg);
      name = "wpa";
      break;
    }
  }
  Csv trace({"iteration", "best_value"});
  for (std::size_t i = 0; i < run.trace.size(); ++i) trace.row(i + 1, run.trace[i]);
  json best = json::array();
  for (int d = 0; d < run.best_position.size(); ++d) best.push_back(run.best_position[d]);
  json j{{"schema_version", kSchemaVersion},
         {"algorithm", name},
         {"function", oc.function == Benchmark::Sphere ? "sphere" : "rastrigin"},
         {"dim", oc.dim},
         {"best_value", run.best_value},
         {"best_position", best},
         {"iterations_used", run.iterations_used},
         {"evaluations", run.evaluations}};
  return {{"optimizer_trace", trace.str()}, {"optimizer_summary", j.dump(2) + "\n"}};
}

inline std::vector<Artifact> run_formation(const ScenarioConfig& c) {
  const FormationConfig& f = require_section(c.formation, "formation");
  formation::FormationScenario sc;
  sc.roles = f.roles;
  sc.leader_velocity = f.leader_velocity;
  sc.leader_start.heading = f.leader_heading;
  sc.gains = f.gains;
  sc.dt = c.dt;
  sc.duration = c.duration;
  for (const auto& u : c.uavs) {
    if (u.id == f.roles.root) {
      sc.leader_start.position = u.initial.position;
      sc.params = u.params;
    }
  }
  for (const auto& e : f.roles.edges)
    for (const auto& u : c.uavs)
      if (u.id == e.follower) {
        sc.followers[u.id] = u.initial;
        sc.params = u.params;
      }
  const auto res = formation::simulate_formation(sc, c.record_every);
  Csv csv({"time", "uav", "x", "y", "z", "heading"});
  for (const auto& tick : res.ticks)
    for (const auto& [id, p] : tick.poses)
      csv.row(tick.time, id, p.position.x(), p.position.y(), p.position.z(), p.heading);
  json err = json::object();
  for (const auto& [id, e] : res.final_error) err[std::to_string(id)] = e;
  json j{{"schema_version", kSchemaVersion},
         {"final_leader_position", vec_json(res.final_leader.position)},
         {"final_error_m", err}};
  return {{"formation_trace", csv.str()}, {"formation_summary", j.dump(2) + "\n"}};
}

inline std::vector<Artifact> run_channel(const ScenarioConfig& c, const RunOptions& o) {
  const ChannelConfig& ch = require_section(c.channel, "channel");
  std::vector<Artifact> out;

  Csv sweep({"distance_m", "friis_dbm", "two_ray_dbm"});
  for (double d : budget::log_space(ch.sweep_min, ch.sweep_max, ch.sweep_points)) {
    channel::LinkParams l = ch.link;
    l.distance = d;
    sweep.row(d, channel::watts_to_dbm(channel::friis_received_power(l)),
              channel::watts_to_dbm(channel::two_ray_received_power(l)));
  }
  out.push_back({"channel_sweep", sweep.str()});
  if (o.sweep_only) return out;

  const std::uint64_t seed = module_seed(c, o, "channel");
  struct Kind {
    const char* name;
    channel::FadingKind kind;
  };
  const Kind kinds[] = {{"awgn", channel::FadingKind::Awgn},
                        {"rician", channel::FadingKind::Rician},
                        {"rayleigh", channel::FadingKind::Rayleigh}};

  Csv cons({"channel", "symbol", "tx_i", "tx_q", "rx_i", "rx_q"});
  Rng bit_rng(derive_seed(seed, "constellation_bits"));
  std::vector<std::uint8_t> bits(2 * ch.constellation_symbols);
  for (auto& b : bits) b = static_cast<std::uint8_t>(bit_rng.next_u64() >> 63);
  const auto tx = channel::qpsk_modulate(bits);
  for (const auto& k : kinds) {
    channel::FadingParams f = ch.fading;
    f.kind = k.kind;
    f.seed = derive_seed(seed, "constellation", static_cast<std::uint64_t>(k.kind));
    const auto rx = channel::apply_channel(tx, f, ch.constellation_ebn0_db, channel::Receiver::Raw);
    for (std::size_t i = 0; i < tx.size(); ++i)
      cons.row(std::string(k.name), i, tx[i].real(), tx[i].imag(), rx[i].real(), rx[i].imag());
  }
  out.push_back({"channel_constellation", cons.str()});

  Csv ber({"ebn0_db", "awgn_theory", "rayleigh_theory", "awgn", "rician", "rayleigh", "n_bits"});
  channel::MonteCarloOptions mc;
  mc.workers = o.workers;
  for (std::size_t i = 0; i < ch.ebn0_db.size(); ++i) {
    const double e = ch.ebn0_db[i];
    double sim[3];
    for (const auto& k : kinds) {
      channel::FadingParams f = ch.fading;
      f.kind = k.kind;
      sim[static_cast<int>(k.kind)] =
          channel::ber_monte_carlo(f, e, ch.n_bits,
                                   derive_seed(seed, k.name, i), mc)
              .ber;
    }
    ber.row(e, channel::ber_qpsk_awgn_theoretical(e), channel::ber_qpsk_rayleigh_theoretical(e),
            sim[0], sim[1], sim[2], ch.n_bits);
  }
  out.push_back({"channel_ber", ber.str()});
  return out;
}

/// Human-readable budget report; one "Label value unit" per line.
inline std::string budget_report(const budget::LinkBudget& b) {
  std::ostringstream os;
  char line[160];
  auto put = [&](const char* label, double v, const char* unit) {
    std::snprintf(line, sizeof line, "%s %.3f %s\n", label, v, unit);
    os << line;
  };
  os << "Link Budget ("
     << (b.mode == budget::BudgetMode::PaperLiteral ? "paper-literal" : "corrected-sum")
     << " mode)\n\n";
  auto items = [&](const char* title, const std::vector<budget::BudgetLineItem>& v) {
    os << title << "\n";
    for (const auto& it : v) {
      std::snprintf(line, sizeof line, "  %s %.3f dB\n", it.label.c_str(), it.value_db);
      os << line;
    }
  };
  items("Transmitter", b.tx_items);
  items("Channel", b.loss_items);
  items("Receiver", b.rx_items);
  os << "\n";
  put("EIRP", b.eirp_db, "dB");
  put("Total Path Loss", b.total_path_loss_db, "dB");
  put("Total Rx Gain", b.total_rx_gain_db, "dB");
  put("RSL", b.rsl_db, "dB");
  put("Rx Threshold", b.rx_threshold_db, "dB");
  put("Link Margin", b.link_margin_db, "dB");
  put("Interference Margin", b.interference_margin_db, "dB");
  put("Noise Figure", b.noise_figure_db, "dB");
  put("Total Noise Power", b.noise_power_dbm, "dBm");
  put("SNR", b.snr_db, "dB");
  os << "\nDerived\n";
  put("  Wavelength", b.derived.wavelength_high, "m");
  put("  Free-Space Path Loss", b.derived.path_loss_db, "dB");
  put("  Reflection Coefficient", b.derived.reflection_coefficient, "");
  put("  Incident Power", b.derived.incident_power_w, "W");
  put("  Output Impedance", b.derived.output_impedance_ohm, "ohm");
  put("  Noise Factor", b.derived.noise_figure_linear, "");
  put("  Noise Figure (20 log10)", b.derived.noise_figure_db_20log, "dB");
  put("  Noise Figure (10 log10)", b.derived.noise_figure_db_corrected, "dB");
  os << "\nDiscrepancies (" << b.discrepancies.size() << ")\n";
  for (const auto& d : b.discrepancies) {
    std::snprintf(line, sizeof line, "  %s: printed %.3f, computed %.3f (%s)\n",
                  d.quantity.c_str(), d.printed, d.computed, d.note.c_str());
    os << line;
  }
  return os.str();
}

inline json budget_json(const budget::LinkBudget& b) {
  json d = json::array();
  for (const auto& x : b.discrepancies)
    d.push_back({{"quantity", x.quantity}, {"printed", x.printed}, {"computed", x.computed},
                 {"delta", x.delta()}, {"note", x.note}});
  return {{"schema_version", kSchemaVersion},
          {"mode", b.mode == budget::BudgetMode::PaperLiteral ? "paper" : "corrected"},
          {"eirp_db", b.eirp_db},
          {"total_path_loss_db", b.total_path_loss_db},
          {"total_rx_gain_db", b.total_rx_gain_db},
          {"rsl_db", b.rsl_db},
          {"rx_threshold_db", b.rx_threshold_db},
          {"link_margin_db", b.link_margin_db},
          {"interference_margin_db", b.interference_margin_db},
          {"noise_figure_db", b.noise_figure_db},
          {"noise_bandwidth_hz", b.noise_bandwidth_hz},
          {"noise_power_dbm", b.noise_power_dbm},
          {"snr_db", b.snr_db},
          {"derived",
           {{"wavelength_low_m", b.derived.wavelength_low},
            {"wavelength_high_m", b.derived.wavelength_high},
            {"path_loss_db", b.derived.path_loss_db},
            {"reflection_coefficient", b.derived.reflection_coefficient},
            {"incident_power_w", b.derived.incident_power_w},
            {"output_impedance_ohm", b.derived.output_impedance_ohm},
            {"noise_factor", b.derived.noise_figure_linear},
            {"noise_figure_db_20log", b.derived.noise_figure_db_20log},
            {"noise_figure_db_10log", b.derived.noise_figure_db_corrected}}},
          {"discrepancies", d}};
}

inline std::vector<Artifact> run_budget(const ScenarioConfig& c, const RunOptions& o) {
  const BudgetConfig& bc = require_section(c.budget, "budget");
  const auto b = budget::compute_budget(bc.antenna, bc.items, o.mode.value_or(bc.mode));
  return {{"budget_report", budget_report(b)}, {"budget_json", budget_json(b).dump(2) + "\n"}};
}

inline std::vector<Artifact> run_berdist(const ScenarioConfig& c) {
  const BerDistConfig& bd = require_section(c.berdist, "berdist");
  const auto& sc = bd.scenario;
  const auto pts = budget::ber_vs_distance(
      sc.link, sc.data_rate, sc.noise_power_dbm,
      budget::log_space(sc.min_distance, sc.max_distance, sc.points), bd.formula,
      bd.noise_bandwidth_hz);
  Csv csv({"distance_m", "pr_dbm", "ebn0_db", "ber"});
  for (const auto& p : pts) csv.row(p.distance_m, p.pr_dbm, p.ebn0_db, p.ber);
  return {{"berdist_curve", csv.str()}};
}

inline const char* kind_name(network::TopologyKind k) {
  switch (k) {
    case network::TopologyKind::Star: return "star";
    case network::TopologyKind::MultiStar: return "multi_star";
    case network::TopologyKind::SingleGroupAdHoc: return "single_group";
    case network::TopologyKind::MultiGroupAdHoc: return "multi_group";
    case network::TopologyKind::MultiLayerAdHoc: return "multi_layer";
  }
  return "?";
}

inline const char* outcome_name(network::ApfOutcome o) {
  switch (o) {
    case network::ApfOutcome::ReachedGoal: return "reached_goal";
    case network::ApfOutcome::LocalMinimum: return "local_minimum";
    case network::ApfOutcome::StepLimit: return "step_limit";
  }
  return "?";
}

inline std::vector<Artifact> run_network(const ScenarioConfig& c, const RunOptions& o) {
  const NetworkConfig& n = require_section(c.network, "network");
  std::vector<Vec3> positions;
  if (n.positions) {
    positions = *n.positions;
  } else {
    Rng rng(module_seed(c, o, "network"));
    positions.push_back(Vec3::Zero());
    for (int i = 0; i < n.n_uavs; ++i) {
      Vec3 p;
      for (int d = 0; d < 3; ++d) p[d] = rng.uniform(-n.area_half_width, n.area_half_width);
      positions.push_back(p);
    }
  }
  auto g = network::build_topology(n.kind, n.n_uavs, n.n_groups, n.link_range, positions);

  json nodes = json::array(), links = json::array();
  for (const auto& v : g.nodes)
    nodes.push_back({{"id", v.id},
                     {"role", v.role == network::NodeRole::GroundStation ? "ground_station"
                              : v.role == network::NodeRole::MasterUav   ? "master"
                                                                         : "slave"},
                     {"group", v.group},
                     {"position", vec_json(v.position)}});
  for (const auto& l : g.links) links.push_back({{"a", l.a}, {"b", l.b}, {"cost", l.cost}});

  const auto cmp = network::compare_propagation(g, n.src, n.dst, n.per_hop_delay_s);
  const auto ttl_flood = network::flood(g, n.src, n.ttl);
  json report{{"schema_version", kSchemaVersion},
              {"topology",
               {{"kind", kind_name(g.kind)},
                {"nodes", nodes},
                {"links", links},
                {"violations", network::check_topology(g)}}},
              {"comparison",
               {{"src", n.src},
                {"dst", n.dst},
                {"routing",
                 {{"reached", cmp.routing.reached},
                  {"hops", cmp.routing.hops},
                  {"messages", cmp.routing.messages},
                  {"cost", cmp.routing.cost},
                  {"latency_s", cmp.routing.latency_s},
                  {"path", cmp.routing.path}}},
                {"flooding",
                 {{"reached", cmp.flooding.reached},
                  {"depth_to_dst", cmp.flooding.depth_to_dst},
                  {"total_messages", cmp.flooding.total_messages},
                  {"delivered", cmp.flooding.delivered},
                  {"latency_s", cmp.flooding.latency_s}}},
                {"flood_with_ttl",
                 {{"ttl", n.ttl},
                  {"delivered", ttl_flood.delivered},
                  {"total_messages", ttl_flood.total_messages},
                  {"max_depth", ttl_flood.hop_count}}}}}};

  // Single point of failure: cut the first hop of the route and compare.
  if (cmp.routing.reached && cmp.routing.path.size() >= 2) {
    auto cut = g;
    const int a = cmp.routing.path[0], b = cmp.routing.path[1];
    cut.remove_link(a, b);
    const auto rerouted = network::route_shortest(cut, n.src, n.dst);
    const auto reflood = network::flood(cut, n.src, cut.size());
    report["spof"] = {{"removed_link", {a, b}},
                      {"stale_route_valid", network::path_is_valid(cut, cmp.routing.path)},
                      {"recomputed_route_reached", rerouted.reached},
                      {"flooding_reached", reflood.depth[n.dst] >= 0}};
  }

  std::vector<Artifact> out;
  if (n.apf) {
    const auto r = network::apf_plan(n.apf->start, n.apf->field, n.apf->params);
    Csv csv({"step", "x", "y", "z", "potential"});
    for (std::size_t i = 0; i < r.trajectory.size(); ++i) {
      const auto& s = r.trajectory[i];
      csv.row(i, s.position.x(), s.position.y(), s.position.z(), s.potential);
    }
    report["apf"] = {{"outcome", outcome_name(r.outcome)},
                     {"steps", r.trajectory.size() - 1},
                     {"min_clearance", r.min_clearance},
                     {"final_position", vec_json(r.trajectory.back().position)}};
    out.push_back({"apf_trajectory", csv.str()});
  }
  out.insert(out.begin(), {"network_report", report.dump(2) + "\n"});
  return out;
}

inline const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> v{"dynamics", "wind",   "optimize", "formation", "channel",
                                          "budget",   "berdist", "network"};
  return v;
}

inline std::vector<Artifact> run(const std::string& sub, const ScenarioConfig& c,
                                 const RunOptions& o = {}) {
  if (sub == "dynamics") return run_dynamics(c);
  if (sub == "wind") return run_wind(c, o);
  if (sub == "optimize") return run_optimize(c, o);
  if (sub == "formation") return run_formation(c);
  if (sub == "channel") return run_channel(c, o);
  if (sub == "budget") return run_budget(c, o);
  if (sub == "berdist") return run_berdist(c);
  if (sub == "network") return run_network(c, o);
  throw ConfigError("unknown subcommand '" + sub + "'");
}

/// File name for an artifact: the `outputs` override if present, else the default.
inline std::string output_path(const ScenarioConfig& c, const std::string& what) {
  for (const auto& o : c.outputs)
    if (o.what == what) return o.path;
  const ArtifactInfo* info = find_artifact(what);
  return info ? std::string(info->file) : what;
}

}  // namespace swarmlink::scenario
