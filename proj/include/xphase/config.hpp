#pragma once

// Experiment configuration: one JSON document, every field optional.
// Parsing is strict; keys the schema does not know are rejected by path.

#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "analysis.hpp"

namespace xphase {

using Json = nlohmann::ordered_json;

struct PotentialSpec {
  PotentialKind kind = PotentialKind::DoubleWell;
  /// Used when kind is custom: V(x) = sum c_k x^k.
  std::vector<double> coefficients;
  double stiffness = 1.0;  // harmonic, inverted_harmonic
  double barrier = 1.0;    // double_well E0
  double well = 1.0;       // double_well minima at +-well

  Potential build() const {
    switch (kind) {
      case PotentialKind::Harmonic: return Potential::harmonic(stiffness);
      case PotentialKind::InvertedHarmonic: return Potential::inverted_harmonic(stiffness);
      case PotentialKind::DoubleWell: return Potential::double_well(barrier, well);
      case PotentialKind::Custom: return Potential(coefficients);
    }
    return Potential(coefficients);
  }
  friend bool operator==(const PotentialSpec&, const PotentialSpec&) = default;
};

enum class StartKind { Point, CcmEnergy, MfqmEnergy };

inline std::string_view to_string(StartKind s) {
  switch (s) {
    case StartKind::Point: return "point";
    case StartKind::CcmEnergy: return "ccm_energy";
    case StartKind::MfqmEnergy: return "mfqm_energy";
  }
  return "point";
}

struct SimulateBlock {
  StartKind start = StartKind::Point;
  PhasePoint point{1.0, 0.0, 0.0, 0.0};
  /// ccm_energy: E_r, delta_E, x0. mfqm_energy: E (= H+), delta_E, x0 used for both chord ends.
  double energy = 0.3;
  double delta_E = 0.1;
  double x0 = 1.0;
  double t_end = 20.0;
  friend bool operator==(const SimulateBlock&, const SimulateBlock&) = default;
};

struct SweepBlock {
  double E_r = 0.3;
  double x0 = 1.0;
  std::vector<double> delta_E{0.2, 0.1, 0.05, 0.02};
  double t_end = 300.0;
  IntervalConvention convention = IntervalConvention::FirstPassage;
  friend bool operator==(const SweepBlock&, const SweepBlock&) = default;
};

struct LimitBlock {
  std::vector<double> hbar{0.4, 0.2, 0.1, 0.05};
  double x0 = 1.2, ybar0 = 0.25, p0 = 0.0, qbar0 = 0.25;
  double t_end = 10.0;
  std::size_t samples = 200;
  friend bool operator==(const LimitBlock&, const LimitBlock&) = default;
};

struct DwellBlock {
  double E_r = 0.3;
  double delta_E = 0.1;
  double x0 = 1.0;
  double t_end = 45.0;
  double x_split = 0.0;
  double x_well_max = 2.0;
  friend bool operator==(const DwellBlock&, const DwellBlock&) = default;
};

struct EllipseBlock {
  double x0 = 1.0, y0 = 0.5, vx0 = 0.0, vy0 = 0.0;
  double periods = 10.0;
  friend bool operator==(const EllipseBlock&, const EllipseBlock&) = default;
};

struct SpectrumBlock {
  Grid1D grid{};
  std::size_t levels = 4;
  bool wavefunctions = false;
  friend bool operator==(const SpectrumBlock&, const SpectrumBlock&) = default;
};

struct CompareBlock {
  std::size_t level = 0;
  StateConvention convention = StateConvention::Eigenstate;
  std::vector<double> delta_E{0.2, 0.1, 0.05, 0.02};
  double x0 = 1.0;
  double t_end = 300.0;
  friend bool operator==(const CompareBlock&, const CompareBlock&) = default;
};

struct EnsembleBlock {
  double x0 = -3.0, p0 = 0.0;
  double sigma_x = 0.70710678118654752, sigma_p = 0.70710678118654752;
  std::size_t samples = 100000;
  double t = 0.0;
  friend bool operator==(const EnsembleBlock&, const EnsembleBlock&) = default;
};

struct IdentityBlock {
  std::size_t points = 1000;
  double radius = 2.0;  // coordinates drawn uniformly from [-radius, radius]
  friend bool operator==(const IdentityBlock&, const IdentityBlock&) = default;
};

struct ExperimentConfig {
  PotentialSpec potential;
  Flavor flavor = Flavor::CCM;
  double mass = 1.0;
  double hbar = 0.1;
  std::uint64_t seed = 2024;
  IntegratorConfig integrator = default_integrator();
  SimulateBlock simulate;
  SweepBlock sweep;
  LimitBlock limit;
  DwellBlock dwell;
  EllipseBlock ellipse;
  SpectrumBlock spectrum;
  CompareBlock compare;
  EnsembleBlock ensemble;
  IdentityBlock identity;

  /// Library defaults with rel_tol 1e-12, abs_tol 1e-14.
  static IntegratorConfig default_integrator() {
    IntegratorConfig c;
    c.rel_tol = 1e-12;
    c.abs_tol = 1e-14;
    return c;
  }

  ExtendedSystem system() const { return {potential.build(), flavor, mass, hbar}; }
  ExtendedSystem system(Flavor f) const { return {potential.build(), f, mass, hbar}; }
};

inline bool same_integrator(const IntegratorConfig& a, const IntegratorConfig& b) {
  return a.rel_tol == b.rel_tol && a.abs_tol == b.abs_tol && a.max_step == b.max_step &&
         a.min_step == b.min_step && a.escape_radius == b.escape_radius &&
         a.method == b.method && a.crossing_x == b.crossing_x &&
         a.record_stride == b.record_stride;
}

inline bool operator==(const ExperimentConfig& a, const ExperimentConfig& b) {
  return a.potential == b.potential && a.flavor == b.flavor && a.mass == b.mass &&
         a.hbar == b.hbar && a.seed == b.seed && same_integrator(a.integrator, b.integrator) &&
         a.simulate == b.simulate && a.sweep == b.sweep && a.limit == b.limit &&
         a.dwell == b.dwell && a.ellipse == b.ellipse && a.spectrum == b.spectrum &&
         a.compare == b.compare && a.ensemble == b.ensemble && a.identity == b.identity;
}

namespace detail {

// Reads the fields of one JSON object, remembering which keys were consumed
// so leftovers can be reported.
class ObjectReader {
 public:
  ObjectReader(const Json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j.is_object()) throw usage_error("config field '" + where() + "' must be an object");
  }

  std::string field(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

  const Json* find(const std::string& key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  void number(const std::string& key, double& out) {
    if (const Json* v = find(key)) {
      if (!v->is_number()) throw usage_error("config field '" + field(key) + "' must be a number");
      out = v->get<double>();
    }
  }

  template <typename U>
  void count(const std::string& key, U& out) {
    if (const Json* v = find(key)) {
      if (!v->is_number_unsigned() && !(v->is_number_integer() && v->get<long long>() >= 0))
        throw usage_error("config field '" + field(key) + "' must be a non-negative integer");
      out = static_cast<U>(v->get<unsigned long long>());
    }
  }

  void boolean(const std::string& key, bool& out) {
    if (const Json* v = find(key)) {
      if (!v->is_boolean()) throw usage_error("config field '" + field(key) + "' must be true or false");
      out = v->get<bool>();
    }
  }

  void numbers(const std::string& key, std::vector<double>& out) {
    if (const Json* v = find(key)) {
      if (!v->is_array()) throw usage_error("config field '" + field(key) + "' must be an array");
      out.clear();
      for (const auto& e : *v) {
        if (!e.is_number())
          throw usage_error("config field '" + field(key) + "' must contain only numbers");
        out.push_back(e.get<double>());
      }
    }
  }

  template <typename E>
  void choice(const std::string& key, E& out, std::initializer_list<E> options) {
    if (const Json* v = find(key)) {
      std::string names;
      for (E o : options) {
        if (v->is_string() && v->get<std::string>() == to_string(o)) {
          out = o;
          return;
        }
        names += (names.empty() ? "" : ", ") + std::string(to_string(o));
      }
      throw usage_error("config field '" + field(key) + "' must be one of: " + names);
    }
  }

  ObjectReader child(const std::string& key) {
    static const Json empty = Json::object();
    const Json* v = find(key);
    return ObjectReader(v ? *v : empty, field(key));
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key())) throw usage_error("unknown config key '" + field(it.key()) + "'");
  }

 private:
  std::string where() const { return path_.empty() ? "<root>" : path_; }
  const Json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

}  // namespace detail

inline ExperimentConfig config_from_json(const Json& j) {
  ExperimentConfig c;
  detail::ObjectReader r(j, "");
  {
    auto s = r.child("potential");
    s.choice("kind", c.potential.kind,
             {PotentialKind::Harmonic, PotentialKind::InvertedHarmonic, PotentialKind::DoubleWell,
              PotentialKind::Custom});
    s.numbers("coefficients", c.potential.coefficients);
    s.number("stiffness", c.potential.stiffness);
    s.number("barrier", c.potential.barrier);
    s.number("well", c.potential.well);
    s.finish();
  }
  r.choice("flavor", c.flavor, {Flavor::MFQM, Flavor::CCM, Flavor::ClassicalReal});
  r.number("mass", c.mass);
  r.number("hbar", c.hbar);
  r.count("seed", c.seed);
  {
    auto s = r.child("integrator");
    auto& g = c.integrator;
    s.number("rel_tol", g.rel_tol);
    s.number("abs_tol", g.abs_tol);
    s.number("max_step", g.max_step);
    s.number("min_step", g.min_step);
    s.number("escape_radius", g.escape_radius);
    s.choice("method", g.method, {Method::AdaptiveRK, Method::ImplicitMidpoint});
    s.number("crossing_x", g.crossing_x);
    s.count("record_stride", g.record_stride);
    s.finish();
  }
  {
    auto s = r.child("simulate");
    auto& b = c.simulate;
    s.choice("start", b.start, {StartKind::Point, StartKind::CcmEnergy, StartKind::MfqmEnergy});
    auto pt = s.child("point");
    pt.number("x", b.point.x);
    pt.number("y", b.point.y);
    pt.number("p", b.point.p);
    pt.number("q", b.point.q);
    pt.finish();
    s.number("energy", b.energy);
    s.number("delta_E", b.delta_E);
    s.number("x0", b.x0);
    s.number("t_end", b.t_end);
    s.finish();
  }
  {
    auto s = r.child("sweep");
    auto& b = c.sweep;
    s.number("E_r", b.E_r);
    s.number("x0", b.x0);
    s.numbers("delta_E", b.delta_E);
    s.number("t_end", b.t_end);
    s.choice("convention", b.convention,
             {IntervalConvention::FirstPassage, IntervalConvention::CrossingInterval,
              IntervalConvention::FlipPeriod});
    s.finish();
  }
  {
    auto s = r.child("limit");
    auto& b = c.limit;
    s.numbers("hbar", b.hbar);
    s.number("x0", b.x0);
    s.number("ybar0", b.ybar0);
    s.number("p0", b.p0);
    s.number("qbar0", b.qbar0);
    s.number("t_end", b.t_end);
    s.count("samples", b.samples);
    s.finish();
  }
  {
    auto s = r.child("dwell");
    auto& b = c.dwell;
    s.number("E_r", b.E_r);
    s.number("delta_E", b.delta_E);
    s.number("x0", b.x0);
    s.number("t_end", b.t_end);
    s.number("x_split", b.x_split);
    s.number("x_well_max", b.x_well_max);
    s.finish();
  }
  {
    auto s = r.child("ellipse");
    auto& b = c.ellipse;
    s.number("x0", b.x0);
    s.number("y0", b.y0);
    s.number("vx0", b.vx0);
    s.number("vy0", b.vy0);
    s.number("periods", b.periods);
    s.finish();
  }
  {
    auto s = r.child("spectrum");
    auto& b = c.spectrum;
    auto g = s.child("grid");
    g.number("x_min", b.grid.x_min);
    g.number("x_max", b.grid.x_max);
    g.count("n", b.grid.n);
    g.boolean("hard_walls", b.grid.hard_walls);
    g.finish();
    s.count("levels", b.levels);
    s.boolean("wavefunctions", b.wavefunctions);
    s.finish();
  }
  {
    auto s = r.child("compare");
    auto& b = c.compare;
    s.count("level", b.level);
    s.choice("convention", b.convention,
             {StateConvention::Eigenstate, StateConvention::LocalizedLeft});
    s.numbers("delta_E", b.delta_E);
    s.number("x0", b.x0);
    s.number("t_end", b.t_end);
    s.finish();
  }
  {
    auto s = r.child("ensemble");
    auto& b = c.ensemble;
    s.number("x0", b.x0);
    s.number("p0", b.p0);
    s.number("sigma_x", b.sigma_x);
    s.number("sigma_p", b.sigma_p);
    s.count("samples", b.samples);
    s.number("t", b.t);
    s.finish();
  }
  {
    auto s = r.child("identity");
    s.count("points", c.identity.points);
    s.number("radius", c.identity.radius);
    s.finish();
  }
  r.finish();
  return c;
}

inline Json config_to_json(const ExperimentConfig& c) {
  const auto& g = c.integrator;
  const auto& sm = c.simulate;
  const auto& sp = c.spectrum;
  return Json{
      {"potential",
       {{"kind", to_string(c.potential.kind)},
        {"coefficients", c.potential.coefficients},
        {"stiffness", c.potential.stiffness},
        {"barrier", c.potential.barrier},
        {"well", c.potential.well}}},
      {"flavor", to_string(c.flavor)},
      {"mass", c.mass},
      {"hbar", c.hbar},
      {"seed", c.seed},
      {"integrator",
       {{"rel_tol", g.rel_tol},
        {"abs_tol", g.abs_tol},
        {"max_step", g.max_step},
        {"min_step", g.min_step},
        {"escape_radius", g.escape_radius},
        {"method", to_string(g.method)},
        {"crossing_x", g.crossing_x},
        {"record_stride", g.record_stride}}},
      {"simulate",
       {{"start", to_string(sm.start)},
        {"point", {{"x", sm.point.x}, {"y", sm.point.y}, {"p", sm.point.p}, {"q", sm.point.q}}},
        {"energy", sm.energy},
        {"delta_E", sm.delta_E},
        {"x0", sm.x0},
        {"t_end", sm.t_end}}},
      {"sweep",
       {{"E_r", c.sweep.E_r},
        {"x0", c.sweep.x0},
        {"delta_E", c.sweep.delta_E},
        {"t_end", c.sweep.t_end},
        {"convention", to_string(c.sweep.convention)}}},
      {"limit",
       {{"hbar", c.limit.hbar},
        {"x0", c.limit.x0},
        {"ybar0", c.limit.ybar0},
        {"p0", c.limit.p0},
        {"qbar0", c.limit.qbar0},
        {"t_end", c.limit.t_end},
        {"samples", c.limit.samples}}},
      {"dwell",
       {{"E_r", c.dwell.E_r},
        {"delta_E", c.dwell.delta_E},
        {"x0", c.dwell.x0},
        {"t_end", c.dwell.t_end},
        {"x_split", c.dwell.x_split},
        {"x_well_max", c.dwell.x_well_max}}},
      {"ellipse",
       {{"x0", c.ellipse.x0},
        {"y0", c.ellipse.y0},
        {"vx0", c.ellipse.vx0},
        {"vy0", c.ellipse.vy0},
        {"periods", c.ellipse.periods}}},
      {"spectrum",
       {{"grid",
         {{"x_min", sp.grid.x_min},
          {"x_max", sp.grid.x_max},
          {"n", sp.grid.n},
          {"hard_walls", sp.grid.hard_walls}}},
        {"levels", sp.levels},
        {"wavefunctions", sp.wavefunctions}}},
      {"compare",
       {{"level", c.compare.level},
        {"convention", to_string(c.compare.convention)},
        {"delta_E", c.compare.delta_E},
        {"x0", c.compare.x0},
        {"t_end", c.compare.t_end}}},
      {"ensemble",
       {{"x0", c.ensemble.x0},
        {"p0", c.ensemble.p0},
        {"sigma_x", c.ensemble.sigma_x},
        {"sigma_p", c.ensemble.sigma_p},
        {"samples", c.ensemble.samples},
        {"t", c.ensemble.t}}},
      {"identity", {{"points", c.identity.points}, {"radius", c.identity.radius}}},
  };
}

/// Parses text as JSON; a parse failure is a usage error.
inline Json parse_json_text(const std::string& text, const std::string& origin) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw usage_error(origin + ": invalid JSON: " + e.what());
  }
}

/// Applies `a.b.c=value` to j. The value is read as JSON when it parses
/// (numbers, arrays, true/false), otherwise taken as a bare string.
inline void apply_override(Json& j, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0)
    throw usage_error("--set expects KEY=VALUE, got '" + assignment + "'");
  const std::string path = assignment.substr(0, eq), text = assignment.substr(eq + 1);
  Json value;
  try {
    value = Json::parse(text);
  } catch (const Json::parse_error&) {
    value = text;
  }
  Json* node = &j;
  std::size_t start = 0;
  while (true) {
    const auto dot = path.find('.', start);
    const std::string key = path.substr(start, dot == std::string::npos ? dot : dot - start);
    if (key.empty()) throw usage_error("--set key '" + path + "' has an empty component");
    if (!node->is_object())
      throw usage_error("--set key '" + path + "': '" + key + "' is not inside an object");
    if (dot == std::string::npos) {
      (*node)[key] = value;
      return;
    }
    node = &(*node)[key];
    if (node->is_null()) *node = Json::object();
    start = dot + 1;
  }
}

inline ExperimentConfig load_config(const std::optional<std::string>& path,
                                    const std::vector<std::string>& overrides) {
  Json j = Json::object();
  if (path) {
    std::ifstream in(*path);
    if (!in) throw usage_error("cannot read config file '" + *path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    j = parse_json_text(buf.str(), *path);
  }
  for (const auto& o : overrides) apply_override(j, o);
  return config_from_json(j);
}

}  // namespace xphase
