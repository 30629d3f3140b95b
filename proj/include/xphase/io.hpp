#pragma once

// Output formats. Numbers go out as %.17g in CSV and text, and in the JSON
// library's shortest round-trip form in JSON.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "checks.hpp"
#include "config.hpp"
#include "ensemble.hpp"

namespace xphase::io {

inline std::string num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string num(const std::optional<double>& v) { return v ? num(*v) : ""; }

inline Json opt(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

/// JSON has no NaN; undefined values become null.
inline Json finite_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

inline void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw usage_error("cannot write output file '" + path.string() + "'");
  out << content;
  if (!out) throw usage_error("failed writing output file '" + path.string() + "'");
}

inline std::string dump(const Json& j) { return j.dump(2) + "\n"; }

/// Columns padded to their widest cell, right-aligned, two spaces apart.
class TextTable {
 public:
  explicit TextTable(std::vector<std::string> headers) : rows_{std::move(headers)} {}
  void add(std::vector<std::string> row) { rows_.push_back(std::move(row)); }

  std::string render() const {
    std::vector<std::size_t> w(rows_.front().size(), 0);
    for (const auto& r : rows_)
      for (std::size_t i = 0; i < r.size() && i < w.size(); ++i) w[i] = std::max(w[i], r[i].size());
    std::ostringstream out;
    for (const auto& r : rows_) {
      for (std::size_t i = 0; i < w.size(); ++i) {
        const std::string cell = i < r.size() ? r[i] : "";
        if (i) out << "  ";
        out << std::string(w[i] - cell.size(), ' ') << cell;
      }
      out << "\n";
    }
    return out.str();
  }

 private:
  std::vector<std::vector<std::string>> rows_;
};

inline std::string trajectory_csv(const Trajectory& t) {
  std::ostringstream out;
  out << "t,x,y,p,q,generator,constraint\n";
  for (std::size_t i = 0; i < t.size(); ++i) {
    const auto& X = t.points[i];
    out << num(t.times[i]) << ',' << num(X.x) << ',' << num(X.y) << ',' << num(X.p) << ','
        << num(X.q) << ',' << num(t.generator_log[i]) << ',' << num(t.constraint_log[i]) << '\n';
  }
  return out.str();
}

inline Json events_json(const Trajectory& t) {
  Json ev = Json::array();
  for (const auto& e : t.events)
    ev.push_back({{"kind", to_string(e.kind)},
                  {"t", e.time},
                  {"x", e.point.x},
                  {"direction", e.direction}});
  return {{"events", ev}, {"termination", to_string(t.termination)}};
}

inline std::string ensemble_csv(const std::vector<WeightedSample>& s) {
  std::ostringstream out;
  out << "x,p,weight\n";
  for (const auto& v : s) out << num(v.x) << ',' << num(v.p) << ',' << num(v.weight) << '\n';
  return out.str();
}

inline Json moments_json(const MomentSummary& m) {
  return {{"mean_x", m.mean_x}, {"mean_p", m.mean_p}, {"cov_xx", m.cov_xx},
          {"cov_xp", m.cov_xp}, {"cov_pp", m.cov_pp}};
}

inline Json grid_json(const Grid1D& g) {
  return {{"x_min", g.x_min}, {"x_max", g.x_max}, {"n", g.n}, {"hard_walls", g.hard_walls}};
}

inline Json spectrum_json(const SpectrumResult& r) {
  return {{"energies", r.energies}, {"hbar", r.hbar}, {"mass", r.mass}, {"grid", grid_json(r.grid)}};
}

inline std::string wavefunctions_csv(const SpectrumResult& r) {
  std::ostringstream out;
  out << "x";
  for (std::size_t k = 0; k < r.levels(); ++k) out << ",psi" << k;
  out << '\n';
  for (std::size_t i = 0; i < r.grid.n; ++i) {
    out << num(r.grid.at(i));
    for (std::size_t k = 0; k < r.levels(); ++k) out << ',' << num(r.wavefunctions[k][i]);
    out << '\n';
  }
  return out.str();
}

inline std::string sweep_csv(const std::vector<UncertaintySweepRow>& rows) {
  std::ostringstream out;
  out << "delta_E,delta_t,product\n";
  for (const auto& r : rows)
    out << num(r.delta_E) << ',' << num(r.delta_t) << ',' << num(r.product) << '\n';
  return out.str();
}

inline Json sweep_json(const std::vector<UncertaintySweepRow>& rows, const SweepBlock& s) {
  Json arr = Json::array();
  for (const auto& r : rows)
    arr.push_back({{"delta_E", r.delta_E},
                   {"delta_t", opt(r.delta_t)},
                   {"product", opt(r.product)},
                   {"crossings", r.crossings},
                   {"termination", to_string(r.termination)}});
  return {{"E_r", s.E_r},
          {"x0", s.x0},
          {"t_end", s.t_end},
          {"convention", to_string(s.convention)},
          {"rows", arr},
          {"constancy_factor", opt(constancy_factor(rows))}};
}

inline std::string sweep_text(const std::vector<UncertaintySweepRow>& rows) {
  TextTable t({"delta_E", "delta_t", "product", "crossings", "termination"});
  for (const auto& r : rows)
    t.add({num(r.delta_E), r.delta_t ? num(*r.delta_t) : "-", r.product ? num(*r.product) : "-",
           std::to_string(r.crossings), std::string(to_string(r.termination))});
  const auto f = constancy_factor(rows);
  return t.render() + "constancy factor max/min: " + (f ? num(*f) : "-") + "\n";
}

inline std::string limit_csv(const std::vector<LimitRow>& rows) {
  std::ostringstream out;
  out << "hbar,deviation\n";
  for (const auto& r : rows) out << num(r.hbar) << ',' << num(r.deviation) << '\n';
  return out.str();
}

inline Json limit_json(const std::vector<LimitRow>& rows) {
  Json arr = Json::array();
  for (const auto& r : rows)
    arr.push_back({{"hbar", r.hbar},
                   {"deviation", finite_or_null(r.deviation)},
                   {"termination", to_string(r.termination)}});
  bool monotone = true;
  for (std::size_t i = 1; i < rows.size(); ++i)
    monotone = monotone && rows[i].deviation < rows[i - 1].deviation;
  return {{"rows", arr}, {"strictly_decreasing", monotone}, {"fitted_order", opt(fitted_order(rows))}};
}

inline std::string limit_text(const std::vector<LimitRow>& rows) {
  TextTable t({"hbar", "deviation", "termination"});
  for (const auto& r : rows)
    t.add({num(r.hbar), num(r.deviation), std::string(to_string(r.termination))});
  const auto o = fitted_order(rows);
  return t.render() + "fitted order: " + (o ? num(*o) : "-") + "\n";
}

inline Json dwell_json(const DwellSummary& d) {
  return {{"time_left", d.time_left},
          {"time_right", d.time_right},
          {"excursion_time", d.excursion_time},
          {"flips", d.flips},
          {"ratio", d.ratio_defined ? Json(d.ratio) : Json(nullptr)},
          {"termination", to_string(d.termination)}};
}

inline std::string dwell_text(const DwellSummary& d) {
  TextTable t({"left", "right", "excursion", "flips", "ratio", "termination"});
  t.add({num(d.time_left), num(d.time_right), num(d.excursion_time), std::to_string(d.flips),
         d.ratio_defined ? num(d.ratio) : "-", std::string(to_string(d.termination))});
  return t.render();
}

inline Json ellipse_json(const EllipseCheck& e) {
  const auto& f = e.fit;
  return {{"A", f.A},
          {"B", f.B},
          {"alpha1", f.alpha1},
          {"alpha2", f.alpha2},
          {"omega", f.omega},
          {"residual_rms", f.residual_rms},
          {"fitted_constraint", f.constraint()},
          {"logged_constraint", e.logged_constraint},
          {"constraint_mismatch", e.constraint_mismatch}};
}

inline std::string ellipse_text(const EllipseCheck& e) {
  TextTable t({"A", "alpha1", "B", "alpha2", "rms", "kABcos", "logged"});
  const auto& f = e.fit;
  t.add({num(f.A), num(f.alpha1), num(f.B), num(f.alpha2), num(f.residual_rms),
         num(f.constraint()), num(e.logged_constraint)});
  return t.render();
}

inline Json compare_json(const ComparisonReport& r) {
  Json arr = Json::array();
  for (const auto& row : r.rows) {
    Json d = dwell_json(row.dwell);
    d["delta_E"] = row.delta_E;
    arr.push_back(d);
  }
  return {{"hbar", r.hbar},
          {"level", r.level},
          {"E_level", r.E_level},
          {"convention", to_string(r.convention)},
          {"quantum_left", r.quantum_left},
          {"quantum_right", r.quantum_right},
          {"rows", arr},
          {"extrapolated_ratio", opt(r.extrapolated_ratio)}};
}

inline std::string compare_text(const ComparisonReport& r) {
  TextTable t({"delta_E", "left", "right", "excursion", "flips", "ratio"});
  for (const auto& row : r.rows) {
    const auto& d = row.dwell;
    t.add({num(row.delta_E), num(d.time_left), num(d.time_right), num(d.excursion_time),
           std::to_string(d.flips), d.ratio_defined ? num(d.ratio) : "insufficient flips"});
  }
  std::ostringstream out;
  out << t.render() << "extrapolated ratio (dE -> 0): "
      << (r.extrapolated_ratio ? num(*r.extrapolated_ratio) : "-") << "\n"
      << "quantum (" << to_string(r.convention) << ", level " << r.level
      << ", E = " << num(r.E_level) << "): left " << num(r.quantum_left) << ", right "
      << num(r.quantum_right) << ", ratio " << num(r.quantum_left / r.quantum_right) << "\n";
  return out.str();
}

inline Json identity_json(const IdentityBattery& b) {
  return {{"points", b.points},          {"bracket_mfqm", b.bracket_mfqm},
          {"bracket_ccm", b.bracket_ccm}, {"gamma", b.gamma},
          {"lambda", b.lambda},           {"complexification", b.complexification},
          {"gradient_rel_error", b.gradient}};
}

inline std::string identity_text(const IdentityBattery& b) {
  TextTable t({"check", "max residual"});
  t.add({"{H-,H+}", num(b.bracket_mfqm)});
  t.add({"{H_I,H_R}", num(b.bracket_ccm)});
  t.add({"Gamma", num(b.gamma)});
  t.add({"Lambda", num(b.lambda)});
  t.add({"complexification", num(b.complexification)});
  t.add({"gradient vs FD", num(b.gradient)});
  return t.render();
}

}  // namespace xphase::io
