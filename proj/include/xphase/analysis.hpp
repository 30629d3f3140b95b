#pragma once

// Experiments on the extended phase space: SHO ellipses, double-well
// flipping and dwell times, uncertainty sweeps, the small-hbar limit,
// rebound off the inverted oscillator, boundedness of the two flavors and
// the CCM dwell ratio against the quantum oracle.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "dynamics.hpp"
#include "errors.hpp"
#include "hamiltonians.hpp"
#include "oracle.hpp"

namespace xphase {

// ---------------------------------------------------------------- SHO ellipses

struct SHOEllipseParams {
  double A = 0.0, B = 0.0;
  double alpha1 = 0.0, alpha2 = 0.0;  // in [0, 2pi)
  double omega = 1.0;
  double stiffness = 1.0;
  double residual_rms = 0.0;

  /// k A B cos(alpha1 - alpha2), the value both H- and H_I take on the ellipse.
  double constraint() const { return stiffness * A * B * std::cos(alpha1 - alpha2); }
};

namespace detail {

inline double harmonic_stiffness(const ExtendedSystem& sys, const char* op) {
  if (sys.potential().kind() != PotentialKind::Harmonic)
    throw usage_error(std::string(op) + " requires a harmonic potential");
  return 2.0 * sys.potential().coefficients()[2];
}

inline double wrap_angle(double a) {
  const double two_pi = 2.0 * std::numbers::pi;
  a = std::fmod(a, two_pi);
  if (a < 0.0) a += two_pi;
  return a >= two_pi ? 0.0 : a;
}

}  // namespace detail

/// Least-squares fit of x(t) = A sin(wt + a1), y(t) = B sin(wt + a2) to the
/// recorded points, w = sqrt(k/m).
inline SHOEllipseParams fit_sho_ellipse(const ExtendedSystem& sys, const Trajectory& traj) {
  const double k = detail::harmonic_stiffness(sys, "fit_sho_ellipse");
  if (traj.size() < 3) throw usage_error("fit_sho_ellipse needs at least 3 recorded points");
  SHOEllipseParams out;
  out.stiffness = k;
  out.omega = std::sqrt(k / sys.mass());
  // Normal equations for c sin + s cos, shared by both coordinates.
  double ss = 0, sc = 0, cc = 0, xs = 0, xc = 0, ys = 0, yc = 0;
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const double th = out.omega * traj.times[i];
    const double s = std::sin(th), c = std::cos(th);
    ss += s * s, sc += s * c, cc += c * c;
    xs += traj.points[i].x * s, xc += traj.points[i].x * c;
    ys += traj.points[i].y * s, yc += traj.points[i].y * c;
  }
  const double det = ss * cc - sc * sc;
  if (!(std::abs(det) > 0.0)) throw numeric_error("fit_sho_ellipse: degenerate sampling");
  auto solve = [&](double bs, double bc, double& amp, double& phase) {
    const double a = (bs * cc - bc * sc) / det;  // coefficient of sin
    const double b = (bc * ss - bs * sc) / det;  // coefficient of cos
    amp = std::hypot(a, b);
    phase = amp == 0.0 ? 0.0 : detail::wrap_angle(std::atan2(b, a));
  };
  solve(xs, xc, out.A, out.alpha1);
  solve(ys, yc, out.B, out.alpha2);
  double sq = 0.0;
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const double th = out.omega * traj.times[i];
    const double dx = traj.points[i].x - out.A * std::sin(th + out.alpha1);
    const double dy = traj.points[i].y - out.B * std::sin(th + out.alpha2);
    sq += dx * dx + dy * dy;
  }
  out.residual_rms = std::sqrt(sq / (2.0 * static_cast<double>(traj.size())));
  return out;
}

/// Phase point for given positions and velocities. The flavors differ in
/// the sign of q: ydot = q/m for MFQM but -q/m for CCM.
inline PhasePoint initial_from_velocities(const ExtendedSystem& sys, double x0, double y0,
                                          double vx0, double vy0) {
  const double m = sys.mass();
  const double q = sys.flavor() == Flavor::CCM ? -m * vy0 : m * vy0;
  return {x0, y0, m * vx0, q};
}

struct EllipseCheck {
  SHOEllipseParams fit;
  double logged_constraint = 0.0;    // first entry of the constraint log
  double constraint_mismatch = 0.0;  // max |log - fitted k A B cos(a1 - a2)|
  Trajectory trajectory;
};

/// Integrates a harmonic system for the given number of periods and checks
/// the logged constraint against the ellipse formula.
inline EllipseCheck ellipse_check(const ExtendedSystem& sys, const PhasePoint& x0, double periods,
                                  const IntegratorConfig& cfg) {
  const double k = detail::harmonic_stiffness(sys, "ellipse_check");
  if (!(periods > 0.0)) throw usage_error("ellipse_check: periods must be positive");
  const double period = 2.0 * std::numbers::pi / std::sqrt(k / sys.mass());
  EllipseCheck out;
  out.trajectory = integrate(sys, x0, 0.0, periods * period, cfg);
  out.fit = fit_sho_ellipse(sys, out.trajectory);
  out.logged_constraint = out.trajectory.constraint_log.front();
  const double want = out.fit.constraint();
  for (double c : out.trajectory.constraint_log)
    out.constraint_mismatch = std::max(out.constraint_mismatch, std::abs(c - want));
  return out;
}

// ---------------------------------------------------------------- dwell times

struct DwellOptions {
  double x_split = 0.0;
  /// Time with |x| above this counts as excursion, not dwell.
  double x_well_max = std::numeric_limits<double>::infinity();
};

struct DwellSummary {
  double time_left = 0.0;
  double time_right = 0.0;
  double excursion_time = 0.0;
  std::size_t flips = 0;
  bool ratio_defined = false;
  double ratio = std::numeric_limits<double>::quiet_NaN();  // left / right
  Termination termination = Termination::Completed;
};

/// Partitions the trajectory's time by the side of x_split it is on, with
/// crossing and excursion boundaries refined on the cubic Hermite
/// interpolant between recorded points. Accuracy therefore assumes every
/// accepted step was recorded (record_stride 1). Time after an Escape event
/// counts as excursion.
inline DwellSummary dwell_analysis(const ExtendedSystem& sys, const Trajectory& traj,
                                   const DwellOptions& opt = {}) {
  if (traj.size() < 2) throw usage_error("dwell_analysis needs at least 2 recorded points");
  if (!(opt.x_well_max > 0.0)) throw usage_error("dwell.x_well_max must be positive");
  DwellSummary out;
  out.termination = traj.termination;
  double t_stop = traj.times.back();
  for (const auto& e : traj.events)
    if (e.kind == EventKind::Escape) t_stop = std::min(t_stop, e.time);
  const bool bounded = std::isfinite(opt.x_well_max);

  std::vector<PhasePoint> f(traj.size());
  for (std::size_t i = 0; i < traj.size(); ++i) f[i] = vector_field(sys, traj.points[i]);

  for (std::size_t i = 0; i + 1 < traj.size(); ++i) {
    const double ta = traj.times[i], tb = traj.times[i + 1];
    if (ta >= t_stop) {
      out.excursion_time += tb - ta;
      continue;
    }
    const auto& ya = traj.points[i];
    const auto& yb = traj.points[i + 1];
    auto xat = [&](double t) { return hermite(ta, ya, f[i], tb, yb, f[i + 1], t).x; };
    std::vector<double> cuts{ta};
    auto add_root = [&](double level, bool is_split) {
      const double ga = ya.x - level, gb = yb.x - level;
      if ((ga < 0.0) == (gb < 0.0)) return;
      double r;
      if (ga == 0.0) r = ta;
      else if (gb == 0.0) r = tb;
      else r = refine_crossing([&](double t) { return xat(t) - level; }, ta, tb, 0.0, 1e-13);
      if (r < t_stop) {
        cuts.push_back(r);
        if (is_split) ++out.flips;
      }
    };
    add_root(opt.x_split, true);
    if (bounded) {
      add_root(opt.x_well_max, false);
      add_root(-opt.x_well_max, false);
    }
    const double end = std::min(tb, t_stop);
    cuts.push_back(end);
    std::sort(cuts.begin(), cuts.end());
    for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
      const double dt = cuts[c + 1] - cuts[c];
      if (dt <= 0.0) continue;
      const double xm = xat(0.5 * (cuts[c] + cuts[c + 1]));
      if (bounded && std::abs(xm) > opt.x_well_max) out.excursion_time += dt;
      else if (xm < opt.x_split) out.time_left += dt;
      else out.time_right += dt;
    }
    if (tb > t_stop) out.excursion_time += tb - t_stop;
  }
  out.ratio_defined = out.time_right > 0.0;
  if (out.ratio_defined) out.ratio = out.time_left / out.time_right;
  return out;
}

// ------------------------------------------------------- double-well starts

/// Barrier height E_0 = V(0) of a double well; other potentials have none.
inline std::optional<double> barrier_height(const Potential& v) {
  if (v.kind() != PotentialKind::DoubleWell) return std::nullopt;
  return v(0.0);
}

/// CCM point at y = 0, x = x0 with complex energy E_r + i dE. Solves
/// P^2 = 2m(E_r + i dE - V(x0)) in closed form; of the two roots the one
/// with p sign(x0) >= 0 is taken, so x0 -> -x0 gives the mirrored start.
inline PhasePoint ccm_initial_point(const ExtendedSystem& sys, double E_r, double dE, double x0) {
  if (sys.flavor() != Flavor::CCM) throw usage_error("ccm start requires flavor ccm");
  detail::require_finite(E_r, "ccm.E_r");
  detail::require_finite(dE, "ccm.delta_E");
  detail::require_finite(x0, "ccm.x0");
  if (dE == 0.0) throw usage_error("ccm.delta_E must be nonzero");
  if (auto e0 = barrier_height(sys.potential()); e0 && !(E_r < *e0)) {
    std::ostringstream msg;
    msg << "ccm.E_r = " << E_r << " must lie below the barrier E_0 = " << *e0;
    throw usage_error(msg.str());
  }
  const double m = sys.mass();
  auto P = std::sqrt(std::complex<double>(2.0 * m * (E_r - sys.potential()(x0)), 2.0 * m * dE));
  const double side = x0 < 0.0 ? -1.0 : 1.0;
  if (P.real() * side < 0.0 || (P.real() == 0.0 && P.imag() * side > 0.0)) P = -P;
  return {x0, 0.0, P.real(), -P.imag()};
}

inline Trajectory ccm_double_well_run(const ExtendedSystem& sys, double E_r, double dE, double x0,
                                      double t_end, const IntegratorConfig& cfg) {
  return integrate(sys, ccm_initial_point(sys, E_r, dE, x0), 0.0, t_end, cfg);
}

/// MFQM point with chord ends z+ = (x_plus, p+) at H_cl = E + dE and
/// z- = (x_minus, p-) at H_cl = E - dE, momenta taken non-negative. Then
/// H+ = E and H- = dE.
inline PhasePoint mfqm_initial_point(const ExtendedSystem& sys, double E, double dE,
                                     double x_plus = 1.0, double x_minus = 1.0) {
  if (sys.flavor() != Flavor::MFQM) throw usage_error("mfqm start requires flavor mfqm");
  detail::require_finite(E, "mfqm.E");
  detail::require_finite(dE, "mfqm.delta_E");
  if (auto e0 = barrier_height(sys.potential())) {
    if (!(E < *e0)) {
      std::ostringstream msg;
      msg << "mfqm.E = " << E << " must lie below the barrier E_0 = " << *e0;
      throw domain_error(msg.str());
    }
    if (dE != 0.0 && !(E + std::abs(dE) > *e0 && *e0 > E - std::abs(dE))) {
      std::ostringstream msg;
      msg << "mfqm.delta_E = " << dE << " does not straddle the barrier: need E+|dE| > " << *e0
          << " > E-|dE| with E = " << E;
      throw domain_error(msg.str());
    }
  }
  auto shell = [&](double h, double x, const char* end) {
    const double kin = h - sys.potential()(x);
    if (kin < 0.0) {
      std::ostringstream msg;
      msg << "chord end " << end << " at x = " << x << " lies above its energy " << h;
      throw domain_error(msg.str());
    }
    return std::sqrt(2.0 * sys.mass() * kin);
  };
  const CanonicalPair zp{x_plus, shell(E + dE, x_plus, "z+")};
  const CanonicalPair zm{x_minus, shell(E - dE, x_minus, "z-")};
  return from_chord_ends(zp, zm);
}

inline Trajectory mfqm_double_well_run(const ExtendedSystem& sys, double E, double dE,
                                       double t_end, const IntegratorConfig& cfg,
                                       double x_plus = 1.0, double x_minus = 1.0) {
  return integrate(sys, mfqm_initial_point(sys, E, dE, x_plus, x_minus), 0.0, t_end, cfg);
}

struct ChordDrift {
  double plus = 0.0;
  double minus = 0.0;
};

/// Max drift of H_cl(z+) and H_cl(z-) along the trajectory, each over
/// max(1, |initial|).
inline ChordDrift chord_energy_drift(const ExtendedSystem& sys, const Trajectory& traj) {
  if (traj.times.empty()) throw usage_error("chord_energy_drift on an empty trajectory");
  const auto c0 = chord_ends(traj.points.front());
  const double hp0 = h_classical(sys, c0.plus), hm0 = h_classical(sys, c0.minus);
  ChordDrift d;
  for (const auto& X : traj.points) {
    const auto c = chord_ends(X);
    d.plus = std::max(d.plus, std::abs(h_classical(sys, c.plus) - hp0));
    d.minus = std::max(d.minus, std::abs(h_classical(sys, c.minus) - hm0));
  }
  d.plus /= std::max(1.0, std::abs(hp0));
  d.minus /= std::max(1.0, std::abs(hm0));
  return d;
}

// --------------------------------------------------------- uncertainty sweep

/// How the flip time is read off the crossings.
enum class IntervalConvention {
  FirstPassage,      // first crossing time minus start time
  CrossingInterval,  // second crossing minus first
  FlipPeriod,        // third crossing minus first
};

inline std::string_view to_string(IntervalConvention c) {
  switch (c) {
    case IntervalConvention::FirstPassage: return "first_passage";
    case IntervalConvention::CrossingInterval: return "crossing_interval";
    case IntervalConvention::FlipPeriod: return "flip_period";
  }
  return "first_passage";
}

struct UncertaintySweepRow {
  double delta_E = 0.0;
  std::optional<double> delta_t;
  std::optional<double> product;
  std::size_t crossings = 0;
  Termination termination = Termination::Completed;
};

struct SweepSettings {
  double E_r = 0.3;
  double x0 = 1.0;
  double t_end = 300.0;
  IntervalConvention convention = IntervalConvention::FirstPassage;
};

inline std::optional<double> flip_interval(const Trajectory& traj, IntervalConvention c) {
  const auto x = traj.crossings();
  switch (c) {
    case IntervalConvention::FirstPassage:
      if (x.size() >= 1) return x[0].time - traj.times.front();
      break;
    case IntervalConvention::CrossingInterval:
      if (x.size() >= 2) return x[1].time - x[0].time;
      break;
    case IntervalConvention::FlipPeriod:
      if (x.size() >= 3) return x[2].time - x[0].time;
      break;
  }
  return std::nullopt;
}

/// One CCM run per delta_E; rows keep the input order. Runs without enough
/// crossings report no delta_t.
inline std::vector<UncertaintySweepRow> uncertainty_sweep(const ExtendedSystem& sys,
                                                          const std::vector<double>& delta_E,
                                                          const SweepSettings& s,
                                                          const IntegratorConfig& cfg) {
  if (delta_E.empty()) throw usage_error("sweep.delta_E list is empty");
  for (double d : delta_E)
    if (!(d > 0.0)) throw usage_error("sweep.delta_E entries must be positive");
  std::vector<UncertaintySweepRow> rows;
  for (double d : delta_E) {
    const auto traj = ccm_double_well_run(sys, s.E_r, d, s.x0, s.t_end, cfg);
    UncertaintySweepRow r;
    r.delta_E = d;
    r.crossings = traj.crossings().size();
    r.termination = traj.termination;
    r.delta_t = flip_interval(traj, s.convention);
    if (r.delta_t) r.product = d * *r.delta_t;
    rows.push_back(r);
  }
  return rows;
}

/// max/min of the products present, or nothing if fewer than two.
inline std::optional<double> constancy_factor(const std::vector<UncertaintySweepRow>& rows) {
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  std::size_t n = 0;
  for (const auto& r : rows)
    if (r.product) {
      lo = std::min(lo, *r.product);
      hi = std::max(hi, *r.product);
      ++n;
    }
  if (n < 2) return std::nullopt;
  return hi / lo;
}

// ------------------------------------------------------------ hbar -> 0

/// Initial data in units where y = hbar ybar, q = hbar qbar.
struct ScaledStart {
  double x0 = 1.2;
  double ybar0 = 0.25;
  double p0 = 0.0;
  double qbar0 = 0.25;
};

struct LimitRow {
  double hbar = 0.0;
  double deviation = 0.0;  // max over samples of max(|dx|, |dp|)
  Termination termination = Termination::Completed;
};

/// MFQM runs at each hbar against the real classical run from (x0, p0),
/// compared at `samples` equally spaced shared checkpoints.
inline std::vector<LimitRow> classical_limit_sweep(const ExtendedSystem& sys,
                                                   const std::vector<double>& hbars,
                                                   const ScaledStart& s, double t_end,
                                                   std::size_t samples,
                                                   const IntegratorConfig& cfg) {
  if (hbars.empty()) throw usage_error("limit.hbar list is empty");
  if (samples < 2) throw usage_error("limit.samples must be >= 2");
  std::vector<double> cps(samples);
  for (std::size_t i = 0; i < samples; ++i)
    cps[i] = t_end * static_cast<double>(i + 1) / static_cast<double>(samples);
  const auto real = sys.with_flavor(Flavor::ClassicalReal);
  const auto mfqm = sys.with_flavor(Flavor::MFQM);
  const auto ref = integrate(real, {s.x0, 0.0, s.p0, 0.0}, 0.0, t_end, cfg, cps);
  auto at_checkpoints = [&](const Trajectory& t) {
    std::vector<PhasePoint> out;
    std::size_t j = 0;
    for (std::size_t i = 0; i < t.size() && j < cps.size(); ++i)
      if (t.times[i] == cps[j]) out.push_back(t.points[i]), ++j;
    return out;
  };
  const auto want = at_checkpoints(ref);
  std::vector<LimitRow> rows;
  for (double h : hbars) {
    if (!(h > 0.0)) throw usage_error("limit.hbar entries must be positive");
    const auto run = integrate(mfqm, {s.x0, h * s.ybar0, s.p0, h * s.qbar0}, 0.0, t_end, cfg, cps);
    const auto got = at_checkpoints(run);
    LimitRow r;
    r.hbar = h;
    r.termination = run.termination;
    if (got.size() != want.size() || run.termination != Termination::Completed) {
      r.deviation = std::numeric_limits<double>::infinity();
    } else {
      for (std::size_t i = 0; i < got.size(); ++i)
        r.deviation = std::max({r.deviation, std::abs(got[i].x - want[i].x),
                                std::abs(got[i].p - want[i].p)});
    }
    rows.push_back(r);
  }
  return rows;
}

/// Least-squares slope of log(deviation) against log(hbar).
inline std::optional<double> fitted_order(const std::vector<LimitRow>& rows) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t n = 0;
  for (const auto& r : rows) {
    if (!(r.deviation > 0.0) || !std::isfinite(r.deviation)) continue;
    const double a = std::log(r.hbar), b = std::log(r.deviation);
    sx += a, sy += b, sxx += a * a, sxy += a * b;
    ++n;
  }
  if (n < 2) return std::nullopt;
  const double den = n * sxx - sx * sx;
  if (den == 0.0) return std::nullopt;
  return (n * sxy - sx * sy) / den;
}

// ------------------------------------------------------------------ rebound

struct ReboundReport {
  double e_x = 0.0;              // (x, p)-sector energy p^2/2m + V(x)
  std::size_t crossings = 0;     // of x = 0
  double min_abs_x = 0.0;        // over the run, refined between samples
  double turning_abs_x = 0.0;    // closed form sqrt(-2 E_x / k)
  Termination termination = Termination::Completed;
};

/// MFQM on V = -k x^2/2 from x < 0 below the barrier top.
inline ReboundReport rebound_check(const ExtendedSystem& sys, const PhasePoint& x0, double t_end,
                                   IntegratorConfig cfg) {
  if (sys.potential().kind() != PotentialKind::InvertedHarmonic)
    throw usage_error("rebound_check requires an inverted_harmonic potential");
  if (sys.flavor() != Flavor::MFQM) throw usage_error("rebound_check requires flavor mfqm");
  ReboundReport out;
  out.e_x = h_classical(sys, x0.x, x0.p);
  if (!(x0.x < 0.0) || !(out.e_x < 0.0)) {
    std::ostringstream msg;
    msg << "rebound_check needs x < 0 below the separatrix p^2/2m + V(x) < 0; got x = " << x0.x
        << ", E_x = " << out.e_x;
    throw usage_error(msg.str());
  }
  const double k = -2.0 * sys.potential().coefficients()[2];
  out.turning_abs_x = std::sqrt(-2.0 * out.e_x / k);
  cfg.crossing_x = 0.0;
  const auto t = integrate(sys, x0, 0.0, t_end, cfg);
  out.crossings = t.crossings().size();
  out.termination = t.termination;
  std::size_t best = 0;
  for (std::size_t i = 1; i < t.size(); ++i)
    if (std::abs(t.points[i].x) < std::abs(t.points[best].x)) best = i;
  out.min_abs_x = std::abs(t.points[best].x);
  // Golden-section search on the dense interpolant around the best sample.
  const double lo0 = t.times[best == 0 ? 0 : best - 1];
  const double hi0 = t.times[std::min(best + 1, t.size() - 1)];
  if (hi0 > lo0) {
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = lo0, b = hi0;
    auto fx = [&](double s) { return std::abs(dense_at(sys, t, s).x); };
    for (int i = 0; i < 100 && b - a > 1e-13; ++i) {
      const double c = b - g * (b - a), d = a + g * (b - a);
      if (fx(c) < fx(d)) b = d;
      else a = c;
    }
    out.min_abs_x = std::min(out.min_abs_x, fx(0.5 * (a + b)));
  }
  return out;
}

// ------------------------------------------------------------- boundedness

namespace detail {

/// Minimum of a confining polynomial, by scan and Newton polish.
inline double potential_minimum(const Potential& v, double& at) {
  double L = 1.0;
  while (L < 1e6 && (v(L) <= v(0.0) || v(-L) <= v(0.0))) L *= 2.0;
  const int n = 20000;
  at = -L;
  double best = v(-L);
  for (int i = 1; i <= n; ++i) {
    const double x = -L + 2.0 * L * i / n;
    if (v(x) < best) best = v(x), at = x;
  }
  const auto d1 = v.derivative(), d2 = d1.derivative();
  for (int i = 0; i < 50; ++i) {
    const double c = d2(at);
    if (!(c > 0.0)) break;
    const double step = d1(at) / c;
    at -= step;
    if (std::abs(step) < 1e-15 * std::max(1.0, std::abs(at))) break;
  }
  return std::min(best, v(at));
}

/// Largest |x| on either side with V(x) <= level, from inside point x_in.
inline double reach(const Potential& v, double level, double x_in, double dir) {
  double step = 1.0;
  double inside = x_in, outside = x_in + dir * step;
  while (v(outside) <= level) {
    inside = outside;
    step *= 2.0;
    outside = x_in + dir * step;
  }
  for (int i = 0; i < 200 && std::abs(outside - inside) > 1e-14; ++i) {
    const double mid = 0.5 * (inside + outside);
    (v(mid) <= level ? inside : outside) = mid;
  }
  return outside;
}

}  // namespace detail

/// Max-norm bound on X over the MFQM surface H+ = E. Each chord end obeys
/// H_cl(z) = 2E - H_cl(other end) <= 2E - V_min, which bounds x +- y by the
/// turning points and p +- q by sqrt(2m(2E - 2 V_min)).
inline double level_set_bound(const Potential& v, double E, double mass) {
  if (!v.confining()) throw domain_error("level_set_bound requires a confining potential");
  double x_min = 0.0;
  const double vmin = detail::potential_minimum(v, x_min);
  const double top = 2.0 * E - vmin;
  if (top < vmin) throw domain_error("H+ = E lies below the potential minimum");
  const double xr = std::max(std::abs(detail::reach(v, top, x_min, 1.0)),
                             std::abs(detail::reach(v, top, x_min, -1.0)));
  return std::max(xr, std::sqrt(2.0 * mass * (top - vmin)));
}

struct BoundednessSettings {
  std::size_t runs = 50;
  std::uint64_t seed = 2024;
  double E = 0.6;            // MFQM H+
  double E_r = 0.3;          // CCM H_R
  double delta_E = 0.1;      // CCM H_I
  double x0_lo = 0.6, x0_hi = 1.3;
  double t_end = 100.0;
};

struct BoundednessReport {
  double bound = 0.0;
  std::size_t mfqm_runs = 0;
  std::size_t mfqm_within = 0;
  double mfqm_max_norm = 0.0;
  std::size_t ccm_runs = 0;
  std::size_t ccm_terminated = 0;  // Escaped or StepUnderflow
  std::size_t ccm_escape_pairs = 0;
  double ccm_max_escape_rel_diff = 0.0;
};

/// MFQM starts are drawn on H+ = E with a random energy split between the
/// chord ends; CCM starts sit at y = 0 with x0 of random size and
/// alternating side. Each CCM run is repeated with both tolerances halved
/// to measure escape-time stability.
inline BoundednessReport boundedness_experiment(const Potential& v, double mass,
                                                const BoundednessSettings& s,
                                                const IntegratorConfig& cfg) {
  BoundednessReport out;
  out.bound = level_set_bound(v, s.E, mass);
  std::mt19937_64 rng(s.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double x_min = 0.0;
  const double vmin = detail::potential_minimum(v, x_min);
  const ExtendedSystem mfqm(v, Flavor::MFQM, mass);
  const ExtendedSystem ccm(v, Flavor::CCM, mass);

  auto shell_point = [&](double h) {
    const double lo = detail::reach(v, h, x_min, -1.0), hi = detail::reach(v, h, x_min, 1.0);
    for (;;) {
      const double x = lo + (hi - lo) * unit(rng);
      const double kin = h - v(x);
      if (kin < 0.0) continue;
      const double sign = unit(rng) < 0.5 ? -1.0 : 1.0;
      return CanonicalPair{x, sign * std::sqrt(2.0 * mass * kin)};
    }
  };
  for (std::size_t i = 0; i < s.runs; ++i) {
    const double d = (s.E - vmin) * unit(rng);
    const auto X0 = from_chord_ends(shell_point(s.E + d), shell_point(s.E - d));
    const auto t = integrate(mfqm, X0, 0.0, s.t_end, cfg);
    double peak = 0.0;
    for (const auto& X : t.points) peak = std::max(peak, X.max_norm());
    ++out.mfqm_runs;
    if (peak <= out.bound && t.termination == Termination::Completed) ++out.mfqm_within;
    out.mfqm_max_norm = std::max(out.mfqm_max_norm, peak);
  }

  IntegratorConfig fine = cfg;
  fine.rel_tol *= 0.5;
  fine.abs_tol *= 0.5;
  auto escape_time = [](const Trajectory& t) -> std::optional<double> {
    for (const auto& e : t.events)
      if (e.kind == EventKind::Escape) return e.time;
    return std::nullopt;
  };
  for (std::size_t i = 0; i < s.runs; ++i) {
    const double x0 = (i % 2 ? -1.0 : 1.0) * (s.x0_lo + (s.x0_hi - s.x0_lo) * unit(rng));
    const auto a = ccm_double_well_run(ccm, s.E_r, s.delta_E, x0, s.t_end, cfg);
    const auto b = ccm_double_well_run(ccm, s.E_r, s.delta_E, x0, s.t_end, fine);
    ++out.ccm_runs;
    if (a.termination != Termination::Completed) ++out.ccm_terminated;
    const auto ea = escape_time(a), eb = escape_time(b);
    if (ea && eb) {
      ++out.ccm_escape_pairs;
      out.ccm_max_escape_rel_diff = std::max(out.ccm_max_escape_rel_diff, std::abs(*ea - *eb) / *ea);
    } else if (ea || eb) {
      out.ccm_max_escape_rel_diff = std::numeric_limits<double>::infinity();
    }
  }
  return out;
}

// --------------------------------------------------------- CCM vs quantum

/// Which quantum state supplies the well probabilities.
enum class StateConvention {
  Eigenstate,     // the selected level itself
  LocalizedLeft,  // (psi_level + psi_level+1)/sqrt2
};

inline std::string_view to_string(StateConvention c) {
  return c == StateConvention::Eigenstate ? "eigenstate" : "localized_left";
}

struct CompareSettings {
  std::size_t level = 0;
  Grid1D grid{};
  double x0 = 1.0;
  double t_end = 300.0;
  DwellOptions dwell{0.0, 2.0};
  StateConvention convention = StateConvention::Eigenstate;
};

struct ComparisonRow {
  double delta_E = 0.0;
  DwellSummary dwell;
};

struct ComparisonReport {
  double hbar = 0.0;
  std::size_t level = 0;
  double E_level = 0.0;
  StateConvention convention = StateConvention::Eigenstate;
  double quantum_left = 0.0, quantum_right = 0.0;
  std::vector<ComparisonRow> rows;
  std::optional<double> extrapolated_ratio;  // linear fit over the three smallest delta_E
};

/// Intercept at delta_E = 0 of a least-squares line through the (up to)
/// three smallest delta_E rows with a defined ratio.
inline std::optional<double> extrapolate_ratio(const std::vector<ComparisonRow>& rows) {
  std::vector<std::pair<double, double>> pts;
  for (const auto& r : rows)
    if (r.dwell.ratio_defined) pts.emplace_back(r.delta_E, r.dwell.ratio);
  std::sort(pts.begin(), pts.end());
  if (pts.size() > 3) pts.resize(3);
  if (pts.size() < 2) return std::nullopt;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (auto [a, b] : pts) sx += a, sy += b, sxx += a * a, sxy += a * b;
  const double n = static_cast<double>(pts.size());
  const double den = n * sxx - sx * sx;
  if (den == 0.0) return std::nullopt;
  const double slope = (n * sxy - sx * sy) / den;
  return (sy - slope * sx) / n;
}

/// CCM dwell ratios at H_R = E_level for each delta_E beside the quantum
/// well probabilities. The table is reported as is; no agreement is implied.
inline ComparisonReport ccm_vs_quantum_report(const ExtendedSystem& sys, double hbar,
                                              const std::vector<double>& delta_E,
                                              const CompareSettings& s,
                                              const IntegratorConfig& cfg) {
  if (sys.flavor() != Flavor::CCM) throw usage_error("compare requires flavor ccm");
  if (delta_E.empty()) throw usage_error("compare.delta_E list is empty");
  const std::size_t k = s.convention == StateConvention::LocalizedLeft ? s.level + 2 : s.level + 1;
  const auto spec = eigensolve(sys.potential(), s.grid, hbar, sys.mass(), k);
  ComparisonReport out;
  out.hbar = hbar;
  out.level = s.level;
  out.E_level = spec.energies[s.level];
  out.convention = s.convention;
  const auto probs = s.convention == StateConvention::Eigenstate
                         ? well_probabilities(spec, s.level, s.dwell.x_split)
                         : well_probabilities(doublet_combination(spec, s.level, s.level + 1),
                                              spec.grid, s.dwell.x_split);
  out.quantum_left = probs.first;
  out.quantum_right = probs.second;
  for (double d : delta_E) {
    if (!(d > 0.0)) throw usage_error("compare.delta_E entries must be positive");
    const auto t = ccm_double_well_run(sys, out.E_level, d, s.x0, s.t_end, cfg);
    out.rows.push_back({d, dwell_analysis(sys, t, s.dwell)});
  }
  out.extrapolated_ratio = extrapolate_ratio(out.rows);
  return out;
}

}  // namespace xphase
