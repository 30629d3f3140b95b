#pragma once

// Integration of the flavor-selected Hamilton flow with adaptive error
// control, well-crossing and escape events, and conserved-quantity logs.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "errors.hpp"
#include "hamiltonians.hpp"
#include "phase_space.hpp"

namespace xphase {

enum class Method { AdaptiveRK, ImplicitMidpoint };
enum class Termination { Completed, Escaped, StepUnderflow };
enum class EventKind { WellCrossing, Escape };

inline std::string_view to_string(Method m) {
  return m == Method::AdaptiveRK ? "adaptive_rk" : "implicit_midpoint";
}

inline std::string_view to_string(Termination t) {
  switch (t) {
    case Termination::Completed: return "completed";
    case Termination::Escaped: return "escaped";
    case Termination::StepUnderflow: return "step_underflow";
  }
  return "completed";
}

inline std::string_view to_string(EventKind k) {
  return k == EventKind::WellCrossing ? "well_crossing" : "escape";
}

struct IntegratorConfig {
  double rel_tol = 1e-10;
  double abs_tol = 1e-12;
  /// Upper bound on adaptive steps; the fixed step of ImplicitMidpoint.
  double max_step = 0.1;
  double min_step = 1e-14;
  double escape_radius = 1e6;
  Method method = Method::AdaptiveRK;
  /// Well-crossing surface x = crossing_x.
  double crossing_x = 0.0;
  /// Record every n-th accepted step (the final point is always recorded).
  std::size_t record_stride = 1;

  void validate() const {
    if (!(rel_tol > 0.0) || !(abs_tol > 0.0))
      throw usage_error("integrator.rel_tol and integrator.abs_tol must be positive");
    if (!(min_step > 0.0) || !(min_step < max_step))
      throw usage_error("integrator.min_step must satisfy 0 < min_step < max_step");
    if (!(escape_radius > 0.0)) throw usage_error("integrator.escape_radius must be positive");
    if (!std::isfinite(crossing_x)) throw usage_error("integrator.crossing_x must be finite");
    if (record_stride == 0) throw usage_error("integrator.record_stride must be >= 1");
  }
};

struct Event {
  EventKind kind = EventKind::WellCrossing;
  int direction = 0;  // +1 for x increasing through the surface, -1 decreasing
  double time = 0.0;
  PhasePoint point;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<PhasePoint> points;
  std::vector<double> generator_log;
  std::vector<double> constraint_log;
  std::vector<Event> events;
  Termination termination = Termination::Completed;

  std::size_t size() const noexcept { return times.size(); }
  double duration() const { return times.empty() ? 0.0 : times.back() - times.front(); }

  std::vector<Event> crossings() const {
    std::vector<Event> out;
    for (const auto& e : events)
      if (e.kind == EventKind::WellCrossing) out.push_back(e);
    return out;
  }
};

/// Cubic Hermite interpolation between two states with known derivatives.
inline PhasePoint hermite(double ta, const PhasePoint& ya, const PhasePoint& fa, double tb,
                          const PhasePoint& yb, const PhasePoint& fb, double t) {
  const double h = tb - ta;
  const double s = (t - ta) / h;
  const double s2 = s * s, s3 = s2 * s;
  const double h00 = 2 * s3 - 3 * s2 + 1, h10 = s3 - 2 * s2 + s;
  const double h01 = -2 * s3 + 3 * s2, h11 = s3 - s2;
  return h00 * ya + (h10 * h) * fa + h01 * yb + (h11 * h) * fb;
}

/// Root of f on a sign-changing bracket by alternating bisection and
/// Illinois secant steps. Stops when |f| <= f_tol or the bracket is shorter
/// than t_tol, returning the end with the smaller residual.
template <typename F>
double refine_crossing(F&& f, double ta, double tb, double f_tol = 1e-9, double t_tol = 1e-12) {
  double fa = f(ta), fb = f(tb);
  if (fa == 0.0) return ta;
  if (fb == 0.0) return tb;
  if (!(fa * fb < 0.0)) throw usage_error("refine_crossing: bracket has no sign change");
  int side = 0;
  for (int iter = 0; iter < 400 && tb - ta > t_tol; ++iter) {
    double c = 0.5 * (ta + tb);
    if (iter % 2 == 1) {
      const double s = (ta * fb - tb * fa) / (fb - fa);
      if (s > ta && s < tb) c = s;
    }
    const double fc = f(c);
    if (std::abs(fc) <= f_tol || fc == 0.0) return c;
    if ((fc < 0.0) == (fb < 0.0)) {
      tb = c;
      fb = fc;
      if (side == -1) fa *= 0.5;
      side = -1;
    } else {
      ta = c;
      fa = fc;
      if (side == 1) fb *= 0.5;
      side = 1;
    }
  }
  return std::abs(f(ta)) < std::abs(f(tb)) ? ta : tb;
}

namespace detail {

// Dormand-Prince 5(4) tableau.
struct DormandPrince {
  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                          a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                          a64 = 49.0 / 176, a65 = -5103.0 / 18656;
  static constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192,
                          a75 = -2187.0 / 6784, a76 = 11.0 / 84;
  static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                          e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
};

struct StepSample {
  double t;
  PhasePoint x;
  PhasePoint f;
};

// Receives accepted states and events from the stepping loop.
struct Recorder {
  virtual ~Recorder() = default;
  virtual void on_point(double t, const PhasePoint& x, bool forced) = 0;
  virtual void on_event(const Event& e) = 0;
};

class FlowStepper {
 public:
  FlowStepper(const ExtendedSystem& sys, const IntegratorConfig& cfg) : sys_(sys), cfg_(cfg) {}

  PhasePoint field(const PhasePoint& x) const { return vector_field(sys_, x); }

  // Returns the error estimate (<= 1 accepts) and the new state and derivative.
  double dopri_step(const StepSample& s, double h, PhasePoint& x1, PhasePoint& f1) const {
    using D = DormandPrince;
    const PhasePoint& k1 = s.f;
    const PhasePoint k2 = field(s.x + (h * D::a21) * k1);
    const PhasePoint k3 = field(s.x + h * (D::a31 * k1 + D::a32 * k2));
    const PhasePoint k4 = field(s.x + h * (D::a41 * k1 + D::a42 * k2 + D::a43 * k3));
    const PhasePoint k5 =
        field(s.x + h * (D::a51 * k1 + D::a52 * k2 + D::a53 * k3 + D::a54 * k4));
    const PhasePoint k6 = field(
        s.x + h * (D::a61 * k1 + D::a62 * k2 + D::a63 * k3 + D::a64 * k4 + D::a65 * k5));
    x1 = s.x + h * (D::a71 * k1 + D::a73 * k3 + D::a74 * k4 + D::a75 * k5 + D::a76 * k6);
    f1 = field(x1);
    const PhasePoint err =
        h * (D::e1 * k1 + D::e3 * k3 + D::e4 * k4 + D::e5 * k5 + D::e6 * k6 + D::e7 * f1);
    const Vec4 e = err.to_array(), a = s.x.to_array(), b = x1.to_array();
    double acc = 0.0;
    for (std::size_t i = 0; i < 4; ++i) {
      const double sc = cfg_.abs_tol + cfg_.rel_tol * std::max(std::abs(a[i]), std::abs(b[i]));
      acc += (e[i] / sc) * (e[i] / sc);
    }
    return std::sqrt(acc / 4.0);
  }

  // X1 = X0 + h f((X0 + X1)/2) by fixed-point iteration; false if it stalls.
  bool midpoint_step(const StepSample& s, double h, PhasePoint& x1, PhasePoint& f1) const {
    x1 = s.x + h * s.f;
    for (int iter = 0; iter < 100; ++iter) {
      const PhasePoint next = s.x + h * field(0.5 * (s.x + x1));
      const double change = (next - x1).max_norm();
      x1 = next;
      if (!x1.finite()) return false;
      if (change <= 4 * std::numeric_limits<double>::epsilon() * (1.0 + x1.max_norm())) {
        f1 = field(x1);
        return true;
      }
    }
    return false;
  }

  double initial_step(const StepSample& s, double span) const {
    auto norm = [&](const PhasePoint& v) {
      const Vec4 a = v.to_array(), y = s.x.to_array();
      double acc = 0.0;
      for (std::size_t i = 0; i < 4; ++i) {
        const double sc = cfg_.abs_tol + cfg_.rel_tol * std::abs(y[i]);
        acc += (a[i] / sc) * (a[i] / sc);
      }
      return std::sqrt(acc / 4.0);
    };
    const double d0 = norm(s.x), d1 = norm(s.f);
    double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    h0 = std::min(h0, span);
    const PhasePoint f1 = field(s.x + h0 * s.f);
    const double d2 = norm(f1 - s.f) / h0;
    const double m = std::max(d1, d2);
    const double h1 = m <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / m, 0.2);
    return std::min({100 * h0, h1, cfg_.max_step, span});
  }

  Termination run(PhasePoint x0, double t0, double t1, std::span<const double> checkpoints,
                  Recorder& rec) const {
    StepSample cur{t0, x0, field(x0)};
    rec.on_point(t0, x0, true);
    const bool adaptive = cfg_.method == Method::AdaptiveRK;
    double h = adaptive ? initial_step(cur, t1 - t0) : cfg_.max_step;
    std::size_t next_cp = 0;
    while (next_cp < checkpoints.size() && checkpoints[next_cp] <= t0) ++next_cp;
    std::size_t accepted = 0;

    while (cur.t < t1) {
      const double target =
          next_cp < checkpoints.size() ? std::min(checkpoints[next_cp], t1) : t1;
      const double h_try = std::min({h, cfg_.max_step, target - cur.t});
      const bool lands = h_try >= target - cur.t;
      PhasePoint x1, f1;
      double err = 0.0;
      if (adaptive) {
        err = dopri_step(cur, h_try, x1, f1);
        if (!(err <= 1.0)) {
          const double fac = std::isfinite(err) ? std::max(0.2, 0.9 * std::pow(err, -0.2)) : 0.2;
          h = h_try * std::min(1.0, fac);
          if (h < cfg_.min_step || cur.t + h == cur.t) return Termination::StepUnderflow;
          continue;
        }
      } else if (!midpoint_step(cur, h_try, x1, f1)) {
        return Termination::StepUnderflow;
      }

      const StepSample nxt{lands ? target : cur.t + h_try, x1, f1};
      if (nxt.t <= cur.t) return Termination::StepUnderflow;
      detect_crossing(cur, nxt, rec);
      ++accepted;

      if (nxt.x.max_norm() >= cfg_.escape_radius) {
        rec.on_event(refine_escape(cur, nxt));
        rec.on_point(nxt.t, nxt.x, true);
        return Termination::Escaped;
      }
      const bool at_checkpoint = lands && next_cp < checkpoints.size() &&
                                 nxt.t == checkpoints[next_cp];
      if (at_checkpoint) ++next_cp;
      rec.on_point(nxt.t, nxt.x,
                   at_checkpoint || nxt.t >= t1 || accepted % cfg_.record_stride == 0);
      cur = nxt;
      if (adaptive) {
        const double fac = err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
        h = std::max(h_try * fac, lands ? std::min(h, cfg_.max_step) : 0.0);
      }
    }
    return Termination::Completed;
  }

 private:
  void detect_crossing(const StepSample& a, const StepSample& b, Recorder& rec) const {
    const double s = cfg_.crossing_x;
    const double ga = a.x.x - s, gb = b.x.x - s;
    if (ga == 0.0 || !((ga < 0.0) != (gb < 0.0))) return;
    Event e{EventKind::WellCrossing, gb > ga ? 1 : -1, b.t, b.x};
    if (gb == 0.0) {
      rec.on_event(e);
      return;
    }
    auto g = [&](double t) { return hermite(a.t, a.x, a.f, b.t, b.x, b.f, t).x - s; };
    e.time = refine_crossing(g, a.t, b.t, 0.0, 1e-12);
    e.point = hermite(a.t, a.x, a.f, b.t, b.x, b.f, e.time);
    rec.on_event(e);
  }

  Event refine_escape(const StepSample& a, const StepSample& b) const {
    const double r = cfg_.escape_radius;
    auto g = [&](double t) { return hermite(a.t, a.x, a.f, b.t, b.x, b.f, t).max_norm() - r; };
    Event e{EventKind::Escape, 0, b.t, b.x};
    if (g(a.t) < 0.0 && g(b.t) > 0.0) {
      e.time = refine_crossing(g, a.t, b.t, 0.0, 1e-12);
      e.point = hermite(a.t, a.x, a.f, b.t, b.x, b.f, e.time);
    }
    return e;
  }

  const ExtendedSystem& sys_;
  const IntegratorConfig& cfg_;
};

inline void check_span(const PhasePoint& x0, double t0, double t1) {
  if (!x0.finite()) throw usage_error("initial phase point must be finite");
  if (!std::isfinite(t0) || !std::isfinite(t1) || !(t1 > t0))
    throw usage_error("time span must satisfy t0 < t1");
}

}  // namespace detail

/// Integrates the flow of `sys` over [t0, t1]. Steps are shortened to land
/// exactly on every checkpoint time, each of which is recorded.
inline Trajectory integrate(const ExtendedSystem& sys, const PhasePoint& x0, double t0,
                            double t1, const IntegratorConfig& cfg,
                            std::span<const double> checkpoints = {}) {
  cfg.validate();
  detail::check_span(x0, t0, t1);
  if (!std::is_sorted(checkpoints.begin(), checkpoints.end()))
    throw usage_error("checkpoints must be sorted");

  struct Collect final : detail::Recorder {
    const ExtendedSystem& sys;
    Trajectory traj;
    explicit Collect(const ExtendedSystem& s) : sys(s) {}
    void on_point(double t, const PhasePoint& x, bool forced) override {
      if (!forced) return;
      traj.times.push_back(t);
      traj.points.push_back(x);
      traj.generator_log.push_back(generator(sys, x).value);
      traj.constraint_log.push_back(constraint(sys, x).value);
    }
    void on_event(const Event& e) override { traj.events.push_back(e); }
  } rec(sys);

  rec.traj.termination = detail::FlowStepper(sys, cfg).run(x0, t0, t1, checkpoints, rec);
  return std::move(rec.traj);
}

struct Endpoint {
  double time = 0.0;
  PhasePoint point;
  Termination termination = Termination::Completed;
};

/// Like integrate, but keeps only the final state.
inline Endpoint propagate(const ExtendedSystem& sys, const PhasePoint& x0, double t0, double t1,
                          const IntegratorConfig& cfg) {
  cfg.validate();
  detail::check_span(x0, t0, t1);
  struct Last final : detail::Recorder {
    Endpoint end;
    void on_point(double t, const PhasePoint& x, bool) override { end.time = t, end.point = x; }
    void on_event(const Event&) override {}
  } rec;
  rec.end.termination = detail::FlowStepper(sys, cfg).run(x0, t0, t1, {}, rec);
  return rec.end;
}

/// State at time t by cubic Hermite interpolation between recorded points.
inline PhasePoint dense_at(const ExtendedSystem& sys, const Trajectory& traj, double t) {
  if (traj.times.empty()) throw usage_error("dense_at on an empty trajectory");
  if (t < traj.times.front() || t > traj.times.back())
    throw usage_error("dense_at: time outside the trajectory span");
  auto it = std::upper_bound(traj.times.begin(), traj.times.end(), t);
  if (it == traj.times.end()) return traj.points.back();
  const auto j = static_cast<std::size_t>(it - traj.times.begin());
  const auto i = j - 1;
  if (traj.times[i] == t) return traj.points[i];
  return hermite(traj.times[i], traj.points[i], vector_field(sys, traj.points[i]), traj.times[j],
                 traj.points[j], vector_field(sys, traj.points[j]), t);
}

struct ConservationReport {
  double max_generator_drift = 0.0;
  double max_constraint_drift = 0.0;
};

/// Max deviation of each log from its initial value, over max(1, |initial|).
inline ConservationReport conservation_report(const Trajectory& traj) {
  if (traj.times.empty()) throw usage_error("conservation_report on an empty trajectory");
  auto drift = [](const std::vector<double>& log) {
    const double ref = log.front();
    const double scale = std::max(1.0, std::abs(ref));
    double d = 0.0;
    for (double v : log) d = std::max(d, std::abs(v - ref));
    return d / scale;
  };
  return {drift(traj.generator_log), drift(traj.constraint_log)};
}

}  // namespace xphase
