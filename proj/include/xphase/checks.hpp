#pragma once

// Structural identity battery at random points: constraint brackets, the
// Gamma and Lambda gradient relations, the complexification identity and
// exact gradients against centered finite differences.

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>

#include "hamiltonians.hpp"

namespace xphase {

inline PhasePoint random_point(std::mt19937_64& rng, double lo = -2.0, double hi = 2.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  const double x = u(rng), y = u(rng), p = u(rng), q = u(rng);
  return {x, y, p, q};
}

inline Vec4 fd_gradient(const std::function<double(const PhasePoint&)>& f, const PhasePoint& X,
                        double step = 1e-6) {
  Vec4 g{};
  for (std::size_t a = 0; a < 4; ++a) {
    Vec4 up = X.to_array(), dn = X.to_array();
    up[a] += step;
    dn[a] -= step;
    g[a] = (f(PhasePoint::from(up)) - f(PhasePoint::from(dn))) / (2.0 * step);
  }
  return g;
}

/// max_a |g_a - ref_a| / max(1, |ref|_inf).
inline double gradient_rel_error(const Vec4& g, const Vec4& ref) {
  double scale = 1.0, err = 0.0;
  for (double r : ref) scale = std::max(scale, std::abs(r));
  for (std::size_t a = 0; a < 4; ++a) err = std::max(err, std::abs(g[a] - ref[a]));
  return err / scale;
}

struct IdentityBattery {
  std::size_t points = 0;
  double bracket_mfqm = 0.0;   // max |{H-, H+}|
  double bracket_ccm = 0.0;    // max |{H_I, H_R}|
  double gamma = 0.0;
  double lambda = 0.0;
  double complexification = 0.0;
  double gradient = 0.0;       // max relative error against finite differences

  double worst_identity() const {
    return std::max({bracket_mfqm, bracket_ccm, gamma, lambda, complexification});
  }
};

inline IdentityBattery identity_battery(const Potential& v, double mass, std::size_t points,
                                        double radius, std::uint64_t seed) {
  if (points == 0) throw usage_error("identity.points must be positive");
  if (!(radius > 0.0)) throw usage_error("identity.radius must be positive");
  const ExtendedSystem m(v, Flavor::MFQM, mass), c(v, Flavor::CCM, mass),
      r(v, Flavor::ClassicalReal, mass);
  std::mt19937_64 rng(seed);
  IdentityBattery out;
  out.points = points;
  using Fn = GradedValue (*)(const ExtendedSystem&, const PhasePoint&);
  const std::pair<const ExtendedSystem*, Fn> graded[] = {
      {&m, h_plus}, {&m, h_minus}, {&c, h_real}, {&c, h_imag}, {&r, generator}};
  for (std::size_t i = 0; i < points; ++i) {
    const auto X = random_point(rng, -radius, radius);
    out.bracket_mfqm =
        std::max(out.bracket_mfqm, std::abs(poisson_bracket(h_minus(m, X), h_plus(m, X))));
    out.bracket_ccm =
        std::max(out.bracket_ccm, std::abs(poisson_bracket(h_imag(c, X), h_real(c, X))));
    out.gamma = std::max(out.gamma, check_gamma_relation(m, X));
    out.lambda = std::max(out.lambda, check_lambda_relation(c, X));
    const auto id = complexification_identity(m, c, X);
    out.complexification = std::max({out.complexification, id.plus, id.minus});
    for (const auto& [sys, fn] : graded) {
      const auto fd = fd_gradient([&](const PhasePoint& P) { return fn(*sys, P).value; }, X);
      out.gradient = std::max(out.gradient, gradient_rel_error(fn(*sys, X).gradient, fd));
    }
  }
  return out;
}

}  // namespace xphase
