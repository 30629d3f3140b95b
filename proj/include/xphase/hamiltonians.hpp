#pragma once

// Hamiltonians on the extended phase space.
//
// MFQM (chord / Marinov form), with phi +- xi = (x +- y, p +- q):
//   H+ = [H_cl(phi + xi) + H_cl(phi - xi)] / 2  (flow generator)
//   H- = [H_cl(phi + xi) - H_cl(phi - xi)] / 2  (first-class constraint)
// CCM, with Z = x + iy and P = p - iq:
//   H_R = Re H_cl(P, Z)  (flow generator)
//   H_I = Im H_cl(P, Z)  (first-class constraint)
// Both flows are X' = Omega grad(generator).

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>
#include <string_view>
#include <utility>

#include "errors.hpp"
#include "phase_space.hpp"
#include "potential.hpp"

namespace xphase {

enum class Flavor { MFQM, CCM, ClassicalReal };

inline std::string_view to_string(Flavor f) {
  switch (f) {
    case Flavor::MFQM: return "mfqm";
    case Flavor::CCM: return "ccm";
    case Flavor::ClassicalReal: return "classical";
  }
  return "classical";
}

class ExtendedSystem {
 public:
  ExtendedSystem(Potential potential, Flavor flavor, double mass = 1.0, double hbar = 1.0)
      : potential_(std::move(potential)),
        force_(potential_.derivative()),
        flavor_(flavor),
        mass_(mass),
        hbar_(hbar) {
    if (!(mass > 0.0) || !std::isfinite(mass)) throw usage_error("mass must be positive");
    if (!(hbar > 0.0) || !std::isfinite(hbar)) throw usage_error("hbar must be positive");
  }

  const Potential& potential() const noexcept { return potential_; }
  /// V'(x), precomputed.
  const Potential& slope() const noexcept { return force_; }
  Flavor flavor() const noexcept { return flavor_; }
  double mass() const noexcept { return mass_; }
  double hbar() const noexcept { return hbar_; }

  ExtendedSystem with_flavor(Flavor f) const { return {potential_, f, mass_, hbar_}; }

 private:
  Potential potential_;
  Potential force_;
  Flavor flavor_;
  double mass_;
  double hbar_;
};

struct GradedValue {
  double value = 0.0;
  Vec4 gradient{};  // d/dx, d/dy, d/dp, d/dq
};

namespace detail {

inline void require_flavor(const ExtendedSystem& sys, Flavor want, const char* op) {
  if (sys.flavor() != want)
    throw usage_error(std::string(op) + " requires flavor " + std::string(to_string(want)) +
                      ", system is " + std::string(to_string(sys.flavor())));
}

}  // namespace detail

inline double h_classical(const ExtendedSystem& sys, double x, double p) {
  detail::require_finite(x, "x");
  detail::require_finite(p, "p");
  return p * p / (2.0 * sys.mass()) + sys.potential()(x);
}

inline double h_classical(const ExtendedSystem& sys, CanonicalPair z) {
  return h_classical(sys, z.x, z.p);
}

// H+ and H- with arguments in any field. Used with complex arguments for the
// substitution y -> iy, q -> -iq that maps MFQM onto CCM.
template <typename T>
T h_plus_value(const Potential& v, double mass, const T& x, const T& y, const T& p, const T& q) {
  return (p * p + q * q) / T(2.0 * mass) + T(0.5) * (v(x + y) + v(x - y));
}

template <typename T>
T h_minus_value(const Potential& v, double mass, const T& x, const T& y, const T& p, const T& q) {
  return p * q / T(mass) + T(0.5) * (v(x + y) - v(x - y));
}

inline GradedValue h_plus(const ExtendedSystem& sys, const PhasePoint& X) {
  detail::require_flavor(sys, Flavor::MFQM, "h_plus");
  const double m = sys.mass();
  const double a = sys.slope()(X.x + X.y);
  const double b = sys.slope()(X.x - X.y);
  return {h_plus_value(sys.potential(), m, X.x, X.y, X.p, X.q),
          {0.5 * (a + b), 0.5 * (a - b), X.p / m, X.q / m}};
}

inline GradedValue h_minus(const ExtendedSystem& sys, const PhasePoint& X) {
  detail::require_flavor(sys, Flavor::MFQM, "h_minus");
  const double m = sys.mass();
  const double a = sys.slope()(X.x + X.y);
  const double b = sys.slope()(X.x - X.y);
  return {h_minus_value(sys.potential(), m, X.x, X.y, X.p, X.q),
          {0.5 * (a - b), 0.5 * (a + b), X.q / m, X.p / m}};
}

namespace detail {

// H_cl(P, Z) and V'(Z) at Z = x + iy, P = p - iq.
struct ComplexEnergy {
  std::complex<double> energy;
  std::complex<double> slope;
};

inline ComplexEnergy complex_energy(const ExtendedSystem& sys, const PhasePoint& X) {
  const std::complex<double> Z(X.x, X.y);
  const std::complex<double> P(X.p, -X.q);
  return {P * P / (2.0 * sys.mass()) + sys.potential()(Z), sys.slope()(Z)};
}

}  // namespace detail

// With V(Z) = U + iW analytic: dU/dx = Re V', dU/dy = -Im V', dW/dx = Im V',
// dW/dy = Re V'. Kinetic part: Re P^2/2m = (p^2 - q^2)/2m, Im P^2/2m = -pq/m.
inline GradedValue h_real(const ExtendedSystem& sys, const PhasePoint& X) {
  detail::require_flavor(sys, Flavor::CCM, "h_R");
  const auto e = detail::complex_energy(sys, X);
  const double m = sys.mass();
  return {e.energy.real(), {e.slope.real(), -e.slope.imag(), X.p / m, -X.q / m}};
}

inline GradedValue h_imag(const ExtendedSystem& sys, const PhasePoint& X) {
  detail::require_flavor(sys, Flavor::CCM, "h_I");
  const auto e = detail::complex_energy(sys, X);
  const double m = sys.mass();
  return {e.energy.imag(), {e.slope.imag(), e.slope.real(), -X.q / m, -X.p / m}};
}

/// The flavor's flow generator: H+ (MFQM), H_R (CCM), H_cl on (x, p) (real).
inline GradedValue generator(const ExtendedSystem& sys, const PhasePoint& X) {
  switch (sys.flavor()) {
    case Flavor::MFQM: return h_plus(sys, X);
    case Flavor::CCM: return h_real(sys, X);
    case Flavor::ClassicalReal: break;
  }
  return {h_classical(sys, X.x, X.p), {sys.slope()(X.x), 0.0, X.p / sys.mass(), 0.0}};
}

/// The flavor's conserved constraint: H- (MFQM), H_I (CCM), 0 (real).
inline GradedValue constraint(const ExtendedSystem& sys, const PhasePoint& X) {
  switch (sys.flavor()) {
    case Flavor::MFQM: return h_minus(sys, X);
    case Flavor::CCM: return h_imag(sys, X);
    case Flavor::ClassicalReal: break;
  }
  return {};
}

/// {{A, B}} = Omega^{ab} d_a A d_b B.
inline double poisson_bracket(const GradedValue& f, const GradedValue& g) {
  const Vec4 og = mat_vec(structure::omega, g.gradient);
  double s = 0.0;
  for (std::size_t a = 0; a < 4; ++a) s += f.gradient[a] * og[a];
  return s;
}

/// X' = Omega grad(generator). ClassicalReal keeps (y, q) frozen.
inline PhasePoint vector_field(const ExtendedSystem& sys, const PhasePoint& X) {
  const double m = sys.mass();
  switch (sys.flavor()) {
    case Flavor::MFQM: {
      const double a = sys.slope()(X.x + X.y);
      const double b = sys.slope()(X.x - X.y);
      return {X.p / m, X.q / m, -0.5 * (a + b), -0.5 * (a - b)};
    }
    case Flavor::CCM: {
      const auto s = sys.slope()(std::complex<double>(X.x, X.y));
      return {X.p / m, -X.q / m, -s.real(), s.imag()};
    }
    case Flavor::ClassicalReal: break;
  }
  return {X.p / m, 0.0, -sys.slope()(X.x), 0.0};
}

namespace detail {

inline double max_abs_diff(const Vec4& a, const Vec4& b) {
  double r = 0.0;
  for (std::size_t i = 0; i < 4; ++i) r = std::max(r, std::abs(a[i] - b[i]));
  return r;
}

}  // namespace detail

/// max |grad H- - Gamma grad H+|.
inline double check_gamma_relation(const ExtendedSystem& sys, const PhasePoint& X) {
  return detail::max_abs_diff(h_minus(sys, X).gradient,
                              mat_vec(structure::gamma, h_plus(sys, X).gradient));
}

/// max |grad H_I - Lambda grad H_R|.
inline double check_lambda_relation(const ExtendedSystem& sys, const PhasePoint& X) {
  return detail::max_abs_diff(h_imag(sys, X).gradient,
                              mat_vec(structure::lambda, h_real(sys, X).gradient));
}

struct IdentityResiduals {
  double plus = 0.0;   // |H+(x, iy, p, -iq) - H_R(x, y, p, q)|
  double minus = 0.0;  // |H-(x, iy, p, -iq) - i H_I(x, y, p, q)|
};

inline IdentityResiduals complexification_identity(const ExtendedSystem& mfqm,
                                                   const ExtendedSystem& ccm,
                                                   const PhasePoint& X) {
  detail::require_flavor(mfqm, Flavor::MFQM, "complexification_identity");
  detail::require_flavor(ccm, Flavor::CCM, "complexification_identity");
  if (mfqm.mass() != ccm.mass() ||
      mfqm.potential().coefficients() != ccm.potential().coefficients())
    throw usage_error("complexification_identity needs the same potential and mass");
  using C = std::complex<double>;
  const C x(X.x, 0.0), y(0.0, X.y), p(X.p, 0.0), q(0.0, -X.q);
  const C hp = h_plus_value(mfqm.potential(), mfqm.mass(), x, y, p, q);
  const C hm = h_minus_value(mfqm.potential(), mfqm.mass(), x, y, p, q);
  const double hr = h_real(ccm, X).value;
  const double hi = h_imag(ccm, X).value;
  return {std::abs(hp - C(hr, 0.0)), std::abs(hm - C(0.0, hi))};
}

struct ChordEnds {
  CanonicalPair plus;   // phi + xi
  CanonicalPair minus;  // phi - xi
};

inline ChordEnds chord_ends(const PhasePoint& X) {
  return {{X.x + X.y, X.p + X.q}, {X.x - X.y, X.p - X.q}};
}

/// Inverse of chord_ends: phi = (z+ + z-)/2, xi = (z+ - z-)/2.
inline PhasePoint from_chord_ends(CanonicalPair plus, CanonicalPair minus) {
  return {0.5 * (plus.x + minus.x), 0.5 * (plus.x - minus.x), 0.5 * (plus.p + minus.p),
          0.5 * (plus.p - minus.p)};
}

}  // namespace xphase
