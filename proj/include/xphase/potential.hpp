#pragma once

// Real polynomial potentials V(x) = sum_k c_k x^k with exact derivatives and
// analytic continuation to complex argument.

#include <algorithm>
#include <complex>
#include <cstddef>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "errors.hpp"

namespace xphase {

enum class PotentialKind { Harmonic, InvertedHarmonic, DoubleWell, Custom };

inline std::string_view to_string(PotentialKind k) {
  switch (k) {
    case PotentialKind::Harmonic: return "harmonic";
    case PotentialKind::InvertedHarmonic: return "inverted_harmonic";
    case PotentialKind::DoubleWell: return "double_well";
    case PotentialKind::Custom: return "custom";
  }
  return "custom";
}

class Potential {
 public:
  static constexpr std::size_t max_degree = 8;

  /// Trailing zero coefficients are trimmed so that the stored degree is the
  /// degree of the highest nonzero term. An empty list is the zero polynomial.
  explicit Potential(std::vector<double> coefficients,
                     PotentialKind kind = PotentialKind::Custom)
      : coeffs_(std::move(coefficients)), kind_(kind) {
    for (double c : coeffs_) detail::require_finite(c, "potential coefficient");
    while (coeffs_.size() > 1 && coeffs_.back() == 0.0) coeffs_.pop_back();
    if (coeffs_.empty()) coeffs_.push_back(0.0);
    if (coeffs_.size() > max_degree + 1)
      throw usage_error("potential degree exceeds " + std::to_string(max_degree));
  }

  /// V(x) = k x^2 / 2.
  static Potential harmonic(double stiffness = 1.0) {
    return Potential({0.0, 0.0, 0.5 * stiffness}, PotentialKind::Harmonic);
  }

  /// V(x) = -k x^2 / 2; the barrier top sits at x = 0 with V = 0.
  static Potential inverted_harmonic(double stiffness = 1.0) {
    return Potential({0.0, 0.0, -0.5 * stiffness}, PotentialKind::InvertedHarmonic);
  }

  /// V(x) = E0 (x^2/a^2 - 1)^2: wells at +-a, barrier height E0 at x = 0.
  static Potential double_well(double barrier = 1.0, double well = 1.0) {
    if (!(barrier > 0.0) || !(well > 0.0))
      throw usage_error("double well needs positive barrier and well position");
    const double a2 = well * well;
    return Potential({barrier, 0.0, -2.0 * barrier / a2, 0.0, barrier / (a2 * a2)},
                     PotentialKind::DoubleWell);
  }

  const std::vector<double>& coefficients() const noexcept { return coeffs_; }
  std::size_t degree() const noexcept { return coeffs_.size() - 1; }
  PotentialKind kind() const noexcept { return kind_; }

  /// Horner evaluation for any field type (double, std::complex<double>).
  template <typename T>
  T operator()(const T& x) const {
    T acc(coeffs_.back());
    for (std::size_t k = coeffs_.size() - 1; k-- > 0;) acc = acc * x + T(coeffs_[k]);
    return acc;
  }

  double eval_real(double x) const {
    detail::require_finite(x, "potential argument");
    return (*this)(x);
  }

  std::complex<double> eval_complex(std::complex<double> z) const {
    detail::require_finite(z.real(), "potential argument (real part)");
    detail::require_finite(z.imag(), "potential argument (imaginary part)");
    return (*this)(z);
  }

  Potential derivative() const {
    if (coeffs_.size() == 1) return Potential({0.0});
    std::vector<double> d(coeffs_.size() - 1);
    for (std::size_t k = 1; k < coeffs_.size(); ++k)
      d[k - 1] = static_cast<double>(k) * coeffs_[k];
    return Potential(std::move(d));
  }

  /// Confining on the whole real line: even degree with positive leading term.
  bool confining() const noexcept {
    return degree() >= 2 && degree() % 2 == 0 && coeffs_.back() > 0.0;
  }

 private:
  std::vector<double> coeffs_;
  PotentialKind kind_;
};

}  // namespace xphase
