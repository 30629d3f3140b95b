#pragma once

// Phase-space densities carried by weighted samples and transported along
// real classical characteristics. Transport moves points and never touches
// weights (Liouville incompressibility), which makes it exact for quadratic
// potentials where the Wigner function also evolves classically.

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "dynamics.hpp"
#include "errors.hpp"
#include "hamiltonians.hpp"

namespace xphase {

struct WeightedSample {
  double x = 0.0;
  double p = 0.0;
  double weight = 0.0;
};

struct MomentSummary {
  double mean_x = 0.0, mean_p = 0.0;
  double cov_xx = 0.0, cov_xp = 0.0, cov_pp = 0.0;
};

struct GaussianWigner {
  std::vector<WeightedSample> samples;
  double sigma_x = 0.0;
  double sigma_p = 0.0;
  std::uint64_t seed = 0;

  double uncertainty_product() const { return sigma_x * sigma_p; }
  /// sigma_x sigma_p >= hbar/2, i.e. a physical Wigner function.
  bool admissible(double hbar) const {
    return uncertainty_product() >= 0.5 * hbar * (1.0 - 1e-12);
  }
};

/// Draws n points from the Gaussian Wigner function centred at (x0, p0).
/// Weights are 1/n. Uses mt19937_64, so the draw is fixed by the seed.
inline GaussianWigner sample_gaussian_wigner(double x0, double p0, double sigma_x, double sigma_p,
                                             std::size_t n, std::uint64_t seed) {
  if (n == 0) throw usage_error("ensemble sample count must be positive");
  if (!(sigma_x > 0.0) || !(sigma_p > 0.0))
    throw usage_error("ensemble widths sigma_x and sigma_p must be positive");
  detail::require_finite(x0, "ensemble centre x");
  detail::require_finite(p0, "ensemble centre p");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gx(x0, sigma_x), gp(p0, sigma_p);
  GaussianWigner out{{}, sigma_x, sigma_p, seed};
  out.samples.reserve(n);
  const double w = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = gx(rng);
    out.samples.push_back({x, gp(rng), w});
  }
  return out;
}

/// Neumaier-compensated sum of the weights.
inline double total_weight(const std::vector<WeightedSample>& s) {
  double acc = 0.0, comp = 0.0;
  for (const auto& v : s) {
    const double t = acc + v.weight;
    comp += std::abs(acc) >= std::abs(v.weight) ? (acc - t) + v.weight : (v.weight - t) + acc;
    acc = t;
  }
  return acc + comp;
}

inline MomentSummary moments(const std::vector<WeightedSample>& s) {
  const double w = total_weight(s);
  if (s.empty() || w == 0.0) throw usage_error("moments of an empty ensemble");
  MomentSummary m;
  for (const auto& v : s) {
    m.mean_x += v.weight * v.x;
    m.mean_p += v.weight * v.p;
  }
  m.mean_x /= w;
  m.mean_p /= w;
  for (const auto& v : s) {
    const double dx = v.x - m.mean_x, dp = v.p - m.mean_p;
    m.cov_xx += v.weight * dx * dx;
    m.cov_xp += v.weight * dx * dp;
    m.cov_pp += v.weight * dp * dp;
  }
  m.cov_xx /= w;
  m.cov_xp /= w;
  m.cov_pp /= w;
  return m;
}

/// Advances every sample along the real classical flow for time t.
inline std::vector<WeightedSample> transport(const std::vector<WeightedSample>& samples,
                                             const ExtendedSystem& sys, double t,
                                             const IntegratorConfig& cfg) {
  if (sys.flavor() != Flavor::ClassicalReal)
    throw usage_error("transport requires flavor classical");
  if (t == 0.0) return samples;
  std::vector<WeightedSample> out = samples;
  for (std::size_t i = 0; i < out.size(); ++i) {
    const auto end = propagate(sys, {out[i].x, 0.0, out[i].p, 0.0}, 0.0, t, cfg);
    if (end.termination != Termination::Completed)
      throw numeric_error("transport: sample " + std::to_string(i) + " terminated with " +
                          std::string(to_string(end.termination)));
    out[i].x = end.point.x;
    out[i].p = end.point.p;
  }
  return out;
}

/// Weighted fraction of samples above the separatrix of V = -k x^2/2, i.e.
/// with H_cl(x, p) > 0: these surmount the barrier, the rest rebound.
inline double separatrix_fraction(const std::vector<WeightedSample>& samples,
                                  const ExtendedSystem& sys) {
  if (sys.potential().kind() != PotentialKind::InvertedHarmonic)
    throw usage_error("separatrix_fraction requires an inverted_harmonic potential");
  const double w = total_weight(samples);
  if (samples.empty() || w == 0.0) throw usage_error("separatrix_fraction of an empty ensemble");
  const double k = -2.0 * sys.potential().coefficients()[2];
  double above = 0.0;
  for (const auto& s : samples)
    if (s.p * s.p - sys.mass() * k * s.x * s.x > 0.0) above += s.weight;
  return above / w;
}

/// Linear map of (x, p) over time t for a quadratic potential V = k x^2/2
/// (k may be negative): rotation for k > 0, hyperbolic shear for k < 0.
struct LinearFlow {
  double a = 1, b = 0, c = 0, d = 1;  // [[a, b], [c, d]]
};

inline LinearFlow quadratic_flow(double stiffness, double mass, double t) {
  if (stiffness > 0.0) {
    const double w = std::sqrt(stiffness / mass);
    return {std::cos(w * t), std::sin(w * t) / (mass * w), -mass * w * std::sin(w * t),
            std::cos(w * t)};
  }
  if (stiffness < 0.0) {
    const double g = std::sqrt(-stiffness / mass);
    return {std::cosh(g * t), std::sinh(g * t) / (mass * g), mass * g * std::sinh(g * t),
            std::cosh(g * t)};
  }
  return {1.0, t / mass, 0.0, 1.0};
}

/// Pushforward of first and second moments through a linear flow.
inline MomentSummary push_moments(const MomentSummary& m, const LinearFlow& f) {
  MomentSummary r;
  r.mean_x = f.a * m.mean_x + f.b * m.mean_p;
  r.mean_p = f.c * m.mean_x + f.d * m.mean_p;
  r.cov_xx = f.a * f.a * m.cov_xx + 2 * f.a * f.b * m.cov_xp + f.b * f.b * m.cov_pp;
  r.cov_xp = f.a * f.c * m.cov_xx + (f.a * f.d + f.b * f.c) * m.cov_xp + f.b * f.d * m.cov_pp;
  r.cov_pp = f.c * f.c * m.cov_xx + 2 * f.c * f.d * m.cov_xp + f.d * f.d * m.cov_pp;
  return r;
}

}  // namespace xphase
