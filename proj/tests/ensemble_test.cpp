#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "xphase/ensemble.hpp"

namespace xphase {
namespace {

constexpr double pi = std::numbers::pi;

// P(|p| > |x|) for independent x ~ N(mx, sx^2), p ~ N(0, sp^2), by composite
// Simpson over x of the Gaussian density times P(|p| > |x|) = erfc(|x|/(sp sqrt2)).
double separatrix_quadrature(double mx, double sx, double sp) {
  const double lo = mx - 12 * sx, hi = mx + 12 * sx;
  const int n = 200000;
  const double h = (hi - lo) / n;
  auto f = [&](double x) {
    const double z = (x - mx) / sx;
    return std::exp(-0.5 * z * z) / (sx * std::sqrt(2 * pi)) *
           std::erfc(std::abs(x) / (sp * std::numbers::sqrt2));
  };
  double acc = f(lo) + f(hi);
  for (int i = 1; i < n; ++i) acc += f(lo + i * h) * (i % 2 ? 4.0 : 2.0);
  return acc * h / 3.0;
}

TEST(Ensemble, SamplerStatistics) {
  const std::size_t n = 100000;
  const auto g = sample_gaussian_wigner(0.0, 0.0, 1.0, 1.0, n, 7);
  const double tol = 5.0 / std::sqrt(static_cast<double>(n));
  const auto m = moments(g.samples);
  EXPECT_NEAR(m.mean_x, 0.0, tol);
  EXPECT_NEAR(m.mean_p, 0.0, tol);
  EXPECT_NEAR(m.cov_xx, 1.0, tol);
  EXPECT_NEAR(m.cov_pp, 1.0, tol);
  EXPECT_NEAR(m.cov_xp, 0.0, tol);
  EXPECT_NEAR(total_weight(g.samples), 1.0, 1e-12);
  for (const auto& s : g.samples) EXPECT_GT(s.weight, 0.0);
}

TEST(Ensemble, SamplerIsSeeded) {
  const auto a = sample_gaussian_wigner(0.5, -0.2, 0.3, 0.7, 100, 99);
  const auto b = sample_gaussian_wigner(0.5, -0.2, 0.3, 0.7, 100, 99);
  const auto c = sample_gaussian_wigner(0.5, -0.2, 0.3, 0.7, 100, 100);
  for (std::size_t i = 0; i < 100; ++i) {
    EXPECT_EQ(a.samples[i].x, b.samples[i].x);
    EXPECT_EQ(a.samples[i].p, b.samples[i].p);
  }
  EXPECT_NE(a.samples[0].x, c.samples[0].x);
  EXPECT_THROW(sample_gaussian_wigner(0, 0, 1, 1, 0, 1), usage_error);
  EXPECT_THROW(sample_gaussian_wigner(0, 0, -1, 1, 10, 1), usage_error);
}

TEST(Ensemble, UncertaintyMetadata) {
  const auto g = sample_gaussian_wigner(0, 0, 1 / std::numbers::sqrt2, 1 / std::numbers::sqrt2, 1, 1);
  EXPECT_NEAR(g.uncertainty_product(), 0.5, 1e-15);
  EXPECT_TRUE(g.admissible(1.0));
  EXPECT_FALSE(g.admissible(1.1));
}

TEST(Ensemble, TransportShoPeriodAndFreeFlight) {
  const auto g = sample_gaussian_wigner(0.3, -0.1, 0.5, 0.5, 200, 3);
  const ExtendedSystem sho(Potential::harmonic(), Flavor::ClassicalReal);
  const auto back = transport(g.samples, sho, 2 * pi, {});
  for (std::size_t i = 0; i < back.size(); ++i) {
    EXPECT_NEAR(back[i].x, g.samples[i].x, 1e-8);
    EXPECT_NEAR(back[i].p, g.samples[i].p, 1e-8);
    EXPECT_EQ(back[i].weight, g.samples[i].weight);
  }
  const ExtendedSystem free(Potential({0.0}), Flavor::ClassicalReal);
  const auto moved = transport(g.samples, free, 1.0, {});
  for (std::size_t i = 0; i < moved.size(); ++i)
    EXPECT_NEAR(moved[i].x, g.samples[i].x + g.samples[i].p, 1e-12);
  EXPECT_EQ(total_weight(moved), total_weight(g.samples));
  EXPECT_THROW(transport(g.samples, ExtendedSystem(Potential::harmonic(), Flavor::MFQM), 1.0, {}),
               usage_error);
}

// For quadratic potentials the flow is linear, so transported moments must
// equal the exact linear image of the initial moments.
TEST(EnsembleProperty, QuadraticMomentsFollowLinearFlow) {
  const auto g = sample_gaussian_wigner(-1.0, 0.5, 0.7, 0.7, 2000, 5);
  const auto m0 = moments(g.samples);
  for (double t : {0.7, 2.0, 5.3}) {
    // Rotation for the SHO, written out independently of quadratic_flow.
    const ExtendedSystem sho(Potential::harmonic(), Flavor::ClassicalReal);
    const auto m = moments(transport(g.samples, sho, t, {}));
    const double c = std::cos(t), s = std::sin(t);
    EXPECT_NEAR(m.mean_x, c * m0.mean_x + s * m0.mean_p, 1e-6);
    EXPECT_NEAR(m.mean_p, -s * m0.mean_x + c * m0.mean_p, 1e-6);
    EXPECT_NEAR(m.cov_xx, c * c * m0.cov_xx + 2 * c * s * m0.cov_xp + s * s * m0.cov_pp, 1e-6);
    EXPECT_NEAR(m.cov_pp, s * s * m0.cov_xx - 2 * c * s * m0.cov_xp + c * c * m0.cov_pp, 1e-6);

    const ExtendedSystem inv(Potential::inverted_harmonic(), Flavor::ClassicalReal);
    const auto mi = moments(transport(g.samples, inv, t, {}));
    const auto want = push_moments(m0, quadratic_flow(-1.0, 1.0, t));
    const double scale = std::cosh(2 * t);
    EXPECT_NEAR(mi.mean_x, want.mean_x, 1e-6 * scale);
    EXPECT_NEAR(mi.mean_p, want.mean_p, 1e-6 * scale);
    EXPECT_NEAR(mi.cov_xx, want.cov_xx, 1e-6 * scale);
    EXPECT_NEAR(mi.cov_xp, want.cov_xp, 1e-6 * scale);
    EXPECT_NEAR(mi.cov_pp, want.cov_pp, 1e-6 * scale);
  }
}

TEST(Ensemble, SeparatrixFractionExamples) {
  const ExtendedSystem inv(Potential::inverted_harmonic(), Flavor::ClassicalReal);
  EXPECT_EQ(separatrix_fraction({{-3, 0, 0.5}, {-3, 0, 0.5}}, inv), 0.0);
  EXPECT_EQ(separatrix_fraction({{0, 1, 1.0}}, inv), 1.0);
  EXPECT_EQ(separatrix_fraction({{0, 1, 1.0}, {-3, 0, 3.0}}, inv), 0.25);
  const ExtendedSystem sho(Potential::harmonic(), Flavor::ClassicalReal);
  EXPECT_THROW(separatrix_fraction({{0, 1, 1.0}}, sho), usage_error);
}

TEST(Ensemble, SeparatrixFractionMatchesQuadrature) {
  const double s = 1.0 / std::numbers::sqrt2;
  const double oracle = separatrix_quadrature(-3.0, s, s);
  // Frozen from an independent 2D adaptive quadrature of the same integral.
  EXPECT_NEAR(oracle, 0.00269615, 1e-8);
  const std::size_t n = 100000;
  const auto g = sample_gaussian_wigner(-3.0, 0.0, s, s, n, 2024);
  const ExtendedSystem inv(Potential::inverted_harmonic(), Flavor::ClassicalReal);
  EXPECT_NEAR(separatrix_fraction(g.samples, inv), oracle, 3.0 / std::sqrt(double(n)));
}

TEST(EnsembleProperty, SeparatrixFractionGrowsWithMomentumSpread) {
  const ExtendedSystem inv(Potential::inverted_harmonic(), Flavor::ClassicalReal);
  double prev = -1.0;
  for (double sp : {0.25, 0.5, 1.0, 2.0, 4.0}) {
    const auto g = sample_gaussian_wigner(-3.0, 0.0, 0.7, sp, 20000, 17);
    const double f = separatrix_fraction(g.samples, inv);
    EXPECT_GE(f, prev) << "sigma_p=" << sp;
    prev = f;
  }
  EXPECT_GT(prev, 0.3);
}

}  // namespace
}  // namespace xphase
