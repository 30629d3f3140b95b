#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "test_support.hpp"
#include "xphase/dynamics.hpp"
#include "xphase/hamiltonians.hpp"

namespace xphase {
namespace {

using testing::catalogue;
using testing::fd_gradient;
using testing::gradient_rel_error;
using testing::random_point;

ExtendedSystem mfqm(Potential v) { return {std::move(v), Flavor::MFQM}; }
ExtendedSystem ccm(Potential v) { return {std::move(v), Flavor::CCM}; }
ExtendedSystem real(Potential v) { return {std::move(v), Flavor::ClassicalReal}; }

TEST(Hamiltonians, SystemValidation) {
  EXPECT_THROW(ExtendedSystem(Potential::harmonic(), Flavor::MFQM, 0.0), usage_error);
  EXPECT_THROW(ExtendedSystem(Potential::harmonic(), Flavor::MFQM, 1.0, -1.0), usage_error);
}

TEST(Hamiltonians, ClassicalExamples) {
  const auto sho = real(Potential::harmonic());
  EXPECT_DOUBLE_EQ(h_classical(sho, 1.0, 0.0), 0.5);
  const auto dw = real(Potential::double_well());
  EXPECT_DOUBLE_EQ(h_classical(dw, 0.7, 0.0), Potential::double_well().eval_real(0.7));
  EXPECT_DOUBLE_EQ(h_classical(dw, 0.0, 2.0), 3.0);
}

TEST(Hamiltonians, HPlusExamples) {
  const auto sho = mfqm(Potential::harmonic());
  EXPECT_DOUBLE_EQ(h_plus(sho, {1, 0, 0, 0}).value, 0.5);
  EXPECT_DOUBLE_EQ(h_plus(sho, {1, 1, 1, 1}).value, 2.0);
  EXPECT_DOUBLE_EQ(h_plus(mfqm(Potential::double_well()), {0, 1, 0, 0}).value, 0.0);
  EXPECT_THROW(h_plus(ccm(Potential::harmonic()), {}), usage_error);
}

TEST(Hamiltonians, HMinusExamples) {
  const auto dw = mfqm(Potential::double_well());
  EXPECT_DOUBLE_EQ(h_minus(dw, {0.3, 0, -1.2, 0}).value, 0.0);
  const auto sho = mfqm(Potential::harmonic());
  EXPECT_DOUBLE_EQ(h_minus(sho, {1, 0.5, 0, 0}).value, 0.5);
  EXPECT_DOUBLE_EQ(h_minus(sho, {1, 2, 3, 4}).value, 14.0);
  EXPECT_THROW(h_minus(real(Potential::harmonic()), {}), usage_error);
}

TEST(Hamiltonians, CcmExamples) {
  const auto sho = ccm(Potential::harmonic());
  EXPECT_DOUBLE_EQ(h_real(sho, {1, 0, 0, 0}).value, 0.5);
  EXPECT_DOUBLE_EQ(h_imag(sho, {1, 0, 0, 0}).value, 0.0);
  EXPECT_DOUBLE_EQ(h_real(sho, {1, 1, 1, 1}).value, 0.0);
  EXPECT_DOUBLE_EQ(h_imag(sho, {1, 2, 3, 4}).value, -10.0);
  EXPECT_THROW(h_real(mfqm(Potential::harmonic()), {}), usage_error);
  EXPECT_THROW(h_imag(mfqm(Potential::harmonic()), {}), usage_error);
}

TEST(Hamiltonians, BracketExamples) {
  const GradedValue x{0.0, {1, 0, 0, 0}};
  const GradedValue y{0.0, {0, 1, 0, 0}};
  const GradedValue p{0.0, {0, 0, 1, 0}};
  const GradedValue q{0.0, {0, 0, 0, 1}};
  EXPECT_EQ(poisson_bracket(x, p), 1.0);
  EXPECT_EQ(poisson_bracket(y, q), 1.0);
  EXPECT_EQ(poisson_bracket(x, y), 0.0);
  EXPECT_EQ(poisson_bracket(x, q), 0.0);
  EXPECT_EQ(poisson_bracket(p, x), -1.0);
}

TEST(Hamiltonians, VectorFieldExamples) {
  EXPECT_EQ(vector_field(mfqm(Potential::harmonic()), {1, 0, 0, 0}), (PhasePoint{0, 0, -1, 0}));
  EXPECT_EQ(vector_field(ccm(Potential::harmonic()), {0, 1, 0, 0}), (PhasePoint{0, 0, 0, 1}));
  EXPECT_EQ(vector_field(real(Potential({0.0})), {0, 0, 1, 0}), (PhasePoint{1, 0, 0, 0}));
}

TEST(Hamiltonians, ChordEnds) {
  const auto c = chord_ends({1, 0.5, 0, 0});
  EXPECT_EQ(c.plus, (CanonicalPair{1.5, 0}));
  EXPECT_EQ(c.minus, (CanonicalPair{0.5, 0}));
  const auto d = chord_ends({0.3, 0, -0.7, 0});
  EXPECT_EQ(d.plus, d.minus);
  EXPECT_EQ(from_chord_ends(c.plus, c.minus), (PhasePoint{1, 0.5, 0, 0}));
}

TEST(Hamiltonians, StructureMatrices) {
  using namespace structure;
  EXPECT_TRUE(is_antisymmetric(omega));
  const Mat4 o2 = multiply(omega, omega);
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j) EXPECT_EQ(o2[i][j], i == j ? -1.0 : 0.0);
  EXPECT_TRUE(is_antisymmetric(multiply(omega, gamma)));
  EXPECT_TRUE(is_antisymmetric(multiply(omega, lambda)));
  // Canonical pairing: x <-> p and y <-> q, nothing else.
  EXPECT_EQ(omega[0][2], 1.0);
  EXPECT_EQ(omega[1][3], 1.0);
  EXPECT_EQ(omega[0][1], 0.0);
  EXPECT_EQ(omega[0][3], 0.0);
  EXPECT_EQ(omega2[0][1], 1.0);
  EXPECT_EQ(omega2[1][0], -1.0);
}

TEST(Hamiltonians, GammaLambdaRelations) {
  std::mt19937_64 rng(21);
  for (int i = 0; i < 50; ++i) {
    const auto X = random_point(rng);
    EXPECT_LT(check_gamma_relation(mfqm(Potential::harmonic()), X), 1e-12);
    EXPECT_LT(check_lambda_relation(ccm(Potential::harmonic()), X), 1e-12);
    EXPECT_LT(check_gamma_relation(mfqm(Potential::double_well()), X), 1e-10);
    EXPECT_LT(check_lambda_relation(ccm(Potential::double_well()), X), 1e-10);
    EXPECT_EQ(check_gamma_relation(mfqm(Potential({2.0})), X), 0.0);
    EXPECT_EQ(check_lambda_relation(ccm(Potential({2.0})), X), 0.0);
  }
}

TEST(Hamiltonians, ComplexificationIdentity) {
  const auto r = complexification_identity(mfqm(Potential::harmonic()),
                                           ccm(Potential::harmonic()), {1, 1, 1, 1});
  EXPECT_LT(r.plus, 1e-15);
  EXPECT_LT(r.minus, 1e-15);
  const auto dw_m = mfqm(Potential::double_well());
  const auto dw_c = ccm(Potential::double_well());
  const auto s = complexification_identity(dw_m, dw_c, {0.4, 0, -0.3, 0});
  EXPECT_EQ(s.plus, 0.0);
  EXPECT_EQ(s.minus, 0.0);
  std::mt19937_64 rng(22);
  for (int i = 0; i < 100; ++i) {
    const auto X = random_point(rng);
    const auto t = complexification_identity(dw_m, dw_c, X);
    EXPECT_LT(t.plus, 1e-10);
    EXPECT_LT(t.minus, 1e-10);
  }
  EXPECT_THROW(complexification_identity(dw_m, ccm(Potential::harmonic()), {}), usage_error);
}

TEST(HamiltoniansProperty, GradientsMatchFiniteDifferences) {
  std::mt19937_64 rng(23);
  for (const auto& v : catalogue()) {
    const auto m = mfqm(v), c = ccm(v), r = real(v);
    for (int i = 0; i < 100; ++i) {
      const auto X = random_point(rng);
      auto check = [&](const ExtendedSystem& sys, GradedValue (*fn)(const ExtendedSystem&,
                                                                    const PhasePoint&)) {
        const auto fd = fd_gradient([&](const PhasePoint& P) { return fn(sys, P).value; }, X);
        EXPECT_LT(gradient_rel_error(fn(sys, X).gradient, fd), 1e-5);
      };
      check(m, h_plus);
      check(m, h_minus);
      check(c, h_real);
      check(c, h_imag);
      check(r, generator);
    }
  }
}

TEST(HamiltoniansProperty, ConstraintsCommuteWithGenerators) {
  std::mt19937_64 rng(24);
  for (const auto& v : catalogue()) {
    const auto m = mfqm(v), c = ccm(v);
    for (int i = 0; i < 100; ++i) {
      const auto X = random_point(rng);
      EXPECT_LT(std::abs(poisson_bracket(h_minus(m, X), h_plus(m, X))), 1e-10);
      EXPECT_LT(std::abs(poisson_bracket(h_imag(c, X), h_real(c, X))), 1e-10);
    }
  }
}

TEST(HamiltoniansProperty, VectorFieldIsOmegaGradient) {
  std::mt19937_64 rng(25);
  for (const auto& v : catalogue()) {
    for (Flavor f : {Flavor::MFQM, Flavor::CCM}) {
      const ExtendedSystem sys(v, f, 1.7);
      for (int i = 0; i < 20; ++i) {
        const auto X = random_point(rng);
        const Vec4 want = mat_vec(structure::omega, generator(sys, X).gradient);
        const Vec4 got = vector_field(sys, X).to_array();
        for (std::size_t a = 0; a < 4; ++a) EXPECT_NEAR(got[a], want[a], 1e-12);
      }
    }
  }
}

TEST(HamiltoniansProperty, RealSliceReduction) {
  std::mt19937_64 rng(26);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (const auto& v : catalogue()) {
    const auto r = real(v);
    for (int i = 0; i < 50; ++i) {
      const PhasePoint X{u(rng), 0.0, u(rng), 0.0};
      const auto fr = vector_field(r, X);
      for (const auto& sys : {mfqm(v), ccm(v)}) {
        const auto f = vector_field(sys, X);
        EXPECT_EQ(f.x, fr.x);
        EXPECT_EQ(f.p, fr.p);
        EXPECT_EQ(f.y, 0.0);
        EXPECT_EQ(f.q, 0.0);
      }
    }
  }
}

// H+ for a quadratic potential separates into H_cl(x, p) + H_cl(y, q), so the
// (x, p) motion cannot depend on the (y, q) data.
TEST(HamiltoniansProperty, QuadraticCoincidenceDecouples) {
  std::mt19937_64 rng(27);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  IntegratorConfig cfg;
  for (const auto& v : {Potential::harmonic(), Potential::inverted_harmonic()}) {
    const auto sys = mfqm(v);
    const auto cl = real(v);
    for (int i = 0; i < 20; ++i) {
      const auto X = random_point(rng, -1.0, 1.0);
      EXPECT_NEAR(h_plus(sys, X).value,
                  h_classical(cl, X.x, X.p) + h_classical(cl, X.y, X.q), 1e-13);
    }
    const PhasePoint a{0.3, 0.0, -0.2, 0.0};
    const PhasePoint b{0.3, u(rng), -0.2, u(rng)};
    const auto ea = propagate(sys, a, 0.0, 3.0, cfg).point;
    const auto eb = propagate(sys, b, 0.0, 3.0, cfg).point;
    EXPECT_NEAR(ea.x, eb.x, 1e-8);
    EXPECT_NEAR(ea.p, eb.p, 1e-8);
  }
}

}  // namespace
}  // namespace xphase

namespace xphase {
namespace {

TEST(HamiltoniansProperty, IdentityBatteryIsSeededAndSmall) {
  for (const auto& v : catalogue()) {
    const auto a = identity_battery(v, 1.3, 200, 2.0, 9);
    const auto b = identity_battery(v, 1.3, 200, 2.0, 9);
    EXPECT_EQ(a.worst_identity(), b.worst_identity());
    EXPECT_EQ(a.gradient, b.gradient);
    EXPECT_LT(a.worst_identity(), 1e-10);
    EXPECT_LT(a.gradient, 1e-5);
    EXPECT_EQ(a.points, 200u);
  }
  EXPECT_THROW(identity_battery(Potential::harmonic(), 1.0, 0, 2.0, 1), usage_error);
  EXPECT_THROW(identity_battery(Potential::harmonic(), 1.0, 10, 0.0, 1), usage_error);
}

}  // namespace
}  // namespace xphase
