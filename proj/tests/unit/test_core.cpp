#include <gtest/gtest.h>

#include <random>

#include "hjd/core/extended_real.hpp"
#include "hjd/functionals/elementary.hpp"
#include "oracles.hpp"

using namespace hjd;

TEST(ExtendedReal, ArithmeticAndInfinity) {
  ExtendedReal a(2.0), b(-3.5);
  EXPECT_DOUBLE_EQ((a + b).value(), -1.5);
  ExtendedReal inf = ExtendedReal::infinity();
  EXPECT_TRUE((a + inf).is_infinite());
  EXPECT_EQ(inf.to_double(), std::numeric_limits<double>::infinity());
  EXPECT_THROW(ExtendedReal(std::nan("")), InvalidInput);
  EXPECT_THROW(ExtendedReal(-std::numeric_limits<double>::infinity()), InvalidInput);
  EXPECT_THROW((void)inf.value(), InvalidInput);
}

TEST(Errors, NonConvergenceCarriesBestIterate) {
  try {
    throw NonConvergence("budget", Vector::Ones(3), 0.5, 17);
  } catch (const NonConvergence& e) {
    EXPECT_EQ(e.iterations(), 17);
    EXPECT_DOUBLE_EQ(e.achieved_gap(), 0.5);
    EXPECT_EQ(e.best_iterate().size(), 3);
  }
}

TEST(Errors, RequireHelpers) {
  EXPECT_THROW(require_positive(0.0, "x"), InvalidInput);
  Vector v = Vector::Zero(2);
  v[1] = std::numeric_limits<double>::infinity();
  EXPECT_THROW(require_finite(v, "v"), InvalidInput);
}

// prox_{tau f}(z) + tau prox_{f*/tau}(z/tau) = z for every conjugate pair.
TEST(Elementary, MoreauIdentityOnClosedFormPairs) {
  std::mt19937_64 rng(3);
  const std::vector<ConvexFunctional> fs = {quadratic(0.7), l1_norm(1.3), linf_ball_indicator(0.4),
                                            weighted_l1((Vector(4) << 1, 0, 2, 0.5).finished())};
  for (const auto& f : fs) {
    ASSERT_NE(f.conjugate(), nullptr);
    for (int k = 0; k < 20; ++k) {
      const Vector z = oracle::random_vector(rng, 4, -3, 3);
      const double tau = 0.1 + 0.2 * k;
      const Vector a = f.prox(z, tau);
      const Vector b = f.conjugate()->prox(z / tau, 1.0 / tau);
      EXPECT_LE((a + tau * b - z).cwiseAbs().maxCoeff(), 1e-12) << f.name();
    }
  }
}

TEST(Elementary, FenchelYoungEqualityAtProx) {
  std::mt19937_64 rng(5);
  const ConvexFunctional f = l1_norm(2.0);
  for (int k = 0; k < 20; ++k) {
    const Vector z = oracle::random_vector(rng, 3, -4, 4);
    const Vector x = f.prox(z, 1.0);
    const Vector p = z - x;  // p in df(x)
    const double lhs = f.eval(x).value() + f.conjugate()->eval(p).value();
    EXPECT_NEAR(lhs, p.dot(x), 1e-12);
  }
}

TEST(Elementary, QuadraticFlagsAndConjugate) {
  const ConvexFunctional q = quadratic(4.0);
  EXPECT_TRUE(q.flags().strictly_convex);
  EXPECT_TRUE(q.flags().one_coercive);
  EXPECT_DOUBLE_EQ(q.strong_convexity(), 4.0);
  ASSERT_TRUE(q.quadratic_weight());
  const Vector p = (Vector(2) << 1, -2).finished();
  EXPECT_DOUBLE_EQ(q.conjugate()->eval(p).value(), p.squaredNorm() / 8.0);
  EXPECT_THROW(quadratic(0.0), InvalidInput);
}

TEST(Elementary, BoxIndicatorMembership) {
  const ConvexFunctional b = linf_ball_indicator(1.0);
  EXPECT_TRUE(b.eval((Vector(2) << 1.0, -0.3).finished()).is_finite());
  EXPECT_TRUE(b.eval((Vector(2) << 1.1, 0.0).finished()).is_infinite());
}

TEST(Elementary, AddQuadraticAndScaledTrackStrongConvexity) {
  const ConvexFunctional f = add_quadratic(l1_norm(), 0.3);
  EXPECT_DOUBLE_EQ(f.strong_convexity(), 0.3);
  const ConvexFunctional g = scaled(quadratic(2.0), 1.5);
  EXPECT_DOUBLE_EQ(g.strong_convexity(), 3.0);
  // prox of |x| + 0.3/2 x^2 with step 1 at z: soft threshold then shrink
  const Vector z = (Vector(2) << 2.6, -0.5).finished();
  const Vector x = f.prox(z, 1.0);
  EXPECT_NEAR(x[0], 1.6 / 1.3, 1e-12);
  EXPECT_NEAR(x[1], 0.0, 1e-15);
}

TEST(Elementary, TiltedShiftsValueProxAndConjugate) {
  const Vector c = (Vector(2) << 0.5, -1.0).finished();
  const ConvexFunctional f = tilted(quadratic(1.0), c, 2.0);
  const Vector x = (Vector(2) << 1.0, 3.0).finished();
  EXPECT_NEAR(f.eval(x).value(), 0.5 * x.squaredNorm() + c.dot(x) + 2.0, 1e-14);
  // f*(p) = 1/2 |p - c|^2 - 2
  const Vector p = (Vector(2) << 0.2, 0.7).finished();
  EXPECT_NEAR(f.conjugate()->eval(p).value(), 0.5 * (p - c).squaredNorm() - 2.0, 1e-14);
  // prox minimizes f(u) + |u - z|^2 / (2 tau)
  const Vector z = (Vector(2) << -1.0, 2.0).finished();
  const Vector u = f.prox(z, 0.5);
  EXPECT_LE((u + 0.5 * (u + c) - z).norm(), 1e-13);
}

TEST(Elementary, MoreauEnvelopeOfAbsIsHuber) {
  const ConvexFunctional e = moreau_envelope(l1_norm(), 0.5);
  for (double x : {-2.0, -0.3, 0.0, 0.1, 0.5, 3.0}) {
    const double expect = std::abs(x) <= 0.5 ? x * x / 1.0 : std::abs(x) - 0.25;
    EXPECT_NEAR(e.eval(Vector::Constant(1, x)).value(), expect, 1e-13) << x;
  }
}
