#include <gtest/gtest.h>

#include "hjd/functionals/elementary.hpp"
#include "hjd/functionals/tv_functionals.hpp"
#include "hjd/selection/selection.hpp"
#include "oracles.hpp"

using namespace hjd;

// Quadratic part lambda/2 |v|^2 + |v + w|^2/(2 mu) has Hessian
// [[lambda + 1/mu, 1/mu], [1/mu, 1/mu]].
TEST(Selection, StrongConvexityIsSmallestEigenvalue) {
  for (double lambda : {1e-4, 0.01, 0.3, 2.0})
    for (double mu : {1e-3, 0.1, 1.0, 5.0}) {
      const double expect = oracle::min_eig2(lambda + 1.0 / mu, 1.0 / mu, 1.0 / mu);
      EXPECT_NEAR(select_strong_convexity(lambda, mu), expect, 1e-12 * (1.0 + 1.0 / mu)) << lambda << " " << mu;
    }
}

TEST(Selection, AitkenRecoversGeometricLimit) {
  const Vector lim = (Vector(3) << 1.0, -2.0, 0.5).finished();
  const Vector d = (Vector(3) << 0.3, 0.1, 0.0).finished();
  Index fb = -1;
  const Vector out = aitken_limit(lim + d, lim + 0.5 * d, lim + 0.25 * d, &fb);
  EXPECT_EQ(fb, 0);
  EXPECT_LE((out - lim).cwiseAbs().maxCoeff(), 1e-14);
  // oscillating coordinate keeps the last iterate
  const Vector a = Vector::Constant(1, 0.0), b = Vector::Constant(1, 1.0), c = Vector::Constant(1, 0.0);
  EXPECT_EQ(aitken_limit(a, b, c, &fb)[0], 0.0);
  EXPECT_EQ(fb, 1);
}

TEST(Selection, ScheduleValidation) {
  EXPECT_NO_THROW(SelectionSchedule::standard(2.0).validate());
  EXPECT_EQ(SelectionSchedule::standard().lambda.size(), 13u);
  EXPECT_THROW(SelectionSchedule::geometric(1, 1, 1.0, 3), InvalidInput);
  SelectionSchedule s;
  s.lambda = {0.1, 0.05, 0.025};
  s.mu = {0.1, 0.1, 0.1};  // ratio still moving
  EXPECT_THROW(s.validate(), InvalidInput);
  s.mu = {0.1, 0.2, 0.1};
  EXPECT_THROW(s.validate(), InvalidInput);
}

TEST(Selection, MinNormOverSegment) {
  const Vector u1 = (Vector(2) << 1, 0).finished(), u2 = (Vector(2) << 0, 1).finished();
  const Vector m = min_norm_over_segment(u1, u2);
  EXPECT_NEAR(m[0], 0.5, 1e-15);
  EXPECT_NEAR(m[1], 0.5, 1e-15);
  EXPECT_EQ(min_norm_over_segment(u1, u1), u1);
  // projection of the origin clamps to an endpoint
  const Vector far = (Vector(2) << 2, 2).finished();
  EXPECT_EQ(min_norm_over_segment(u1, far), u1);
}

// F1 = 0 and F2* = |.|^2/2: the (v, w) problem is quadratic with closed form.
TEST(Selection, QuadraticCaseMatchesClosedForm) {
  const Vector x = (Vector(3) << 1.0, -2.0, 0.5).finished();
  const DegenerateProblem dp{zero_functional(), quadratic(), x};
  const double lambda = 0.3, mu = 0.2;
  SelectOptions o;
  o.tol = 1e-14;
  const SelectResult r = select_solve(dp, lambda, mu, o);
  // stationarity: lambda v = p, w = p with p = (x - v - w)/mu
  // => v = x / (1 + lambda + lambda mu)
  const Vector v = x / (1.0 + lambda + lambda * mu);
  EXPECT_LE((r.v - v).cwiseAbs().maxCoeff(), 1e-7);
  EXPECT_LE((r.w - lambda * v).cwiseAbs().maxCoeff(), 1e-7);
}

TEST(Selection, SmallRectanglePathApproachesMinNormSelection) {
  const RectangleCase rc = tvl1_rectangle_case(8, 2, 2, 1.0, 0.0);
  TvSettings ts;
  const DegenerateProblem dp{tv_functional(8, 8, rc.alpha, ts), l1_norm(1.0), rc.x.values()};
  const SelectionPath path = selection_path(dp, SelectionSchedule::geometric(0.1, 0.1, 0.5, 13), 2e-4);
  EXPECT_TRUE(path.converged);
  const Vector target = min_norm_over_segment(rc.u1.values(), rc.u2.values());
  EXPECT_LE((path.v_bar - target).norm(), 1e-2 * 8.0);
  // the limit lies on the TV-L1 minimizer set
  EXPECT_NEAR(tvl1_objective(rc.x, path.v_bar, rc.alpha), tvl1_objective(rc.x, rc.u1.values(), rc.alpha), 1e-3);
}
