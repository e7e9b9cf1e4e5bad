#include <gtest/gtest.h>

#include "hjd/functionals/elementary.hpp"
#include "hjd/limits/limits.hpp"

using namespace hjd;

namespace {

LimitTable r1_table(double v, int K = 14) {
  SequenceSpec spec;
  spec.x = Vector::Zero(1);
  spec.v = {Vector::Constant(1, v)};
  spec.alpha = {1.0};
  spec.fast = {false};
  const MultiTimeProblem prob{l1_norm(), {{quadratic(), quadratic(), 1.0}}};
  return run_limit_experiment(spec, prob, K);
}

}  // namespace

TEST(SlopeEstimate, GeometricTail) {
  std::vector<double> a;
  for (int k = 0; k < 8; ++k) a.push_back(2.0 + 0.7 * std::pow(0.5, k));
  const SlopeEstimate s = slope_estimate(a);
  EXPECT_NEAR(s.limit, 2.0, 1e-12);
  EXPECT_NEAR(s.order, 1.0, 1e-9);
  EXPECT_FALSE(s.low_confidence);
}

TEST(SlopeEstimate, ConstantAndShortSequences) {
  const SlopeEstimate s = slope_estimate({3, 3, 3, 3});
  EXPECT_TRUE(s.degenerate);
  EXPECT_EQ(s.limit, 3.0);
  EXPECT_THROW(slope_estimate({1, 2, 3}), InvalidInput);
  EXPECT_TRUE(slope_estimate({0, 1, 0, 1, 0}).low_confidence);
}

// J = |x|, H = |p|^2/2 at x = 0: the ratio tends to max_{|q|<=1} qv - q^2/2.
TEST(Limit, OneDimensionalL1) {
  const LimitTable big = r1_table(2.0);
  ASSERT_TRUE(big.complete);
  ASSERT_EQ(big.rows.size(), 14u);
  EXPECT_NEAR(big.ratio_estimate.limit, 1.5, 1e-6);
  EXPECT_NEAR(big.rows.back().p[0], 1.0, 1e-6);
  const LimitTable small = r1_table(0.5);
  EXPECT_NEAR(small.ratio_estimate.limit, 0.125, 1e-6);
}

TEST(Limit, SpecValidation) {
  SequenceSpec spec;
  spec.x = Vector::Zero(1);
  spec.v = {Vector::Constant(1, 1.0)};
  spec.alpha = {0.5};
  spec.fast = {false};
  EXPECT_THROW(spec.validate(), InvalidInput);
  spec.alpha = {1.0};
  spec.sigma0 = 1.5;
  EXPECT_THROW(spec.validate(), InvalidInput);
  spec.sigma0 = 0.1;
  spec.fast = {true};
  EXPECT_THROW(spec.validate(), InvalidInput);
}

TEST(Limit, FastTermTimesAreSquares) {
  SequenceSpec spec;
  spec.x = Vector::Zero(2);
  spec.v = {Vector::Ones(2), Vector::Ones(2)};
  spec.alpha = {1.0, 1.0};
  spec.fast = {false, true};
  const auto t = spec.times(2);
  EXPECT_DOUBLE_EQ(t[0], 0.025);
  EXPECT_DOUBLE_EQ(t[1], 0.025 * 0.025);
  EXPECT_EQ(spec.alpha_limit(1), 0.0);
}

TEST(Subdifferential, WeightedL1Box) {
  const SubdifferentialBox b =
      weighted_l1_subdifferential((Vector(3) << 1, 2, 3).finished(), (Vector(3) << 0.5, 0, -1).finished());
  EXPECT_EQ(b.lower, (Vector(3) << 1, -2, -3).finished());
  EXPECT_EQ(b.upper, (Vector(3) << 1, 2, -3).finished());
  EXPECT_DOUBLE_EQ(b.support((Vector(3) << 1, -1, 1).finished()), 1 + 2 - 3);
}

TEST(DualPair, SmoothTermsMaximizeOverBox) {
  const SubdifferentialBox box = weighted_l1_subdifferential(Vector::Ones(1), Vector::Zero(1));
  const DualPairResult r = dual_pair_solve(box, {{quadratic(), quadratic(), 1.0, Vector::Constant(1, 2.0)}});
  EXPECT_NEAR(r.max_value, 1.5, 1e-9);
  EXPECT_NEAR(r.q[0], 1.0, 1e-9);
  EXPECT_NEAR(r.joint_min, 1.5, 1e-6);
}

// With two terms the per-term minima only bound the maximum from above.
TEST(DualPair, SeparableFormIsAnUpperBound) {
  const SubdifferentialBox box = weighted_l1_subdifferential(Vector::Ones(1), Vector::Zero(1));
  const DualPairResult r = dual_pair_solve(
      box, {{quadratic(), quadratic(), 1.0, Vector::Constant(1, 2.0)},
            {quadratic(), quadratic(), 1.0, Vector::Constant(1, -2.0)}});
  // q = 0 maximizes -q^2, so the maximum is 0
  EXPECT_NEAR(r.max_value, 0.0, 1e-9);
  EXPECT_GE(r.separable_residual, 3.0 - 1e-6);
  EXPECT_NEAR(r.joint_residual, 0.0, 1e-6);
}
