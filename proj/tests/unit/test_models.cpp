#include <gtest/gtest.h>

#include <random>

#include "hjd/models/models.hpp"
#include "oracles.hpp"

using namespace hjd;

namespace {

const ImageGrid kStep(1, 4, (Vector(4) << 0, 0, 1, 1).finished());

ModelOptions full(double tol = 1e-10) {
  ModelOptions o;
  o.variant = TvVariant::full;
  o.tol = tol;
  return o;
}

}  // namespace

TEST(ModelSpec, NamesAndRequiredParameters) {
  for (ModelKind k : {ModelKind::rof, ModelKind::a2bc, ModelKind::meyer_g_ball, ModelKind::tvl1, ModelKind::tvl1_reg})
    EXPECT_EQ(model_kind_from_string(to_string(k)), k);
  EXPECT_THROW(model_kind_from_string("osher"), InvalidInput);
  ModelSpec s{ModelKind::a2bc, {{"mu", 0.1}}};
  EXPECT_THROW(s.validate(), ConfigurationError);
  s.parameters["lambda"] = -1.0;
  EXPECT_THROW(s.validate(), InvalidInput);
}

TEST(A2bc, ConstantImageHasZeroValue) {
  const DecompositionResult r = a2bc(ImageGrid::constant(8, 8, 0.7), 1.0, 0.01);
  EXPECT_EQ(r.value, 0.0);
  EXPECT_LE((r.residual.array() - 0.7).abs().maxCoeff(), 1e-12);
  EXPECT_LE(r.components[0].cwiseAbs().maxCoeff(), 1e-12);
}

// Symmetric reduction u = (a, a, 1-a, 1-a), v = (-b, -b, b, b) with
// |v|_G = 2b: S(a, b) = 1 - 2a + 2(a - b)^2 / lambda, b <= mu/2.
TEST(A2bc, StepMatchesReducedOracle) {
  const double mu = 0.05, lambda = 0.1;
  const double b = mu / 2.0;
  double a = 0.0;
  const double s = oracle::golden_min([&](double aa) { return 1.0 - 2.0 * aa + 2.0 * (aa - b) * (aa - b) / lambda; },
                                      0.0, 0.5, &a);
  const DecompositionResult r = a2bc(kStep, mu, lambda, full());
  EXPECT_NEAR(r.value, s, 1e-8);
  EXPECT_NEAR(r.value, 0.9, 1e-8);
  const Vector u = (Vector(4) << a, a, 1 - a, 1 - a).finished();
  const Vector v = (Vector(4) << -b, -b, b, b).finished();
  EXPECT_LE((r.residual - u).cwiseAbs().maxCoeff(), 1e-6);
  EXPECT_LE((r.components[0] - v).cwiseAbs().maxCoeff(), 1e-6);
  EXPECT_NEAR(g_norm(kStep.with_values(r.components[0]), 1e-10, TvVariant::full).value(), mu, 1e-6);
}

TEST(A2bc, TranslationShiftsOnlyTheCartoon) {
  std::mt19937_64 rng(4);
  const ImageGrid x(3, 3, oracle::random_vector(rng, 9, 0, 1));
  const ImageGrid y = x.with_values(x.values().array() + 5.0);
  ModelOptions o;
  o.tol = 1e-10;
  const DecompositionResult a = a2bc(x, 0.2, 0.3, o);
  const DecompositionResult b = a2bc(y, 0.2, 0.3, o);
  EXPECT_NEAR(a.value, b.value, 1e-8);
  EXPECT_LE(((b.residual.array() - 5.0).matrix() - a.residual).cwiseAbs().maxCoeff(), 1e-5);
}

TEST(Rof, StepAndDualFeasibility) {
  const DecompositionResult r = rof(kStep, 0.1, full(1e-12));
  const Vector expect = (Vector(4) << 0.05, 0.05, 0.95, 0.95).finished();
  EXPECT_LE((r.residual - expect).cwiseAbs().maxCoeff(), 1e-8);
  EXPECT_LE(g_norm(kStep.with_values(*r.momentum), 1e-9, TvVariant::full).value(), 1.0 + 1e-6);
  EXPECT_EQ(rof(ImageGrid::constant(2, 3, 4.0), 1.0).value, 0.0);
}

TEST(Rof, OneDimensionalAgainstActiveSetOracle) {
  std::mt19937_64 rng(13);
  for (int k = 0; k < 5; ++k) {
    const Vector z = oracle::random_vector(rng, 6, 0, 1);
    const DecompositionResult r = rof(ImageGrid(1, 6, z), 0.2, full(1e-12));
    EXPECT_LE((r.residual - oracle::tv1d_prox(z, 0.2)).cwiseAbs().maxCoeff(), 1e-8);
  }
}

TEST(Meyer, StepResidualSitsOnTheBall) {
  const DecompositionResult r = meyer_g_ball(kStep, 0.1, full(1e-10));
  const Vector expect = (Vector(4) << 0.05, 0.05, 0.95, 0.95).finished();
  EXPECT_TRUE(r.converged);
  EXPECT_LE((r.residual - expect).cwiseAbs().maxCoeff(), 1e-4);
  EXPECT_NEAR(r.value, 0.9, 1e-4);
}

TEST(Meyer, LargeBetaCollapsesToConstant) {
  const DecompositionResult r = meyer_g_ball(kStep, 2.0, full(1e-10));
  EXPECT_NEAR(r.value, 0.0, 1e-4);
}

// |x - mean|_G is at most 16 * 1 here, so beta = 30 admits a constant cartoon.
TEST(Meyer, RectangleCertifiedByGap) {
  const RectangleCase rc = tvl1_rectangle_case(16, 4, 4, 1.0, 0.0);
  const DecompositionResult big = meyer_g_ball(rc.x, 30.0);
  EXPECT_TRUE(big.converged);
  EXPECT_LE(big.duality_gap, 1e-6);
  EXPECT_NEAR(big.value, 0.0, 1e-9);
  const DecompositionResult mid = meyer_g_ball(rc.x, 0.5);
  EXPECT_TRUE(mid.converged);
  EXPECT_LE(mid.duality_gap, 1e-6);
  EXPECT_GT(mid.value, 1.0);
}

TEST(Tvl1, ZeroImage) {
  const Tvl1Result r = tvl1(ImageGrid::constant(4, 4, 0.0), 1.0);
  EXPECT_EQ(r.value, 0.0);
  EXPECT_LE(r.witness.values().cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Tvl1, RectangleHasValueSixteenAndSeveralMinimizers) {
  const RectangleCase rc = tvl1_rectangle_case(16, 4, 4, 1.0, 0.0);
  const Tvl1Result r = tvl1(rc.x, rc.alpha);
  EXPECT_TRUE(r.converged);
  EXPECT_NEAR(r.value, 16.0, 1e-5);
  EXPECT_NEAR(r.dual_value, 16.0, 1e-5);
  EXPECT_TRUE(r.uniqueness_warning);
  EXPECT_NEAR(tvl1_objective(rc.x, r.witness.values(), rc.alpha), 16.0, 1e-5);
}

TEST(Tvl1, LargeAlphaGivesBestConstant) {
  // brute force over constants: the median minimizes |x - c|_1
  const ImageGrid x(2, 3, (Vector(6) << 0, 5, 1, 2, 9, 3).finished());
  double best = std::numeric_limits<double>::infinity();
  for (double c = 0.0; c <= 9.0; c += 1e-3) best = std::min(best, (x.values().array() - c).abs().sum());
  Tvl1Options o;
  o.variant = TvVariant::full;
  EXPECT_NEAR(tvl1(x, 50.0, o).value, best, 1e-5);
  // verbatim: the last pixel is free, so it keeps its value
  best = std::numeric_limits<double>::infinity();
  for (double c = 0.0; c <= 9.0; c += 1e-3) best = std::min(best, (x.values().head(5).array() - c).abs().sum());
  EXPECT_NEAR(tvl1(x, 50.0).value, best, 1e-5);
}

TEST(Tvl1Reg, RectangleSelectsTheZeroImage) {
  const RectangleCase rc = tvl1_rectangle_case(16, 4, 4, 1.0, 0.0);
  const Tvl1RegResult r = tvl1_reg(rc.x, rc.alpha, 0.01, 0.01);
  EXPECT_TRUE(r.converged);
  EXPECT_LE((r.v.values() - rc.u1.values()).norm() / 16.0, 1e-2);
  EXPECT_LE((r.w.values() - rc.x.values()).norm() / 16.0, 1e-2);
}

TEST(Tvl1Reg, ApproachesTvl1Value) {
  std::mt19937_64 rng(6);
  const ImageGrid x(8, 8, oracle::random_vector(rng, 64, 0, 1));
  const double target = tvl1(x, 0.5).value;
  ModelOptions o;
  o.tol = 1e-10;
  const Tvl1RegResult r = tvl1_reg(x, 0.5, 1e-5, 1e-5, o);
  EXPECT_NEAR(tvl1_objective(x, r.v.values(), 0.5), target, 1e-3);
}

TEST(RunModel, NamesComponentsPerModel) {
  ModelSpec s{ModelKind::a2bc, {{"mu", 0.1}, {"lambda", 0.1}}};
  const ModelRun run = run_model(s, ImageGrid::constant(3, 3, 1.0));
  ASSERT_EQ(run.images.size(), 3u);
  EXPECT_EQ(run.images[0].first, "u");
  EXPECT_TRUE(run.momentum);
}
