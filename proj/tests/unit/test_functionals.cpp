#include <gtest/gtest.h>

#include <random>

#include "hjd/functionals/elementary.hpp"
#include "hjd/functionals/total_variation.hpp"
#include "hjd/functionals/tv_functionals.hpp"
#include "oracles.hpp"

using namespace hjd;

namespace {

ImageGrid row(std::initializer_list<double> v) {
  Vector x(static_cast<Index>(v.size()));
  Index i = 0;
  for (double a : v) x[i++] = a;
  return ImageGrid(1, x.size(), x);
}

}  // namespace

TEST(ImageGrid, RejectsBadShapes) {
  EXPECT_THROW(ImageGrid(0, 3, Vector::Zero(0)), InvalidInput);
  EXPECT_THROW(ImageGrid(2, 2, Vector::Zero(3)), InvalidInput);
  EXPECT_THROW(tv_variant_from_string("iso"), InvalidInput);
}

TEST(TotalVariation, HandExamples) {
  EXPECT_EQ(tv_eval(ImageGrid::constant(5, 7, 3.0)), 0.0);
  const ImageGrid two(2, 2, (Vector(4) << 0, 1, 0, 1).finished());
  EXPECT_DOUBLE_EQ(tv_eval(two), 1.0);
  Vector s = Vector::Zero(9);
  s[4] = 1.0;
  EXPECT_DOUBLE_EQ(tv_eval(ImageGrid(3, 3, s)), 4.0);
  // a single row has no anchored differences in the verbatim variant
  EXPECT_DOUBLE_EQ(tv_eval(row({0, 0, 1, 1})), 0.0);
  EXPECT_DOUBLE_EQ(tv_eval(row({0, 0, 1, 1}), TvVariant::full), 1.0);
}

TEST(TotalVariation, MatchesIndependentLoop) {
  std::mt19937_64 rng(11);
  for (int k = 0; k < 30; ++k) {
    const Index r = 1 + k % 5, c = 1 + (k * 7) % 6;
    const Vector u = oracle::random_vector(rng, r * c, -2, 2);
    for (bool full : {false, true}) {
      const double lib = tv_eval(ImageGrid(r, c, u), full ? TvVariant::full : TvVariant::verbatim);
      EXPECT_NEAR(lib, oracle::tv(u, r, c, full), 1e-12) << r << "x" << c;
    }
  }
}

TEST(TvProx, StepClosedForm) {
  const ImageGrid u = tv_prox(row({0, 0, 1, 1}), 0.1, 1e-12, TvVariant::full);
  const Vector expect = (Vector(4) << 0.05, 0.05, 0.95, 0.95).finished();
  EXPECT_LE((u.values() - expect).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(TvProx, ConstantIsFixed) {
  const ImageGrid z = ImageGrid::constant(4, 5, 2.5);
  EXPECT_LE((tv_prox(z, 3.0, 1e-12).values() - z.values()).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(TvProx, SpikeCollapsesToMeanUnderFullVariant) {
  Vector s = Vector::Zero(9);
  s[4] = 1.0;
  const ImageGrid u = tv_prox(ImageGrid(3, 3, s), 1.0, 1e-12, TvVariant::full);
  EXPECT_LE((u.values().array() - 1.0 / 9.0).abs().maxCoeff(), 1e-10);
}

TEST(TvProx, OneDimensionalSignalsMatchActiveSetOracle) {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> tau_d(0.05, 1.5);
  for (int k = 0; k < 20; ++k) {
    const Index n = 3 + k % 6;
    const Vector z = oracle::random_vector(rng, n, -2, 2);
    const double tau = tau_d(rng);
    const Vector expect = oracle::tv1d_prox(z, tau);
    ASSERT_EQ(expect.size(), n);
    const ImageGrid u = tv_prox(ImageGrid(1, n, z), tau, 1e-11, TvVariant::full);
    EXPECT_LE((u.values() - expect).cwiseAbs().maxCoeff(), 1e-8) << "case " << k;
  }
}

TEST(GBall, StepProjectionAndMoreauIdentity) {
  const ImageGrid z = row({0, 0, 1, 1});
  const ImageGrid v = gball_project(z, 0.1, 1e-12, TvVariant::full);
  const Vector expect = (Vector(4) << -0.05, -0.05, 0.05, 0.05).finished();
  EXPECT_LE((v.values() - expect).cwiseAbs().maxCoeff(), 1e-10);

  std::mt19937_64 rng(8);
  for (int k = 0; k < 10; ++k) {
    const ImageGrid zz(3, 4, oracle::random_vector(rng, 12, -1, 1));
    const ImageGrid u = tv_prox(zz, 0.3, 1e-12);
    const ImageGrid p = gball_project(zz, 0.3, 1e-12);
    // p is formed as z - u, so the sum reproduces z to one rounding
    EXPECT_LE(((u.values() + p.values()) - zz.values()).cwiseAbs().maxCoeff(), 2.3e-16);
  }
}

TEST(GBall, ContainedPointIsFixed) {
  // |(-0.05, 0.05)|_G = 0.05 on a 1x2 grid
  const ImageGrid z = row({-0.05, 0.05});
  const ImageGrid v = gball_project(z, 0.1, 1e-12, TvVariant::full);
  EXPECT_LE((v.values() - z.values()).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(GNorm, HandValuesAndNonzeroMean) {
  EXPECT_NEAR(g_norm(row({-0.5, 0.5}), 1e-9, TvVariant::full).value(), 0.5, 1e-8);
  EXPECT_EQ(g_norm(row({0, 0, 0}), 1e-9, TvVariant::full).value(), 0.0);
  EXPECT_TRUE(g_norm(row({1.0, 0.5}), 1e-9, TvVariant::full).is_infinite());
}

// <u, v> <= TV(u) |v|_G, with TV computed by the independent loop.
TEST(GNorm, DualityInequalityOnRandomPairs) {
  std::mt19937_64 rng(99);
  int checked = 0;
  for (int k = 0; k < 200; ++k) {
    const Index r = 2 + k % 3, c = 2 + (k / 3) % 3;
    const bool full = k % 2 == 0;
    const Vector u = oracle::random_vector(rng, r * c, -1, 1);
    Vector v = oracle::random_vector(rng, r * c, -1, 1);
    // the verbatim variant leaves the last pixel out of every difference
    if (!full) v[r * c - 1] = 0.0;
    v.array() -= v.sum() / static_cast<double>(full ? r * c : r * c - 1);
    if (!full) v[r * c - 1] = 0.0;
    const ExtendedReal g = g_norm(ImageGrid(r, c, v), 1e-7, full ? TvVariant::full : TvVariant::verbatim);
    ASSERT_TRUE(g.is_finite()) << k;
    EXPECT_LE(u.dot(v), oracle::tv(u, r, c, full) * g.value() + 1e-6 * (1.0 + u.norm())) << k;
    ++checked;
  }
  EXPECT_EQ(checked, 200);
}

TEST(GNorm, VerbatimCornerPixelIsOutsideTheRange) {
  Vector v = Vector::Zero(4);
  v[0] = -1.0;
  v[3] = 1.0;
  EXPECT_TRUE(g_norm(ImageGrid(2, 2, v), 1e-9).is_infinite());
  EXPECT_TRUE(g_norm(ImageGrid(2, 2, v), 1e-9, TvVariant::full).is_finite());
}

TEST(TvFunctional, ConjugateIsUnitGBall) {
  const ConvexFunctional tv = tv_functional(1, 4, 1.0, TvSettings{TvVariant::full});
  ASSERT_NE(tv.conjugate(), nullptr);
  EXPECT_TRUE(tv.conjugate()->eval((Vector(4) << -0.5, 0, 0, 0.5).finished()).is_finite());
  EXPECT_TRUE(tv.conjugate()->eval((Vector(4) << -2, 0, 0, 2).finished()).is_infinite());
  EXPECT_DOUBLE_EQ(tv.eval((Vector(4) << 0, 0, 1, 1).finished()).value(), 1.0);
}

TEST(ElementaryProx, ClosedForms) {
  const Vector a = l1_prox((Vector(2) << 3, -0.5).finished(), 1.0);
  EXPECT_DOUBLE_EQ(a[0], 2.0);
  EXPECT_DOUBLE_EQ(a[1], 0.0);
  const Vector b = quad_prox((Vector(2) << 2, 2).finished(), 1.0);
  EXPECT_DOUBLE_EQ(b[0], 1.0);
  const Vector c = linf_ball_project((Vector(2) << 2, -0.3).finished(), 1.0);
  EXPECT_DOUBLE_EQ(c[0], 1.0);
  EXPECT_DOUBLE_EQ(c[1], -0.3);
}
