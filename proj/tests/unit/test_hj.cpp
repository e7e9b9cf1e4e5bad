#include <gtest/gtest.h>

#include <random>

#include "hjd/hj/commute.hpp"
#include "hjd/hj/conjugate_check.hpp"
#include "hjd/hj/hopf.hpp"
#include "hjd/hj/recovery.hpp"
#include "hjd/hj/scan.hpp"
#include "hjd/models/models.hpp"
#include "oracles.hpp"

using namespace hjd;

namespace {

MultiTimeProblem l1_quadratic(double t) { return MultiTimeProblem{l1_norm(), {{quadratic(), quadratic(), t}}}; }

}  // namespace

TEST(Problem, ValidateRejectsBadTimes) {
  MultiTimeProblem p = l1_quadratic(0.0);
  EXPECT_THROW(p.validate(), InvalidInput);
  p.terms[0].t = -1.0;
  EXPECT_THROW(p.validate(), InvalidInput);
  p.terms[0].t = 1.0;
  EXPECT_NO_THROW(p.validate());
}

TEST(Problem, H1Report) {
  EXPECT_TRUE(l1_quadratic(1.0).validate_h1().holds);
  const MultiTimeProblem a = a2bc_problem(2, 2, 0.1, 0.1);
  const H1Report r = a.validate_h1();
  EXPECT_FALSE(r.holds);  // TV is neither finite-coercive nor strictly convex
  EXPECT_FALSE(r.issues.empty());
}

// Moreau envelope of |.|_1 with t = 1 at (2, 0.3): u1 = (1, 0.3), u0 = (1, 0).
TEST(Lax, L1MoreauEnvelopeClosedForm) {
  const Vector x = (Vector(2) << 2.0, 0.3).finished();
  LaxOptions opt;
  opt.tol = 1e-12;
  const DecompositionResult r = lax_solve(l1_quadratic(1.0), x, opt);
  EXPECT_TRUE(r.converged);
  EXPECT_NEAR(r.value, 1.545, 1e-10);
  EXPECT_LE((r.residual - Vector::Unit(2, 0)).norm(), 1e-8);
  EXPECT_LE((r.components[0] - (Vector(2) << 1.0, 0.3).finished()).norm(), 1e-8);
}

TEST(Lax, SmallTimesApproachInitialData) {
  const Vector x = (Vector(3) << 1.0, -2.0, 0.5).finished();
  LaxOptions opt;
  opt.tol = 1e-12;
  double prev = 0.0;
  for (double t : {1e-1, 1e-2, 1e-3, 1e-4}) {
    const double s = lax_solve(l1_quadratic(t), x, opt).value;
    EXPECT_NEAR(s, 3.5 - 1.5 * t, 1e-10);
    prev = s;
  }
  EXPECT_NEAR(prev, 3.5, 1e-3);
}

TEST(Hopf, HuberExample) {
  const HopfResult h = hopf_solve(l1_quadratic(1.0), Vector::Constant(1, 2.0));
  EXPECT_NEAR(h.momentum[0], 1.0, 1e-6);
  EXPECT_NEAR(h.value, 1.5, 1e-6);
  const HopfResult z = hopf_solve(l1_quadratic(1.0), Vector::Zero(1));
  EXPECT_NEAR(z.momentum[0], 0.0, 1e-9);
}

TEST(Hopf, AgreesWithLaxOnRandomA2bc) {
  std::mt19937_64 rng(41);
  for (int k = 0; k < 8; ++k) {
    const Index n = 3 + k % 4;
    const Vector x = oracle::random_vector(rng, n * n, 0, 255);
    const MultiTimeProblem prob = a2bc_problem(n, n, 0.05 + 0.6 * k, 0.02 + 0.9 * k);
    LaxOptions lo;
    lo.tol = 1e-6;
    HopfOptions ho;
    ho.tol = 1e-6;
    const DecompositionResult l = lax_solve(prob, x, lo);
    const HopfResult h = hopf_solve(prob, x, ho);
    ASSERT_TRUE(l.converged && h.converged);
    EXPECT_GE(l.value - h.value, -1e-12 * (1.0 + std::abs(l.value)));
    EXPECT_LE(l.value - h.value, 2e-6);
  }
}

TEST(Recovery, QuadraticComponentsAreTimesMomentum) {
  const MultiTimeProblem prob = l1_quadratic(1.0);
  const auto rec = recover_minimizers(prob, Vector::Constant(1, 1.0));
  ASSERT_TRUE(rec[0].point);
  EXPECT_DOUBLE_EQ((*rec[0].point)[0], 1.0);
  LaxOptions opt;
  opt.tol = 1e-12;
  const DecompositionResult r = lax_solve(prob, Vector::Constant(1, 2.0), opt);
  EXPECT_TRUE(rec[0].accepts(r.components[0]));
}

TEST(Recovery, TvComponentPassesFenchelCertificate) {
  const ImageGrid x(1, 4, (Vector(4) << 0, 0, 1, 1).finished());
  ModelOptions mo;
  mo.variant = TvVariant::full;
  mo.tol = 1e-12;
  const DecompositionResult r = a2bc(x, 0.05, 0.1, mo);
  const auto rec = recover_minimizers(a2bc_problem(1, 4, 0.05, 0.1, TvVariant::full), *r.momentum, 1e-6);
  EXPECT_LE(rec[0].fenchel_residual(r.components[0]), 1e-6);
  EXPECT_TRUE(rec[1].accepts(r.components[1]));
}

TEST(Commute, QuadraticSemigroup) {
  const MultiTimeProblem prob{l1_norm(), {{quadratic(), quadratic(), 0.4}, {quadratic(), quadratic(), 0.7}}};
  const Vector x = (Vector(2) << 3.0, -0.2).finished();
  const CommuteResult c = commute_check(prob, x, {1, 0}, 1e-10);
  EXPECT_NEAR(c.direct, c.composed, 1e-8);
  // envelope at t1 + t2
  LaxOptions opt;
  opt.tol = 1e-12;
  EXPECT_NEAR(c.direct, lax_solve(l1_quadratic(1.1), x, opt).value, 1e-9);
}

TEST(Commute, A2bcOrdersAgree) {
  std::mt19937_64 rng(5);
  const Vector x = oracle::random_vector(rng, 9, 0, 1);
  const MultiTimeProblem prob = a2bc_problem(3, 3, 0.2, 0.3);
  const CommuteResult a = commute_check(prob, x, {0, 1}, 1e-9);
  const CommuteResult b = commute_check(prob, x, {1, 0}, 1e-9);
  EXPECT_NEAR(a.composed, a.direct, 2e-6);
  EXPECT_NEAR(b.composed, b.direct, 2e-6);
  EXPECT_THROW(commute_check(prob, x, {0, 0}, 1e-9), InvalidInput);
}

TEST(ConjugateCheck, QuadraticDataOnCoarseGrid) {
  const MultiTimeProblem prob{quadratic(), {{quadratic(), quadratic(), 1.0}}};
  ConjugateCheckSpec spec;
  spec.primal_box = Box{(Vector(2) << -3, -3).finished(), (Vector(2) << 3, 3).finished()};
  spec.step = 0.05;
  for (double p : {-1.0, 0.0, 0.5, 1.2}) spec.queries.push_back((Vector(2) << p, -0.5 * p * p - 0.5).finished());
  const ConjugateCheckResult r = conjugate_identity_check(prob, spec);
  EXPECT_EQ(r.finiteness_mismatches, 0);
  EXPECT_EQ(r.compared, 4);
  EXPECT_LE(r.max_deviation, 5e-2);
}

TEST(Scan, AlphaAxisWithEqualEndpointsIsConstant) {
  const MultiTimeProblem prob = a2bc_problem(3, 3, 0.3, 0.2);
  std::mt19937_64 rng(1);
  const Vector x = oracle::random_vector(rng, 9, 0, 1);
  ScanSpec spec;
  spec.axis = ScanAxis::mixing;
  spec.lo = 0.0;
  spec.hi = 1.0;
  spec.steps = 5;
  spec.x2 = x;
  spec.times2 = prob.times();
  const ScanResult r = scan_surface(prob, x, spec);
  for (const auto& row : r.rows) EXPECT_EQ(row.value, r.rows[0].value);
}

TEST(Scan, MuAxisIsConvex) {
  const Vector x = (Vector(8) << 0, 0, 0, 0, 1, 1, 1, 1).finished();
  ScanSpec spec;
  spec.axis = ScanAxis::time;
  spec.time_index = 0;
  spec.lo = 0.01;
  spec.hi = 0.5;
  spec.steps = 12;
  const ScanResult r = scan_surface(a2bc_problem(2, 4, 0.1, 0.1, TvVariant::full), x, spec);
  ASSERT_EQ(r.rows.size(), 12u);
  EXPECT_GE(r.min_second_difference, -1e-6);
  spec.steps = 1;
  EXPECT_EQ(scan_surface(a2bc_problem(2, 4, 0.1, 0.1), x, spec).rows.size(), 1u);
}
