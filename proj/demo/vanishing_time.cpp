// (S(x + t v, t) - J(x))/t as t -> 0 for J = |.|, H = p^2/2, x = 0, v = 2.
#include <cstdio>

#include "hjd/functionals/elementary.hpp"
#include "hjd/limits/limits.hpp"

int main() {
  using namespace hjd;
  SequenceSpec spec;
  spec.x = Vector::Zero(1);
  spec.v = {Vector::Constant(1, 2.0)};
  spec.alpha = {1.0};
  spec.fast = {false};
  const MultiTimeProblem prob{l1_norm(), {{quadratic(1.0), quadratic(1.0), 1.0}}};

  const LimitTable table = run_limit_experiment(spec, prob, 12);
  for (const LimitRow& row : table.rows)
    std::printf("k %2d  t %.3e  ratio %.12f  p %.6f  u/t %.6f\n", row.k, row.t[0], row.ratio, row.p[0],
                row.velocity[0][0]);
  std::printf("extrapolated %.12f\n", table.ratio_estimate.limit);

  const DualPairResult dual =
      dual_pair_solve(weighted_l1_subdifferential(Vector::Ones(1), spec.x), {{quadratic(1.0), quadratic(1.0), 1.0, spec.v[0]}});
  std::printf("dual pair max %.12f at q = %.6f\n", dual.max_value, dual.q[0]);
  return 0;
}
