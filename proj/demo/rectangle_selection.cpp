// TV-L1 on a square whose minimizers form a segment; the regularized path
// picks the one of least norm.
#include <cmath>
#include <cstdio>

#include "hjd/models/models.hpp"

int main() {
  using namespace hjd;
  const RectangleCase rc = tvl1_rectangle_case(16, 4, 4, 1.0, 0.0);

  Tvl1Options topt;
  const Tvl1Result direct = tvl1(rc.x, rc.alpha, topt);
  std::printf("tvl1: value %.6f, dual %.6f, several minimizers: %s\n", direct.value, direct.dual_value,
              direct.uniqueness_warning ? "yes" : "no");

  const DegenerateProblem prob{tv_functional(16, 16, rc.alpha), l1_norm(), rc.x.values()};
  const SelectionPath path = selection_path(prob, SelectionSchedule::standard(1.0));
  for (const SelectionStep& st : path.steps)
    std::printf("lambda %.3e  |v| %.6f  gap %.1e  iterations %ld\n", st.lambda, st.v.norm(), st.gap, st.iterations);

  const double err = (path.v_bar - rc.u1.values()).norm();
  std::printf("|v_bar - u1| = %.3e (rms %.3e)\n", err, err / std::sqrt(double(rc.x.size())));
  return path.converged ? 0 : 1;
}
