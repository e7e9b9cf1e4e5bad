#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "hjd/core/grid_oracles.hpp"
#include "hjd/hj/lax.hpp"

namespace hjd {

struct ConjugateCheckSpec {
  Box primal_box;              // over (x, t), dimension n + N
  double step = 1e-2;
  std::vector<Vector> queries;  // points (p, E), dimension n + N
  double solve_tol = 1e-10;
};

struct ConjugateCheckResult {
  double max_deviation = 0.0;
  double coarse_deviation = 0.0;  // same check on the grid with twice the step
  long compared = 0;
  long finiteness_mismatches = 0;
  bool inconclusive = false;
};

// J*(p) + sum_j I{E_j + H_j(p) <= 0}.
inline ExtendedReal value_conjugate_closed_form(const MultiTimeProblem& prob, const Vector& p,
                                                const Vector& e) {
  if (prob.J.conjugate() == nullptr)
    throw ConfigurationError("conjugate check: initial data has no closed-form conjugate");
  ExtendedReal v = prob.J.conjugate()->eval(p);
  for (std::size_t j = 0; j < prob.size(); ++j)
    if (e[static_cast<Index>(j)] + prob.terms[j].H.eval(p).to_double() > 0.0)
      return ExtendedReal::infinity();
  return v;
}

namespace detail {

inline ConjugateCheckResult conjugate_check_once(const MultiTimeProblem& prob,
                                                 const ConjugateCheckSpec& spec, double step) {
  const Index dim = spec.primal_box.dimension();
  const Index N = static_cast<Index>(prob.size());
  const Index n = dim - N;
  LaxOptions opt;
  opt.tol = spec.solve_tol;
  MultiTimeProblem local = prob;
  auto S = [&](const Vector& xt) {
    const Vector x = xt.head(n);
    bool all_zero = true;
    for (Index j = 0; j < N; ++j) {
      const double t = xt[n + j];
      if (t < 0.0) return ExtendedReal::infinity();
      local.terms[static_cast<std::size_t>(j)].t = t;
      all_zero = all_zero && t == 0.0;
    }
    if (all_zero) return prob.J.eval(x);
    return ExtendedReal(lax_solve(local, x, opt).value);
  };
  const LegendreSampler sampler(S, spec.primal_box, step);
  ConjugateCheckResult r;
  for (const Vector& q : spec.queries) {
    if (q.size() != dim) throw InvalidInput("conjugate check: query dimension mismatch");
    const ExtendedReal numeric = sampler(q);
    const ExtendedReal exact = value_conjugate_closed_form(prob, q.head(n), q.tail(N));
    if (numeric.is_finite() != exact.is_finite()) {
      ++r.finiteness_mismatches;
      continue;
    }
    if (exact.is_infinite()) continue;
    ++r.compared;
    r.max_deviation = std::max(r.max_deviation, std::abs(numeric.value() - exact.value()));
  }
  return r;
}

}  // namespace detail

// Compares the numeric Legendre transform of (x, t) -> S(x, t), with S = J at
// t = 0 and +inf for negative times, against the closed form. The run is
// repeated at twice the step; a deviation that does not shrink under the
// refinement marks the result inconclusive.
inline ConjugateCheckResult conjugate_identity_check(const MultiTimeProblem& prob,
                                                     const ConjugateCheckSpec& spec) {
  const Index dim = spec.primal_box.dimension();
  const Index N = static_cast<Index>(prob.size());
  if (N < 1 || N > 2 || dim - N < 1 || dim - N > 2 || dim > 3)
    throw InvalidInput("conjugate check: supports n <= 2, N <= 2 and n + N <= 3");
  ConjugateCheckResult fine = detail::conjugate_check_once(prob, spec, spec.step);
  const ConjugateCheckResult coarse = detail::conjugate_check_once(prob, spec, 2.0 * spec.step);
  fine.coarse_deviation = coarse.max_deviation;
  fine.inconclusive = fine.max_deviation > 1e-12 && fine.max_deviation >= coarse.max_deviation;
  return fine;
}

}  // namespace hjd
