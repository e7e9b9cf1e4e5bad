#pragma once

#include <algorithm>
#include <numeric>
#include <vector>

#include "hjd/functionals/elementary.hpp"
#include "hjd/hj/lax.hpp"

namespace hjd {

// The single-time Lax value f □ t H*(./t) as a functional. A quadratic H
// gives a closed-form Moreau envelope; otherwise eval and prox run nested
// Lax solves, with the prox reporting a certified conjugate value.
inline ConvexFunctional infconv_stage(const ConvexFunctional& f, const HamiltonianTerm& term,
                                      const LaxOptions& inner) {
  if (term.t == 0.0) return f;
  if (const auto c = term.H.quadratic_weight(); c && *c > 0.0)
    return moreau_envelope(f, *c * term.t);

  const MultiTimeProblem single{f, {term}};
  FunctionalFlags fl{};
  fl.finite_valued = f.flags().finite_valued || term.Hstar.flags().finite_valued;
  ConvexFunctional out(
      "(" + f.name() + ")□" + term.H.name(),
      [single, inner](const Vector& y) {
        const DecompositionResult r = lax_solve(single, y, inner);
        return ExtendedReal(r.value);
      },
      [f, term, inner](const Vector& z, double gamma, ProxWorkspace& ws) {
        // argmin_y g(y) + |y - z|^2/(2 gamma) with g = f □ psi: minimize
        // f(a) + psi(w) + |z - a - w|^2/(2 gamma) and set y = z - gamma p.
        const MultiTimeProblem coupled{f, {term, {quadratic(1.0), quadratic(1.0), gamma}}};
        LaxOptions o = inner;
        if (ws.gap_target) o.tol = std::min(o.tol, *ws.gap_target);
        if (ws.dual.size() == z.size()) o.warm_start = {ws.dual, Vector()};
        const DecompositionResult r = lax_solve(coupled, z, o);
        if (!r.converged || !r.momentum)
          throw NonConvergence("nested inf-convolution prox did not converge", r.residual,
                               r.duality_gap, r.iterations);
        const Vector& p = *r.momentum;
        Vector y = z - gamma * p;
        const Vector& w = r.components[0];
        ws.dual = w;
        ws.achieved_gap = r.duality_gap;
        ws.iterations = r.iterations;
        const ExtendedReal fy = f.eval(y - w) + time_scaled_conjugate(term, w);
        if (fy.is_finite()) ws.value_at_output = fy.value();
        const ExtendedReal hp = term.H.eval(p);
        if (hp.is_finite() && r.initial_conjugate)
          ws.conjugate_at_residual = *r.initial_conjugate + term.t * hp.value();
        return y;
      },
      fl);
  if (f.conjugate() != nullptr) {
    const ConvexFunctional fs = *f.conjugate();
    const ConvexFunctional H = term.H;
    const double t = term.t;
    out.with_conjugate(ConvexFunctional(
        "conj", [fs, H, t](const Vector& p) { return fs.eval(p) + H.eval(p).scaled(t); },
        ConvexFunctional::ProxFn(), FunctionalFlags{}));
  }
  return out;
}

struct CommuteResult {
  double direct = 0.0;
  double composed = 0.0;
  double direct_gap = 0.0;
  double composed_gap = 0.0;
};

// Direct multi-time value against the composition of single-time Lax
// operators applied in `order` (term indices, first applied first).
inline CommuteResult commute_check(const MultiTimeProblem& prob, const Vector& x,
                                   const std::vector<std::size_t>& order, double tol) {
  prob.validate();
  if (prob.size() < 1) throw InvalidInput("commute_check: no Hamiltonians");
  std::vector<std::size_t> sorted = order;
  std::sort(sorted.begin(), sorted.end());
  std::vector<std::size_t> ident(prob.size());
  std::iota(ident.begin(), ident.end(), std::size_t{0});
  if (sorted != ident) throw InvalidInput("commute_check: order must be a permutation");

  LaxOptions direct_opt;
  direct_opt.tol = tol;
  const DecompositionResult d = lax_solve(prob, x, direct_opt);
  CommuteResult out;
  out.direct = d.value;
  out.direct_gap = d.duality_gap;
  if (prob.size() == 1) {
    out.composed = d.value;
    out.composed_gap = d.duality_gap;
    return out;
  }

  LaxOptions inner;
  inner.tol = tol * 1e-3;
  ConvexFunctional stage = prob.J;
  for (std::size_t k = 0; k + 1 < order.size(); ++k)
    stage = infconv_stage(stage, prob.terms[order[k]], inner);
  const MultiTimeProblem last{stage, {prob.terms[order.back()]}};
  LaxOptions outer;
  outer.tol = tol;
  const DecompositionResult c = lax_solve(last, x, outer);
  out.composed = c.value;
  out.composed_gap = c.duality_gap;
  return out;
}

}  // namespace hjd
