#pragma once

#include <optional>
#include <string>
#include <vector>

#include "hjd/core/convex_functional.hpp"

namespace hjd {

struct HamiltonianTerm {
  ConvexFunctional H;
  ConvexFunctional Hstar;
  double t = 0.0;
};

struct H1Report {
  bool holds = false;
  std::vector<std::string> issues;
};

// J plus Hamiltonians H_1..H_N with times t_1..t_N.
struct MultiTimeProblem {
  ConvexFunctional J;
  std::vector<HamiltonianTerm> terms;

  std::size_t size() const noexcept { return terms.size(); }

  void validate() const {
    if (!J.valid()) throw InvalidInput("problem: initial data missing");
    bool any = false;
    for (const auto& term : terms) {
      if (!(term.t >= 0.0) || !std::isfinite(term.t))
        throw InvalidInput("problem: times must be finite and nonnegative");
      if (!term.H.valid() || !term.Hstar.valid())
        throw InvalidInput("problem: Hamiltonian or its conjugate missing");
      any = any || term.t > 0.0;
    }
    if (!any) throw InvalidInput("problem: times must not all be zero");
  }

  // Each H_j finite-valued and 1-coercive, at least one strictly convex.
  H1Report validate_h1() const {
    H1Report r;
    bool strict = false;
    for (std::size_t j = 0; j < terms.size(); ++j) {
      const auto& f = terms[j].H.flags();
      if (!f.finite_valued) r.issues.push_back("H" + std::to_string(j + 1) + " not finite-valued");
      if (!f.one_coercive) r.issues.push_back("H" + std::to_string(j + 1) + " not 1-coercive");
      strict = strict || f.strictly_convex;
    }
    if (!strict) r.issues.push_back("no strictly convex Hamiltonian");
    r.holds = r.issues.empty();
    return r;
  }

  bool h1_holds() const {
    bool strict = false;
    for (const auto& term : terms) {
      const auto& f = term.H.flags();
      if (!f.finite_valued || !f.one_coercive) return false;
      strict = strict || f.strictly_convex;
    }
    return strict;
  }

  MultiTimeProblem with_times(const std::vector<double>& times) const {
    if (times.size() != terms.size()) throw InvalidInput("problem: time count mismatch");
    MultiTimeProblem p = *this;
    for (std::size_t j = 0; j < times.size(); ++j) p.terms[j].t = times[j];
    return p;
  }

  std::vector<double> times() const {
    std::vector<double> out;
    for (const auto& term : terms) out.push_back(term.t);
    return out;
  }
};

struct DecompositionResult {
  Vector residual;                 // u0 = x - sum_j u_j, the argument of J
  std::vector<Vector> components;  // u_j, zero whenever t_j = 0
  double value = 0.0;
  std::optional<Vector> momentum;
  std::optional<double> initial_conjugate;  // J*(momentum) as used in the gap
  double duality_gap = 0.0;
  long iterations = 0;
  bool converged = false;
  bool stalled = false;  // stopped on a gap plateau, see LaxOptions::stall_window
  bool h1_holds = false;
  std::string method;
  std::vector<double> history;  // accepted primal values, when requested
};

// prox of psi(w) = t H*(w/t) with step s: t prox_{(s/t) H*}(y/t). Workspace
// reports are rescaled to psi and psi*.
inline Vector time_scaled_prox(const HamiltonianTerm& term, const Vector& y, double s,
                               ProxWorkspace& ws) {
  const double t = term.t;
  Vector out = t * term.Hstar.prox(y / t, s / t, ws);
  if (ws.value_at_output) *ws.value_at_output *= t;
  if (ws.conjugate_at_residual) *ws.conjugate_at_residual *= t;
  return out;
}

inline ExtendedReal time_scaled_conjugate(const HamiltonianTerm& term, const Vector& u) {
  if (term.t == 0.0) return u.isZero(0.0) ? ExtendedReal(0.0) : ExtendedReal::infinity();
  return term.Hstar.eval(u / term.t).scaled(term.t);
}

// J(x - sum u_j) + sum_{t_j > 0} t_j H_j*(u_j / t_j), with u0 given.
inline ExtendedReal lax_objective(const MultiTimeProblem& prob, const Vector& u0,
                                  const std::vector<Vector>& components) {
  ExtendedReal v = prob.J.eval(u0);
  for (std::size_t j = 0; j < prob.terms.size(); ++j)
    v += time_scaled_conjugate(prob.terms[j], components[j]);
  return v;
}

// <p, x> - J*(p) - sum_j t_j H_j(p); -inf is reported as nullopt.
inline std::optional<double> hopf_objective(const MultiTimeProblem& prob, const Vector& x,
                                            const Vector& p, const ExtendedReal& jstar) {
  if (jstar.is_infinite()) return std::nullopt;
  double v = p.dot(x) - jstar.value();
  for (const auto& term : prob.terms) {
    if (term.t == 0.0) continue;
    const ExtendedReal h = term.H.eval(p);
    if (h.is_infinite()) return std::nullopt;
    v -= term.t * h.value();
  }
  return v;
}

}  // namespace hjd
