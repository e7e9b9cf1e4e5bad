#pragma once

#include <functional>
#include <limits>
#include <optional>
#include <vector>

#include "hjd/hj/problem.hpp"

namespace hjd {

// One recovered component: a point when H_j is differentiable, otherwise a
// Fenchel test for membership of a candidate in t_j dH_j(p).
struct RecoveredComponent {
  std::optional<Vector> point;
  // H_j(p) + H_j*(w/t_j) - <p, w/t_j>; zero exactly on t_j dH_j(p).
  std::function<double(const Vector&)> fenchel_residual;
  double tol = 0.0;

  bool accepts(const Vector& w) const {
    if (point) return (w - *point).norm() <= tol * (1.0 + point->norm());
    return fenchel_residual(w) <= tol;
  }
};

inline std::vector<RecoveredComponent> recover_minimizers(const MultiTimeProblem& prob,
                                                          const Vector& p, double tol = 1e-6) {
  require_finite(p, "recover_minimizers momentum");
  std::vector<RecoveredComponent> out;
  for (std::size_t j = 0; j < prob.terms.size(); ++j) {
    const HamiltonianTerm& term = prob.terms[j];
    RecoveredComponent rc;
    rc.tol = tol;
    if (term.t == 0.0) {
      rc.point = Vector::Zero(p.size());
      rc.fenchel_residual = [](const Vector& w) {
        return w.isZero(0.0) ? 0.0 : std::numeric_limits<double>::infinity();
      };
      out.push_back(std::move(rc));
      continue;
    }
    const double hp = term.H.eval(p).to_double();
    rc.fenchel_residual = [term, p, hp](const Vector& w) {
      const Vector v = w / term.t;
      return hp + term.Hstar.eval(v).to_double() - p.dot(v);
    };
    if (term.H.flags().differentiable) {
      if (!term.H.has_gradient())
        throw ConfigurationError("recover_minimizers: H" + std::to_string(j + 1) +
                                 " is flagged differentiable but has no gradient");
      rc.point = term.t * term.H.gradient(p);
    }
    out.push_back(std::move(rc));
  }
  return out;
}

}  // namespace hjd
