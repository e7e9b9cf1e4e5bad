#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "hjd/hj/lax.hpp"

namespace hjd {

struct HopfOptions {
  double tol = 1e-6;
  long max_iterations = 100000;
  double inner_gap_fraction = 1e-3;
  // |p| beyond this multiple of (1 + |x|) is treated as an unbounded dual.
  double divergence_factor = 1e12;
  std::optional<Vector> warm_start;
};

struct HopfResult {
  Vector momentum;
  double value = 0.0;          // Hopf objective at the momentum
  double primal_bound = 0.0;   // Lax objective at the paired primal point
  double duality_gap = 0.0;
  long iterations = 0;
  bool converged = false;
  std::string method;
};

namespace detail {

struct HopfTracker {
  double best_value = -std::numeric_limits<double>::infinity();
  Vector best_p;
  double best_primal = std::numeric_limits<double>::infinity();

  void dual(double v, const Vector& p) {
    if (v > best_value) {
      best_value = v;
      best_p = p;
    }
  }
  void primal(double v) { best_primal = std::min(best_primal, v); }
  double gap() const { return best_primal - best_value; }
};

inline void check_unbounded(const Vector& p, const Vector& x, const HopfOptions& opt) {
  if (!p.allFinite() || p.norm() > opt.divergence_factor * (1.0 + x.norm()))
    throw Instability("hopf_solve: dual iterates diverge (J* and the Hamiltonians do not bound p)");
}

// Every active Hamiltonian has a gradient: FISTA ascent with the J* prox
// obtained from J's prox by the Moreau identity.
inline HopfResult hopf_smooth(const MultiTimeProblem& prob, const Vector& x, const HopfOptions& opt,
                              const std::vector<std::size_t>& active) {
  const Index n = x.size();
  double lip = 0.0;
  for (std::size_t j : active) lip += prob.terms[j].t * prob.terms[j].H.gradient_lipschitz();
  if (!(lip > 0.0)) throw ConfigurationError("hopf_solve: Hamiltonians carry no curvature bound");
  const double gamma = 1.0 / lip;
  ProxWorkspace ws;
  ws.gap_target = opt.inner_gap_fraction * opt.tol;
  HopfTracker tr;

  auto grad_h = [&](const Vector& p) {
    Vector g = Vector::Zero(n);
    for (std::size_t j : active) g += prob.terms[j].t * prob.terms[j].H.gradient(p);
    return g;
  };
  // Ascent step from y; records dual and primal values; returns the new p.
  auto step = [&](const Vector& y, double& psi) {
    const Vector z = y + gamma * (x - grad_h(y));
    const Vector a = prob.J.prox(z / gamma, 1.0 / gamma, ws);
    Vector p = z - gamma * a;
    check_unbounded(p, x, opt);
    const ExtendedReal jstar = conjugate_after_prox(prob.J, ws, p, a);
    const std::optional<double> v = hopf_objective(prob, x, p, jstar);
    psi = v ? *v : -std::numeric_limits<double>::infinity();
    if (v) tr.dual(*v, p);
    // Paired primal point: u_j = t_j grad H_j(p), u0 = x - sum u_j.
    Vector u0 = x;
    double pv = 0.0;
    for (std::size_t j : active) {
      const auto& term = prob.terms[j];
      const Vector g = term.H.gradient(p);
      u0 -= term.t * g;
      pv += term.t * (p.dot(g) - term.H.eval(p).value());
    }
    const ExtendedReal ju = prob.J.eval(u0);
    if (ju.is_finite()) tr.primal(ju.value() + pv);
    return p;
  };

  Vector p_acc = opt.warm_start && opt.warm_start->size() == n ? *opt.warm_start : Vector(Vector::Zero(n));
  double psi_acc = 0.0;
  p_acc = step(p_acc, psi_acc);
  Vector p_prev = p_acc;
  double t = 1.0;
  long it = 1;
  bool converged = tr.gap() <= opt.tol;
  while (!converged && it < opt.max_iterations) {
    ++it;
    const double t_next = fista_next(t);
    const Vector y = p_acc + ((t - 1.0) / t_next) * (p_acc - p_prev);
    double psi = 0.0;
    Vector p_new = step(y, psi);
    t = t_next;
    if (psi < psi_acc) {
      p_new = step(p_acc, psi);
      t = 1.0;
    }
    p_prev = p_acc;
    p_acc = p_new;
    psi_acc = psi;
    converged = tr.gap() <= opt.tol;
  }
  HopfResult r;
  r.momentum = tr.best_p;
  r.value = tr.best_value;
  r.primal_bound = tr.best_primal;
  r.duality_gap = std::max(0.0, tr.gap());
  r.iterations = it;
  r.converged = converged;
  r.method = "accelerated-ascent";
  return r;
}

// Nonsmooth Hamiltonians next to quadratic ones (total weight c): the Hopf
// objective is the dual of min_W E(x - sum W) + sum_j psi_j(w_j) where
// E = J □ |.|^2/(2c) has gradient p(y) = (y - prox_{cJ}(y))/c. Jacobi
// proximal gradient on W with step c/m and gradient restart; p(y) is the
// momentum.
inline HopfResult hopf_split(const MultiTimeProblem& prob, const Vector& x, const HopfOptions& opt,
                             const std::vector<std::size_t>& blocks, double c) {
  const Index n = x.size();
  const std::size_t m = blocks.size();
  const double gamma = c / static_cast<double>(m);
  ProxWorkspace ws_j;
  ws_j.gap_target = opt.inner_gap_fraction * opt.tol;
  std::vector<ProxWorkspace> ws_b(m);
  for (std::size_t i = 0; i < m; ++i)
    ws_b[i].gap_target = opt.inner_gap_fraction * opt.tol / prob.terms[blocks[i]].t;
  HopfTracker tr;

  auto step = [&](const std::vector<Vector>& Y, std::vector<Vector>& W) {
    const Vector y = x - sum_of(Y, n);
    const Vector a = prob.J.prox(y, c, ws_j);
    const Vector p = (y - a) / c;
    check_unbounded(p, x, opt);
    const ExtendedReal jstar = conjugate_after_prox(prob.J, ws_j, p, a);
    const std::optional<double> v = hopf_objective(prob, x, p, jstar);
    if (v) tr.dual(*v, p);
    double pv = value_after_prox(prob.J, ws_j, a);
    Vector rest = y - a;
    W.resize(m);
    for (std::size_t i = 0; i < m; ++i) {
      const auto& term = prob.terms[blocks[i]];
      const Vector arg = Y[i] + gamma * p;
      W[i] = time_scaled_prox(term, arg, gamma, ws_b[i]);
      pv += psi_value(term, ws_b[i], W[i]);
      rest += Y[i] - W[i];
      if (!v && prob.J.conjugate() != nullptr) {
        const Vector pj = (arg - W[i]) / gamma;
        const std::optional<double> vj = hopf_objective(prob, x, pj, prob.J.conjugate()->eval(pj));
        if (vj) tr.dual(*vj, pj);
      }
    }
    pv += rest.squaredNorm() / (2.0 * c);
    if (std::isfinite(pv)) tr.primal(pv);
  };

  std::vector<Vector> W_acc(m, Vector::Zero(n)), W_prev, W_new, Y;
  W_prev = W_acc;
  double t = 1.0;
  long it = 0;
  bool converged = false;
  while (it < opt.max_iterations) {
    ++it;
    const double t_next = fista_next(t);
    Y = W_acc;
    const double beta = (t - 1.0) / t_next;
    for (std::size_t i = 0; i < m; ++i) Y[i] += beta * (W_acc[i] - W_prev[i]);
    step(Y, W_new);
    t = t_next;
    double restart = 0.0;
    for (std::size_t i = 0; i < m; ++i) restart += (Y[i] - W_new[i]).dot(W_new[i] - W_acc[i]);
    if (restart > 0.0) t = 1.0;
    W_prev.swap(W_acc);
    W_acc.swap(W_new);
    if (tr.gap() <= opt.tol) {
      converged = true;
      break;
    }
  }
  if (!std::isfinite(tr.best_value)) throw Infeasible("hopf_solve: no finite dual value found");
  HopfResult r;
  r.momentum = tr.best_p;
  r.value = tr.best_value;
  r.primal_bound = tr.best_primal;
  r.duality_gap = std::max(0.0, tr.gap());
  r.iterations = it;
  r.converged = converged;
  r.method = "dual-splitting";
  return r;
}

}  // namespace detail

// Maximizes <p,x> - J*(p) - sum_j t_j H_j(p).
inline HopfResult hopf_solve(const MultiTimeProblem& prob, const Vector& x,
                             const HopfOptions& opt = {}) {
  prob.validate();
  require_finite(x, "hopf_solve point");
  require_positive(opt.tol, "hopf_solve tolerance");
  std::vector<std::size_t> active, nonquad;
  bool all_smooth = true;
  double c = 0.0;
  for (std::size_t j = 0; j < prob.terms.size(); ++j) {
    const auto& term = prob.terms[j];
    if (term.t == 0.0) continue;
    active.push_back(j);
    all_smooth = all_smooth && term.H.has_gradient();
    const auto w = term.H.quadratic_weight();
    if (w && *w > 0.0)
      c += *w * term.t;
    else
      nonquad.push_back(j);
  }
  if (all_smooth) return detail::hopf_smooth(prob, x, opt, active);
  if (c > 0.0) return detail::hopf_split(prob, x, opt, nonquad, c);
  throw ConfigurationError(
      "hopf_solve: needs differentiable Hamiltonians or a quadratic term next to nonsmooth ones");
}

}  // namespace hjd
