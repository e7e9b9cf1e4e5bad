#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "hjd/hj/problem.hpp"

namespace hjd {

struct LaxOptions {
  double tol = 1e-6;
  long max_iterations = 100000;
  bool accelerate = true;
  // Inner iterative proxes are asked for this fraction of tol as their gap.
  double inner_gap_fraction = 1e-3;
  // Block fixed-point residual bound; default tol * max(1, |x|_inf).
  std::optional<double> residual_tol;
  bool record_history = false;
  // Optional initial components, one per term (ignored for t_j = 0).
  std::vector<Vector> warm_start;
  // Coupled path: stop once the blocks have settled and the gap has not
  // dropped by 10% for this many sweeps; 0 disables.
  long stall_window = 0;
};

namespace detail {

// Best dual value seen, with the momentum that produced it.
struct DualCertificate {
  double phi = -std::numeric_limits<double>::infinity();
  Vector p;
  double jstar = 0.0;

  // Returns whether the candidate has a finite dual value.
  bool offer(const MultiTimeProblem& prob, const Vector& x, const Vector& cand,
             const ExtendedReal& jstar_value) {
    const std::optional<double> v = hopf_objective(prob, x, cand, jstar_value);
    if (v && *v > phi) {
      phi = *v;
      p = cand;
      jstar = jstar_value.value();
    }
    return v.has_value();
  }
  bool valid() const { return std::isfinite(phi); }
};

// J*(p) for p = (z - prox)/tau just returned by J's prox into ws.
inline ExtendedReal conjugate_after_prox(const ConvexFunctional& J, const ProxWorkspace& ws,
                                         const Vector& p, const Vector& prox_point) {
  if (ws.conjugate_at_residual) return ExtendedReal(*ws.conjugate_at_residual);
  return conjugate_value(J, p, &prox_point);
}

inline double value_after_prox(const ConvexFunctional& f, const ProxWorkspace& ws,
                               const Vector& point) {
  if (ws.value_at_output) return *ws.value_at_output;
  const ExtendedReal v = f.eval(point);
  return v.to_double();
}

inline double psi_value(const HamiltonianTerm& term, const ProxWorkspace& ws, const Vector& w) {
  if (ws.value_at_output) return *ws.value_at_output;
  return time_scaled_conjugate(term, w).to_double();
}

inline Vector sum_of(const std::vector<Vector>& vs, Index n) {
  Vector s = Vector::Zero(n);
  for (const auto& v : vs) s += v;
  return s;
}

inline double max_block_change(const std::vector<Vector>& a, const std::vector<Vector>& b) {
  double r = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i].size()) r = std::max(r, (a[i] - b[i]).cwiseAbs().maxCoeff());
  return r;
}

// Moves p into dom H_j for every term by H_j's prox, which projects for
// indicators. Returns nullopt when that fails or moves p further than
// max_move. Any p gives a valid dual bound once J*(p) is bounded.
inline std::optional<Vector> project_momentum(const MultiTimeProblem& prob, const Vector& p,
                                              double max_move) {
  Vector out = p;
  for (const auto& term : prob.terms) {
    if (term.t == 0.0 || term.H.eval(out).is_finite()) continue;
    out = term.H.prox(out, 1.0);
  }
  if ((out - p).cwiseAbs().maxCoeff() > max_move) return std::nullopt;
  for (const auto& term : prob.terms)
    if (term.t != 0.0 && !term.H.eval(out).is_finite()) return std::nullopt;
  return out;
}

// A momentum formed as (a - b)/s with small s can leave an indicator's
// domain by rounding; it is projected back when the move is at that level.
inline Vector repair_momentum(const MultiTimeProblem& prob, const Vector& p) {
  const double scale = std::max(1.0, p.size() ? p.cwiseAbs().maxCoeff() : 0.0);
  std::optional<Vector> q = project_momentum(prob, p, 1e-8 * scale);
  return q ? *q : p;
}

inline double fista_next(double t) { return 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t)); }

inline std::vector<Vector> initial_blocks(const LaxOptions& opt, const std::vector<std::size_t>& idx,
                                          Index n) {
  std::vector<Vector> w;
  for (std::size_t j : idx) {
    if (j < opt.warm_start.size() && opt.warm_start[j].size() == n)
      w.push_back(opt.warm_start[j]);
    else
      w.push_back(Vector::Zero(n));
  }
  return w;
}

inline void finish_result(const MultiTimeProblem& prob, const Vector& x, DecompositionResult& r,
                          const DualCertificate& cert, double primal) {
  Vector sum = Vector::Zero(x.size());
  for (const auto& u : r.components) sum += u;
  r.residual = x - sum;
  r.value = primal;
  if (cert.valid()) {
    r.momentum = cert.p;
    r.initial_conjugate = cert.jstar;
    r.duality_gap = std::max(0.0, primal - cert.phi);
  } else {
    r.duality_gap = std::numeric_limits<double>::infinity();
  }
  r.h1_holds = prob.h1_holds();
}

inline void check_budget_probe(double primal) {
  if (!std::isfinite(primal)) throw Infeasible("lax_solve: primal objective is +inf at every probe");
}

// Some term is c/2|.|^2. Its component is the coupling residual, so the
// problem reads min J(u0) + sum_j psi_j(w_j) + |x - u0 - sum w|^2/(2s) with
// s = c t. Gauss-Seidel sweeps u0 then w_j in ascending j, accelerated with
// monotone restart.
inline DecompositionResult lax_coupled(const MultiTimeProblem& prob, const Vector& x,
                                       const LaxOptions& opt, const std::vector<std::size_t>& active,
                                       std::size_t q) {
  const Index n = x.size();
  const double s = *prob.terms[q].H.quadratic_weight() * prob.terms[q].t;
  std::vector<std::size_t> blocks;
  for (std::size_t j : active)
    if (j != q) blocks.push_back(j);
  const std::size_t m = blocks.size();

  ProxWorkspace ws_j;
  ws_j.gap_target = opt.inner_gap_fraction * opt.tol;
  std::vector<ProxWorkspace> ws_b(m);
  for (std::size_t i = 0; i < m; ++i)
    ws_b[i].gap_target = opt.inner_gap_fraction * opt.tol / prob.terms[blocks[i]].t;

  DualCertificate cert;
  const bool has_jstar = prob.J.conjugate() != nullptr && m > 0;
  const double sigma = prob.J.strong_convexity();
  // p from the coupling residual; its J* needs a full evaluation, so it is
  // only offered when p_J is infeasible and the blocks have settled.
  Vector p_last;
  bool pj_usable = false;
  bool settled = false;
  long it = 1;

  auto sweep = [&](const std::vector<Vector>& Y, Vector& u0, std::vector<Vector>& W) {
    const Vector y0 = x - sum_of(Y, n);
    u0 = prob.J.prox(y0, s, ws_j);
    const Vector pj = (y0 - u0) / s;
    double primal = value_after_prox(prob.J, ws_j, u0);
    const ExtendedReal jstar_pj = conjugate_after_prox(prob.J, ws_j, pj, u0);
    pj_usable = cert.offer(prob, x, pj, jstar_pj);
    if (!pj_usable && sigma > 0.0 && jstar_pj.is_finite() && (settled || it % 16 == 0)) {
      // J* is (1/sigma)-smooth with gradient u0 at pj.
      if (const auto ph = project_momentum(prob, pj, std::numeric_limits<double>::infinity())) {
        const Vector d = *ph - pj;
        pj_usable = cert.offer(prob, x, *ph,
                               ExtendedReal(jstar_pj.value() + u0.dot(d) + d.squaredNorm() / (2.0 * sigma)));
      }
    }
    Vector rest = y0 - u0;
    W.resize(m);
    for (std::size_t i = 0; i < m; ++i) {
      rest += Y[i];
      W[i] = time_scaled_prox(prob.terms[blocks[i]], rest, s, ws_b[i]);
      primal += psi_value(prob.terms[blocks[i]], ws_b[i], W[i]);
      rest -= W[i];
    }
    primal += rest.squaredNorm() / (2.0 * s);
    p_last = rest / s;
    return primal;
  };
  long last_offer = -1;
  auto offer_last = [&](bool force) {
    if (pj_usable || !has_jstar) return;
    if (!force && last_offer >= 0 && it - last_offer < 32) return;
    last_offer = it;
    const Vector p = repair_momentum(prob, p_last);
    cert.offer(prob, x, p, prob.J.conjugate()->eval(p));
  };

  std::vector<Vector> W_acc = initial_blocks(opt, blocks, n);
  std::vector<Vector> W_prev = W_acc;
  std::vector<Vector> W_new, Y;
  Vector u0_acc, u0_new;
  double p_acc = sweep(W_acc, u0_acc, W_new);
  W_prev = W_acc;
  W_acc = W_new;
  double t = 1.0;
  bool converged = false;
  const double res_scale = std::max(1.0, x.size() ? x.cwiseAbs().maxCoeff() : 0.0);
  double residual = m == 0 ? 0.0 : std::numeric_limits<double>::infinity();
  const double res_tol = opt.residual_tol ? *opt.residual_tol : opt.tol * res_scale;
  std::vector<double> history;
  if (opt.record_history) history.push_back(p_acc);
  auto done = [&] {
    if (!(residual <= res_tol)) return false;
    if (p_acc - cert.phi > opt.tol) offer_last(false);
    return p_acc - cert.phi <= opt.tol;
  };
  converged = std::isfinite(p_acc) && done();
  double stall_best = std::numeric_limits<double>::infinity();
  long stall_since = it;
  bool stalled = false;
  while (!converged && it < opt.max_iterations) {
    ++it;
    const double t_next = fista_next(t);
    Y = W_acc;
    if (opt.accelerate) {
      const double beta = (t - 1.0) / t_next;
      for (std::size_t i = 0; i < m; ++i) Y[i] += beta * (W_acc[i] - W_prev[i]);
    }
    double p_new = sweep(Y, u0_new, W_new);
    t = t_next;
    if (!(p_new <= p_acc + 1e-14 * std::max(1.0, std::abs(p_acc)))) {
      Y = W_acc;
      p_new = sweep(Y, u0_new, W_new);
      t = 1.0;
    }
    residual = max_block_change(W_new, Y);
    settled = residual <= 10.0 * res_tol;
    W_prev.swap(W_acc);
    W_acc.swap(W_new);
    u0_acc.swap(u0_new);
    p_acc = p_new;
    if (opt.record_history) history.push_back(p_acc);
    converged = std::isfinite(p_acc) && done();
    if (!converged && opt.stall_window > 0 && residual <= res_tol) {
      const double gap = p_acc - cert.phi;
      if (gap < 0.9 * stall_best) {
        stall_best = gap;
        stall_since = it;
      } else if (it - stall_since >= opt.stall_window) {
        stalled = true;
        break;
      }
    }
  }
  check_budget_probe(p_acc);
  if (!converged) offer_last(true);

  DecompositionResult r;
  r.components.assign(prob.terms.size(), Vector::Zero(n));
  Vector sum_w = Vector::Zero(n);
  for (std::size_t i = 0; i < m; ++i) {
    r.components[blocks[i]] = W_acc[i];
    sum_w += W_acc[i];
  }
  r.components[q] = x - u0_acc - sum_w;
  r.iterations = it;
  r.method = "coupled-block";
  r.history = std::move(history);
  finish_result(prob, x, r, cert, p_acc);
  r.converged = converged;
  r.stalled = stalled;
  return r;
}

// J differentiable: accelerated proximal gradient on the components.
inline DecompositionResult lax_smooth_initial(const MultiTimeProblem& prob, const Vector& x,
                                              const LaxOptions& opt,
                                              const std::vector<std::size_t>& active) {
  const Index n = x.size();
  const std::size_t m = active.size();
  const double lip = static_cast<double>(m) * prob.J.gradient_lipschitz();
  if (!(lip > 0.0)) throw ConfigurationError("lax_solve: initial data has no curvature bound");
  const double gamma = 1.0 / lip;
  ProxWorkspace ws_y, ws_n;
  ws_y.gap_target = ws_n.gap_target = opt.inner_gap_fraction * opt.tol;
  std::vector<ProxWorkspace> ws_b(m);
  for (std::size_t i = 0; i < m; ++i)
    ws_b[i].gap_target = opt.inner_gap_fraction * opt.tol / prob.terms[active[i]].t;
  DualCertificate cert;

  auto step = [&](const std::vector<Vector>& Y, std::vector<Vector>& W) {
    const Vector uy = x - sum_of(Y, n);
    const Vector g = prob.J.value_and_gradient(uy, ws_y).second;
    W.resize(m);
    double primal = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      W[i] = time_scaled_prox(prob.terms[active[i]], Y[i] + gamma * g, gamma, ws_b[i]);
      primal += psi_value(prob.terms[active[i]], ws_b[i], W[i]);
    }
    const Vector u0 = x - sum_of(W, n);
    ws_n.clear_reports();
    const auto [val, grad] = prob.J.value_and_gradient(u0, ws_n);
    primal += val;
    ExtendedReal jstar = ws_n.conjugate_at_residual
                             ? ExtendedReal(*ws_n.conjugate_at_residual)
                             : (prob.J.conjugate() ? prob.J.conjugate()->eval(grad)
                                                   : ExtendedReal(grad.dot(u0) - val));
    cert.offer(prob, x, grad, jstar);
    return primal;
  };

  std::vector<Vector> W_acc = initial_blocks(opt, active, n);
  std::vector<Vector> W_prev = W_acc, W_new, Y;
  double p_acc = step(W_acc, W_new);
  W_prev = W_acc;
  W_acc = W_new;
  double t = 1.0;
  long it = 1;
  const double res_scale = std::max(1.0, x.cwiseAbs().maxCoeff());
  double residual = std::numeric_limits<double>::infinity();
  bool converged = false;
  while (it < opt.max_iterations) {
    ++it;
    const double t_next = fista_next(t);
    Y = W_acc;
    if (opt.accelerate) {
      const double beta = (t - 1.0) / t_next;
      for (std::size_t i = 0; i < m; ++i) Y[i] += beta * (W_acc[i] - W_prev[i]);
    }
    double p_new = step(Y, W_new);
    t = t_next;
    if (!(p_new <= p_acc + 1e-14 * std::max(1.0, std::abs(p_acc)))) {
      Y = W_acc;
      p_new = step(Y, W_new);
      t = 1.0;
    }
    residual = max_block_change(W_new, Y);
    W_prev.swap(W_acc);
    W_acc.swap(W_new);
    p_acc = p_new;
    if (p_acc - cert.phi <= opt.tol &&
        residual <= (opt.residual_tol ? *opt.residual_tol : opt.tol * res_scale)) {
      converged = true;
      break;
    }
  }
  check_budget_probe(p_acc);
  DecompositionResult r;
  r.components.assign(prob.terms.size(), Vector::Zero(n));
  for (std::size_t i = 0; i < m; ++i) r.components[active[i]] = W_acc[i];
  r.iterations = it;
  r.method = "proximal-gradient";
  finish_result(prob, x, r, cert, p_acc);
  r.converged = converged;
  return r;
}

// General case: consensus ADMM on u0 + sum_j u_j = x with residual
// balancing of the penalty.
inline DecompositionResult lax_admm(const MultiTimeProblem& prob, const Vector& x,
                                    const LaxOptions& opt, const std::vector<std::size_t>& active) {
  const Index n = x.size();
  const std::size_t m = active.size();
  const std::size_t K = m + 1;
  std::vector<Vector> U(K, Vector::Zero(n)), Z(K, Vector::Zero(n)), Yd(K, Vector::Zero(n));
  Z[0] = x;
  {
    std::vector<Vector> w0 = initial_blocks(opt, active, n);
    for (std::size_t i = 0; i < m; ++i) {
      Z[i + 1] = w0[i];
      Z[0] -= w0[i];
    }
  }
  std::vector<ProxWorkspace> ws(K);
  for (std::size_t i = 0; i < K; ++i)
    ws[i].gap_target =
        opt.inner_gap_fraction * opt.tol / (i == 0 ? 1.0 : prob.terms[active[i - 1]].t);
  DualCertificate cert;
  double rho = 1.0;
  double best_primal = std::numeric_limits<double>::infinity();
  std::vector<Vector> best_components;
  long it = 0;
  bool converged = false;
  const double scale = std::max(1.0, x.cwiseAbs().maxCoeff());
  while (it < opt.max_iterations) {
    ++it;
    for (std::size_t i = 0; i < K; ++i) {
      const Vector a = Z[i] - Yd[i];
      if (i == 0) {
        U[0] = prob.J.prox(a, 1.0 / rho, ws[0]);
        const Vector p = rho * (a - U[0]);
        cert.offer(prob, x, p, conjugate_after_prox(prob.J, ws[0], p, U[0]));
      } else {
        U[i] = time_scaled_prox(prob.terms[active[i - 1]], a, 1.0 / rho, ws[i]);
        if (prob.J.conjugate() != nullptr) {
          const Vector p = rho * (a - U[i]);
          cert.offer(prob, x, p, prob.J.conjugate()->eval(p));
        }
      }
    }
    Vector corr = -x;
    for (std::size_t i = 0; i < K; ++i) corr += U[i] + Yd[i];
    corr /= static_cast<double>(K);
    double r_norm = 0.0, s_norm = 0.0;
    for (std::size_t i = 0; i < K; ++i) {
      const Vector z_new = U[i] + Yd[i] - corr;
      s_norm += (z_new - Z[i]).squaredNorm();
      Z[i] = z_new;
      Yd[i] += U[i] - Z[i];
      r_norm += (U[i] - Z[i]).squaredNorm();
    }
    r_norm = std::sqrt(r_norm);
    s_norm = rho * std::sqrt(s_norm);

    // Feasible primal probe: absorb the constraint violation into u0.
    std::vector<Vector> comps(m);
    Vector u0 = x;
    for (std::size_t i = 0; i < m; ++i) {
      comps[i] = U[i + 1];
      u0 -= comps[i];
    }
    ExtendedReal pv = prob.J.eval(u0);
    for (std::size_t i = 0; i < m; ++i)
      pv += time_scaled_conjugate(prob.terms[active[i]], comps[i]);
    if (pv.is_finite() && pv.value() < best_primal) {
      best_primal = pv.value();
      best_components = comps;
    }
    if (best_primal - cert.phi <= opt.tol && r_norm <= opt.tol * scale) {
      converged = true;
      break;
    }
    if (it % 10 == 0) {
      const double f = (r_norm > 10.0 * s_norm) ? 2.0 : (s_norm > 10.0 * r_norm ? 0.5 : 1.0);
      if (f != 1.0) {
        rho *= f;
        for (auto& y : Yd) y /= f;
      }
    }
  }
  check_budget_probe(best_primal);
  DecompositionResult r;
  r.components.assign(prob.terms.size(), Vector::Zero(n));
  for (std::size_t i = 0; i < m; ++i) r.components[active[i]] = best_components[i];
  r.iterations = it;
  r.method = "admm";
  finish_result(prob, x, r, cert, best_primal);
  r.converged = converged;
  return r;
}

}  // namespace detail

// Minimizes J(x - sum u_j) + sum_j t_j H_j*(u_j/t_j) with u_j = 0 for
// t_j = 0. The gap is certified against the Hopf objective at the best
// momentum candidate met during the iteration.
inline DecompositionResult lax_solve(const MultiTimeProblem& prob, const Vector& x,
                                     const LaxOptions& opt = {}) {
  prob.validate();
  require_finite(x, "lax_solve point");
  require_positive(opt.tol, "lax_solve tolerance");
  std::vector<std::size_t> active;
  std::optional<std::size_t> quad;
  for (std::size_t j = 0; j < prob.terms.size(); ++j) {
    if (prob.terms[j].t == 0.0) continue;
    active.push_back(j);
    const auto c = prob.terms[j].H.quadratic_weight();
    if (!quad && c && *c > 0.0) quad = j;
  }
  if (quad) return detail::lax_coupled(prob, x, opt, active, *quad);
  if (prob.J.has_gradient()) return detail::lax_smooth_initial(prob, x, opt, active);
  return detail::lax_admm(prob, x, opt, active);
}

}  // namespace hjd
