#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "hjd/functionals/elementary.hpp"
#include "hjd/functionals/image_grid.hpp"
#include "hjd/functionals/total_variation.hpp"
#include "hjd/hj/lax.hpp"

namespace hjd {

// min F1(v) + F2*(x - v) with F1 a (semi)norm; F2star must expose its
// conjugate F2.
struct DegenerateProblem {
  ConvexFunctional F1;
  ConvexFunctional F2star;
  Vector x;

  void validate() const {
    if (!F1.valid() || !F2star.valid()) throw InvalidInput("degenerate problem: missing functional");
    if (F2star.conjugate() == nullptr)
      throw ConfigurationError("degenerate problem: F2* needs its conjugate F2");
    require_finite(x, "degenerate problem point");
  }
};

// (F1 + lambda/2 |.|^2) □ |.|^2/(2 mu).
inline ConvexFunctional regularize_f1(const ConvexFunctional& F1, double lambda, double mu) {
  require_positive(lambda, "lambda");
  require_positive(mu, "mu");
  return moreau_envelope(add_quadratic(F1, lambda), mu);
}

struct SelectResult {
  Vector v;
  Vector w;
  Vector p;  // (x - v - w)/mu
  double value = 0.0;
  double gap = 0.0;
  // F1(v) + F1*(q) - <q, v> with q = p - lambda v, and F2*(w) + F2(p) - <p, w>.
  double fenchel_f1 = 0.0;
  double fenchel_f2 = 0.0;
  long iterations = 0;
  bool converged = false;
  bool stalled = false;
  std::vector<double> history;
};

struct SelectOptions {
  double tol = 1e-6;  // duality gap
  std::optional<double> residual_tol;  // block change; default tol
  long max_iterations = 1000000;
  long stall_window = 0;
  std::optional<Vector> warm_w;
  bool record_history = false;
};

inline MultiTimeProblem select_problem(const DegenerateProblem& prob, double lambda, double mu) {
  return MultiTimeProblem{add_quadratic(prob.F1, lambda),
                          {{*prob.F2star.conjugate(), prob.F2star, 1.0},
                           {quadratic(1.0), quadratic(1.0), mu}}};
}

// Unique minimizer of F1(v) + lambda/2|v|^2 + F2*(w) + |x - v - w|^2/(2 mu),
// by the coupled block iteration: v from the shrunk F1 prox, then w from the
// F2* prox.
inline SelectResult select_solve(const DegenerateProblem& prob, double lambda, double mu,
                                 const SelectOptions& opt = {}) {
  prob.validate();
  require_positive(lambda, "lambda");
  require_positive(mu, "mu");
  const MultiTimeProblem mt = select_problem(prob, lambda, mu);
  LaxOptions lo;
  lo.tol = opt.tol;
  lo.max_iterations = opt.max_iterations;
  lo.record_history = opt.record_history;
  lo.stall_window = opt.stall_window;
  lo.residual_tol = opt.residual_tol ? *opt.residual_tol : opt.tol;
  if (opt.warm_w && opt.warm_w->size() == prob.x.size()) lo.warm_start = {*opt.warm_w, Vector()};
  const DecompositionResult r = lax_solve(mt, prob.x, lo);

  SelectResult out;
  out.v = r.residual;
  out.w = r.components[0];
  out.p = r.components[1] / mu;
  out.value = r.value;
  out.gap = r.duality_gap;
  out.iterations = r.iterations;
  out.converged = r.converged;
  out.stalled = r.stalled;
  out.history = r.history;
  const Vector pc = detail::repair_momentum(mt, out.p);
  const Vector q = pc - lambda * out.v;
  const ConvexFunctional& F2 = *prob.F2star.conjugate();
  const ExtendedReal f1v = prob.F1.eval(out.v);
  const ExtendedReal f1q = prob.F1.conjugate() ? prob.F1.conjugate()->eval(q) : ExtendedReal::infinity();
  out.fenchel_f1 = (f1v + f1q).to_double() - q.dot(out.v);
  out.fenchel_f2 = (prob.F2star.eval(out.w) + F2.eval(pc)).to_double() - pc.dot(out.w);
  return out;
}

struct SelectionSchedule {
  std::vector<double> lambda;
  std::vector<double> mu;

  // lambda_k = lambda0 r^k, mu_k = mu0 r^k for k = 0..steps-1.
  static SelectionSchedule geometric(double lambda0, double mu0, double ratio, int steps) {
    if (!(ratio > 0.0 && ratio < 1.0)) throw InvalidInput("schedule: ratio must lie in (0,1)");
    if (steps < 1) throw InvalidInput("schedule: needs at least one step");
    SelectionSchedule s;
    for (int k = 0; k < steps; ++k) {
      s.lambda.push_back(lambda0 * std::pow(ratio, k));
      s.mu.push_back(mu0 * std::pow(ratio, k));
    }
    return s;
  }

  // 0.1 * 2^-k for k = 0..12 on both parameters, scaled by c on lambda.
  static SelectionSchedule standard(double c = 1.0) { return geometric(0.1 * c, 0.1, 0.5, 13); }

  // lambda_k/mu_k must settle at a finite positive c.
  void validate() const {
    if (lambda.empty() || lambda.size() != mu.size())
      throw InvalidInput("schedule: lambda and mu must be nonempty and of equal length");
    for (std::size_t k = 0; k < lambda.size(); ++k) {
      if (!(lambda[k] > 0.0) || !(mu[k] > 0.0) || !std::isfinite(lambda[k]) || !std::isfinite(mu[k]))
        throw InvalidInput("schedule: parameters must be positive and finite");
      if (k > 0 && (lambda[k] > lambda[k - 1] || mu[k] > mu[k - 1]))
        throw InvalidInput("schedule: parameters must be nonincreasing");
    }
    const std::size_t K = lambda.size();
    const double c_last = lambda[K - 1] / mu[K - 1];
    const double c_first = lambda[0] / mu[0];
    if (c_last < 1e-6 || c_last > 1e6 || c_last / c_first < 1e-3 || c_last / c_first > 1e3)
      throw InvalidInput("schedule: lambda/mu drifts toward 0 or infinity");
    if (K >= 2) {
      const double c_prev = lambda[K - 2] / mu[K - 2];
      if (std::abs(c_last / c_prev - 1.0) > 0.25)
        throw InvalidInput("schedule: lambda/mu has not settled");
    }
  }
};

struct SelectionStep {
  double lambda = 0.0;
  double mu = 0.0;
  Vector v;
  Vector w;
  Vector p;
  double value = 0.0;
  double gap = 0.0;
  double coupling_residual = 0.0;  // |x - v - w|_2
  long iterations = 0;
  bool converged = false;
  bool floor_limited = false;  // gap plateaued at rounding level above the target
};

struct SelectionPath {
  std::vector<SelectionStep> steps;
  Vector v_bar;
  Vector p_bar;
  Index v_fallbacks = 0;  // coordinates where extrapolation fell back to the last iterate
  Index p_fallbacks = 0;
  bool v_norm_monotone = true;
  bool converged = true;
};

// Componentwise Aitken extrapolation of the last three iterates. Coordinates
// without a contracting geometric pattern keep the last value.
inline Vector aitken_limit(const Vector& a, const Vector& b, const Vector& c, Index* fallbacks) {
  Vector out = c;
  const double scale = std::max({1.0, a.cwiseAbs().maxCoeff(), c.cwiseAbs().maxCoeff()});
  Index fb = 0;
  for (Index i = 0; i < c.size(); ++i) {
    const double d1 = b[i] - a[i];
    const double d2 = c[i] - b[i];
    const double denom = d2 - d1;
    if (std::abs(d2) <= 1e-15 * scale) continue;  // already settled
    const double r = d1 != 0.0 ? d2 / d1 : 0.0;
    if (!(r > 0.0 && r < 0.95) || std::abs(denom) <= 1e-14 * scale) {
      ++fb;
      continue;
    }
    out[i] = c[i] - d2 * d2 / denom;
  }
  if (fallbacks != nullptr) *fallbacks = fb;
  return out;
}

// Smallest eigenvalue of the quadratic part of the (v, w) objective; the
// objective is strongly convex with this modulus.
inline double select_strong_convexity(double lambda, double mu) {
  const double a = lambda, b = 1.0 / mu;
  return 2.0 * a * b / (a + 2.0 * b + std::sqrt(a * a + 4.0 * b * b));
}

// Gap plateaus at or below this relative level are accepted as the rounding
// floor of the inner proxes.
inline constexpr double kRoundingGap = 1e-9;

// Each step is solved to a gap that bounds the distance of (v_k, w_k) to the
// exact minimizer by tol.
inline SelectionPath selection_path(const DegenerateProblem& prob, const SelectionSchedule& schedule,
                                    double tol = 2e-4) {
  prob.validate();
  schedule.validate();
  SelectionPath path;
  std::optional<Vector> warm;
  const double bound = 1e6 * (1.0 + prob.x.norm());
  for (std::size_t k = 0; k < schedule.lambda.size(); ++k) {
    SelectOptions opt;
    const double m = select_strong_convexity(schedule.lambda[k], schedule.mu[k]);
    opt.tol = 0.5 * m * tol * tol;
    opt.residual_tol = tol * schedule.mu[k];
    opt.warm_w = warm;
    opt.stall_window = 20000;
    const SelectResult r = select_solve(prob, schedule.lambda[k], schedule.mu[k], opt);
    if (!(r.v.norm() <= bound) || !(r.w.norm() <= bound))
      throw Instability("selection_path: iterates left the a priori bound");
    SelectionStep st;
    st.lambda = schedule.lambda[k];
    st.mu = schedule.mu[k];
    st.v = r.v;
    st.w = r.w;
    st.p = r.p;
    st.value = r.value;
    st.gap = r.gap;
    st.coupling_residual = (prob.x - r.v - r.w).norm();
    st.iterations = r.iterations;
    st.floor_limited = r.stalled && r.gap <= kRoundingGap * (1.0 + std::abs(r.value));
    st.converged = r.converged || st.floor_limited;
    path.converged = path.converged && st.converged;
    if (!path.steps.empty() && st.v.norm() > path.steps.back().v.norm() * (1.0 + 1e-9) + 1e-12)
      path.v_norm_monotone = false;
    path.steps.push_back(std::move(st));
    warm = r.w;
  }
  const std::size_t K = path.steps.size();
  if (K >= 3) {
    path.v_bar = aitken_limit(path.steps[K - 3].v, path.steps[K - 2].v, path.steps[K - 1].v,
                              &path.v_fallbacks);
    path.p_bar = aitken_limit(path.steps[K - 3].p, path.steps[K - 2].p, path.steps[K - 1].p,
                              &path.p_fallbacks);
  } else {
    path.v_bar = path.steps.back().v;
    path.p_bar = path.steps.back().p;
  }
  return path;
}

inline Vector min_norm_over_segment(const Vector& u1, const Vector& u2) {
  if (u1.size() != u2.size()) throw InvalidInput("segment endpoints differ in size");
  const Vector d = u1 - u2;
  const double dd = d.squaredNorm();
  if (dd == 0.0) return u1;
  const double beta = std::clamp(-u2.dot(d) / dd, 0.0, 1.0);
  return beta * u1 + (1.0 - beta) * u2;
}

struct RectangleCase {
  ImageGrid x;
  double alpha = 0.0;
  ImageGrid u1;  // min(a, b) on the rectangle
  ImageGrid u2;  // max(a, b) on the rectangle
  Index top = 0;
  Index left = 0;
};

// M x M image at level b with an interior m1 x m2 rectangle at level a. For
// alpha = m1 m2 / (2 m1 + 2 m2) the TV-L1 minimizers form the segment
// [u1, u2].
inline RectangleCase tvl1_rectangle_case(Index M, Index m1, Index m2, double a, double b) {
  if (M <= 0 || m1 <= 0 || m2 <= 0) throw InvalidInput("rectangle: sizes must be positive");
  if (!(2 * m1 * m2 < M * M)) throw InvalidInput("rectangle: needs 2 m1 m2 < M^2");
  if (a == b) throw InvalidInput("rectangle: levels must differ");
  if (a < 0.0 || a > 1.0 || b < 0.0 || b > 1.0) throw InvalidInput("rectangle: levels must lie in [0,1]");
  if (m1 + 2 > M || m2 + 2 > M) throw InvalidInput("rectangle: must not touch the boundary");
  RectangleCase rc;
  rc.top = (M - m1) / 2;
  rc.left = (M - m2) / 2;
  Vector x = Vector::Constant(M * M, b);
  Vector u1 = x, u2 = x;
  for (Index i = rc.top; i < rc.top + m1; ++i)
    for (Index j = rc.left; j < rc.left + m2; ++j) {
      x[i * M + j] = a;
      u1[i * M + j] = std::min(a, b);
      u2[i * M + j] = std::max(a, b);
    }
  rc.x = ImageGrid(M, M, x);
  rc.u1 = ImageGrid(M, M, u1);
  rc.u2 = ImageGrid(M, M, u2);
  rc.alpha = static_cast<double>(m1 * m2) / static_cast<double>(2 * m1 + 2 * m2);
  return rc;
}

// alpha TV(u) + |x - u|_1.
inline double tvl1_objective(const ImageGrid& x, const Vector& u, double alpha,
                             TvVariant variant = TvVariant::verbatim) {
  return alpha * tv_eval(x.with_values(u), variant) + (x.values() - u).lpNorm<1>();
}

}  // namespace hjd
