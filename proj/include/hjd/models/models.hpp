#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "hjd/functionals/elementary.hpp"
#include "hjd/functionals/image_grid.hpp"
#include "hjd/functionals/total_variation.hpp"
#include "hjd/functionals/tv_functionals.hpp"
#include "hjd/hj/lax.hpp"
#include "hjd/selection/selection.hpp"

namespace hjd {

enum class ModelKind { rof, a2bc, meyer_g_ball, tvl1, tvl1_reg };

inline std::string_view to_string(ModelKind k) {
  switch (k) {
    case ModelKind::rof: return "rof";
    case ModelKind::a2bc: return "a2bc";
    case ModelKind::meyer_g_ball: return "meyer-g";
    case ModelKind::tvl1: return "tvl1";
    case ModelKind::tvl1_reg: return "tvl1-reg";
  }
  return "?";
}

inline ModelKind model_kind_from_string(std::string_view s) {
  for (ModelKind k : {ModelKind::rof, ModelKind::a2bc, ModelKind::meyer_g_ball, ModelKind::tvl1,
                      ModelKind::tvl1_reg})
    if (to_string(k) == s) return k;
  throw InvalidInput("unknown model '" + std::string(s) + "'");
}

struct ModelSpec {
  ModelKind kind = ModelKind::rof;
  std::map<std::string, double> parameters;

  static std::vector<std::string> required(ModelKind k) {
    switch (k) {
      case ModelKind::rof: return {"lambda"};
      case ModelKind::a2bc: return {"mu", "lambda"};
      case ModelKind::meyer_g_ball: return {"beta"};
      case ModelKind::tvl1: return {"alpha"};
      case ModelKind::tvl1_reg: return {"alpha", "lambda", "mu"};
    }
    return {};
  }

  void validate() const {
    for (const std::string& name : required(kind)) {
      auto it = parameters.find(name);
      if (it == parameters.end())
        throw ConfigurationError(std::string(to_string(kind)) + " needs parameter " + name);
      if (!(it->second > 0.0) || !std::isfinite(it->second))
        throw InvalidInput(std::string(to_string(kind)) + ": " + name + " must be positive");
    }
  }

  double get(const std::string& name) const {
    auto it = parameters.find(name);
    if (it == parameters.end()) throw ConfigurationError("missing parameter " + name);
    return it->second;
  }
};

struct ModelOptions {
  double tol = 1e-6;
  TvVariant variant = TvVariant::verbatim;
};

// TV(u) + I{|v|_G <= mu} + |x - u - v|^2/(2 lambda) as the two-time problem
// with J = TV, (H1, t1) = (TV, mu) and (H2, t2) = (1/2|.|^2, lambda).
inline MultiTimeProblem a2bc_problem(Index rows, Index cols, double mu, double lambda,
                                     TvVariant variant = TvVariant::verbatim) {
  require_positive(mu, "mu");
  require_positive(lambda, "lambda");
  TvSettings ts;
  ts.variant = variant;
  return MultiTimeProblem{tv_functional(rows, cols, 1.0, ts),
                          {{tv_functional(rows, cols, 1.0, ts), gball_indicator(rows, cols, 1.0, ts), mu},
                           {quadratic(1.0), quadratic(1.0), lambda}}};
}

// Components are (v, x - u - v); the residual is the cartoon u.
inline DecompositionResult a2bc(const ImageGrid& x, double mu, double lambda,
                                const ModelOptions& opt = {}) {
  const MultiTimeProblem prob = a2bc_problem(x.rows(), x.cols(), mu, lambda, opt.variant);
  LaxOptions lo;
  lo.tol = opt.tol;
  DecompositionResult r = lax_solve(prob, x.values(), lo);
  r.method = "a2bc/" + r.method;
  return r;
}

inline DecompositionResult rof(const ImageGrid& x, double lambda, const ModelOptions& opt = {}) {
  require_positive(lambda, "lambda");
  const DifferenceGraph graph(x.rows(), x.cols(), opt.variant);
  const TvProxReport rep = tv_prox_solve_to_gap(graph, x.values(), lambda, opt.tol);
  DecompositionResult r;
  r.residual = rep.u;
  r.components = {x.values() - rep.u};
  r.value = graph.total_variation(rep.u) + r.components[0].squaredNorm() / (2.0 * lambda);
  r.momentum = Vector(r.components[0] / lambda);
  r.initial_conjugate = 0.0;
  r.duality_gap = rep.gap;
  r.iterations = rep.iterations;
  r.converged = rep.converged;
  r.h1_holds = false;
  r.method = "rof/tv-prox";
  return r;
}

// TV(u) subject to |x - u|_G <= beta, as the limit of the regularized path
// with F1 = TV and F2* the beta-ball indicator.
inline DecompositionResult meyer_g_ball(const ImageGrid& x, double beta, const ModelOptions& opt = {},
                                        SelectionSchedule schedule = SelectionSchedule::standard()) {
  require_positive(beta, "beta");
  TvSettings ts;
  ts.variant = opt.variant;
  const DegenerateProblem dp{tv_functional(x.rows(), x.cols(), 1.0, ts),
                             gball_indicator(x.rows(), x.cols(), beta, ts), x.values()};
  const SelectionPath path = selection_path(dp, schedule, std::sqrt(opt.tol));
  const MultiTimeProblem prob{dp.F1, {{tv_functional(x.rows(), x.cols(), 1.0, ts),
                                       gball_indicator(x.rows(), x.cols(), 1.0, ts), beta}}};
  DecompositionResult r;
  r.residual = path.v_bar;
  r.components = {x.values() - path.v_bar};
  r.value = prob.J.eval(path.v_bar).to_double();
  const ExtendedReal feasible = time_scaled_conjugate(prob.terms[0], r.components[0]);
  if (feasible.is_infinite()) r.value = std::numeric_limits<double>::infinity();
  // Best Hopf bound over the extrapolated, last and zero momenta; p = 0
  // certifies the constant cartoon once beta exceeds the G-norm of x.
  std::optional<double> dual;
  for (const Vector& p : {path.p_bar, path.steps.back().p, Vector(Vector::Zero(x.size()))}) {
    const ExtendedReal jstar = prob.J.conjugate()->eval(p);
    const std::optional<double> d = hopf_objective(prob, x.values(), p, jstar);
    if (d && (!dual || *d > *dual)) {
      dual = d;
      r.momentum = p;
      r.initial_conjugate = jstar.value();
    }
  }
  r.duality_gap = dual ? std::max(0.0, r.value - *dual) : std::numeric_limits<double>::infinity();
  for (const auto& st : path.steps) r.iterations += st.iterations;
  r.converged = std::isfinite(r.value) && r.duality_gap <= opt.tol;
  r.stalled = !path.converged;
  r.h1_holds = prob.h1_holds();
  r.method = "meyer/selection";
  return r;
}

struct Tvl1Result {
  double value = 0.0;       // best primal objective
  double dual_value = 0.0;  // best certified lower bound
  double gap = 0.0;
  ImageGrid witness;
  bool uniqueness_warning = false;
  long iterations = 0;
  bool converged = false;
};

struct Tvl1Options {
  double tol = 1e-6;
  TvVariant variant = TvVariant::verbatim;
  long max_iterations = 2'000'000;
  bool probe_uniqueness = true;
};

namespace detail {

// alpha |Du|_1 + |u - x|_1 by restarted primal-dual iterations. Dual
// candidates f in [-alpha, alpha]^E are rescaled into |D^T f|_inf <= 1, where
// <f, Dx> is a lower bound.
struct Tvl1Solver {
  const DifferenceGraph& graph;
  const Vector& x;
  double alpha;

  double primal(const Vector& u) const {
    return alpha * graph.total_variation(u) + (u - x).lpNorm<1>();
  }

  double dual(const Vector& f, Vector& scratch) const {
    graph.adjoint(f, scratch);
    const double s = std::max(1.0, scratch.size() ? scratch.cwiseAbs().maxCoeff() : 0.0);
    graph.forward(x, scratch);
    return f.dot(scratch) / s;
  }

  Tvl1Result run(const Tvl1Options& opt) const {
    const Index n = x.size();
    const Index m = graph.edge_count();
    Tvl1Result res;
    if (m == 0) {
      res.witness = ImageGrid(graph.rows(), graph.cols(), x);
      res.converged = true;
      return res;
    }
    const double L = graph.norm_bound();
    const double scale = std::max(1.0, x.cwiseAbs().maxCoeff());
    // primal weight: dual entries live on the scale alpha, primal on the image scale
    const double omega = alpha / scale;
    const double tau = 0.99 / (omega * std::sqrt(L));
    const double sigma = 0.99 * omega / std::sqrt(L);

    Vector u = x, f = Vector::Zero(m);
    Vector u_bar = u, u_sum = Vector::Zero(n), f_sum = Vector::Zero(m);
    Vector du(m), dtf(n), u_new(n), scratch(std::max(n, m));
    long since_restart = 0;

    double best_primal = primal(u);
    Vector best_u = u;
    double best_dual = 0.0;  // f = 0
    double gap_at_restart = best_primal - best_dual;
    constexpr long kCheckEvery = 64;
    long it = 0;
    const double target = opt.tol;
    while (best_primal - best_dual > target && it < opt.max_iterations) {
      ++it;
      graph.forward(u_bar, du);
      f = (f + sigma * du).cwiseMax(-alpha).cwiseMin(alpha);
      graph.adjoint(f, dtf);
      const Vector z = u - tau * dtf - x;
      u_new = x + l1_prox(z, tau);
      u_bar = 2.0 * u_new - u;
      u.swap(u_new);
      u_sum += u;
      f_sum += f;
      ++since_restart;
      if (it % kCheckEvery != 0) continue;

      const Vector u_avg = u_sum / static_cast<double>(since_restart);
      const Vector f_avg = f_sum / static_cast<double>(since_restart);
      const double p_cur = primal(u), p_avg = primal(u_avg);
      const double d_cur = dual(f, scratch), d_avg = dual(f_avg, scratch);
      if (p_cur < best_primal) {
        best_primal = p_cur;
        best_u = u;
      }
      if (p_avg < best_primal) {
        best_primal = p_avg;
        best_u = u_avg;
      }
      best_dual = std::max({best_dual, d_cur, d_avg});
      const double gap_cur = p_cur - d_cur, gap_avg = p_avg - d_avg;
      if (std::min(gap_cur, gap_avg) <= 0.5 * gap_at_restart) {
        if (gap_avg < gap_cur) {
          u = u_avg;
          f = f_avg;
        }
        u_bar = u;
        u_sum.setZero();
        f_sum.setZero();
        since_restart = 0;
        gap_at_restart = std::min(gap_cur, gap_avg);
      }
    }
    res.value = best_primal;
    res.dual_value = best_dual;
    res.gap = std::max(0.0, best_primal - best_dual);
    res.witness = ImageGrid(graph.rows(), graph.cols(), best_u);
    res.iterations = it;
    res.converged = res.gap <= target;
    return res;
  }
};

}  // namespace detail

// Selected minimizers of the regularized problem anchored at 0 and at far,
// i.e. with lambda/2 |v - anchor|^2. Distinct results mean the minimizer set
// is not a single point.
inline bool tvl1_flat_direction(const ImageGrid& x, double alpha, const Vector& far,
                                TvVariant variant) {
  TvSettings ts;
  ts.variant = variant;
  const double scale = std::max(1.0, x.values().cwiseAbs().maxCoeff());
  const double lambda = 1e-3 / scale, mu = 1e-3 * scale;
  const ConvexFunctional F1 = tv_functional(x.rows(), x.cols(), alpha, ts);
  const ConvexFunctional F2star = l1_norm(1.0);
  SelectOptions so;
  so.tol = 1e-10 * scale * static_cast<double>(x.size());
  so.residual_tol = 1e-8 * scale;
  const SelectResult at_zero = select_solve({F1, F2star, x.values()}, lambda, mu, so);
  // lambda/2|v - a|^2 = lambda/2|v|^2 - lambda<a, v> + const
  const ConvexFunctional F1a = tilted(F1, -lambda * far, 0.0);
  const SelectResult at_far = select_solve({F1a, F2star, x.values()}, lambda, mu, so);
  const double spread = (at_zero.v - at_far.v).norm();
  return spread > 1e-2 * scale * std::sqrt(static_cast<double>(x.size()));
}

inline Tvl1Result tvl1(const ImageGrid& x, double alpha, const Tvl1Options& opt = {}) {
  require_positive(alpha, "alpha");
  require_finite(x.values(), "tvl1 input");
  const DifferenceGraph graph(x.rows(), x.cols(), opt.variant);
  Tvl1Result r = detail::Tvl1Solver{graph, x.values(), alpha}.run(opt);
  if (opt.probe_uniqueness && x.size() > 1) {
    const double scale = std::max(1.0, x.values().cwiseAbs().maxCoeff());
    r.uniqueness_warning = tvl1_flat_direction(x, alpha, Vector::Constant(x.size(), 2.0 * scale) - x.values(),
                                               opt.variant) ||
                           tvl1_flat_direction(x, alpha, x.values(), opt.variant);
  }
  return r;
}

struct Tvl1RegResult {
  ImageGrid v;
  ImageGrid w;
  ImageGrid p;
  double value = 0.0;
  double gap = 0.0;
  long iterations = 0;
  bool converged = false;
};

// alpha TV(v) + |w|_1 + lambda/2 |v|^2 + |x - v - w|^2/(2 mu).
inline Tvl1RegResult tvl1_reg(const ImageGrid& x, double alpha, double lambda, double mu,
                              const ModelOptions& opt = {}) {
  require_positive(alpha, "alpha");
  TvSettings ts;
  ts.variant = opt.variant;
  const DegenerateProblem dp{tv_functional(x.rows(), x.cols(), alpha, ts), l1_norm(1.0), x.values()};
  SelectOptions so;
  so.tol = opt.tol;
  const SelectResult s = select_solve(dp, lambda, mu, so);
  Tvl1RegResult r;
  r.v = x.with_values(s.v);
  r.w = x.with_values(s.w);
  r.p = x.with_values(s.p);
  r.value = s.value;
  r.gap = s.gap;
  r.iterations = s.iterations;
  r.converged = s.converged;
  return r;
}

// Uniform record of one decomposition: named component images, the
// momentum when the model has one, and the solver report.
struct ModelRun {
  ModelKind kind = ModelKind::rof;
  std::vector<std::pair<std::string, ImageGrid>> images;
  std::optional<Vector> momentum;
  double value = 0.0;
  double gap = 0.0;
  long iterations = 0;
  bool converged = false;
  bool uniqueness_warning = false;
};

inline ModelRun run_model(const ModelSpec& spec, const ImageGrid& x, const ModelOptions& opt = {}) {
  spec.validate();
  ModelRun run;
  run.kind = spec.kind;
  auto take = [&](const DecompositionResult& r) {
    run.momentum = r.momentum;
    run.value = r.value;
    run.gap = r.duality_gap;
    run.iterations = r.iterations;
    run.converged = r.converged;
  };
  switch (spec.kind) {
    case ModelKind::rof: {
      const DecompositionResult r = rof(x, spec.get("lambda"), opt);
      take(r);
      run.images = {{"u", x.with_values(r.residual)}, {"v", x.with_values(r.components[0])}};
      break;
    }
    case ModelKind::a2bc: {
      const DecompositionResult r = a2bc(x, spec.get("mu"), spec.get("lambda"), opt);
      take(r);
      run.images = {{"u", x.with_values(r.residual)},
                    {"v", x.with_values(r.components[0])},
                    {"w", x.with_values(r.components[1])}};
      break;
    }
    case ModelKind::meyer_g_ball: {
      const DecompositionResult r = meyer_g_ball(x, spec.get("beta"), opt);
      take(r);
      run.images = {{"u", x.with_values(r.residual)}, {"v", x.with_values(r.components[0])}};
      break;
    }
    case ModelKind::tvl1: {
      Tvl1Options to;
      to.tol = opt.tol;
      to.variant = opt.variant;
      const Tvl1Result r = tvl1(x, spec.get("alpha"), to);
      run.images = {{"u", r.witness}, {"v", x.with_values(x.values() - r.witness.values())}};
      run.value = r.value;
      run.gap = r.gap;
      run.iterations = r.iterations;
      run.converged = r.converged;
      run.uniqueness_warning = r.uniqueness_warning;
      break;
    }
    case ModelKind::tvl1_reg: {
      const Tvl1RegResult r = tvl1_reg(x, spec.get("alpha"), spec.get("lambda"), spec.get("mu"), opt);
      run.images = {{"v", r.v}, {"w", r.w}, {"r", x.with_values(x.values() - r.v.values() - r.w.values())}};
      run.momentum = r.p.values();
      run.value = r.value;
      run.gap = r.gap;
      run.iterations = r.iterations;
      run.converged = r.converged;
      break;
    }
  }
  return run;
}

}  // namespace hjd
