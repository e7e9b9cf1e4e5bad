#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "hjd/core/extended_real.hpp"
#include "hjd/functionals/image_grid.hpp"

namespace hjd {

// sum_{i<m1-1} sum_{j<m2-1} |u(i+1,j) - u(i,j)| + |u(i,j+1) - u(i,j)|, or the
// sum of all forward differences for the full variant.
inline double tv_eval(const ImageGrid& u, TvVariant variant = TvVariant::verbatim) {
  const Index m1 = u.rows();
  const Index m2 = u.cols();
  double s = 0.0;
  if (variant == TvVariant::verbatim) {
    for (Index i = 0; i + 1 < m1; ++i)
      for (Index j = 0; j + 1 < m2; ++j)
        s += std::abs(u(i + 1, j) - u(i, j)) + std::abs(u(i, j + 1) - u(i, j));
    return s;
  }
  for (Index i = 0; i < m1; ++i)
    for (Index j = 0; j < m2; ++j) {
      if (i + 1 < m1) s += std::abs(u(i + 1, j) - u(i, j));
      if (j + 1 < m2) s += std::abs(u(i, j + 1) - u(i, j));
    }
  return s;
}

struct TvProxReport {
  Vector u;
  Vector flow;  // dual edge field in [-1,1]^E with u = z - tau * D^T flow
  double gap = 0.0;
  long iterations = 0;
  bool converged = false;
};

namespace detail {

// Gap of the prox problem at the flow f: sum_e |d_e| - f_e d_e with d = Du.
inline double tv_prox_gap(const DifferenceGraph& graph, const Vector& z, double tau,
                          const Vector& f, Vector& u, Vector& du, Vector& scratch) {
  graph.adjoint(f, scratch);
  u = z - tau * scratch;
  graph.forward(u, du);
  double gap = 0.0;
  for (Index e = 0; e < du.size(); ++e) gap += std::abs(du[e]) - f[e] * du[e];
  return std::max(gap, 0.0);
}

}  // namespace detail

// Rounding level of the gap: each difference carries an error of a few ulps
// of the data scale, summed over the edges.
inline double tv_prox_gap_floor(const DifferenceGraph& graph, const Vector& z, double tau) {
  const double scale = (z.size() ? z.cwiseAbs().maxCoeff() : 0.0) + tau * graph.norm_bound();
  return 8.0 * std::numeric_limits<double>::epsilon() *
         static_cast<double>(std::max<Index>(graph.edge_count(), 1)) * scale;
}

// prox_{tau TV}(z) by FISTA with adaptive restart on the box-constrained
// dual. Stops once the gap is below tol^2/(2 tau), which bounds the
// distance to the exact prox by tol, or below the rounding floor.
inline TvProxReport tv_prox_solve_to_gap(const DifferenceGraph& graph, const Vector& z,
                                         double tau, double gap_target,
                                         const Vector* warm_flow = nullptr,
                                         long max_iterations = 2'000'000) {
  require_positive(tau, "tv_prox step");
  require_finite(z, "tv_prox input");
  if (z.size() != graph.vertex_count()) throw InvalidInput("tv_prox: size mismatch");

  TvProxReport rep;
  const Index m = graph.edge_count();
  if (m == 0) {
    rep.u = z;
    rep.flow = Vector();
    rep.converged = true;
    return rep;
  }
  const double target = std::max(gap_target, tv_prox_gap_floor(graph, z, tau));
  const double step = 1.0 / (tau * graph.norm_bound());

  Vector f = (warm_flow != nullptr && warm_flow->size() == m)
                 ? Vector(warm_flow->cwiseMax(-1.0).cwiseMin(1.0))
                 : Vector(Vector::Zero(m));
  Vector y = f;
  Vector f_next(m), u, du, scratch;
  double t = 1.0;

  double best_gap = detail::tv_prox_gap(graph, z, tau, f, u, du, scratch);
  Vector best_f = f;
  Vector best_u = u;
  long it = 0;
  constexpr long kCheckEvery = 4;
  while (best_gap > target && it < max_iterations) {
    ++it;
    graph.adjoint(y, scratch);
    u = z - tau * scratch;
    graph.forward(u, du);
    f_next = (y + step * du).cwiseMax(-1.0).cwiseMin(1.0);
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    if ((y - f_next).dot(f_next - f) > 0.0) {
      y = f_next;
      t = 1.0;
    } else {
      y = f_next + ((t - 1.0) / t_next) * (f_next - f);
      t = t_next;
    }
    f.swap(f_next);
    if (it % kCheckEvery == 0) {
      const double gap = detail::tv_prox_gap(graph, z, tau, f, u, du, scratch);
      if (gap < best_gap) {
        best_gap = gap;
        best_f = f;
        best_u = u;
      }
    }
  }
  rep.u = std::move(best_u);
  rep.flow = std::move(best_f);
  rep.gap = best_gap;
  rep.iterations = it;
  rep.converged = best_gap <= target;
  return rep;
}

inline TvProxReport tv_prox_solve(const DifferenceGraph& graph, const Vector& z, double tau,
                                  double tol, const Vector* warm_flow = nullptr,
                                  long max_iterations = 2'000'000) {
  require_positive(tol, "tv_prox tolerance");
  require_positive(tau, "tv_prox step");
  return tv_prox_solve_to_gap(graph, z, tau, tol * tol / (2.0 * tau), warm_flow, max_iterations);
}

inline ImageGrid tv_prox(const ImageGrid& z, double tau, double tol,
                         TvVariant variant = TvVariant::verbatim) {
  const DifferenceGraph graph(z.rows(), z.cols(), variant);
  TvProxReport rep = tv_prox_solve(graph, z.values(), tau, tol);
  if (!rep.converged)
    throw NonConvergence("tv_prox: iteration budget exhausted", rep.u, rep.gap, rep.iterations);
  return z.with_values(std::move(rep.u));
}

// Projection onto {v : |v|_G <= mu} through the Moreau identity.
inline ImageGrid gball_project(const ImageGrid& z, double mu, double tol,
                               TvVariant variant = TvVariant::verbatim) {
  const ImageGrid u = tv_prox(z, mu, tol, variant);
  return z.with_values(z.values() - u.values());
}

struct GNormOptions {
  double tol = 1e-6;          // bisection width on mu
  double mean_tol = 1e-9;     // relative to |v|_2, per connected component
  double zero_tol = 1e-8;     // prox output counted as zero, relative to max(1, |v|_inf)
};

// Dual norm of TV: smallest mu with v in mu * D^T [-1,1]^E. Infinite unless
// v sums to zero on every connected component of the difference graph.
inline ExtendedReal g_norm(const DifferenceGraph& graph, const Vector& v,
                           const GNormOptions& opt = {}) {
  require_finite(v, "g_norm input");
  if (v.size() != graph.vertex_count()) throw InvalidInput("g_norm: size mismatch");
  const double vnorm = v.norm();
  if (vnorm == 0.0) return ExtendedReal(0.0);
  const Vector means = graph.component_means(v);
  if (means.cwiseAbs().maxCoeff() > opt.mean_tol * vnorm) return ExtendedReal::infinity();

  const double zero = opt.zero_tol * std::max(1.0, v.cwiseAbs().maxCoeff());
  Vector flow;
  auto inside = [&](double mu) {
    TvProxReport rep = tv_prox_solve(graph, v, mu, zero * 1e-3, flow.size() ? &flow : nullptr);
    flow = rep.flow;
    return rep.u.cwiseAbs().maxCoeff() <= zero;
  };
  double lo = 0.0;
  double hi = 2.0 * vnorm * static_cast<double>(std::max(graph.rows(), graph.cols()));
  if (!inside(hi)) throw NonConvergence("g_norm: upper bracket is not feasible", v, hi, 0);
  while (hi - lo > opt.tol) {
    const double mid = 0.5 * (lo + hi);
    if (inside(mid))
      hi = mid;
    else
      lo = mid;
  }
  return ExtendedReal(hi);
}

inline ExtendedReal g_norm(const ImageGrid& v, double tol = 1e-6,
                           TvVariant variant = TvVariant::verbatim) {
  const DifferenceGraph graph(v.rows(), v.cols(), variant);
  GNormOptions opt;
  opt.tol = tol;
  return g_norm(graph, v.values(), opt);
}

}  // namespace hjd
