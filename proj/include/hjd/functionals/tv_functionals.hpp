#pragma once

#include <memory>
#include <string>

#include "hjd/core/convex_functional.hpp"
#include "hjd/functionals/total_variation.hpp"

namespace hjd {

struct TvSettings {
  TvVariant variant = TvVariant::verbatim;
  double tol = 1e-8;  // prox distance tolerance when no gap target is requested
  long max_iterations = 2'000'000;
};

namespace detail {

inline double requested_gap(const ProxWorkspace& ws, double tol, double tau) {
  return ws.gap_target ? *ws.gap_target : tol * tol / (2.0 * tau);
}

inline TvProxReport run_tv_prox(const DifferenceGraph& graph, const Vector& z, double tau,
                                const TvSettings& s, ProxWorkspace& ws) {
  const Vector* warm = ws.dual.size() == graph.edge_count() ? &ws.dual : nullptr;
  TvProxReport rep = tv_prox_solve_to_gap(graph, z, tau, requested_gap(ws, s.tol, tau), warm,
                                          s.max_iterations);
  if (!rep.converged)
    throw NonConvergence("tv prox: iteration budget exhausted", rep.u, rep.gap, rep.iterations);
  ws.dual = rep.flow;
  ws.achieved_gap = rep.gap;
  ws.iterations = rep.iterations;
  return rep;
}

// Membership in radius * D^T[-1,1]^E, decided by whether the TV prox at step
// radius sends v to zero.
inline bool gball_contains(const DifferenceGraph& graph, const Vector& v, double radius,
                           double rel_tol) {
  const double vmax = v.size() ? v.cwiseAbs().maxCoeff() : 0.0;
  if (vmax == 0.0) return true;
  if (graph.component_means(v).cwiseAbs().maxCoeff() > rel_tol * std::max(1.0, vmax))
    return false;
  const double zero = rel_tol * std::max(1.0, vmax);
  const TvProxReport rep = tv_prox_solve_to_gap(graph, v, radius, 0.0);
  return rep.u.cwiseAbs().maxCoeff() <= zero;
}

inline ConvexFunctional tv_base(std::shared_ptr<const DifferenceGraph> graph, double weight,
                                TvSettings s) {
  return ConvexFunctional(
      weight == 1.0 ? "tv" : std::to_string(weight) + "*tv",
      [graph, weight](const Vector& x) {
        if (x.size() != graph->vertex_count()) throw InvalidInput("tv: size mismatch");
        return ExtendedReal(weight * graph->total_variation(x));
      },
      [graph, weight, s](const Vector& z, double tau, ProxWorkspace& ws) {
        TvProxReport rep = run_tv_prox(*graph, z, tau * weight, s, ws);
        ws.value_at_output = weight * graph->total_variation(rep.u);
        ws.conjugate_at_residual = 0.0;  // residual = weight * D^T flow, inside the ball
        return rep.u;
      },
      FunctionalFlags{false, false, false, true});
}

inline ConvexFunctional gball_base(std::shared_ptr<const DifferenceGraph> graph, double radius,
                                   TvSettings s) {
  return ConvexFunctional(
      "gball(" + std::to_string(radius) + ")",
      [graph, radius](const Vector& v) {
        if (v.size() != graph->vertex_count()) throw InvalidInput("gball: size mismatch");
        return gball_contains(*graph, v, radius, 1e-7) ? ExtendedReal(0.0)
                                                        : ExtendedReal::infinity();
      },
      [graph, radius, s](const Vector& z, double tau, ProxWorkspace& ws) {
        TvProxReport rep = run_tv_prox(*graph, z, radius, s, ws);
        Vector out = z - rep.u;
        ws.value_at_output = 0.0;
        ws.conjugate_at_residual = radius * graph->total_variation(rep.u) / tau;
        return out;
      },
      FunctionalFlags{});
}

}  // namespace detail

// weight * TV on a rows x cols grid. Conjugate: indicator of the G-ball of
// radius weight.
inline ConvexFunctional tv_functional(Index rows, Index cols, double weight = 1.0,
                                      TvSettings s = {}) {
  require_positive(weight, "tv weight");
  auto graph = std::make_shared<const DifferenceGraph>(rows, cols, s.variant);
  ConvexFunctional f = detail::tv_base(graph, weight, s);
  ConvexFunctional g = detail::gball_base(graph, weight, s);
  g.with_conjugate(detail::tv_base(graph, weight, s));
  f.with_conjugate(g);
  return f;
}

// Indicator of {|v|_G <= radius}. Conjugate: radius * TV.
inline ConvexFunctional gball_indicator(Index rows, Index cols, double radius = 1.0,
                                        TvSettings s = {}) {
  require_positive(radius, "G-ball radius");
  auto graph = std::make_shared<const DifferenceGraph>(rows, cols, s.variant);
  ConvexFunctional f = detail::gball_base(graph, radius, s);
  ConvexFunctional g = detail::tv_base(graph, radius, s);
  g.with_conjugate(detail::gball_base(graph, radius, s));
  f.with_conjugate(g);
  return f;
}

}  // namespace hjd
