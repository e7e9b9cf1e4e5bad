#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "hjd/hj/lax.hpp"
#include "hjd/oracle/oracle.hpp"

namespace hjd {

// Vanishing-time schedule: x_k = x + sum_j t_{j,k} v_j with t_{j,k} = alpha_j
// sigma_k, or sigma_k^2 for fast terms, and sigma_k = sigma0 rho^k.
struct SequenceSpec {
  Vector x;
  std::vector<Vector> v;
  std::vector<double> alpha;  // alpha[0] = 1
  std::vector<bool> fast;     // t = sigma^2, so the limit ratio is 0
  double sigma0 = 0.1;
  double rho = 0.5;

  std::size_t size() const noexcept { return v.size(); }

  void validate() const {
    require_finite(x, "limit base point");
    if (v.empty()) throw InvalidInput("limit spec: needs at least one direction");
    if (alpha.size() != v.size() || fast.size() != v.size())
      throw InvalidInput("limit spec: alpha, fast and v must have equal length");
    for (const auto& d : v) {
      if (d.size() != x.size()) throw InvalidInput("limit spec: direction size mismatch");
      require_finite(d, "limit direction");
    }
    if (fast[0] || alpha[0] != 1.0)
      throw InvalidInput("limit spec: the first time is the reference, alpha_1 = 1 and not fast");
    for (std::size_t j = 0; j < v.size(); ++j)
      if (!fast[j] && !(alpha[j] > 0.0 && alpha[j] <= 1.0))
        throw InvalidInput("limit spec: alpha_j must lie in (0, 1] so that t_1 is the slowest");
    if (!(sigma0 > 0.0 && sigma0 < 1.0)) throw InvalidInput("limit spec: sigma0 must lie in (0,1)");
    if (!(rho > 0.0 && rho < 1.0)) throw InvalidInput("limit spec: rho must lie in (0,1)");
  }

  double sigma(int k) const { return sigma0 * std::pow(rho, k); }

  std::vector<double> times(int k) const {
    const double s = sigma(k);
    std::vector<double> t(v.size());
    for (std::size_t j = 0; j < v.size(); ++j) t[j] = fast[j] ? s * s : alpha[j] * s;
    return t;
  }

  Vector point(int k) const {
    const std::vector<double> t = times(k);
    Vector p = x;
    for (std::size_t j = 0; j < v.size(); ++j) p += t[j] * v[j];
    return p;
  }

  // lim t_j / t_1.
  double alpha_limit(std::size_t j) const { return fast[j] ? 0.0 : alpha[j]; }
};

struct LimitRow {
  int k = 0;
  std::vector<double> t;
  double value = 0.0;
  double ratio = 0.0;  // (S(x_k, t_k) - J(x)) / t_{1,k}
  Vector p;
  std::vector<Vector> velocity;  // u_{j,k} / t_{j,k}
  std::vector<double> component_norm;
  double gap = 0.0;
  bool converged = false;
};

struct SlopeEstimate {
  double limit = 0.0;
  double order = 0.0;
  bool degenerate = false;
  bool low_confidence = false;
};

struct LimitTable {
  std::vector<LimitRow> rows;
  SlopeEstimate ratio_estimate;
  bool complete = true;
  std::string failure;
};

// Aitken extrapolation of the last three entries; the order compares the
// decay of consecutive differences with rho.
inline SlopeEstimate slope_estimate(const std::vector<double>& a, double rho = 0.5) {
  if (a.size() < 4) throw InvalidInput("slope_estimate: needs at least four rows");
  SlopeEstimate s;
  const std::size_t K = a.size();
  double scale = 0.0;
  for (double x : a) scale = std::max(scale, std::abs(x));
  scale = std::max(scale, 1.0);
  std::vector<double> d(K - 1);
  for (std::size_t k = 0; k + 1 < K; ++k) d[k] = a[k + 1] - a[k];
  const double d1 = d[K - 3], d2 = d[K - 2];
  if (std::abs(d2) <= 1e-14 * scale) {
    s.limit = a[K - 1];
    s.degenerate = true;
    return s;
  }
  const double denom = d2 - d1;
  if (std::abs(denom) <= 1e-15 * scale) {
    s.limit = a[K - 1];
    s.low_confidence = true;
    return s;
  }
  s.limit = a[K - 1] - d2 * d2 / denom;
  const double r = d2 / d1;
  s.order = r > 0.0 ? std::log(r) / std::log(rho) : 0.0;
  // contraction ratios of the tail should agree and lie in (0, 1)
  for (std::size_t k = 1; k < d.size(); ++k) {
    if (std::abs(d[k - 1]) <= 1e-14 * scale) continue;
    const double rk = d[k] / d[k - 1];
    if (!(rk > 0.0 && rk < 1.0)) s.low_confidence = true;
  }
  if (d.size() >= 3 && std::abs(d[K - 4]) > 1e-14 * scale) {
    const double r_prev = d1 / d[K - 4];
    if (std::abs(r - r_prev) > 0.5 * std::abs(r)) s.low_confidence = true;
  }
  return s;
}

struct LimitOptions {
  double tol = 1e-8;  // relative to t_{1,k}
  std::optional<Vector> probe_subgradient;
};

inline LimitTable run_limit_experiment(const SequenceSpec& spec, const MultiTimeProblem& prob, int K,
                                       const LimitOptions& opt = {}) {
  spec.validate();
  prob.validate();
  if (prob.terms.size() != spec.size()) throw InvalidInput("limit: term count differs from the spec");
  if (K < 1) throw InvalidInput("limit: needs at least one step");
  const ExtendedReal jx = prob.J.eval(spec.x);
  if (jx.is_infinite()) throw InvalidInput("limit: J(x) must be finite");
  if (opt.probe_subgradient) {
    const ConvexFunctional* js = prob.J.conjugate();
    if (js != nullptr) {
      const Vector& q = *opt.probe_subgradient;
      const double fenchel = (jx + js->eval(q)).to_double() - q.dot(spec.x);
      if (!(fenchel <= 1e-8 * (1.0 + std::abs(jx.value()))))
        throw InvalidInput("limit: probe is not a subgradient of J at x");
    }
  }

  LimitTable table;
  std::vector<Vector> warm;
  double prev_t1 = 0.0;
  for (int k = 0; k < K; ++k) {
    const std::vector<double> t = spec.times(k);
    MultiTimeProblem pk = prob;
    for (std::size_t j = 0; j < t.size(); ++j) pk.terms[j].t = t[j];
    LaxOptions lo;
    // the ratio divides by t_1; the floor keeps the gap above rounding of S
    lo.tol = std::max(opt.tol * t[0], 1e-12 * (1.0 + std::abs(jx.value())));
    lo.residual_tol = opt.tol;
    if (!warm.empty()) {
      lo.warm_start = warm;
      for (auto& w : lo.warm_start) w *= t[0] / prev_t1;
    }
    DecompositionResult r;
    try {
      r = lax_solve(pk, spec.point(k), lo);
    } catch (const Error& e) {
      table.complete = false;
      table.failure = e.what();
      break;
    }
    LimitRow row;
    row.k = k;
    row.t = t;
    row.value = r.value;
    row.ratio = (r.value - jx.value()) / t[0];
    row.p = r.momentum ? *r.momentum : Vector();
    for (std::size_t j = 0; j < t.size(); ++j) {
      row.velocity.push_back(r.components[j] / t[j]);
      row.component_norm.push_back(r.components[j].norm());
    }
    row.gap = r.duality_gap;
    row.converged = r.converged;
    table.rows.push_back(std::move(row));
    warm = r.components;
    prev_t1 = t[0];
  }
  if (table.rows.size() >= 4) {
    std::vector<double> ratios;
    for (const auto& row : table.rows) ratios.push_back(row.ratio);
    table.ratio_estimate = slope_estimate(ratios, spec.rho);
  }
  return table;
}

// Closed box lower <= q <= upper; sides may be points.
struct SubdifferentialBox {
  Vector lower;
  Vector upper;

  void validate() const {
    if (lower.size() != upper.size() || lower.size() == 0)
      throw InvalidInput("subdifferential box: bounds must be nonempty and of equal size");
    require_finite(lower, "subdifferential lower");
    require_finite(upper, "subdifferential upper");
    if ((upper.array() < lower.array()).any()) throw InvalidInput("subdifferential box: empty side");
  }

  Vector project(const Vector& q) const { return q.cwiseMax(lower).cwiseMin(upper); }

  // sup_{q in box} <q, y>
  double support(const Vector& y) const {
    double s = 0.0;
    for (Index i = 0; i < y.size(); ++i) s += std::max(lower[i] * y[i], upper[i] * y[i]);
    return s;
  }
};

// d(sum_i w_i |x_i|): w_i sign(x_i), or [-w_i, w_i] where x_i = 0.
inline SubdifferentialBox weighted_l1_subdifferential(const Vector& w, const Vector& x) {
  if (w.size() != x.size()) throw InvalidInput("l1 subdifferential: size mismatch");
  if ((w.array() < 0.0).any()) throw InvalidInput("l1 subdifferential: weights must be nonnegative");
  SubdifferentialBox b{Vector(x.size()), Vector(x.size())};
  for (Index i = 0; i < x.size(); ++i) {
    if (x[i] > 0.0) b.lower[i] = b.upper[i] = w[i];
    else if (x[i] < 0.0) b.lower[i] = b.upper[i] = -w[i];
    else {
      b.lower[i] = -w[i];
      b.upper[i] = w[i];
    }
  }
  return b;
}

struct DualPairTerm {
  ConvexFunctional H;
  ConvexFunctional Hstar;
  double alpha = 1.0;  // lim t_j / t_1
  Vector v;
};

struct DualPairResult {
  double max_value = 0.0;
  Vector q;
  // min_w sigma_C(v_j - w) + H_j*(w), weighted by alpha_j.
  std::vector<double> min_values;
  std::vector<Vector> w_separable;
  // min over all w_j of sigma_C(sum_j alpha_j (v_j - w_j)) + sum_j alpha_j H_j*(w_j)
  double joint_min = 0.0;
  std::vector<Vector> w;
  double separable_residual = 0.0;  // sum of min_values minus max_value
  double joint_residual = 0.0;      // joint_min minus max_value
};

struct DualPairOptions {
  double tol = 1e-10;
  long max_iterations = 200000;
  Index oracle_resolution = 41;
  double oracle_radius = 0.0;  // half width of the w search box; 0 picks one from the data
};

namespace detail {

inline OracleConfig free_coordinate_config(const SubdifferentialBox& box, Index res,
                                           std::vector<Index>& free) {
  free.clear();
  for (Index i = 0; i < box.lower.size(); ++i)
    if (box.upper[i] > box.lower[i]) free.push_back(i);
  OracleConfig cfg;
  cfg.resolution = res;
  cfg.bounds.lower.resize(static_cast<Index>(free.size()));
  cfg.bounds.upper.resize(static_cast<Index>(free.size()));
  for (std::size_t i = 0; i < free.size(); ++i) {
    cfg.bounds.lower[static_cast<Index>(i)] = box.lower[free[i]];
    cfg.bounds.upper[static_cast<Index>(i)] = box.upper[free[i]];
  }
  return cfg;
}

}  // namespace detail

inline DualPairResult dual_pair_solve(const SubdifferentialBox& box, const std::vector<DualPairTerm>& terms,
                                      const DualPairOptions& opt = {}) {
  box.validate();
  const Index n = box.lower.size();
  if (n > 3) throw ConfigurationError("dual_pair_solve: at most three dimensions");
  if (terms.empty()) throw InvalidInput("dual_pair_solve: needs a term");
  for (const auto& term : terms) {
    if (term.v.size() != n) throw InvalidInput("dual_pair_solve: direction size mismatch");
    if (!(term.alpha >= 0.0)) throw InvalidInput("dual_pair_solve: alpha must be nonnegative");
  }

  auto objective = [&](const Vector& q) {
    double s = 0.0;
    for (const auto& term : terms) {
      if (term.alpha == 0.0) continue;
      const ExtendedReal h = term.H.eval(q);
      if (h.is_infinite()) return -std::numeric_limits<double>::infinity();
      s += term.alpha * (q.dot(term.v) - h.value());
    }
    return s;
  };

  DualPairResult res;
  bool smooth = true;
  double lip = 0.0;
  for (const auto& term : terms) {
    if (term.alpha == 0.0) continue;
    if (!term.H.has_gradient()) smooth = false;
    else lip += term.alpha * term.H.gradient_lipschitz();
  }

  Vector q = box.project(Vector::Zero(n));
  if (smooth && lip > 0.0) {
    // projected gradient ascent with step 1/L
    for (long it = 0; it < opt.max_iterations; ++it) {
      Vector g = Vector::Zero(n);
      for (const auto& term : terms)
        if (term.alpha != 0.0) g += term.alpha * (term.v - term.H.gradient(q));
      const Vector q_next = box.project(q + g / lip);
      const double step = (q_next - q).cwiseAbs().maxCoeff();
      q = q_next;
      if (step <= opt.tol) break;
    }
  } else {
    std::vector<Index> free;
    OracleConfig cfg = detail::free_coordinate_config(box, opt.oracle_resolution, free);
    if (!free.empty()) {
      const OracleResult r = brute_max_over_box(
          [&](const Vector& y) {
            Vector full = box.lower;
            for (std::size_t i = 0; i < free.size(); ++i) full[free[i]] = y[static_cast<Index>(i)];
            return objective(full);
          },
          cfg);
      q = box.lower;
      for (std::size_t i = 0; i < free.size(); ++i) q[free[i]] = r.point[static_cast<Index>(i)];
    } else {
      q = box.lower;
    }
  }
  res.q = q;
  res.max_value = objective(q);

  double radius = opt.oracle_radius;
  if (radius <= 0.0) {
    radius = 1.0 + box.lower.cwiseAbs().maxCoeff() + box.upper.cwiseAbs().maxCoeff();
    for (const auto& term : terms) radius = std::max(radius, 2.0 * (1.0 + term.v.cwiseAbs().maxCoeff()));
  }
  OracleConfig wcfg;
  wcfg.resolution = opt.oracle_resolution;
  wcfg.bounds = Box{Vector::Constant(n, -radius), Vector::Constant(n, radius)};

  double sep_total = 0.0;
  for (const auto& term : terms) {
    if (term.alpha == 0.0) {
      res.min_values.push_back(0.0);
      res.w_separable.push_back(Vector::Zero(n));
      continue;
    }
    const OracleResult r = brute_min(
        [&](const Vector& w) { return ExtendedReal(box.support(term.v - w)) + term.Hstar.eval(w); }, wcfg);
    res.min_values.push_back(term.alpha * r.value);
    res.w_separable.push_back(r.point);
    sep_total += term.alpha * r.value;
  }
  res.separable_residual = sep_total - res.max_value;

  // Joint minimum: candidate from subgradients of H at q, then the oracle.
  auto joint = [&](const std::vector<Vector>& w) {
    Vector y = Vector::Zero(n);
    ExtendedReal s(0.0);
    for (std::size_t j = 0; j < terms.size(); ++j) {
      if (terms[j].alpha == 0.0) continue;
      y += terms[j].alpha * (terms[j].v - w[j]);
      s += terms[j].Hstar.eval(w[j]).scaled(terms[j].alpha);
    }
    return s + ExtendedReal(box.support(y));
  };
  std::vector<Vector> w_candidate(terms.size(), Vector::Zero(n));
  bool have_candidate = true;
  for (std::size_t j = 0; j < terms.size(); ++j) {
    if (terms[j].alpha == 0.0) continue;
    if (terms[j].H.has_gradient()) w_candidate[j] = terms[j].H.gradient(q);
    else have_candidate = false;
  }
  double joint_value = std::numeric_limits<double>::infinity();
  if (have_candidate) {
    const ExtendedReal v = joint(w_candidate);
    if (v.is_finite()) {
      joint_value = v.value();
      res.w = w_candidate;
    }
  }
  std::vector<std::size_t> active;
  for (std::size_t j = 0; j < terms.size(); ++j)
    if (terms[j].alpha != 0.0) active.push_back(j);
  const Index dims = n * static_cast<Index>(active.size());
  if (dims <= 12) {
    OracleConfig jcfg;
    jcfg.resolution = dims <= 3 ? opt.oracle_resolution : (dims <= 6 ? 9 : 3);
    jcfg.bounds = Box{Vector::Constant(dims, -radius), Vector::Constant(dims, radius)};
    auto unpack = [&](const Vector& y) {
      std::vector<Vector> w(terms.size(), Vector::Zero(n));
      for (std::size_t a = 0; a < active.size(); ++a) w[active[a]] = y.segment(static_cast<Index>(a) * n, n);
      return w;
    };
    const OracleResult r = brute_min([&](const Vector& y) { return joint(unpack(y)); }, jcfg);
    if (r.value < joint_value) {
      joint_value = r.value;
      res.w = unpack(r.point);
    }
  }
  if (res.w.empty()) res.w = res.w_separable;
  res.joint_min = joint_value;
  res.joint_residual = joint_value - res.max_value;
  return res;
}

}  // namespace hjd
