#pragma once

// Invariant evaluation shared by the limit, select and check commands.

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "hjd/hj/commute.hpp"
#include "hjd/hj/hopf.hpp"
#include "hjd/hj/recovery.hpp"
#include "hjd/io/config.hpp"
#include "hjd/models/models.hpp"

namespace hjd::cli {

struct Invariant {
  std::string name;
  double value = 0.0;
  double bound = 0.0;
  bool passed = false;

  Json to_json() const { return Json{{"name", name}, {"value", value}, {"bound", bound}, {"passed", passed}}; }
};

inline Invariant at_most(std::string name, double value, double bound) {
  return {std::move(name), value, bound, value <= bound};
}

inline Json invariants_json(const std::vector<Invariant>& inv) {
  Json a = Json::array();
  for (const auto& i : inv) a.push_back(i.to_json());
  return a;
}

inline const Invariant* first_failure(const std::vector<Invariant>& inv) {
  for (const auto& i : inv)
    if (!i.passed) return &i;
  return nullptr;
}

// ---- limits ---------------------------------------------------------------

struct LimitReport {
  LimitTable table;
  std::optional<DualPairResult> dual;
  std::vector<Invariant> invariants;
  bool converged = true;
};

inline LimitReport evaluate_limit(const LimitConfig& cfg) {
  LimitReport rep;
  rep.table = run_limit_experiment(cfg.spec, cfg.prob, cfg.steps, cfg.options);
  for (const auto& row : rep.table.rows) rep.converged = rep.converged && row.converged;
  if (!rep.table.complete) {
    rep.invariants.push_back({"limit table complete", 0.0, 1.0, false});
    return rep;
  }
  if (rep.table.rows.size() < 4) {
    rep.invariants.push_back({"limit table has four rows", double(rep.table.rows.size()), 4.0, false});
    return rep;
  }
  const LimitRow& last = rep.table.rows.back();
  const double t1 = last.t[0];
  for (std::size_t j = 0; j < cfg.spec.size(); ++j) {
    if (cfg.spec.fast[j]) {
      rep.invariants.push_back(
          at_most("fast term " + std::to_string(j + 1) + " |u|/t1", last.component_norm[j] / t1, 1e-4));
    }
    rep.invariants.push_back(
        at_most("term " + std::to_string(j + 1) + " |u| vanishes", last.component_norm[j], 1e-4));
  }
  if (!cfg.l1_weights) return rep;

  const SubdifferentialBox box = weighted_l1_subdifferential(*cfg.l1_weights, cfg.spec.x);
  std::vector<DualPairTerm> terms;
  for (std::size_t j = 0; j < cfg.spec.size(); ++j)
    terms.push_back({cfg.prob.terms[j].H, cfg.prob.terms[j].Hstar, cfg.spec.alpha_limit(j), cfg.spec.v[j]});
  rep.dual = dual_pair_solve(box, terms);
  rep.invariants.push_back(
      at_most("extrapolated ratio matches max", std::abs(rep.table.ratio_estimate.limit - rep.dual->max_value), 1e-3));
  rep.invariants.push_back(at_most("tail momentum matches q", (last.p - rep.dual->q).cwiseAbs().maxCoeff(), 1e-2));
  for (std::size_t j = 0; j < cfg.spec.size(); ++j) {
    if (cfg.spec.fast[j]) continue;
    rep.invariants.push_back(at_most("tail velocity " + std::to_string(j + 1) + " matches w",
                                     (last.velocity[j] - rep.dual->w[j]).cwiseAbs().maxCoeff(), 1e-2));
  }
  return rep;
}

// ---- selection ------------------------------------------------------------

struct SelectReport {
  std::vector<double> c_values;
  std::vector<SelectionPath> paths;
  std::vector<Invariant> invariants;
  bool converged = true;
};

inline SelectReport evaluate_select(const SelectConfig& cfg) {
  SelectReport rep;
  rep.c_values = cfg.c_values;
  for (double c : cfg.c_values) {
    rep.paths.push_back(selection_path(cfg.problem, cfg.schedule(c), cfg.tol));
    rep.converged = rep.converged && rep.paths.back().converged;
  }
  const double root_n = std::sqrt(static_cast<double>(cfg.x.size()));
  for (std::size_t i = 1; i < rep.paths.size(); ++i)
    rep.invariants.push_back(at_most("v_bar drift between c values",
                                     (rep.paths[i].v_bar - rep.paths[0].v_bar).norm(), 1e-3));
  if (cfg.rectangle) {
    const RectangleCase& rc = *cfg.rectangle;
    const double f1 = tvl1_objective(rc.x, rc.u1.values(), rc.alpha, cfg.variant);
    const double f2 = tvl1_objective(rc.x, rc.u2.values(), rc.alpha, cfg.variant);
    const double fm = tvl1_objective(rc.x, 0.5 * (rc.u1.values() + rc.u2.values()), rc.alpha, cfg.variant);
    const double flat = std::max(std::abs(f1 - f2), std::abs(fm - f1));
    rep.invariants.push_back(at_most("objective flat on [u1, u2]", flat, 1e-12 * (1.0 + std::abs(f1))));
    const Vector target = min_norm_over_segment(rc.u1.values(), rc.u2.values());
    for (std::size_t i = 0; i < rep.paths.size(); ++i)
      rep.invariants.push_back(at_most("v_bar matches the min-norm minimizer (c=" + format_double(rep.c_values[i]) + ")",
                                       (rep.paths[i].v_bar - target).norm(), 1e-2 * root_n));
  }
  return rep;
}

// ---- check suites ---------------------------------------------------------

struct CheckOptions {
  int count = 20;
  Index size = 6;
  std::uint64_t seed = 7;
  double tol = 1e-6;
};

struct RandomA2bc {
  MultiTimeProblem prob;
  Vector x;
  double mu = 0.0;
  double lambda = 0.0;
};

// x uniform in [0, scale]^n, mu and lambda log-uniform in [lo, hi].
inline RandomA2bc random_a2bc(std::mt19937_64& rng, Index rows, Index cols, double scale, double lo, double hi) {
  std::uniform_real_distribution<double> pix(0.0, scale), logp(std::log(lo), std::log(hi));
  RandomA2bc r;
  r.mu = std::exp(logp(rng));
  r.lambda = std::exp(logp(rng));
  r.x.resize(rows * cols);
  for (Index i = 0; i < r.x.size(); ++i) r.x[i] = pix(rng);
  r.prob = a2bc_problem(rows, cols, r.mu, r.lambda);
  return r;
}

inline std::vector<Invariant> suite_duality(const CheckOptions& opt) {
  std::vector<Invariant> out;
  std::mt19937_64 rng(opt.seed);
  LaxOptions lo;
  lo.tol = opt.tol;
  HopfOptions ho;
  ho.tol = opt.tol;
  for (int i = 0; i < opt.count; ++i) {
    const RandomA2bc inst = random_a2bc(rng, opt.size, opt.size, 255.0, 0.01, 10.0);
    const DecompositionResult l = lax_solve(inst.prob, inst.x, lo);
    const HopfResult h = hopf_solve(inst.prob, inst.x, ho);
    const double diff = l.value - h.value;
    // the lower end allows for rounding of two independently computed sums
    const double floor = -1e-12 * (1.0 + std::abs(l.value));
    const std::string name = "duality " + std::to_string(i) + ": lax - hopf in [0, 2 tol]";
    out.push_back({name, diff, 2.0 * opt.tol, diff >= floor && diff <= 2.0 * opt.tol && l.converged && h.converged});
  }
  return out;
}

inline std::vector<Invariant> suite_hj(const CheckOptions& opt) {
  std::vector<Invariant> out;
  std::mt19937_64 rng(opt.seed + 1);
  const int n_inst = std::max(1, opt.count / 4);
  for (int i = 0; i < n_inst; ++i) {
    const RandomA2bc inst = random_a2bc(rng, 4, 4, 1.0, 0.05, 1.0);
    LaxOptions lo;
    lo.tol = 1e-12;
    const DecompositionResult r = lax_solve(inst.prob, inst.x, lo);
    const Vector& p = *r.momentum;
    const std::string tag = "hj " + std::to_string(i) + ": ";
    const double scale = 1.0 + inst.x.norm();
    out.push_back(at_most(tag + "quadratic component equals lambda p", (r.components[1] - inst.lambda * p).norm(),
                          1e-5 * scale));
    const auto rec = recover_minimizers(inst.prob, p, 1e-5);
    out.push_back(at_most(tag + "texture component Fenchel certificate", rec[0].fenchel_residual(r.components[0]), 1e-5));
    for (std::size_t j = 0; j < 2; ++j) {
      const double hp = inst.prob.terms[j].H.eval(p).value();
      double res[2], noise[2];
      const double hs[2] = {1e-3, 1e-4};
      for (int k = 0; k < 2; ++k) {
        std::vector<double> t = inst.prob.times();
        t[j] += hs[k];
        const DecompositionResult rh = lax_solve(inst.prob.with_times(t), inst.x, lo);
        res[k] = std::abs((rh.value - r.value) / hs[k] + hp);
        noise[k] = 4.0 * (r.duality_gap + rh.duality_gap) / hs[k] + 1e-10;
      }
      out.push_back(at_most(tag + "HJ residual decays linearly in h (t" + std::to_string(j + 1) + ")", res[1],
                            0.1 * res[0] * 1.05 + noise[1]));
    }
    const CommuteResult c12 = commute_check(inst.prob, inst.x, {0, 1}, 1e-9);
    const CommuteResult c21 = commute_check(inst.prob, inst.x, {1, 0}, 1e-9);
    out.push_back(at_most(tag + "commutation", std::max(std::abs(c12.composed - c12.direct), std::abs(c21.composed - c21.direct)),
                          2e-6));
  }
  return out;
}

// J = |.|, H = p^2/2, v = 2, x = 0: the ratio tends to 3/2.
inline LimitConfig r1_limit_config() {
  return limit_config_from_json(Json::parse(R"({
    "x": [0], "J": {"type": "l1"},
    "terms": [{"H": {"type": "quadratic", "c": 1}, "v": [2], "alpha": 1}],
    "schedule": {"sigma0": 0.1, "rho": 0.5, "steps": 14}, "tol": 1e-8})"));
}

inline std::vector<Invariant> suite_limits(const CheckOptions&) {
  LimitReport rep = evaluate_limit(r1_limit_config());
  std::vector<Invariant> out = rep.invariants;
  out.push_back(at_most("limits: ratio estimate is 1.5", std::abs(rep.table.ratio_estimate.limit - 1.5), 1e-3));
  return out;
}

inline SelectConfig small_rectangle_config() {
  return select_config_from_json(Json::parse(R"({
    "instance": {"type": "tvl1-rectangle", "size": 8, "height": 2, "width": 2, "a": 1, "b": 0},
    "schedule": {"c": 1}, "tol": 2e-4})"));
}

inline std::vector<Invariant> suite_selection(const CheckOptions&) {
  SelectReport rep = evaluate_select(small_rectangle_config());
  std::vector<Invariant> out = rep.invariants;
  out.push_back({"selection: path converged", rep.converged ? 1.0 : 0.0, 1.0, rep.converged});
  return out;
}

}  // namespace hjd::cli
