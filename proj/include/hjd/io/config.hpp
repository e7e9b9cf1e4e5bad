#pragma once

#include <optional>
#include <string>
#include <vector>

#include "hjd/functionals/elementary.hpp"
#include "hjd/functionals/tv_functionals.hpp"
#include "hjd/io/results.hpp"
#include "hjd/limits/limits.hpp"
#include "hjd/selection/selection.hpp"

namespace hjd {

// Functional descriptions in configs:
//   {"type": "quadratic", "c": 1}           c/2 |.|^2
//   {"type": "l1", "weight": 1}
//   {"type": "weighted_l1", "weights": [..]}
//   {"type": "linf_ball", "radius": 1}
//   {"type": "tv", "rows", "cols", "weight", "variant"}
//   {"type": "gball", "rows", "cols", "radius", "variant"}
//   {"type": "huber", "s": 1}
inline ConvexFunctional functional_from_json(const Json& j) {
  try {
    const std::string type = j.at("type").get<std::string>();
    if (type == "quadratic") return quadratic(j.value("c", 1.0));
    if (type == "l1") return l1_norm(j.value("weight", 1.0));
    if (type == "weighted_l1") return weighted_l1(vector_from_json(j.at("weights"), "weights"));
    if (type == "linf_ball") return linf_ball_indicator(j.value("radius", 1.0));
    if (type == "huber") return huber(j.value("s", 1.0));
    if (type == "tv" || type == "gball") {
      TvSettings ts;
      ts.variant = tv_variant_from_string(j.value("variant", std::string("verbatim")));
      const Index rows = j.at("rows").get<Index>(), cols = j.at("cols").get<Index>();
      return type == "tv" ? tv_functional(rows, cols, j.value("weight", 1.0), ts)
                          : gball_indicator(rows, cols, j.value("radius", 1.0), ts);
    }
    throw InvalidInput("unknown functional type '" + type + "'");
  } catch (const Json::exception& e) {
    throw InvalidInput(std::string("functional: ") + e.what());
  }
}

inline ConvexFunctional conjugate_of(const ConvexFunctional& f, const std::string& what) {
  if (f.conjugate() == nullptr) throw ConfigurationError(what + ": conjugate not available");
  return *f.conjugate();
}

// {"x": [..], "J": {..},
//  "terms": [{"H": {..}, "v": [..], "alpha": 1, "fast": false}, ..],
//  "schedule": {"sigma0": 0.1, "rho": 0.5, "steps": 14}, "tol": 1e-8}
struct LimitConfig {
  SequenceSpec spec;
  MultiTimeProblem prob;
  int steps = 14;
  LimitOptions options;
  // Set when J is a weighted l1 norm, whose subdifferential at x is a box.
  std::optional<Vector> l1_weights;
};

inline LimitConfig limit_config_from_json(const Json& j) {
  LimitConfig c;
  try {
    c.spec.x = vector_from_json(j.at("x"), "x");
    const Json& jj = j.at("J");
    c.prob.J = functional_from_json(jj);
    const std::string jtype = jj.at("type").get<std::string>();
    if (jtype == "weighted_l1") c.l1_weights = vector_from_json(jj.at("weights"), "weights");
    if (jtype == "l1") c.l1_weights = Vector::Constant(c.spec.x.size(), jj.value("weight", 1.0));
    for (const Json& t : j.at("terms")) {
      const ConvexFunctional H = functional_from_json(t.at("H"));
      c.prob.terms.push_back({H, conjugate_of(H, "H"), 0.0});
      c.spec.v.push_back(vector_from_json(t.at("v"), "v"));
      c.spec.alpha.push_back(t.value("alpha", 1.0));
      c.spec.fast.push_back(t.value("fast", false));
    }
    const Json sched = j.value("schedule", Json::object());
    c.spec.sigma0 = sched.value("sigma0", 0.1);
    c.spec.rho = sched.value("rho", 0.5);
    c.steps = sched.value("steps", 14);
    c.options.tol = j.value("tol", 1e-8);
  } catch (const Json::exception& e) {
    throw InvalidInput(std::string("limit config: ") + e.what());
  }
  c.spec.validate();
  for (auto& term : c.prob.terms) term.t = 1.0;
  c.prob.validate();
  return c;
}

// Either a generated rectangle
//   {"instance": {"type": "tvl1-rectangle", "size": 16, "height": 4, "width": 4, "a": 1, "b": 0}}
// or explicit data {"x": grid, "F1": {..}, "F2star": {..}}, plus
//   "schedule": {"c": [0.5, 1, 2], "lambda0", "mu0", "ratio", "steps"}, "tol": 2e-4.
struct SelectConfig {
  DegenerateProblem problem;
  ImageGrid x;
  std::optional<RectangleCase> rectangle;
  std::vector<double> c_values{1.0};
  double mu0 = 0.1;
  double ratio = 0.5;
  int steps = 13;
  double tol = 2e-4;
  TvVariant variant = TvVariant::verbatim;

  SelectionSchedule schedule(double c) const { return SelectionSchedule::geometric(c * mu0, mu0, ratio, steps); }
};

inline SelectConfig select_config_from_json(const Json& j) {
  SelectConfig c;
  try {
    c.variant = tv_variant_from_string(j.value("tv", std::string("verbatim")));
    if (j.contains("instance")) {
      const Json& in = j.at("instance");
      if (in.at("type").get<std::string>() != "tvl1-rectangle")
        throw InvalidInput("select config: unknown instance type");
      const RectangleCase rc = tvl1_rectangle_case(in.value("size", Index{16}), in.value("height", Index{4}),
                                                   in.value("width", Index{4}), in.value("a", 1.0),
                                                   in.value("b", 0.0));
      TvSettings ts;
      ts.variant = c.variant;
      const double alpha = j.value("alpha", rc.alpha);
      c.x = rc.x;
      c.problem = {tv_functional(rc.x.rows(), rc.x.cols(), alpha, ts), l1_norm(1.0), rc.x.values()};
      if (alpha == rc.alpha) c.rectangle = rc;
    } else {
      c.x = grid_from_json(j.at("x"));
      c.problem = {functional_from_json(j.at("F1")), functional_from_json(j.at("F2star")), c.x.values()};
    }
    const Json sched = j.value("schedule", Json::object());
    if (sched.contains("c")) {
      c.c_values.clear();
      if (sched.at("c").is_array()) {
        for (const Json& v : sched.at("c")) c.c_values.push_back(v.get<double>());
      } else {
        c.c_values.push_back(sched.at("c").get<double>());
      }
    }
    c.mu0 = sched.value("mu0", 0.1);
    c.ratio = sched.value("ratio", 0.5);
    c.steps = sched.value("steps", 13);
    c.tol = j.value("tol", 2e-4);
  } catch (const Json::exception& e) {
    throw InvalidInput(std::string("select config: ") + e.what());
  }
  if (c.c_values.empty()) throw InvalidInput("select config: needs at least one c");
  for (double cv : c.c_values) require_positive(cv, "c");
  require_positive(c.tol, "tol");
  c.problem.validate();
  return c;
}

}  // namespace hjd
