#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>

#include "hjd/core/errors.hpp"
#include "hjd/core/extended_real.hpp"

namespace hjd {

struct FunctionalFlags {
  bool differentiable = false;
  bool strictly_convex = false;
  bool one_coercive = false;
  bool finite_valued = false;
};

// Scratch state threaded through repeated prox calls. Iterative proxes keep
// their dual variable here for warm starts and report what they certified.
struct ProxWorkspace {
  Vector dual;
  double achieved_gap = 0.0;
  long iterations = 0;
  // f(prox) when the prox knows it exactly (e.g. 0 for projections).
  std::optional<double> value_at_output;
  // f*((z - prox)/tau) when the prox knows it exactly.
  std::optional<double> conjugate_at_residual;
  // Requested gap for iterative proxes; unset means the functional's own
  // tolerance. Survives clear_reports().
  std::optional<double> gap_target;

  void clear_reports() {
    achieved_gap = 0.0;
    iterations = 0;
    value_at_output.reset();
    conjugate_at_residual.reset();
  }
};

class ConvexFunctional {
 public:
  using EvalFn = std::function<ExtendedReal(const Vector&)>;
  // prox(z, tau) = argmin_u f(u) + |u - z|^2 / (2 tau)
  using ProxFn = std::function<Vector(const Vector&, double, ProxWorkspace&)>;
  using GradFn = std::function<Vector(const Vector&)>;
  // Value and gradient together, for functionals where both come from the
  // same inner solve.
  using ValueGradFn =
      std::function<std::pair<double, Vector>(const Vector&, ProxWorkspace&)>;

  ConvexFunctional() = default;
  ConvexFunctional(std::string name, EvalFn eval, ProxFn prox, FunctionalFlags flags)
      : name_(std::move(name)),
        eval_(std::move(eval)),
        prox_(std::move(prox)),
        flags_(flags) {}

  ConvexFunctional& with_gradient(GradFn grad, double lipschitz) {
    grad_ = std::move(grad);
    grad_lipschitz_ = lipschitz;
    flags_.differentiable = true;
    return *this;
  }
  ConvexFunctional& with_value_gradient(ValueGradFn fn) {
    value_grad_ = std::move(fn);
    return *this;
  }
  ConvexFunctional& with_conjugate(ConvexFunctional conj) {
    conjugate_ = std::make_shared<const ConvexFunctional>(std::move(conj));
    return *this;
  }
  // f - m/2|.|^2 stays convex.
  ConvexFunctional& with_strong_convexity(double m) {
    strong_convexity_ = m;
    return *this;
  }
  // Marks f = c/2 |.|^2 so solvers can use closed forms.
  ConvexFunctional& with_quadratic_weight(double c) {
    quadratic_weight_ = c;
    return *this;
  }

  const std::string& name() const noexcept { return name_; }
  const FunctionalFlags& flags() const noexcept { return flags_; }
  bool valid() const noexcept { return static_cast<bool>(eval_); }

  ExtendedReal eval(const Vector& x) const { return eval_(x); }

  bool has_prox() const noexcept { return static_cast<bool>(prox_); }
  Vector prox(const Vector& z, double tau, ProxWorkspace& ws) const {
    if (!prox_) throw ConfigurationError(name_ + ": no prox available");
    require_positive(tau, "prox step");
    ws.clear_reports();
    return prox_(z, tau, ws);
  }
  Vector prox(const Vector& z, double tau) const {
    ProxWorkspace ws;
    return prox(z, tau, ws);
  }

  bool has_gradient() const noexcept { return static_cast<bool>(grad_); }
  Vector gradient(const Vector& x) const {
    if (!grad_) throw ConfigurationError(name_ + ": no gradient available");
    return grad_(x);
  }
  double gradient_lipschitz() const noexcept { return grad_lipschitz_; }

  // Falls back to separate eval and gradient calls.
  std::pair<double, Vector> value_and_gradient(const Vector& x, ProxWorkspace& ws) const {
    if (value_grad_) return value_grad_(x, ws);
    return {eval(x).value(), gradient(x)};
  }

  const ConvexFunctional* conjugate() const noexcept { return conjugate_.get(); }
  std::optional<double> quadratic_weight() const noexcept { return quadratic_weight_; }
  double strong_convexity() const noexcept { return strong_convexity_; }

 private:
  std::string name_;
  EvalFn eval_;
  ProxFn prox_;
  GradFn grad_;
  ValueGradFn value_grad_;
  double grad_lipschitz_ = 0.0;
  std::shared_ptr<const ConvexFunctional> conjugate_;
  std::optional<double> quadratic_weight_;
  double strong_convexity_ = 0.0;
  FunctionalFlags flags_;
};

struct MoreauPair {
  Vector pf;      // prox_{tau f}(z)
  Vector pfstar;  // prox_{f*/tau}(z/tau)
};

// pfstar is formed as (z - pf)/tau, so pf + tau*pfstar reproduces z up to
// a single rounding per coordinate.
inline MoreauPair moreau_decompose(const ConvexFunctional& f, const Vector& z, double tau,
                                   ProxWorkspace& ws) {
  require_finite(z, "moreau_decompose");
  require_positive(tau, "moreau_decompose step");
  MoreauPair out;
  out.pf = f.prox(z, tau, ws);
  out.pfstar = (z - out.pf) / tau;
  return out;
}

inline MoreauPair moreau_decompose(const ConvexFunctional& f, const Vector& z, double tau) {
  ProxWorkspace ws;
  return moreau_decompose(f, z, tau, ws);
}

// prox_{sigma f*}(z) through the Moreau identity when f* has no prox of its
// own: z - sigma * prox_{f/sigma}(z/sigma). The workspace reports refer to f.
inline Vector conjugate_prox(const ConvexFunctional& f, const Vector& z, double sigma,
                             ProxWorkspace& ws) {
  require_positive(sigma, "conjugate prox step");
  const Vector a = f.prox(z / sigma, 1.0 / sigma, ws);
  return z - sigma * a;
}

// f*(p) from what is known: the conjugate's own eval when present, otherwise
// the Fenchel equality f*(p) = <p, a> - f(a) for a pair with p in df(a).
inline ExtendedReal conjugate_value(const ConvexFunctional& f, const Vector& p,
                                    const Vector* subgradient_point = nullptr) {
  if (f.conjugate() != nullptr) return f.conjugate()->eval(p);
  if (subgradient_point != nullptr) {
    const ExtendedReal fa = f.eval(*subgradient_point);
    if (fa.is_infinite()) return ExtendedReal::infinity();
    return ExtendedReal(p.dot(*subgradient_point) - fa.value());
  }
  throw ConfigurationError(f.name() + ": conjugate value unavailable");
}

}  // namespace hjd
