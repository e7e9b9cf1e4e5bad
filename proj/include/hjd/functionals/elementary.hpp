#pragma once

#include <cmath>
#include <memory>
#include <string>

#include "hjd/core/convex_functional.hpp"

namespace hjd {

// Relative slack for indicator membership of computed points.
inline constexpr double kMembershipSlack = 1e-12;

inline Vector l1_prox(const Vector& z, double tau) {
  return z.array().sign() * (z.array().abs() - tau).max(0.0);
}

// Weighted soft-threshold: argmin sum_i w_i |u_i| + |u - z|^2/(2 tau).
inline Vector l1_prox(const Vector& z, double tau, const Vector& weights) {
  return z.array().sign() * (z.array().abs() - tau * weights.array()).max(0.0);
}

inline Vector quad_prox(const Vector& z, double tau) { return z / (1.0 + tau); }

inline Vector linf_ball_project(const Vector& z, double r) {
  return z.cwiseMax(-r).cwiseMin(r);
}

inline Vector box_project(const Vector& z, const Vector& radius) {
  return z.cwiseMax(-radius).cwiseMin(radius);
}

namespace detail {

inline Vector broadcast(const Vector& w, Index n) {
  if (w.size() == 1 && n != 1) return Vector::Constant(n, w[0]);
  if (w.size() != n) throw InvalidInput("weight vector size mismatch");
  return w;
}

inline ConvexFunctional quadratic_base(double c) {
  FunctionalFlags fl{true, c > 0.0, c > 0.0, true};
  ConvexFunctional f(
      "quadratic", [c](const Vector& x) { return ExtendedReal(0.5 * c * x.squaredNorm()); },
      [c](const Vector& z, double tau, ProxWorkspace& ws) {
        Vector out = z / (1.0 + tau * c);
        ws.value_at_output = 0.5 * c * out.squaredNorm();
        return out;
      },
      fl);
  f.with_gradient([c](const Vector& x) { return Vector(c * x); }, c);
  f.with_quadratic_weight(c);
  f.with_strong_convexity(c);
  return f;
}

inline ConvexFunctional weighted_l1_base(Vector w) {
  if ((w.array() < 0.0).any()) throw InvalidInput("l1 weights must be nonnegative");
  return ConvexFunctional(
      "weighted_l1",
      [w](const Vector& x) {
        return ExtendedReal(detail::broadcast(w, x.size()).cwiseProduct(x.cwiseAbs()).sum());
      },
      [w](const Vector& z, double tau, ProxWorkspace& ws) {
        const Vector wb = detail::broadcast(w, z.size());
        Vector out = l1_prox(z, tau, wb);
        ws.value_at_output = wb.cwiseProduct(out.cwiseAbs()).sum();
        ws.conjugate_at_residual = 0.0;
        return out;
      },
      FunctionalFlags{false, false, false, true});
}

inline ConvexFunctional box_indicator_base(Vector r) {
  if ((r.array() < 0.0).any()) throw InvalidInput("box radius must be nonnegative");
  return ConvexFunctional(
      "box_indicator",
      [r](const Vector& x) {
        const Vector rb = detail::broadcast(r, x.size());
        for (Index i = 0; i < x.size(); ++i)
          if (std::abs(x[i]) > rb[i] + kMembershipSlack * std::max(1.0, rb[i]))
            return ExtendedReal::infinity();
        return ExtendedReal(0.0);
      },
      [r](const Vector& z, double tau, ProxWorkspace& ws) {
        const Vector rb = detail::broadcast(r, z.size());
        Vector out = box_project(z, rb);
        ws.value_at_output = 0.0;
        ws.conjugate_at_residual = rb.cwiseProduct(((z - out) / tau).cwiseAbs()).sum();
        return out;
      },
      FunctionalFlags{});
}

}  // namespace detail

inline ConvexFunctional zero_functional() {
  ConvexFunctional f(
      "zero", [](const Vector&) { return ExtendedReal(0.0); },
      [](const Vector& z, double, ProxWorkspace& ws) {
        ws.value_at_output = 0.0;
        return z;
      },
      FunctionalFlags{true, false, false, true});
  f.with_gradient([](const Vector& x) { return Vector(Vector::Zero(x.size())); }, 0.0);
  ConvexFunctional origin(
      "indicator_origin",
      [](const Vector& x) {
        return x.isZero(0.0) ? ExtendedReal(0.0) : ExtendedReal::infinity();
      },
      [](const Vector& z, double, ProxWorkspace& ws) {
        ws.value_at_output = 0.0;
        return Vector(Vector::Zero(z.size()));
      },
      FunctionalFlags{});
  f.with_conjugate(origin);
  return f;
}

inline ConvexFunctional indicator_origin() {
  ConvexFunctional zero = zero_functional();
  ConvexFunctional f = *zero.conjugate();
  ConvexFunctional z2 = zero;
  f.with_conjugate(z2);
  return f;
}

// c/2 |x|^2, conjugate 1/(2c) |p|^2.
inline ConvexFunctional quadratic(double c = 1.0) {
  require_positive(c, "quadratic weight");
  ConvexFunctional f = detail::quadratic_base(c);
  ConvexFunctional g = detail::quadratic_base(1.0 / c);
  g.with_conjugate(detail::quadratic_base(c));
  f.with_conjugate(g);
  return f;
}

// sum_i w_i |x_i|; a single weight is broadcast. Conjugate: the box |p_i| <= w_i.
inline ConvexFunctional weighted_l1(const Vector& w) {
  ConvexFunctional f = detail::weighted_l1_base(w);
  ConvexFunctional g = detail::box_indicator_base(w);
  g.with_conjugate(detail::weighted_l1_base(w));
  f.with_conjugate(g);
  return f;
}

inline ConvexFunctional l1_norm(double weight = 1.0) {
  return weighted_l1(Vector::Constant(1, weight));
}

// Indicator of {|p_i| <= r_i}; conjugate sum_i r_i |x_i|.
inline ConvexFunctional box_indicator(const Vector& r) {
  ConvexFunctional f = detail::box_indicator_base(r);
  ConvexFunctional g = detail::weighted_l1_base(r);
  g.with_conjugate(detail::box_indicator_base(r));
  f.with_conjugate(g);
  return f;
}

inline ConvexFunctional linf_ball_indicator(double r = 1.0) {
  return box_indicator(Vector::Constant(1, r));
}

// a * f for a > 0; (a f)*(p) = a f*(p/a).
inline ConvexFunctional scaled(const ConvexFunctional& f, double a);

// f + lambda/2 |.|^2. Its conjugate is the Moreau envelope of f* with
// parameter 1/lambda.
inline ConvexFunctional add_quadratic(const ConvexFunctional& f, double lambda);

// f □ |.|^2/(2s): value f(a) + |y - a|^2/(2s) with a = prox_{s f}(y),
// gradient (y - a)/s.
inline ConvexFunctional moreau_envelope(const ConvexFunctional& f, double s);

inline ConvexFunctional scaled(const ConvexFunctional& f, double a) {
  require_positive(a, "scale");
  FunctionalFlags fl = f.flags();
  ConvexFunctional out(
      std::to_string(a) + "*" + f.name(),
      [f, a](const Vector& x) { return f.eval(x).scaled(a); },
      [f, a](const Vector& z, double tau, ProxWorkspace& ws) {
        Vector o = f.prox(z, tau * a, ws);
        if (ws.value_at_output) *ws.value_at_output *= a;
        // residual (z - o)/tau = a * (z - o)/(a tau), so (a f)* there is a f*(...)
        if (ws.conjugate_at_residual) *ws.conjugate_at_residual *= a;
        return o;
      },
      fl);
  if (f.has_gradient())
    out.with_gradient([f, a](const Vector& x) { return Vector(a * f.gradient(x)); },
                      a * f.gradient_lipschitz());
  if (f.quadratic_weight()) out.with_quadratic_weight(a * *f.quadratic_weight());
  out.with_strong_convexity(a * f.strong_convexity());
  if (const ConvexFunctional* fc = f.conjugate()) {
    const ConvexFunctional fs = *fc;
    FunctionalFlags cf = fs.flags();
    ConvexFunctional conj(
        std::to_string(a) + "*" + fs.name() + "(./" + std::to_string(a) + ")",
        [fs, a](const Vector& p) { return fs.eval(p / a).scaled(a); },
        [fs, a](const Vector& z, double tau, ProxWorkspace& ws) {
          // argmin a f*(u/a) + |u - z|^2/(2 tau) = a prox_{(tau/a) f*}(z/a)
          Vector o = a * fs.prox(z / a, tau / a, ws);
          if (ws.value_at_output) *ws.value_at_output *= a;
          if (ws.conjugate_at_residual) *ws.conjugate_at_residual *= a;
          return o;
        },
        cf);
    out.with_conjugate(conj);
  }
  return out;
}

inline ConvexFunctional moreau_envelope(const ConvexFunctional& f, double s) {
  require_positive(s, "envelope parameter");
  FunctionalFlags fl{true, f.flags().strictly_convex, false, true};
  auto value_grad = [f, s](const Vector& y, ProxWorkspace& ws) {
    const Vector a = f.prox(y, s, ws);
    const double fa = ws.value_at_output ? *ws.value_at_output : f.eval(a).value();
    const Vector g = (y - a) / s;
    return std::pair<double, Vector>(fa + 0.5 * s * g.squaredNorm(), g);
  };
  ConvexFunctional out(
      "env(" + f.name() + ")",
      [value_grad](const Vector& y) {
        ProxWorkspace ws;
        return ExtendedReal(value_grad(y, ws).first);
      },
      [f, s](const Vector& z, double tau, ProxWorkspace& ws) {
        // prox of the envelope: z + tau/(tau+s) (prox_{(tau+s) f}(z) - z)
        const Vector a = f.prox(z, tau + s, ws);
        const Vector out_point = z + (tau / (tau + s)) * (a - z);
        // (z - out)/tau = (z - a)/(tau + s), a subgradient of f at a
        const Vector g = (z - a) / (tau + s);
        if (ws.value_at_output) {
          ws.value_at_output = *ws.value_at_output + 0.5 * s * g.squaredNorm();
        } else {
          ws.value_at_output.reset();
        }
        if (ws.conjugate_at_residual)
          ws.conjugate_at_residual = *ws.conjugate_at_residual + 0.5 * s * g.squaredNorm();
        return out_point;
      },
      fl);
  out.with_gradient(
      [value_grad](const Vector& y) {
        ProxWorkspace ws;
        return value_grad(y, ws).second;
      },
      1.0 / s);
  out.with_value_gradient(value_grad);
  if (f.quadratic_weight()) {
    const double c = *f.quadratic_weight();
    out.with_quadratic_weight(c / (1.0 + c * s));
  }
  if (const ConvexFunctional* fc = f.conjugate()) {
    const ConvexFunctional fs = *fc;
    ConvexFunctional conj = add_quadratic(fs, s);
    out.with_conjugate(conj);
  }
  return out;
}

inline ConvexFunctional add_quadratic(const ConvexFunctional& f, double lambda) {
  require_positive(lambda, "quadratic weight");
  FunctionalFlags fl = f.flags();
  fl.strictly_convex = true;
  fl.one_coercive = true;
  ConvexFunctional out(
      f.name() + "+quad",
      [f, lambda](const Vector& x) {
        return f.eval(x) + ExtendedReal(0.5 * lambda * x.squaredNorm());
      },
      [f, lambda](const Vector& z, double tau, ProxWorkspace& ws) {
        const double shrink = 1.0 + tau * lambda;
        Vector o = f.prox(z / shrink, tau / shrink, ws);
        if (ws.value_at_output) *ws.value_at_output += 0.5 * lambda * o.squaredNorm();
        // residual r = (z - o)/tau = q + lambda o with q in df(o);
        // (f + lambda/2|.|^2)*(r) = <r,o> - f(o) - lambda/2|o|^2 = f*(q) + lambda/2 |o|^2
        if (ws.conjugate_at_residual) *ws.conjugate_at_residual += 0.5 * lambda * o.squaredNorm();
        return o;
      },
      fl);
  if (f.has_gradient())
    out.with_gradient([f, lambda](const Vector& x) { return Vector(f.gradient(x) + lambda * x); },
                      f.gradient_lipschitz() + lambda);
  if (f.quadratic_weight()) out.with_quadratic_weight(*f.quadratic_weight() + lambda);
  out.with_strong_convexity(f.strong_convexity() + lambda);
  if (const ConvexFunctional* fc = f.conjugate()) {
    // (f + lambda/2|.|^2)* = f* □ |.|^2/(2/lambda); built without a further
    // conjugate to keep the chain finite.
    const ConvexFunctional fs = *fc;
    ConvexFunctional plain_fs(fs.name(), [fs](const Vector& p) { return fs.eval(p); },
                              [fs](const Vector& z, double tau, ProxWorkspace& ws) {
                                return fs.prox(z, tau, ws);
                              },
                              fs.flags());
    if (fs.quadratic_weight()) plain_fs.with_quadratic_weight(*fs.quadratic_weight());
    out.with_conjugate(moreau_envelope(plain_fs, 1.0 / lambda));
  }
  return out;
}

// f + <c, .> + k. Conjugate: p -> f*(p - c) - k.
inline ConvexFunctional tilted(const ConvexFunctional& f, const Vector& c, double k = 0.0) {
  require_finite(c, "tilt");
  ConvexFunctional out(
      f.name() + "+lin",
      [f, c, k](const Vector& x) { return f.eval(x) + ExtendedReal(c.dot(x) + k); },
      [f, c, k](const Vector& z, double tau, ProxWorkspace& ws) {
        Vector o = f.prox(z - tau * c, tau, ws);
        if (ws.value_at_output) *ws.value_at_output += c.dot(o) + k;
        // residual (z - o)/tau = r_f + c, where the tilted conjugate is f*(r_f) - k
        if (ws.conjugate_at_residual) *ws.conjugate_at_residual -= k;
        return o;
      },
      f.flags());
  if (f.has_gradient())
    out.with_gradient([f, c](const Vector& x) { return Vector(f.gradient(x) + c); },
                      f.gradient_lipschitz());
  out.with_strong_convexity(f.strong_convexity());
  if (const ConvexFunctional* fc = f.conjugate()) {
    const ConvexFunctional fs = *fc;
    ConvexFunctional conj(
        fs.name() + "(.-c)",
        [fs, c, k](const Vector& p) { return fs.eval(p - c) + ExtendedReal(-k); },
        [fs, c, k](const Vector& z, double tau, ProxWorkspace& ws) {
          Vector o = c + fs.prox(z - c, tau, ws);
          if (ws.value_at_output) *ws.value_at_output -= k;
          ws.conjugate_at_residual.reset();
          return o;
        },
        fs.flags());
    out.with_conjugate(conj);
  }
  return out;
}

// Moreau envelope of |.| with parameter s: x^2/(2s) for |x| <= s, |x| - s/2 beyond.
inline ConvexFunctional huber(double s = 1.0) {
  ConvexFunctional h = moreau_envelope(l1_norm(1.0), s);
  return h;
}

}  // namespace hjd
