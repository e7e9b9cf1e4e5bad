#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include "hjd/core/convex_functional.hpp"

namespace hjd {

struct Box {
  Vector lower;
  Vector upper;

  Index dimension() const noexcept { return lower.size(); }

  void validate() const {
    if (lower.size() != upper.size() || lower.size() == 0)
      throw InvalidInput("box: bounds must be nonempty and of equal size");
    require_finite(lower, "box lower");
    require_finite(upper, "box upper");
    for (Index i = 0; i < lower.size(); ++i)
      if (!(upper[i] > lower[i])) throw InvalidInput("box: degenerate side");
  }
};

// Cell-centered uniform grid. Centers are placed symmetrically about the box
// midpoint so that an odd cell count puts a center exactly on it.
class CellGrid {
 public:
  static constexpr double kMaxPoints = 1e8;

  CellGrid(const Box& box, double step) : mid_((box.lower + box.upper) / 2.0) {
    box.validate();
    if (!(step > 0.0) || !std::isfinite(step)) throw InvalidInput("grid step must be positive");
    if (box.dimension() > 3) throw InvalidInput("grid oracles support dimension <= 3");
    const Index n = box.dimension();
    counts_.resize(static_cast<std::size_t>(n));
    h_.resize(n);
    double total = 1.0;
    for (Index d = 0; d < n; ++d) {
      const double width = box.upper[d] - box.lower[d];
      const long c = std::max(1L, std::lround(width / step));
      counts_[static_cast<std::size_t>(d)] = c;
      h_[d] = width / static_cast<double>(c);
      total *= static_cast<double>(c);
    }
    if (total > kMaxPoints) throw InvalidInput("grid exceeds the point budget");
  }

  // Same spacing and midpoint, `extra[d]` more cells on each side.
  CellGrid enlarged(const std::vector<long>& extra) const {
    CellGrid g = *this;
    double total = 1.0;
    for (std::size_t d = 0; d < counts_.size(); ++d) {
      g.counts_[d] = counts_[d] + 2 * extra[d];
      total *= static_cast<double>(g.counts_[d]);
    }
    if (total > kMaxPoints) throw InvalidInput("grid exceeds the point budget");
    return g;
  }

  Index dimension() const noexcept { return static_cast<Index>(counts_.size()); }
  long count(Index d) const { return counts_[static_cast<std::size_t>(d)]; }
  double spacing(Index d) const { return h_[d]; }

  long size() const {
    long s = 1;
    for (long c : counts_) s *= c;
    return s;
  }

  double coordinate(Index d, long i) const {
    const double c = static_cast<double>(count(d));
    return mid_[d] + (static_cast<double>(i) - (c - 1.0) / 2.0) * h_[d];
  }

  // Row-major unflattening, last dimension fastest.
  void indices(long flat, std::vector<long>& idx) const {
    idx.resize(counts_.size());
    for (std::size_t d = counts_.size(); d-- > 0;) {
      idx[d] = flat % counts_[d];
      flat /= counts_[d];
    }
  }

  Vector point(long flat) const {
    std::vector<long> idx;
    indices(flat, idx);
    Vector x(dimension());
    for (Index d = 0; d < dimension(); ++d) x[d] = coordinate(d, idx[static_cast<std::size_t>(d)]);
    return x;
  }

 private:
  Vector mid_;
  std::vector<long> counts_;
  Vector h_;
};

using PointFunction = std::function<ExtendedReal(const Vector&)>;

// Tabulates f once on the requested box enlarged by half its width on every
// side, then answers sup_x <p,x> - f(x) queries. A query is reported as +inf
// when the supremum over the enlarged grid exceeds the one over the box by
// more than a relative 1e-9, i.e. the maximizer keeps moving outward.
class LegendreSampler {
 public:
  LegendreSampler(const PointFunction& f, const Box& box, double step)
      : inner_(box, step), outer_(inner_) {
    std::vector<long> extra(static_cast<std::size_t>(inner_.dimension()));
    for (Index d = 0; d < inner_.dimension(); ++d)
      extra[static_cast<std::size_t>(d)] = (inner_.count(d) + 1) / 2;
    outer_ = inner_.enlarged(extra);
    const long total = outer_.size();
    points_.resize(inner_.dimension(), total);
    values_.resize(total);
    is_inner_.resize(static_cast<std::size_t>(total));
    std::vector<long> idx;
    for (long k = 0; k < total; ++k) {
      outer_.indices(k, idx);
      bool inside = true;
      for (Index d = 0; d < inner_.dimension(); ++d) {
        const long i = idx[static_cast<std::size_t>(d)] - extra[static_cast<std::size_t>(d)];
        if (i < 0 || i >= inner_.count(d)) inside = false;
        points_(d, k) = outer_.coordinate(d, idx[static_cast<std::size_t>(d)]);
      }
      is_inner_[static_cast<std::size_t>(k)] = inside;
      values_[k] = f(points_.col(k)).to_double();
    }
  }

  ExtendedReal operator()(const Vector& p) const {
    if (p.size() != inner_.dimension()) throw InvalidInput("legendre: dimension mismatch");
    const double ninf = -std::numeric_limits<double>::infinity();
    double inner_max = ninf;
    double outer_max = ninf;
    for (Index k = 0; k < values_.size(); ++k) {
      if (!std::isfinite(values_[k])) continue;
      const double v = p.dot(points_.col(k)) - values_[k];
      outer_max = std::max(outer_max, v);
      if (is_inner_[static_cast<std::size_t>(k)]) inner_max = std::max(inner_max, v);
    }
    if (inner_max == ninf) {
      if (outer_max == ninf) throw InvalidInput("legendre: function is +inf on the whole grid");
      return ExtendedReal::infinity();
    }
    if (outer_max - inner_max > 1e-9 * std::max(1.0, std::abs(inner_max)))
      return ExtendedReal::infinity();
    return ExtendedReal(inner_max);
  }

  const CellGrid& grid() const noexcept { return inner_; }

 private:
  CellGrid inner_;
  CellGrid outer_;
  Eigen::MatrixXd points_;
  Vector values_;
  std::vector<bool> is_inner_;
};

inline ExtendedReal legendre_numeric(const PointFunction& f, const Vector& p, const Box& box,
                                     double step) {
  return LegendreSampler(f, box, step)(p);
}

inline ExtendedReal legendre_numeric(const ConvexFunctional& f, const Vector& p, const Box& box,
                                     double step) {
  return legendre_numeric([&f](const Vector& x) { return f.eval(x); }, p, box, step);
}

struct InfConvResult {
  ExtendedReal value;
  Vector argmin;  // empty when the value is +inf
};

// Grid minimum of u -> f(u) + g(x - u) over u in the box.
inline InfConvResult infconv_numeric(const PointFunction& f, const PointFunction& g,
                                     const Vector& x, const Box& box, double step) {
  const CellGrid grid(box, step);
  if (x.size() != grid.dimension()) throw InvalidInput("infconv: dimension mismatch");
  InfConvResult best{ExtendedReal::infinity(), Vector()};
  for (long k = 0; k < grid.size(); ++k) {
    const Vector u = grid.point(k);
    const ExtendedReal v = f(u) + g(x - u);
    if (v < best.value) best = {v, u};
  }
  return best;
}

inline InfConvResult infconv_numeric(const ConvexFunctional& f, const ConvexFunctional& g,
                                     const Vector& x, const Box& box, double step) {
  return infconv_numeric([&f](const Vector& u) { return f.eval(u); },
                         [&g](const Vector& u) { return g.eval(u); }, x, box, step);
}

}  // namespace hjd
