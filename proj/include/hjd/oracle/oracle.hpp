#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include "hjd/core/errors.hpp"
#include "hjd/core/extended_real.hpp"
#include "hjd/core/grid_oracles.hpp"

namespace hjd {

struct OracleConfig {
  Box bounds;
  Index resolution = 41;  // grid points per axis
  int polish_rounds = 40;

  static constexpr double kMaxPoints = 1e8;

  void validate() const {
    bounds.validate();
    if (resolution < 1) throw InvalidInput("oracle: resolution must be positive");
    if (polish_rounds < 0) throw InvalidInput("oracle: polish rounds must be nonnegative");
    const Index d = bounds.lower.size();
    if (d > 12) throw ConfigurationError("oracle: at most 12 variables");
    if (d > 4 && polish_rounds == 0)
      throw ConfigurationError("oracle: more than 4 variables needs polishing");
    if (std::pow(static_cast<double>(resolution), static_cast<double>(d)) > kMaxPoints)
      throw ConfigurationError("oracle: grid exceeds 1e8 points");
  }
};

struct OracleResult {
  double value = std::numeric_limits<double>::infinity();
  Vector point;
};

using OracleObjective = std::function<ExtendedReal(const Vector&)>;

namespace detail {

inline double oracle_coord(const Box& b, Index i, Index k, Index res) {
  if (res == 1) return 0.5 * (b.lower[i] + b.upper[i]);
  return b.lower[i] + (b.upper[i] - b.lower[i]) * static_cast<double>(k) / static_cast<double>(res - 1);
}

}  // namespace detail

// Grid minimum refined by coordinate descent; the step starts at the grid
// spacing and halves each round.
inline OracleResult brute_min(const OracleObjective& f, const OracleConfig& cfg) {
  cfg.validate();
  const Box& b = cfg.bounds;
  const Index d = b.lower.size();
  OracleResult best;
  best.point = 0.5 * (b.lower + b.upper);

  std::vector<Index> idx(static_cast<std::size_t>(d), 0);
  Vector p(d);
  for (;;) {
    for (Index i = 0; i < d; ++i) p[i] = detail::oracle_coord(b, i, idx[static_cast<std::size_t>(i)], cfg.resolution);
    const ExtendedReal v = f(p);
    if (v.is_finite() && v.value() < best.value) {
      best.value = v.value();
      best.point = p;
    }
    Index i = 0;
    while (i < d && ++idx[static_cast<std::size_t>(i)] == cfg.resolution) idx[static_cast<std::size_t>(i++)] = 0;
    if (i == d) break;
  }

  Vector h = cfg.resolution > 1 ? Vector((b.upper - b.lower) / static_cast<double>(cfg.resolution - 1))
                                : Vector(0.5 * (b.upper - b.lower));
  for (int round = 0; round < cfg.polish_rounds; ++round) {
    bool improved = true;
    while (improved) {
      improved = false;
      for (Index i = 0; i < d; ++i) {
        for (double dir : {-1.0, 1.0}) {
          Vector q = best.point;
          q[i] = std::clamp(q[i] + dir * h[i], b.lower[i], b.upper[i]);
          if (q[i] == best.point[i]) continue;
          const ExtendedReal v = f(q);
          if (v.is_finite() && v.value() < best.value) {
            best.value = v.value();
            best.point = q;
            improved = true;
          }
        }
      }
    }
    h *= 0.5;
  }
  return best;
}

// Maximum of a concave objective over the box; the mirror of brute_min.
inline OracleResult brute_max_over_box(const std::function<double(const Vector&)>& g,
                                       const OracleConfig& cfg) {
  OracleResult r = brute_min([&g](const Vector& q) { return ExtendedReal(-g(q)); }, cfg);
  r.value = -r.value;
  return r;
}

}  // namespace hjd
