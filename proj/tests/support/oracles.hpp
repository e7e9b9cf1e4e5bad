#pragma once

// Test-only reference computations. None of these call into the library's
// solvers; they are written from the definitions so that agreement with the
// library is a genuine cross-check.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <vector>

namespace oracle {

using Vec = Eigen::VectorXd;

// Anisotropic TV of a row-major grid. With `full` every forward difference
// counts; otherwise only those anchored at (i, j) with i < rows-1 and
// j < cols-1.
inline double tv(const Vec& u, long rows, long cols, bool full) {
  double s = 0.0;
  for (long i = 0; i < rows; ++i)
    for (long j = 0; j < cols; ++j) {
      const bool anchored = full || (i + 1 < rows && j + 1 < cols);
      if (!anchored) continue;
      if (j + 1 < cols) s += std::abs(u[i * cols + j + 1] - u[i * cols + j]);
      if (i + 1 < rows) s += std::abs(u[(i + 1) * cols + j] - u[i * cols + j]);
    }
  return s;
}

// Exact prox of tau * sum |u_{i+1} - u_i| on a 1D signal. The dual
//   min 1/2 |z - D^T f|^2,  |f_e| <= tau
// is solved by enumerating which constraints are active at +tau, -tau or
// free; each pattern gives a tridiagonal linear system, and the pattern
// whose solution satisfies the KKT conditions yields u = z - D^T f.
inline Vec tv1d_prox(const Vec& z, double tau) {
  const long n = z.size();
  if (n <= 1) return z;
  const long m = n - 1;  // edges, (Du)_e = u[e+1] - u[e]
  auto dt = [&](const Vec& f) {  // D^T f
    Vec g = Vec::Zero(n);
    for (long e = 0; e < m; ++e) {
      g[e + 1] += f[e];
      g[e] -= f[e];
    }
    return g;
  };
  const double scale = 1.0 + z.cwiseAbs().maxCoeff() + tau;
  long patterns = 1;
  for (long e = 0; e < m; ++e) patterns *= 3;
  std::vector<int> state(static_cast<std::size_t>(m));
  for (long code = 0; code < patterns; ++code) {
    long c = code;
    std::vector<long> free;
    Vec f = Vec::Zero(m);
    for (long e = 0; e < m; ++e) {
      state[static_cast<std::size_t>(e)] = static_cast<int>(c % 3);
      c /= 3;
      if (state[static_cast<std::size_t>(e)] == 0) free.push_back(e);
      else f[e] = state[static_cast<std::size_t>(e)] == 1 ? tau : -tau;
    }
    // free rows: (D (z - D^T f))_e = 0
    if (!free.empty()) {
      const long k = static_cast<long>(free.size());
      Eigen::MatrixXd A = Eigen::MatrixXd::Zero(k, k);
      Vec b(k);
      Vec fixed = f;
      const Vec r0 = z - dt(fixed);
      for (long a = 0; a < k; ++a) {
        const long e = free[static_cast<std::size_t>(a)];
        b[a] = r0[e + 1] - r0[e];
        for (long bb = 0; bb < k; ++bb) {
          const long e2 = free[static_cast<std::size_t>(bb)];
          // (D D^T)_{e,e2}
          double v = 0.0;
          if (e == e2) v = 2.0;
          else if (std::abs(e - e2) == 1) v = -1.0;
          A(a, bb) = v;
        }
      }
      const Vec sol = A.fullPivLu().solve(b);
      for (long a = 0; a < k; ++a) f[free[static_cast<std::size_t>(a)]] = sol[a];
    }
    const Vec u = z - dt(f);
    bool ok = true;
    const double eps = 1e-11 * scale;
    for (long e = 0; e < m && ok; ++e) {
      const double du = u[e + 1] - u[e];
      switch (state[static_cast<std::size_t>(e)]) {
        case 0: ok = std::abs(f[e]) <= tau + eps && std::abs(du) <= eps; break;
        case 1: ok = du >= -eps; break;
        default: ok = du <= eps; break;
      }
    }
    if (ok) return u;
  }
  return Vec();  // unreachable for tau > 0
}

// Minimum of a function of two variables over a box by nested golden-section
// search; exact enough for the smooth convex reductions used in tests.
inline double golden_min(const std::function<double(double)>& f, double lo, double hi, double* arg = nullptr) {
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = lo, b = hi;
  double c = b - g * (b - a), d = a + g * (b - a);
  double fc = f(c), fd = f(d);
  for (int it = 0; it < 200 && b - a > 1e-14 * (1.0 + std::abs(a) + std::abs(b)); ++it) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - g * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + g * (b - a);
      fd = f(d);
    }
  }
  const double x = 0.5 * (a + b);
  if (arg) *arg = x;
  return f(x);
}

// Smallest eigenvalue of the symmetric 2x2 matrix [[a, b], [b, c]].
inline double min_eig2(double a, double b, double c) {
  const double tr = a + c, det = a * c - b * b;
  return 0.5 * (tr - std::sqrt(tr * tr - 4.0 * det));
}

inline Vec random_vector(std::mt19937_64& rng, long n, double lo, double hi) {
  std::uniform_real_distribution<double> d(lo, hi);
  Vec v(n);
  for (long i = 0; i < n; ++i) v[i] = d(rng);
  return v;
}

}  // namespace oracle
