#pragma once

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <limits>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "hjd/hj/lax.hpp"

namespace hjd {

enum class ScanAxis { time, mixing };

struct ScanSpec {
  ScanAxis axis = ScanAxis::time;
  std::size_t time_index = 0;  // which t_j varies on the time axis
  double lo = 0.0;
  double hi = 1.0;
  int steps = 2;
  // Second endpoint for the mixing axis: (x2, t2) at alpha = 0, (x, t) at 1.
  Vector x2;
  std::vector<double> times2;
};

struct ScanRow {
  double param = 0.0;
  double value = 0.0;
  double p_norm = 0.0;
  double gap = 0.0;
  bool converged = false;
};

struct ScanResult {
  std::vector<ScanRow> rows;
  // min_k S[k-1] - 2 S[k] + S[k+1]; +inf with fewer than three rows.
  double min_second_difference = std::numeric_limits<double>::infinity();
  // Largest error those second differences can carry from the solver gaps.
  double gap_allowance = 0.0;
};

// Worker count: hardware concurrency, capped by HJD_THREADS when set.
inline unsigned scan_worker_count() {
  unsigned n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("HJD_THREADS")) {
    const long cap = std::strtol(env, nullptr, 10);
    if (cap >= 1) n = std::min<unsigned>(n, static_cast<unsigned>(cap));
  }
  return n;
}

inline std::vector<double> scan_parameters(const ScanSpec& spec) {
  if (spec.steps < 1) throw InvalidInput("scan: steps must be at least 1");
  std::vector<double> out;
  for (int k = 0; k < spec.steps; ++k)
    out.push_back(spec.steps == 1 ? spec.lo
                                  : spec.lo + (spec.hi - spec.lo) * k / (spec.steps - 1.0));
  return out;
}

// Solves S along one axis. Points are independent and may run on several
// threads; each row depends only on its own parameter.
inline ScanResult scan_surface(const MultiTimeProblem& prob, const Vector& x, const ScanSpec& spec,
                               const LaxOptions& opt = {}) {
  const std::vector<double> params = scan_parameters(spec);
  if (spec.axis == ScanAxis::time) {
    if (spec.time_index >= prob.size()) throw InvalidInput("scan: time index out of range");
    if (!(spec.lo > 0.0) || !(spec.hi > 0.0)) throw InvalidInput("scan: time range must be positive");
  } else {
    if (spec.x2.size() != x.size() || spec.times2.size() != prob.size())
      throw InvalidInput("scan: mixing axis needs a second endpoint");
    if (spec.lo < 0.0 || spec.hi > 1.0) throw InvalidInput("scan: mixing range must lie in [0,1]");
  }
  ScanResult out;
  out.rows.resize(params.size());
  const std::vector<double> t1 = prob.times();

  auto solve_point = [&](std::size_t k) {
    const double a = params[k];
    Vector xp = x;
    std::vector<double> times = t1;
    if (spec.axis == ScanAxis::time) {
      times[spec.time_index] = a;
    } else {
      xp = a * x + (1.0 - a) * spec.x2;
      for (std::size_t j = 0; j < times.size(); ++j) times[j] = a * t1[j] + (1.0 - a) * spec.times2[j];
    }
    const DecompositionResult r = lax_solve(prob.with_times(times), xp, opt);
    ScanRow row;
    row.param = a;
    row.value = r.value;
    row.p_norm = r.momentum ? r.momentum->norm() : std::numeric_limits<double>::quiet_NaN();
    row.gap = r.duality_gap;
    row.converged = r.converged;
    out.rows[k] = row;
  };

  const unsigned workers = std::min<unsigned>(scan_worker_count(), static_cast<unsigned>(params.size()));
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto work = [&] {
    for (std::size_t k = next++; k < params.size(); k = next++) {
      try {
        solve_point(k);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);

  for (std::size_t k = 1; k + 1 < out.rows.size(); ++k) {
    const double sd = out.rows[k - 1].value - 2.0 * out.rows[k].value + out.rows[k + 1].value;
    out.min_second_difference = std::min(out.min_second_difference, sd);
    out.gap_allowance = std::max(
        out.gap_allowance, out.rows[k - 1].gap + 2.0 * out.rows[k].gap + out.rows[k + 1].gap);
  }
  return out;
}

}  // namespace hjd
