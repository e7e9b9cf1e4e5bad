#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace hjd {

using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed arguments: non-finite data, bad sizes, non-positive steps.
class InvalidInput : public Error {
 public:
  using Error::Error;
};

// A solver was asked for something its inputs cannot provide, e.g. a
// gradient on a functional without one.
class ConfigurationError : public Error {
 public:
  using Error::Error;
};

// Every probe of the primal objective returned +inf.
class Infeasible : public Error {
 public:
  using Error::Error;
};

// Numerical blow-up: iterate norms or dual values beyond a sanity bound.
class Instability : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  IoError(const std::string& what, std::size_t offset = 0)
      : Error(what), offset_(offset) {}
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

// Iteration budget exhausted. Carries the best iterate seen and the
// certificate it achieved so callers can decide whether it is usable.
class NonConvergence : public Error {
 public:
  NonConvergence(const std::string& what, Vector best, double achieved_gap,
                 long iterations)
      : Error(what),
        best_(std::move(best)),
        gap_(achieved_gap),
        iterations_(iterations) {}

  const Vector& best_iterate() const noexcept { return best_; }
  double achieved_gap() const noexcept { return gap_; }
  long iterations() const noexcept { return iterations_; }

 private:
  Vector best_;
  double gap_;
  long iterations_;
};

inline void require_finite(const Vector& v, const char* what) {
  if (!v.allFinite()) throw InvalidInput(std::string(what) + ": non-finite coordinate");
}

inline void require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v))
    throw InvalidInput(std::string(what) + " must be positive and finite");
}

}  // namespace hjd
