#pragma once

#include <cmath>
#include <limits>
#include <ostream>

#include "hjd/core/errors.hpp"

namespace hjd {

// A value in R ∪ {+inf}. -inf and NaN are rejected at construction so
// that every functional stays proper.
class ExtendedReal {
 public:
  constexpr ExtendedReal() = default;

  ExtendedReal(double v) {  // NOLINT(google-explicit-constructor)
    if (std::isnan(v)) throw InvalidInput("extended real: NaN");
    if (v == -std::numeric_limits<double>::infinity())
      throw InvalidInput("extended real: -inf is not allowed");
    if (std::isinf(v)) {
      infinite_ = true;
    } else {
      value_ = v;
    }
  }

  static ExtendedReal infinity() {
    ExtendedReal r;
    r.infinite_ = true;
    return r;
  }

  bool is_finite() const noexcept { return !infinite_; }
  bool is_infinite() const noexcept { return infinite_; }

  double value() const {
    if (infinite_) throw InvalidInput("extended real: value() on +inf");
    return value_;
  }

  // +inf maps to the IEEE infinity.
  double to_double() const noexcept {
    return infinite_ ? std::numeric_limits<double>::infinity() : value_;
  }

  ExtendedReal& operator+=(const ExtendedReal& o) {
    if (infinite_ || o.infinite_) {
      infinite_ = true;
      value_ = 0.0;
    } else {
      value_ += o.value_;
    }
    return *this;
  }

  friend ExtendedReal operator+(ExtendedReal a, const ExtendedReal& b) {
    a += b;
    return a;
  }

  // Nonnegative scaling with the convex-analysis convention 0·(+inf) = 0.
  ExtendedReal scaled(double s) const {
    if (!(s >= 0.0) || !std::isfinite(s))
      throw InvalidInput("extended real: scale must be finite and nonnegative");
    if (s == 0.0) return ExtendedReal(0.0);
    if (infinite_) return infinity();
    return ExtendedReal(s * value_);
  }

  friend bool operator==(const ExtendedReal& a, const ExtendedReal& b) {
    if (a.infinite_ || b.infinite_) return a.infinite_ == b.infinite_;
    return a.value_ == b.value_;
  }
  friend bool operator<(const ExtendedReal& a, const ExtendedReal& b) {
    if (a.infinite_) return false;
    if (b.infinite_) return true;
    return a.value_ < b.value_;
  }
  friend bool operator<=(const ExtendedReal& a, const ExtendedReal& b) {
    return a < b || a == b;
  }
  friend bool operator>(const ExtendedReal& a, const ExtendedReal& b) { return b < a; }
  friend bool operator>=(const ExtendedReal& a, const ExtendedReal& b) { return b <= a; }

  friend std::ostream& operator<<(std::ostream& os, const ExtendedReal& v) {
    if (v.infinite_) return os << "+inf";
    return os << v.value_;
  }

 private:
  double value_ = 0.0;
  bool infinite_ = false;
};

}  // namespace hjd
