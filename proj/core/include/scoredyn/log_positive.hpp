#pragma once

#include <cmath>
#include <compare>
#include <limits>

#include "scoredyn/errors.hpp"

namespace scoredyn {

/// A strictly positive real stored by its natural logarithm.
///
/// Kernel values span hundreds of orders of magnitude (they decay like
/// exp(-z / b^2) and grow like a^{-2s}), so every positive quantity that can
/// leave the double range is carried in this form.
class LogPositive {
 public:
  /// Represents 1.
  constexpr LogPositive() = default;

  static constexpr LogPositive from_log(double log_value) {
    LogPositive p;
    p.log_ = log_value;
    return p;
  }

  static LogPositive from_linear(double value) {
    if (!(value > 0.0) || !std::isfinite(value))
      throw InvalidArgs("LogPositive requires a finite strictly positive value");
    return from_log(std::log(value));
  }

  constexpr double log() const { return log_; }
  double value() const { return std::exp(log_); }

  friend LogPositive operator+(LogPositive x, LogPositive y) {
    const double hi = x.log_ > y.log_ ? x.log_ : y.log_;
    const double lo = x.log_ > y.log_ ? y.log_ : x.log_;
    return from_log(hi + std::log1p(std::exp(lo - hi)));
  }
  friend constexpr LogPositive operator*(LogPositive x, LogPositive y) {
    return from_log(x.log_ + y.log_);
  }
  friend constexpr LogPositive operator/(LogPositive x, LogPositive y) {
    return from_log(x.log_ - y.log_);
  }
  LogPositive& operator+=(LogPositive other) { return *this = *this + other; }
  LogPositive& operator*=(LogPositive other) { return *this = *this * other; }

  friend constexpr auto operator<=>(LogPositive, LogPositive) = default;

 private:
  double log_ = 0.0;
};

/// Streaming log-sum-exp accumulator. Empty sums have log value -inf.
class LogSumAccumulator {
 public:
  void add_log(double log_term) {
    if (log_term == -std::numeric_limits<double>::infinity()) return;
    if (log_term <= max_) {
      sum_ += std::exp(log_term - max_);
    } else {
      sum_ = sum_ * std::exp(max_ - log_term) + 1.0;
      max_ = log_term;
    }
  }

  bool empty() const { return sum_ == 0.0; }
  double log() const { return max_ + std::log(sum_); }
  LogPositive result() const {
    if (empty()) throw NumericAccuracy("log-sum of an empty set of terms");
    return LogPositive::from_log(log());
  }

 private:
  double max_ = -std::numeric_limits<double>::infinity();
  double sum_ = 0.0;
};

}  // namespace scoredyn
