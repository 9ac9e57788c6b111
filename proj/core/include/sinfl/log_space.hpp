#ifndef SINFL_LOG_SPACE_HPP
#define SINFL_LOG_SPACE_HPP

#include <cmath>
#include <limits>
#include <span>

namespace sinfl {

inline constexpr double kNegInfinity = -std::numeric_limits<double>::infinity();

/// log(exp(a) + exp(b)) without overflow.
inline double log_add_exp(double a, double b) noexcept {
  if (a == kNegInfinity) return b;
  if (b == kNegInfinity) return a;
  return a > b ? a + std::log1p(std::exp(b - a)) : b + std::log1p(std::exp(a - b));
}

/// Two-pass log-sum-exp over a span. Empty input gives -infinity.
double log_sum_exp(std::span<const double> values) noexcept;

/// Streaming log-sum-exp: keeps the running maximum and the sum of
/// exp(x - max), rescaling whenever the maximum moves.
class LogSumExp {
 public:
  void add(double log_term) noexcept {
    if (log_term == kNegInfinity) {
      return;
    }
    if (log_term <= max_) {
      scaled_ += std::exp(log_term - max_);
    } else {
      scaled_ = scaled_ * std::exp(max_ - log_term) + 1.0;
      max_ = log_term;
    }
  }

  void merge(const LogSumExp& other) noexcept {
    if (other.max_ == kNegInfinity) {
      return;
    }
    if (max_ == kNegInfinity) {
      *this = other;
      return;
    }
    if (other.max_ <= max_) {
      scaled_ += other.scaled_ * std::exp(other.max_ - max_);
    } else {
      scaled_ = scaled_ * std::exp(max_ - other.max_) + other.scaled_;
      max_ = other.max_;
    }
  }

  [[nodiscard]] double value() const noexcept {
    return max_ == kNegInfinity ? kNegInfinity : max_ + std::log(scaled_);
  }

 private:
  double max_ = kNegInfinity;
  double scaled_ = 0.0;
};

}  // namespace sinfl

#endif  // SINFL_LOG_SPACE_HPP
