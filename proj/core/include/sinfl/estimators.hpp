#ifndef SINFL_ESTIMATORS_HPP
#define SINFL_ESTIMATORS_HPP

#include <sinfl/log_space.hpp>
#include <sinfl/random.hpp>

#include <cstddef>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

namespace sinfl {

/// Raised when every weight in a set is zero (log weight -infinity).
class DegenerateWeightsError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A point with its unnormalized log importance weight log f(x) - log q(x).
struct WeightedSample {
  std::vector<double> point;
  double log_weight = 0.0;
};

/// Immutable multiset of weighted samples with a cached log weight sum.
class SampleSet {
 public:
  SampleSet() = default;
  /// Throws std::domain_error for NaN or +infinity log weights.
  explicit SampleSet(std::vector<WeightedSample> samples);

  [[nodiscard]] std::span<const WeightedSample> samples() const noexcept { return samples_; }
  [[nodiscard]] const WeightedSample& operator[](std::size_t i) const { return samples_[i]; }
  [[nodiscard]] std::size_t size() const noexcept { return samples_.size(); }
  [[nodiscard]] bool empty() const noexcept { return samples_.empty(); }
  [[nodiscard]] double log_weight_sum() const noexcept { return log_weight_sum_; }

 private:
  std::vector<WeightedSample> samples_;
  double log_weight_sum_ = kNegInfinity;
};

/// Vector-valued integrand h. The evaluator writes h(point) into `out`,
/// which always has size dim().
class TestFunction {
 public:
  using Evaluator = std::function<void(std::span<const double> point, std::span<double> out)>;

  TestFunction(std::size_t dim, Evaluator evaluator);

  /// h(x) = x, for points of the given dimension.
  static TestFunction identity(std::size_t dim);
  /// h(x) = x[index], one component.
  static TestFunction coordinate(std::size_t index);
  /// h(x) = 1.
  static TestFunction one();

  [[nodiscard]] std::size_t dim() const noexcept { return dim_; }
  void operator()(std::span<const double> point, std::span<double> out) const {
    evaluator_(point, out);
  }
  [[nodiscard]] std::vector<double> operator()(std::span<const double> point) const;

 private:
  std::size_t dim_;
  Evaluator evaluator_;
};

enum class EstimateKind { standard, self_normalized, evidence };

struct Estimate {
  /// Estimate of H per component; for kind == evidence a single entry log F.
  std::vector<double> value;
  EstimateKind kind = EstimateKind::standard;
  std::size_t n = 0;
  double log_weight_sum = kNegInfinity;
};

/// Streaming estimator state. Accumulates sum w, sum w*h in log space,
/// keeping positive and negative parts of each h component apart, so
/// weights far below linear-space underflow are handled exactly.
class WeightedAccumulator {
 public:
  explicit WeightedAccumulator(TestFunction h);

  void add(std::span<const double> point, double log_weight);
  /// Adds a sample whose h(point) was already evaluated.
  void add_evaluated(std::span<const double> h_value, double log_weight);
  void merge(const WeightedAccumulator& other);

  [[nodiscard]] std::size_t count() const noexcept { return count_; }
  [[nodiscard]] double log_weight_sum() const noexcept { return weight_.value(); }
  [[nodiscard]] const TestFunction& test_function() const noexcept { return h_; }

  /// (1/n) sum w h. Requires weights from a normalized target.
  [[nodiscard]] Estimate standard() const;
  /// sum w h / sum w.
  [[nodiscard]] Estimate self_normalized() const;
  /// log((1/n) sum w).
  [[nodiscard]] Estimate evidence() const;

 private:
  [[nodiscard]] std::vector<double> ratio_to(double log_denominator) const;

  TestFunction h_;
  std::size_t count_ = 0;
  LogSumExp weight_;
  std::vector<LogSumExp> positive_;
  std::vector<LogSumExp> negative_;
  std::vector<double> scratch_;
};

[[nodiscard]] Estimate standard_estimate(const SampleSet& samples, const TestFunction& h);
[[nodiscard]] Estimate self_normalized_estimate(const SampleSet& samples, const TestFunction& h);
/// Per-component sum (w/w_sum)^2 (h - J_n)^2.
[[nodiscard]] std::vector<double> snis_variance_estimate(const SampleSet& samples,
                                                         const TestFunction& h);
[[nodiscard]] Estimate evidence_estimate(const SampleSet& samples);

/// Multiset union; duplicates kept, order preserved.
[[nodiscard]] SampleSet combine(std::span<const SampleSet> sets);

/// max-norm of estimate(union) - sum_i lambda_i estimate(X_i), with
/// lambda_i = |X_i|/|X| (standard) or w_sum(X_i)/w_sum(X) (self-normalized).
[[nodiscard]] double decomposition_residual(std::span<const SampleSet> sets, const TestFunction& h,
                                            EstimateKind kind);

enum class Norm { l1, l2, linf };
[[nodiscard]] double norm(std::span<const double> v, Norm which);

/// Both sides of the convex error bound for a partition:
/// weighted_errors = sum_i lambda_i ||J(X_i) - H||, combined_error = ||J(X) - H||.
struct ErrorBound {
  double weighted_errors = 0.0;
  double combined_error = 0.0;
};
[[nodiscard]] ErrorBound convex_error_bound(std::span<const SampleSet> sets, const TestFunction& h,
                                            EstimateKind kind, std::span<const double> reference,
                                            Norm which);

/// Multinomial resampling: `count` indices drawn with replacement with
/// probability proportional to exp(log_weight).
[[nodiscard]] std::vector<std::size_t> resample_indices(const SampleSet& samples, std::size_t count,
                                                        RandomSource& rng);
[[nodiscard]] std::vector<std::vector<double>> resample(const SampleSet& samples, std::size_t count,
                                                        RandomSource& rng);

}  // namespace sinfl

#endif  // SINFL_ESTIMATORS_HPP
