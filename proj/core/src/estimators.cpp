#include <sinfl/estimators.hpp>

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

namespace sinfl {
namespace {

void check_log_weight(double lw) {
  if (std::isnan(lw) || lw == std::numeric_limits<double>::infinity()) {
    throw std::domain_error("log weight must be finite or -infinity, got " + std::to_string(lw));
  }
}

void require_non_empty(const SampleSet& samples, const char* what) {
  if (samples.empty()) {
    throw std::invalid_argument(std::string{what} + ": empty sample set");
  }
}

WeightedAccumulator accumulate(const SampleSet& samples, const TestFunction& h) {
  WeightedAccumulator acc{h};
  for (const auto& s : samples.samples()) {
    acc.add(s.point, s.log_weight);
  }
  return acc;
}

Estimate estimate_of(const SampleSet& samples, const TestFunction& h, EstimateKind kind) {
  switch (kind) {
    case EstimateKind::standard:
      return standard_estimate(samples, h);
    case EstimateKind::self_normalized:
      return self_normalized_estimate(samples, h);
    case EstimateKind::evidence:
      return evidence_estimate(samples);
  }
  throw std::invalid_argument("unknown estimate kind");
}

/// Estimates of every part and the union, plus the convex weights.
struct Partition {
  std::vector<Estimate> parts;
  std::vector<double> lambda;
  Estimate whole;
};

Partition partition_estimates(std::span<const SampleSet> sets, const TestFunction& h,
                              EstimateKind kind) {
  if (sets.empty()) {
    throw std::invalid_argument("partition: need at least one set");
  }
  if (kind == EstimateKind::evidence) {
    throw std::invalid_argument("partition: evidence estimates are not convex combinations");
  }
  Partition out;
  const SampleSet all = combine(sets);
  out.whole = estimate_of(all, h, kind);
  for (const auto& set : sets) {
    out.parts.push_back(estimate_of(set, h, kind));
    if (kind == EstimateKind::standard) {
      out.lambda.push_back(static_cast<double>(set.size()) / static_cast<double>(all.size()));
    } else {
      out.lambda.push_back(std::exp(set.log_weight_sum() - all.log_weight_sum()));
    }
  }
  return out;
}

}  // namespace

double log_sum_exp(std::span<const double> values) noexcept {
  double top = kNegInfinity;
  for (double v : values) top = std::max(top, v);
  if (top == kNegInfinity) {
    return kNegInfinity;
  }
  double sum = 0.0;
  for (double v : values) sum += std::exp(v - top);
  return top + std::log(sum);
}

SampleSet::SampleSet(std::vector<WeightedSample> samples) : samples_{std::move(samples)} {
  std::vector<double> lw;
  lw.reserve(samples_.size());
  for (const auto& s : samples_) {
    check_log_weight(s.log_weight);
    lw.push_back(s.log_weight);
  }
  log_weight_sum_ = log_sum_exp(lw);
}

TestFunction::TestFunction(std::size_t dim, Evaluator evaluator)
    : dim_{dim}, evaluator_{std::move(evaluator)} {
  if (dim_ == 0 || !evaluator_) {
    throw std::invalid_argument("TestFunction: need a positive dimension and an evaluator");
  }
}

TestFunction TestFunction::identity(std::size_t dim) {
  return TestFunction{dim, [dim](std::span<const double> x, std::span<double> out) {
                        if (x.size() != dim) {
                          throw std::invalid_argument("identity test function: dimension mismatch");
                        }
                        std::copy(x.begin(), x.end(), out.begin());
                      }};
}

TestFunction TestFunction::coordinate(std::size_t index) {
  return TestFunction{1, [index](std::span<const double> x, std::span<double> out) {
                        out[0] = x[index];
                      }};
}

TestFunction TestFunction::one() {
  return TestFunction{1, [](std::span<const double>, std::span<double> out) { out[0] = 1.0; }};
}

std::vector<double> TestFunction::operator()(std::span<const double> point) const {
  std::vector<double> out(dim_);
  evaluator_(point, out);
  return out;
}

WeightedAccumulator::WeightedAccumulator(TestFunction h)
    : h_{std::move(h)}, positive_(h_.dim()), negative_(h_.dim()), scratch_(h_.dim()) {}

void WeightedAccumulator::add(std::span<const double> point, double log_weight) {
  h_(point, scratch_);
  add_evaluated(scratch_, log_weight);
}

void WeightedAccumulator::add_evaluated(std::span<const double> h_value, double log_weight) {
  check_log_weight(log_weight);
  ++count_;
  weight_.add(log_weight);
  if (log_weight == kNegInfinity) {
    return;
  }
  for (std::size_t k = 0; k < positive_.size(); ++k) {
    const double v = h_value[k];
    if (v > 0.0) {
      positive_[k].add(log_weight + std::log(v));
    } else if (v < 0.0) {
      negative_[k].add(log_weight + std::log(-v));
    }
  }
}

void WeightedAccumulator::merge(const WeightedAccumulator& other) {
  if (other.positive_.size() != positive_.size()) {
    throw std::invalid_argument("WeightedAccumulator::merge: test function dimensions differ");
  }
  count_ += other.count_;
  weight_.merge(other.weight_);
  for (std::size_t k = 0; k < positive_.size(); ++k) {
    positive_[k].merge(other.positive_[k]);
    negative_[k].merge(other.negative_[k]);
  }
}

std::vector<double> WeightedAccumulator::ratio_to(double log_denominator) const {
  std::vector<double> value(positive_.size());
  for (std::size_t k = 0; k < value.size(); ++k) {
    value[k] = std::exp(positive_[k].value() - log_denominator) -
               std::exp(negative_[k].value() - log_denominator);
  }
  return value;
}

Estimate WeightedAccumulator::standard() const {
  if (count_ == 0) {
    throw std::invalid_argument("standard estimate: empty sample set");
  }
  return {ratio_to(std::log(static_cast<double>(count_))), EstimateKind::standard, count_,
          weight_.value()};
}

Estimate WeightedAccumulator::self_normalized() const {
  if (count_ == 0) {
    throw std::invalid_argument("self-normalized estimate: empty sample set");
  }
  const double lws = weight_.value();
  if (lws == kNegInfinity) {
    throw DegenerateWeightsError("self-normalized estimate: all weights are zero");
  }
  return {ratio_to(lws), EstimateKind::self_normalized, count_, lws};
}

Estimate WeightedAccumulator::evidence() const {
  if (count_ == 0) {
    throw std::invalid_argument("evidence estimate: empty sample set");
  }
  const double lws = weight_.value();
  return {{lws - std::log(static_cast<double>(count_))}, EstimateKind::evidence, count_, lws};
}

Estimate standard_estimate(const SampleSet& samples, const TestFunction& h) {
  require_non_empty(samples, "standard estimate");
  return accumulate(samples, h).standard();
}

Estimate self_normalized_estimate(const SampleSet& samples, const TestFunction& h) {
  require_non_empty(samples, "self-normalized estimate");
  return accumulate(samples, h).self_normalized();
}

std::vector<double> snis_variance_estimate(const SampleSet& samples, const TestFunction& h) {
  const Estimate mean = self_normalized_estimate(samples, h);
  std::vector<double> variance(h.dim(), 0.0);
  std::vector<double> hv(h.dim());
  for (const auto& s : samples.samples()) {
    if (s.log_weight == kNegInfinity) continue;
    const double w = std::exp(s.log_weight - samples.log_weight_sum());
    h(s.point, hv);
    for (std::size_t k = 0; k < hv.size(); ++k) {
      const double d = hv[k] - mean.value[k];
      variance[k] += w * w * d * d;
    }
  }
  return variance;
}

Estimate evidence_estimate(const SampleSet& samples) {
  require_non_empty(samples, "evidence estimate");
  const double lws = samples.log_weight_sum();
  return {{lws - std::log(static_cast<double>(samples.size()))}, EstimateKind::evidence,
          samples.size(), lws};
}

SampleSet combine(std::span<const SampleSet> sets) {
  std::size_t total = 0;
  for (const auto& set : sets) total += set.size();
  std::vector<WeightedSample> merged;
  merged.reserve(total);
  for (const auto& set : sets) {
    merged.insert(merged.end(), set.samples().begin(), set.samples().end());
  }
  return SampleSet{std::move(merged)};
}

double decomposition_residual(std::span<const SampleSet> sets, const TestFunction& h,
                              EstimateKind kind) {
  const Partition p = partition_estimates(sets, h, kind);
  double residual = 0.0;
  for (std::size_t k = 0; k < h.dim(); ++k) {
    double mix = 0.0;
    for (std::size_t i = 0; i < p.parts.size(); ++i) {
      mix += p.lambda[i] * p.parts[i].value[k];
    }
    residual = std::max(residual, std::abs(p.whole.value[k] - mix));
  }
  return residual;
}

double norm(std::span<const double> v, Norm which) {
  double acc = 0.0;
  switch (which) {
    case Norm::l1:
      for (double x : v) acc += std::abs(x);
      return acc;
    case Norm::l2:
      for (double x : v) acc += x * x;
      return std::sqrt(acc);
    case Norm::linf:
      for (double x : v) acc = std::max(acc, std::abs(x));
      return acc;
  }
  return acc;
}

ErrorBound convex_error_bound(std::span<const SampleSet> sets, const TestFunction& h,
                              EstimateKind kind, std::span<const double> reference, Norm which) {
  if (reference.size() != h.dim()) {
    throw std::invalid_argument("convex_error_bound: reference dimension mismatch");
  }
  const Partition p = partition_estimates(sets, h, kind);
  std::vector<double> diff(h.dim());
  auto error_of = [&](const Estimate& e) {
    for (std::size_t k = 0; k < diff.size(); ++k) diff[k] = e.value[k] - reference[k];
    return norm(diff, which);
  };
  ErrorBound bound;
  for (std::size_t i = 0; i < p.parts.size(); ++i) {
    bound.weighted_errors += p.lambda[i] * error_of(p.parts[i]);
  }
  bound.combined_error = error_of(p.whole);
  return bound;
}

std::vector<std::size_t> resample_indices(const SampleSet& samples, std::size_t count,
                                          RandomSource& rng) {
  require_non_empty(samples, "resample");
  const double lws = samples.log_weight_sum();
  if (lws == kNegInfinity) {
    throw DegenerateWeightsError("resample: all weights are zero");
  }
  std::vector<double> probabilities;
  probabilities.reserve(samples.size());
  for (const auto& s : samples.samples()) {
    probabilities.push_back(std::exp(s.log_weight - lws));
  }
  std::discrete_distribution<std::size_t> pick(probabilities.begin(), probabilities.end());
  std::vector<std::size_t> out(count);
  for (auto& idx : out) idx = pick(rng);
  return out;
}

std::vector<std::vector<double>> resample(const SampleSet& samples, std::size_t count,
                                          RandomSource& rng) {
  std::vector<std::vector<double>> out;
  out.reserve(count);
  for (const auto idx : resample_indices(samples, count, rng)) {
    out.push_back(samples[idx].point);
  }
  return out;
}

}  // namespace sinfl
