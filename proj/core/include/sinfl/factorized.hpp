#ifndef SINFL_FACTORIZED_HPP
#define SINFL_FACTORIZED_HPP

#include <sinfl/distributions.hpp>
#include <sinfl/estimators.hpp>
#include <sinfl/random.hpp>

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace sinfl {

/// Unnormalized target whose log density splits as
///
///   log f(phi, gamma_1..K) = global_log_prior(phi)
///                            + sum_j [block_log_prior_j(gamma_j) + block_log_likelihood_j(phi, gamma_j)]
///                            + log_evidence_offset
///
/// where block j's likelihood only touches the data points attached to
/// gamma_j. Joint points are flat: [phi, gamma_1, ..., gamma_K].
/// The global block may be empty (dimension 0).
class FactorizedModel {
 public:
  using GlobalLogPrior = std::function<double(std::span<const double> phi)>;
  using BlockLogPrior = std::function<double(std::span<const double> gamma)>;
  using BlockLogLikelihood =
      std::function<double(std::span<const double> phi, std::span<const double> gamma)>;

  struct Block {
    std::size_t dim = 0;
    BlockLogPrior log_prior;
    BlockLogLikelihood log_likelihood;
  };

  FactorizedModel(std::size_t global_dim, GlobalLogPrior global_log_prior, std::vector<Block> blocks,
                  double log_evidence_offset = 0.0);

  [[nodiscard]] std::size_t block_count() const noexcept { return blocks_.size(); }
  [[nodiscard]] std::size_t global_dim() const noexcept { return global_dim_; }
  [[nodiscard]] std::size_t block_dim(std::size_t j) const { return blocks_.at(j).dim; }
  [[nodiscard]] std::size_t point_dim() const noexcept { return offsets_.back(); }
  [[nodiscard]] double log_evidence_offset() const noexcept { return log_evidence_offset_; }

  [[nodiscard]] std::span<const double> global_part(std::span<const double> joint) const;
  [[nodiscard]] std::span<const double> block_part(std::span<const double> joint,
                                                   std::size_t j) const;
  /// Offset of block j inside a joint point.
  [[nodiscard]] std::size_t block_offset(std::size_t j) const { return offsets_.at(j); }

  [[nodiscard]] double global_log_prior(std::span<const double> phi) const;
  [[nodiscard]] double block_log_prior(std::size_t j, std::span<const double> gamma) const;
  [[nodiscard]] double block_log_likelihood(std::size_t j, std::span<const double> phi,
                                            std::span<const double> gamma) const;

  /// Full unnormalized log density of a joint point, offset included.
  [[nodiscard]] double log_density(std::span<const double> joint) const;
  /// Sum of block log likelihoods only (no priors, no offset).
  [[nodiscard]] double log_likelihood(std::span<const double> joint) const;

 private:
  std::size_t global_dim_;
  GlobalLogPrior global_log_prior_;
  std::vector<Block> blocks_;
  double log_evidence_offset_;
  /// offsets_[0] is the first block; offsets_[K] the total dimension.
  std::vector<std::size_t> offsets_;
};

/// Sampler / log density pair for one block of a factorized proposal.
class BlockProposal {
 public:
  using Sampler = std::function<std::vector<double>(RandomSource&)>;
  using LogDensity = std::function<double(std::span<const double>)>;

  BlockProposal(std::size_t dim, Sampler sampler, LogDensity log_density);

  static BlockProposal from_density(DensitySpec spec);
  /// Zero-dimensional block: samples nothing, log density 0.
  static BlockProposal empty();

  [[nodiscard]] std::size_t dim() const noexcept { return dim_; }
  [[nodiscard]] std::vector<double> sample(RandomSource& rng) const;
  [[nodiscard]] double log_density(std::span<const double> x) const;

 private:
  std::size_t dim_;
  Sampler sampler_;
  LogDensity log_density_;
};

/// q(phi, gamma) = q_phi(phi) * prod_j q_j(gamma_j); blocks drawn independently.
struct FactorizedProposal {
  BlockProposal global = BlockProposal::empty();
  std::vector<BlockProposal> blocks;

  [[nodiscard]] double log_density(const FactorizedModel& model,
                                   std::span<const double> joint) const;
};

struct EvalCounter {
  std::uint64_t block_likelihood_evals = 0;
  std::uint64_t joint_samples_emitted = 0;

  EvalCounter& operator+=(const EvalCounter& other) noexcept {
    block_likelihood_evals += other.block_likelihood_evals;
    joint_samples_emitted += other.joint_samples_emitted;
    return *this;
  }
  friend bool operator==(const EvalCounter&, const EvalCounter&) = default;
};

/// Refusal threshold for uncapped emission.
inline constexpr std::uint64_t kMaxCombinations = 100'000'000;

struct InflationConfig {
  /// Independent phi draws (m).
  std::size_t outer_draws = 1;
  /// Draws per block for each phi draw (M).
  std::size_t inner_draws = 1;
  /// Emit at most this many combinations per phi draw, lexicographic prefix.
  std::optional<std::uint64_t> combination_cap;

  /// Throws std::invalid_argument for an invalid config.
  void validate(std::size_t block_count) const;
};

/// One emitted joint sample. `point` is only valid during the callback.
struct Emission {
  std::span<const double> point;
  double log_weight = 0.0;
  /// Sum of block log likelihoods of the point.
  double log_likelihood = 0.0;
};
using EmissionSink = std::function<void(const Emission&)>;

struct SamplingResult {
  SampleSet samples;
  EvalCounter evals;
};

/// Plain importance sampling for factorized models: m independent joint
/// draws, weight = log f - log q.
EvalCounter plain_factorized_stream(const FactorizedModel& model, const FactorizedProposal& proposal,
                                    std::size_t m, RandomSource& rng, const EmissionSink& sink);
[[nodiscard]] SamplingResult plain_factorized_sampler(const FactorizedModel& model,
                                                      const FactorizedProposal& proposal,
                                                      std::size_t m, RandomSource& rng);

/// Sample Inflation. For each phi draw, M draws per block are scored once
/// each (prior + likelihood cached per block), then every combination
/// c in {0..M-1}^K is emitted in lexicographic order (first block slowest)
/// with weight built from the cached factors.
EvalCounter inflate_stream(const FactorizedModel& model, const FactorizedProposal& proposal,
                           const InflationConfig& config, RandomSource& rng,
                           const EmissionSink& sink);
[[nodiscard]] SamplingResult inflate(const FactorizedModel& model, const FactorizedProposal& proposal,
                                     const InflationConfig& config, RandomSource& rng);

/// Recombines pre-drawn joint points group by group: within a group of g
/// points, block j's g observed values act as the inner draws and all g^K
/// combinations are emitted. Requires an empty global block.
EvalCounter grouped_inflate_stream(std::span<const std::vector<double>> points,
                                   std::size_t group_size, const FactorizedModel& model,
                                   const FactorizedProposal& proposal, const EmissionSink& sink);
[[nodiscard]] SamplingResult grouped_inflate(std::span<const std::vector<double>> points,
                                             std::size_t group_size, const FactorizedModel& model,
                                             const FactorizedProposal& proposal);

/// Lexicographic odometer over {0..M-1}^K.
class CombinationCursor {
 public:
  CombinationCursor(std::size_t radix, std::size_t digits);
  [[nodiscard]] std::span<const std::size_t> current() const noexcept { return digits_; }
  /// Advances; returns false after the last combination.
  bool next() noexcept;

 private:
  std::size_t radix_;
  std::vector<std::size_t> digits_;
};

/// M^K, or nullopt if it exceeds 2^64 - 1.
[[nodiscard]] std::optional<std::uint64_t> checked_power(std::uint64_t base, std::size_t exponent);

}  // namespace sinfl

#endif  // SINFL_FACTORIZED_HPP
