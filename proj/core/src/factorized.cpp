#include <sinfl/factorized.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace sinfl {
namespace {

void require_dim(std::span<const double> x, std::size_t dim, const char* what) {
  if (x.size() != dim) {
    throw std::logic_error(std::string{what} + ": proposal produced dimension " +
                           std::to_string(x.size()) + ", model expects " + std::to_string(dim));
  }
}

double checked_proposal_density(const BlockProposal& q, std::span<const double> x) {
  const double lq = q.log_density(x);
  if (!(lq > kNegInfinity) || std::isnan(lq)) {
    throw std::logic_error("proposal assigns zero density to its own draw");
  }
  return lq;
}

void check_proposal_shape(const FactorizedModel& model, const FactorizedProposal& proposal) {
  if (proposal.blocks.size() != model.block_count()) {
    throw std::invalid_argument("proposal block count does not match model");
  }
  if (proposal.global.dim() != model.global_dim()) {
    throw std::invalid_argument("proposal global block dimension does not match model");
  }
  for (std::size_t j = 0; j < model.block_count(); ++j) {
    if (proposal.blocks[j].dim() != model.block_dim(j)) {
      throw std::invalid_argument("proposal block " + std::to_string(j) +
                                  " dimension does not match model");
    }
  }
}

/// Cached per-draw factors of one block: score = prior + likelihood - log q.
struct BlockCache {
  std::vector<std::vector<double>> values;
  std::vector<double> score;
  std::vector<double> log_likelihood;
};

void score_block(const FactorizedModel& model, const BlockProposal& q, std::size_t j,
                 std::span<const double> phi, BlockCache& cache, EvalCounter& evals) {
  cache.score.resize(cache.values.size());
  cache.log_likelihood.resize(cache.values.size());
  for (std::size_t i = 0; i < cache.values.size(); ++i) {
    const auto& gamma = cache.values[i];
    const double lik = model.block_log_likelihood(j, phi, gamma);
    ++evals.block_likelihood_evals;
    cache.log_likelihood[i] = lik;
    cache.score[i] = model.block_log_prior(j, gamma) + lik - checked_proposal_density(q, gamma);
  }
}

/// Emits up to `limit` combinations of the cached blocks sharing `phi`.
void emit_combinations(const FactorizedModel& model, std::span<const double> phi, double base,
                       const std::vector<BlockCache>& caches, std::size_t radix,
                       std::uint64_t limit, std::vector<double>& point, EvalCounter& evals,
                       const EmissionSink& sink) {
  std::copy(phi.begin(), phi.end(), point.begin());
  CombinationCursor cursor{radix, caches.size()};
  std::uint64_t emitted = 0;
  do {
    const auto c = cursor.current();
    double log_weight = base;
    double log_likelihood = 0.0;
    for (std::size_t j = 0; j < caches.size(); ++j) {
      const auto& value = caches[j].values[c[j]];
      std::copy(value.begin(), value.end(), point.begin() + model.block_offset(j));
      log_weight += caches[j].score[c[j]];
      log_likelihood += caches[j].log_likelihood[c[j]];
    }
    sink(Emission{point, log_weight, log_likelihood});
    ++evals.joint_samples_emitted;
  } while (++emitted < limit && cursor.next());
}

SamplingResult collect(const std::function<EvalCounter(const EmissionSink&)>& run) {
  std::vector<WeightedSample> samples;
  const EvalCounter evals = run([&](const Emission& e) {
    samples.push_back({std::vector<double>(e.point.begin(), e.point.end()), e.log_weight});
  });
  return {SampleSet{std::move(samples)}, evals};
}

}  // namespace

FactorizedModel::FactorizedModel(std::size_t global_dim, GlobalLogPrior global_log_prior,
                                 std::vector<Block> blocks, double log_evidence_offset)
    : global_dim_{global_dim},
      global_log_prior_{std::move(global_log_prior)},
      blocks_{std::move(blocks)},
      log_evidence_offset_{log_evidence_offset} {
  if (blocks_.empty()) {
    throw std::invalid_argument("FactorizedModel: need at least one block");
  }
  if (!std::isfinite(log_evidence_offset_)) {
    throw std::invalid_argument("FactorizedModel: log evidence offset must be finite");
  }
  offsets_.push_back(global_dim_);
  for (const auto& b : blocks_) {
    if (b.dim == 0 || !b.log_likelihood) {
      throw std::invalid_argument("FactorizedModel: blocks need a dimension and a likelihood");
    }
    offsets_.push_back(offsets_.back() + b.dim);
  }
}

std::span<const double> FactorizedModel::global_part(std::span<const double> joint) const {
  return joint.first(global_dim_);
}

std::span<const double> FactorizedModel::block_part(std::span<const double> joint,
                                                    std::size_t j) const {
  return joint.subspan(offsets_.at(j), blocks_.at(j).dim);
}

double FactorizedModel::global_log_prior(std::span<const double> phi) const {
  return global_log_prior_ ? global_log_prior_(phi) : 0.0;
}

double FactorizedModel::block_log_prior(std::size_t j, std::span<const double> gamma) const {
  const auto& prior = blocks_[j].log_prior;
  return prior ? prior(gamma) : 0.0;
}

double FactorizedModel::block_log_likelihood(std::size_t j, std::span<const double> phi,
                                             std::span<const double> gamma) const {
  return blocks_[j].log_likelihood(phi, gamma);
}

double FactorizedModel::log_density(std::span<const double> joint) const {
  if (joint.size() != point_dim()) {
    throw std::invalid_argument("FactorizedModel::log_density: dimension mismatch");
  }
  const auto phi = global_part(joint);
  double lp = global_log_prior(phi) + log_evidence_offset_;
  for (std::size_t j = 0; j < blocks_.size(); ++j) {
    const auto gamma = block_part(joint, j);
    lp += block_log_prior(j, gamma) + block_log_likelihood(j, phi, gamma);
  }
  return lp;
}

double FactorizedModel::log_likelihood(std::span<const double> joint) const {
  const auto phi = global_part(joint);
  double ll = 0.0;
  for (std::size_t j = 0; j < blocks_.size(); ++j) {
    ll += block_log_likelihood(j, phi, block_part(joint, j));
  }
  return ll;
}

BlockProposal::BlockProposal(std::size_t dim, Sampler sampler, LogDensity log_density)
    : dim_{dim}, sampler_{std::move(sampler)}, log_density_{std::move(log_density)} {
  if (dim_ > 0 && (!sampler_ || !log_density_)) {
    throw std::invalid_argument("BlockProposal: sampler and log density are required");
  }
}

BlockProposal BlockProposal::from_density(DensitySpec spec) {
  validate(spec);
  const std::size_t dim = dimension(spec);
  return BlockProposal{dim, [spec](RandomSource& rng) { return sinfl::sample(spec, rng); },
                       [spec](std::span<const double> x) { return sinfl::log_density(spec, x); }};
}

BlockProposal BlockProposal::empty() {
  return BlockProposal{0, {}, {}};
}

std::vector<double> BlockProposal::sample(RandomSource& rng) const {
  return dim_ == 0 ? std::vector<double>{} : sampler_(rng);
}

double BlockProposal::log_density(std::span<const double> x) const {
  return dim_ == 0 ? 0.0 : log_density_(x);
}

double FactorizedProposal::log_density(const FactorizedModel& model,
                                       std::span<const double> joint) const {
  double lq = global.log_density(model.global_part(joint));
  for (std::size_t j = 0; j < blocks.size(); ++j) {
    lq += blocks[j].log_density(model.block_part(joint, j));
  }
  return lq;
}

void InflationConfig::validate(std::size_t block_count) const {
  if (outer_draws == 0 || inner_draws == 0) {
    throw std::invalid_argument("InflationConfig: outer and inner draw counts must be >= 1");
  }
  if (combination_cap) {
    if (*combination_cap == 0) {
      throw std::invalid_argument("InflationConfig: combination cap must be >= 1");
    }
    const auto total = checked_power(inner_draws, block_count);
    if (total && *combination_cap > *total) {
      throw std::invalid_argument("InflationConfig: combination cap exceeds M^K");
    }
  }
}

std::optional<std::uint64_t> checked_power(std::uint64_t base, std::size_t exponent) {
  std::uint64_t result = 1;
  for (std::size_t i = 0; i < exponent; ++i) {
    if (base != 0 && result > std::numeric_limits<std::uint64_t>::max() / base) {
      return std::nullopt;
    }
    result *= base;
  }
  return result;
}

CombinationCursor::CombinationCursor(std::size_t radix, std::size_t digits)
    : radix_{radix}, digits_(digits, 0) {
  if (radix_ == 0) {
    throw std::invalid_argument("CombinationCursor: radix must be >= 1");
  }
}

bool CombinationCursor::next() noexcept {
  for (std::size_t k = digits_.size(); k-- > 0;) {
    if (++digits_[k] < radix_) {
      return true;
    }
    digits_[k] = 0;
  }
  return false;
}

EvalCounter plain_factorized_stream(const FactorizedModel& model, const FactorizedProposal& proposal,
                                    std::size_t m, RandomSource& rng, const EmissionSink& sink) {
  if (m == 0) {
    throw std::invalid_argument("plain_factorized_sampler: m must be >= 1");
  }
  check_proposal_shape(model, proposal);
  EvalCounter evals;
  std::vector<double> point(model.point_dim());
  for (std::size_t r = 0; r < m; ++r) {
    const auto phi = proposal.global.sample(rng);
    require_dim(phi, model.global_dim(), "global block");
    double log_weight = model.global_log_prior(phi) + model.log_evidence_offset() -
                        checked_proposal_density(proposal.global, phi);
    double log_likelihood = 0.0;
    std::copy(phi.begin(), phi.end(), point.begin());
    for (std::size_t j = 0; j < model.block_count(); ++j) {
      const auto gamma = proposal.blocks[j].sample(rng);
      require_dim(gamma, model.block_dim(j), "block");
      const double lik = model.block_log_likelihood(j, phi, gamma);
      ++evals.block_likelihood_evals;
      log_likelihood += lik;
      log_weight += model.block_log_prior(j, gamma) + lik -
                    checked_proposal_density(proposal.blocks[j], gamma);
      std::copy(gamma.begin(), gamma.end(), point.begin() + model.block_offset(j));
    }
    sink(Emission{point, log_weight, log_likelihood});
    ++evals.joint_samples_emitted;
  }
  return evals;
}

SamplingResult plain_factorized_sampler(const FactorizedModel& model,
                                        const FactorizedProposal& proposal, std::size_t m,
                                        RandomSource& rng) {
  return collect([&](const EmissionSink& sink) {
    return plain_factorized_stream(model, proposal, m, rng, sink);
  });
}

EvalCounter inflate_stream(const FactorizedModel& model, const FactorizedProposal& proposal,
                           const InflationConfig& config, RandomSource& rng,
                           const EmissionSink& sink) {
  const std::size_t K = model.block_count();
  config.validate(K);
  check_proposal_shape(model, proposal);
  const auto per_draw = checked_power(config.inner_draws, K);
  std::uint64_t limit = per_draw.value_or(std::numeric_limits<std::uint64_t>::max());
  if (config.combination_cap) {
    limit = std::min(limit, *config.combination_cap);
  } else if (!per_draw || *per_draw > kMaxCombinations / config.outer_draws) {
    throw std::invalid_argument(
        "inflate: m * M^K exceeds the emission budget; set a combination cap");
  }

  EvalCounter evals;
  std::vector<BlockCache> caches(K);
  std::vector<double> point(model.point_dim());
  for (std::size_t r = 0; r < config.outer_draws; ++r) {
    const auto phi = proposal.global.sample(rng);
    require_dim(phi, model.global_dim(), "global block");
    const double base = model.global_log_prior(phi) + model.log_evidence_offset() -
                        checked_proposal_density(proposal.global, phi);
    for (std::size_t j = 0; j < K; ++j) {
      auto& values = caches[j].values;
      values.resize(config.inner_draws);
      for (auto& v : values) {
        v = proposal.blocks[j].sample(rng);
        require_dim(v, model.block_dim(j), "block");
      }
    }
    for (std::size_t j = 0; j < K; ++j) {
      score_block(model, proposal.blocks[j], j, phi, caches[j], evals);
    }
    emit_combinations(model, phi, base, caches, config.inner_draws, limit, point, evals, sink);
  }
  return evals;
}

SamplingResult inflate(const FactorizedModel& model, const FactorizedProposal& proposal,
                       const InflationConfig& config, RandomSource& rng) {
  return collect([&](const EmissionSink& sink) {
    return inflate_stream(model, proposal, config, rng, sink);
  });
}

EvalCounter grouped_inflate_stream(std::span<const std::vector<double>> points,
                                   std::size_t group_size, const FactorizedModel& model,
                                   const FactorizedProposal& proposal, const EmissionSink& sink) {
  if (group_size == 0 || points.size() % group_size != 0) {
    throw std::invalid_argument("grouped_inflate: " + std::to_string(points.size()) +
                                " points cannot be split into groups of " +
                                std::to_string(group_size));
  }
  if (model.global_dim() != 0) {
    throw std::invalid_argument("grouped_inflate: model must have an empty global block");
  }
  check_proposal_shape(model, proposal);
  const std::size_t K = model.block_count();
  const std::size_t groups = points.size() / group_size;
  const auto per_group = checked_power(group_size, K);
  if (groups > 0 && (!per_group || *per_group > kMaxCombinations / groups)) {
    throw std::invalid_argument("grouped_inflate: emission count exceeds the budget");
  }

  const std::span<const double> phi{};
  const double base = model.global_log_prior(phi) + model.log_evidence_offset() -
                      proposal.global.log_density(phi);
  EvalCounter evals;
  std::vector<BlockCache> caches(K);
  std::vector<double> point(model.point_dim());
  for (std::size_t g = 0; g < groups; ++g) {
    const auto group = points.subspan(g * group_size, group_size);
    for (std::size_t j = 0; j < K; ++j) {
      auto& values = caches[j].values;
      values.resize(group_size);
      for (std::size_t i = 0; i < group_size; ++i) {
        if (group[i].size() != model.point_dim()) {
          throw std::invalid_argument("grouped_inflate: point dimension mismatch");
        }
        const auto part = model.block_part(group[i], j);
        values[i].assign(part.begin(), part.end());
      }
      score_block(model, proposal.blocks[j], j, phi, caches[j], evals);
    }
    emit_combinations(model, phi, base, caches, group_size, *per_group, point, evals, sink);
  }
  return evals;
}

SamplingResult grouped_inflate(std::span<const std::vector<double>> points, std::size_t group_size,
                               const FactorizedModel& model, const FactorizedProposal& proposal) {
  return collect([&](const EmissionSink& sink) {
    return grouped_inflate_stream(points, group_size, model, proposal, sink);
  });
}

}  // namespace sinfl
