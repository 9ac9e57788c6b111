#include <sinfl/experiments.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace sinfl {
namespace {

constexpr std::size_t kMaxSetSize = 1000;
constexpr std::size_t kMaxParts = 10;
constexpr double kMaxLogSpan = 600.0;

struct Instance {
  std::vector<SampleSet> parts;
  std::vector<double> reference;
};

/// Random weighted set of 2-D points split into k random non-empty parts.
Instance random_partition(RandomSource& rng, std::size_t k_limit, bool extremes) {
  const std::size_t n = 1 + rng.index(kMaxSetSize);
  const double span = kMaxLogSpan * rng.uniform();
  std::vector<WeightedSample> samples(n);
  for (auto& s : samples) {
    s.point = {draw_normal(rng, 0.0, 3.0), draw_normal(rng, 1.0, 0.5)};
    s.log_weight = extremes ? (rng.uniform() < 0.5 ? 0.0 : -kMaxLogSpan) : -span * rng.uniform();
  }
  const std::size_t k = 1 + rng.index(std::min(n, k_limit));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);

  std::vector<std::size_t> cuts(n - 1);
  std::iota(cuts.begin(), cuts.end(), 1);
  std::shuffle(cuts.begin(), cuts.end(), rng);
  cuts.resize(k - 1);
  std::sort(cuts.begin(), cuts.end());
  cuts.push_back(n);

  Instance inst;
  std::size_t begin = 0;
  for (const auto end : cuts) {
    std::vector<WeightedSample> part;
    for (std::size_t i = begin; i < end; ++i) part.push_back(samples[order[i]]);
    inst.parts.emplace_back(std::move(part));
    begin = end;
  }
  inst.reference = {draw_normal(rng, 0.0, 1.0), draw_normal(rng, 0.0, 1.0)};
  return inst;
}

struct CacheInstance {
  FactorizedModel model;
  FactorizedProposal proposal;
  InflationConfig config;
};

/// Small random model with a 1-D global block, K <= 3 blocks, <= 10 data points.
CacheInstance random_cache_instance(RandomSource& rng) {
  const std::size_t K = 1 + rng.index(3);
  const std::size_t N = rng.index(11);
  auto data = std::make_shared<std::vector<std::pair<double, std::size_t>>>();
  for (std::size_t i = 0; i < N; ++i) {
    data->emplace_back(draw_normal(rng, 0.0, 2.0), rng.index(K));
  }
  std::vector<FactorizedModel::Block> blocks;
  FactorizedProposal proposal{BlockProposal::from_density(StudentT{0.3, 1.5, 4.0}), {}};
  for (std::size_t j = 0; j < K; ++j) {
    const std::size_t dim = 1 + rng.index(2);
    blocks.push_back(
        {dim,
         [](std::span<const double> g) {
           double lp = 0.0;
           for (double v : g) lp += normal_log_pdf(v, 0.0, 1.0);
           return lp;
         },
         [data, j](std::span<const double> phi, std::span<const double> g) {
           double ll = 0.0;
           for (const auto& [d, owner] : *data) {
             if (owner == j) ll += normal_log_pdf(d, phi[0] + g[0], 1.0 + g.back() * g.back());
           }
           return ll;
         }});
    DiagGaussian q;
    for (std::size_t k = 0; k < dim; ++k) {
      q.mean.push_back(draw_normal(rng, 0.0, 1.0));
      q.variance.push_back(0.5 + rng.uniform());
    }
    proposal.blocks.push_back(BlockProposal::from_density(q));
  }
  const double offset = -20.0 * rng.uniform();
  FactorizedModel model{1, [](std::span<const double> phi) { return normal_log_pdf(phi[0], 0.0, 1.0); },
                        std::move(blocks), offset};
  InflationConfig config{1 + rng.index(3), 1 + rng.index(3), std::nullopt};
  return {std::move(model), std::move(proposal), config};
}

void record(TheoremCheck& check, double value, bool violated) {
  ++check.cases;
  check.worst = std::max(check.worst, value);
  if (violated) ++check.violations;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

bool TheoremReport::passed() const noexcept {
  return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.passed(); });
}

TheoremReport run_theorem_suite(const ExperimentConfig& config) {
  const RandomSource root{config.seed};
  const TestFunction h = TestFunction::identity(2);

  TheoremCheck standard{"decomposition-standard", 0, 0, 0.0, 1e-10};
  TheoremCheck normalized{"decomposition-self-normalized", 0, 0, 0.0, 1e-10};
  TheoremCheck bound{"convex-error-bound", 0, 0, 0.0, 1e-12};
  TheoremCheck single{"single-part-exact", 0, 0, 0.0, 0.0};
  TheoremCheck extremes{"extreme-log-weights", 0, 0, 0.0, 1e-8};

  RandomSource rng = root.derive({1});
  for (std::size_t c = 0; c < config.theorem_cases; ++c) {
    const Instance inst = random_partition(rng, kMaxParts, false);
    for (const auto kind : {EstimateKind::standard, EstimateKind::self_normalized}) {
      auto& check = kind == EstimateKind::standard ? standard : normalized;
      const double r = decomposition_residual(inst.parts, h, kind);
      record(check, r, !(r < check.threshold));
      for (const auto which : {Norm::l1, Norm::l2, Norm::linf}) {
        const auto b = convex_error_bound(inst.parts, h, kind, inst.reference, which);
        const double excess = b.combined_error - b.weighted_errors;
        record(bound, std::max(excess, 0.0), excess > bound.threshold || b.combined_error < 0.0);
      }
    }
    const SampleSet whole = combine(inst.parts);
    for (const auto kind : {EstimateKind::standard, EstimateKind::self_normalized}) {
      const double r = decomposition_residual(std::span{&whole, 1}, h, kind);
      record(single, r, r != 0.0);
    }
    const Instance adversarial = random_partition(rng, kMaxParts, true);
    for (const auto kind : {EstimateKind::standard, EstimateKind::self_normalized}) {
      const double r = decomposition_residual(adversarial.parts, h, kind);
      record(extremes, r, !(r < extremes.threshold));
    }
  }

  TheoremCheck cache{"inflate-cache-oracle", 0, 0, 0.0, 1e-12};
  TheoremCheck accounting{"inflate-eval-accounting", 0, 0, 0.0, 0.0};
  TheoremCheck partition{"inflate-combination-partition", 0, 0, 0.0, 1e-10};
  RandomSource cache_rng = root.derive({2});
  for (std::size_t c = 0; c < config.cache_cases; ++c) {
    const CacheInstance inst = random_cache_instance(cache_rng);
    RandomSource draw = cache_rng.derive({c});
    const auto [set, evals] = inflate(inst.model, inst.proposal, inst.config, draw);

    double worst = 0.0;
    for (const auto& s : set.samples()) {
      const double oracle =
          inst.model.log_density(s.point) - inst.proposal.log_density(inst.model, s.point);
      worst = std::max(worst, std::abs(oracle - s.log_weight));
    }
    record(cache, worst, !(worst <= cache.threshold));

    const std::uint64_t K = inst.model.block_count();
    const std::uint64_t expected = inst.config.outer_draws * inst.config.inner_draws * K;
    const std::uint64_t emitted =
        inst.config.outer_draws * *checked_power(inst.config.inner_draws, K);
    const double mismatch = std::abs(static_cast<double>(evals.block_likelihood_evals) -
                                     static_cast<double>(expected)) +
                            std::abs(static_cast<double>(evals.joint_samples_emitted) -
                                     static_cast<double>(emitted));
    record(accounting, mismatch, mismatch != 0.0);

    // Samples sharing a combination index across phi draws form one iid set.
    const std::size_t per_draw = static_cast<std::size_t>(emitted / inst.config.outer_draws);
    std::vector<std::vector<WeightedSample>> groups(per_draw);
    for (std::size_t i = 0; i < set.size(); ++i) groups[i % per_draw].push_back(set[i]);
    std::vector<SampleSet> parts;
    for (auto& g : groups) parts.emplace_back(std::move(g));
    const TestFunction first = TestFunction::coordinate(0);
    for (const auto kind : {EstimateKind::standard, EstimateKind::self_normalized}) {
      const double r = decomposition_residual(parts, first, kind);
      record(partition, r, !(r < partition.threshold));
    }
  }

  TheoremCheck median_check{"consistency-median-error-decreasing", 0, 0, 0.0, 0.0};
  TheoremCheck rate_check{"consistency-mse-decade-factor", 0, 0, 0.0, 0.0};
  if (config.budgets.size() >= 2) {
    ExperimentConfig gauss = config;
    gauss.experiment = ExperimentKind::gauss_centered;
    gauss.method = Method::both;
    gauss.matched_proposal = false;
    const GaussResult result = run_gauss(gauss);

    std::vector<double> medians;
    std::vector<double> mses;
    for (const auto budget : config.budgets) {
      std::vector<double> errors;
      for (const auto& r : result.replicates) {
        if (r.budget == budget && r.method == Method::inflated) {
          errors.push_back(norm(r.estimate, Norm::l2));
        }
      }
      medians.push_back(median(errors));
      double mse = 0.0;
      for (const auto& row : result.series.rows) {
        if (row.budget == budget && row.method == "plain") mse += row.mse;
      }
      mses.push_back(mse);
    }
    for (std::size_t b = 1; b < medians.size(); ++b) {
      record(median_check, medians[b] - medians[b - 1], !(medians[b] < medians[b - 1]));
      const double decades = std::log10(static_cast<double>(config.budgets[b]) /
                                        static_cast<double>(config.budgets[b - 1]));
      const double factor = std::pow(mses[b - 1] / mses[b], 1.0 / decades);
      ++rate_check.cases;
      if (rate_check.cases == 1 ||
          std::abs(std::log10(factor)) - 1.0 > std::abs(std::log10(rate_check.worst)) - 1.0) {
        rate_check.worst = factor;
      }
      if (!(factor >= 5.0 && factor <= 20.0)) ++rate_check.violations;
    }
  }

  return {{standard, normalized, bound, single, extremes, cache, accounting, partition,
           median_check, rate_check}};
}

}  // namespace sinfl
