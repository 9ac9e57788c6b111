#include <sinfl/pmc.hpp>

#include <algorithm>
#include <cmath>
#include <string>

namespace sinfl {

void KernelBandwidths::validate() const {
  if (!(mean_scale > 0.0) || !(mean_dof > 0.0) || !(positive_cv > 0.0) ||
      !(simplex_concentration > 0.0)) {
    throw std::invalid_argument("kernel bandwidths must be strictly positive");
  }
}

Gamma gamma_kernel(double center, double cv) {
  const double shape = 1.0 / (cv * cv);
  return Gamma{shape, center / shape};
}

ScalarInverseWishart inverse_wishart_kernel(double center, double cv) {
  // inverse-gamma(a, b): mean b / (a - 1), cv 1 / sqrt(a - 2)
  const double a = 2.0 + 1.0 / (cv * cv);
  const double b = center * (a - 1.0);
  return ScalarInverseWishart{2.0 * b, 2.0 * a};
}

Dirichlet dirichlet_kernel(std::span<const double> center, double concentration) {
  Dirichlet d;
  d.concentration.reserve(center.size());
  for (double c : center) {
    d.concentration.push_back(std::max(concentration * c, 1e-2));
  }
  return d;
}

void PmcConfig::validate() const {
  if (population_size == 0 || generations == 0) {
    throw std::invalid_argument("PmcConfig: population size and generations must be >= 1");
  }
  if (generations > 1 && !kernel) {
    throw std::invalid_argument("PmcConfig: a kernel is required for more than one generation");
  }
  if (use_inflation) {
    if (inflation_draws == 0 || population_size % inflation_draws != 0) {
      throw std::invalid_argument(
          "PmcConfig: population size must be a multiple of the inflation draw count");
    }
  }
}

std::size_t PmcConfig::outer_draws() const {
  return use_inflation ? population_size / inflation_draws : population_size;
}

std::vector<Generation> run_pmc(const FactorizedModel& model, const FactorizedProposal& init,
                                const PmcConfig& config, const TestFunction& h,
                                const RandomSource& rng) {
  config.validate();
  const std::size_t outer = config.outer_draws();

  std::vector<Generation> generations;
  generations.reserve(config.generations);
  for (std::size_t t = 1; t <= config.generations; ++t) {
    RandomSource draw_rng = rng.derive({t, 0});
    std::vector<WeightedSample> samples;
    samples.reserve(config.use_inflation ? outer * config.inflation_draws * config.inflation_draws
                                         : outer);
    double best = kNegInfinity;
    const EmissionSink sink = [&](const Emission& e) {
      samples.push_back({std::vector<double>(e.point.begin(), e.point.end()), e.log_weight});
      if (e.log_weight > kNegInfinity) {
        best = std::max(best, e.log_likelihood);
      }
    };
    auto draw = [&](const FactorizedProposal& proposal, std::size_t count) {
      if (config.use_inflation) {
        return inflate_stream(model, proposal, {count, config.inflation_draws, std::nullopt},
                              draw_rng, sink);
      }
      return plain_factorized_stream(model, proposal, count, draw_rng, sink);
    };

    EvalCounter evals;
    if (t == 1) {
      evals = draw(init, outer);
    } else {
      const auto& centers = generations.back().resampled_points;
      for (std::size_t i = 0; i < outer; ++i) {
        const auto& center = centers[draw_rng.index(centers.size())];
        evals += draw(config.kernel(center), 1);
      }
    }

    Generation gen;
    gen.index = t;
    gen.sample_set = SampleSet{std::move(samples)};
    if (gen.sample_set.log_weight_sum() == kNegInfinity) {
      throw PmcError(t, "PMC generation " + std::to_string(t) + " has only zero weights");
    }
    RandomSource resample_rng = rng.derive({t, 1});
    gen.resampled_points = resample(gen.sample_set, config.population_size, resample_rng);
    gen.generation_estimate = self_normalized_estimate(gen.sample_set, h);
    gen.best_log_likelihood = best;
    gen.evals = evals;
    generations.push_back(std::move(gen));
  }
  return generations;
}

GenerationTrace trace_metrics(std::span<const Generation> generations,
                              std::span<const double> truth) {
  if (generations.empty()) {
    throw std::invalid_argument("trace_metrics: no generations");
  }
  GenerationTrace trace;
  std::vector<double> diff;
  for (const auto& gen : generations) {
    trace.best_log_likelihood.push_back(gen.best_log_likelihood);

    const auto& value = gen.generation_estimate.value;
    if (value.size() != truth.size()) {
      throw std::invalid_argument("trace_metrics: truth dimension mismatch");
    }
    diff.resize(value.size());
    for (std::size_t k = 0; k < value.size(); ++k) diff[k] = value[k] - truth[k];
    trace.estimate_error.push_back(norm(diff, Norm::l2));

    const auto& set = gen.sample_set;
    double sum_sq = 0.0;
    for (const auto& s : set.samples()) {
      const double w = std::exp(s.log_weight - set.log_weight_sum());
      sum_sq += w * w;
    }
    trace.weight_cv2.push_back(static_cast<double>(set.size()) * sum_sq - 1.0);
  }
  return trace;
}

}  // namespace sinfl
