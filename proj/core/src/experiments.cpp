#include <sinfl/experiments.hpp>

#include "parallel.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

namespace sinfl {
namespace {

constexpr std::uint64_t kDataStream = 0xda7a;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::uint64_t method_stream(Method m) { return m == Method::plain ? 1 : 2; }

}  // namespace

MetricSeries aggregate(const std::string& experiment, std::span<const Replicate> replicates,
                       std::span<const std::size_t> budgets, std::span<const double> truth,
                       double log_evidence_truth) {
  MetricSeries series;
  for (const auto budget : budgets) {
    for (const auto method : {Method::plain, Method::inflated}) {
      std::vector<const Replicate*> group;
      for (const auto& r : replicates) {
        if (r.budget == budget && r.method == method) group.push_back(&r);
      }
      if (group.empty()) continue;
      const double count = static_cast<double>(group.size());

      double evidence_mse = std::numeric_limits<double>::quiet_NaN();
      if (!std::isnan(log_evidence_truth)) {
        evidence_mse = 0.0;
        for (const auto* r : group) {
          const double d = r->log_evidence - log_evidence_truth;
          evidence_mse += d * d;
        }
        evidence_mse /= count;
      }
      double wall = 0.0;
      for (const auto* r : group) wall += r->seconds;

      for (std::size_t k = 0; k < truth.size(); ++k) {
        double mean = 0.0;
        for (const auto* r : group) mean += r->estimate.at(k);
        mean /= count;
        double variance = 0.0;
        double mse = 0.0;
        for (const auto* r : group) {
          const double e = r->estimate[k];
          variance += (e - mean) * (e - mean);
          mse += (e - truth[k]) * (e - truth[k]);
        }
        MetricRow row;
        row.experiment = experiment;
        row.method = to_string(method);
        row.budget = budget;
        row.replications = group.size();
        row.component = k;
        row.squared_bias = (mean - truth[k]) * (mean - truth[k]);
        row.variance = variance / count;
        row.mse = mse / count;
        row.mean_estimate = mean;
        row.log_evidence_mse = evidence_mse;
        row.wall_seconds = wall;
        series.rows.push_back(std::move(row));
      }
    }
  }
  return series;
}

GaussResult run_gauss(const ExperimentConfig& config) {
  if (config.experiment != ExperimentKind::gauss_centered &&
      config.experiment != ExperimentKind::gauss_offcenter) {
    throw std::invalid_argument("run_gauss: not a gauss experiment");
  }
  config.validate();

  const double offset = config.matched_proposal ? 0.0 : kToyLogEvidence;
  const FactorizedModel model = gaussian_toy_model(offset);
  const std::array<double, 2> center =
      config.experiment == ExperimentKind::gauss_offcenter ? std::array{5.0, 5.0}
                                                           : std::array{0.0, 0.0};
  const FactorizedProposal proposal = config.matched_proposal
                                          ? gaussian_toy_matched_proposal()
                                          : gaussian_toy_proposal(center, config.proposal_dof);
  const TestFunction h = TestFunction::identity(2);

  std::vector<std::vector<Replicate>> per_replication(config.replications);
  detail::parallel_for(config.replications, config.threads, [&](std::size_t r) {
    auto& out = per_replication[r];
    for (std::size_t b = 0; b < config.budgets.size(); ++b) {
      const std::size_t n = config.budgets[b];
      RandomSource rng = RandomSource{config.seed}.derive({r, b});

      std::vector<std::vector<double>> points;
      points.reserve(n);
      WeightedAccumulator plain{h};
      auto start = Clock::now();
      const EvalCounter plain_evals =
          plain_factorized_stream(model, proposal, n, rng, [&](const Emission& e) {
            points.emplace_back(e.point.begin(), e.point.end());
            plain.add(e.point, e.log_weight);
          });
      if (config.runs(Method::plain)) {
        out.push_back({n, r, Method::plain, plain.self_normalized().value,
                       plain.evidence().value[0], plain_evals.joint_samples_emitted,
                       plain_evals.block_likelihood_evals, seconds_since(start)});
      }

      if (config.runs(Method::inflated)) {
        WeightedAccumulator inflated{h};
        start = Clock::now();
        const EvalCounter evals = grouped_inflate_stream(
            points, config.group_size, model, proposal,
            [&](const Emission& e) { inflated.add(e.point, e.log_weight); });
        out.push_back({n, r, Method::inflated, inflated.self_normalized().value,
                       inflated.evidence().value[0], evals.joint_samples_emitted,
                       evals.block_likelihood_evals, seconds_since(start)});
      }
    }
  });

  GaussResult result;
  for (auto& reps : per_replication) {
    for (auto& rep : reps) result.replicates.push_back(std::move(rep));
  }
  const std::array<double, 2> truth{0.0, 0.0};
  result.series =
      aggregate(to_string(config.experiment), result.replicates, config.budgets, truth, offset);
  return result;
}

DmmResult run_dmm(const ExperimentConfig& config) {
  if (config.experiment != ExperimentKind::dmm_gauss &&
      config.experiment != ExperimentKind::dmm_t) {
    throw std::invalid_argument("run_dmm: not a dmm experiment");
  }
  config.validate();

  DmmSpec spec;
  spec.family = config.experiment == ExperimentKind::dmm_gauss ? ComponentFamily::gaussian
                                                               : ComponentFamily::student_t;
  std::array<double, 2> truth = config.true_means;
  std::sort(truth.begin(), truth.end());

  struct Slot {
    std::vector<Replicate> replicates;
    std::vector<DmmRun> runs;
  };
  std::vector<Slot> slots(config.replications);

  detail::parallel_for(config.replications, config.threads, [&](std::size_t r) {
    SyntheticConfig data_config;
    data_config.kind = spec.family;
    data_config.means = config.true_means;
    data_config.seed = RandomSource{config.seed}.derive({r, kDataStream}).seed();
    data_config.size = config.data_size;
    data_config.dof = config.data_dof;
    const SyntheticDataset data = make_synthetic(data_config);
    const auto observations = std::make_shared<const std::vector<double>>(data.observations);

    const FactorizedModel model = dmm_model(spec, observations);
    const FactorizedProposal init = dmm_prior_proposal(spec, observations->size());
    const TestFunction h = dmm_sorted_means(spec, observations->size());

    for (std::size_t b = 0; b < config.budgets.size(); ++b) {
      for (const auto method : {Method::plain, Method::inflated}) {
        if (!config.runs(method)) continue;
        PmcConfig pmc;
        pmc.population_size = config.budgets[b];
        pmc.generations = config.generations;
        pmc.kernel = dmm_kernel(spec, observations, config.bandwidths, config.label_proposal);
        pmc.use_inflation = method == Method::inflated;
        pmc.inflation_draws = config.inflation_draws;

        const auto start = Clock::now();
        const auto generations =
            run_pmc(model, init, pmc, h,
                    RandomSource{config.seed}.derive({r, b, method_stream(method)}));
        const double seconds = seconds_since(start);

        DmmRun run;
        run.replication = r;
        run.budget = config.budgets[b];
        run.method = method;
        run.trace = trace_metrics(generations, truth);
        run.true_means = truth;
        std::uint64_t total_evals = 0;
        std::uint64_t total_samples = 0;
        for (const auto& g : generations) {
          run.block_evals.push_back(g.evals.block_likelihood_evals);
          run.samples.push_back(g.evals.joint_samples_emitted);
          total_evals += g.evals.block_likelihood_evals;
          total_samples += g.evals.joint_samples_emitted;
        }
        const auto& last = generations.back();
        run.final_estimate = last.generation_estimate.value;

        slots[r].replicates.push_back({run.budget, r, method, run.final_estimate,
                                       evidence_estimate(last.sample_set).value[0], total_samples,
                                       total_evals, seconds});
        slots[r].runs.push_back(std::move(run));
      }
    }
  });

  DmmResult result;
  for (auto& slot : slots) {
    for (auto& rep : slot.replicates) result.replicates.push_back(std::move(rep));
    for (auto& run : slot.runs) result.runs.push_back(std::move(run));
  }
  result.series = aggregate(to_string(config.experiment), result.replicates, config.budgets, truth,
                            std::numeric_limits<double>::quiet_NaN());
  return result;
}

}  // namespace sinfl
