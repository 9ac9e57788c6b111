#include <sinfl/experiments.hpp>

#include <benchmark/benchmark.h>

namespace {

using namespace sinfl;

// Plain IS over the Gaussian toy at a fixed block-evaluation budget.
void BM_PlainToy(benchmark::State& state) {
  const auto model = gaussian_toy_model();
  const auto q = gaussian_toy_proposal({0.0, 0.0});
  const auto n = static_cast<std::size_t>(state.range(0));
  RandomSource rng{1};
  for (auto _ : state) {
    WeightedAccumulator acc{TestFunction::identity(2)};
    plain_factorized_stream(model, q, n, rng,
                            [&](const Emission& e) { acc.add(e.point, e.log_weight); });
    benchmark::DoNotOptimize(acc.self_normalized());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_PlainToy)->Arg(2'000)->Arg(20'000);

// Grouped inflation of the same number of proposal draws (groups of 100).
void BM_GroupedInflateToy(benchmark::State& state) {
  const auto model = gaussian_toy_model();
  const auto q = gaussian_toy_proposal({0.0, 0.0});
  const auto n = static_cast<std::size_t>(state.range(0));
  RandomSource rng{1};
  std::vector<std::vector<double>> points;
  plain_factorized_stream(model, q, n, rng, [&](const Emission& e) {
    points.emplace_back(e.point.begin(), e.point.end());
  });
  std::uint64_t emitted = 0;
  for (auto _ : state) {
    WeightedAccumulator acc{TestFunction::identity(2)};
    emitted = grouped_inflate_stream(points, 100, model, q, [&](const Emission& e) {
                acc.add(e.point, e.log_weight);
              }).joint_samples_emitted;
    benchmark::DoNotOptimize(acc.self_normalized());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(emitted));
}
BENCHMARK(BM_GroupedInflateToy)->Arg(2'000)->Arg(20'000)->Unit(benchmark::kMillisecond);

// Inflation on the Dirichlet mixture, where block likelihoods dominate.
void BM_DmmInflate(benchmark::State& state) {
  const DmmSpec spec;
  const auto data = make_synthetic({});
  const auto obs = std::make_shared<const std::vector<double>>(data.observations);
  const auto model = dmm_model(spec, obs);
  const auto q = dmm_prior_proposal(spec, obs->size());
  const auto M = static_cast<std::size_t>(state.range(0));
  RandomSource rng{2};
  for (auto _ : state) {
    const auto evals = inflate_stream(model, q, {2000 / M, M, std::nullopt}, rng,
                                      [](const Emission& e) { benchmark::DoNotOptimize(e.log_weight); });
    benchmark::DoNotOptimize(evals);
  }
}
BENCHMARK(BM_DmmInflate)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);

void BM_Resample(benchmark::State& state) {
  RandomSource rng{3};
  std::vector<WeightedSample> s(static_cast<std::size_t>(state.range(0)));
  for (auto& x : s) x = {{rng.uniform()}, -600.0 * rng.uniform()};
  const SampleSet set{s};
  for (auto _ : state) benchmark::DoNotOptimize(resample_indices(set, set.size(), rng));
}
BENCHMARK(BM_Resample)->Arg(2'000)->Arg(20'000);

}  // namespace

BENCHMARK_MAIN();
