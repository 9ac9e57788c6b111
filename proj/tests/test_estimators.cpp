#include <sinfl/distributions.hpp>
#include <sinfl/estimators.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

namespace sinfl {
namespace {

SampleSet make_set(const std::vector<std::vector<double>>& points, const std::vector<double>& lw) {
  std::vector<WeightedSample> s;
  for (std::size_t i = 0; i < points.size(); ++i) s.push_back({points[i], lw[i]});
  return SampleSet{std::move(s)};
}

SampleSet random_set(RandomSource& rng, std::size_t n, double span) {
  std::vector<WeightedSample> s(n);
  for (auto& x : s) {
    x.point = {draw_normal(rng, 0.0, 2.0), draw_normal(rng, -1.0, 1.0)};
    x.log_weight = -span * rng.uniform();
  }
  return SampleSet{std::move(s)};
}

std::vector<SampleSet> split(const SampleSet& set, std::size_t k) {
  std::vector<std::vector<WeightedSample>> parts(k);
  for (std::size_t i = 0; i < set.size(); ++i) parts[i % k].push_back(set[i]);
  std::vector<SampleSet> out;
  for (auto& p : parts) out.emplace_back(std::move(p));
  return out;
}

TEST(SampleSet, RejectsNanAndPositiveInfinity) {
  EXPECT_THROW(make_set({{0.0}}, {NAN}), std::domain_error);
  EXPECT_THROW(make_set({{0.0}}, {INFINITY}), std::domain_error);
  EXPECT_NO_THROW(make_set({{0.0}}, {-INFINITY}));
}

TEST(SampleSet, CachedWeightSumMatchesDirectSum) {
  const auto set = make_set({{0}, {1}, {2}}, {std::log(0.5), std::log(2.0), std::log(1.5)});
  EXPECT_NEAR(set.log_weight_sum(), std::log(4.0), 1e-12);
}

TEST(StandardEstimate, UnitWeightsGiveSampleMean) {
  const auto set = make_set({{1.0}, {3.0}}, {0.0, 0.0});
  EXPECT_NEAR(standard_estimate(set, TestFunction::identity(1)).value[0], 2.0, 1e-14);
}

TEST(StandardEstimate, SingleSample) {
  const auto set = make_set({{3.0}}, {std::log(2.0)});
  EXPECT_NEAR(standard_estimate(set, TestFunction::identity(1)).value[0], 6.0, 1e-14);
}

TEST(StandardEstimate, MatchesNaiveSummation) {
  const std::vector<double> w{0.1, 2.0, 0.7, 1.3, 0.05, 3.2, 0.9, 1.1, 0.4, 0.25};
  const std::vector<double> h{-2.0, 1.5, 0.0, 3.3, -7.0, 0.2, 1.0, -0.5, 4.0, 2.5};
  std::vector<std::vector<double>> pts;
  std::vector<double> lw;
  double naive = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    pts.push_back({h[i]});
    lw.push_back(std::log(w[i]));
    naive += w[i] * h[i];
  }
  naive /= static_cast<double>(w.size());
  const auto est = standard_estimate(make_set(pts, lw), TestFunction::identity(1));
  EXPECT_NEAR(est.value[0], naive, 1e-13);
  EXPECT_EQ(est.n, 10u);
  EXPECT_EQ(est.kind, EstimateKind::standard);
}

TEST(StandardEstimate, EmptySetThrows) {
  EXPECT_THROW((void)standard_estimate(SampleSet{}, TestFunction::one()), std::invalid_argument);
  EXPECT_THROW((void)evidence_estimate(SampleSet{}), std::invalid_argument);
}

TEST(SelfNormalizedEstimate, EqualWeights) {
  const auto set = make_set({{0.0}, {4.0}}, {-3.0, -3.0});
  EXPECT_NEAR(self_normalized_estimate(set, TestFunction::identity(1)).value[0], 2.0, 1e-14);
}

TEST(SelfNormalizedEstimate, HandComputedWeights) {
  const auto set = make_set({{0.0}, {4.0}}, {std::log(1.0), std::log(3.0)});
  EXPECT_NEAR(self_normalized_estimate(set, TestFunction::identity(1)).value[0], 3.0, 1e-14);
}

TEST(SelfNormalizedEstimate, AllZeroWeightsIsDegenerate) {
  const auto set = make_set({{0.0}, {4.0}}, {-INFINITY, -INFINITY});
  EXPECT_THROW((void)self_normalized_estimate(set, TestFunction::identity(1)),
               DegenerateWeightsError);
}

TEST(SelfNormalizedEstimate, ShiftInvariance) {
  RandomSource rng{17};
  const SampleSet base = random_set(rng, 200, 30.0);
  const auto h = TestFunction::identity(2);
  const auto ref = self_normalized_estimate(base, h).value;
  for (const double c : {-1000.0, -1.0, 5.0, 300.0}) {
    std::vector<WeightedSample> shifted(base.samples().begin(), base.samples().end());
    for (auto& s : shifted) s.log_weight += c;
    const auto v = self_normalized_estimate(SampleSet{shifted}, h).value;
    EXPECT_NEAR(v[0], ref[0], 1e-12);
    EXPECT_NEAR(v[1], ref[1], 1e-12);
  }
}

TEST(SelfNormalizedEstimate, SignedComponentsFarBelowUnderflow) {
  const auto set = make_set({{-5.0}, {1.0}, {2.0}}, {-2000.0, -2000.0 + std::log(2.0), -2001.0});
  const double w0 = 1.0, w1 = 2.0, w2 = std::exp(-1.0);
  const double expected = (-5.0 * w0 + 1.0 * w1 + 2.0 * w2) / (w0 + w1 + w2);
  EXPECT_NEAR(self_normalized_estimate(set, TestFunction::identity(1)).value[0], expected, 1e-12);
}

TEST(Estimators, StandardEqualsSelfNormalizedWhenTargetIsProposal) {
  RandomSource rng{8};
  std::vector<WeightedSample> s(500);
  for (auto& x : s) x = {{draw_normal(rng, 0.0, 1.0), draw_normal(rng, 0.0, 1.0)}, 0.0};
  const SampleSet set{s};
  const auto h = TestFunction::identity(2);
  const auto a = standard_estimate(set, h).value;
  const auto b = self_normalized_estimate(set, h).value;
  EXPECT_NEAR(a[0], b[0], 1e-12);
  EXPECT_NEAR(a[1], b[1], 1e-12);
}

TEST(SnisVariance, ConstantTestFunctionGivesZero) {
  const auto set = make_set({{1.0}, {2.0}, {3.0}}, {0.0, -1.0, 2.0});
  const auto v = snis_variance_estimate(set, TestFunction::one());
  EXPECT_EQ(v[0], 0.0);
}

TEST(SnisVariance, SingleSampleGivesZero) {
  const auto set = make_set({{7.0, -2.0}}, {-4.0});
  const auto v = snis_variance_estimate(set, TestFunction::identity(2));
  EXPECT_NEAR(v[0], 0.0, 1e-15);
  EXPECT_NEAR(v[1], 0.0, 1e-15);
}

TEST(SnisVariance, MatchesTwoPassFormula) {
  const std::vector<double> w{0.5, 1.5, 3.0};
  const std::vector<double> h{-1.0, 2.0, 0.5};
  double ws = 0.0, mean = 0.0;
  for (std::size_t i = 0; i < 3; ++i) ws += w[i];
  for (std::size_t i = 0; i < 3; ++i) mean += w[i] * h[i] / ws;
  double var = 0.0;
  for (std::size_t i = 0; i < 3; ++i) var += (w[i] / ws) * (w[i] / ws) * (h[i] - mean) * (h[i] - mean);
  const auto set = make_set({{h[0]}, {h[1]}, {h[2]}}, {std::log(w[0]), std::log(w[1]), std::log(w[2])});
  EXPECT_NEAR(snis_variance_estimate(set, TestFunction::identity(1))[0], var, 1e-12);
}

TEST(Evidence, UnitWeightsGiveZero) {
  const auto set = make_set({{1.0}, {2.0}}, {0.0, 0.0});
  EXPECT_EQ(evidence_estimate(set).value[0], 0.0);
}

TEST(Evidence, ConstantLogWeights) {
  const auto set = make_set({{1.0}, {2.0}, {3.0}}, {-1000.0, -1000.0, -1000.0});
  const auto e = evidence_estimate(set);
  EXPECT_NEAR(e.value[0], -1000.0, 1e-12);
  EXPECT_EQ(e.kind, EstimateKind::evidence);
}

TEST(Evidence, MixedWeights) {
  const auto set = make_set({{0.0}, {0.0}}, {std::log(2.0), std::log(4.0)});
  EXPECT_NEAR(evidence_estimate(set).value[0], std::log(3.0), 1e-14);
}

TEST(Combine, SingleSetIsIdentity) {
  const auto a = make_set({{1.0}, {2.0}}, {0.1, -0.3});
  const auto c = combine(std::span{&a, 1});
  ASSERT_EQ(c.size(), a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(c[i].point, a[i].point);
    EXPECT_EQ(c[i].log_weight, a[i].log_weight);
  }
  EXPECT_EQ(c.log_weight_sum(), a.log_weight_sum());
}

TEST(Combine, CardinalityAndWeightSum) {
  RandomSource rng{2};
  const std::vector<SampleSet> sets{random_set(rng, 13, 40.0), random_set(rng, 29, 400.0)};
  const auto c = combine(sets);
  EXPECT_EQ(c.size(), 42u);
  EXPECT_NEAR(c.log_weight_sum(),
              log_add_exp(sets[0].log_weight_sum(), sets[1].log_weight_sum()), 1e-12);
}

TEST(Decomposition, SinglePartIsExact) {
  RandomSource rng{3};
  const SampleSet s = random_set(rng, 50, 100.0);
  for (const auto kind : {EstimateKind::standard, EstimateKind::self_normalized}) {
    EXPECT_EQ(decomposition_residual(std::span{&s, 1}, TestFunction::identity(2), kind), 0.0);
  }
}

// Both sides evaluated here with explicit linear-space sums.
TEST(Decomposition, TwoFiveSampleSets) {
  RandomSource rng{21};
  const std::vector<SampleSet> sets{random_set(rng, 5, 4.0), random_set(rng, 5, 4.0)};
  const auto h = TestFunction::identity(2);
  for (const auto kind : {EstimateKind::standard, EstimateKind::self_normalized}) {
    EXPECT_LT(decomposition_residual(sets, h, kind), 1e-10);
  }
  double wsum[2] = {0, 0};
  double whsum[2][2] = {{0, 0}, {0, 0}};
  for (int i = 0; i < 2; ++i) {
    for (const auto& s : sets[i].samples()) {
      const double w = std::exp(s.log_weight);
      wsum[i] += w;
      whsum[i][0] += w * s.point[0];
      whsum[i][1] += w * s.point[1];
    }
  }
  const auto joint = self_normalized_estimate(combine(sets), h).value;
  for (int k = 0; k < 2; ++k) {
    const double convex = (wsum[0] / (wsum[0] + wsum[1])) * (whsum[0][k] / wsum[0]) +
                          (wsum[1] / (wsum[0] + wsum[1])) * (whsum[1][k] / wsum[1]);
    EXPECT_NEAR(joint[k], convex, 1e-12);
  }
}

TEST(Decomposition, ConvexErrorBoundSideCheck) {
  RandomSource rng{22};
  const std::vector<SampleSet> sets{random_set(rng, 5, 4.0), random_set(rng, 5, 4.0)};
  const std::vector<double> reference{0.3, -0.7};
  const auto h = TestFunction::identity(2);
  for (const auto kind : {EstimateKind::standard, EstimateKind::self_normalized}) {
    for (const auto which : {Norm::l1, Norm::l2, Norm::linf}) {
      const auto b = convex_error_bound(sets, h, kind, reference, which);
      EXPECT_GE(b.weighted_errors, b.combined_error - 1e-12);
      EXPECT_GE(b.combined_error, 0.0);
    }
  }
}

TEST(Decomposition, RandomizedPartitionsProperty) {
  RandomSource rng{1234};
  const auto h = TestFunction::identity(2);
  for (int c = 0; c < 120; ++c) {
    const std::size_t n = 1 + rng.index(400);
    const SampleSet set = random_set(rng, n, 600.0 * rng.uniform());
    const auto parts = split(set, 1 + rng.index(std::min<std::size_t>(n, 10)));
    const std::vector<double> reference{draw_normal(rng, 0, 1), draw_normal(rng, 0, 1)};
    for (const auto kind : {EstimateKind::standard, EstimateKind::self_normalized}) {
      ASSERT_LT(decomposition_residual(parts, h, kind), 1e-10) << "case " << c;
      for (const auto which : {Norm::l1, Norm::l2, Norm::linf}) {
        const auto b = convex_error_bound(parts, h, kind, reference, which);
        ASSERT_GE(b.weighted_errors - b.combined_error, -1e-12) << "case " << c;
      }
    }
  }
}

TEST(Norm, ThreeNorms) {
  const std::vector<double> v{3.0, -4.0};
  EXPECT_DOUBLE_EQ(norm(v, Norm::l1), 7.0);
  EXPECT_DOUBLE_EQ(norm(v, Norm::l2), 5.0);
  EXPECT_DOUBLE_EQ(norm(v, Norm::linf), 4.0);
}

TEST(Accumulator, MergeMatchesSequential) {
  RandomSource rng{30};
  const SampleSet set = random_set(rng, 300, 50.0);
  const auto h = TestFunction::identity(2);
  WeightedAccumulator all{h}, left{h}, right{h};
  for (std::size_t i = 0; i < set.size(); ++i) {
    all.add(set[i].point, set[i].log_weight);
    (i < 120 ? left : right).add(set[i].point, set[i].log_weight);
  }
  left.merge(right);
  EXPECT_EQ(left.count(), all.count());
  const auto a = all.self_normalized().value;
  const auto b = left.self_normalized().value;
  EXPECT_NEAR(a[0], b[0], 1e-12);
  EXPECT_NEAR(a[1], b[1], 1e-12);
  EXPECT_NEAR(all.evidence().value[0], left.evidence().value[0], 1e-12);
}

TEST(Resample, SingleSample) {
  RandomSource rng{1};
  const auto set = make_set({{4.0, 2.0}}, {-10.0});
  for (const auto& p : resample(set, 50, rng)) EXPECT_EQ(p, (std::vector{4.0, 2.0}));
}

TEST(Resample, ZeroWeightNeverDrawn) {
  RandomSource rng{1};
  const auto set = make_set({{0.0}, {1.0}}, {0.0, -INFINITY});
  for (const auto i : resample_indices(set, 10'000, rng)) ASSERT_EQ(i, 0u);
}

TEST(Resample, BinomialFrequency) {
  RandomSource rng{77};
  const auto set = make_set({{0.0}, {1.0}}, {std::log(1.0), std::log(3.0)});
  const auto idx = resample_indices(set, 100'000, rng);
  const double second = static_cast<double>(std::count(idx.begin(), idx.end(), 1u)) / 100'000.0;
  EXPECT_NEAR(second, 0.75, 0.01);
}

TEST(Resample, AllZeroWeightsIsDegenerate) {
  RandomSource rng{1};
  const auto set = make_set({{0.0}, {1.0}}, {-INFINITY, -INFINITY});
  EXPECT_THROW((void)resample(set, 3, rng), DegenerateWeightsError);
}

TEST(Resample, WeightsFarBelowUnderflow) {
  RandomSource rng{5};
  const auto set = make_set({{0.0}, {1.0}}, {-1000.0, -1000.0 + std::log(9.0)});
  const auto idx = resample_indices(set, 100'000, rng);
  EXPECT_NEAR(static_cast<double>(std::count(idx.begin(), idx.end(), 1u)) / 1e5, 0.9, 0.01);
}

}  // namespace
}  // namespace sinfl
