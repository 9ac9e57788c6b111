#include <sinfl/distributions.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <functional>
#include <numbers>
#include <stdexcept>

namespace sinfl {
namespace {

constexpr double kPi = std::numbers::pi;

double midpoint_1d(const std::function<double(double)>& f, double lo, double hi, std::size_t n) {
  const double h = (hi - lo) / static_cast<double>(n);
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) sum += f(lo + (static_cast<double>(i) + 0.5) * h);
  return sum * h;
}

double midpoint_2d(const std::function<double(double, double)>& f, double lo, double hi,
                   std::size_t n) {
  const double h = (hi - lo) / static_cast<double>(n);
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = lo + (static_cast<double>(i) + 0.5) * h;
    for (std::size_t j = 0; j < n; ++j) sum += f(x, lo + (static_cast<double>(j) + 0.5) * h);
  }
  return sum * h * h;
}

double mass_1d(const DensitySpec& spec, double lo, double hi, std::size_t n = 400'000) {
  return midpoint_1d([&](double x) { return std::exp(log_density(spec, std::vector{x})); }, lo, hi,
                     n);
}

// Written out from the textbook formula; shares no code with the library.
double t_log_pdf_oracle(double x, double loc, double scale, double nu) {
  const double z = (x - loc) / scale;
  return std::lgamma((nu + 1) / 2) - std::lgamma(nu / 2) - 0.5 * std::log(nu * kPi) -
         std::log(scale) - (nu + 1) / 2 * std::log1p(z * z / nu);
}

double inverse_gamma_oracle(double x, double a, double b) {
  return a * std::log(b) - std::lgamma(a) - (a + 1) * std::log(x) - b / x;
}

TEST(Distributions, GaussianEmpiricalMean) {
  RandomSource rng{11};
  const DensitySpec spec = DiagGaussian{{5.0, 5.0}, {2.0, 2.0}};
  double m0 = 0.0, m1 = 0.0;
  constexpr int n = 100'000;
  for (int i = 0; i < n; ++i) {
    const auto x = sample(spec, rng);
    m0 += x[0];
    m1 += x[1];
  }
  EXPECT_NEAR(m0 / n, 5.0, 0.05);
  EXPECT_NEAR(m1 / n, 5.0, 0.05);
}

TEST(Distributions, DegenerateCategoricalAlwaysFirst) {
  RandomSource rng{3};
  const DensitySpec spec = Categorical{{1.0, 0.0}};
  for (int i = 0; i < 1000; ++i) ASSERT_EQ(sample(spec, rng)[0], 0.0);
}

TEST(Distributions, UniformDirichletOnSimplex) {
  RandomSource rng{5};
  const DensitySpec spec = Dirichlet{{1.0, 1.0}};
  double mean = 0.0;
  constexpr int n = 100'000;
  for (int i = 0; i < n; ++i) {
    const auto x = sample(spec, rng);
    ASSERT_EQ(x[0] + x[1], 1.0);
    mean += x[0];
  }
  EXPECT_NEAR(mean / n, 0.5, 0.01);
}

TEST(Distributions, SmallConcentrationDirichletStaysInsideSimplex) {
  RandomSource rng{17};
  const DensitySpec spec = Dirichlet{{0.01, 0.05, 0.1}};
  double mean = 0.0;
  constexpr int n = 100'000;
  for (int i = 0; i < n; ++i) {
    const auto x = sample(spec, rng);
    ASSERT_TRUE(std::isfinite(log_density(spec, x))) << "draw " << i;
    mean += x[1];
  }
  EXPECT_NEAR(mean / n, 0.05 / 0.16, 0.01);
}

TEST(Distributions, SmallShapeDrawsHaveFiniteDensity) {
  RandomSource rng{19};
  const DensitySpec gamma = Gamma{0.01, 1.0};
  const DensitySpec iw = ScalarInverseWishart{1.0, 0.02};
  for (int i = 0; i < 20'000; ++i) {
    ASSERT_TRUE(std::isfinite(log_density(gamma, sample(gamma, rng)))) << "gamma draw " << i;
    ASSERT_TRUE(std::isfinite(log_density(iw, sample(iw, rng)))) << "inverse draw " << i;
  }
}

TEST(Distributions, StandardNormalAtMode) {
  const DensitySpec spec = DiagGaussian{{0.0, 0.0}, {1.0, 1.0}};
  EXPECT_NEAR(log_density(spec, std::vector{0.0, 0.0}), -std::log(2 * kPi), 1e-14);
}

TEST(Distributions, ExponentialAtOne) {
  const DensitySpec spec = Gamma{1.0, 1.0};
  EXPECT_NEAR(log_density(spec, std::vector{1.0}), -1.0, 1e-14);
  EXPECT_EQ(log_density(spec, std::vector{-1.0}), -INFINITY);
}

TEST(Distributions, ProductStudentTIsSumOfUnivariates) {
  const double s = std::sqrt(2.0);
  const DensitySpec spec = ProductStudentT{{0.0, 0.0}, {s, s}, 20.0};
  EXPECT_NEAR(log_density(spec, std::vector{0.0, 0.0}), 2 * t_log_pdf_oracle(0.0, 0.0, s, 20.0),
              1e-12);
  EXPECT_NEAR(log_density(spec, std::vector{1.5, -0.25}),
              t_log_pdf_oracle(1.5, 0.0, s, 20.0) + t_log_pdf_oracle(-0.25, 0.0, s, 20.0), 1e-12);
}

TEST(Distributions, OutsideSupportIsNegativeInfinity) {
  EXPECT_EQ(log_density(ScalarInverseWishart{5.0, 1.0}, std::vector{-0.5}), -INFINITY);
  EXPECT_EQ(log_density(Dirichlet{{1.0, 1.0}}, std::vector{0.7, 0.7}), -INFINITY);
  EXPECT_EQ(log_density(Categorical{{0.5, 0.5}}, std::vector{2.0}), -INFINITY);
  EXPECT_EQ(log_density(Categorical{{0.5, 0.5}}, std::vector{0.5}), -INFINITY);
}

TEST(Distributions, DimensionMismatchThrows) {
  EXPECT_THROW((void)log_density(DiagGaussian{{0.0, 0.0}, {1.0, 1.0}}, std::vector{0.0}),
               std::invalid_argument);
  EXPECT_THROW((void)log_density(Gamma{1.0, 1.0}, std::vector{1.0, 2.0}), std::invalid_argument);
}

class InvalidSpec : public ::testing::TestWithParam<DensitySpec> {};

TEST_P(InvalidSpec, RejectedByValidateAndSample) {
  RandomSource rng{1};
  EXPECT_THROW(validate(GetParam()), std::domain_error);
  EXPECT_THROW((void)sample(GetParam(), rng), std::domain_error);
}

INSTANTIATE_TEST_SUITE_P(
    Distributions, InvalidSpec,
    ::testing::Values(DensitySpec{DiagGaussian{{0.0}, {0.0}}}, DensitySpec{StudentT{0.0, -1.0, 3.0}},
                      DensitySpec{StudentT{0.0, 1.0, 0.0}},
                      DensitySpec{ProductStudentT{{0.0}, {1.0}, -2.0}},
                      DensitySpec{Dirichlet{{1.0, 0.0}}}, DensitySpec{Categorical{{0.5, 0.6}}},
                      DensitySpec{Categorical{{-0.1, 1.1}}}, DensitySpec{Gamma{0.0, 1.0}},
                      DensitySpec{ScalarInverseWishart{5.0, 0.0}}));

TEST(Distributions, OneDimensionalDensitiesIntegrateToOne) {
  EXPECT_NEAR(mass_1d(DiagGaussian{{0.3}, {2.0}}, -30.0, 30.0), 1.0, 1e-3);
  EXPECT_NEAR(mass_1d(StudentT{1.0, 0.7, 5.0}, -400.0, 400.0), 1.0, 1e-3);
  EXPECT_NEAR(mass_1d(Gamma{2.5, 1.5}, 0.0, 80.0), 1.0, 1e-3);
  EXPECT_NEAR(mass_1d(Gamma{1.0, 1.0}, 0.0, 50.0), 1.0, 1e-3);
  EXPECT_NEAR(mass_1d(ScalarInverseWishart{5.0, 8.0}, 0.0, 1000.0, 2'000'000), 1.0, 1e-3);
}

TEST(Distributions, CategoricalMassSumsToOne) {
  const DensitySpec spec = Categorical{{0.2, 0.5, 0.3}};
  double total = 0.0;
  for (double k : {0.0, 1.0, 2.0}) total += std::exp(log_density(spec, std::vector{k}));
  EXPECT_NEAR(total, 1.0, 1e-12);
}

TEST(Distributions, TwoDimensionalDensitiesIntegrateToOne) {
  const DensitySpec gauss = DiagGaussian{{0.5, -0.5}, {1.5, 0.8}};
  EXPECT_NEAR(midpoint_2d([&](double x, double y) {
                return std::exp(log_density(gauss, std::vector{x, y}));
              }, -15.0, 15.0, 1500),
              1.0, 1e-3);
  const DensitySpec product_t = ProductStudentT{{0.0, 1.0}, {1.0, 0.5}, 6.0};
  EXPECT_NEAR(midpoint_2d([&](double x, double y) {
                return std::exp(log_density(product_t, std::vector{x, y}));
              }, -150.0, 150.0, 6000),
              1.0, 1e-3);
  // Dirichlet over the 2-simplex, parametrized by its first two coordinates.
  const DensitySpec dir = Dirichlet{{2.0, 3.0, 1.5}};
  EXPECT_NEAR(midpoint_2d([&](double x, double y) {
                if (x + y >= 1.0) return 0.0;
                return std::exp(log_density(dir, std::vector{x, y, 1.0 - x - y}));
              }, 0.0, 1.0, 2000),
              1.0, 1e-3);
}

TEST(Distributions, ScalarInverseWishartIsInverseGamma) {
  for (const double sigma2 : {0.5, 5.0, 12.0}) {
    for (const double dof : {1.0, 3.0, 7.5}) {
      for (const double x : {0.01, 0.3, 1.0, 4.0, 50.0}) {
        EXPECT_NEAR(log_density(ScalarInverseWishart{sigma2, dof}, std::vector{x}),
                    inverse_gamma_oracle(x, dof / 2, sigma2 / 2), 1e-12)
            << "sigma2=" << sigma2 << " dof=" << dof << " x=" << x;
      }
    }
  }
}

TEST(Distributions, SameSeedSameBytes) {
  const std::vector<DensitySpec> specs{
      DiagGaussian{{0.0, 1.0}, {1.0, 2.0}}, StudentT{0.0, 1.0, 3.0},
      ProductStudentT{{0.0, 0.0}, {1.0, 1.0}, 20.0}, Dirichlet{{0.5, 2.0, 1.0}},
      Categorical{{0.1, 0.9}}, Gamma{0.3, 2.0}, ScalarInverseWishart{5.0, 1.0}};
  RandomSource a{2024};
  RandomSource b{2024};
  for (int rep = 0; rep < 200; ++rep) {
    for (const auto& spec : specs) {
      const auto x = sample(spec, a);
      const auto y = sample(spec, b);
      ASSERT_EQ(x.size(), y.size());
      ASSERT_EQ(std::memcmp(x.data(), y.data(), x.size() * sizeof(double)), 0);
    }
  }
}

TEST(RandomSource, DerivedStreamsAreKeyedByPath) {
  const RandomSource root{9};
  RandomSource a = root.derive({1, 2});
  RandomSource b = root.derive({1, 2});
  RandomSource c = root.derive({2, 1});
  RandomSource d = root.derive({1, 2, 0});
  EXPECT_EQ(a(), b());
  EXPECT_NE(a.seed(), c.seed());
  EXPECT_NE(a.seed(), d.seed());
  EXPECT_NE(root.seed(), a.seed());
}

TEST(RandomSource, UniformAndIndexRanges) {
  RandomSource rng{4};
  for (int i = 0; i < 10'000; ++i) {
    const double u = rng.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    ASSERT_LT(rng.index(7), 7u);
  }
}

}  // namespace
}  // namespace sinfl
