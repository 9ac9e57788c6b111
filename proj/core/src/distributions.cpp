#include <sinfl/distributions.hpp>
#include <sinfl/log_space.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <string>

namespace sinfl {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kLogTwoPi = 1.8378770664093454836;
constexpr double kTiny = std::numeric_limits<double>::min();
constexpr double kHuge = std::numeric_limits<double>::max();

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw std::domain_error(std::string{what} + " must be finite and strictly positive");
  }
}

void require_finite(double v, const char* what) {
  if (!std::isfinite(v)) {
    throw std::domain_error(std::string{what} + " must be finite");
  }
}

void require_dim(std::span<const double> x, std::size_t dim) {
  if (x.size() != dim) {
    throw std::invalid_argument("log_density: expected dimension " + std::to_string(dim) +
                                ", got " + std::to_string(x.size()));
  }
}

void validate_impl(const DiagGaussian& d) {
  if (d.mean.empty() || d.mean.size() != d.variance.size()) {
    throw std::domain_error("diag-gaussian: mean and variance must be non-empty and equal length");
  }
  for (double m : d.mean) require_finite(m, "diag-gaussian mean");
  for (double v : d.variance) require_positive(v, "diag-gaussian variance");
}

void validate_impl(const StudentT& d) {
  require_finite(d.location, "student-t location");
  require_positive(d.scale, "student-t scale");
  require_positive(d.dof, "student-t dof");
}

void validate_impl(const ProductStudentT& d) {
  if (d.location.empty() || d.location.size() != d.scale.size()) {
    throw std::domain_error("product-student-t: location and scale must be non-empty and equal length");
  }
  for (double m : d.location) require_finite(m, "product-student-t location");
  for (double s : d.scale) require_positive(s, "product-student-t scale");
  require_positive(d.dof, "product-student-t dof");
}

void validate_impl(const Dirichlet& d) {
  if (d.concentration.size() < 2) {
    throw std::domain_error("dirichlet: need at least two components");
  }
  for (double a : d.concentration) require_positive(a, "dirichlet concentration");
}

void validate_impl(const Categorical& d) {
  if (d.probabilities.empty()) {
    throw std::domain_error("categorical: empty probability vector");
  }
  double total = 0.0;
  for (double p : d.probabilities) {
    if (!(p >= 0.0) || !std::isfinite(p)) {
      throw std::domain_error("categorical: probabilities must be nonnegative");
    }
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw std::domain_error("categorical: probabilities must sum to 1");
  }
}

void validate_impl(const Gamma& d) {
  require_positive(d.shape, "gamma shape");
  require_positive(d.scale, "gamma scale");
}

void validate_impl(const ScalarInverseWishart& d) {
  require_positive(d.sigma2, "inverse-wishart sigma2");
  require_positive(d.dof, "inverse-wishart dof");
}

}  // namespace

double normal_log_pdf(double x, double mean, double variance) {
  const double z = x - mean;
  return -0.5 * (kLogTwoPi + std::log(variance) + z * z / variance);
}

double student_t_log_pdf(double x, double location, double scale, double dof) {
  const double z = (x - location) / scale;
  return std::lgamma(0.5 * (dof + 1.0)) - std::lgamma(0.5 * dof) -
         0.5 * std::log(dof * std::numbers::pi) - std::log(scale) -
         0.5 * (dof + 1.0) * std::log1p(z * z / dof);
}

double gamma_log_pdf(double x, double shape, double scale) {
  if (!(x > 0.0)) {
    return kNegInf;
  }
  return (shape - 1.0) * std::log(x) - x / scale - std::lgamma(shape) - shape * std::log(scale);
}

double inverse_gamma_log_pdf(double x, double shape, double scale) {
  if (!(x > 0.0)) {
    return kNegInf;
  }
  return shape * std::log(scale) - std::lgamma(shape) - (shape + 1.0) * std::log(x) - scale / x;
}

double draw_normal(RandomSource& rng, double mean, double sd) {
  return std::normal_distribution<double>{mean, sd}(rng);
}

double draw_student_t(RandomSource& rng, double location, double scale, double dof) {
  return location + scale * std::student_t_distribution<double>{dof}(rng);
}

static double log_gamma_draw(RandomSource& rng, double shape) {
  if (shape >= 1.0) {
    return std::log(std::gamma_distribution<double>{shape, 1.0}(rng));
  }
  // G(a) = G(a + 1) * U^(1/a)
  const double g = std::gamma_distribution<double>{shape + 1.0, 1.0}(rng);
  const double u = 1.0 - rng.uniform();
  return std::log(g) + std::log(u) / shape;
}

double draw_gamma(RandomSource& rng, double shape, double scale) {
  // Kept strictly positive so a draw never sits outside its own support.
  return std::max(std::gamma_distribution<double>{shape, scale}(rng), kTiny);
}

void validate(const DensitySpec& spec) {
  std::visit([](const auto& d) { validate_impl(d); }, spec);
}

std::size_t dimension(const DensitySpec& spec) {
  return std::visit(overloaded{
                        [](const DiagGaussian& d) { return d.mean.size(); },
                        [](const StudentT&) { return std::size_t{1}; },
                        [](const ProductStudentT& d) { return d.location.size(); },
                        [](const Dirichlet& d) { return d.concentration.size(); },
                        [](const Categorical&) { return std::size_t{1}; },
                        [](const Gamma&) { return std::size_t{1}; },
                        [](const ScalarInverseWishart&) { return std::size_t{1}; },
                    },
                    spec);
}

std::vector<double> sample(const DensitySpec& spec, RandomSource& rng) {
  validate(spec);
  return std::visit(
      overloaded{
          [&](const DiagGaussian& d) {
            std::vector<double> x(d.mean.size());
            for (std::size_t i = 0; i < x.size(); ++i) {
              x[i] = draw_normal(rng, d.mean[i], std::sqrt(d.variance[i]));
            }
            return x;
          },
          [&](const StudentT& d) {
            return std::vector<double>{draw_student_t(rng, d.location, d.scale, d.dof)};
          },
          [&](const ProductStudentT& d) {
            std::vector<double> x(d.location.size());
            for (std::size_t i = 0; i < x.size(); ++i) {
              x[i] = draw_student_t(rng, d.location[i], d.scale[i], d.dof);
            }
            return x;
          },
          [&](const Dirichlet& d) {
            // Gamma draws in log space: small concentrations underflow otherwise
            // and land on the boundary, where the density is zero.
            std::vector<double> x(d.concentration.size());
            LogSumExp total;
            for (std::size_t i = 0; i < x.size(); ++i) {
              x[i] = log_gamma_draw(rng, d.concentration[i]);
              total.add(x[i]);
            }
            const double log_total = total.value();
            double head = 0.0;
            for (std::size_t i = 0; i + 1 < x.size(); ++i) {
              x[i] = std::max(std::exp(x[i] - log_total), kTiny);
              head += x[i];
            }
            x.back() = std::max(1.0 - head, kTiny);
            return x;
          },
          [&](const Categorical& d) {
            std::discrete_distribution<std::size_t> pick(d.probabilities.begin(),
                                                         d.probabilities.end());
            return std::vector<double>{static_cast<double>(pick(rng))};
          },
          [&](const Gamma& d) { return std::vector<double>{draw_gamma(rng, d.shape, d.scale)}; },
          [&](const ScalarInverseWishart& d) {
            const double log_g = log_gamma_draw(rng, 0.5 * d.dof);
            const double v = std::exp(std::log(0.5 * d.sigma2) - log_g);
            return std::vector<double>{std::clamp(v, kTiny, kHuge)};
          },
      },
      spec);
}

double log_density(const DensitySpec& spec, std::span<const double> x) {
  validate(spec);
  require_dim(x, dimension(spec));
  return std::visit(
      overloaded{
          [&](const DiagGaussian& d) {
            double lp = 0.0;
            for (std::size_t i = 0; i < x.size(); ++i) {
              lp += normal_log_pdf(x[i], d.mean[i], d.variance[i]);
            }
            return lp;
          },
          [&](const StudentT& d) { return student_t_log_pdf(x[0], d.location, d.scale, d.dof); },
          [&](const ProductStudentT& d) {
            double lp = 0.0;
            for (std::size_t i = 0; i < x.size(); ++i) {
              lp += student_t_log_pdf(x[i], d.location[i], d.scale[i], d.dof);
            }
            return lp;
          },
          [&](const Dirichlet& d) {
            double total = 0.0;
            for (double xi : x) {
              if (!(xi > 0.0)) return kNegInf;
              total += xi;
            }
            if (std::abs(total - 1.0) > 1e-9) return kNegInf;
            const double a0 = std::accumulate(d.concentration.begin(), d.concentration.end(), 0.0);
            double lp = std::lgamma(a0);
            for (std::size_t i = 0; i < x.size(); ++i) {
              lp += (d.concentration[i] - 1.0) * std::log(x[i]) - std::lgamma(d.concentration[i]);
            }
            return lp;
          },
          [&](const Categorical& d) {
            const double v = x[0];
            if (!(v >= 0.0) || v != std::floor(v) ||
                v >= static_cast<double>(d.probabilities.size())) {
              return kNegInf;
            }
            return std::log(d.probabilities[static_cast<std::size_t>(v)]);
          },
          [&](const Gamma& d) { return gamma_log_pdf(x[0], d.shape, d.scale); },
          [&](const ScalarInverseWishart& d) {
            return inverse_gamma_log_pdf(x[0], 0.5 * d.dof, 0.5 * d.sigma2);
          },
      },
      spec);
}

}  // namespace sinfl
