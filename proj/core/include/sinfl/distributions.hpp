#ifndef SINFL_DISTRIBUTIONS_HPP
#define SINFL_DISTRIBUTIONS_HPP

#include <sinfl/random.hpp>

#include <cstddef>
#include <span>
#include <variant>
#include <vector>

namespace sinfl {

/// Independent normals, one per coordinate.
struct DiagGaussian {
  std::vector<double> mean;
  std::vector<double> variance;
};

/// Univariate location-scale Student-t.
struct StudentT {
  double location = 0.0;
  double scale = 1.0;
  double dof = 1.0;
};

/// Independent univariate Student-t per coordinate with a shared dof.
struct ProductStudentT {
  std::vector<double> location;
  std::vector<double> scale;
  double dof = 1.0;
};

struct Dirichlet {
  std::vector<double> concentration;
};

/// Draws are returned as a one-element vector holding the 0-based index.
struct Categorical {
  std::vector<double> probabilities;
};

/// Shape-scale parametrization: mean = shape * scale.
struct Gamma {
  double shape = 1.0;
  double scale = 1.0;
};

/// Inverse-Wishart on a 1x1 matrix, i.e. inverse-gamma with
/// shape dof/2 and scale sigma2/2.
struct ScalarInverseWishart {
  double sigma2 = 1.0;
  double dof = 1.0;
};

using DensitySpec = std::variant<DiagGaussian, StudentT, ProductStudentT, Dirichlet,
                                  Categorical, Gamma, ScalarInverseWishart>;

/// Throws std::domain_error when a parameter is outside its domain.
void validate(const DensitySpec& spec);

[[nodiscard]] std::size_t dimension(const DensitySpec& spec);

/// One draw from spec. Validates first.
[[nodiscard]] std::vector<double> sample(const DensitySpec& spec, RandomSource& rng);

/// Natural-log density; -infinity outside the support.
/// Throws std::invalid_argument on a dimension mismatch.
[[nodiscard]] double log_density(const DensitySpec& spec, std::span<const double> x);

// Scalar kernels shared by the models' hot paths.

double normal_log_pdf(double x, double mean, double variance);
double student_t_log_pdf(double x, double location, double scale, double dof);
double gamma_log_pdf(double x, double shape, double scale);
double inverse_gamma_log_pdf(double x, double shape, double scale);

double draw_normal(RandomSource& rng, double mean, double sd);
double draw_student_t(RandomSource& rng, double location, double scale, double dof);
double draw_gamma(RandomSource& rng, double shape, double scale);

}  // namespace sinfl

#endif  // SINFL_DISTRIBUTIONS_HPP
