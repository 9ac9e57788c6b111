#ifndef SINFL_PMC_HPP
#define SINFL_PMC_HPP

#include <sinfl/distributions.hpp>
#include <sinfl/estimators.hpp>
#include <sinfl/factorized.hpp>
#include <sinfl/random.hpp>

#include <cstddef>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

namespace sinfl {

/// Builds the proposal for one draw, centered on a point of the previous
/// generation's resampled population.
using CenteredKernel = std::function<FactorizedProposal(std::span<const double> center)>;

/// Markov kernel widths. Defaults are configuration, not fitted values.
struct KernelBandwidths {
  /// Scale of location kernels for unconstrained means.
  double mean_scale = 0.25;
  /// Degrees of freedom for Student-t location kernels.
  double mean_dof = 5.0;
  /// Coefficient of variation of Gamma / inverse-gamma kernels on positive parameters.
  double positive_cv = 0.3;
  /// Dirichlet kernel concentration: alpha = concentration * center.
  double simplex_concentration = 100.0;

  void validate() const;
};

/// Gamma with mean `center` and coefficient of variation `cv`.
[[nodiscard]] Gamma gamma_kernel(double center, double cv);
/// Scalar inverse-Wishart with mean `center` and coefficient of variation `cv`.
[[nodiscard]] ScalarInverseWishart inverse_wishart_kernel(double center, double cv);
/// Dirichlet with mean `center` (floored away from zero).
[[nodiscard]] Dirichlet dirichlet_kernel(std::span<const double> center, double concentration);

struct PmcConfig {
  std::size_t population_size = 2000;
  std::size_t generations = 10;
  CenteredKernel kernel;
  bool use_inflation = false;
  /// M: kernel draws per block for each outer draw when inflating.
  std::size_t inflation_draws = 2;

  void validate() const;
  /// Outer draws per generation; p / M when inflating so both runs spend
  /// p * K block likelihood evaluations.
  [[nodiscard]] std::size_t outer_draws() const;
};

struct Generation {
  std::size_t index = 0;
  SampleSet sample_set;
  std::vector<std::vector<double>> resampled_points;
  Estimate generation_estimate;
  double best_log_likelihood = kNegInfinity;
  EvalCounter evals;
};

/// Raised when a whole generation carries zero weight.
class PmcError : public std::runtime_error {
 public:
  PmcError(std::size_t generation, const std::string& what)
      : std::runtime_error(what), generation_{generation} {}
  [[nodiscard]] std::size_t generation() const noexcept { return generation_; }

 private:
  std::size_t generation_;
};

/// Population Monte Carlo. Generation 1 samples from `init`; later draws
/// pick a center uniformly from the previous resampled population and
/// sample from kernel(center), weighting by that draw's own proposal.
/// Generation t uses streams rng.derive({t, 0}) for draws and
/// rng.derive({t, 1}) for resampling.
[[nodiscard]] std::vector<Generation> run_pmc(const FactorizedModel& model,
                                              const FactorizedProposal& init,
                                              const PmcConfig& config, const TestFunction& h,
                                              const RandomSource& rng);

struct GenerationTrace {
  std::vector<double> best_log_likelihood;
  /// L2 distance of the generation estimate from the truth.
  std::vector<double> estimate_error;
  /// Squared coefficient of variation of the normalized weights.
  std::vector<double> weight_cv2;

  [[nodiscard]] std::size_t size() const noexcept { return best_log_likelihood.size(); }
};

[[nodiscard]] GenerationTrace trace_metrics(std::span<const Generation> generations,
                                            std::span<const double> truth);

}  // namespace sinfl

#endif  // SINFL_PMC_HPP
