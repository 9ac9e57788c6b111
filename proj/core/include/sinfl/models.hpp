#ifndef SINFL_MODELS_HPP
#define SINFL_MODELS_HPP

#include <sinfl/factorized.hpp>
#include <sinfl/pmc.hpp>

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace sinfl {

// ---------------------------------------------------------------------------
// Gaussian toy: f = N(0, 2I) in 2-D, one block per coordinate, no global block.

inline constexpr double kToyLogEvidence = -1000.0;
inline constexpr double kToyVariance = 2.0;

[[nodiscard]] FactorizedModel gaussian_toy_model(double log_evidence_offset = kToyLogEvidence);

/// Product Student-t proposal with scale sqrt(2) per coordinate.
[[nodiscard]] FactorizedProposal gaussian_toy_proposal(std::array<double, 2> center,
                                                       double dof = 20.0);
/// N(0, 2) per coordinate, i.e. the toy target itself.
[[nodiscard]] FactorizedProposal gaussian_toy_matched_proposal();

// ---------------------------------------------------------------------------
// Dirichlet mixture models with K fixed components.
//
// Joint layout: [phi1 (K mixing weights), phi2 (N labels, 0-based, stored
// as doubles), gamma_1, ..., gamma_K]. A Gaussian component is [mean]
// with unit variance; a Student-t component is [mean, variance, dof]
// where variance is the squared scale.

enum class ComponentFamily { gaussian, student_t };

[[nodiscard]] std::string to_string(ComponentFamily family);
[[nodiscard]] ComponentFamily parse_component_family(const std::string& text);

struct DmmSpec {
  ComponentFamily family = ComponentFamily::gaussian;
  std::size_t components = 2;
  /// Dirichlet prior on the mixing weights; size must equal `components`.
  std::vector<double> mixing_concentration{1.0, 1.0};
  /// Mean prior: N(location, scale^2) for Gaussian, T(location, scale, dof) for Student-t.
  double mean_prior_location = 0.0;
  double mean_prior_scale = 1.0;
  double mean_prior_dof = 1.0;
  /// Scalar inverse-Wishart prior on the component variance (Student-t only).
  double variance_prior_sigma2 = 5.0;
  double variance_prior_dof = 1.0;
  /// Gamma(shape, scale) prior on the component dof (Student-t only).
  double dof_prior_shape = 1.0;
  double dof_prior_scale = 1.0;

  void validate() const;
  [[nodiscard]] std::size_t block_dim() const noexcept {
    return family == ComponentFamily::gaussian ? 1 : 3;
  }
  [[nodiscard]] std::size_t global_dim(std::size_t observations) const noexcept {
    return components + observations;
  }
};

using Observations = std::shared_ptr<const std::vector<double>>;

/// Log density of one observation under component parameters `gamma`.
[[nodiscard]] double dmm_component_log_pdf(const DmmSpec& spec, double x,
                                           std::span<const double> gamma);

/// Factorized DMM posterior for the given data. Block j's likelihood sums
/// over the observations whose label in phi equals j; an empty component
/// contributes 0.
[[nodiscard]] FactorizedModel dmm_model(const DmmSpec& spec, Observations data);

/// Joint point from explicit mixing weights, labels and component parameters.
[[nodiscard]] std::vector<double> dmm_point(std::span<const double> weights,
                                            std::span<const std::size_t> labels,
                                            std::span<const std::vector<double>> components);

/// Generation-1 proposal: every latent drawn from its prior.
[[nodiscard]] FactorizedProposal dmm_prior_proposal(const DmmSpec& spec, std::size_t observations);

/// How PMC re-proposes the labels around a center.
enum class LabelProposal {
  /// Cat(phi1') for every observation.
  prior,
  /// Cat proportional to phi1'_j * p(d_i | gamma_j of the center).
  responsibility,
};

[[nodiscard]] std::string to_string(LabelProposal mode);
[[nodiscard]] LabelProposal parse_label_proposal(const std::string& text);

/// Markov kernels for the DMM: Dirichlet on the mixing weights, labels per
/// `labels`, Gaussian (Gaussian family) or Student-t (Student-t family)
/// kernels on means, inverse-Wishart kernels on variances and Gamma
/// kernels on dof.
[[nodiscard]] CenteredKernel dmm_kernel(const DmmSpec& spec, Observations data,
                                        KernelBandwidths bandwidths, LabelProposal labels);

/// h(x) = component means in ascending order; invariant under relabeling.
[[nodiscard]] TestFunction dmm_sorted_means(const DmmSpec& spec, std::size_t observations);

// ---------------------------------------------------------------------------
// Synthetic data.

struct SyntheticDataset {
  ComponentFamily kind = ComponentFamily::gaussian;
  std::vector<double> observations;
  std::array<double, 2> means{-2.0, 2.0};
  std::uint64_t seed = 0;
  /// Student-t degrees of freedom of the generating components.
  double dof = 30.0;
  /// Probability of the first component.
  double mixing = 0.5;
};

struct SyntheticConfig {
  ComponentFamily kind = ComponentFamily::gaussian;
  std::array<double, 2> means{-2.0, 2.0};
  std::uint64_t seed = 0;
  std::size_t size = 100;
  double dof = 30.0;
  double mixing = 0.5;
};

/// Two-component mixture with unit variance (unit scale for Student-t).
[[nodiscard]] SyntheticDataset make_synthetic(const SyntheticConfig& config);

/// One observation per line after '#' header lines recording the metadata.
void write_dataset(std::ostream& out, const SyntheticDataset& data);
void write_dataset(const std::filesystem::path& path, const SyntheticDataset& data);
[[nodiscard]] SyntheticDataset read_dataset(std::istream& in);
[[nodiscard]] SyntheticDataset read_dataset(const std::filesystem::path& path);

}  // namespace sinfl

#endif  // SINFL_MODELS_HPP
