#ifndef SINFL_EXPERIMENTS_HPP
#define SINFL_EXPERIMENTS_HPP

#include <sinfl/models.hpp>
#include <sinfl/pmc.hpp>

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace sinfl {

enum class ExperimentKind { gauss_centered, gauss_offcenter, dmm_gauss, dmm_t, theorem_suite };
enum class Method { plain, inflated, both };
enum class OutputFormat { csv, json };

[[nodiscard]] std::string to_string(ExperimentKind kind);
[[nodiscard]] std::string to_string(Method method);
[[nodiscard]] std::string to_string(OutputFormat format);
[[nodiscard]] ExperimentKind parse_experiment_kind(const std::string& text);
[[nodiscard]] Method parse_method(const std::string& text);
[[nodiscard]] OutputFormat parse_output_format(const std::string& text);

struct ExperimentConfig {
  ExperimentKind experiment = ExperimentKind::gauss_centered;
  /// Sample counts (gauss) or PMC population sizes (dmm); strictly increasing.
  std::vector<std::size_t> budgets{200, 2'000, 20'000};
  std::size_t replications = 50;
  std::uint64_t seed = 0;
  Method method = Method::both;
  /// Worker threads for replications. Results do not depend on it.
  std::size_t threads = 1;

  // Gaussian toy.
  std::size_t group_size = 100;
  double proposal_dof = 20.0;
  /// Sanity mode: q = f exactly and no evidence offset, so every weight is 1.
  bool matched_proposal = false;

  // Dirichlet mixtures.
  std::size_t generations = 10;
  std::size_t inflation_draws = 2;
  KernelBandwidths bandwidths;
  LabelProposal label_proposal = LabelProposal::responsibility;
  std::size_t data_size = 100;
  std::array<double, 2> true_means{-2.0, 2.0};
  double data_dof = 30.0;

  // Theorem suite.
  std::size_t theorem_cases = 500;
  std::size_t cache_cases = 200;

  std::filesystem::path output;
  OutputFormat format = OutputFormat::csv;

  /// Throws std::invalid_argument on an inconsistent config.
  void validate() const;
  [[nodiscard]] bool runs(Method m) const noexcept { return method == Method::both || method == m; }
};

/// Defaults for an experiment (budgets differ between gauss and dmm).
[[nodiscard]] ExperimentConfig default_config(ExperimentKind kind);

/// Applies a flat key-value config file on top of `config`.
///
///   # comment
///   schema_version = 1
///   experiment = "gauss-centered"
///   budgets = [200, 2000, 20000]
///   replications = 50
///   matched_proposal = false
///
/// The first setting must be schema_version. Values are integers, reals,
/// booleans, double-quoted strings or bracketed lists of numbers; each key
/// has exactly one accepted type.
void apply_config(std::istream& in, ExperimentConfig& config);
void apply_config(const std::filesystem::path& path, ExperimentConfig& config);

inline constexpr int kConfigSchemaVersion = 1;

/// One row per (budget, method, component).
struct MetricRow {
  std::string experiment;
  std::string method;
  std::uint64_t budget = 0;
  std::uint64_t replications = 0;
  std::uint64_t component = 0;
  double squared_bias = 0.0;
  double variance = 0.0;
  double mse = 0.0;
  double mean_estimate = 0.0;
  double log_evidence_mse = 0.0;
  double wall_seconds = 0.0;
};

struct MetricSeries {
  std::vector<MetricRow> rows;
};

/// One estimator run inside a replication.
struct Replicate {
  std::size_t budget = 0;
  std::size_t replication = 0;
  Method method = Method::plain;
  std::vector<double> estimate;
  double log_evidence = 0.0;
  std::uint64_t samples = 0;
  std::uint64_t block_evals = 0;
  double seconds = 0.0;
};

/// Squared bias / variance / MSE across replications per (budget, method,
/// component). Variance uses the 1/R normalization so that
/// mse = variance + squared_bias. A NaN evidence truth yields NaN
/// log_evidence_mse.
[[nodiscard]] MetricSeries aggregate(const std::string& experiment,
                                     std::span<const Replicate> replicates,
                                     std::span<const std::size_t> budgets,
                                     std::span<const double> truth, double log_evidence_truth);

struct GaussResult {
  MetricSeries series;
  std::vector<Replicate> replicates;
};

/// Gaussian toy: per replication and budget n, draws n proposal points and
/// estimates E_f[x] and log F with plain self-normalized IS and with
/// grouped inflation of the same points.
[[nodiscard]] GaussResult run_gauss(const ExperimentConfig& config);

struct DmmRun {
  std::size_t replication = 0;
  std::size_t budget = 0;
  Method method = Method::plain;
  GenerationTrace trace;
  std::vector<std::uint64_t> block_evals;
  std::vector<std::uint64_t> samples;
  std::vector<double> final_estimate;
  std::array<double, 2> true_means{};
};

struct DmmResult {
  MetricSeries series;
  std::vector<Replicate> replicates;
  std::vector<DmmRun> runs;
};

/// Dirichlet mixture models: per replication a fresh synthetic dataset,
/// then PMC with and without inflation at equal block-likelihood budgets.
[[nodiscard]] DmmResult run_dmm(const ExperimentConfig& config);

struct TheoremCheck {
  std::string name;
  std::size_t cases = 0;
  std::size_t violations = 0;
  /// Largest residual or slack violation observed.
  double worst = 0.0;
  double threshold = 0.0;
  [[nodiscard]] bool passed() const noexcept { return violations == 0; }
};

struct TheoremReport {
  std::vector<TheoremCheck> checks;
  [[nodiscard]] bool passed() const noexcept;
};

/// Randomized property suite: partition identities, the convex error bound
/// in three norms, inflation cache correctness and eval accounting, the
/// per-combination partition of inflated sets and consistency on the toy.
[[nodiscard]] TheoremReport run_theorem_suite(const ExperimentConfig& config);

void write_report_json(std::ostream& out, const TheoremReport& report);

/// CSV columns: experiment, method, budget, replications, component,
/// squared_bias, variance, mse, mean_estimate, log_evidence_mse,
/// wall_seconds. JSON is an array of objects with the same keys.
/// Refuses an empty series before touching the filesystem.
void emit(const MetricSeries& series, const std::filesystem::path& path, OutputFormat format);
void write_csv(std::ostream& out, const MetricSeries& series);
void write_json(std::ostream& out, const MetricSeries& series);
[[nodiscard]] MetricSeries read_json(std::istream& in);
[[nodiscard]] MetricSeries read_json(const std::filesystem::path& path);

/// Trace CSV: replication, budget, method, generation, best_log_likelihood,
/// estimate_error, weight_cv2, block_evals, samples.
void write_traces_csv(std::ostream& out, std::span<const DmmRun> runs);

}  // namespace sinfl

#endif  // SINFL_EXPERIMENTS_HPP
