// sinfl: command line harness for the Gaussian toy, Dirichlet mixture and
// property-suite experiments.

#include <sinfl/experiments.hpp>
#include <sinfl/models.hpp>

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>

namespace {

using namespace sinfl;

/// Flags shared by the experiment subcommands. Only flags given on the
/// command line override the config file.
struct CommonFlags {
  std::string config_path;
  std::uint64_t seed = 0;
  std::vector<std::size_t> budgets;
  std::size_t replications = 0;
  std::string method;
  std::size_t threads = 1;
  std::string output;
  std::string format;

  std::vector<std::pair<CLI::Option*, std::function<void(ExperimentConfig&)>>> setters;

  void add(CLI::App& app) {
    app.add_option("--config", config_path, "Key-value config file (schema_version = 1)")
        ->check(CLI::ExistingFile);
    bind(app.add_option("--seed", seed, "Base seed")->required(),
         [this](ExperimentConfig& c) { c.seed = seed; });
    bind(app.add_option("--budgets", budgets, "Strictly increasing budgets")->delimiter(','),
         [this](ExperimentConfig& c) { c.budgets = budgets; });
    bind(app.add_option("--replications", replications, "Seeded replications (>= 2)"),
         [this](ExperimentConfig& c) { c.replications = replications; });
    bind(app.add_option("--method", method, "plain, inflated or both")
             ->check(CLI::IsMember({"plain", "inflated", "both"})),
         [this](ExperimentConfig& c) { c.method = parse_method(method); });
    bind(app.add_option("--threads", threads, "Worker threads"),
         [this](ExperimentConfig& c) { c.threads = threads; });
    bind(app.add_option("--output,-o", output, "Output path (stdout if omitted)"),
         [this](ExperimentConfig& c) { c.output = output; });
    bind(app.add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"})),
         [this](ExperimentConfig& c) { c.format = parse_output_format(format); });
  }

  void bind(CLI::Option* opt, std::function<void(ExperimentConfig&)> set) {
    setters.emplace_back(opt, std::move(set));
  }

  ExperimentConfig resolve(ExperimentKind kind) const {
    ExperimentConfig config = default_config(kind);
    if (!config_path.empty()) {
      apply_config(std::filesystem::path{config_path}, config);
      if (config.experiment != kind) {
        // The subcommand decides the family; the config may still pick the variant.
        const bool same_family =
            (kind == ExperimentKind::gauss_centered || kind == ExperimentKind::gauss_offcenter)
                ? (config.experiment == ExperimentKind::gauss_centered ||
                   config.experiment == ExperimentKind::gauss_offcenter)
                : (kind == ExperimentKind::dmm_gauss || kind == ExperimentKind::dmm_t)
                      ? (config.experiment == ExperimentKind::dmm_gauss ||
                         config.experiment == ExperimentKind::dmm_t)
                      : false;
        if (!same_family) config.experiment = kind;
      }
    }
    for (const auto& [opt, set] : setters) {
      if (opt->count() > 0) set(config);
    }
    return config;
  }
};

void write_series(const MetricSeries& series, const ExperimentConfig& config) {
  if (config.output.empty()) {
    if (series.rows.empty()) throw std::invalid_argument("empty metric series");
    config.format == OutputFormat::csv ? write_csv(std::cout, series)
                                       : write_json(std::cout, series);
    return;
  }
  emit(series, config.output, config.format);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Importance sampling with Sample Inflation: experiment harness"};
  app.require_subcommand(1);

  // gauss ------------------------------------------------------------------
  auto* gauss = app.add_subcommand("gauss", "2-D Gaussian toy: plain vs inflated IS");
  CommonFlags gauss_flags;
  gauss_flags.add(*gauss);
  std::string center;
  std::size_t group_size = 100;
  double proposal_dof = 20.0;
  bool matched = false;
  auto* center_opt = gauss->add_option("--center", center, "Proposal center: centered or offcenter")
                         ->check(CLI::IsMember({"centered", "offcenter"}));
  gauss_flags.bind(gauss->add_option("--group-size", group_size, "Inflation group size"),
                   [&](ExperimentConfig& c) { c.group_size = group_size; });
  gauss_flags.bind(gauss->add_option("--proposal-dof", proposal_dof, "Student-t proposal dof"),
                   [&](ExperimentConfig& c) { c.proposal_dof = proposal_dof; });
  gauss_flags.bind(gauss->add_flag("--matched-proposal", matched,
                                   "Sanity mode: proposal equals target, no evidence offset"),
                   [&](ExperimentConfig& c) { c.matched_proposal = matched; });

  // dmm --------------------------------------------------------------------
  auto* dmm = app.add_subcommand("dmm", "Dirichlet mixture models with PMC");
  CommonFlags dmm_flags;
  dmm_flags.add(*dmm);
  std::string family;
  std::size_t generations = 10;
  std::size_t inflation_draws = 2;
  KernelBandwidths bw;
  std::string label_proposal;
  std::size_t data_size = 100;
  std::vector<double> true_means;
  double data_dof = 30.0;
  std::string traces_path;
  auto* family_opt = dmm->add_option("--family", family, "Component family: gaussian or t")
                         ->check(CLI::IsMember({"gaussian", "t"}));
  dmm_flags.bind(dmm->add_option("--generations", generations, "PMC generations"),
                 [&](ExperimentConfig& c) { c.generations = generations; });
  dmm_flags.bind(dmm->add_option("--inflation-draws", inflation_draws, "M per block"),
                 [&](ExperimentConfig& c) { c.inflation_draws = inflation_draws; });
  dmm_flags.bind(dmm->add_option("--mean-scale", bw.mean_scale, "Mean kernel scale"),
                 [&](ExperimentConfig& c) { c.bandwidths.mean_scale = bw.mean_scale; });
  dmm_flags.bind(dmm->add_option("--mean-dof", bw.mean_dof, "Student-t mean kernel dof"),
                 [&](ExperimentConfig& c) { c.bandwidths.mean_dof = bw.mean_dof; });
  dmm_flags.bind(dmm->add_option("--positive-cv", bw.positive_cv, "CV of variance/dof kernels"),
                 [&](ExperimentConfig& c) { c.bandwidths.positive_cv = bw.positive_cv; });
  dmm_flags.bind(
      dmm->add_option("--simplex-concentration", bw.simplex_concentration,
                      "Dirichlet kernel concentration"),
      [&](ExperimentConfig& c) { c.bandwidths.simplex_concentration = bw.simplex_concentration; });
  dmm_flags.bind(dmm->add_option("--label-proposal", label_proposal, "prior or responsibility")
                     ->check(CLI::IsMember({"prior", "responsibility"})),
                 [&](ExperimentConfig& c) { c.label_proposal = parse_label_proposal(label_proposal); });
  dmm_flags.bind(dmm->add_option("--data-size", data_size, "Synthetic observations"),
                 [&](ExperimentConfig& c) { c.data_size = data_size; });
  dmm_flags.bind(dmm->add_option("--true-means", true_means, "Generating means")
                     ->expected(2)
                     ->delimiter(','),
                 [&](ExperimentConfig& c) { c.true_means = {true_means[0], true_means[1]}; });
  dmm_flags.bind(dmm->add_option("--data-dof", data_dof, "Student-t data dof"),
                 [&](ExperimentConfig& c) { c.data_dof = data_dof; });
  dmm->add_option("--traces", traces_path, "Per-generation trace CSV");

  // theorems ---------------------------------------------------------------
  auto* theorems = app.add_subcommand("theorems", "Randomized property suite (nonzero exit on failure)");
  CommonFlags theorem_flags;
  theorem_flags.add(*theorems);
  std::size_t cases = 500;
  std::size_t cache_cases = 200;
  theorem_flags.bind(theorems->add_option("--cases", cases, "Random partition instances"),
                     [&](ExperimentConfig& c) { c.theorem_cases = cases; });
  theorem_flags.bind(theorems->add_option("--cache-cases", cache_cases, "Random inflation instances"),
                     [&](ExperimentConfig& c) { c.cache_cases = cache_cases; });
  theorem_flags.bind(theorems->add_option("--group-size", group_size, "Inflation group size"),
                     [&](ExperimentConfig& c) { c.group_size = group_size; });

  // emit-data --------------------------------------------------------------
  auto* emit_data = app.add_subcommand("emit-data", "Write a synthetic mixture dataset");
  SyntheticConfig synth;
  std::string synth_kind = "gaussian";
  std::vector<double> synth_means{-2.0, 2.0};
  std::string data_output;
  emit_data->add_option("--seed", synth.seed, "Seed")->required();
  emit_data->add_option("--kind", synth_kind, "gaussian or t")
      ->check(CLI::IsMember({"gaussian", "t"}));
  emit_data->add_option("--means", synth_means, "Component means")->expected(2)->delimiter(',');
  emit_data->add_option("--size", synth.size, "Observations");
  emit_data->add_option("--dof", synth.dof, "Student-t dof");
  emit_data->add_option("--mixing", synth.mixing, "Probability of the first component");
  emit_data->add_option("--output,-o", data_output, "Output path")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (gauss->parsed()) {
      const auto kind = center == "offcenter" ? ExperimentKind::gauss_offcenter
                                              : ExperimentKind::gauss_centered;
      auto config = gauss_flags.resolve(kind);
      if (center_opt->count() > 0) config.experiment = kind;
      const auto result = run_gauss(config);
      write_series(result.series, config);
      return 0;
    }
    if (dmm->parsed()) {
      const auto kind = family == "t" ? ExperimentKind::dmm_t : ExperimentKind::dmm_gauss;
      auto config = dmm_flags.resolve(kind);
      if (family_opt->count() > 0) config.experiment = kind;
      const auto result = run_dmm(config);
      write_series(result.series, config);
      if (!traces_path.empty()) {
        std::ofstream out{traces_path};
        if (!out) throw std::runtime_error("cannot open " + traces_path);
        write_traces_csv(out, result.runs);
      }
      return 0;
    }
    if (theorems->parsed()) {
      auto config = theorem_flags.resolve(ExperimentKind::theorem_suite);
      const auto report = run_theorem_suite(config);
      if (config.output.empty()) {
        write_report_json(std::cout, report);
      } else {
        std::ofstream out{config.output};
        if (!out) throw std::runtime_error("cannot open " + config.output.string());
        write_report_json(out, report);
      }
      for (const auto& c : report.checks) {
        std::cerr << (c.passed() ? "PASS " : "FAIL ") << c.name << " (worst " << c.worst << ", "
                  << c.violations << "/" << c.cases << " violations)\n";
      }
      return report.passed() ? 0 : 1;
    }
    if (emit_data->parsed()) {
      synth.kind = parse_component_family(synth_kind);
      synth.means = {synth_means[0], synth_means[1]};
      write_dataset(std::filesystem::path{data_output}, make_synthetic(synth));
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "sinfl: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
