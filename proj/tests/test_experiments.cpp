#include <sinfl/experiments.hpp>

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace sinfl {
namespace {

namespace fs = std::filesystem;

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "sinfl_tests";
  fs::create_directories(dir);
  return dir / name;
}

MetricSeries eight_rows() {
  MetricSeries s;
  for (const std::uint64_t budget : {200u, 2000u}) {
    for (const char* method : {"plain", "inflated"}) {
      for (const std::uint64_t c : {0u, 1u}) {
        s.rows.push_back({"gauss-centered", method, budget, 5, c, 1.0 / 3.0 * c, 0.1 + 1e-17 * budget,
                          0.1 + 1.0 / 3.0 * c + 1e-17 * budget, -2.5e-300, std::nan(""), 0.25});
      }
    }
  }
  return s;
}

std::string strip_wall_seconds(const std::string& csv) {
  std::stringstream in{csv}, out;
  std::string line;
  while (std::getline(in, line)) out << line.substr(0, line.rfind(',')) << '\n';
  return out.str();
}

std::string csv_of(const MetricSeries& s) {
  std::stringstream out;
  write_csv(out, s);
  return out.str();
}

TEST(Config, ParsesFlatKeyValueFile) {
  std::stringstream in{R"(# gauss reproduction
schema_version = 1
experiment = "gauss-offcenter"
budgets = [100, 1000]
replications = 7
seed = 99
method = "inflated"
matched_proposal = false
proposal_dof = 12
mean_scale = 0.5
true_means = [-1.5, 3]
format = "json"
)"};
  ExperimentConfig c = default_config(ExperimentKind::gauss_centered);
  apply_config(in, c);
  EXPECT_EQ(c.experiment, ExperimentKind::gauss_offcenter);
  EXPECT_EQ(c.budgets, (std::vector<std::size_t>{100, 1000}));
  EXPECT_EQ(c.replications, 7u);
  EXPECT_EQ(c.seed, 99u);
  EXPECT_EQ(c.method, Method::inflated);
  EXPECT_EQ(c.proposal_dof, 12.0);
  EXPECT_EQ(c.bandwidths.mean_scale, 0.5);
  EXPECT_EQ(c.true_means, (std::array{-1.5, 3.0}));
  EXPECT_EQ(c.format, OutputFormat::json);
  EXPECT_NO_THROW(c.validate());
}

TEST(Config, RejectsMalformedFiles) {
  const std::vector<std::string> bad{
      "replications = 3\n",                           // schema_version must come first
      "schema_version = 2\n",                         // unknown version
      "schema_version = 1\nbogus = 1\n",              // unknown key
      "schema_version = 1\nreplications = \"3\"\n",   // wrong type
      "schema_version = 1\nbudgets = [1.5, 2]\n",     // integer list
      "schema_version = 1\nmethod = plain\n",         // unquoted string
      "schema_version = 1\nreplications 3\n",         // missing '='
      "schema_version = 1\nschema_version = 1\n",     // repeated version
  };
  for (const auto& text : bad) {
    std::stringstream in{text};
    ExperimentConfig c;
    EXPECT_THROW(apply_config(in, c), std::invalid_argument) << text;
  }
}

TEST(Config, Validation) {
  ExperimentConfig c;
  c.replications = 1;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = ExperimentConfig{};
  c.budgets = {2000, 200};
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = ExperimentConfig{};
  c.budgets = {150};
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c.budgets = {50};
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = default_config(ExperimentKind::dmm_gauss);
  EXPECT_EQ(c.budgets, (std::vector<std::size_t>{2000}));
  c.budgets = {2001};
  EXPECT_THROW(c.validate(), std::invalid_argument);
}

TEST(Config, EnumStringsRoundTrip) {
  for (const auto k : {ExperimentKind::gauss_centered, ExperimentKind::gauss_offcenter,
                       ExperimentKind::dmm_gauss, ExperimentKind::dmm_t, ExperimentKind::theorem_suite}) {
    EXPECT_EQ(parse_experiment_kind(to_string(k)), k);
  }
  for (const auto m : {Method::plain, Method::inflated, Method::both}) {
    EXPECT_EQ(parse_method(to_string(m)), m);
  }
  EXPECT_THROW((void)parse_method("neither"), std::invalid_argument);
}

TEST(Emit, CsvRowArithmetic) {
  const auto path = scratch("eight.csv");
  emit(eight_rows(), path, OutputFormat::csv);
  std::ifstream in{path};
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header,
            "experiment,method,budget,replications,component,squared_bias,variance,mse,"
            "mean_estimate,log_evidence_mse,wall_seconds");
  int rows = 0;
  for (std::string line; std::getline(in, line);) ++rows;
  EXPECT_EQ(rows, 8);
}

TEST(Emit, JsonRoundTripIsBitExact) {
  const auto series = eight_rows();
  const auto path = scratch("eight.json");
  emit(series, path, OutputFormat::json);
  const auto back = read_json(path);
  ASSERT_EQ(back.rows.size(), series.rows.size());
  for (std::size_t i = 0; i < series.rows.size(); ++i) {
    const auto& a = series.rows[i];
    const auto& b = back.rows[i];
    EXPECT_EQ(a.experiment, b.experiment);
    EXPECT_EQ(a.method, b.method);
    EXPECT_EQ(a.budget, b.budget);
    EXPECT_EQ(a.component, b.component);
    EXPECT_EQ(a.squared_bias, b.squared_bias);
    EXPECT_EQ(a.variance, b.variance);
    EXPECT_EQ(a.mse, b.mse);
    EXPECT_EQ(a.mean_estimate, b.mean_estimate);
    EXPECT_TRUE(std::isnan(b.log_evidence_mse));
    EXPECT_EQ(a.wall_seconds, b.wall_seconds);
  }
}

TEST(Emit, EmptySeriesRefusedWithoutFile) {
  const auto path = scratch("empty.csv");
  fs::remove(path);
  EXPECT_THROW(emit(MetricSeries{}, path, OutputFormat::csv), std::invalid_argument);
  EXPECT_FALSE(fs::exists(path));
}

TEST(Emit, UnwritablePathIsIoError) {
  EXPECT_THROW(emit(eight_rows(), "/nonexistent-dir/x/y.csv", OutputFormat::csv), std::runtime_error);
}

TEST(Aggregate, SingleReplicateHasZeroVariance) {
  const std::vector<Replicate> reps{{100, 0, Method::plain, {0.5, -0.5}, -999.0, 100, 200, 0.0}};
  const std::vector<std::size_t> budgets{100};
  const std::vector<double> truth{0.0, 0.0};
  const auto s = aggregate("gauss-centered", reps, budgets, truth, -1000.0);
  ASSERT_EQ(s.rows.size(), 2u);
  EXPECT_EQ(s.rows[0].variance, 0.0);
  EXPECT_EQ(s.rows[0].squared_bias, 0.25);
  EXPECT_EQ(s.rows[0].log_evidence_mse, 1.0);
}

TEST(RunGauss, BiasVarianceIdentityAndRowShape) {
  ExperimentConfig c = default_config(ExperimentKind::gauss_offcenter);
  c.budgets = {200, 2000};
  c.replications = 6;
  c.seed = 5;
  const auto result = run_gauss(c);
  EXPECT_EQ(result.series.rows.size(), 8u);
  for (const auto& row : result.series.rows) {
    EXPECT_GE(row.mse, row.variance);
    EXPECT_GE(row.variance, 0.0);
    EXPECT_LE(std::abs(row.mse - (row.variance + row.squared_bias)), 1e-9 * std::max(1.0, row.mse));
    EXPECT_EQ(row.experiment, "gauss-offcenter");
  }
}

TEST(RunGauss, InflatedSampleCounts) {
  ExperimentConfig c;
  c.budgets = {200, 20'000};
  c.replications = 2;
  c.method = Method::inflated;
  const auto result = run_gauss(c);
  for (const auto& r : result.replicates) {
    EXPECT_EQ(r.samples, r.budget == 200 ? 20'000u : 2'000'000u);
    EXPECT_EQ(r.block_evals, 2 * r.budget);
  }
}

TEST(RunGauss, MatchedProposalSanity) {
  ExperimentConfig c;
  c.budgets = {200, 2000, 20'000};
  c.replications = 10;
  c.matched_proposal = true;
  const auto result = run_gauss(c);
  for (const auto& r : result.replicates) EXPECT_EQ(r.log_evidence, 0.0);
  double previous = INFINITY;
  for (const auto budget : c.budgets) {
    double total = 0.0;
    for (const auto& row : result.series.rows) {
      if (row.budget == budget && row.method == "plain") total += row.mse;
    }
    EXPECT_LT(total, previous);
    previous = total;
  }
  EXPECT_LT(previous, 1e-3);
}

TEST(RunGauss, DeterministicAcrossThreadCounts) {
  ExperimentConfig c;
  c.budgets = {200, 2000};
  c.replications = 5;
  c.seed = 42;
  const std::string one = strip_wall_seconds(csv_of(run_gauss(c).series));
  c.threads = 4;
  const std::string four = strip_wall_seconds(csv_of(run_gauss(c).series));
  EXPECT_EQ(one, four);
  c.seed = 43;
  EXPECT_NE(one, strip_wall_seconds(csv_of(run_gauss(c).series)));
}

TEST(RunGauss, RejectsIndivisibleBudget) {
  ExperimentConfig c;
  c.budgets = {250};
  EXPECT_THROW((void)run_gauss(c), std::invalid_argument);
}

TEST(RunDmm, BudgetParityAndTraces) {
  ExperimentConfig c = default_config(ExperimentKind::dmm_gauss);
  c.budgets = {200};
  c.replications = 2;
  c.generations = 3;
  const auto result = run_dmm(c);
  ASSERT_EQ(result.runs.size(), 4u);
  for (std::size_t r = 0; r < 2; ++r) {
    const auto& plain = result.runs[2 * r];
    const auto& infl = result.runs[2 * r + 1];
    ASSERT_EQ(plain.method, Method::plain);
    ASSERT_EQ(infl.method, Method::inflated);
    EXPECT_EQ(plain.block_evals, infl.block_evals);
    for (std::size_t t = 0; t < 3; ++t) {
      EXPECT_EQ(plain.block_evals[t], 400u);
      EXPECT_EQ(infl.samples[t], 2 * plain.samples[t]);
    }
    EXPECT_EQ(plain.trace.size(), 3u);
  }
  EXPECT_EQ(result.series.rows.size(), 4u);
}

TEST(RunDmm, DefaultBudgetParity) {
  ExperimentConfig c = default_config(ExperimentKind::dmm_t);
  c.replications = 2;
  c.generations = 1;
  const auto result = run_dmm(c);
  for (const auto& run : result.runs) {
    EXPECT_EQ(run.block_evals.front(), 4000u);
    EXPECT_EQ(run.samples.front(), run.method == Method::plain ? 2000u : 4000u);
    EXPECT_EQ(run.trace.size(), 1u);
  }
}

TEST(Dmm, StudentFamilySurvivesSeveralGenerations) {
  ExperimentConfig c = default_config(ExperimentKind::dmm_t);
  c.seed = 2;
  c.budgets = {400};
  c.replications = 4;
  c.generations = 5;
  const auto result = run_dmm(c);
  for (const auto& row : result.series.rows) {
    EXPECT_TRUE(std::isfinite(row.mse));
  }
}

TEST(Theorems, SmallSuitePasses) {
  ExperimentConfig c = default_config(ExperimentKind::theorem_suite);
  c.theorem_cases = 60;
  c.cache_cases = 40;
  c.budgets = {200, 2000};
  c.replications = 10;
  c.seed = 2;
  const auto report = run_theorem_suite(c);
  for (const auto& check : report.checks) EXPECT_TRUE(check.passed()) << check.name;
  std::stringstream out;
  write_report_json(out, report);
  EXPECT_NE(out.str().find("decomposition-standard"), std::string::npos);
}

}  // namespace
}  // namespace sinfl
