#include <sinfl/experiments.hpp>

#include <fmt/format.h>
#include <fmt/ostream.h>
#include <json.hpp>

#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace sinfl {
namespace {

using ordered_json = nlohmann::ordered_json;

constexpr const char* kColumns =
    "experiment,method,budget,replications,component,squared_bias,variance,mse,mean_estimate,"
    "log_evidence_mse,wall_seconds";

ordered_json number(double v) {
  return std::isnan(v) ? ordered_json(nullptr) : ordered_json(v);
}

double number_from(const ordered_json& j) {
  return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>();
}

}  // namespace

void write_csv(std::ostream& out, const MetricSeries& series) {
  fmt::print(out, "{}\n", kColumns);
  for (const auto& r : series.rows) {
    fmt::print(out, "{},{},{},{},{},{},{},{},{},{},{}\n", r.experiment, r.method, r.budget,
               r.replications, r.component, r.squared_bias, r.variance, r.mse, r.mean_estimate,
               r.log_evidence_mse, r.wall_seconds);
  }
}

void write_json(std::ostream& out, const MetricSeries& series) {
  ordered_json rows = ordered_json::array();
  for (const auto& r : series.rows) {
    rows.push_back({{"experiment", r.experiment},
                    {"method", r.method},
                    {"budget", r.budget},
                    {"replications", r.replications},
                    {"component", r.component},
                    {"squared_bias", number(r.squared_bias)},
                    {"variance", number(r.variance)},
                    {"mse", number(r.mse)},
                    {"mean_estimate", number(r.mean_estimate)},
                    {"log_evidence_mse", number(r.log_evidence_mse)},
                    {"wall_seconds", number(r.wall_seconds)}});
  }
  out << rows.dump(2) << '\n';
}

MetricSeries read_json(std::istream& in) {
  const auto rows = ordered_json::parse(in);
  if (!rows.is_array()) {
    throw std::runtime_error("metric json: expected an array of rows");
  }
  MetricSeries series;
  for (const auto& j : rows) {
    MetricRow r;
    r.experiment = j.at("experiment").get<std::string>();
    r.method = j.at("method").get<std::string>();
    r.budget = j.at("budget").get<std::uint64_t>();
    r.replications = j.at("replications").get<std::uint64_t>();
    r.component = j.at("component").get<std::uint64_t>();
    r.squared_bias = number_from(j.at("squared_bias"));
    r.variance = number_from(j.at("variance"));
    r.mse = number_from(j.at("mse"));
    r.mean_estimate = number_from(j.at("mean_estimate"));
    r.log_evidence_mse = number_from(j.at("log_evidence_mse"));
    r.wall_seconds = number_from(j.at("wall_seconds"));
    series.rows.push_back(std::move(r));
  }
  return series;
}

MetricSeries read_json(const std::filesystem::path& path) {
  std::ifstream in{path};
  if (!in) {
    throw std::runtime_error("cannot open " + path.string());
  }
  return read_json(in);
}

void emit(const MetricSeries& series, const std::filesystem::path& path, OutputFormat format) {
  if (series.rows.empty()) {
    throw std::invalid_argument("emit: refusing to write an empty metric series");
  }
  std::ofstream out{path};
  if (!out) {
    throw std::runtime_error("emit: cannot open " + path.string() + " for writing");
  }
  if (format == OutputFormat::csv) {
    write_csv(out, series);
  } else {
    write_json(out, series);
  }
  out.flush();
  if (!out) {
    throw std::runtime_error("emit: write failed for " + path.string());
  }
}

void write_traces_csv(std::ostream& out, std::span<const DmmRun> runs) {
  fmt::print(out,
             "replication,budget,method,generation,best_log_likelihood,estimate_error,weight_cv2,"
             "block_evals,samples\n");
  for (const auto& run : runs) {
    for (std::size_t t = 0; t < run.trace.size(); ++t) {
      fmt::print(out, "{},{},{},{},{},{},{},{},{}\n", run.replication, run.budget,
                 to_string(run.method), t + 1, run.trace.best_log_likelihood[t],
                 run.trace.estimate_error[t], run.trace.weight_cv2[t], run.block_evals[t],
                 run.samples[t]);
    }
  }
}

void write_report_json(std::ostream& out, const TheoremReport& report) {
  ordered_json checks = ordered_json::array();
  for (const auto& c : report.checks) {
    checks.push_back({{"name", c.name},
                      {"passed", c.passed()},
                      {"cases", c.cases},
                      {"violations", c.violations},
                      {"worst", number(c.worst)},
                      {"threshold", number(c.threshold)}});
  }
  const ordered_json doc{{"passed", report.passed()}, {"checks", checks}};
  out << doc.dump(2) << '\n';
}

}  // namespace sinfl
