#include <sinfl/experiments.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <stdexcept>
#include <variant>

namespace sinfl {
namespace {

bool is_gauss(ExperimentKind k) {
  return k == ExperimentKind::gauss_centered || k == ExperimentKind::gauss_offcenter;
}

bool is_dmm(ExperimentKind k) {
  return k == ExperimentKind::dmm_gauss || k == ExperimentKind::dmm_t;
}

// ---------------------------------------------------------------------------
// key = value parsing

using Number = std::variant<std::int64_t, double>;
using Value = std::variant<std::int64_t, double, bool, std::string, std::vector<Number>>;

enum class Type { integer, real, boolean, string, integer_list, real_list };

const std::map<std::string, Type, std::less<>>& schema() {
  static const std::map<std::string, Type, std::less<>> keys{
      {"schema_version", Type::integer},
      {"experiment", Type::string},
      {"budgets", Type::integer_list},
      {"replications", Type::integer},
      {"seed", Type::integer},
      {"method", Type::string},
      {"threads", Type::integer},
      {"group_size", Type::integer},
      {"proposal_dof", Type::real},
      {"matched_proposal", Type::boolean},
      {"generations", Type::integer},
      {"inflation_draws", Type::integer},
      {"mean_scale", Type::real},
      {"mean_dof", Type::real},
      {"positive_cv", Type::real},
      {"simplex_concentration", Type::real},
      {"label_proposal", Type::string},
      {"data_size", Type::integer},
      {"true_means", Type::real_list},
      {"data_dof", Type::real},
      {"theorem_cases", Type::integer},
      {"cache_cases", Type::integer},
      {"output", Type::string},
      {"format", Type::string},
  };
  return keys;
}

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void fail(std::size_t line, const std::string& what) {
  throw std::invalid_argument("config line " + std::to_string(line) + ": " + what);
}

std::optional<Number> parse_number(std::string_view text) {
  const auto* first = text.data();
  const auto* last = first + text.size();
  if (!text.empty() && text.front() == '+') ++first;
  std::int64_t i = 0;
  if (auto [p, ec] = std::from_chars(first, last, i); ec == std::errc{} && p == last) {
    return Number{i};
  }
  double d = 0.0;
  if (auto [p, ec] = std::from_chars(first, last, d); ec == std::errc{} && p == last) {
    return Number{d};
  }
  return std::nullopt;
}

Value parse_value(std::string_view text, std::size_t line) {
  if (text.empty()) fail(line, "missing value");
  if (text.front() == '"') {
    if (text.size() < 2 || text.back() != '"') fail(line, "unterminated string");
    return std::string{text.substr(1, text.size() - 2)};
  }
  if (text == "true") return true;
  if (text == "false") return false;
  if (text.front() == '[') {
    if (text.back() != ']') fail(line, "unterminated list");
    std::vector<Number> items;
    auto body = trim(text.substr(1, text.size() - 2));
    while (!body.empty()) {
      const auto comma = body.find(',');
      const auto item = trim(body.substr(0, comma));
      const auto n = parse_number(item);
      if (!n) fail(line, "list items must be numbers");
      items.push_back(*n);
      if (comma == std::string_view::npos) break;
      body = trim(body.substr(comma + 1));
      if (body.empty()) fail(line, "trailing comma in list");
    }
    return items;
  }
  if (const auto n = parse_number(text)) {
    return std::visit([](auto v) -> Value { return v; }, *n);
  }
  fail(line, "cannot parse value '" + std::string{text} + "' (strings must be quoted)");
}

double as_real(const Number& n) {
  return std::visit([](auto v) { return static_cast<double>(v); }, n);
}

std::size_t as_count(std::int64_t v, std::size_t line) {
  if (v < 0) fail(line, "expected a nonnegative integer");
  return static_cast<std::size_t>(v);
}

/// Checks `value` against the key's type.
void check_type(Type type, const Value& value, std::size_t line, const std::string& key) {
  const bool ok = [&] {
    switch (type) {
      case Type::integer:
        return std::holds_alternative<std::int64_t>(value);
      case Type::real:
        return std::holds_alternative<double>(value) || std::holds_alternative<std::int64_t>(value);
      case Type::boolean:
        return std::holds_alternative<bool>(value);
      case Type::string:
        return std::holds_alternative<std::string>(value);
      case Type::integer_list: {
        const auto* items = std::get_if<std::vector<Number>>(&value);
        if (!items) return false;
        for (const auto& n : *items) {
          if (!std::holds_alternative<std::int64_t>(n)) return false;
        }
        return true;
      }
      case Type::real_list:
        return std::holds_alternative<std::vector<Number>>(value);
    }
    return false;
  }();
  if (!ok) fail(line, "wrong value type for '" + key + "'");
}

void assign(ExperimentConfig& c, const std::string& key, const Value& v, std::size_t line) {
  auto count = [&] { return as_count(std::get<std::int64_t>(v), line); };
  auto real = [&] {
    return std::holds_alternative<double>(v) ? std::get<double>(v)
                                             : static_cast<double>(std::get<std::int64_t>(v));
  };
  auto text = [&] { return std::get<std::string>(v); };

  if (key == "experiment") {
    c.experiment = parse_experiment_kind(text());
  } else if (key == "budgets") {
    c.budgets.clear();
    for (const auto& n : std::get<std::vector<Number>>(v)) {
      c.budgets.push_back(as_count(std::get<std::int64_t>(n), line));
    }
  } else if (key == "replications") {
    c.replications = count();
  } else if (key == "seed") {
    c.seed = static_cast<std::uint64_t>(std::get<std::int64_t>(v));
  } else if (key == "method") {
    c.method = parse_method(text());
  } else if (key == "threads") {
    c.threads = count();
  } else if (key == "group_size") {
    c.group_size = count();
  } else if (key == "proposal_dof") {
    c.proposal_dof = real();
  } else if (key == "matched_proposal") {
    c.matched_proposal = std::get<bool>(v);
  } else if (key == "generations") {
    c.generations = count();
  } else if (key == "inflation_draws") {
    c.inflation_draws = count();
  } else if (key == "mean_scale") {
    c.bandwidths.mean_scale = real();
  } else if (key == "mean_dof") {
    c.bandwidths.mean_dof = real();
  } else if (key == "positive_cv") {
    c.bandwidths.positive_cv = real();
  } else if (key == "simplex_concentration") {
    c.bandwidths.simplex_concentration = real();
  } else if (key == "label_proposal") {
    c.label_proposal = parse_label_proposal(text());
  } else if (key == "data_size") {
    c.data_size = count();
  } else if (key == "true_means") {
    const auto& items = std::get<std::vector<Number>>(v);
    if (items.size() != 2) fail(line, "true_means needs exactly two values");
    c.true_means = {as_real(items[0]), as_real(items[1])};
  } else if (key == "data_dof") {
    c.data_dof = real();
  } else if (key == "theorem_cases") {
    c.theorem_cases = count();
  } else if (key == "cache_cases") {
    c.cache_cases = count();
  } else if (key == "output") {
    c.output = text();
  } else if (key == "format") {
    c.format = parse_output_format(text());
  }
}

}  // namespace

std::string to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::gauss_centered:
      return "gauss-centered";
    case ExperimentKind::gauss_offcenter:
      return "gauss-offcenter";
    case ExperimentKind::dmm_gauss:
      return "dmm-gauss";
    case ExperimentKind::dmm_t:
      return "dmm-t";
    case ExperimentKind::theorem_suite:
      return "theorem-suite";
  }
  return "unknown";
}

std::string to_string(Method method) {
  switch (method) {
    case Method::plain:
      return "plain";
    case Method::inflated:
      return "inflated";
    case Method::both:
      return "both";
  }
  return "unknown";
}

std::string to_string(OutputFormat format) {
  return format == OutputFormat::csv ? "csv" : "json";
}

ExperimentKind parse_experiment_kind(const std::string& text) {
  for (auto k : {ExperimentKind::gauss_centered, ExperimentKind::gauss_offcenter,
                 ExperimentKind::dmm_gauss, ExperimentKind::dmm_t, ExperimentKind::theorem_suite}) {
    if (to_string(k) == text) return k;
  }
  throw std::invalid_argument("unknown experiment '" + text + "'");
}

Method parse_method(const std::string& text) {
  for (auto m : {Method::plain, Method::inflated, Method::both}) {
    if (to_string(m) == text) return m;
  }
  throw std::invalid_argument("unknown method '" + text + "'");
}

OutputFormat parse_output_format(const std::string& text) {
  if (text == "csv") return OutputFormat::csv;
  if (text == "json") return OutputFormat::json;
  throw std::invalid_argument("unknown output format '" + text + "'");
}

ExperimentConfig default_config(ExperimentKind kind) {
  ExperimentConfig c;
  c.experiment = kind;
  if (is_dmm(kind)) {
    c.budgets = {2'000};
    c.replications = 25;
  }
  return c;
}

void ExperimentConfig::validate() const {
  if (replications < 2) {
    throw std::invalid_argument("replications must be >= 2");
  }
  if (threads < 1) {
    throw std::invalid_argument("threads must be >= 1");
  }
  if (experiment != ExperimentKind::theorem_suite) {
    if (budgets.empty()) {
      throw std::invalid_argument("at least one budget is required");
    }
    for (std::size_t i = 0; i < budgets.size(); ++i) {
      if (budgets[i] == 0 || (i > 0 && budgets[i] <= budgets[i - 1])) {
        throw std::invalid_argument("budgets must be positive and strictly increasing");
      }
    }
  }
  if (is_gauss(experiment) || experiment == ExperimentKind::theorem_suite) {
    if (!(proposal_dof > 0.0)) {
      throw std::invalid_argument("proposal_dof must be positive");
    }
    if (group_size == 0) {
      throw std::invalid_argument("group_size must be >= 1");
    }
    if (runs(Method::inflated) || experiment == ExperimentKind::theorem_suite) {
      for (auto b : budgets) {
        if (b < group_size || b % group_size != 0) {
          throw std::invalid_argument("budget " + std::to_string(b) +
                                      " is not a positive multiple of group_size " +
                                      std::to_string(group_size));
        }
      }
    }
  }
  if (is_dmm(experiment)) {
    if (generations == 0 || inflation_draws == 0 || data_size == 0) {
      throw std::invalid_argument("generations, inflation_draws and data_size must be >= 1");
    }
    bandwidths.validate();
    if (runs(Method::inflated)) {
      for (auto b : budgets) {
        if (b % inflation_draws != 0) {
          throw std::invalid_argument("budget " + std::to_string(b) +
                                      " is not a multiple of inflation_draws");
        }
      }
    }
    if (!(data_dof > 0.0)) {
      throw std::invalid_argument("data_dof must be positive");
    }
  }
}

void apply_config(std::istream& in, ExperimentConfig& config) {
  std::string raw;
  std::size_t line = 0;
  bool versioned = false;
  while (std::getline(in, raw)) {
    ++line;
    auto text = trim(raw);
    if (text.empty() || text.front() == '#') continue;
    const auto eq = text.find('=');
    if (eq == std::string_view::npos) fail(line, "expected 'key = value'");
    const std::string key{trim(text.substr(0, eq))};
    const Value value = parse_value(trim(text.substr(eq + 1)), line);

    const auto it = schema().find(key);
    if (it == schema().end()) fail(line, "unknown key '" + key + "'");
    check_type(it->second, value, line, key);

    if (!versioned) {
      if (key != "schema_version") fail(line, "schema_version must be the first setting");
      if (std::get<std::int64_t>(value) != kConfigSchemaVersion) {
        fail(line, "unsupported schema_version " + std::to_string(std::get<std::int64_t>(value)));
      }
      versioned = true;
      continue;
    }
    if (key == "schema_version") fail(line, "schema_version given twice");
    assign(config, key, value, line);
  }
  if (!versioned) {
    throw std::invalid_argument("config: missing schema_version");
  }
}

void apply_config(const std::filesystem::path& path, ExperimentConfig& config) {
  std::ifstream in{path};
  if (!in) {
    throw std::runtime_error("cannot open config " + path.string());
  }
  apply_config(in, config);
}

}  // namespace sinfl
