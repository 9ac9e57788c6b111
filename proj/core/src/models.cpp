#include <sinfl/models.hpp>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <optional>
#include <ostream>
#include <stdexcept>

namespace sinfl {
namespace {

constexpr std::size_t kToyBlocks = 2;

double parse_double(std::string_view text) {
  double value = 0.0;
  const auto* first = text.data();
  const auto* last = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last) {
    throw std::runtime_error("dataset: cannot parse number '" + std::string{text} + "'");
  }
  return value;
}

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

/// Labels occupy phi[K, K + N).
std::size_t label_at(std::span<const double> phi, std::size_t components, std::size_t i) {
  return static_cast<std::size_t>(phi[components + i]);
}

bool valid_label(double v, std::size_t components) {
  return v >= 0.0 && v == std::floor(v) && v < static_cast<double>(components);
}

double block_prior(const DmmSpec& spec, std::span<const double> gamma) {
  if (spec.family == ComponentFamily::gaussian) {
    return normal_log_pdf(gamma[0], spec.mean_prior_location,
                          spec.mean_prior_scale * spec.mean_prior_scale);
  }
  return student_t_log_pdf(gamma[0], spec.mean_prior_location, spec.mean_prior_scale,
                           spec.mean_prior_dof) +
         inverse_gamma_log_pdf(gamma[1], 0.5 * spec.variance_prior_dof,
                               0.5 * spec.variance_prior_sigma2) +
         gamma_log_pdf(gamma[2], spec.dof_prior_shape, spec.dof_prior_scale);
}

BlockProposal block_prior_proposal(const DmmSpec& spec) {
  if (spec.family == ComponentFamily::gaussian) {
    return BlockProposal::from_density(
        DiagGaussian{{spec.mean_prior_location}, {spec.mean_prior_scale * spec.mean_prior_scale}});
  }
  return BlockProposal{
      3,
      [spec](RandomSource& rng) {
        const double mean =
            draw_student_t(rng, spec.mean_prior_location, spec.mean_prior_scale, spec.mean_prior_dof);
        const double variance =
            0.5 * spec.variance_prior_sigma2 / draw_gamma(rng, 0.5 * spec.variance_prior_dof, 1.0);
        const double dof = draw_gamma(rng, spec.dof_prior_shape, spec.dof_prior_scale);
        return std::vector<double>{mean, variance, dof};
      },
      [spec](std::span<const double> gamma) { return block_prior(spec, gamma); }};
}

/// Mixing weights from `weights`, then one label per observation with
/// log-probabilities label_log_probs(weights, i, j).
template <class LabelLogProb>
std::vector<double> draw_global(RandomSource& rng, const Dirichlet& weights_law, std::size_t n,
                                const LabelLogProb& label_log_prob) {
  const std::size_t K = weights_law.concentration.size();
  std::vector<double> phi = sample(weights_law, rng);
  phi.resize(K + n);
  std::vector<double> probs(K);
  for (std::size_t i = 0; i < n; ++i) {
    double u = rng.uniform();
    std::size_t pick = K - 1;
    for (std::size_t j = 0; j < K; ++j) {
      probs[j] = std::exp(label_log_prob(phi, i, j));
      if (u < probs[j]) {
        pick = j;
        break;
      }
      u -= probs[j];
    }
    phi[K + i] = static_cast<double>(pick);
  }
  return phi;
}

template <class LabelLogProb>
double global_log_density(std::span<const double> phi, const Dirichlet& weights_law, std::size_t n,
                          const LabelLogProb& label_log_prob) {
  const std::size_t K = weights_law.concentration.size();
  double lp = log_density(weights_law, phi.first(K));
  if (lp == kNegInfinity) return lp;
  for (std::size_t i = 0; i < n; ++i) {
    if (!valid_label(phi[K + i], K)) return kNegInfinity;
    lp += label_log_prob(phi, i, label_at(phi, K, i));
  }
  return lp;
}

BlockProposal global_proposal(Dirichlet weights_law, std::size_t n,
                              std::shared_ptr<const std::vector<double>> label_table) {
  const std::size_t K = weights_law.concentration.size();
  // label_table: N x K component log-densities, or null for Cat(phi1).
  auto label_log_prob = [label_table, K](std::span<const double> phi, std::size_t i,
                                         std::size_t j) {
    if (!label_table) {
      return std::log(phi[j]);
    }
    const double* row = label_table->data() + i * K;
    double norm = kNegInfinity;
    for (std::size_t k = 0; k < K; ++k) norm = log_add_exp(norm, std::log(phi[k]) + row[k]);
    if (norm == kNegInfinity) {
      return std::log(phi[j]);
    }
    return std::log(phi[j]) + row[j] - norm;
  };
  return BlockProposal{
      K + n,
      [weights_law, n, label_log_prob](RandomSource& rng) {
        return draw_global(rng, weights_law, n, label_log_prob);
      },
      [weights_law, n, label_log_prob](std::span<const double> phi) {
        return global_log_density(phi, weights_law, n, label_log_prob);
      }};
}

}  // namespace

FactorizedModel gaussian_toy_model(double log_evidence_offset) {
  std::vector<FactorizedModel::Block> blocks;
  for (std::size_t j = 0; j < kToyBlocks; ++j) {
    blocks.push_back({1, {}, [](std::span<const double>, std::span<const double> gamma) {
                        return normal_log_pdf(gamma[0], 0.0, kToyVariance);
                      }});
  }
  return FactorizedModel{0, {}, std::move(blocks), log_evidence_offset};
}

FactorizedProposal gaussian_toy_proposal(std::array<double, 2> center, double dof) {
  FactorizedProposal q;
  for (double c : center) {
    q.blocks.push_back(BlockProposal::from_density(StudentT{c, std::sqrt(kToyVariance), dof}));
  }
  return q;
}

FactorizedProposal gaussian_toy_matched_proposal() {
  FactorizedProposal q;
  for (std::size_t j = 0; j < kToyBlocks; ++j) {
    q.blocks.push_back(BlockProposal::from_density(DiagGaussian{{0.0}, {kToyVariance}}));
  }
  return q;
}

std::string to_string(ComponentFamily family) {
  return family == ComponentFamily::gaussian ? "gaussian" : "student-t";
}

ComponentFamily parse_component_family(const std::string& text) {
  if (text == "gaussian" || text == "gauss") return ComponentFamily::gaussian;
  if (text == "student-t" || text == "t") return ComponentFamily::student_t;
  throw std::invalid_argument("unknown component family '" + text + "'");
}

std::string to_string(LabelProposal mode) {
  return mode == LabelProposal::prior ? "prior" : "responsibility";
}

LabelProposal parse_label_proposal(const std::string& text) {
  if (text == "prior") return LabelProposal::prior;
  if (text == "responsibility") return LabelProposal::responsibility;
  throw std::invalid_argument("unknown label proposal '" + text + "'");
}

void DmmSpec::validate() const {
  if (components < 1 || mixing_concentration.size() != components) {
    throw std::invalid_argument("DmmSpec: need one mixing concentration per component");
  }
  sinfl::validate(DensitySpec{Dirichlet{mixing_concentration}});
  auto positive = [](double v) { return v > 0.0 && std::isfinite(v); };
  if (!std::isfinite(mean_prior_location) || !positive(mean_prior_scale) ||
      !positive(mean_prior_dof) || !positive(variance_prior_sigma2) ||
      !positive(variance_prior_dof) || !positive(dof_prior_shape) || !positive(dof_prior_scale)) {
    throw std::domain_error("DmmSpec: prior parameters out of domain");
  }
}

double dmm_component_log_pdf(const DmmSpec& spec, double x, std::span<const double> gamma) {
  if (spec.family == ComponentFamily::gaussian) {
    return normal_log_pdf(x, gamma[0], 1.0);
  }
  if (!(gamma[1] > 0.0) || !(gamma[2] > 0.0)) {
    return kNegInfinity;
  }
  return student_t_log_pdf(x, gamma[0], std::sqrt(gamma[1]), gamma[2]);
}

FactorizedModel dmm_model(const DmmSpec& spec, Observations data) {
  spec.validate();
  if (!data) {
    throw std::invalid_argument("dmm_model: no data");
  }
  const std::size_t K = spec.components;
  const std::size_t n = data->size();
  const Dirichlet mixing_prior{spec.mixing_concentration};

  auto global_prior = [mixing_prior, K, n](std::span<const double> phi) {
    return global_log_density(phi, mixing_prior, n,
                              [](std::span<const double> p, std::size_t, std::size_t j) {
                                return std::log(p[j]);
                              });
  };

  std::vector<FactorizedModel::Block> blocks;
  for (std::size_t j = 0; j < K; ++j) {
    blocks.push_back(
        {spec.block_dim(), [spec](std::span<const double> gamma) { return block_prior(spec, gamma); },
         [spec, data, j, K](std::span<const double> phi, std::span<const double> gamma) {
           double ll = 0.0;
           const auto& d = *data;
           for (std::size_t i = 0; i < d.size(); ++i) {
             if (label_at(phi, K, i) == j) {
               ll += dmm_component_log_pdf(spec, d[i], gamma);
             }
           }
           return ll;
         }});
  }
  return FactorizedModel{K + n, std::move(global_prior), std::move(blocks)};
}

std::vector<double> dmm_point(std::span<const double> weights, std::span<const std::size_t> labels,
                              std::span<const std::vector<double>> components) {
  std::vector<double> point(weights.begin(), weights.end());
  for (auto l : labels) point.push_back(static_cast<double>(l));
  for (const auto& c : components) point.insert(point.end(), c.begin(), c.end());
  return point;
}

FactorizedProposal dmm_prior_proposal(const DmmSpec& spec, std::size_t observations) {
  spec.validate();
  FactorizedProposal q{global_proposal(Dirichlet{spec.mixing_concentration}, observations, nullptr),
                       {}};
  for (std::size_t j = 0; j < spec.components; ++j) {
    q.blocks.push_back(block_prior_proposal(spec));
  }
  return q;
}

CenteredKernel dmm_kernel(const DmmSpec& spec, Observations data, KernelBandwidths bandwidths,
                          LabelProposal labels) {
  spec.validate();
  bandwidths.validate();
  if (!data) {
    throw std::invalid_argument("dmm_kernel: no data");
  }
  return [spec, data, bandwidths, labels](std::span<const double> center) {
    const std::size_t K = spec.components;
    const std::size_t n = data->size();
    const std::size_t bd = spec.block_dim();
    auto component = [&](std::size_t j) { return center.subspan(K + n + j * bd, bd); };

    std::shared_ptr<const std::vector<double>> table;
    if (labels == LabelProposal::responsibility) {
      auto t = std::make_shared<std::vector<double>>(n * K);
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < K; ++j) {
          (*t)[i * K + j] = dmm_component_log_pdf(spec, (*data)[i], component(j));
        }
      }
      table = std::move(t);
    }

    FactorizedProposal q{
        global_proposal(dirichlet_kernel(center.first(K), bandwidths.simplex_concentration), n,
                        std::move(table)),
        {}};
    for (std::size_t j = 0; j < K; ++j) {
      const auto c = component(j);
      if (spec.family == ComponentFamily::gaussian) {
        q.blocks.push_back(BlockProposal::from_density(
            DiagGaussian{{c[0]}, {bandwidths.mean_scale * bandwidths.mean_scale}}));
        continue;
      }
      const StudentT mean_law{c[0], bandwidths.mean_scale, bandwidths.mean_dof};
      const ScalarInverseWishart variance_law = inverse_wishart_kernel(c[1], bandwidths.positive_cv);
      const Gamma dof_law = gamma_kernel(c[2], bandwidths.positive_cv);
      q.blocks.emplace_back(
          3,
          [=](RandomSource& rng) {
            const double mean = draw_student_t(rng, mean_law.location, mean_law.scale, mean_law.dof);
            const double variance =
                0.5 * variance_law.sigma2 / draw_gamma(rng, 0.5 * variance_law.dof, 1.0);
            const double dof = draw_gamma(rng, dof_law.shape, dof_law.scale);
            return std::vector<double>{mean, variance, dof};
          },
          [=](std::span<const double> gamma) {
            return student_t_log_pdf(gamma[0], mean_law.location, mean_law.scale, mean_law.dof) +
                   inverse_gamma_log_pdf(gamma[1], 0.5 * variance_law.dof,
                                         0.5 * variance_law.sigma2) +
                   gamma_log_pdf(gamma[2], dof_law.shape, dof_law.scale);
          });
    }
    return q;
  };
}

TestFunction dmm_sorted_means(const DmmSpec& spec, std::size_t observations) {
  const std::size_t K = spec.components;
  const std::size_t base = K + observations;
  const std::size_t bd = spec.block_dim();
  return TestFunction{K, [=](std::span<const double> x, std::span<double> out) {
                        for (std::size_t j = 0; j < K; ++j) out[j] = x[base + j * bd];
                        std::sort(out.begin(), out.end());
                      }};
}

SyntheticDataset make_synthetic(const SyntheticConfig& config) {
  if (!(config.mixing >= 0.0 && config.mixing <= 1.0)) {
    throw std::invalid_argument("make_synthetic: mixing must lie in [0, 1]");
  }
  if (config.kind == ComponentFamily::student_t && !(config.dof > 0.0)) {
    throw std::invalid_argument("make_synthetic: dof must be positive");
  }
  RandomSource rng{config.seed};
  SyntheticDataset out;
  out.kind = config.kind;
  out.means = config.means;
  out.seed = config.seed;
  out.dof = config.dof;
  out.mixing = config.mixing;
  out.observations.reserve(config.size);
  for (std::size_t i = 0; i < config.size; ++i) {
    const double mean = rng.uniform() < config.mixing ? config.means[0] : config.means[1];
    out.observations.push_back(config.kind == ComponentFamily::gaussian
                                   ? draw_normal(rng, mean, 1.0)
                                   : draw_student_t(rng, mean, 1.0, config.dof));
  }
  return out;
}

void write_dataset(std::ostream& out, const SyntheticDataset& data) {
  fmt::print(out, "# sinfl synthetic dataset v1\n");
  fmt::print(out, "# kind={}\n", to_string(data.kind));
  fmt::print(out, "# seed={}\n", data.seed);
  fmt::print(out, "# means={},{}\n", data.means[0], data.means[1]);
  fmt::print(out, "# dof={}\n", data.dof);
  fmt::print(out, "# mixing={}\n", data.mixing);
  fmt::print(out, "# n={}\n", data.observations.size());
  for (double x : data.observations) fmt::print(out, "{}\n", x);
}

void write_dataset(const std::filesystem::path& path, const SyntheticDataset& data) {
  std::ofstream out{path};
  if (!out) {
    throw std::runtime_error("cannot open " + path.string() + " for writing");
  }
  write_dataset(out, data);
  if (!out) {
    throw std::runtime_error("write failed for " + path.string());
  }
}

SyntheticDataset read_dataset(std::istream& in) {
  SyntheticDataset data;
  std::optional<std::size_t> declared;
  std::string line;
  while (std::getline(in, line)) {
    const auto text = trim(line);
    if (text.empty()) continue;
    if (text.front() == '#') {
      const auto body = trim(text.substr(1));
      const auto eq = body.find('=');
      if (eq == std::string_view::npos) continue;
      const auto key = body.substr(0, eq);
      const auto value = body.substr(eq + 1);
      if (key == "kind") {
        data.kind = parse_component_family(std::string{value});
      } else if (key == "seed") {
        data.seed = std::stoull(std::string{value});
      } else if (key == "means") {
        const auto comma = value.find(',');
        if (comma == std::string_view::npos) {
          throw std::runtime_error("dataset: malformed means header");
        }
        data.means = {parse_double(value.substr(0, comma)), parse_double(value.substr(comma + 1))};
      } else if (key == "dof") {
        data.dof = parse_double(value);
      } else if (key == "mixing") {
        data.mixing = parse_double(value);
      } else if (key == "n") {
        declared = std::stoull(std::string{value});
      }
      continue;
    }
    data.observations.push_back(parse_double(text));
  }
  if (declared && *declared != data.observations.size()) {
    throw std::runtime_error("dataset: header declares " + std::to_string(*declared) +
                             " observations, found " + std::to_string(data.observations.size()));
  }
  return data;
}

SyntheticDataset read_dataset(const std::filesystem::path& path) {
  std::ifstream in{path};
  if (!in) {
    throw std::runtime_error("cannot open " + path.string());
  }
  return read_dataset(in);
}

}  // namespace sinfl
