#include "eigmala/config.hpp"

#include "eigmala/errors.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace eigmala {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

long parse_long(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const long v = std::stol(value, &pos);
    if (pos != value.size()) throw std::invalid_argument("");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("key '" + key + "': expected an integer, got '" + value + "'");
  }
}

double parse_double(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(value, &pos);
    if (pos != value.size()) throw std::invalid_argument("");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("key '" + key + "': expected a number, got '" + value + "'");
  }
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw ConfigError("key '" + key + "': expected true/false, got '" + value + "'");
}

std::vector<std::string> split_commas(const std::string& value) {
  std::vector<std::string> parts;
  std::stringstream stream(value);
  std::string item;
  while (std::getline(stream, item, ',')) parts.push_back(trim(item));
  return parts;
}

}  // namespace

std::string target_name(TargetKind t) {
  switch (t) {
    case TargetKind::tailored_gaussian: return "tailored_gaussian";
    case TargetKind::diag_lowrank_gaussian: return "diag_lowrank_gaussian";
    case TargetKind::logistic_regression: return "logistic_regression";
    case TargetKind::xy_mean_field: return "xy_mean_field";
  }
  return "unknown";
}

TargetKind target_from_name(const std::string& name) {
  if (name == "tailored_gaussian") return TargetKind::tailored_gaussian;
  if (name == "diag_lowrank_gaussian") return TargetKind::diag_lowrank_gaussian;
  if (name == "logistic_regression") return TargetKind::logistic_regression;
  if (name == "xy_mean_field") return TargetKind::xy_mean_field;
  throw ConfigError("unknown target '" + name + "'");
}

long IterationSpec::resolve(Eigen::Index d) const {
  if (!per_sqrt_dim) return absolute;
  return static_cast<long>(std::llround(coef * std::sqrt(static_cast<double>(d))));
}

std::string IterationSpec::to_string() const {
  if (!per_sqrt_dim) return std::to_string(absolute);
  std::ostringstream out;
  out << coef << "*sqrt(d)";
  return out.str();
}

AdaptConfig ExperimentConfig::adapt_config(Scheme scheme) const {
  AdaptConfig cfg;
  cfg.scheme = scheme;
  cfg.m = m;
  cfg.alpha_pca = alpha_pca;
  cfg.c_pca = c_pca;
  cfg.alpha_general = alpha_general;
  cfg.alpha_star = alpha_star;
  cfg.sigma0 = sigma0;
  return cfg;
}

void ExperimentConfig::validate() const {
  if (dims.empty()) throw ConfigError("key 'dims': must list at least one dimension");
  for (const int d : dims) {
    if (d < 2) throw ConfigError("key 'dims': dimensions must be >= 2");
  }
  if (schemes.empty()) throw ConfigError("key 'scheme': must list at least one scheme");
  if (repetitions < 1) throw ConfigError("key 'repetitions': must be >= 1");
  if (chains < 1) throw ConfigError("key 'chains': must be >= 1");
  if (burn_in < 0.0 || burn_in >= 1.0) throw ConfigError("key 'burn_in': must lie in [0, 1)");
  if (m < 1) throw ConfigError("key 'm': must be >= 1");
  for (const int d : dims) {
    if (m > d) throw ConfigError("key 'm': exceeds dimension " + std::to_string(d));
  }
  if (alpha_pca <= 0.0 || alpha_pca > 1.0) throw ConfigError("key 'alpha_pca': must lie in (0, 1]");
  if (alpha_general <= 0.0 || alpha_general > 1.0) {
    throw ConfigError("key 'alpha_general': must lie in (0, 1]");
  }
  if (c_pca <= 0.0) throw ConfigError("key 'c_pca': must be positive");
  if (alpha_star <= 0.0 || alpha_star > 1.0) throw ConfigError("key 'alpha_star': must lie in (0, 1]");
  if (sigma0 <= 0.0) throw ConfigError("key 'sigma0': must be positive");
  if (iterations.resolve(dims.front()) < 1) throw ConfigError("key 'iterations': resolves to < 1");
  if (vi_batch < 1) throw ConfigError("key 'vi_batch': must be >= 1");
  if (vi_iterations < 0) throw ConfigError("key 'vi_iterations': must be >= 0");
  if (trace_stride < 1) throw ConfigError("key 'trace_stride': must be >= 1");
  if (target == TargetKind::tailored_gaussian) {
    for (const int d : dims) {
      if (k_significant < 1 || k_significant >= d) {
        throw ConfigError("key 'K': must satisfy 1 <= K < d");
      }
    }
  }
  if (target == TargetKind::diag_lowrank_gaussian) {
    for (const int d : dims) {
      if (rank < 1 || rank >= d) throw ConfigError("key 'rank': must satisfy 1 <= rank < d");
    }
  }
  if (init == InitKind::equilibrium && (target == TargetKind::logistic_regression ||
                                        target == TargetKind::xy_mean_field)) {
    throw ConfigError("key 'init': equilibrium requires a target with exact sampling");
  }
}

void apply_override(ExperimentConfig& config, const std::string& key,
                    const std::string& value) {
  if (key == "target") {
    config.target = target_from_name(value);
  } else if (key == "K") {
    config.k_significant = static_cast<int>(parse_long(key, value));
  } else if (key == "rank") {
    config.rank = static_cast<int>(parse_long(key, value));
  } else if (key == "beta") {
    config.beta = parse_double(key, value);
  } else if (key == "scheme") {
    config.schemes.clear();
    for (const auto& part : split_commas(value)) config.schemes.push_back(scheme_from_name(part));
  } else if (key == "dims") {
    config.dims.clear();
    for (const auto& part : split_commas(value)) {
      config.dims.push_back(static_cast<int>(parse_long(key, part)));
    }
  } else if (key == "m") {
    config.m = static_cast<int>(parse_long(key, value));
  } else if (key == "iterations") {
    const auto star = value.find("*sqrt(d)");
    if (star != std::string::npos && star + 8 == value.size()) {
      config.iterations.per_sqrt_dim = true;
      config.iterations.coef = parse_double(key, trim(value.substr(0, star)));
    } else {
      config.iterations.per_sqrt_dim = false;
      config.iterations.absolute = parse_long(key, value);
    }
  } else if (key == "chains") {
    config.chains = static_cast<int>(parse_long(key, value));
  } else if (key == "repetitions") {
    config.repetitions = static_cast<int>(parse_long(key, value));
  } else if (key == "burn_in") {
    config.burn_in = parse_double(key, value);
  } else if (key == "seed") {
    config.seed = static_cast<std::uint64_t>(parse_long(key, value));
  } else if (key == "init") {
    if (value == "auto") config.init = InitKind::auto_select;
    else if (value == "equilibrium") config.init = InitKind::equilibrium;
    else if (value == "mode") config.init = InitKind::mode;
    else throw ConfigError("key 'init': expected auto/equilibrium/mode, got '" + value + "'");
  } else if (key == "alpha_pca") {
    config.alpha_pca = parse_double(key, value);
  } else if (key == "c_pca") {
    config.c_pca = parse_double(key, value);
  } else if (key == "alpha_general") {
    config.alpha_general = parse_double(key, value);
  } else if (key == "alpha_star") {
    config.alpha_star = parse_double(key, value);
  } else if (key == "sigma0") {
    config.sigma0 = parse_double(key, value);
  } else if (key == "vi_iterations") {
    config.vi_iterations = parse_long(key, value);
  } else if (key == "vi_batch") {
    config.vi_batch = static_cast<int>(parse_long(key, value));
  } else if (key == "vi_lr_mu") {
    config.vi_lr_mu = parse_double(key, value);
  } else if (key == "vi_lr_delta") {
    config.vi_lr_delta = parse_double(key, value);
  } else if (key == "vi_lr_v") {
    config.vi_lr_v = parse_double(key, value);
  } else if (key == "record_sin2") {
    config.record_sin2 = parse_bool(key, value);
  } else if (key == "trace_stride") {
    config.trace_stride = static_cast<int>(parse_long(key, value));
  } else if (key == "timing") {
    if (value == "real") config.real_timing = true;
    else if (value == "none") config.real_timing = false;
    else throw ConfigError("key 'timing': expected real/none, got '" + value + "'");
  } else {
    throw ConfigError("unknown key '" + key + "'");
  }
}

ExperimentConfig parse_config_text(const std::string& text) {
  ExperimentConfig config;
  std::set<std::string> seen;
  std::stringstream stream(text);
  std::string line;
  int line_no = 0;
  while (std::getline(stream, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    apply_override(config, key, value);
    seen.insert(key);
  }
  if (!seen.count("target")) throw ConfigError("missing required key 'target'");
  if (!seen.count("scheme")) throw ConfigError("missing required key 'scheme'");
  config.validate();
  return config;
}

ExperimentConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config_text(buffer.str());
}

std::string render_config(const ExperimentConfig& config) {
  std::ostringstream out;
  out.precision(17);
  out << "target = " << target_name(config.target) << "\n";
  if (config.target == TargetKind::tailored_gaussian) out << "K = " << config.k_significant << "\n";
  if (config.target == TargetKind::diag_lowrank_gaussian) out << "rank = " << config.rank << "\n";
  if (config.target == TargetKind::xy_mean_field) out << "beta = " << config.beta << "\n";
  out << "scheme = ";
  for (std::size_t i = 0; i < config.schemes.size(); ++i) {
    out << (i ? "," : "") << scheme_name(config.schemes[i]);
  }
  out << "\n";
  out << "dims = ";
  for (std::size_t i = 0; i < config.dims.size(); ++i) out << (i ? "," : "") << config.dims[i];
  out << "\n";
  out << "m = " << config.m << "\n";
  out << "iterations = " << config.iterations.to_string() << "\n";
  out << "chains = " << config.chains << "\n";
  out << "repetitions = " << config.repetitions << "\n";
  out << "burn_in = " << config.burn_in << "\n";
  out << "seed = " << config.seed << "\n";
  out << "init = "
      << (config.init == InitKind::auto_select
              ? "auto"
              : (config.init == InitKind::equilibrium ? "equilibrium" : "mode"))
      << "\n";
  out << "alpha_pca = " << config.alpha_pca << "\n";
  out << "c_pca = " << config.c_pca << "\n";
  out << "alpha_general = " << config.alpha_general << "\n";
  out << "alpha_star = " << config.alpha_star << "\n";
  out << "sigma0 = " << config.sigma0 << "\n";
  out << "vi_iterations = " << config.vi_iterations << "\n";
  out << "vi_batch = " << config.vi_batch << "\n";
  out << "vi_lr_mu = " << config.vi_lr_mu << "\n";
  out << "vi_lr_delta = " << config.vi_lr_delta << "\n";
  out << "vi_lr_v = " << config.vi_lr_v << "\n";
  out << "record_sin2 = " << (config.record_sin2 ? "true" : "false") << "\n";
  out << "trace_stride = " << config.trace_stride << "\n";
  out << "timing = " << (config.real_timing ? "real" : "none") << "\n";
  return out.str();
}

std::string config_keys_help() {
  return
      "Config keys (flat 'key = value' lines, '#' comments):\n"
      "  target         tailored_gaussian | diag_lowrank_gaussian | logistic_regression |\n"
      "                 xy_mean_field (required)\n"
      "  K              significant eigenvalue count for tailored_gaussian (default 3)\n"
      "  rank           low-rank width for diag_lowrank_gaussian (default 32)\n"
      "  beta           XY inverse temperature (default 100)\n"
      "  scheme         comma list of none | diagonal | dense | eigen | eigen_identity |\n"
      "                 diagonal_plus_LR (required)\n"
      "  dims           comma list of dimensions (default 50)\n"
      "  m              learned eigenvector count (default 3)\n"
      "  iterations     absolute count or 'COEF*sqrt(d)' (default 500*sqrt(d))\n"
      "  chains         lock-stepped chains per run (default 2)\n"
      "  repetitions    repetitions per (scheme, d) cell (default 15)\n"
      "  burn_in        discarded fraction before ESS is measured (default 0.5)\n"
      "  seed           master seed (default 1)\n"
      "  init           auto | equilibrium | mode (default auto: equilibrium for\n"
      "                 Gaussian targets, mode otherwise)\n"
      "  alpha_pca      eigenvector learning-rate exponent (default 0.1)\n"
      "  c_pca          eigenvector learning-rate coefficient (default 1)\n"
      "  alpha_general  exponent of the other learning rates (default 0.7)\n"
      "  alpha_star     target acceptance rate (default 0.574)\n"
      "  sigma0         initial global proposal scale (default 1)\n"
      "  vi_iterations  pre-chain descent steps for diagonal_plus_LR (default 5000)\n"
      "  vi_batch       Monte Carlo batch size (default 10)\n"
      "  vi_lr_mu       mean learning rate (default 1e-3)\n"
      "  vi_lr_delta    diagonal learning rate (default 1e-3)\n"
      "  vi_lr_v        low-rank learning rate (default 1e-3)\n"
      "  record_sin2    collect eigenvector-recovery traces (default false)\n"
      "  trace_stride   iterations between trace samples (default 10)\n"
      "  timing         real | none; 'none' zeroes wall-clock fields so output\n"
      "                 bytes are reproducible (default real)\n";
}

}  // namespace eigmala
