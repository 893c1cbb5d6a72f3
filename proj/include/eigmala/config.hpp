// Flat key=value experiment configuration with documented keys. CLI flags
// override file values; the fully resolved config is echoed into the run
// manifest.
#pragma once

#include "eigmala/adaptation.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace eigmala {

enum class TargetKind {
  tailored_gaussian,
  diag_lowrank_gaussian,
  logistic_regression,
  xy_mean_field,
};

std::string target_name(TargetKind t);
TargetKind target_from_name(const std::string& name);

enum class InitKind { auto_select, equilibrium, mode };

// Iteration budget: either an absolute count or coef * sqrt(d).
struct IterationSpec {
  bool per_sqrt_dim = true;
  double coef = 500.0;
  long absolute = 0;

  long resolve(Eigen::Index d) const;
  std::string to_string() const;
};

struct ExperimentConfig {
  TargetKind target = TargetKind::tailored_gaussian;
  int k_significant = 3;  // K, tailored Gaussian
  int rank = 32;          // diag+low-rank Gaussian target
  double beta = 100.0;    // XY inverse temperature

  std::vector<Scheme> schemes = {Scheme::eigen};
  std::vector<int> dims = {50};
  int m = 3;
  IterationSpec iterations;
  int chains = 2;
  int repetitions = 15;
  double burn_in = 0.5;
  std::uint64_t seed = 1;
  InitKind init = InitKind::auto_select;

  double alpha_pca = 0.1;
  double c_pca = 1.0;
  double alpha_general = 0.7;
  double alpha_star = 0.574;
  double sigma0 = 1.0;

  long vi_iterations = 5000;
  int vi_batch = 10;
  double vi_lr_mu = 1e-3;
  double vi_lr_delta = 1e-3;
  double vi_lr_v = 1e-3;

  bool record_sin2 = false;
  int trace_stride = 10;
  bool real_timing = true;  // "timing = real" | "timing = none"

  AdaptConfig adapt_config(Scheme scheme) const;
  void validate() const;  // throws ConfigError on inconsistent values
};

// Sets a single documented key; throws ConfigError for unknown keys or
// malformed values, naming the key.
void apply_override(ExperimentConfig& config, const std::string& key,
                    const std::string& value);

// Parses `key = value` lines ('#' comments, blank lines ignored). `target`
// and `scheme` are required; everything else has documented defaults.
ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig parse_config_file(const std::string& path);

// Round-trippable echo of the resolved configuration.
std::string render_config(const ExperimentConfig& config);

// One line per documented key, for --help.
std::string config_keys_help();

}  // namespace eigmala
