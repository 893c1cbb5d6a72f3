// Benchmark CLI: `run` executes a seeded experiment grid and writes CSV +
// manifest (+ recovery traces), `plot` renders SVGs from a results CSV, and
// `check` runs a quick invariant suite.

#include "eigmala/diagnostics.hpp"
#include "eigmala/errors.hpp"
#include "eigmala/mala.hpp"
#include "eigmala/plots.hpp"
#include "eigmala/runner.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace {

using namespace eigmala;

int cmd_run(const std::string& config_path,
            const std::vector<std::pair<std::string, std::string>>& overrides,
            const std::string& outdir, int threads) {
  ExperimentConfig config = parse_config_file(config_path);
  for (const auto& [key, value] : overrides) apply_override(config, key, value);
  config.validate();

  const RunResult result = run_experiment(config, threads);
  std::filesystem::create_directories(outdir);
  write_csv(result.records, outdir + "/results.csv");
  {
    std::ofstream manifest(outdir + "/manifest.txt", std::ios::binary);
    manifest << result.manifest;
  }
  if (!result.traces.empty()) {
    std::filesystem::create_directories(outdir + "/traces");
    for (const RecoveryTrace& trace : result.traces) {
      std::ostringstream name;
      name << outdir << "/traces/sin2_" << trace.scheme << "_d" << trace.d << "_rep"
           << trace.repetition << ".csv";
      std::ofstream out(name.str(), std::ios::binary);
      out << "iteration,sin2\n";
      char buffer[64];
      for (std::size_t i = 0; i < trace.sin2.size(); ++i) {
        std::snprintf(buffer, sizeof(buffer), "%ld,%.10g\n", trace.iterations[i],
                      trace.sin2[i]);
        out << buffer;
      }
    }
  }

  int failed = 0;
  for (const RunRecord& r : result.records) {
    if (r.status != "ok") ++failed;
  }
  std::printf("%zu cells, %d not ok; results in %s/results.csv\n", result.records.size(),
              failed, outdir.c_str());
  return failed == 0 ? 0 : 1;
}

int cmd_plot(const std::string& csv_path, const std::string& outdir) {
  const std::vector<RunRecord> records = read_csv(csv_path);
  std::vector<RecoveryTrace> traces;
  const auto trace_dir = std::filesystem::path(csv_path).parent_path() / "traces";
  if (std::filesystem::is_directory(trace_dir)) {
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(trace_dir)) {
      if (entry.path().extension() == ".csv") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& file : files) {
      RecoveryTrace trace;
      // File names look like sin2_<scheme>_d<d>_rep<r>.csv.
      const std::string stem = file.stem().string();
      std::size_t d_pos = stem.rfind("_d");
      std::size_t rep_pos = stem.rfind("_rep");
      if (d_pos == std::string::npos || rep_pos == std::string::npos || d_pos < 5) continue;
      trace.scheme = stem.substr(5, d_pos - 5);
      trace.d = std::stoi(stem.substr(d_pos + 2, rep_pos - d_pos - 2));
      trace.repetition = std::stoi(stem.substr(rep_pos + 4));
      std::ifstream in(file);
      std::string line;
      std::getline(in, line);  // header
      while (std::getline(in, line)) {
        const auto comma = line.find(',');
        if (comma == std::string::npos) continue;
        trace.iterations.push_back(std::stol(line.substr(0, comma)));
        trace.sin2.push_back(std::stod(line.substr(comma + 1)));
      }
      if (!trace.sin2.empty()) traces.push_back(std::move(trace));
    }
  }
  emit_plots(records, traces, outdir);
  std::printf("plots written to %s\n", outdir.c_str());
  return 0;
}

bool report(const char* name, bool ok) {
  std::printf("%s  %s\n", ok ? "ok  " : "FAIL", name);
  return ok;
}

// Quick invariant suite over the library's core contracts.
int cmd_check() {
  bool all = true;
  {
    Rng rng(7);
    Eigen::MatrixXd raw(80, 8);
    for (int j = 0; j < 8; ++j) raw.col(j) = rng.normal_vector(80);
    const Eigen::MatrixXd v = gram_schmidt_project(raw);
    const HouseholderChain chain = build_orthogonal_factor(v);
    const Eigen::MatrixXd q = chain_dense(chain);
    all &= report("householder column property",
                  (q.leftCols(8) - v).cwiseAbs().maxCoeff() <= 1e-10);
    all &= report("householder chain orthogonality",
                  (q.transpose() * q - Eigen::MatrixXd::Identity(80, 80)).cwiseAbs().maxCoeff() <=
                      1e-10);
    all &= report("gram-schmidt idempotence",
                  (gram_schmidt_project(v) - v).cwiseAbs().maxCoeff() <= 1e-10);
  }
  {
    Rng rng(11);
    const Eigen::Index d = 25;
    Eigen::MatrixXd g(d, d);
    for (Eigen::Index j = 0; j < d; ++j) g.col(j) = rng.normal_vector(d);
    const Eigen::MatrixXd sym = 0.5 * (g + g.transpose());
    std::vector<Preconditioner> variants;
    variants.push_back(Preconditioner::identity(d));
    variants.push_back(Preconditioner::diagonal(Eigen::VectorXd::LinSpaced(d, 0.5, 3.0)));
    variants.push_back(Preconditioner::dense_factor(
        sym + Eigen::MatrixXd::Identity(d, d) * (std::abs(sym_eig(sym).values.minCoeff()) + 1.0)));
    Eigen::MatrixXd basis(d, 3);
    for (int j = 0; j < 3; ++j) basis.col(j) = rng.normal_vector(d);
    basis = gram_schmidt_project(basis);
    variants.push_back(Preconditioner::eigen_chain(build_orthogonal_factor(basis),
                                                   Eigen::VectorXd::LinSpaced(d, 0.2, 2.0)));
    Eigen::MatrixXd lowrank(d, 3);
    for (int j = 0; j < 3; ++j) lowrank.col(j) = rng.normal_vector(d);
    variants.push_back(
        Preconditioner::diag_low_rank(Eigen::VectorXd::LinSpaced(d, 0.3, 1.4), lowrank));
    bool ok = true;
    for (const auto& p : variants) {
      const Eigen::VectorXd x = rng.normal_vector(d);
      ok &= (p.apply_L_inv(p.apply_L(x)) - x).norm() <= 1e-8 * std::max(1.0, x.norm());
    }
    all &= report("preconditioner round trips", ok);
  }
  {
    const TargetModel target = xy_mean_field(10, 3.0);
    Rng rng(5);
    bool ok = true;
    for (int trial = 0; trial < 5; ++trial) {
      const Eigen::VectorXd theta = rng.normal_vector(10) * 2.0;
      Eigen::VectorXd slow(10);
      const double beta = 3.0;
      for (int k = 0; k < 10; ++k) {
        double acc = 0.0;
        for (int i = 0; i < 10; ++i) acc += std::sin(theta[k] - theta[i]);
        slow[k] = -(beta / 10.0) * acc;
      }
      ok &= (target.grad_log_density(theta) - slow).cwiseAbs().maxCoeff() <= 1e-10;
    }
    all &= report("xy gradient vs double-sum oracle", ok);
  }
  {
    const TargetModel target = make_tailored_gaussian(12, 2, 99);
    const Preconditioner p = Preconditioner::identity(12, 0.4);
    Rng rng(3);
    bool ok = true;
    for (int trial = 0; trial < 10; ++trial) {
      const Eigen::VectorXd x = sample_exact(target, rng);
      const Eigen::VectorXd y = sample_exact(target, rng);
      const double fwd = log_accept_ratio(x, y, target, p);
      const double bwd = log_accept_ratio(y, x, target, p);
      ok &= std::abs(fwd + bwd) <= 1e-10 * std::max(1.0, std::abs(fwd));
    }
    all &= report("kernel detailed-balance antisymmetry", ok);
  }
  {
    ExperimentConfig config;
    config.target = TargetKind::tailored_gaussian;
    config.k_significant = 1;
    config.schemes = {Scheme::eigen};
    config.dims = {12};
    config.m = 2;
    config.iterations.per_sqrt_dim = false;
    config.iterations.absolute = 300;
    config.repetitions = 2;
    config.real_timing = false;
    const std::string a = csv_string(run_experiment(config, 1).records);
    const std::string b = csv_string(run_experiment(config, 2).records);
    all &= report("grid determinism across thread counts", a == b);
  }
  return all ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adaptive-MCMC benchmark harness"};
  app.require_subcommand(1);
  app.footer(config_keys_help());

  auto* run = app.add_subcommand("run", "Run a seeded experiment grid");
  std::string config_path;
  std::string outdir = "out";
  int threads = 1;
  run->add_option("config", config_path, "Config file path")->required();
  run->add_option("--out", outdir, "Output directory (default: out)");
  run->add_option("--threads", threads, "Worker threads over grid cells");
  // Every config key doubles as an override flag.
  static const char* kKeys[] = {
      "target", "K", "rank", "beta", "scheme", "dims", "m", "iterations", "chains",
      "repetitions", "burn_in", "seed", "init", "alpha_pca", "c_pca", "alpha_general",
      "alpha_star", "sigma0", "vi_iterations", "vi_batch", "vi_lr_mu", "vi_lr_delta",
      "vi_lr_v", "record_sin2", "trace_stride", "timing"};
  std::map<std::string, std::string> override_values;
  for (const char* key : kKeys) {
    run->add_option("--" + std::string(key), override_values[key],
                    "Override config key '" + std::string(key) + "'");
  }

  auto* check = app.add_subcommand("check", "Run the quick invariant suite");

  auto* plot = app.add_subcommand("plot", "Render SVG plots from a results CSV");
  std::string csv_path;
  std::string plot_outdir = "out";
  plot->add_option("csv", csv_path, "results.csv from a previous run")->required();
  plot->add_option("--out", plot_outdir, "Output directory for SVGs");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      std::vector<std::pair<std::string, std::string>> overrides;
      for (const char* key : kKeys) {
        if (run->count("--" + std::string(key)) > 0) {
          overrides.emplace_back(key, override_values[key]);
        }
      }
      return cmd_run(config_path, overrides, outdir, threads);
    }
    if (check->parsed()) return cmd_check();
    if (plot->parsed()) return cmd_plot(csv_path, plot_outdir);
  } catch (const ConfigError& err) {
    std::fprintf(stderr, "config error: %s\n", err.what());
    return 2;
  } catch (const std::exception& err) {
    std::fprintf(stderr, "error: %s\n", err.what());
    return 1;
  }
  return 0;
}
