#include "eigmala/runner.hpp"

#include "eigmala/diagnostics.hpp"
#include "eigmala/errors.hpp"
#include "eigmala/mala.hpp"
#include "eigmala/vi.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <memory>
#include <sstream>
#include <thread>

namespace eigmala {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct Cell {
  Scheme scheme;
  int d = 0;
  int repetition = 0;
};

std::uint64_t cell_seed_of(const ExperimentConfig& config, const Cell& cell) {
  std::ostringstream key;
  key << "cell|" << target_name(config.target) << "|" << scheme_name(cell.scheme) << "|d="
      << cell.d << "|rep=" << cell.repetition;
  return derive_seed(config.seed, key.str());
}

// The target realisation is shared across schemes at fixed (d, repetition)
// so scheme comparisons see the same problem instance.
std::uint64_t target_seed_of(const ExperimentConfig& config, const Cell& cell) {
  std::ostringstream key;
  key << "target|" << target_name(config.target) << "|d=" << cell.d
      << "|rep=" << cell.repetition;
  return derive_seed(config.seed, key.str());
}

TargetModel build_target(const ExperimentConfig& config, const Cell& cell) {
  switch (config.target) {
    case TargetKind::tailored_gaussian:
      return make_tailored_gaussian(cell.d, config.k_significant,
                                    target_seed_of(config, cell));
    case TargetKind::diag_lowrank_gaussian:
      return make_diag_lowrank_gaussian(cell.d, config.rank, target_seed_of(config, cell));
    case TargetKind::logistic_regression:
      return make_logistic_regression(cell.d, target_seed_of(config, cell));
    case TargetKind::xy_mean_field:
      return xy_mean_field(cell.d, config.beta);
  }
  throw ConfigError("unknown target kind");
}

Eigen::VectorXd initial_position(const ExperimentConfig& config, const TargetModel& target,
                                 Rng& init_rng) {
  const bool equilibrium =
      config.init == InitKind::equilibrium ||
      (config.init == InitKind::auto_select && target.gaussian.has_value());
  if (equilibrium) {
    if (!target.gaussian) {
      throw ConfigError("init = equilibrium requires a target with exact sampling");
    }
    return sample_exact(target, init_rng);
  }
  if (!target.mode) throw ConfigError("target has no mode to initialise at");
  return *target.mode;
}

struct CellOutput {
  RunRecord record;
  RecoveryTrace trace;
  bool has_trace = false;
  std::string vi_summary;  // for the manifest; empty unless VI ran
};

CellOutput run_cell(const ExperimentConfig& config, const Cell& cell) {
  CellOutput out;
  RunRecord& record = out.record;
  record.target = target_name(config.target);
  record.scheme = scheme_name(cell.scheme);
  record.d = cell.d;
  record.seed = cell_seed_of(config, cell);
  record.median_ess = kNaN;
  record.ess_per_second = kNaN;
  record.acceptance_rate = kNaN;
  record.final_sin2 = kNaN;

  try {
    const TargetModel target = build_target(config, cell);
    const Eigen::Index d = target.dim;
    const long n_iter = config.iterations.resolve(d);
    const int k = config.chains;

    // Per-chain streams are derived up front so scheduling cannot reorder
    // random number consumption.
    std::vector<ChainState> chains;
    chains.reserve(static_cast<std::size_t>(k));
    for (int j = 0; j < k; ++j) {
      Rng init_rng(derive_seed(record.seed, "init|" + std::to_string(j)));
      Rng chain_rng(derive_seed(record.seed, "chain|" + std::to_string(j)));
      chains.emplace_back(target, initial_position(config, target, init_rng),
                          std::move(chain_rng));
    }

    std::vector<Eigen::VectorXd> positions;
    positions.reserve(static_cast<std::size_t>(k));
    for (const auto& c : chains) positions.push_back(c.position);

    AdaptConfig adapt_cfg = config.adapt_config(cell.scheme);
    std::unique_ptr<Adapter> adapter;
    if (cell.scheme == Scheme::diagonal_plus_lr) {
      VIConfig vi_cfg;
      vi_cfg.lr_mu = config.vi_lr_mu;
      vi_cfg.lr_delta = config.vi_lr_delta;
      vi_cfg.lr_v = config.vi_lr_v;
      vi_cfg.batch = config.vi_batch;
      vi_cfg.iterations = config.vi_iterations;
      vi_cfg.rank = config.m;
      Rng vi_rng(derive_seed(record.seed, "vi"));
      Eigen::VectorXd vi_mu0 =
          target.mode ? *target.mode : Eigen::VectorXd::Zero(d).eval();
      const VIState vi_state = run_vi(target, vi_cfg, vi_rng, std::move(vi_mu0));
      std::ostringstream vi_note;
      vi_note.precision(6);
      vi_note << "vi: iterations=" << vi_state.iteration << " |mu|=" << vi_state.mu.norm()
              << " delta=[" << vi_state.delta.minCoeff() << "," << vi_state.delta.maxCoeff()
              << "] |V|_F=" << vi_state.v.norm();
      out.vi_summary = vi_note.str();
      adapter = std::make_unique<Adapter>(adapt_cfg, d, positions,
                                          vi_to_preconditioner(vi_state, config.sigma0));
    } else {
      adapter = std::make_unique<Adapter>(adapt_cfg, d, positions);
    }

    const bool trace_enabled = config.record_sin2 && target.gaussian.has_value();
    Eigen::VectorXd true_leading;
    if (target.gaussian) true_leading = target.gaussian->eigenvectors.col(0);
    if (trace_enabled) {
      out.has_trace = true;
      out.trace.scheme = record.scheme;
      out.trace.d = cell.d;
      out.trace.repetition = cell.repetition;
    }

    Eigen::MatrixXd output(n_iter, d);
    std::vector<double> alphas(static_cast<std::size_t>(k), 0.0);
    long accepted = 0;

    const auto t_start = std::chrono::steady_clock::now();
    for (long t = 0; t < n_iter; ++t) {
      for (int j = 0; j < k; ++j) {
        const StepOutcome outcome = step(chains[static_cast<std::size_t>(j)],
                                         adapter->preconditioner(), target);
        alphas[static_cast<std::size_t>(j)] = outcome.accept_prob;
        if (outcome.accepted) ++accepted;
        positions[static_cast<std::size_t>(j)] = chains[static_cast<std::size_t>(j)].position;
      }
      output.row(t) = positions[0];
      adapter->observe(positions, alphas);
      if (trace_enabled && (t % config.trace_stride == 0 || t + 1 == n_iter)) {
        out.trace.iterations.push_back(t + 1);
        out.trace.sin2.push_back(
            sin_squared(leading_direction(adapter->preconditioner(), d), true_leading));
      }
    }
    const auto t_stop = std::chrono::steady_clock::now();

    record.acceptance_rate =
        static_cast<double>(accepted) / static_cast<double>(n_iter * k);
    if (config.real_timing) {
      record.wall_seconds =
          std::chrono::duration<double>(t_stop - t_start).count();
    } else {
      record.wall_seconds = 0.0;  // reproducible-output mode
    }

    const EssReport report = median_over_coordinates(output, 1.0 - config.burn_in);
    if (report.valid) {
      record.median_ess = report.median_ess;
      record.ess_per_second =
          config.real_timing ? record.median_ess / record.wall_seconds : 0.0;
      record.status = "ok";
    } else {
      record.status = "stuck";
    }

    if (target.gaussian) {
      record.final_sin2 =
          sin_squared(leading_direction(adapter->preconditioner(), d), true_leading);
    }
  } catch (const std::exception& err) {
    record.status = "failed";
    std::fprintf(stderr, "cell %s/%s d=%d rep=%d failed: %s\n", record.target.c_str(),
                 record.scheme.c_str(), cell.d, cell.repetition, err.what());
  }
  return out;
}

std::string format_double(double value) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.10g", value);
  return buffer;
}

}  // namespace

RunResult run_experiment(const ExperimentConfig& config, int threads) {
  config.validate();

  std::vector<Cell> cells;
  for (const Scheme scheme : config.schemes) {
    for (const int d : config.dims) {
      for (int rep = 0; rep < config.repetitions; ++rep) {
        cells.push_back(Cell{scheme, d, rep});
      }
    }
  }

  std::vector<CellOutput> outputs(cells.size());
  const int workers = std::max(1, threads);
  std::atomic<std::size_t> next{0};
  auto work = [&]() {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= cells.size()) break;
      outputs[i] = run_cell(config, cells[i]);
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }

  RunResult result;
  std::ostringstream manifest;
  manifest << "# resolved configuration\n" << render_config(config) << "# cells\n";
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const RunRecord& record = outputs[i].record;
    result.records.push_back(record);
    if (outputs[i].has_trace) result.traces.push_back(outputs[i].trace);
    manifest << "cell scheme=" << record.scheme << " d=" << record.d
             << " rep=" << cells[i].repetition << " seed=" << record.seed
             << " status=" << record.status;
    if (!outputs[i].vi_summary.empty()) manifest << " " << outputs[i].vi_summary;
    manifest << "\n";
  }
  result.manifest = manifest.str();
  return result;
}

std::string csv_string(const std::vector<RunRecord>& records) {
  if (records.empty()) {
    throw std::invalid_argument("csv_string: no records to write");
  }
  std::ostringstream out;
  out << "target,scheme,d,seed,median_ess,wall_seconds,ess_per_second,acceptance_rate,"
         "final_sin2,status\n";
  for (const RunRecord& r : records) {
    out << r.target << ',' << r.scheme << ',' << r.d << ',' << r.seed << ','
        << format_double(r.median_ess) << ',' << format_double(r.wall_seconds) << ','
        << format_double(r.ess_per_second) << ',' << format_double(r.acceptance_rate) << ','
        << format_double(r.final_sin2) << ',' << r.status << '\n';
  }
  return out.str();
}

void write_csv(const std::vector<RunRecord>& records, const std::string& path) {
  const std::string content = csv_string(records);  // validates before touching the file
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("write_csv: cannot open '" + path + "'");
  out << content;
}

std::vector<RunRecord> read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_csv: cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("read_csv: empty file");
  std::vector<RunRecord> records;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream row(line);
    std::string field;
    RunRecord r;
    auto next_field = [&]() {
      if (!std::getline(row, field, ',')) {
        throw std::runtime_error("read_csv: malformed row '" + line + "'");
      }
      return field;
    };
    r.target = next_field();
    r.scheme = next_field();
    r.d = std::stoi(next_field());
    r.seed = std::stoull(next_field());
    r.median_ess = std::stod(next_field());
    r.wall_seconds = std::stod(next_field());
    r.ess_per_second = std::stod(next_field());
    r.acceptance_rate = std::stod(next_field());
    r.final_sin2 = std::stod(next_field());
    r.status = next_field();
    records.push_back(std::move(r));
  }
  return records;
}

}  // namespace eigmala
