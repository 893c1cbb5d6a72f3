// Executes seeded experiment grids: one cell per (scheme, dimension,
// repetition), each advancing k lock-stepped adaptive chains and reporting
// ESS diagnostics. Results are deterministic given (config, seed) at any
// thread count.
#pragma once

#include "eigmala/config.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace eigmala {

struct RunRecord {
  std::string target;
  std::string scheme;
  int d = 0;
  std::uint64_t seed = 0;  // derived cell seed
  double median_ess = 0.0;
  double wall_seconds = 0.0;     // sampling loop only
  double ess_per_second = 0.0;
  double acceptance_rate = 0.0;
  double final_sin2 = 0.0;  // NaN when no ground-truth eigenvector exists
  std::string status = "ok";  // ok | stuck | failed
};

// sin^2 distance between the learned and true leading eigenvector, sampled
// every trace_stride iterations.
struct RecoveryTrace {
  std::string scheme;
  int d = 0;
  int repetition = 0;
  std::vector<long> iterations;
  std::vector<double> sin2;
};

struct RunResult {
  std::vector<RunRecord> records;
  std::vector<RecoveryTrace> traces;
  std::string manifest;
};

RunResult run_experiment(const ExperimentConfig& config, int threads = 1);

// CSV with header target,scheme,d,seed,median_ess,wall_seconds,
// ess_per_second,acceptance_rate,final_sin2,status; floats at 10 significant
// digits; rows in grid order.
std::string csv_string(const std::vector<RunRecord>& records);
void write_csv(const std::vector<RunRecord>& records, const std::string& path);
std::vector<RunRecord> read_csv(const std::string& path);

}  // namespace eigmala
