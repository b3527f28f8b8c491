// Batch experiment runner behind the command-line tool: JSON config parsing
// and validation, instance construction, parallel per-seed runs, metrics and
// manifest files, ground truth and rate reports.
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "rmalm/baseline.hpp"
#include "rmalm/core.hpp"
#include "rmalm/metrics.hpp"
#include "rmalm/oracle.hpp"
#include "rmalm/salm.hpp"
#include "rmalm/solver.hpp"
#include "rmalm/theory.hpp"

namespace rmalm {

enum class SolverKind { Rmalm, Salm, Pdsg, Oracle };

struct ExperimentConfig {
  nlohmann::json raw;      // the validated document, defaults filled in
  nlohmann::json problem;  // the "problem" section
  SolverKind solver = SolverKind::Rmalm;
  RmalmConfig rmalm;
  SalmConfig salm;
  PdsgConfig pdsg;
  double oracle_tol = 1e-10;
  OracleOptions oracle;
  std::vector<std::uint64_t> seeds{0};
  unsigned threads = 1;
  std::string output_dir = "out";
  std::optional<std::string> ground_truth_path;
  bool compute_ground_truth = false;
  std::size_t heldout_samples = 100000;
  std::optional<std::uint64_t> heldout_seed;
  std::optional<double> complexity_eps;  // budget to reach eps and eps/4
};

/// Parses and validates a config document. Every problem found (unknown keys,
/// wrong types, out-of-range values) is reported in one Validation error.
ExperimentConfig parse_experiment_config(const std::string& json_text);
ExperimentConfig load_experiment_config(const std::string& path);

/// A built instance plus whatever reference data its generator knows.
struct BuiltProblem {
  StochasticProblem problem;
  std::string instance_hash;
  std::optional<GroundTruth> analytic;  // closed-form solution, when available
  std::optional<double> alpha;          // dual strong concavity, when computable
  nlohmann::json data;                  // generated instance data for `generate`
};

BuiltProblem build_problem(const nlohmann::json& problem_section);

struct RunSummary {
  std::vector<std::string> files;
  nlohmann::json summary;
};

/// Runs the configured solver for every seed and writes
/// <out>/<solver>_seed<s>.csv, a manifest next to each CSV and summary.json.
RunSummary run_experiment(const ExperimentConfig& cfg);

/// Solves the instance with the deterministic oracle and writes
/// <out>/ground_truth.json.
GroundTruth run_oracle(const ExperimentConfig& cfg);

/// Writes the instance data to <out>/instance.json.
std::string run_generate(const ExperimentConfig& cfg);

struct RateReport {
  std::vector<double> k;
  std::vector<double> mean_dist_sq_y;
  RateFit fit;
  std::optional<double> predicted_rho;  // 2 theta when alpha and c are known
  double measured_rho = 0.0;            // exp(slope)
  std::size_t seeds = 0;
};

/// Averages dist_sq_y across >= 2 metrics CSVs over the k present in all of
/// them, fits the linear rate and compares with 2 theta(alpha, c).
RateReport rate_report(const std::vector<std::string>& csv_paths, std::optional<double> alpha,
                       std::optional<double> c, std::optional<long> max_k = std::nullopt);
void write_rate_report(const std::string& path, const RateReport& report);

/// Process exit code for an error kind: 2 validation, 3 numerical, 1 I/O.
int exit_code_for(ErrorKind kind);

}  // namespace rmalm
