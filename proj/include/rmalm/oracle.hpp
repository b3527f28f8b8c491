// Deterministic reference solutions for desk-scale instances.
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "rmalm/core.hpp"
#include "rmalm/metrics.hpp"
#include "rmalm/solver.hpp"

namespace rmalm {

struct OracleOptions {
  double c = 10.0;
  long max_outer = 100'000;
  /// Subproblem tolerance; defaults to tol / 100.
  std::optional<double> inner_tol;
};

struct OracleResult {
  Vector x_opt;
  Vector y_star;
  double f_opt = 0.0;
  long outer_iters = 0;
  double stationarity = 0.0;     // ||x - P_X(x - grad f - sum y_j grad h_j)||
  double complementarity = 0.0;  // max_j |y_j h_j(x)|
  double max_violation = 0.0;
};

/// Deterministic ALM with exact subproblems, run until
/// max(||dx||, ||dy|| / c, max violation) <= tol.
OracleResult solve_exact(const StochasticProblem& prob, double tol, const OracleOptions& opts = {});

/// One exact ALM step from y: x_hat = argmin_X L(., y, c), y_hat = max(0, y + c h(x_hat)).
struct AlmStep {
  Vector x;
  Vector y;
};
AlmStep exact_alm_step(const StochasticProblem& prob, const Vector& y, double c, double inner_tol,
                       const std::optional<Vector>& warm_start = std::nullopt);

/// KKT residuals of a primal-dual pair.
double kkt_stationarity(const StochasticProblem& prob, const Vector& x, const Vector& y);
double kkt_complementarity(const StochasticProblem& prob, const Vector& x, const Vector& y);

struct BestIterate {
  Vector x;
  std::size_t trace = 0;
  std::size_t iteration = 0;
  double objective = 0.0;
};

/// Lowest-objective iterate among those with max violation <= feas_tol, over
/// every iterate of every trace. Ties go to the earliest (trace, iteration).
/// Objectives come from `evaluator` when given, else from prob.objective.
BestIterate best_feasible_iterate(const std::vector<SolveTrace>& traces, const StochasticProblem& prob,
                                  double feas_tol = 1e-6, const MetricsEvaluator* evaluator = nullptr);

/// 64-bit FNV-1a, hex encoded.
std::string fnv1a_hex(const std::string& text);

void write_ground_truth(const std::string& path, const GroundTruth& gt);
GroundTruth read_ground_truth(const std::string& path);
std::string ground_truth_json(const GroundTruth& gt);
GroundTruth parse_ground_truth(const std::string& text);

}  // namespace rmalm
