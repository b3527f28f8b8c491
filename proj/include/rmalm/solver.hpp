// Robbins-Monro augmented Lagrangian method.
//
// Outer loop: multiplier updates y <- max(0, y + c h(x)) with a constant
// penalty c. Inner loop: S^{k+1} projected stochastic gradient steps on
// L(., y^k, c) with steps tau_s eta^k / (s + beta), where the budget grows
// geometrically, S^k = ceil(S0 * growth^k). There is no stopping test on the
// subproblem; the growing budget replaces it.
#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <vector>

#include "rmalm/auglag.hpp"
#include "rmalm/core.hpp"
#include "rmalm/metrics.hpp"

namespace rmalm {

struct RmalmConfig {
  double c = 10.0;
  long S0 = 5;
  double budget_growth = std::pow(1.7, 1.0001);
  double q = 1e-4;
  /// tau_s and eta^k; constant by default.
  std::function<double(long)> tau = [](long) { return 1.0; };
  std::function<double(long)> eta = [](long) { return 1.0; };
  double beta = 1.0;
  std::size_t batch_obj = 50;
  /// >= M means every constraint once per step.
  std::size_t batch_con = 50;
  long outer_iters = 15;
  std::uint64_t seed = 0;
  std::optional<long> budget_cap;
  long global_cap = 10'000'000;
  std::optional<Vector> x0;  // default project_X(0)
  std::optional<Vector> y0;  // default 0

  void validate() const;

  /// growth = rate^{-(1+q)} for a contraction rate in (0, 1).
  static double growth_from_rate(double rate, double q);
};

struct SolveTrace {
  std::vector<MetricsRow> rows;      // k = 0 (initial point) .. K
  std::vector<Vector> iterates;      // x^0 .. x^K
  std::vector<Vector> multipliers;   // y^0 .. y^K
  std::vector<long> budgets;         // S^1 .. S^K actually executed
  Vector x;
  Vector y;
  long cum_inner = 0;
};

double step_size(long s, long k, const RmalmConfig& cfg);
long subproblem_budget(long k, const RmalmConfig& cfg);

/// w_1 = x_start; w_{s+1} = P_X(w_s - gamma_s^k * stoch_grad(w_s)), s = 1..S-1; returns w_S.
Vector inner_loop(const StochasticProblem& prob, const Vector& x_start, const PenaltyState& st, long S,
                  long k, const RmalmConfig& cfg, RngStream& rng);

/// Runs K outer iterations. `evaluator` defaults to exact/held-out objective
/// evaluation without ground truth.
SolveTrace solve(const StochasticProblem& prob, const RmalmConfig& cfg,
                 const MetricsEvaluator* evaluator = nullptr, const MetricsCallback& callback = {});

}  // namespace rmalm
