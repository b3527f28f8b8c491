// Primal-dual stochastic gradient baseline (plain Lagrangian, alternating
// primal descent and dual ascent with a polynomially decaying step).
#pragma once

#include <cstdint>
#include <vector>

#include "rmalm/core.hpp"
#include "rmalm/metrics.hpp"
#include "rmalm/solver.hpp"

namespace rmalm {

struct PdsgConfig {
  double step0 = 0.1;
  double decay = 0.5;  // gamma_t = step0 / (1 + t)^decay
  std::size_t batch_obj = 50;
  std::size_t batch_con = 50;
  long iters = 10'000;
  std::uint64_t seed = 0;
  long record_every = 100;

  void validate() const;
};

struct PdsgResult {
  SolveTrace last;      // x^t, y^t at recorded t
  SolveTrace averaged;  // running uniform averages of x^t and y^t
};

PdsgResult pdsg_solve(const StochasticProblem& prob, const PdsgConfig& cfg,
                      const MetricsEvaluator* evaluator = nullptr, const MetricsCallback& callback = {});

/// xbar^k = (1/k) sum_{t<=k} x^t, computed incrementally.
std::vector<Vector> running_average(const std::vector<Vector>& iterates);

}  // namespace rmalm
