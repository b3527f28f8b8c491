#include "rmalm/solver.hpp"

#include <chrono>
#include <cmath>
#include <sstream>

namespace rmalm {

void RmalmConfig::validate() const {
  if (!(c > 0.0)) fail(ErrorKind::InvalidArgument, "rmalm: c must be positive");
  if (S0 <= 1) fail(ErrorKind::InvalidArgument, "rmalm: S0 must be > 1");
  if (!(budget_growth >= 1.0)) fail(ErrorKind::InvalidArgument, "rmalm: budget_growth must be >= 1");
  if (!(q > 0.0)) fail(ErrorKind::InvalidArgument, "rmalm: q must be positive");
  if (!(beta > 0.0)) fail(ErrorKind::InvalidArgument, "rmalm: beta must be positive");
  if (!tau || !eta) fail(ErrorKind::InvalidArgument, "rmalm: tau and eta schedules must be set");
  if (batch_obj < 1 || batch_con < 1) fail(ErrorKind::InvalidArgument, "rmalm: batch sizes must be >= 1");
  if (outer_iters < 0) fail(ErrorKind::InvalidArgument, "rmalm: outer_iters must be >= 0");
  if (budget_cap && *budget_cap < 2) fail(ErrorKind::InvalidArgument, "rmalm: budget_cap must be >= 2");
  if (global_cap < 1) fail(ErrorKind::InvalidArgument, "rmalm: global_cap must be positive");
}

double RmalmConfig::growth_from_rate(double rate, double q) {
  if (!(rate > 0.0 && rate < 1.0)) fail(ErrorKind::InvalidArgument, "contraction rate must lie in (0, 1)");
  return std::pow(rate, -(1.0 + q));
}

double step_size(long s, long k, const RmalmConfig& cfg) {
  return cfg.tau(s) * cfg.eta(k) / (static_cast<double>(s) + cfg.beta);
}

long subproblem_budget(long k, const RmalmConfig& cfg) {
  const double raw = static_cast<double>(cfg.S0) * std::pow(cfg.budget_growth, static_cast<double>(k));
  // Guard against pow() landing a hair above an exact integer.
  double budget = std::ceil(raw * (1.0 - 1e-13));
  if (cfg.budget_cap) budget = std::min(budget, static_cast<double>(*cfg.budget_cap));
  if (budget > 9.0e18) fail(ErrorKind::BudgetExceeded, "subproblem budget overflows");
  return static_cast<long>(budget);
}

Vector inner_loop(const StochasticProblem& prob, const Vector& x_start, const PenaltyState& st, long S,
                  long k, const RmalmConfig& cfg, RngStream& rng) {
  if (S < 2) fail(ErrorKind::InvalidArgument, "inner_loop: budget S must be >= 2");
  Vector w = x_start;
  for (long s = 1; s <= S - 1; ++s) {
    const SampleBatch batch = draw_batch(prob, cfg.batch_obj, cfg.batch_con, rng);
    const Vector g = stoch_grad(prob, w, st, batch);
    w = prob.project(w - step_size(s, k, cfg) * g);
  }
  return w;
}

SolveTrace solve(const StochasticProblem& prob, const RmalmConfig& cfg, const MetricsEvaluator* evaluator,
                 const MetricsCallback& callback) {
  prob.validate();
  cfg.validate();
  const auto start = std::chrono::steady_clock::now();
  auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  };

  std::optional<MetricsEvaluator> own;
  if (!evaluator) evaluator = &own.emplace(prob);

  const Index M = prob.num_constraints();
  Vector x = cfg.x0 ? prob.project(*cfg.x0) : prob.project(Vector::Zero(prob.dim));
  if (x.size() != prob.dim) fail(ErrorKind::Dimension, "rmalm: x0 has wrong dimension");
  PenaltyState st{cfg.c, cfg.y0 ? *cfg.y0 : Vector::Zero(M)};
  st.validate(M);

  SolveTrace trace;
  RngStream rng(cfg.seed, streams::kRmalm);
  Vector h = prob.constraint_values(x);

  auto record = [&](long k) {
    MetricsRow row = evaluator->row(k, trace.cum_inner, x, st.y, h, elapsed());
    if (callback) callback(k, trace.cum_inner, row);
    trace.rows.push_back(std::move(row));
    trace.iterates.push_back(x);
    trace.multipliers.push_back(st.y);
  };
  record(0);

  for (long k = 0; k < cfg.outer_iters; ++k) {
    const long S = subproblem_budget(k + 1, cfg);
    if (trace.cum_inner + S > cfg.global_cap) {
      std::ostringstream os;
      os << "rmalm: global inner-iteration cap " << cfg.global_cap << " exceeded at outer iteration " << k + 1
         << " (would reach " << trace.cum_inner + S << ")";
      fail(ErrorKind::BudgetExceeded, os.str());
    }
    x = inner_loop(prob, x, st, S, k, cfg, rng);
    if (!x.allFinite()) {
      std::ostringstream os;
      os << "rmalm: iterate became non-finite in outer iteration " << k + 1 << "; reduce eta or tau";
      fail(ErrorKind::NonConvergence, os.str());
    }
    trace.cum_inner += S;
    trace.budgets.push_back(S);
    h = prob.constraint_values(x);
    st.y = multiplier_update(st.y, st.c, h);
    record(k + 1);
  }

  trace.x = x;
  trace.y = st.y;
  return trace;
}

}  // namespace rmalm
