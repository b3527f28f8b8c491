#include "rmalm/baseline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <string>

#include "rmalm/auglag.hpp"

namespace rmalm {

void PdsgConfig::validate() const {
  if (!(step0 > 0.0)) fail(ErrorKind::InvalidArgument, "pdsg: step0 must be positive");
  if (!(decay >= 0.0)) fail(ErrorKind::InvalidArgument, "pdsg: decay must be >= 0");
  if (batch_obj < 1 || batch_con < 1) fail(ErrorKind::InvalidArgument, "pdsg: batch sizes must be >= 1");
  if (iters < 0) fail(ErrorKind::InvalidArgument, "pdsg: iters must be >= 0");
  if (record_every < 1) fail(ErrorKind::InvalidArgument, "pdsg: record_every must be >= 1");
}

std::vector<Vector> running_average(const std::vector<Vector>& iterates) {
  std::vector<Vector> out;
  out.reserve(iterates.size());
  for (std::size_t k = 0; k < iterates.size(); ++k) {
    if (k == 0) {
      out.push_back(iterates[0]);
    } else {
      out.push_back(out.back() + (iterates[k] - out.back()) / static_cast<double>(k + 1));
    }
  }
  return out;
}

PdsgResult pdsg_solve(const StochasticProblem& prob, const PdsgConfig& cfg, const MetricsEvaluator* evaluator,
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
  RngStream rng(cfg.seed, streams::kPdsg);
  Vector x = prob.project(Vector::Zero(prob.dim));
  Vector y = Vector::Zero(M);
  Vector x_avg = x, y_avg = y;

  PdsgResult res;
  auto record = [&](long t) {
    MetricsRow row = evaluator->row(t, t, x, y, prob.constraint_values(x), elapsed());
    if (callback) callback(t, t, row);
    res.last.rows.push_back(std::move(row));
    res.last.iterates.push_back(x);
    res.last.multipliers.push_back(y);
    res.averaged.rows.push_back(evaluator->row(t, t, x_avg, y_avg, prob.constraint_values(x_avg), elapsed()));
    res.averaged.iterates.push_back(x_avg);
    res.averaged.multipliers.push_back(y_avg);
  };
  record(0);

  std::vector<Index> distinct;
  for (long t = 0; t < cfg.iters; ++t) {
    const double gamma = cfg.step0 / std::pow(1.0 + static_cast<double>(t), cfg.decay);
    const SampleBatch batch = draw_batch(prob, cfg.batch_obj, cfg.batch_con, rng);

    Vector g = Vector::Zero(prob.dim);
    if (prob.f0) prob.f0.add_gradient(x, 1.0, g);
    if (prob.sampler) {
      const double scale = 1.0 / static_cast<double>(batch.objective_draws.size());
      for (const auto d : batch.objective_draws) prob.sampler->add_gradient(x, d, scale, g);
    }
    const double cscale = static_cast<double>(M) / static_cast<double>(batch.constraint_indices.size());
    for (const Index j : batch.constraint_indices) {
      if (y[j] > 0.0) prob.constraints->add_gradient(j, x, cscale * y[j], g);
    }
    x = prob.project(x - gamma * g);
    if (!x.allFinite()) {
      fail(ErrorKind::NonConvergence,
           "pdsg: iterate became non-finite at step " + std::to_string(t + 1) + "; reduce step0");
    }

    distinct = batch.constraint_indices;
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    for (const Index j : distinct) y[j] = std::max(0.0, y[j] + gamma * prob.constraints->value(j, x));

    const double w = 1.0 / static_cast<double>(t + 2);  // x^0 counts as the first term
    x_avg += w * (x - x_avg);
    y_avg += w * (y - y_avg);
    if ((t + 1) % cfg.record_every == 0 || t + 1 == cfg.iters) record(t + 1);
  }
  res.last.x = x;
  res.last.y = y;
  res.last.cum_inner = cfg.iters;
  res.averaged.x = x_avg;
  res.averaged.y = y_avg;
  res.averaged.cum_inner = cfg.iters;
  return res;
}

}  // namespace rmalm
