#include "rmalm/auglag.hpp"

#include <sstream>

namespace rmalm {

void PenaltyState::validate(Index num_constraints) const {
  if (!(c > 0.0)) fail(ErrorKind::InvalidArgument, "penalty parameter c must be positive");
  if (y.size() != num_constraints) fail(ErrorKind::Dimension, "multiplier length differs from M");
  if ((y.array() < 0.0).any()) fail(ErrorKind::InvalidArgument, "multipliers must be nonnegative");
}

SampleBatch draw_batch(const StochasticProblem& prob, std::size_t batch_obj, std::size_t batch_con,
                       RngStream& rng) {
  if (batch_con == 0) fail(ErrorKind::Batch, "constraint batch size must be >= 1");
  SampleBatch batch;
  if (prob.sampler) {
    if (batch_obj == 0) fail(ErrorKind::Batch, "objective batch size must be >= 1");
    batch.objective_draws.resize(batch_obj);
    for (auto& d : batch.objective_draws) d = prob.sampler->draw(rng);
  }
  const Index M = prob.num_constraints();
  if (batch_con >= static_cast<std::size_t>(M)) {
    batch.constraint_indices.resize(static_cast<std::size_t>(M));
    for (Index j = 0; j < M; ++j) batch.constraint_indices[static_cast<std::size_t>(j)] = j;
  } else {
    batch.constraint_indices.resize(batch_con);
    for (auto& j : batch.constraint_indices) j = static_cast<Index>(rng.index(static_cast<std::size_t>(M)));
  }
  return batch;
}

SampleBatch full_batch(const StochasticProblem& prob) {
  SampleBatch batch;
  if (prob.sampler) {
    const auto N = prob.sampler->finite_sum_size();
    if (!N) fail(ErrorKind::Unsupported, "full batch requires a finite-sum objective");
    batch.objective_draws.resize(*N);
    for (std::size_t i = 0; i < *N; ++i) batch.objective_draws[i] = i;
  }
  const Index M = prob.num_constraints();
  batch.constraint_indices.resize(static_cast<std::size_t>(M));
  for (Index j = 0; j < M; ++j) batch.constraint_indices[static_cast<std::size_t>(j)] = j;
  return batch;
}

double auglag_value(const StochasticProblem& prob, const Vector& x, const PenaltyState& st,
                    const Vector& hvals) {
  if (!prob.has_exact_objective()) {
    fail(ErrorKind::Unsupported, "augmented Lagrangian needs an exactly evaluable objective");
  }
  if (hvals.size() != st.y.size()) fail(ErrorKind::Dimension, "h(x) length differs from y");
  const double c = st.c;
  const double penalty = (hvals + st.y / c).cwiseMax(0.0).squaredNorm();
  return prob.objective(x) + 0.5 * c * penalty - st.y.squaredNorm() / (2.0 * c);
}

double auglag_value(const StochasticProblem& prob, const Vector& x, const PenaltyState& st) {
  return auglag_value(prob, x, st, prob.constraint_values(x));
}

Vector auglag_grad_full(const StochasticProblem& prob, const Vector& x, const PenaltyState& st) {
  if (!prob.has_exact_objective()) {
    fail(ErrorKind::Unsupported, "augmented Lagrangian gradient needs an exactly evaluable objective");
  }
  Vector g = Vector::Zero(prob.dim);
  prob.add_objective_gradient(x, 1.0, g);
  const Vector h = prob.constraint_values(x);
  if (h.size() != st.y.size()) fail(ErrorKind::Dimension, "h(x) length differs from y");
  for (Index j = 0; j < h.size(); ++j) {
    const double weight = st.c * h[j] + st.y[j];  // c (h_j + y_j/c)
    if (weight > 0.0) prob.constraints->add_gradient(j, x, weight, g);
  }
  return g;
}

Vector stoch_grad(const StochasticProblem& prob, const Vector& w, const PenaltyState& st,
                  const SampleBatch& batch) {
  const Index M = prob.num_constraints();
  if (batch.constraint_indices.empty()) fail(ErrorKind::Batch, "empty constraint batch");
  if (prob.sampler && batch.objective_draws.empty()) fail(ErrorKind::Batch, "empty objective batch");
  if (st.y.size() != M) fail(ErrorKind::Dimension, "multiplier length differs from M");

  Vector g = Vector::Zero(prob.dim);
  if (prob.f0) prob.f0.add_gradient(w, 1.0, g);

  if (prob.sampler) {
    const auto N = prob.sampler->finite_sum_size();
    const double scale = 1.0 / static_cast<double>(batch.objective_draws.size());
    for (const auto d : batch.objective_draws) {
      if (N && d >= *N) {
        std::ostringstream os;
        os << "objective sample index " << d << " out of range [0, " << *N << ")";
        fail(ErrorKind::Batch, os.str());
      }
      prob.sampler->add_gradient(w, d, scale, g);
    }
  }

  const double scale = static_cast<double>(M) / static_cast<double>(batch.constraint_indices.size());
  for (const Index j : batch.constraint_indices) {
    if (j < 0 || j >= M) {
      std::ostringstream os;
      os << "constraint index " << j << " out of range [0, " << M << ")";
      fail(ErrorKind::Batch, os.str());
    }
    const double weight = st.c * prob.constraints->value(j, w) + st.y[j];
    if (weight > 0.0) prob.constraints->add_gradient(j, w, scale * weight, g);
  }
  return g;
}

Vector multiplier_update(const Vector& y, double c, const Vector& hvals) {
  if (!(c > 0.0)) fail(ErrorKind::InvalidArgument, "penalty parameter c must be positive");
  if (y.size() != hvals.size()) fail(ErrorKind::Dimension, "multiplier_update: length mismatch");
  return (y + c * hvals).cwiseMax(0.0);
}

}  // namespace rmalm
