// Augmented Lagrangian for inequality constraints
//
//   L(x, y, c) = f(x) + (c/2) ||(h(x) + y/c)_+||^2 - ||y||^2 / (2c),
//
// its exact gradient, the unbiased minibatch gradient used by the inner
// Robbins-Monro loop, and the multiplier update y <- max(0, y + c h).
#pragma once

#include <cstdint>
#include <vector>

#include "rmalm/core.hpp"

namespace rmalm {

struct PenaltyState {
  double c = 1.0;
  Vector y;  // multipliers, y >= 0

  void validate(Index num_constraints) const;
};

/// Objective draws (tokens understood by the problem's sampler) and
/// constraint indices in [0, M). Indices may repeat.
struct SampleBatch {
  std::vector<std::uint64_t> objective_draws;
  std::vector<Index> constraint_indices;
};

/// Batch policy: objective draws are iid from the sampler; constraint indices
/// are uniform with replacement when batch_con < M, otherwise every
/// constraint exactly once.
SampleBatch draw_batch(const StochasticProblem& prob, std::size_t batch_obj, std::size_t batch_con,
                       RngStream& rng);

/// Batch with every finite-sum sample and every constraint exactly once.
SampleBatch full_batch(const StochasticProblem& prob);

double auglag_value(const StochasticProblem& prob, const Vector& x, const PenaltyState& st);

/// Same, with h(x) supplied by the caller.
double auglag_value(const StochasticProblem& prob, const Vector& x, const PenaltyState& st,
                    const Vector& hvals);

Vector auglag_grad_full(const StochasticProblem& prob, const Vector& x, const PenaltyState& st);

/// grad f0(w) + (1/B_obj) sum grad F(w, xi) + (M/B_con) sum c (h_j + y_j/c)_+ grad h_j(w).
Vector stoch_grad(const StochasticProblem& prob, const Vector& w, const PenaltyState& st,
                  const SampleBatch& batch);

/// Componentwise max(0, y_j + c h_j).
Vector multiplier_update(const Vector& y, double c, const Vector& hvals);

}  // namespace rmalm
