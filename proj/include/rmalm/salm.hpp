// Stochastic ALM harness: exact subproblem solves followed by a controlled
// zero-mean perturbation of the primal point, with a decaying penalty
// c^k = c0 (k+1)^{-q}.
#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "rmalm/auglag.hpp"
#include "rmalm/core.hpp"

namespace rmalm {

enum class NoiseLaw { Gaussian, Uniform, Rademacher };

NoiseLaw parse_noise_law(const std::string& name);
const char* to_string(NoiseLaw law);

/// Zero-mean noise in R^n with E||eps||^2 = sigma^2.
Vector draw_noise(NoiseLaw law, double sigma, Index n, RngStream& rng);

struct SalmConfig {
  double c0 = 1.0;
  double q = 0.75;
  double sigma = 0.1;
  NoiseLaw noise_law = NoiseLaw::Gaussian;
  long outer_iters = 200;
  double inner_tol = 1e-10;
  std::vector<std::uint64_t> seeds{0};
  std::optional<Vector> x0;
  std::optional<Vector> y0;

  /// Throws Validation. q must lie in (1/2, 1] so that sum c^k diverges
  /// while sum (c^k)^2 converges.
  void validate() const;
  double penalty(long k) const;
};

struct ExactSolveOptions {
  long max_iters = 1'000'000;
  std::optional<Vector> warm_start;
};

/// Minimizes L(., y, c) over X by accelerated projected gradient with
/// backtracking and adaptive restart. Stops once
/// ||x - P_X(x - grad L(x))|| <= tol.
Vector exact_subproblem(const StochasticProblem& prob, const PenaltyState& st, double tol,
                        const ExactSolveOptions& opts = {});

/// ||x - P_X(x - grad L(x, y, c))||.
double subproblem_residual(const StochasticProblem& prob, const PenaltyState& st, const Vector& x);

struct SalmTrajectory {
  std::uint64_t seed = 0;
  std::vector<double> c;          // c^k used to leave y^k, k = 0..K-1
  std::vector<double> dist_sq_y;  // ||y^k - y*||^2, k = 0..K
  std::vector<Vector> multipliers;
  Vector noise_mean;              // (1/K) sum eps^k
};

/// Runs one trajectory per configured seed; seeds are independent and may be
/// spread over `threads` workers.
std::vector<SalmTrajectory> salm_run(const StochasticProblem& prob, const SalmConfig& cfg,
                                     const Vector& y_star, unsigned threads = 1);

/// Columns: seed, k, c_k, dist_sq_y. The last row of each seed has an empty c_k.
void write_salm_csv(std::ostream& out, const std::vector<SalmTrajectory>& trajs);
void write_salm_csv(const std::string& path, const std::vector<SalmTrajectory>& trajs);

}  // namespace rmalm
