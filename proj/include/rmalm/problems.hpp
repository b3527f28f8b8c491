// Seeded generators for the benchmark families and CSV ingestion of returns.
#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "rmalm/core.hpp"

namespace rmalm {

// ---------------------------------------------------------------------------
// Stochastic QCQP:  min E 1/2 ||xi_H x - xi_c||^2  s.t. 1/2 x'Q_j x + a_j'x <= b_j,
// X = [-10, 10]^n.

enum class QcqpMode { Expectation, FiniteSum };

/// Objective 1/2 ||H x - c||^2 with H (p x n) at unit spectral norm and c at
/// unit Euclidean norm. Expectation form draws (H, c) from a per-draw seed;
/// finite-sum form stores N pairs and keeps the exact mean as a quadratic.
class QcqpSampler final : public ObjectiveSampler {
 public:
  /// Expectation form.
  QcqpSampler(Index n, Index p);
  /// Finite-sum form over stored samples.
  QcqpSampler(std::vector<Matrix> H, std::vector<Vector> c);

  Index dim() const override { return n_; }
  Index rows() const { return p_; }
  std::uint64_t draw(RngStream& rng) const override;
  double value(const Vector& x, std::uint64_t draw) const override;
  void add_gradient(const Vector& x, std::uint64_t draw, double scale, Vector& grad) const override;
  std::optional<std::size_t> finite_sum_size() const override;
  double mean_value(const Vector& x) const override;
  void add_mean_gradient(const Vector& x, double scale, Vector& grad) const override;
  std::shared_ptr<const ObjectiveSampler> sample_average(std::size_t samples,
                                                         RngStream& rng) const override;

  /// One normalized (H, c) pair from the generating law.
  static std::pair<Matrix, Vector> sample_pair(Index n, Index p, RngStream& rng);

  const std::vector<Matrix>& H() const { return H_; }
  const std::vector<Vector>& c() const { return c_; }

 private:
  std::pair<Matrix, Vector> pair_for(std::uint64_t draw) const;

  Index n_ = 0;
  Index p_ = 0;
  bool finite_ = false;
  std::vector<Matrix> H_;
  std::vector<Vector> c_;
  // Exact mean: 1/2 x'G x - g'x + kappa.
  Matrix gram_;
  Vector lin_;
  double kappa_ = 0.0;
};

struct QcqpInstance {
  StochasticProblem problem;
  std::shared_ptr<const QuadraticConstraints> constraints;
  std::shared_ptr<const QcqpSampler> objective;
};

QcqpInstance gen_qcqp(Index n, Index p, Index M, QcqpMode mode, std::size_t N, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Two-stage quadratic program, single-program (SAA) form in variables
// (x1, y_1, ..., y_N), each block of length n.

struct TwoStageInstance {
  StochasticProblem problem;
  Index n = 0;
  std::size_t N = 0;
  Vector cost;     // c in [1,3]^n
  Matrix xi;       // N x 2n scenarios
  Vector x0;       // anchor for x1
  Vector y0;       // anchor for y_i
  double lambda = 2.0;
  double radius = 5.0;
};

TwoStageInstance gen_two_stage(Index n, std::size_t N, std::uint64_t seed, double lambda = 2.0,
                               double radius = 5.0);

// ---------------------------------------------------------------------------
// CVaR portfolio problem in variables v = (a, x, y), dim 1 + n + N.

struct PortfolioInstance {
  StochasticProblem problem;
  Matrix returns;  // N x n
  double p = 0.95;
  double min_return = 0.0;  // R
  Vector mean_returns;      // m
  double eps_reg = 0.0;

  Index assets() const { return returns.cols(); }
  Index periods() const { return returns.rows(); }
  /// Offsets of the a, x and y blocks inside the decision vector.
  static constexpr Index a_index() { return 0; }
  Index x_offset() const { return 1; }
  Index y_offset() const { return 1 + assets(); }
};

PortfolioInstance gen_cvar(const Matrix& returns, double p, std::optional<double> min_return = std::nullopt,
                           double eps_reg = 0.0);

/// Rectangular numeric CSV, optional single header row, no quoting.
Matrix load_returns_csv(const std::string& path);
Matrix parse_returns_csv(const std::string& text);

/// Synthetic gross returns: 1 + N(drift_i, vol_i^2) per asset, seeded.
Matrix synthetic_returns(std::size_t periods, Index assets, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Linear-constraint QP with a closed-form solution, used for rate checks:
//   F(x, xi) = 1/2 ||x - xi||^2,  xi ~ N(m, s^2 I),  h(x) = A x - b,  X = [-10,10]^n.
// A has orthonormal rows scaled by `row_scale`, so AA' = row_scale^2 I and all
// constraints are active at x* with multipliers y* > 0.

class GaussianShiftSampler final : public ObjectiveSampler {
 public:
  GaussianShiftSampler(Vector mean, double noise);
  Index dim() const override { return mean_.size(); }
  std::uint64_t draw(RngStream& rng) const override;
  double value(const Vector& x, std::uint64_t draw) const override;
  void add_gradient(const Vector& x, std::uint64_t draw, double scale, Vector& grad) const override;
  bool has_exact_mean() const override { return true; }
  double mean_value(const Vector& x) const override;
  void add_mean_gradient(const Vector& x, double scale, Vector& grad) const override;
  std::shared_ptr<const ObjectiveSampler> sample_average(std::size_t samples,
                                                         RngStream& rng) const override;

  const Vector& mean() const { return mean_; }
  double noise() const { return noise_; }

 private:
  Vector xi_for(std::uint64_t draw) const;
  Vector mean_;
  double noise_;
};

struct LinearQpInstance {
  StochasticProblem problem;
  Matrix A;
  Vector b;
  Vector x_star;
  Vector y_star;
  double f_star = 0.0;
  // Constants for the rate theory: f is mu-strongly convex with L_f-Lipschitz
  // gradient, the dual is alpha-strongly concave, h is L_h-Lipschitz.
  double mu = 1.0;
  double L_f = 1.0;
  double alpha = 1.0;
  double L_h = 1.0;
  double diameter = 0.0;
};

LinearQpInstance gen_linear_qp(Index n, Index M, std::uint64_t seed, double noise = 1.0,
                               double row_scale = 1.0);

}  // namespace rmalm
