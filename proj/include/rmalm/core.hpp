// Shared domain types for constrained stochastic convex problems:
//
//   min_{x in X} f0(x) + E_xi F(x, xi)   s.t.  h_j(x) <= 0,  j = 1..M
//
// plus Euclidean projections onto the feasible sets used by the benchmark
// families and the seeded random streams every solver draws from.
#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace rmalm {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

enum class ErrorKind {
  InvalidArgument,
  Dimension,
  BlockLayout,
  Unsupported,
  Batch,
  NonConvergence,
  BudgetExceeded,
  Format,
  Parse,
  EmptyFeasibleSet,
  Schema,
  Io,
  AssumptionViolated,
  UnreachableAccuracy,
  Validation,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& what);

// ---------------------------------------------------------------------------
// Random streams

/// Seeded 64-bit stream. The pair (seed, stream) fixes the draw sequence
/// bit-exactly; distinct stream ids give statistically independent sequences.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }

  std::uint64_t next_u64() { return engine_(); }
  double uniform();                      // [0, 1)
  double uniform(double lo, double hi);  // [lo, hi)
  double normal();                       // standard Gaussian
  std::size_t index(std::size_t n);      // uniform on {0, ..., n-1}

  std::mt19937_64& engine() { return engine_; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

std::uint64_t splitmix64(std::uint64_t x);

/// Cheap counter-based generator for the many short per-draw streams
/// (seeding a Mersenne twister per sample would dominate the run time).
class SplitMixRng {
 public:
  using result_type = std::uint64_t;
  explicit SplitMixRng(std::uint64_t seed) : state_(seed) {}
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }
  result_type operator()() { return splitmix64(state_++); }
  double normal() { return normal_(*this); }

 private:
  std::uint64_t state_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

/// Well-known stream ids. Keeping them in one place avoids accidental reuse.
namespace streams {
inline constexpr std::uint64_t kInstance = 1;
inline constexpr std::uint64_t kRmalm = 2;
inline constexpr std::uint64_t kSalmNoise = 3;
inline constexpr std::uint64_t kPdsg = 4;
inline constexpr std::uint64_t kHeldout = 5;
}  // namespace streams

// ---------------------------------------------------------------------------
// Projections onto X

using Projector = std::function<Vector(const Vector&)>;

Vector project_box(const Vector& z, double lo, double hi);
Vector project_ball(const Vector& z, const Vector& center, double radius);
Vector project_simplex(const Vector& z);
Vector project_nonneg(const Vector& z);

/// One block of a product set: indices [start, start + size) are projected
/// with `project`, independently of the other blocks.
struct ProjectionBlock {
  Index start = 0;
  Index size = 0;
  Projector project;
};

/// Throws BlockLayout unless the blocks tile {0, ..., dim-1} exactly.
void check_block_layout(std::span<const ProjectionBlock> blocks, Index dim);
Vector project_product(const Vector& z, std::span<const ProjectionBlock> blocks);

Projector identity_projector();
Projector box_projector(double lo, double hi);
Projector ball_projector(Vector center, double radius);
Projector simplex_projector();
Projector nonneg_projector();
Projector product_projector(std::vector<ProjectionBlock> blocks, Index dim);

// ---------------------------------------------------------------------------
// Problem description

/// Deterministic smooth convex term with gradient.
struct SmoothFunction {
  std::function<double(const Vector&)> value;
  /// grad += scale * grad f(x)
  std::function<void(const Vector&, double, Vector&)> add_gradient;

  explicit operator bool() const { return static_cast<bool>(value); }
};

/// Stochastic objective part F(x, xi). A draw is an opaque 64-bit token:
/// the sample index for finite-sum objectives, a per-draw seed otherwise.
class ObjectiveSampler {
 public:
  virtual ~ObjectiveSampler() = default;

  virtual Index dim() const = 0;
  virtual std::uint64_t draw(RngStream& rng) const = 0;
  virtual double value(const Vector& x, std::uint64_t draw) const = 0;
  virtual void add_gradient(const Vector& x, std::uint64_t draw, double scale,
                            Vector& grad) const = 0;

  /// N when xi is uniform over a finite sample set {xi_1..xi_N}.
  virtual std::optional<std::size_t> finite_sum_size() const { return std::nullopt; }

  /// True when E F(x, xi) can be evaluated exactly (finite sum or closed form).
  virtual bool has_exact_mean() const { return finite_sum_size().has_value(); }
  virtual double mean_value(const Vector& x) const;
  virtual void add_mean_gradient(const Vector& x, double scale, Vector& grad) const;

  /// Sample-average approximation built from `samples` fresh draws.
  virtual std::shared_ptr<const ObjectiveSampler> sample_average(std::size_t samples,
                                                                 RngStream& rng) const;
};

/// The constraint functions h_1..h_M (0-based indices in code).
class ConstraintSet {
 public:
  virtual ~ConstraintSet() = default;

  virtual Index size() const = 0;
  virtual double value(Index j, const Vector& x) const = 0;
  /// grad += scale * grad h_j(x)
  virtual void add_gradient(Index j, const Vector& x, double scale, Vector& grad) const = 0;
  virtual Vector values(const Vector& x) const;
};

/// h(x) = A x - b.
class LinearConstraints final : public ConstraintSet {
 public:
  LinearConstraints(Matrix A, Vector b);
  Index size() const override { return A_.rows(); }
  double value(Index j, const Vector& x) const override;
  void add_gradient(Index j, const Vector& x, double scale, Vector& grad) const override;
  Vector values(const Vector& x) const override;
  const Matrix& A() const { return A_; }
  const Vector& b() const { return b_; }

 private:
  Matrix A_;
  Vector b_;
};

/// h_j(x) = 1/2 x'Q_j x + a_j'x - b_j.
class QuadraticConstraints final : public ConstraintSet {
 public:
  QuadraticConstraints(std::vector<Matrix> Q, std::vector<Vector> a, Vector b);
  Index size() const override { return static_cast<Index>(Q_.size()); }
  double value(Index j, const Vector& x) const override;
  void add_gradient(Index j, const Vector& x, double scale, Vector& grad) const override;
  const std::vector<Matrix>& Q() const { return Q_; }
  const std::vector<Vector>& a() const { return a_; }
  const Vector& b() const { return b_; }

 private:
  std::vector<Matrix> Q_;
  std::vector<Vector> a_;
  Vector b_;
};

/// Constraints given as plain callables; convenient for small hand-built problems.
class FunctionConstraints final : public ConstraintSet {
 public:
  void add(std::function<double(const Vector&)> value,
           std::function<Vector(const Vector&)> gradient);
  Index size() const override { return static_cast<Index>(values_.size()); }
  double value(Index j, const Vector& x) const override;
  void add_gradient(Index j, const Vector& x, double scale, Vector& grad) const override;

 private:
  std::vector<std::function<double(const Vector&)>> values_;
  std::vector<std::function<Vector(const Vector&)>> gradients_;
};

struct StochasticProblem {
  std::string name;
  Index dim = 0;
  SmoothFunction f0;                                // may be empty
  std::shared_ptr<const ObjectiveSampler> sampler;  // may be null
  std::shared_ptr<const ConstraintSet> constraints;
  Projector project;
  std::optional<Vector> strictly_feasible;  // Slater witness, when known

  Index num_constraints() const { return constraints ? constraints->size() : 0; }
  std::optional<std::size_t> finite_sum_size() const;

  /// f(x) = f0(x) + E F(x, xi) is evaluable without sampling.
  bool has_exact_objective() const;
  double objective(const Vector& x) const;
  void add_objective_gradient(const Vector& x, double scale, Vector& grad) const;
  Vector constraint_values(const Vector& x) const;

  /// Throws InvalidArgument/Dimension on an ill-formed problem.
  void validate() const;
};

/// Constraint violation summaries: (1/M) sum [h_j]_+ and max_j [h_j]_+.
double average_violation(const Vector& hvals);
double max_violation(const Vector& hvals);

}  // namespace rmalm
