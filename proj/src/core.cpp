#include "rmalm/core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace rmalm {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "invalid-argument";
    case ErrorKind::Dimension: return "dimension";
    case ErrorKind::BlockLayout: return "block-layout";
    case ErrorKind::Unsupported: return "unsupported";
    case ErrorKind::Batch: return "batch";
    case ErrorKind::NonConvergence: return "nonconvergence";
    case ErrorKind::BudgetExceeded: return "budget-exceeded";
    case ErrorKind::Format: return "format";
    case ErrorKind::Parse: return "parse";
    case ErrorKind::EmptyFeasibleSet: return "empty-feasible-set";
    case ErrorKind::Schema: return "schema";
    case ErrorKind::Io: return "io";
    case ErrorKind::AssumptionViolated: return "assumption-violated";
    case ErrorKind::UnreachableAccuracy: return "unreachable-accuracy";
    case ErrorKind::Validation: return "validation";
  }
  return "unknown";
}

void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

// ---------------------------------------------------------------------------

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream)
    : seed_(seed), stream_(stream), engine_(splitmix64(seed ^ splitmix64(stream + 0x5851f42d4c957f2dULL))) {}

double RngStream::uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }

double RngStream::uniform(double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(engine_);
}

double RngStream::normal() { return normal_(engine_); }

std::size_t RngStream::index(std::size_t n) {
  if (n == 0) fail(ErrorKind::InvalidArgument, "RngStream::index: empty range");
  return std::uniform_int_distribution<std::size_t>(0, n - 1)(engine_);
}

// ---------------------------------------------------------------------------
// Projections

Vector project_box(const Vector& z, double lo, double hi) {
  if (!(lo <= hi)) {
    std::ostringstream os;
    os << "project_box: invalid bounds lo=" << lo << " > hi=" << hi;
    fail(ErrorKind::InvalidArgument, os.str());
  }
  return z.cwiseMax(lo).cwiseMin(hi);
}

Vector project_ball(const Vector& z, const Vector& center, double radius) {
  if (!(radius > 0)) fail(ErrorKind::InvalidArgument, "project_ball: radius must be positive");
  if (z.size() != center.size()) fail(ErrorKind::Dimension, "project_ball: dimension mismatch");
  const Vector diff = z - center;
  const double norm = diff.norm();
  if (norm <= radius) return z;
  return center + (radius / norm) * diff;
}

Vector project_simplex(const Vector& z) {
  const Index n = z.size();
  if (n == 0) fail(ErrorKind::Dimension, "project_simplex: empty input");
  std::vector<double> u(z.data(), z.data() + n);
  std::stable_sort(u.begin(), u.end(), std::greater<double>());
  double cumulative = 0.0;
  double threshold = 0.0;
  for (Index j = 0; j < n; ++j) {
    cumulative += u[static_cast<std::size_t>(j)];
    const double t = (cumulative - 1.0) / static_cast<double>(j + 1);
    if (u[static_cast<std::size_t>(j)] - t > 0.0) threshold = t;
  }
  return (z.array() - threshold).cwiseMax(0.0).matrix();
}

Vector project_nonneg(const Vector& z) { return z.cwiseMax(0.0); }

void check_block_layout(std::span<const ProjectionBlock> blocks, Index dim) {
  std::vector<int> cover(static_cast<std::size_t>(std::max<Index>(dim, 0)), 0);
  for (const auto& block : blocks) {
    if (block.size <= 0 || block.start < 0 || block.start + block.size > dim) {
      std::ostringstream os;
      os << "block [" << block.start << ", " << block.start + block.size
         << ") outside index range [0, " << dim << ")";
      fail(ErrorKind::BlockLayout, os.str());
    }
    if (!block.project) fail(ErrorKind::BlockLayout, "block without projector");
    for (Index i = block.start; i < block.start + block.size; ++i) ++cover[static_cast<std::size_t>(i)];
  }
  for (Index i = 0; i < dim; ++i) {
    const int c = cover[static_cast<std::size_t>(i)];
    if (c != 1) {
      std::ostringstream os;
      os << "index " << i << (c == 0 ? " not covered by any block" : " covered by overlapping blocks");
      fail(ErrorKind::BlockLayout, os.str());
    }
  }
}

Vector project_product(const Vector& z, std::span<const ProjectionBlock> blocks) {
  check_block_layout(blocks, z.size());
  Vector out(z.size());
  for (const auto& block : blocks) {
    Vector part = block.project(z.segment(block.start, block.size));
    if (part.size() != block.size) fail(ErrorKind::Dimension, "block projector changed the block size");
    out.segment(block.start, block.size) = part;
  }
  return out;
}

Projector identity_projector() {
  return [](const Vector& z) { return z; };
}

Projector box_projector(double lo, double hi) {
  if (!(lo <= hi)) fail(ErrorKind::InvalidArgument, "box_projector: lo > hi");
  return [lo, hi](const Vector& z) { return project_box(z, lo, hi); };
}

Projector ball_projector(Vector center, double radius) {
  if (!(radius > 0)) fail(ErrorKind::InvalidArgument, "ball_projector: radius must be positive");
  return [center = std::move(center), radius](const Vector& z) { return project_ball(z, center, radius); };
}

Projector simplex_projector() {
  return [](const Vector& z) { return project_simplex(z); };
}

Projector nonneg_projector() {
  return [](const Vector& z) { return project_nonneg(z); };
}

Projector product_projector(std::vector<ProjectionBlock> blocks, Index dim) {
  check_block_layout(blocks, dim);
  return [blocks = std::move(blocks), dim](const Vector& z) {
    if (z.size() != dim) fail(ErrorKind::Dimension, "product projector: dimension mismatch");
    Vector out(z.size());
    for (const auto& block : blocks) {
      out.segment(block.start, block.size) = block.project(z.segment(block.start, block.size));
    }
    return out;
  };
}

// ---------------------------------------------------------------------------
// Objective samplers

namespace {

/// SAA over a fixed list of draw tokens of an underlying sampler.
class DrawListSampler final : public ObjectiveSampler {
 public:
  DrawListSampler(std::shared_ptr<const ObjectiveSampler> base, std::vector<std::uint64_t> draws)
      : base_(std::move(base)), draws_(std::move(draws)) {}

  Index dim() const override { return base_->dim(); }
  std::uint64_t draw(RngStream& rng) const override { return rng.index(draws_.size()); }
  double value(const Vector& x, std::uint64_t i) const override {
    return base_->value(x, draws_.at(static_cast<std::size_t>(i)));
  }
  void add_gradient(const Vector& x, std::uint64_t i, double scale, Vector& grad) const override {
    base_->add_gradient(x, draws_.at(static_cast<std::size_t>(i)), scale, grad);
  }
  std::optional<std::size_t> finite_sum_size() const override { return draws_.size(); }

 private:
  std::shared_ptr<const ObjectiveSampler> base_;
  std::vector<std::uint64_t> draws_;
};

/// Non-owning view used only by the default sample_average below.
class BorrowedSampler final : public ObjectiveSampler {
 public:
  explicit BorrowedSampler(const ObjectiveSampler& base) : base_(base) {}
  Index dim() const override { return base_.dim(); }
  std::uint64_t draw(RngStream& rng) const override { return base_.draw(rng); }
  double value(const Vector& x, std::uint64_t d) const override { return base_.value(x, d); }
  void add_gradient(const Vector& x, std::uint64_t d, double s, Vector& g) const override {
    base_.add_gradient(x, d, s, g);
  }

 private:
  const ObjectiveSampler& base_;
};

}  // namespace

double ObjectiveSampler::mean_value(const Vector& x) const {
  const auto n = finite_sum_size();
  if (!n) fail(ErrorKind::Unsupported, "exact objective evaluation requires a finite-sum sampler");
  double sum = 0.0;
  for (std::size_t i = 0; i < *n; ++i) sum += value(x, i);
  return sum / static_cast<double>(*n);
}

void ObjectiveSampler::add_mean_gradient(const Vector& x, double scale, Vector& grad) const {
  const auto n = finite_sum_size();
  if (!n) fail(ErrorKind::Unsupported, "exact gradient evaluation requires a finite-sum sampler");
  const double w = scale / static_cast<double>(*n);
  for (std::size_t i = 0; i < *n; ++i) add_gradient(x, i, w, grad);
}

std::shared_ptr<const ObjectiveSampler> ObjectiveSampler::sample_average(std::size_t samples,
                                                                         RngStream& rng) const {
  if (samples == 0) fail(ErrorKind::InvalidArgument, "sample_average: zero samples");
  std::vector<std::uint64_t> draws(samples);
  for (auto& d : draws) d = draw(rng);
  // The returned sampler must not outlive *this; callers keep the base alive.
  return std::make_shared<DrawListSampler>(std::make_shared<BorrowedSampler>(*this), std::move(draws));
}

// ---------------------------------------------------------------------------
// Constraint sets

Vector ConstraintSet::values(const Vector& x) const {
  Vector h(size());
  for (Index j = 0; j < size(); ++j) h[j] = value(j, x);
  return h;
}

LinearConstraints::LinearConstraints(Matrix A, Vector b) : A_(std::move(A)), b_(std::move(b)) {
  if (A_.rows() != b_.size()) fail(ErrorKind::Dimension, "LinearConstraints: rows(A) != size(b)");
}

double LinearConstraints::value(Index j, const Vector& x) const { return A_.row(j).dot(x) - b_[j]; }

void LinearConstraints::add_gradient(Index j, const Vector&, double scale, Vector& grad) const {
  grad.noalias() += scale * A_.row(j).transpose();
}

Vector LinearConstraints::values(const Vector& x) const { return A_ * x - b_; }

QuadraticConstraints::QuadraticConstraints(std::vector<Matrix> Q, std::vector<Vector> a, Vector b)
    : Q_(std::move(Q)), a_(std::move(a)), b_(std::move(b)) {
  if (Q_.size() != a_.size() || static_cast<Index>(Q_.size()) != b_.size()) {
    fail(ErrorKind::Dimension, "QuadraticConstraints: Q, a, b lengths differ");
  }
}

double QuadraticConstraints::value(Index j, const Vector& x) const {
  const auto k = static_cast<std::size_t>(j);
  return 0.5 * x.dot(Q_[k] * x) + a_[k].dot(x) - b_[j];
}

void QuadraticConstraints::add_gradient(Index j, const Vector& x, double scale, Vector& grad) const {
  const auto k = static_cast<std::size_t>(j);
  grad.noalias() += scale * (Q_[k] * x + a_[k]);
}

void FunctionConstraints::add(std::function<double(const Vector&)> value,
                              std::function<Vector(const Vector&)> gradient) {
  values_.push_back(std::move(value));
  gradients_.push_back(std::move(gradient));
}

double FunctionConstraints::value(Index j, const Vector& x) const {
  return values_.at(static_cast<std::size_t>(j))(x);
}

void FunctionConstraints::add_gradient(Index j, const Vector& x, double scale, Vector& grad) const {
  grad += scale * gradients_.at(static_cast<std::size_t>(j))(x);
}

// ---------------------------------------------------------------------------
// StochasticProblem

std::optional<std::size_t> StochasticProblem::finite_sum_size() const {
  return sampler ? sampler->finite_sum_size() : std::nullopt;
}

bool StochasticProblem::has_exact_objective() const { return !sampler || sampler->has_exact_mean(); }

double StochasticProblem::objective(const Vector& x) const {
  double v = f0 ? f0.value(x) : 0.0;
  if (sampler) v += sampler->mean_value(x);
  return v;
}

void StochasticProblem::add_objective_gradient(const Vector& x, double scale, Vector& grad) const {
  if (f0) f0.add_gradient(x, scale, grad);
  if (sampler) sampler->add_mean_gradient(x, scale, grad);
}

Vector StochasticProblem::constraint_values(const Vector& x) const { return constraints->values(x); }

void StochasticProblem::validate() const {
  if (dim <= 0) fail(ErrorKind::InvalidArgument, "problem dimension must be positive");
  if (!constraints || constraints->size() <= 0) {
    fail(ErrorKind::InvalidArgument, "problem needs at least one constraint");
  }
  if (!project) fail(ErrorKind::InvalidArgument, "problem has no projector onto X");
  if (!f0 && !sampler) fail(ErrorKind::InvalidArgument, "problem has no objective");
  if (f0 && !f0.add_gradient) fail(ErrorKind::InvalidArgument, "f0 has no gradient");
  if (sampler && sampler->dim() != dim) fail(ErrorKind::Dimension, "sampler dimension mismatch");
  if (strictly_feasible && strictly_feasible->size() != dim) {
    fail(ErrorKind::Dimension, "feasibility witness has wrong dimension");
  }
}

double average_violation(const Vector& hvals) {
  if (hvals.size() == 0) return 0.0;
  if (hvals.hasNaN()) return std::numeric_limits<double>::quiet_NaN();
  return hvals.cwiseMax(0.0).sum() / static_cast<double>(hvals.size());
}

double max_violation(const Vector& hvals) {
  if (hvals.size() == 0) return 0.0;
  if (hvals.hasNaN()) return std::numeric_limits<double>::quiet_NaN();
  return std::max(0.0, hvals.maxCoeff());
}

}  // namespace rmalm
