#include "rmalm/problems.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace rmalm {

namespace {

template <class Gen>
Matrix gaussian_matrix(Index rows, Index cols, Gen& rng) {
  Matrix m(rows, cols);
  // Column-major fill order is part of the determinism contract.
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) m(i, j) = rng.normal();
  return m;
}

template <class Gen>
Vector gaussian_vector(Index n, Gen& rng) {
  Vector v(n);
  for (Index i = 0; i < n; ++i) v[i] = rng.normal();
  return v;
}

double spectral_norm(const Matrix& m) {
  const Matrix gram = m.rows() <= m.cols() ? Matrix(m * m.transpose()) : Matrix(m.transpose() * m);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(gram, Eigen::EigenvaluesOnly);
  return std::sqrt(std::max(0.0, eig.eigenvalues().maxCoeff()));
}

void require_positive(Index v, const char* what) {
  if (v < 1) fail(ErrorKind::InvalidArgument, std::string(what) + " must be >= 1");
}

}  // namespace

// ---------------------------------------------------------------------------
// QCQP

QcqpSampler::QcqpSampler(Index n, Index p) : n_(n), p_(p), finite_(false) {}

QcqpSampler::QcqpSampler(std::vector<Matrix> H, std::vector<Vector> c)
    : finite_(true), H_(std::move(H)), c_(std::move(c)) {
  if (H_.empty() || H_.size() != c_.size()) fail(ErrorKind::Dimension, "QcqpSampler: bad sample set");
  p_ = H_.front().rows();
  n_ = H_.front().cols();
  gram_ = Matrix::Zero(n_, n_);
  lin_ = Vector::Zero(n_);
  kappa_ = 0.0;
  for (std::size_t i = 0; i < H_.size(); ++i) {
    gram_.noalias() += H_[i].transpose() * H_[i];
    lin_.noalias() += H_[i].transpose() * c_[i];
    kappa_ += 0.5 * c_[i].squaredNorm();
  }
  const double inv = 1.0 / static_cast<double>(H_.size());
  gram_ *= inv;
  lin_ *= inv;
  kappa_ *= inv;
}

namespace {

template <class Gen>
std::pair<Matrix, Vector> normalized_pair(Index n, Index p, Gen& rng) {
  Matrix H = gaussian_matrix(p, n, rng);
  Vector c = gaussian_vector(p, rng);
  H /= spectral_norm(H);
  c /= c.norm();
  return {std::move(H), std::move(c)};
}

}  // namespace

std::pair<Matrix, Vector> QcqpSampler::sample_pair(Index n, Index p, RngStream& rng) {
  return normalized_pair(n, p, rng);
}

std::uint64_t QcqpSampler::draw(RngStream& rng) const {
  if (finite_) return rng.index(H_.size());
  return rng.next_u64();
}

std::pair<Matrix, Vector> QcqpSampler::pair_for(std::uint64_t draw) const {
  SplitMixRng rng(draw);
  return normalized_pair(n_, p_, rng);
}

double QcqpSampler::value(const Vector& x, std::uint64_t draw) const {
  if (finite_) {
    const auto i = static_cast<std::size_t>(draw);
    return 0.5 * (H_.at(i) * x - c_[i]).squaredNorm();
  }
  const auto [H, c] = pair_for(draw);
  return 0.5 * (H * x - c).squaredNorm();
}

void QcqpSampler::add_gradient(const Vector& x, std::uint64_t draw, double scale, Vector& grad) const {
  if (finite_) {
    const auto i = static_cast<std::size_t>(draw);
    const Vector r = H_.at(i) * x - c_[i];
    grad.noalias() += scale * (H_[i].transpose() * r);
    return;
  }
  const auto [H, c] = pair_for(draw);
  grad.noalias() += scale * (H.transpose() * (H * x - c));
}

std::optional<std::size_t> QcqpSampler::finite_sum_size() const {
  if (finite_) return H_.size();
  return std::nullopt;
}

double QcqpSampler::mean_value(const Vector& x) const {
  if (!finite_) fail(ErrorKind::Unsupported, "expectation-form QCQP objective has no exact evaluation");
  return 0.5 * x.dot(gram_ * x) - lin_.dot(x) + kappa_;
}

void QcqpSampler::add_mean_gradient(const Vector& x, double scale, Vector& grad) const {
  if (!finite_) fail(ErrorKind::Unsupported, "expectation-form QCQP objective has no exact gradient");
  grad.noalias() += scale * (gram_ * x - lin_);
}

std::shared_ptr<const ObjectiveSampler> QcqpSampler::sample_average(std::size_t samples,
                                                                    RngStream& rng) const {
  if (samples == 0) fail(ErrorKind::InvalidArgument, "sample_average: zero samples");
  std::vector<Matrix> H;
  std::vector<Vector> c;
  H.reserve(samples);
  c.reserve(samples);
  for (std::size_t i = 0; i < samples; ++i) {
    if (finite_) {
      const std::size_t k = rng.index(H_.size());
      H.push_back(H_[k]);
      c.push_back(c_[k]);
      continue;
    }
    auto [Hi, ci] = pair_for(rng.next_u64());
    H.push_back(std::move(Hi));
    c.push_back(std::move(ci));
  }
  return std::make_shared<QcqpSampler>(std::move(H), std::move(c));
}

QcqpInstance gen_qcqp(Index n, Index p, Index M, QcqpMode mode, std::size_t N, std::uint64_t seed) {
  require_positive(n, "n");
  require_positive(p, "p");
  require_positive(M, "M");
  if (mode == QcqpMode::FiniteSum && N < 1) fail(ErrorKind::InvalidArgument, "N must be >= 1");

  RngStream rng(seed, streams::kInstance);
  std::vector<Matrix> Q;
  std::vector<Vector> a;
  Vector b(M);
  for (Index j = 0; j < M; ++j) {
    const Matrix G = gaussian_matrix(n, n, rng);
    Matrix Qj = G * G.transpose();
    Qj = 0.5 * (Qj + Qj.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Matrix> eig(Qj, Eigen::EigenvaluesOnly);
    Qj /= eig.eigenvalues().maxCoeff();
    Vector aj = gaussian_vector(n, rng);
    aj /= aj.norm();
    b[j] = rng.uniform(0.1, 1.1);
    Q.push_back(std::move(Qj));
    a.push_back(std::move(aj));
  }

  std::shared_ptr<const QcqpSampler> sampler;
  if (mode == QcqpMode::FiniteSum) {
    std::vector<Matrix> H;
    std::vector<Vector> c;
    H.reserve(N);
    c.reserve(N);
    for (std::size_t i = 0; i < N; ++i) {
      auto [Hi, ci] = QcqpSampler::sample_pair(n, p, rng);
      H.push_back(std::move(Hi));
      c.push_back(std::move(ci));
    }
    sampler = std::make_shared<QcqpSampler>(std::move(H), std::move(c));
  } else {
    sampler = std::make_shared<QcqpSampler>(n, p);
  }

  auto constraints = std::make_shared<QuadraticConstraints>(std::move(Q), std::move(a), std::move(b));

  QcqpInstance inst;
  inst.constraints = constraints;
  inst.objective = sampler;
  auto& prob = inst.problem;
  prob.name = "qcqp";
  prob.dim = n;
  prob.sampler = sampler;
  prob.constraints = constraints;
  prob.project = box_projector(-10.0, 10.0);
  prob.strictly_feasible = Vector::Zero(n);
  return inst;
}

// ---------------------------------------------------------------------------
// Two-stage

namespace {

class TwoStageSampler final : public ObjectiveSampler {
 public:
  TwoStageSampler(Matrix xi, Index n, double lambda) : xi_(std::move(xi)), n_(n), lambda_(lambda) {}

  Index dim() const override { return n_ * (xi_.rows() + 1); }
  std::uint64_t draw(RngStream& rng) const override {
    return rng.index(static_cast<std::size_t>(xi_.rows()));
  }
  std::optional<std::size_t> finite_sum_size() const override {
    return static_cast<std::size_t>(xi_.rows());
  }

  double value(const Vector& x, std::uint64_t draw) const override {
    const Index i = static_cast<Index>(draw);
    const auto xi = xi_.row(i);
    const auto x1 = x.head(n_);
    const auto yi = x.segment(n_ * (i + 1), n_);
    const double proj = xi.head(n_).dot(x1) + xi.tail(n_).dot(yi);
    return 0.5 * proj * proj + 0.5 * lambda_ * (x1.squaredNorm() + yi.squaredNorm()) + proj;
  }

  void add_gradient(const Vector& x, std::uint64_t draw, double scale, Vector& grad) const override {
    const Index i = static_cast<Index>(draw);
    const auto xi = xi_.row(i);
    const auto x1 = x.head(n_);
    const auto yi = x.segment(n_ * (i + 1), n_);
    const double proj = xi.head(n_).dot(x1) + xi.tail(n_).dot(yi);
    const double w = scale * (proj + 1.0);
    grad.head(n_) += w * xi.head(n_).transpose() + (scale * lambda_) * x1;
    grad.segment(n_ * (i + 1), n_) += w * xi.tail(n_).transpose() + (scale * lambda_) * yi;
  }

 private:
  Matrix xi_;
  Index n_;
  double lambda_;
};

class TwoStageConstraints final : public ConstraintSet {
 public:
  TwoStageConstraints(Index n, Index N, Vector x0, Vector y0, double radius)
      : n_(n), N_(N), x0_(std::move(x0)), y0_(std::move(y0)), radius_(radius) {}

  Index size() const override { return N_; }
  double value(Index j, const Vector& x) const override {
    return 0.5 * (x.segment(n_ * (j + 1), n_) - y0_).squaredNorm() +
           0.5 * (x.head(n_) - x0_).squaredNorm() - 0.5 * radius_ * radius_;
  }
  void add_gradient(Index j, const Vector& x, double scale, Vector& grad) const override {
    grad.head(n_) += scale * (x.head(n_) - x0_);
    grad.segment(n_ * (j + 1), n_) += scale * (x.segment(n_ * (j + 1), n_) - y0_);
  }
  Vector values(const Vector& x) const override {
    const double first = 0.5 * (x.head(n_) - x0_).squaredNorm() - 0.5 * radius_ * radius_;
    Vector h(N_);
    for (Index j = 0; j < N_; ++j) h[j] = first + 0.5 * (x.segment(n_ * (j + 1), n_) - y0_).squaredNorm();
    return h;
  }

 private:
  Index n_;
  Index N_;
  Vector x0_;
  Vector y0_;
  double radius_;
};

}  // namespace

TwoStageInstance gen_two_stage(Index n, std::size_t N, std::uint64_t seed, double lambda, double radius) {
  require_positive(n, "n");
  if (N < 1) fail(ErrorKind::InvalidArgument, "N must be >= 1");
  if (!(lambda > 0)) fail(ErrorKind::InvalidArgument, "lambda must be positive");
  if (!(radius > 0)) fail(ErrorKind::InvalidArgument, "R must be positive");

  RngStream rng(seed, streams::kInstance);
  TwoStageInstance inst;
  inst.n = n;
  inst.N = N;
  inst.lambda = lambda;
  inst.radius = radius;
  inst.x0 = Vector::Constant(n, 10.0);
  inst.y0 = Vector::Constant(n, 10.0);
  inst.cost.resize(n);
  for (Index i = 0; i < n; ++i) inst.cost[i] = rng.uniform(1.0, 3.0);

  // One mean/std vector per instance; scenarios are iid draws from it.
  Vector means(2 * n), stds(2 * n);
  for (Index i = 0; i < 2 * n; ++i) means[i] = rng.uniform(5.0, 25.0);
  for (Index i = 0; i < 2 * n; ++i) stds[i] = rng.uniform(5.0, 15.0);
  const auto Ni = static_cast<Index>(N);
  inst.xi.resize(Ni, 2 * n);
  for (Index s = 0; s < Ni; ++s)
    for (Index i = 0; i < 2 * n; ++i) inst.xi(s, i) = means[i] + stds[i] * rng.normal();

  const Index dim = n * (Ni + 1);
  auto& prob = inst.problem;
  prob.name = "two_stage";
  prob.dim = dim;
  const Vector cost = inst.cost;
  prob.f0.value = [cost, n](const Vector& x) { return cost.dot(x.head(n)); };
  prob.f0.add_gradient = [cost, n](const Vector&, double scale, Vector& g) { g.head(n) += scale * cost; };
  prob.sampler = std::make_shared<TwoStageSampler>(inst.xi, n, lambda);
  prob.constraints = std::make_shared<TwoStageConstraints>(n, Ni, inst.x0, inst.y0, radius);
  std::vector<ProjectionBlock> blocks;
  blocks.push_back({0, n, ball_projector(inst.x0, 1.0)});
  blocks.push_back({n, n * Ni, identity_projector()});
  prob.project = product_projector(std::move(blocks), dim);

  Vector witness(dim);
  witness.head(n) = inst.x0;
  for (Index s = 0; s < Ni; ++s) witness.segment(n * (s + 1), n) = inst.y0;
  prob.strictly_feasible = std::move(witness);
  return inst;
}

// ---------------------------------------------------------------------------
// CVaR portfolio

namespace {

class CvarConstraints final : public ConstraintSet {
 public:
  CvarConstraints(Matrix returns, Vector mean, double min_return)
      : returns_(std::move(returns)), mean_(std::move(mean)), min_return_(min_return) {}

  Index size() const override { return returns_.rows() + 1; }
  Index assets() const { return returns_.cols(); }

  double value(Index j, const Vector& v) const override {
    const Index n = assets();
    if (j < returns_.rows()) {
      return -returns_.row(j).dot(v.segment(1, n)) - v[0] - v[1 + n + j];
    }
    return min_return_ - mean_.dot(v.segment(1, n));
  }

  void add_gradient(Index j, const Vector&, double scale, Vector& grad) const override {
    const Index n = assets();
    if (j < returns_.rows()) {
      grad[0] -= scale;
      grad.segment(1, n) -= scale * returns_.row(j).transpose();
      grad[1 + n + j] -= scale;
      return;
    }
    grad.segment(1, n) -= scale * mean_;
  }

  Vector values(const Vector& v) const override {
    const Index n = assets();
    const Index N = returns_.rows();
    Vector h(N + 1);
    h.head(N) = -(returns_ * v.segment(1, n)) - Vector::Constant(N, v[0]) - v.segment(1 + n, N);
    h[N] = min_return_ - mean_.dot(v.segment(1, n));
    return h;
  }

 private:
  Matrix returns_;
  Vector mean_;
  double min_return_;
};

}  // namespace

PortfolioInstance gen_cvar(const Matrix& returns, double p, std::optional<double> min_return,
                           double eps_reg) {
  if (!(p > 0.0 && p < 1.0)) fail(ErrorKind::InvalidArgument, "p must lie in (0, 1)");
  if (returns.rows() < 1 || returns.cols() < 1) fail(ErrorKind::Format, "returns matrix is empty");
  if (!(eps_reg >= 0.0)) fail(ErrorKind::InvalidArgument, "eps_reg must be >= 0");

  PortfolioInstance inst;
  inst.returns = returns;
  inst.p = p;
  inst.eps_reg = eps_reg;
  inst.mean_returns = returns.colwise().mean().transpose();
  inst.min_return = min_return.value_or(inst.mean_returns.mean());

  const Index n = returns.cols();
  const Index N = returns.rows();
  const Index dim = 1 + n + N;
  const double weight = 1.0 / ((1.0 - p) * static_cast<double>(N));

  auto& prob = inst.problem;
  prob.name = "cvar";
  prob.dim = dim;
  prob.f0.value = [n, N, weight, eps_reg](const Vector& v) {
    return v[0] + weight * v.segment(1 + n, N).sum() + 0.5 * eps_reg * v.squaredNorm();
  };
  prob.f0.add_gradient = [n, N, weight, eps_reg](const Vector& v, double scale, Vector& g) {
    g[0] += scale;
    g.segment(1 + n, N).array() += scale * weight;
    if (eps_reg > 0.0) g += (scale * eps_reg) * v;
  };
  prob.constraints = std::make_shared<CvarConstraints>(returns, inst.mean_returns, inst.min_return);
  std::vector<ProjectionBlock> blocks;
  blocks.push_back({0, 1, identity_projector()});
  blocks.push_back({1, n, simplex_projector()});
  blocks.push_back({1 + n, N, nonneg_projector()});
  prob.project = product_projector(std::move(blocks), dim);

  // Best-effort Slater point: all weight on the best asset, slack in every y_i.
  Vector witness = Vector::Zero(dim);
  Index best = 0;
  inst.mean_returns.maxCoeff(&best);
  witness[1 + best] = 1.0;
  for (Index i = 0; i < N; ++i) witness[1 + n + i] = std::max(0.0, -returns(i, best)) + 1.0;
  prob.strictly_feasible = std::move(witness);
  return inst;
}

Matrix parse_returns_csv(const std::string& text) {
  std::vector<std::vector<double>> rows;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  std::size_t width = 0;
  bool header_allowed = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;

    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
      const auto comma = line.find(',', start);
      fields.push_back(line.substr(start, comma == std::string::npos ? std::string::npos : comma - start));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }

    std::vector<double> values;
    values.reserve(fields.size());
    std::optional<std::size_t> bad_column;
    for (std::size_t c = 0; c < fields.size(); ++c) {
      std::string f = fields[c];
      const auto first = f.find_first_not_of(" \t");
      const auto last = f.find_last_not_of(" \t");
      f = first == std::string::npos ? std::string() : f.substr(first, last - first + 1);
      double v = 0.0;
      const auto* begin = f.data();
      const auto* end = f.data() + f.size();
      const auto res = std::from_chars(begin, end, v);
      if (f.empty() || res.ec != std::errc() || res.ptr != end) {
        if (!bad_column) bad_column = c;
        continue;
      }
      values.push_back(v);
    }

    if (bad_column) {
      if (header_allowed) {
        header_allowed = false;
        width = fields.size();
        continue;
      }
      std::ostringstream os;
      os << "returns CSV: non-numeric or missing cell at row " << line_no << ", column " << (*bad_column + 1);
      fail(ErrorKind::Parse, os.str());
    }
    header_allowed = false;
    if (width == 0) width = values.size();
    if (values.size() != width) {
      std::ostringstream os;
      os << "returns CSV: ragged row " << line_no << " has " << values.size() << " fields, expected " << width;
      fail(ErrorKind::Format, os.str());
    }
    rows.push_back(std::move(values));
  }
  if (rows.empty()) fail(ErrorKind::Format, "returns CSV contains no data rows");

  Matrix out(static_cast<Index>(rows.size()), static_cast<Index>(width));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < width; ++j) out(static_cast<Index>(i), static_cast<Index>(j)) = rows[i][j];
  return out;
}

Matrix load_returns_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Io, "cannot open returns file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_returns_csv(buf.str());
}

Matrix synthetic_returns(std::size_t periods, Index assets, std::uint64_t seed) {
  if (periods < 1 || assets < 1) fail(ErrorKind::InvalidArgument, "synthetic_returns: empty shape");
  RngStream rng(seed, streams::kInstance);
  Vector drift(assets), vol(assets);
  for (Index j = 0; j < assets; ++j) drift[j] = rng.uniform(0.0, 0.002);
  for (Index j = 0; j < assets; ++j) vol[j] = rng.uniform(0.01, 0.03);
  Matrix r(static_cast<Index>(periods), assets);
  for (Index i = 0; i < r.rows(); ++i)
    for (Index j = 0; j < assets; ++j) r(i, j) = 1.0 + drift[j] + vol[j] * rng.normal();
  return r;
}

// ---------------------------------------------------------------------------
// Linear-constraint QP

namespace {

class ShiftSampleSet final : public ObjectiveSampler {
 public:
  explicit ShiftSampleSet(std::vector<Vector> xi) : xi_(std::move(xi)) {}
  Index dim() const override { return xi_.front().size(); }
  std::uint64_t draw(RngStream& rng) const override { return rng.index(xi_.size()); }
  std::optional<std::size_t> finite_sum_size() const override { return xi_.size(); }
  double value(const Vector& x, std::uint64_t d) const override {
    return 0.5 * (x - xi_.at(static_cast<std::size_t>(d))).squaredNorm();
  }
  void add_gradient(const Vector& x, std::uint64_t d, double scale, Vector& grad) const override {
    grad += scale * (x - xi_.at(static_cast<std::size_t>(d)));
  }

 private:
  std::vector<Vector> xi_;
};

}  // namespace

GaussianShiftSampler::GaussianShiftSampler(Vector mean, double noise) : mean_(std::move(mean)), noise_(noise) {
  if (!(noise >= 0.0)) fail(ErrorKind::InvalidArgument, "noise must be >= 0");
}

std::uint64_t GaussianShiftSampler::draw(RngStream& rng) const { return rng.next_u64(); }

Vector GaussianShiftSampler::xi_for(std::uint64_t draw) const {
  SplitMixRng rng(draw);
  Vector xi(mean_.size());
  for (Index i = 0; i < xi.size(); ++i) xi[i] = mean_[i] + noise_ * rng.normal();
  return xi;
}

double GaussianShiftSampler::value(const Vector& x, std::uint64_t draw) const {
  return 0.5 * (x - xi_for(draw)).squaredNorm();
}

void GaussianShiftSampler::add_gradient(const Vector& x, std::uint64_t draw, double scale, Vector& grad) const {
  grad += scale * (x - xi_for(draw));
}

double GaussianShiftSampler::mean_value(const Vector& x) const {
  return 0.5 * (x - mean_).squaredNorm() + 0.5 * static_cast<double>(mean_.size()) * noise_ * noise_;
}

void GaussianShiftSampler::add_mean_gradient(const Vector& x, double scale, Vector& grad) const {
  grad += scale * (x - mean_);
}

std::shared_ptr<const ObjectiveSampler> GaussianShiftSampler::sample_average(std::size_t samples,
                                                                             RngStream& rng) const {
  if (samples == 0) fail(ErrorKind::InvalidArgument, "sample_average: zero samples");
  std::vector<Vector> xi;
  xi.reserve(samples);
  for (std::size_t i = 0; i < samples; ++i) xi.push_back(xi_for(rng.next_u64()));
  return std::make_shared<ShiftSampleSet>(std::move(xi));
}

LinearQpInstance gen_linear_qp(Index n, Index M, std::uint64_t seed, double noise, double row_scale) {
  require_positive(n, "n");
  require_positive(M, "M");
  if (M > n) fail(ErrorKind::InvalidArgument, "linear QP needs M <= n for independent rows");
  if (!(row_scale > 0.0)) fail(ErrorKind::InvalidArgument, "row_scale must be positive");

  RngStream rng(seed, streams::kInstance);
  const Matrix G = gaussian_matrix(n, M, rng);
  Eigen::HouseholderQR<Matrix> qr(G);
  const Matrix basis = qr.householderQ() * Matrix::Identity(n, M);

  LinearQpInstance inst;
  inst.A = row_scale * basis.transpose();
  inst.x_star.resize(n);
  for (Index i = 0; i < n; ++i) inst.x_star[i] = rng.uniform(-1.0, 1.0);
  inst.y_star.resize(M);
  for (Index j = 0; j < M; ++j) inst.y_star[j] = rng.uniform(0.5, 1.5);
  const Vector mean = inst.x_star + inst.A.transpose() * inst.y_star;
  inst.b = inst.A * inst.x_star;

  inst.mu = 1.0;
  inst.L_f = 1.0;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(inst.A * inst.A.transpose(), Eigen::EigenvaluesOnly);
  inst.alpha = eig.eigenvalues().minCoeff() / inst.L_f;
  inst.L_h = std::sqrt(eig.eigenvalues().maxCoeff());
  inst.diameter = 20.0 * std::sqrt(static_cast<double>(n));

  auto sampler = std::make_shared<GaussianShiftSampler>(mean, noise);
  inst.f_star = sampler->mean_value(inst.x_star);

  auto& prob = inst.problem;
  prob.name = "linear_qp";
  prob.dim = n;
  prob.sampler = sampler;
  prob.constraints = std::make_shared<LinearConstraints>(inst.A, inst.b);
  prob.project = box_projector(-10.0, 10.0);
  prob.strictly_feasible =
      Vector(inst.x_star - (0.5 / (row_scale * row_scale)) * inst.A.transpose() * Vector::Ones(M));
  return inst;
}

}  // namespace rmalm
