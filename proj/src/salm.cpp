#include "rmalm/salm.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>
#include <thread>

#include "rmalm/metrics.hpp"

namespace rmalm {

NoiseLaw parse_noise_law(const std::string& name) {
  if (name == "gaussian") return NoiseLaw::Gaussian;
  if (name == "uniform") return NoiseLaw::Uniform;
  if (name == "rademacher") return NoiseLaw::Rademacher;
  fail(ErrorKind::Validation, "unknown noise law '" + name + "' (expected gaussian, uniform or rademacher)");
}

const char* to_string(NoiseLaw law) {
  switch (law) {
    case NoiseLaw::Gaussian: return "gaussian";
    case NoiseLaw::Uniform: return "uniform";
    case NoiseLaw::Rademacher: return "rademacher";
  }
  return "?";
}

Vector draw_noise(NoiseLaw law, double sigma, Index n, RngStream& rng) {
  Vector eps(n);
  const double sd = sigma / std::sqrt(static_cast<double>(n));
  for (Index i = 0; i < n; ++i) {
    switch (law) {
      case NoiseLaw::Gaussian: eps[i] = sd * rng.normal(); break;
      case NoiseLaw::Uniform: eps[i] = rng.uniform(-std::sqrt(3.0) * sd, std::sqrt(3.0) * sd); break;
      case NoiseLaw::Rademacher: eps[i] = (rng.next_u64() & 1u) ? sd : -sd; break;
    }
  }
  return eps;
}

void SalmConfig::validate() const {
  std::vector<std::string> errs;
  if (!(c0 > 0.0)) errs.push_back("c0 must be positive");
  if (!(q > 0.5 && q <= 1.0)) {
    errs.push_back("q must lie in (1/2, 1]: the penalties must satisfy sum c^k = inf and sum (c^k)^2 < inf");
  }
  if (!(sigma >= 0.0)) errs.push_back("sigma must be >= 0");
  if (outer_iters < 0) errs.push_back("outer_iters must be >= 0");
  if (!(inner_tol > 0.0)) errs.push_back("inner_tol must be positive");
  if (seeds.empty()) errs.push_back("seeds must be nonempty");
  if (!errs.empty()) {
    std::ostringstream os;
    os << "invalid salm config:";
    for (const auto& e : errs) os << "\n  " << e;
    fail(ErrorKind::Validation, os.str());
  }
}

double SalmConfig::penalty(long k) const { return c0 * std::pow(static_cast<double>(k + 1), -q); }

double subproblem_residual(const StochasticProblem& prob, const PenaltyState& st, const Vector& x) {
  const Vector g = auglag_grad_full(prob, x, st);
  return (x - prob.project(x - g)).norm();
}

Vector exact_subproblem(const StochasticProblem& prob, const PenaltyState& st, double tol,
                        const ExactSolveOptions& opts) {
  if (!(tol > 0.0)) fail(ErrorKind::InvalidArgument, "exact_subproblem: tol must be positive");
  if (!prob.has_exact_objective()) {
    fail(ErrorKind::Unsupported, "exact_subproblem needs a deterministically evaluable objective");
  }
  Vector x = prob.project(opts.warm_start ? *opts.warm_start : Vector::Zero(prob.dim));
  Vector gx = auglag_grad_full(prob, x, st);
  double res = (x - prob.project(x - gx)).norm();
  if (res <= tol) return x;

  // Gradient-difference backtracking: accept step 1/L once
  // ||grad(x+) - grad(z)|| <= L ||x+ - z||. Unlike the function-value test it
  // stays reliable near the roundoff floor.
  double L = 1.0;
  Vector z = x, gz = gx;
  double t = 1.0;
  for (long it = 0; it < opts.max_iters; ++it) {
    Vector x_new, g_new;
    for (int bt = 0;; ++bt) {
      x_new = prob.project(z - gz / L);
      g_new = auglag_grad_full(prob, x_new, st);
      const double dx = (x_new - z).norm();
      if (dx == 0.0 || (g_new - gz).norm() <= L * dx * (1.0 + 1e-12)) break;
      L *= 2.0;
      if (bt > 200) fail(ErrorKind::NonConvergence, "exact_subproblem: line search failed");
    }
    res = (x_new - prob.project(x_new - g_new)).norm();
    if (res <= tol) return x_new;

    const double t_new = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    if ((z - x_new).dot(x_new - x) > 0.0) {
      // momentum points uphill: restart
      z = x_new;
      gz = g_new;
      t = 1.0;
    } else {
      z = x_new + ((t - 1.0) / t_new) * (x_new - x);
      gz = auglag_grad_full(prob, z, st);
      t = t_new;
    }
    x = std::move(x_new);
    L *= 0.95;
  }
  std::ostringstream os;
  os << "exact_subproblem: " << opts.max_iters << " iterations without reaching tol " << tol
     << " (final residual " << res << ")";
  fail(ErrorKind::NonConvergence, os.str());
}

namespace {

SalmTrajectory run_one(const StochasticProblem& prob, const SalmConfig& cfg, const Vector& y_star,
                       std::uint64_t seed) {
  const Index M = prob.num_constraints();
  SalmTrajectory tr;
  tr.seed = seed;
  RngStream rng(seed, streams::kSalmNoise);
  PenaltyState st{cfg.c0, cfg.y0 ? *cfg.y0 : Vector::Zero(M)};
  st.validate(M);
  Vector x_hat = prob.project(cfg.x0 ? *cfg.x0 : Vector::Zero(prob.dim));
  Vector eps_sum = Vector::Zero(prob.dim);

  tr.dist_sq_y.push_back((st.y - y_star).squaredNorm());
  tr.multipliers.push_back(st.y);
  for (long k = 0; k < cfg.outer_iters; ++k) {
    st.c = cfg.penalty(k);
    ExactSolveOptions opts;
    opts.warm_start = x_hat;
    x_hat = exact_subproblem(prob, st, cfg.inner_tol, opts);
    const Vector eps = draw_noise(cfg.noise_law, cfg.sigma, prob.dim, rng);
    eps_sum += eps;
    const Vector x = prob.project(x_hat - st.c * eps);
    st.y = multiplier_update(st.y, st.c, prob.constraint_values(x));
    tr.c.push_back(st.c);
    tr.dist_sq_y.push_back((st.y - y_star).squaredNorm());
    tr.multipliers.push_back(st.y);
  }
  tr.noise_mean = cfg.outer_iters > 0 ? Vector(eps_sum / static_cast<double>(cfg.outer_iters))
                                      : Vector(Vector::Zero(prob.dim));
  return tr;
}

}  // namespace

std::vector<SalmTrajectory> salm_run(const StochasticProblem& prob, const SalmConfig& cfg,
                                     const Vector& y_star, unsigned threads) {
  prob.validate();
  cfg.validate();
  if (y_star.size() != prob.num_constraints()) fail(ErrorKind::Dimension, "salm_run: y* has wrong length");

  std::vector<SalmTrajectory> out(cfg.seeds.size());
  std::vector<std::exception_ptr> errors(cfg.seeds.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next++) < cfg.seeds.size();) {
      try {
        out[i] = run_one(prob, cfg, y_star, cfg.seeds[i]);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const unsigned n = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(cfg.seeds.size())));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < n; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

void write_salm_csv(std::ostream& out, const std::vector<SalmTrajectory>& trajs) {
  out << "seed,k,c_k,dist_sq_y\n";
  for (const auto& tr : trajs) {
    for (std::size_t k = 0; k < tr.dist_sq_y.size(); ++k) {
      out << tr.seed << ',' << k << ',' << (k < tr.c.size() ? format_double(tr.c[k]) : std::string()) << ','
          << format_double(tr.dist_sq_y[k]) << '\n';
    }
  }
}

void write_salm_csv(const std::string& path, const std::vector<SalmTrajectory>& trajs) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::Io, "cannot write trajectory file: " + path);
  write_salm_csv(out, trajs);
}

}  // namespace rmalm
