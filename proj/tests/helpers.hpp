#pragma once

#include <limits>
#include <memory>
#include <vector>

#include "rmalm/core.hpp"

namespace testutil {

using rmalm::Index;
using rmalm::Matrix;
using rmalm::Vector;

inline Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Index>(v.size()));
  Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

/// f(x) = 1/2 ||x - target||^2 over a box, h(x) = A x - b.
inline rmalm::StochasticProblem shifted_qp(const Vector& target, const Matrix& A, const Vector& b,
                                           double lo = -10.0, double hi = 10.0) {
  rmalm::StochasticProblem prob;
  prob.name = "shifted_qp";
  prob.dim = target.size();
  prob.f0.value = [target](const Vector& x) { return 0.5 * (x - target).squaredNorm(); };
  prob.f0.add_gradient = [target](const Vector& x, double s, Vector& g) { g += s * (x - target); };
  prob.constraints = std::make_shared<rmalm::LinearConstraints>(A, b);
  prob.project = rmalm::box_projector(lo, hi);
  return prob;
}

/// The 1-D problem min 1/2 (x-3)^2 s.t. x - 1 <= 0 on [-10, 10].
inline rmalm::StochasticProblem scalar_problem() {
  return shifted_qp(vec({3.0}), Matrix::Constant(1, 1, 1.0), vec({1.0}));
}

/// Scalar root of a monotone function on [lo, hi] by bisection.
template <class F>
double bisect(F f, double lo, double hi, int iters = 200) {
  double flo = f(lo);
  for (int i = 0; i < iters; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if ((fm > 0) == (flo > 0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

// Active-set enumeration: for every nonempty support S the KKT candidate is
// z_S - tau with tau fixing the sum at one; keep the closest feasible candidate.
inline Vector simplex_bruteforce(const Vector& z) {
  const Index n = z.size();
  Vector best;
  double best_dist = std::numeric_limits<double>::infinity();
  for (unsigned mask = 1; mask < (1u << n); ++mask) {
    double sum = 0.0;
    int k = 0;
    for (Index i = 0; i < n; ++i) {
      if (mask & (1u << i)) {
        sum += z[i];
        ++k;
      }
    }
    const double tau = (sum - 1.0) / k;
    Vector x = Vector::Zero(n);
    bool ok = true;
    for (Index i = 0; i < n; ++i) {
      if (mask & (1u << i)) {
        x[i] = z[i] - tau;
        if (x[i] < -1e-14) ok = false;
      }
    }
    if (!ok) continue;
    const double d = (x - z).squaredNorm();
    if (d < best_dist) {
      best_dist = d;
      best = x;
    }
  }
  return best;
}

inline Vector random_vector(Index n, rmalm::RngStream& rng, double scale = 1.0) {
  Vector v(n);
  for (Index i = 0; i < n; ++i) v[i] = scale * rng.normal();
  return v;
}

}  // namespace testutil
