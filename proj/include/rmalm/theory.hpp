// Rate constants of the convergence analysis and helpers that check measured
// trajectories against them.
#pragma once

#include <utility>
#include <vector>

namespace rmalm {

struct TheoryConstants {
  double mu = 0.0;      // strong convexity of f
  double L_h = 0.0;     // Lipschitz constant of h
  double sigma = 0.0;   // gradient second-moment bound
  double alpha = 0.0;   // strong concavity of the dual
  double a_l = 0.0;     // Lipschitz modulus of T_l^{-1} at 0
  double d = 0.0;       // diameter of X
  double tau_lo = 1.0;
  double tau_hi = 1.0;
  double eta = 1.0;
  double beta = 1.0;
};

struct Contraction {
  double theta = 0.0;  // (1 + alpha c)^{-2}
  double rho = 0.0;    // 2 theta
  bool below_half = false;
};

Contraction contraction_theta(double alpha, double c);

/// [((2 + alpha c) a_l) / (c + alpha c^2)]^2
double theta_prime(double alpha, double c, double a_l);

/// max{eta^2 tau_hi^2 sigma^2 / (2 mu eta tau_lo - 1), (beta + 1) d^2}.
/// Requires 2 mu eta tau_lo > 1.
double inner_error_constant(const TheoryConstants& tc);

struct RateFit {
  double slope = 0.0;      // estimate of log rho
  double intercept = 0.0;  // estimate of log D
  double r_squared = 0.0;
};

/// Least squares of log(value) on k. Needs >= 5 points, all values > 0.
RateFit fit_linear_rate(const std::vector<std::pair<double, double>>& trajectory);

struct ComplexityReport {
  double budget1 = 0.0;
  double budget2 = 0.0;
  double measured_ratio = 0.0;   // budget2 / budget1
  double predicted_ratio = 0.0;  // (eps1 / eps2)^{1+q}
  bool agrees = false;           // measured within [predicted/factor, predicted*factor]
};

ComplexityReport complexity_check(double eps1, double eps2, double budget1, double budget2, double q,
                                  double factor = 2.0);

/// Inner-iteration budget at which a trajectory of (cum_inner, value) pairs
/// first drops to eps. `interpolate` places the crossing by log-log
/// interpolation between the bracketing records (linear on the first segment
/// when it starts at zero budget); otherwise the budget of the first record at
/// or below eps is returned. Throws UnreachableAccuracy if eps is never reached.
double budget_to_reach(const std::vector<std::pair<double, double>>& trajectory, double eps,
                       bool interpolate = true);

}  // namespace rmalm
