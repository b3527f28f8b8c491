#include "rmalm/theory.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "rmalm/core.hpp"

namespace rmalm {

Contraction contraction_theta(double alpha, double c) {
  if (!(alpha > 0.0) || !(c > 0.0)) fail(ErrorKind::InvalidArgument, "contraction_theta: alpha and c must be positive");
  Contraction out;
  out.theta = 1.0 / ((1.0 + alpha * c) * (1.0 + alpha * c));
  out.rho = 2.0 * out.theta;
  out.below_half = out.theta < 0.5;
  return out;
}

double theta_prime(double alpha, double c, double a_l) {
  if (!(alpha > 0.0) || !(c > 0.0) || !(a_l > 0.0)) {
    fail(ErrorKind::InvalidArgument, "theta_prime: alpha, c and a_l must be positive");
  }
  const double r = (2.0 + alpha * c) * a_l / (c + alpha * c * c);
  return r * r;
}

double inner_error_constant(const TheoryConstants& tc) {
  const double denom = 2.0 * tc.mu * tc.eta * tc.tau_lo - 1.0;
  if (!(denom > 0.0)) {
    std::ostringstream os;
    os << "assumption violated: 2 mu eta tau_lo > 1 does not hold (2 mu eta tau_lo = " << denom + 1.0 << ")";
    fail(ErrorKind::AssumptionViolated, os.str());
  }
  const double noise = tc.eta * tc.eta * tc.tau_hi * tc.tau_hi * tc.sigma * tc.sigma / denom;
  return std::max(noise, (tc.beta + 1.0) * tc.d * tc.d);
}

RateFit fit_linear_rate(const std::vector<std::pair<double, double>>& trajectory) {
  const std::size_t n = trajectory.size();
  if (n < 5) fail(ErrorKind::InvalidArgument, "fit_linear_rate: need at least 5 points");
  double mk = 0.0, ml = 0.0;
  std::vector<double> logs(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto [k, v] = trajectory[i];
    if (!(v > 0.0)) {
      std::ostringstream os;
      os << "fit_linear_rate: value " << v << " at k = " << k << " is not positive (log undefined)";
      fail(ErrorKind::InvalidArgument, os.str());
    }
    logs[i] = std::log(v);
    mk += k;
    ml += logs[i];
  }
  mk /= static_cast<double>(n);
  ml /= static_cast<double>(n);
  double skk = 0.0, skl = 0.0, sll = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dk = trajectory[i].first - mk, dl = logs[i] - ml;
    skk += dk * dk;
    skl += dk * dl;
    sll += dl * dl;
  }
  if (skk == 0.0) fail(ErrorKind::InvalidArgument, "fit_linear_rate: all k values coincide");
  RateFit fit;
  fit.slope = skl / skk;
  fit.intercept = ml - fit.slope * mk;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = logs[i] - (fit.intercept + fit.slope * trajectory[i].first);
    ss_res += r * r;
  }
  // A flat series is fit exactly by a zero slope.
  fit.r_squared = sll > 0.0 ? 1.0 - ss_res / sll : 1.0;
  return fit;
}

ComplexityReport complexity_check(double eps1, double eps2, double budget1, double budget2, double q,
                                  double factor) {
  if (!(eps2 > 0.0) || eps1 < eps2) fail(ErrorKind::InvalidArgument, "complexity_check: need eps1 >= eps2 > 0");
  if (!(budget1 > 0.0) || !(budget2 > 0.0)) fail(ErrorKind::InvalidArgument, "complexity_check: budgets must be positive");
  if (!(factor >= 1.0)) fail(ErrorKind::InvalidArgument, "complexity_check: factor must be >= 1");
  ComplexityReport r;
  r.budget1 = budget1;
  r.budget2 = budget2;
  r.measured_ratio = budget2 / budget1;
  r.predicted_ratio = std::pow(eps1 / eps2, 1.0 + q);
  r.agrees = r.measured_ratio >= r.predicted_ratio / factor && r.measured_ratio <= r.predicted_ratio * factor;
  return r;
}

double budget_to_reach(const std::vector<std::pair<double, double>>& trajectory, double eps, bool interpolate) {
  if (!(eps > 0.0)) fail(ErrorKind::InvalidArgument, "budget_to_reach: eps must be positive");
  for (std::size_t i = 0; i < trajectory.size(); ++i) {
    const auto [b1, v1] = trajectory[i];
    if (v1 > eps) continue;
    if (!interpolate || i == 0) return b1;
    const auto [b0, v0] = trajectory[i - 1];
    if (!(v1 > 0.0)) return b1;
    const double t = (std::log(eps) - std::log(v0)) / (std::log(v1) - std::log(v0));
    if (b0 <= 0.0) return b0 + t * (b1 - b0);
    return std::exp(std::log(b0) + t * (std::log(b1) - std::log(b0)));
  }
  std::ostringstream os;
  os << "accuracy " << eps << " not reached within the recorded budget";
  fail(ErrorKind::UnreachableAccuracy, os.str());
}

}  // namespace rmalm
