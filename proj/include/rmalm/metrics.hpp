// Per-outer-iteration metrics and the fixed CSV schema they are written in.
#pragma once

#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "rmalm/core.hpp"

namespace rmalm {

inline constexpr int kMetricsSchemaVersion = 1;

struct MetricsRow {
  long k = 0;
  long cum_inner = 0;
  double obj = 0.0;
  double avg_viol = 0.0;
  double max_viol = 0.0;
  std::optional<double> dist_sq_x;
  std::optional<double> dist_sq_y;
  double wall_time_s = 0.0;
};

/// Invoked once per outer iteration with (k, inner iterations so far, row).
using MetricsCallback = std::function<void(long, long, const MetricsRow&)>;

/// Reference solution of an instance.
struct GroundTruth {
  std::string instance_hash;
  Vector x_opt;
  Vector y_star;
  double f_opt = 0.0;
  double tol = 0.0;
};

/// Computes MetricsRow values for a problem. Objectives of expectation-form
/// problems are estimated on a fixed held-out sample drawn from `heldout_seed`.
class MetricsEvaluator {
 public:
  explicit MetricsEvaluator(const StochasticProblem& prob, std::optional<Vector> x_opt = std::nullopt,
                            std::optional<Vector> y_star = std::nullopt,
                            std::size_t heldout_samples = 100000, std::uint64_t heldout_seed = 0);

  double objective(const Vector& x) const;
  MetricsRow row(long k, long cum_inner, const Vector& x, const Vector& y, const Vector& hvals,
                 double wall_time_s) const;

  const std::optional<Vector>& x_opt() const { return x_opt_; }
  const std::optional<Vector>& y_star() const { return y_star_; }

 private:
  const StochasticProblem* prob_;
  std::optional<Vector> x_opt_;
  std::optional<Vector> y_star_;
  std::shared_ptr<const ObjectiveSampler> heldout_;
};

const std::vector<std::string>& metrics_columns();

/// 17 significant digits; missing optional values are empty cells.
void write_metrics_csv(std::ostream& out, const std::vector<MetricsRow>& rows);
void write_metrics_csv(const std::string& path, const std::vector<MetricsRow>& rows);
std::vector<MetricsRow> parse_metrics_csv(const std::string& text);
std::vector<MetricsRow> read_metrics_csv(const std::string& path);

std::string format_double(double v);

}  // namespace rmalm
