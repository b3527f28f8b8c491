#include "rmalm/oracle.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "rmalm/auglag.hpp"
#include "rmalm/salm.hpp"

namespace rmalm {

AlmStep exact_alm_step(const StochasticProblem& prob, const Vector& y, double c, double inner_tol,
                       const std::optional<Vector>& warm_start) {
  PenaltyState st{c, y};
  st.validate(prob.num_constraints());
  ExactSolveOptions opts;
  opts.warm_start = warm_start;
  AlmStep out;
  out.x = exact_subproblem(prob, st, inner_tol, opts);
  out.y = multiplier_update(y, c, prob.constraint_values(out.x));
  return out;
}

double kkt_stationarity(const StochasticProblem& prob, const Vector& x, const Vector& y) {
  Vector g = Vector::Zero(prob.dim);
  prob.add_objective_gradient(x, 1.0, g);
  for (Index j = 0; j < y.size(); ++j) {
    if (y[j] != 0.0) prob.constraints->add_gradient(j, x, y[j], g);
  }
  return (x - prob.project(x - g)).norm();
}

double kkt_complementarity(const StochasticProblem& prob, const Vector& x, const Vector& y) {
  const Vector h = prob.constraint_values(x);
  return (y.array() * h.array()).abs().maxCoeff();
}

OracleResult solve_exact(const StochasticProblem& prob, double tol, const OracleOptions& opts) {
  prob.validate();
  if (!(tol > 0.0)) fail(ErrorKind::InvalidArgument, "solve_exact: tol must be positive");
  if (!(opts.c > 0.0)) fail(ErrorKind::InvalidArgument, "solve_exact: c must be positive");
  const double inner_tol = opts.inner_tol ? *opts.inner_tol : tol / 100.0;

  Vector x = prob.project(Vector::Zero(prob.dim));
  Vector y = Vector::Zero(prob.num_constraints());
  double dx = 0.0, dy = 0.0, viol = 0.0;
  for (long k = 1; k <= opts.max_outer; ++k) {
    AlmStep step = exact_alm_step(prob, y, opts.c, inner_tol, x);
    dx = (step.x - x).norm();
    dy = (step.y - y).norm();
    viol = max_violation(prob.constraint_values(step.x));
    x = std::move(step.x);
    y = std::move(step.y);
    if (std::max({dx, dy / opts.c, viol}) <= tol) {
      OracleResult r;
      r.x_opt = x;
      r.y_star = y;
      r.f_opt = prob.objective(x);
      r.outer_iters = k;
      r.stationarity = kkt_stationarity(prob, x, y);
      r.complementarity = kkt_complementarity(prob, x, y);
      r.max_violation = viol;
      return r;
    }
  }
  std::ostringstream os;
  os << "solve_exact: no convergence after " << opts.max_outer << " outer iterations (|dx| = " << dx
     << ", |dy|/c = " << dy / opts.c << ", max violation = " << viol << ")";
  fail(ErrorKind::NonConvergence, os.str());
}

BestIterate best_feasible_iterate(const std::vector<SolveTrace>& traces, const StochasticProblem& prob,
                                  double feas_tol, const MetricsEvaluator* evaluator) {
  std::optional<BestIterate> best;
  double min_viol = std::numeric_limits<double>::infinity();
  for (std::size_t t = 0; t < traces.size(); ++t) {
    const auto& its = traces[t].iterates;
    for (std::size_t i = 0; i < its.size(); ++i) {
      const double viol = max_violation(prob.constraint_values(its[i]));
      min_viol = std::min(min_viol, viol);
      if (!(viol <= feas_tol) || !its[i].allFinite()) continue;
      const double obj = evaluator ? evaluator->objective(its[i]) : prob.objective(its[i]);
      if (!best || obj < best->objective) best = BestIterate{its[i], t, i, obj};
    }
  }
  if (!best) {
    std::ostringstream os;
    os << "no iterate with max violation <= " << feas_tol << " (smallest violation seen: " << min_viol << ")";
    fail(ErrorKind::EmptyFeasibleSet, os.str());
  }
  return *best;
}

std::string fnv1a_hex(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

namespace {

nlohmann::json to_json(const Vector& v) {
  auto arr = nlohmann::json::array();
  for (Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

Vector vector_from(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_array()) fail(ErrorKind::Schema, std::string("ground truth: missing array ") + key);
  const auto& arr = j[key];
  Vector v(static_cast<Index>(arr.size()));
  for (std::size_t i = 0; i < arr.size(); ++i) {
    if (!arr[i].is_number()) fail(ErrorKind::Schema, std::string("ground truth: non-numeric entry in ") + key);
    v[static_cast<Index>(i)] = arr[i].get<double>();
  }
  return v;
}

}  // namespace

std::string ground_truth_json(const GroundTruth& gt) {
  nlohmann::json j;
  j["instance_hash"] = gt.instance_hash;
  j["x_opt"] = to_json(gt.x_opt);
  j["y_star"] = to_json(gt.y_star);
  j["f_opt"] = gt.f_opt;
  j["tol"] = gt.tol;
  return j.dump(2) + "\n";
}

GroundTruth parse_ground_truth(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::Parse, std::string("ground truth: ") + e.what());
  }
  GroundTruth gt;
  if (!j.contains("instance_hash") || !j["instance_hash"].is_string()) {
    fail(ErrorKind::Schema, "ground truth: missing instance_hash");
  }
  for (const char* key : {"f_opt", "tol"}) {
    if (!j.contains(key) || !j[key].is_number()) fail(ErrorKind::Schema, std::string("ground truth: missing ") + key);
  }
  gt.instance_hash = j["instance_hash"].get<std::string>();
  gt.x_opt = vector_from(j, "x_opt");
  gt.y_star = vector_from(j, "y_star");
  gt.f_opt = j["f_opt"].get<double>();
  gt.tol = j["tol"].get<double>();
  return gt;
}

void write_ground_truth(const std::string& path, const GroundTruth& gt) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::Io, "cannot write ground truth: " + path);
  out << ground_truth_json(gt);
  if (!out) fail(ErrorKind::Io, "write failed: " + path);
}

GroundTruth read_ground_truth(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Io, "cannot open ground truth: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_ground_truth(buf.str());
}

}  // namespace rmalm
