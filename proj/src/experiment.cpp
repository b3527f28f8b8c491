#include "rmalm/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <thread>

#include "rmalm/problems.hpp"

namespace rmalm {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

// ---------------------------------------------------------------------------
// Config reading. Each section tracks the keys it consumed so leftovers can
// be reported as unknown, and accumulates errors instead of throwing on the
// first one.

class Section {
 public:
  Section(const json& j, std::string path, std::vector<std::string>& errs)
      : j_(j), path_(std::move(path)), errs_(errs) {
    if (!j_.is_object()) error("", "must be an object");
  }

  double number(const std::string& key, double def, bool (*ok)(double) = nullptr, const char* rule = nullptr) {
    const json* v = find(key);
    double out = def;
    if (v) {
      if (!v->is_number()) {
        error(key, "must be a number");
        return def;
      }
      out = v->get<double>();
    }
    if (ok && !ok(out)) error(key, rule);
    resolved_[key] = out;
    return out;
  }

  std::optional<double> opt_number(const std::string& key, bool (*ok)(double) = nullptr,
                                   const char* rule = nullptr) {
    const json* v = find(key);
    if (!v) return std::nullopt;
    if (!v->is_number()) {
      error(key, "must be a number");
      return std::nullopt;
    }
    const double out = v->get<double>();
    if (ok && !ok(out)) error(key, rule);
    resolved_[key] = out;
    return out;
  }

  long integer(const std::string& key, long def, long lo, long hi = std::numeric_limits<long>::max()) {
    const auto v = opt_integer(key, lo, hi);
    resolved_[key] = v.value_or(def);
    return v.value_or(def);
  }

  std::optional<long> opt_integer(const std::string& key, long lo, long hi = std::numeric_limits<long>::max()) {
    const json* v = find(key);
    if (!v) return std::nullopt;
    if (!v->is_number_integer()) {
      error(key, "must be an integer");
      return std::nullopt;
    }
    const long out = v->get<long>();
    if (out < lo || out > hi) {
      std::ostringstream os;
      os << "must be in [" << lo << ", " << hi << "]";
      error(key, os.str());
    }
    resolved_[key] = out;
    return out;
  }

  std::string string(const std::string& key, const std::string& def, const std::set<std::string>& allowed = {}) {
    const auto v = opt_string(key, allowed);
    resolved_[key] = v.value_or(def);
    return v.value_or(def);
  }

  std::optional<std::string> opt_string(const std::string& key, const std::set<std::string>& allowed = {}) {
    const json* v = find(key);
    if (!v) return std::nullopt;
    if (!v->is_string()) {
      error(key, "must be a string");
      return std::nullopt;
    }
    const auto out = v->get<std::string>();
    if (!allowed.empty() && !allowed.count(out)) {
      std::string list;
      for (const auto& a : allowed) list += (list.empty() ? "" : ", ") + a;
      error(key, "'" + out + "' is not one of: " + list);
    }
    resolved_[key] = out;
    return out;
  }

  bool boolean(const std::string& key, bool def) {
    const json* v = find(key);
    bool out = def;
    if (v) {
      if (!v->is_boolean()) error(key, "must be true or false");
      else out = v->get<bool>();
    }
    resolved_[key] = out;
    return out;
  }

  std::optional<Vector> vector(const std::string& key) {
    const json* v = find(key);
    if (!v) return std::nullopt;
    if (!v->is_array() || v->empty()) {
      error(key, "must be a nonempty array of numbers");
      return std::nullopt;
    }
    Vector out(static_cast<Index>(v->size()));
    for (std::size_t i = 0; i < v->size(); ++i) {
      if (!(*v)[i].is_number()) {
        error(key, "must be a nonempty array of numbers");
        return std::nullopt;
      }
      out[static_cast<Index>(i)] = (*v)[i].get<double>();
    }
    resolved_[key] = *v;
    return out;
  }

  std::optional<Matrix> matrix(const std::string& key) {
    const json* v = find(key);
    if (!v) return std::nullopt;
    auto bad = [&] {
      error(key, "must be a nonempty rectangular array of number rows");
      return std::nullopt;
    };
    if (!v->is_array() || v->empty() || !(*v)[0].is_array() || (*v)[0].empty()) return bad();
    const std::size_t cols = (*v)[0].size();
    Matrix out(static_cast<Index>(v->size()), static_cast<Index>(cols));
    for (std::size_t i = 0; i < v->size(); ++i) {
      const auto& row = (*v)[i];
      if (!row.is_array() || row.size() != cols) return bad();
      for (std::size_t c = 0; c < cols; ++c) {
        if (!row[c].is_number()) return bad();
        out(static_cast<Index>(i), static_cast<Index>(c)) = row[c].get<double>();
      }
    }
    resolved_[key] = *v;
    return out;
  }

  const json* raw(const std::string& key) { return find(key); }
  void keep(const std::string& key, json value) { resolved_[key] = std::move(value); }

  void error(const std::string& key, const std::string& msg) {
    errs_.push_back((key.empty() ? path_ : path_ + "." + key) + ": " + msg);
  }

  /// Reports every key that no getter asked for.
  json finish() {
    if (j_.is_object()) {
      for (auto it = j_.begin(); it != j_.end(); ++it) {
        if (!used_.count(it.key())) error(it.key(), "unknown key");
      }
    }
    return resolved_;
  }

 private:
  const json* find(const std::string& key) {
    used_.insert(key);
    if (!j_.is_object() || !j_.contains(key)) return nullptr;
    return &j_.at(key);
  }

  const json& j_;
  std::string path_;
  std::vector<std::string>& errs_;
  std::set<std::string> used_;
  json resolved_ = json::object();
};

bool positive(double v) { return v > 0.0; }
bool nonneg(double v) { return v >= 0.0; }
bool unit_open(double v) { return v > 0.0 && v < 1.0; }
bool at_least_one(double v) { return v >= 1.0; }

// ---------------------------------------------------------------------------
// Problem section

struct ProblemSpec {
  std::string type;
  json resolved;
  // qcqp / linear_qp / two_stage
  long n = 0, p = 0, M = 0, N = 0;
  std::uint64_t seed = 1;
  bool finite = true;
  double lambda = 2.0, radius = 5.0, noise = 1.0, row_scale = 1.0;
  // cvar
  std::optional<std::string> returns_csv;
  long periods = 50, assets = 5;
  double level = 0.95;
  std::optional<double> min_return;
  double eps_reg = 0.0;
  // custom_qp
  Vector target;
  Matrix A;
  Vector b;
  double lower = -10.0, upper = 10.0;
};

ProblemSpec read_problem(const json& j, std::vector<std::string>& errs) {
  ProblemSpec ps;
  Section s(j, "problem", errs);
  ps.type = s.string("type", "", {"qcqp", "two_stage", "cvar", "linear_qp", "custom_qp"});
  if (!j.is_object() || !j.contains("type")) s.error("type", "is required");
  if (ps.type == "qcqp") {
    ps.n = s.integer("n", 10, 1);
    ps.p = s.integer("p", 5, 1);
    ps.M = s.integer("M", 5, 1);
    ps.finite = s.string("mode", "finite_sum", {"finite_sum", "expectation"}) == "finite_sum";
    ps.N = s.integer("N", 1000, 1);
    ps.seed = static_cast<std::uint64_t>(s.integer("seed", 1, 0));
  } else if (ps.type == "two_stage") {
    ps.n = s.integer("n", 5, 1);
    ps.N = s.integer("N", 100, 1);
    ps.seed = static_cast<std::uint64_t>(s.integer("seed", 1, 0));
    ps.lambda = s.number("lambda", 2.0, positive, "must be positive");
    ps.radius = s.number("radius", 5.0, positive, "must be positive");
  } else if (ps.type == "cvar") {
    ps.returns_csv = s.opt_string("returns_csv");
    ps.periods = s.integer("periods", 50, 1);
    ps.assets = s.integer("assets", 5, 1);
    ps.seed = static_cast<std::uint64_t>(s.integer("seed", 1, 0));
    ps.level = s.number("p", 0.95, unit_open, "must lie in (0, 1)");
    ps.min_return = s.opt_number("min_return");
    ps.eps_reg = s.number("eps_reg", 0.0, nonneg, "must be >= 0");
  } else if (ps.type == "linear_qp") {
    ps.n = s.integer("n", 10, 1);
    ps.M = s.integer("M", 5, 1);
    ps.seed = static_cast<std::uint64_t>(s.integer("seed", 1, 0));
    ps.noise = s.number("noise", 1.0, nonneg, "must be >= 0");
    ps.row_scale = s.number("row_scale", 1.0, positive, "must be positive");
    if (ps.M > ps.n) s.error("M", "must not exceed n");
  } else if (ps.type == "custom_qp") {
    const auto t = s.vector("target");
    const auto A = s.matrix("A");
    const auto b = s.vector("b");
    ps.lower = s.number("lower", -10.0);
    ps.upper = s.number("upper", 10.0);
    if (!t) s.error("target", "is required");
    if (!A) s.error("A", "is required");
    if (!b) s.error("b", "is required");
    if (t && A && b) {
      if (A->cols() != t->size()) s.error("A", "column count must equal the length of target");
      if (A->rows() != b->size()) s.error("b", "length must equal the row count of A");
      ps.target = *t;
      ps.A = *A;
      ps.b = *b;
    }
    if (!(ps.lower <= ps.upper)) s.error("lower", "must not exceed upper");
  }
  ps.resolved = s.finish();
  return ps;
}

json vec_json(const Vector& v) {
  json arr = json::array();
  for (Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

json mat_json(const Matrix& m) {
  json rows = json::array();
  for (Index i = 0; i < m.rows(); ++i) rows.push_back(vec_json(m.row(i).transpose()));
  return rows;
}

BuiltProblem build(const ProblemSpec& ps) {
  BuiltProblem out;
  out.instance_hash = fnv1a_hex(ps.resolved.dump());
  json& d = out.data;
  d["type"] = ps.type;
  if (ps.type == "qcqp") {
    auto inst = gen_qcqp(ps.n, ps.p, ps.M, ps.finite ? QcqpMode::FiniteSum : QcqpMode::Expectation,
                         static_cast<std::size_t>(ps.N), ps.seed);
    json cons = json::array();
    for (Index j = 0; j < inst.constraints->size(); ++j) {
      const auto uj = static_cast<std::size_t>(j);
      cons.push_back({{"Q", mat_json(inst.constraints->Q()[uj])},
                      {"a", vec_json(inst.constraints->a()[uj])},
                      {"b", inst.constraints->b()[j]}});
    }
    d["constraints"] = cons;
    if (ps.finite) {
      json samples = json::array();
      for (std::size_t i = 0; i < inst.objective->H().size(); ++i) {
        samples.push_back({{"H", mat_json(inst.objective->H()[i])}, {"c", vec_json(inst.objective->c()[i])}});
      }
      d["samples"] = samples;
    }
    out.problem = std::move(inst.problem);
  } else if (ps.type == "two_stage") {
    auto inst = gen_two_stage(ps.n, static_cast<std::size_t>(ps.N), ps.seed, ps.lambda, ps.radius);
    d["cost"] = vec_json(inst.cost);
    d["xi"] = mat_json(inst.xi);
    d["x0"] = vec_json(inst.x0);
    d["y0"] = vec_json(inst.y0);
    d["lambda"] = inst.lambda;
    d["radius"] = inst.radius;
    out.problem = std::move(inst.problem);
  } else if (ps.type == "cvar") {
    const Matrix R = ps.returns_csv
                         ? load_returns_csv(*ps.returns_csv)
                         : synthetic_returns(static_cast<std::size_t>(ps.periods), ps.assets, ps.seed);
    auto inst = gen_cvar(R, ps.level, ps.min_return, ps.eps_reg);
    d["returns"] = mat_json(inst.returns);
    d["p"] = inst.p;
    d["min_return"] = inst.min_return;
    d["eps_reg"] = inst.eps_reg;
    out.problem = std::move(inst.problem);
    // The hash must cover the returns actually loaded, not just the file name.
    out.instance_hash = fnv1a_hex(ps.resolved.dump() + d["returns"].dump());
  } else if (ps.type == "linear_qp") {
    auto inst = gen_linear_qp(ps.n, ps.M, ps.seed, ps.noise, ps.row_scale);
    d["A"] = mat_json(inst.A);
    d["b"] = vec_json(inst.b);
    d["mean"] = vec_json(std::static_pointer_cast<const GaussianShiftSampler>(inst.problem.sampler)->mean());
    d["noise"] = ps.noise;
    d["x_star"] = vec_json(inst.x_star);
    d["y_star"] = vec_json(inst.y_star);
    GroundTruth gt{out.instance_hash, inst.x_star, inst.y_star, inst.f_star, 0.0};
    out.analytic = gt;
    out.alpha = inst.alpha;
    out.problem = std::move(inst.problem);
  } else if (ps.type == "custom_qp") {
    StochasticProblem& prob = out.problem;
    prob.name = "custom_qp";
    prob.dim = ps.target.size();
    const Vector target = ps.target;
    prob.f0.value = [target](const Vector& x) { return 0.5 * (x - target).squaredNorm(); };
    prob.f0.add_gradient = [target](const Vector& x, double scale, Vector& g) { g += scale * (x - target); };
    prob.constraints = std::make_shared<LinearConstraints>(ps.A, ps.b);
    prob.project = box_projector(ps.lower, ps.upper);
    d["target"] = vec_json(ps.target);
    d["A"] = mat_json(ps.A);
    d["b"] = vec_json(ps.b);
  } else {
    fail(ErrorKind::Validation, "problem.type: unsupported problem type '" + ps.type + "'");
  }
  d["instance_hash"] = out.instance_hash;
  d["dim"] = out.problem.dim;
  d["num_constraints"] = out.problem.num_constraints();
  return out;
}

void throw_if(const std::vector<std::string>& errs) {
  if (errs.empty()) return;
  std::ostringstream os;
  os << "invalid config (" << errs.size() << (errs.size() == 1 ? " problem" : " problems") << "):";
  for (const auto& e : errs) os << "\n  " << e;
  fail(ErrorKind::Validation, os.str());
}

// ---------------------------------------------------------------------------
// Execution helpers

void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& fn) {
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next++) < n;) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const unsigned count = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(n)));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < count; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) fail(ErrorKind::Io, "cannot create output directory: " + dir);
  const fs::path probe = fs::path(dir) / ".write_test";
  std::ofstream out(probe);
  if (!out) fail(ErrorKind::Io, "output directory is not writable: " + dir);
  out.close();
  fs::remove(probe, ec);
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::Io, "cannot write " + path.string());
  out << text;
  if (!out) fail(ErrorKind::Io, "write failed: " + path.string());
}

json row_json(const MetricsRow& r) {
  json j;
  j["k"] = r.k;
  j["cum_inner"] = r.cum_inner;
  j["obj"] = r.obj;
  j["avg_viol"] = r.avg_viol;
  j["max_viol"] = r.max_viol;
  j["dist_sq_x"] = r.dist_sq_x ? json(*r.dist_sq_x) : json(nullptr);
  j["dist_sq_y"] = r.dist_sq_y ? json(*r.dist_sq_y) : json(nullptr);
  return j;
}

const char* solver_name(SolverKind k) {
  switch (k) {
    case SolverKind::Rmalm: return "rmalm";
    case SolverKind::Salm: return "salm";
    case SolverKind::Pdsg: return "pdsg";
    case SolverKind::Oracle: return "oracle";
  }
  return "?";
}

std::optional<GroundTruth> resolve_ground_truth(const ExperimentConfig& cfg, const BuiltProblem& bp) {
  if (cfg.ground_truth_path) {
    GroundTruth gt = read_ground_truth(*cfg.ground_truth_path);
    if (gt.instance_hash != bp.instance_hash) {
      fail(ErrorKind::Validation, "ground truth " + *cfg.ground_truth_path + " belongs to instance " +
                                      gt.instance_hash + ", not " + bp.instance_hash);
    }
    if (gt.x_opt.size() != bp.problem.dim || gt.y_star.size() != bp.problem.num_constraints()) {
      fail(ErrorKind::Schema, "ground truth dimensions do not match the instance");
    }
    return gt;
  }
  if (cfg.compute_ground_truth) {
    const OracleResult r = solve_exact(bp.problem, cfg.oracle_tol, cfg.oracle);
    return GroundTruth{bp.instance_hash, r.x_opt, r.y_star, r.f_opt, cfg.oracle_tol};
  }
  return bp.analytic;
}

}  // namespace

// ---------------------------------------------------------------------------

ExperimentConfig parse_experiment_config(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    fail(ErrorKind::Parse, std::string("config is not valid JSON: ") + e.what());
  }
  std::vector<std::string> errs;
  ExperimentConfig cfg;
  Section top(doc, "config", errs);

  if (const json* p = top.raw("problem")) {
    const ProblemSpec ps = read_problem(*p, errs);
    cfg.problem = ps.resolved;
    top.keep("problem", ps.resolved);
  } else {
    top.error("problem", "is required");
  }

  if (const json* sj = top.raw("solver")) {
    Section s(*sj, "solver", errs);
    const std::string type = s.string("type", "rmalm", {"rmalm", "salm", "pdsg", "oracle"});
    if (type == "rmalm") {
      cfg.solver = SolverKind::Rmalm;
      auto& r = cfg.rmalm;
      r.c = s.number("c", r.c, positive, "must be positive");
      r.S0 = s.integer("S0", r.S0, 2);
      r.q = s.number("q", r.q, positive, "must be positive");
      const auto growth = s.opt_number("budget_growth", at_least_one, "must be >= 1");
      const auto rate = s.opt_number("contraction_rate", unit_open, "must lie in (0, 1)");
      if (growth && rate) s.error("budget_growth", "give either budget_growth or contraction_rate, not both");
      if (growth) r.budget_growth = *growth;
      if (rate && unit_open(*rate)) r.budget_growth = RmalmConfig::growth_from_rate(*rate, r.q);
      s.keep("budget_growth", r.budget_growth);
      const double tau = s.number("tau", 1.0, positive, "must be positive");
      const double eta = s.number("eta", 1.0, positive, "must be positive");
      r.tau = [tau](long) { return tau; };
      r.eta = [eta](long) { return eta; };
      r.beta = s.number("beta", r.beta, positive, "must be positive");
      r.batch_obj = static_cast<std::size_t>(s.integer("batch_obj", 50, 1));
      r.batch_con = static_cast<std::size_t>(s.integer("batch_con", 50, 1));
      r.outer_iters = s.integer("outer_iters", r.outer_iters, 0);
      if (const auto cap = s.opt_integer("budget_cap", 2)) r.budget_cap = *cap;
      r.global_cap = s.integer("global_cap", r.global_cap, 1);
    } else if (type == "salm") {
      cfg.solver = SolverKind::Salm;
      auto& sc = cfg.salm;
      sc.c0 = s.number("c0", sc.c0, positive, "must be positive");
      sc.q = s.number("q", sc.q, [](double q) { return q > 0.5 && q <= 1.0; },
                      "must lie in (1/2, 1] so that sum c^k diverges and sum (c^k)^2 converges");
      sc.sigma = s.number("sigma", sc.sigma, nonneg, "must be >= 0");
      sc.noise_law = parse_noise_law(s.string("noise_law", "gaussian", {"gaussian", "uniform", "rademacher"}));
      sc.outer_iters = s.integer("outer_iters", sc.outer_iters, 0);
      sc.inner_tol = s.number("inner_tol", sc.inner_tol, positive, "must be positive");
    } else if (type == "pdsg") {
      cfg.solver = SolverKind::Pdsg;
      auto& pc = cfg.pdsg;
      pc.step0 = s.number("step0", pc.step0, positive, "must be positive");
      pc.decay = s.number("decay", pc.decay, nonneg, "must be >= 0");
      pc.batch_obj = static_cast<std::size_t>(s.integer("batch_obj", 50, 1));
      pc.batch_con = static_cast<std::size_t>(s.integer("batch_con", 50, 1));
      pc.iters = s.integer("iters", pc.iters, 0);
      pc.record_every = s.integer("record_every", pc.record_every, 1);
    } else {
      cfg.solver = SolverKind::Oracle;
    }
    top.keep("solver", s.finish());
  } else {
    top.error("solver", "is required");
  }

  if (const json* oj = top.raw("oracle")) {
    Section o(*oj, "oracle", errs);
    cfg.oracle_tol = o.number("tol", cfg.oracle_tol, positive, "must be positive");
    cfg.oracle.c = o.number("c", cfg.oracle.c, positive, "must be positive");
    cfg.oracle.max_outer = o.integer("max_outer", cfg.oracle.max_outer, 1);
    top.keep("oracle", o.finish());
  }

  if (const json* ej = top.raw("evaluation")) {
    Section e(*ej, "evaluation", errs);
    cfg.heldout_samples = static_cast<std::size_t>(e.integer("heldout_samples", 100000, 1));
    if (const auto hs = e.opt_integer("heldout_seed", 0)) cfg.heldout_seed = static_cast<std::uint64_t>(*hs);
    top.keep("evaluation", e.finish());
  }

  if (const json* rj = top.raw("report")) {
    Section r(*rj, "report", errs);
    cfg.complexity_eps = r.opt_number("complexity_eps", positive, "must be positive");
    top.keep("report", r.finish());
  }

  if (const json* sj = top.raw("seeds")) {
    cfg.seeds.clear();
    if (!sj->is_array() || sj->empty()) {
      top.error("seeds", "must be a nonempty array of nonnegative integers");
    } else {
      for (const auto& v : *sj) {
        if (!v.is_number_unsigned()) {
          top.error("seeds", "must be a nonempty array of nonnegative integers");
          break;
        }
        cfg.seeds.push_back(v.get<std::uint64_t>());
      }
    }
  }
  top.keep("seeds", cfg.seeds);
  cfg.threads = static_cast<unsigned>(top.integer("threads", 1, 1, 1024));
  cfg.output_dir = top.string("output_dir", "out");
  cfg.ground_truth_path = top.opt_string("ground_truth");
  cfg.compute_ground_truth = top.boolean("compute_ground_truth", false);
  if (cfg.ground_truth_path && cfg.compute_ground_truth) {
    top.error("ground_truth", "cannot be combined with compute_ground_truth");
  }
  cfg.raw = top.finish();
  throw_if(errs);
  cfg.salm.seeds = cfg.seeds;
  return cfg;
}

ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Io, "cannot open config: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_experiment_config(buf.str());
}

BuiltProblem build_problem(const json& problem_section) {
  std::vector<std::string> errs;
  const ProblemSpec ps = read_problem(problem_section, errs);
  throw_if(errs);
  return build(ps);
}

std::string run_generate(const ExperimentConfig& cfg) {
  const BuiltProblem bp = build_problem(cfg.problem);
  ensure_dir(cfg.output_dir);
  const fs::path path = fs::path(cfg.output_dir) / "instance.json";
  json doc = bp.data;
  doc["problem"] = cfg.problem;
  write_text(path, doc.dump(1) + "\n");
  return path.string();
}

GroundTruth run_oracle(const ExperimentConfig& cfg) {
  const BuiltProblem bp = build_problem(cfg.problem);
  if (!bp.problem.has_exact_objective()) {
    fail(ErrorKind::Validation, "oracle needs a finite-sum or closed-form objective (qcqp mode finite_sum, "
                                "two_stage, cvar, linear_qp or custom_qp)");
  }
  ensure_dir(cfg.output_dir);
  const OracleResult r = solve_exact(bp.problem, cfg.oracle_tol, cfg.oracle);
  GroundTruth gt{bp.instance_hash, r.x_opt, r.y_star, r.f_opt, cfg.oracle_tol};
  write_ground_truth((fs::path(cfg.output_dir) / "ground_truth.json").string(), gt);
  return gt;
}

RunSummary run_experiment(const ExperimentConfig& cfg) {
  RunSummary out;
  if (cfg.solver == SolverKind::Oracle) {
    const GroundTruth gt = run_oracle(cfg);
    out.files.push_back((fs::path(cfg.output_dir) / "ground_truth.json").string());
    out.summary = {{"solver", "oracle"}, {"instance_hash", gt.instance_hash}, {"f_opt", gt.f_opt}};
    return out;
  }

  const BuiltProblem bp = build_problem(cfg.problem);
  ensure_dir(cfg.output_dir);
  const std::optional<GroundTruth> gt = resolve_ground_truth(cfg, bp);
  const std::uint64_t heldout_seed =
      cfg.heldout_seed ? *cfg.heldout_seed : cfg.problem.value("seed", std::uint64_t{0});
  const MetricsEvaluator evaluator(bp.problem, gt ? std::optional<Vector>(gt->x_opt) : std::nullopt,
                                   gt ? std::optional<Vector>(gt->y_star) : std::nullopt, cfg.heldout_samples,
                                   heldout_seed);
  const fs::path dir(cfg.output_dir);
  const std::string name = solver_name(cfg.solver);

  json summary;
  summary["solver"] = name;
  summary["instance_hash"] = bp.instance_hash;
  summary["schema_version"] = kMetricsSchemaVersion;
  if (gt) summary["f_opt"] = gt->f_opt;

  auto manifest = [&](const fs::path& csv, std::uint64_t seed) {
    json m;
    m["schema_version"] = kMetricsSchemaVersion;
    m["solver"] = name;
    m["seed"] = seed;
    m["instance_hash"] = bp.instance_hash;
    m["metrics_file"] = csv.filename().string();
    m["config"] = cfg.raw;
    fs::path mpath = csv;
    mpath.replace_extension(".manifest.json");
    write_text(mpath, m.dump(2) + "\n");
  };

  if (cfg.solver == SolverKind::Salm) {
    if (!gt) fail(ErrorKind::Validation, "salm needs y*: set ground_truth or compute_ground_truth");
    SalmConfig sc = cfg.salm;
    sc.seeds = cfg.seeds;
    const auto trajs = salm_run(bp.problem, sc, gt->y_star, cfg.threads);
    const fs::path csv = dir / "salm_trajectories.csv";
    write_salm_csv(csv.string(), trajs);
    manifest(csv, cfg.seeds.front());
    out.files.push_back(csv.string());
    std::vector<double> first, last;
    for (const auto& t : trajs) {
      first.push_back(t.dist_sq_y.front());
      last.push_back(t.dist_sq_y.back());
    }
    auto median = [](std::vector<double> v) {
      std::sort(v.begin(), v.end());
      const std::size_t n = v.size();
      return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
    };
    summary["median_initial_dist_sq_y"] = median(first);
    summary["median_final_dist_sq_y"] = median(last);
  } else {
    std::vector<SolveTrace> traces(cfg.seeds.size());
    std::vector<SolveTrace> averaged(cfg.seeds.size());
    parallel_for(cfg.seeds.size(), cfg.threads, [&](std::size_t i) {
      const std::uint64_t seed = cfg.seeds[i];
      if (cfg.solver == SolverKind::Rmalm) {
        RmalmConfig rc = cfg.rmalm;
        rc.seed = seed;
        traces[i] = solve(bp.problem, rc, &evaluator);
      } else {
        PdsgConfig pc = cfg.pdsg;
        pc.seed = seed;
        PdsgResult r = pdsg_solve(bp.problem, pc, &evaluator);
        traces[i] = std::move(r.last);
        averaged[i] = std::move(r.averaged);
      }
    });

    json runs = json::array();
    for (std::size_t i = 0; i < cfg.seeds.size(); ++i) {
      const std::uint64_t seed = cfg.seeds[i];
      const fs::path csv = dir / (name + "_seed" + std::to_string(seed) + ".csv");
      write_metrics_csv(csv.string(), traces[i].rows);
      manifest(csv, seed);
      out.files.push_back(csv.string());
      json run = {{"seed", seed}, {"final", row_json(traces[i].rows.back())}, {"metrics_file", csv.filename().string()}};
      if (cfg.solver == SolverKind::Pdsg) {
        const fs::path avg = dir / (name + "_seed" + std::to_string(seed) + "_avg.csv");
        write_metrics_csv(avg.string(), averaged[i].rows);
        out.files.push_back(avg.string());
        run["final_averaged"] = row_json(averaged[i].rows.back());
      }
      runs.push_back(run);
    }
    summary["runs"] = runs;

    try {
      const BestIterate best = best_feasible_iterate(traces, bp.problem, 1e-6, &evaluator);
      summary["best_feasible"] = {{"seed", cfg.seeds[best.trace]}, {"k", best.iteration}, {"obj", best.objective}};
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::EmptyFeasibleSet) throw;
      summary["best_feasible"] = {{"none", e.what()}};
    }

    const bool have_y = !traces.front().rows.empty() && traces.front().rows.front().dist_sq_y.has_value();
    bool positive_y = have_y;
    for (const auto& tr : traces) {
      for (const auto& r : tr.rows) positive_y = positive_y && r.dist_sq_y && *r.dist_sq_y > 0.0;
    }
    if (have_y && !positive_y) {
      // e.g. y* = 0 with y0 = 0: the log-linear fit is undefined
      summary["rate_fit"] = {{"skipped", "dist_sq_y is zero at some iterate"}};
    }
    if (positive_y && cfg.seeds.size() >= 2 && traces.front().rows.size() >= 5) {
      std::vector<std::string> paths;
      for (const auto& f : out.files) {
        if (f.find("_avg.csv") == std::string::npos) paths.push_back(f);
      }
      const double c = cfg.solver == SolverKind::Rmalm ? cfg.rmalm.c : 0.0;
      const RateReport rep = rate_report(paths, bp.alpha, c > 0.0 ? std::optional<double>(c) : std::nullopt);
      const fs::path rpath = dir / "rate_report.txt";
      write_rate_report(rpath.string(), rep);
      out.files.push_back(rpath.string());
      summary["rate_fit"] = {{"slope", rep.fit.slope},
                             {"r_squared", rep.fit.r_squared},
                             {"measured_rho", rep.measured_rho},
                             {"predicted_rho", rep.predicted_rho ? json(*rep.predicted_rho) : json(nullptr)}};

      if (cfg.complexity_eps) {
        std::vector<std::pair<double, double>> traj;
        for (std::size_t k = 0; k < rep.k.size(); ++k) {
          traj.emplace_back(static_cast<double>(traces.front().rows[k].cum_inner), rep.mean_dist_sq_y[k]);
        }
        const double eps = *cfg.complexity_eps;
        const double q = cfg.solver == SolverKind::Rmalm ? cfg.rmalm.q : 0.0;
        const ComplexityReport cr =
            complexity_check(eps, eps / 4.0, budget_to_reach(traj, eps), budget_to_reach(traj, eps / 4.0), q);
        summary["complexity"] = {{"eps", eps},
                                 {"budget_eps", cr.budget1},
                                 {"budget_eps_over_4", cr.budget2},
                                 {"measured_ratio", cr.measured_ratio},
                                 {"predicted_ratio", cr.predicted_ratio},
                                 {"within_factor_2", cr.agrees}};
      }
    }
  }

  const fs::path spath = dir / "summary.json";
  write_text(spath, summary.dump(2) + "\n");
  out.files.push_back(spath.string());
  out.summary = std::move(summary);
  return out;
}

RateReport rate_report(const std::vector<std::string>& csv_paths, std::optional<double> alpha,
                       std::optional<double> c, std::optional<long> max_k) {
  if (csv_paths.size() < 2) {
    fail(ErrorKind::InvalidArgument, "rate report needs trajectories from at least 2 seeds");
  }
  std::vector<std::map<long, double>> runs;
  for (const auto& path : csv_paths) {
    std::map<long, double> m;
    for (const auto& r : read_metrics_csv(path)) {
      if (!r.dist_sq_y) fail(ErrorKind::Schema, path + ": dist_sq_y is empty at k = " + std::to_string(r.k));
      if (!max_k || r.k <= *max_k) m[r.k] = *r.dist_sq_y;
    }
    runs.push_back(std::move(m));
  }
  RateReport rep;
  rep.seeds = runs.size();
  for (const auto& [k, v] : runs.front()) {
    double sum = 0.0;
    bool everywhere = true;
    for (const auto& run : runs) {
      const auto it = run.find(k);
      if (it == run.end()) {
        everywhere = false;
        break;
      }
      sum += it->second;
    }
    if (!everywhere) continue;
    rep.k.push_back(static_cast<double>(k));
    rep.mean_dist_sq_y.push_back(sum / static_cast<double>(runs.size()));
  }
  std::vector<std::pair<double, double>> pts;
  for (std::size_t i = 0; i < rep.k.size(); ++i) pts.emplace_back(rep.k[i], rep.mean_dist_sq_y[i]);
  rep.fit = fit_linear_rate(pts);
  rep.measured_rho = std::exp(rep.fit.slope);
  if (alpha && c) rep.predicted_rho = contraction_theta(*alpha, *c).rho;
  return rep;
}

void write_rate_report(const std::string& path, const RateReport& rep) {
  std::ostringstream os;
  os << "seeds " << rep.seeds << "\n";
  os << "slope " << format_double(rep.fit.slope) << "\n";
  os << "intercept " << format_double(rep.fit.intercept) << "\n";
  os << "r_squared " << format_double(rep.fit.r_squared) << "\n";
  os << "measured_rho " << format_double(rep.measured_rho) << "\n";
  os << "predicted_rho " << (rep.predicted_rho ? format_double(*rep.predicted_rho) : "n/a") << "\n";
  os << "\nk,mean_dist_sq_y,fitted\n";
  for (std::size_t i = 0; i < rep.k.size(); ++i) {
    os << rep.k[i] << ',' << format_double(rep.mean_dist_sq_y[i]) << ','
       << format_double(std::exp(rep.fit.intercept + rep.fit.slope * rep.k[i])) << '\n';
  }
  write_text(path, os.str());
}

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::NonConvergence:
    case ErrorKind::BudgetExceeded:
    case ErrorKind::UnreachableAccuracy:
    case ErrorKind::AssumptionViolated:
    case ErrorKind::EmptyFeasibleSet:
      return 3;
    case ErrorKind::Io:
      return 1;
    default:
      return 2;
  }
}

}  // namespace rmalm
