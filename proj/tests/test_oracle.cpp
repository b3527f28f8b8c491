#include <doctest.h>

#include <cmath>
#include <optional>

#include "helpers.hpp"
#include "rmalm/oracle.hpp"
#include "rmalm/problems.hpp"

using namespace rmalm;
using testutil::vec;

namespace {

// Projection of `target` onto {x : A x <= b} by enumerating active sets.
std::pair<Vector, Vector> active_set_reference(const Vector& target, const Matrix& A, const Vector& b) {
  const Index M = A.rows();
  std::pair<Vector, Vector> best;
  double best_obj = INFINITY;
  for (unsigned mask = 0; mask < (1u << M); ++mask) {
    std::vector<Index> act;
    for (Index j = 0; j < M; ++j)
      if (mask & (1u << j)) act.push_back(j);
    Vector y = Vector::Zero(M);
    Vector x = target;
    if (!act.empty()) {
      Matrix Aa(act.size(), A.cols());
      Vector ba(act.size());
      for (std::size_t i = 0; i < act.size(); ++i) {
        Aa.row(i) = A.row(act[i]);
        ba[i] = b[act[i]];
      }
      // x = t - Aa^T ya, Aa x = ba
      const Vector ya = (Aa * Aa.transpose()).ldlt().solve(Aa * target - ba);
      x = target - Aa.transpose() * ya;
      for (std::size_t i = 0; i < act.size(); ++i) y[act[i]] = ya[i];
    }
    if (y.minCoeff() < -1e-12 || (A * x - b).maxCoeff() > 1e-10) continue;
    const double obj = 0.5 * (x - target).squaredNorm();
    if (obj < best_obj) {
      best_obj = obj;
      best = {x, y};
    }
  }
  return best;
}

}  // namespace

TEST_CASE("oracle on the scalar problem finds the boundary solution") {
  // feasible interval is [-10, 1]; the objective decreases on it, so x = 1
  double lo = -10.0, hi = 1.0;
  for (int i = 0; i < 200; ++i) {
    const double m1 = lo + (hi - lo) / 3, m2 = hi - (hi - lo) / 3;
    if ((m1 - 3) * (m1 - 3) < (m2 - 3) * (m2 - 3)) hi = m2; else lo = m1;
  }
  const double x_ref = 0.5 * (lo + hi);
  const double y_ref = 3.0 - x_ref;  // from x - 3 + y = 0
  const auto res = solve_exact(testutil::scalar_problem(), 1e-8);
  CHECK(std::abs(res.x_opt[0] - x_ref) <= 1e-7);
  CHECK(std::abs(res.y_star[0] - y_ref) <= 1e-6);
  CHECK(std::abs(res.f_opt - 0.5 * (x_ref - 3) * (x_ref - 3)) <= 1e-6);
  CHECK(res.stationarity <= 1e-7);
  CHECK(res.complementarity <= 1e-7);
}

TEST_CASE("oracle with inactive constraints returns the free minimizer and zero multipliers") {
  const auto prob = testutil::shifted_qp(vec({1.0, 2.0}), Matrix::Identity(2, 2), vec({5.0, 5.0}));
  const auto res = solve_exact(prob, 1e-10);
  CHECK((res.x_opt - vec({1.0, 2.0})).norm() <= 1e-9);
  CHECK(res.y_star == Vector::Zero(2));
}

TEST_CASE("oracle agrees with active-set enumeration") {
  RngStream rng(21, 0);
  for (int trial = 0; trial < 20; ++trial) {
    const Index n = 4, M = 3;
    const Vector t = testutil::random_vector(n, rng, 2.0);
    const Matrix A = Matrix::NullaryExpr(M, n, [&] { return rng.normal(); });
    const Vector b = testutil::random_vector(M, rng, 0.5);
    const auto prob = testutil::shifted_qp(t, A, b, -50.0, 50.0);
    const auto [x_ref, y_ref] = active_set_reference(t, A, b);
    const auto res = solve_exact(prob, 1e-9, OracleOptions{1.0, 100000, 1e-12});
    CHECK((res.x_opt - x_ref).norm() <= 1e-6);
    CHECK((res.y_star - y_ref).norm() <= 1e-5);
    CHECK(res.stationarity <= 1e-7);
    CHECK(res.complementarity <= 1e-7);
    CHECK(res.max_violation <= 1e-8);
  }
}

TEST_CASE("oracle KKT residuals and penalty independence on a QCQP") {
  const auto inst = gen_qcqp(5, 4, 3, QcqpMode::FiniteSum, 30, 6);
  const double tol = 1e-7;
  const auto a = solve_exact(inst.problem, tol, OracleOptions{1.0, 100000, {}});
  const auto b = solve_exact(inst.problem, tol, OracleOptions{10.0, 100000, {}});
  CHECK(kkt_stationarity(inst.problem, a.x_opt, a.y_star) <= 10 * tol);
  CHECK(kkt_complementarity(inst.problem, a.x_opt, a.y_star) <= 10 * tol);
  CHECK(a.max_violation <= 10 * tol);
  CHECK((a.x_opt - b.x_opt).norm() <= 100 * tol);
  CHECK((a.y_star - b.y_star).norm() <= 100 * tol);
  CHECK(std::abs(a.f_opt - b.f_opt) <= 100 * tol);
}

TEST_CASE("exact ALM step contracts the dual distance on the linear QP") {
  const auto inst = gen_linear_qp(8, 4, 2);
  RngStream rng(1, 0);
  for (double c : {0.5, 1.0, 10.0}) {
    for (int trial = 0; trial < 5; ++trial) {
      Vector y(4);
      for (Index j = 0; j < 4; ++j) y[j] = rng.uniform(0.0, 5.0);
      const auto step = exact_alm_step(inst.problem, y, c, 1e-12);
      const double before = (y - inst.y_star).norm(), after = (step.y - inst.y_star).norm();
      CHECK(after <= before / (1.0 + inst.alpha * c) + 1e-8);
    }
  }
}

TEST_CASE("best feasible iterate selection") {
  const auto prob = testutil::scalar_problem();
  auto trace = [](std::initializer_list<double> xs) {
    SolveTrace t;
    for (double x : xs) t.iterates.push_back(vec({x}));
    return t;
  };
  // 2.5 is infeasible with a better objective and must be skipped
  auto best = best_feasible_iterate({trace({0.0, 2.5, 0.5}), trace({0.9, -1.0})}, prob);
  CHECK(best.trace == 1);
  CHECK(best.iteration == 0);
  CHECK(best.x[0] == 0.9);
  CHECK(best.objective == doctest::Approx(0.5 * 2.1 * 2.1));
  // ties go to the earliest
  best = best_feasible_iterate({trace({3.0, 0.5}), trace({0.5})}, prob);
  CHECK(best.trace == 0);
  CHECK(best.iteration == 1);
  // non-finite iterates never count as feasible
  best = best_feasible_iterate({trace({NAN, 0.5})}, prob);
  CHECK(best.iteration == 1);
  // feasibility tolerance is honoured
  CHECK(best_feasible_iterate({trace({1.0 + 5e-7})}, prob).x[0] == 1.0 + 5e-7);
  try {
    best_feasible_iterate({trace({2.0, 1.5})}, prob);
    FAIL("expected EmptyFeasibleSet");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::EmptyFeasibleSet);
    CHECK(std::string(e.what()).find("0.5") != std::string::npos);
  }
}

TEST_CASE("ground truth JSON round trip and schema errors") {
  GroundTruth gt{"abc123", vec({1.0, 1.0 / 3.0}), vec({0.0, 2.5}), -0.125, 1e-8};
  const auto back = parse_ground_truth(ground_truth_json(gt));
  CHECK(back.instance_hash == "abc123");
  CHECK(back.x_opt == gt.x_opt);
  CHECK(back.y_star == gt.y_star);
  CHECK(back.f_opt == gt.f_opt);
  CHECK(back.tol == gt.tol);

  const std::string path = std::string(RMALM_TEST_TMP) + "/gt_roundtrip.json";
  write_ground_truth(path, gt);
  CHECK(read_ground_truth(path).x_opt == gt.x_opt);

  auto kind_of = [](const std::string& text) -> std::optional<ErrorKind> {
    try {
      parse_ground_truth(text);
    } catch (const Error& e) {
      return e.kind();
    }
    return std::nullopt;
  };
  CHECK(kind_of("{not json") == ErrorKind::Parse);
  CHECK(kind_of(R"({"x_opt": [1], "y_star": [0], "f_opt": 1, "tol": 1})") == ErrorKind::Schema);
  CHECK(kind_of(R"({"instance_hash": "a", "y_star": [0], "f_opt": 1, "tol": 1})") == ErrorKind::Schema);
  CHECK(kind_of(R"({"instance_hash": "a", "x_opt": [1], "y_star": [0], "tol": 1})") == ErrorKind::Schema);
  CHECK(kind_of(R"({"instance_hash": "a", "x_opt": ["z"], "y_star": [0], "f_opt": 1, "tol": 1})") ==
        ErrorKind::Schema);
  CHECK_THROWS_AS(read_ground_truth(std::string(RMALM_TEST_TMP) + "/missing.json"), Error);
}

TEST_CASE("fnv1a reference values") {
  CHECK(fnv1a_hex("") == "cbf29ce484222325");
  CHECK(fnv1a_hex("a") == "af63dc4c8601ec8c");
  CHECK(fnv1a_hex("foobar") == "85944171f73967e8");
}
