#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "helpers.hpp"
#include "rmalm/oracle.hpp"
#include "rmalm/problems.hpp"

using namespace rmalm;
using testutil::vec;

TEST_CASE("qcqp instance structure") {
  const auto inst = gen_qcqp(10, 5, 5, QcqpMode::Expectation, 0, 1);
  CHECK(inst.problem.dim == 10);
  CHECK(inst.problem.num_constraints() == 5);
  CHECK_FALSE(inst.problem.has_exact_objective());
  CHECK(inst.problem.project(Vector::Constant(10, 12.0)) == Vector::Constant(10, 10.0));
  for (Index j = 0; j < 5; ++j) {
    const auto uj = static_cast<std::size_t>(j);
    const Matrix& Q = inst.constraints->Q()[uj];
    CHECK((Q - Q.transpose()).norm() == 0.0);
    Eigen::SelfAdjointEigenSolver<Matrix> eig(Q);
    CHECK(std::abs(eig.eigenvalues().maxCoeff() - 1.0) <= 1e-8);
    CHECK(eig.eigenvalues().minCoeff() >= -1e-10);
    CHECK(std::abs(inst.constraints->a()[uj].norm() - 1.0) <= 1e-12);
    const double b = inst.constraints->b()[j];
    CHECK((b >= 0.1 && b <= 1.1));
  }
  // x = 0 is strictly feasible: h_j(0) = -b_j.
  CHECK((inst.problem.constraint_values(Vector::Zero(10)).array() < 0).all());
  CHECK(*inst.problem.strictly_feasible == Vector::Zero(10));
}

TEST_CASE("qcqp samples are normalized") {
  RngStream rng(2, 7);
  for (int i = 0; i < 50; ++i) {
    const auto [H, c] = QcqpSampler::sample_pair(6, 3, rng);
    Eigen::JacobiSVD<Matrix> svd(H);
    CHECK(std::abs(svd.singularValues()[0] - 1.0) <= 1e-12);
    CHECK(std::abs(c.norm() - 1.0) <= 1e-12);
  }
}

TEST_CASE("finite-sum qcqp objective is the mean of the per-sample objectives") {
  const auto inst = gen_qcqp(2, 2, 1, QcqpMode::FiniteSum, 4, 7);
  const auto& s = *inst.objective;
  REQUIRE(s.finite_sum_size() == 4u);
  RngStream rng(1, 1);
  for (int t = 0; t < 20; ++t) {
    const Vector x = testutil::random_vector(2, rng, 3.0);
    double direct = 0.0;
    Vector g = Vector::Zero(2);
    for (std::size_t i = 0; i < 4; ++i) {
      direct += 0.25 * 0.5 * (s.H()[i] * x - s.c()[i]).squaredNorm();
      s.add_gradient(x, i, 0.25, g);
    }
    CHECK(std::abs(inst.problem.objective(x) - direct) <= 1e-12 * std::max(1.0, direct));
    Vector gm = Vector::Zero(2);
    s.add_mean_gradient(x, 1.0, gm);
    CHECK((gm - g).norm() <= 1e-12 * std::max(1.0, g.norm()));
  }
}

TEST_CASE("generators are deterministic") {
  const auto a = gen_qcqp(4, 2, 3, QcqpMode::FiniteSum, 20, 9);
  const auto b = gen_qcqp(4, 2, 3, QcqpMode::FiniteSum, 20, 9);
  const auto c = gen_qcqp(4, 2, 3, QcqpMode::FiniteSum, 20, 10);
  for (std::size_t j = 0; j < 3; ++j) CHECK(a.constraints->Q()[j] == b.constraints->Q()[j]);
  for (std::size_t i = 0; i < 20; ++i) CHECK(a.objective->H()[i] == b.objective->H()[i]);
  CHECK(a.constraints->b() != c.constraints->b());
  CHECK(gen_two_stage(2, 5, 3).xi == gen_two_stage(2, 5, 3).xi);
  CHECK(synthetic_returns(10, 3, 4) == synthetic_returns(10, 3, 4));
  CHECK(gen_linear_qp(6, 3, 2).A == gen_linear_qp(6, 3, 2).A);
}

TEST_CASE("qcqp b_j pass a Kolmogorov-Smirnov test against U[0.1, 1.1]") {
  const Index M = 10000;
  const auto inst = gen_qcqp(1, 1, M, QcqpMode::Expectation, 0, 3);
  std::vector<double> b(inst.constraints->b().data(), inst.constraints->b().data() + M);
  std::sort(b.begin(), b.end());
  double D = 0.0;
  for (Index i = 0; i < M; ++i) {
    const double F = b[static_cast<std::size_t>(i)] - 0.1;
    D = std::max({D, std::abs(double(i + 1) / M - F), std::abs(F - double(i) / M)});
  }
  // Asymptotic critical value at significance 0.01.
  CHECK(D < 1.628 / std::sqrt(double(M)));
}

TEST_CASE("generators reject bad parameters") {
  CHECK_THROWS_AS(gen_qcqp(0, 1, 1, QcqpMode::Expectation, 0, 1), Error);
  CHECK_THROWS_AS(gen_qcqp(2, 1, 1, QcqpMode::FiniteSum, 0, 1), Error);
  CHECK_THROWS_AS(gen_two_stage(2, 3, 1, 0.0), Error);
  CHECK_THROWS_AS(gen_two_stage(2, 3, 1, 2.0, -1.0), Error);
  CHECK_THROWS_AS(gen_cvar(Matrix::Ones(3, 2), 1.0), Error);
  CHECK_THROWS_AS(gen_cvar(Matrix(0, 2), 0.9), Error);
  CHECK_THROWS_AS(gen_linear_qp(3, 4, 1), Error);
}

TEST_CASE("two-stage instance structure") {
  const auto inst = gen_two_stage(5, 20000, 1);
  CHECK(inst.problem.dim == 5 * 20001);
  CHECK(inst.problem.num_constraints() == 20000);
  CHECK(inst.cost.minCoeff() >= 1.0);
  CHECK(inst.cost.maxCoeff() <= 3.0);
  const Vector h = inst.problem.constraint_values(*inst.problem.strictly_feasible);
  CHECK((h.array() == -12.5).all());
  // the first-stage block is projected onto the unit ball around x0
  Vector z = *inst.problem.strictly_feasible;
  z.head(5).array() += 3.0;
  CHECK(std::abs((inst.problem.project(z).head(5) - inst.x0).norm() - 1.0) < 1e-12);
}

TEST_CASE("two-stage scenario Hessian dominates lambda") {
  const double lambda = 2.0;
  const auto inst = gen_two_stage(3, 2, 4, lambda);
  const auto& s = *inst.problem.sampler;
  const Index n = 3, dim = inst.problem.dim;
  RngStream rng(8, 8);
  const Vector x = testutil::random_vector(dim, rng);
  for (std::uint64_t i = 0; i < 2; ++i) {
    // Hessian in z_i = (x1, y_i) from differences of the exact gradient.
    std::vector<Index> idx;
    for (Index k = 0; k < n; ++k) idx.push_back(k);
    for (Index k = 0; k < n; ++k) idx.push_back(n * (static_cast<Index>(i) + 1) + k);
    Matrix Hs(2 * n, 2 * n);
    for (Index a = 0; a < 2 * n; ++a) {
      Vector e = Vector::Zero(dim);
      e[idx[static_cast<std::size_t>(a)]] = 1e-4;
      Vector gp = Vector::Zero(dim), gm = Vector::Zero(dim);
      s.add_gradient(x + e, i, 1.0, gp);
      s.add_gradient(x - e, i, 1.0, gm);
      for (Index b = 0; b < 2 * n; ++b) Hs(b, a) = (gp - gm)[idx[static_cast<std::size_t>(b)]] / 2e-4;
    }
    Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (Hs + Hs.transpose()));
    CHECK(eig.eigenvalues().minCoeff() >= lambda - 1e-6);
  }
  // finite-sum mean equals the average of the per-sample values
  double avg = 0.0;
  for (std::uint64_t i = 0; i < 2; ++i) avg += 0.5 * s.value(x, i);
  CHECK(std::abs(inst.problem.objective(x) - (inst.cost.dot(x.head(3)) + avg)) <= 1e-12 * std::abs(avg));
}

TEST_CASE("cvar instance plug-in values") {
  const Matrix R = Matrix::Ones(3, 2);
  const auto inst = gen_cvar(R, 0.95);
  CHECK(inst.mean_returns == vec({1, 1}));
  CHECK(inst.min_return == 1.0);
  CHECK(inst.problem.dim == 1 + 2 + 3);
  CHECK(inst.problem.num_constraints() == 4);
  const Vector v = vec({-1, 0.5, 0.5, 0, 0, 0});
  CHECK(inst.problem.constraint_values(v).cwiseAbs().maxCoeff() == 0.0);
  CHECK(inst.problem.objective(v) == -1.0);
  const Vector p = inst.problem.project(vec({-4, 2, 0, -1, 3, -2}));
  CHECK(p[0] == -4);
  CHECK((p.segment(1, 2) - vec({1, 0})).norm() < 1e-15);
  CHECK(p.tail(3) == vec({0, 3, 0}));
}

TEST_CASE("cvar witness is feasible on synthetic data") {
  const auto inst = gen_cvar(synthetic_returns(40, 4, 2), 0.95);
  CHECK(max_violation(inst.problem.constraint_values(*inst.problem.strictly_feasible)) == 0.0);
}

namespace {

// Exhaustive LP oracle: vertices of {G v <= g, E v = e} in R^d, d = 8, with
// one equality, found by solving every square system of 7 active inequalities.
double lp_vertex_min(const Matrix& G, const Vector& g, const Matrix& E, const Vector& e, const Vector& cost) {
  const Index m = G.rows(), d = G.cols();
  const Index need = d - E.rows();
  double best = std::numeric_limits<double>::infinity();
  std::vector<int> pick(static_cast<std::size_t>(m), 0);
  std::fill(pick.end() - need, pick.end(), 1);
  do {
    Matrix S(d, d);
    Vector rhs(d);
    S.topRows(E.rows()) = E;
    rhs.head(E.rows()) = e;
    Index r = E.rows();
    for (Index i = 0; i < m; ++i) {
      if (pick[static_cast<std::size_t>(i)]) {
        S.row(r) = G.row(i);
        rhs[r++] = g[i];
      }
    }
    Eigen::FullPivLU<Matrix> lu(S);
    if (lu.rank() < d) continue;
    const Vector v = lu.solve(rhs);
    if ((G * v - g).maxCoeff() > 1e-10) continue;
    best = std::min(best, cost.dot(v));
  } while (std::next_permutation(pick.begin(), pick.end()));
  return best;
}

}  // namespace

TEST_CASE("tiny cvar optimum matches LP vertex enumeration") {
  Matrix R(4, 2);
  R << 1.02, 0.97, 0.95, 1.04, 1.01, 1.00, 0.98, 1.03;
  const double p = 0.5;
  const auto inst = gen_cvar(R, p);
  // variables (a+, a-, x1, x2, y1..y4)
  const double w = 1.0 / ((1.0 - p) * 4.0);
  Matrix G = Matrix::Zero(13, 8);
  Vector g = Vector::Zero(13);
  for (Index i = 0; i < 4; ++i) {
    G(i, 0) = -1;
    G(i, 1) = 1;
    G(i, 2) = -R(i, 0);
    G(i, 3) = -R(i, 1);
    G(i, 4 + i) = -1;
  }
  G(4, 2) = -inst.mean_returns[0];
  G(4, 3) = -inst.mean_returns[1];
  g[4] = -inst.min_return;
  for (Index k = 0; k < 8; ++k) G(5 + k, k) = -1;
  Matrix E = Matrix::Zero(1, 8);
  E(0, 2) = E(0, 3) = 1;
  Vector cost(8);
  cost << 1, -1, 0, 0, w, w, w, w;
  const double lp = lp_vertex_min(G, g, E, vec({1.0}), cost);

  const auto res = solve_exact(inst.problem, 1e-9, OracleOptions{1.0, 100000, 1e-11});
  CHECK(std::abs(res.f_opt - lp) <= 1e-6);
}

TEST_CASE("returns csv parsing") {
  CHECK(parse_returns_csv("1.0,2.0\n3.0,4.0") == (Matrix(2, 2) << 1, 2, 3, 4).finished());
  CHECK(parse_returns_csv("A,B\n1,2\n3,4\n") == (Matrix(2, 2) << 1, 2, 3, 4).finished());
  try {
    parse_returns_csv("1,2\n3,4\n5,6,7\n");
    FAIL("expected a format error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Format);
    CHECK(std::string(e.what()).find("3") != std::string::npos);
  }
  try {
    parse_returns_csv("1,2\n3,x\n");
    FAIL("expected a parse error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Parse);
  }
  CHECK_THROWS_AS(parse_returns_csv("1,2\n3,\n"), Error);
  CHECK_THROWS_AS(load_returns_csv("/nonexistent/returns.csv"), Error);
}

TEST_CASE("linear qp closed-form solution satisfies KKT") {
  for (double scale : {1.0, 2.0}) {
    const auto inst = gen_linear_qp(8, 4, 5, 0.5, scale);
    CHECK((inst.A * inst.A.transpose() - scale * scale * Matrix::Identity(4, 4)).norm() < 1e-12);
    CHECK(inst.alpha == doctest::Approx(scale * scale));
    Vector g = Vector::Zero(8);
    inst.problem.add_objective_gradient(inst.x_star, 1.0, g);
    g += inst.A.transpose() * inst.y_star;
    CHECK(g.norm() < 1e-12);
    CHECK(inst.problem.constraint_values(inst.x_star).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(inst.y_star.minCoeff() >= 0.5);
    CHECK(max_violation(inst.problem.constraint_values(*inst.problem.strictly_feasible)) == 0.0);
  }
}

TEST_CASE("gaussian shift sampler mean and sample average") {
  const auto inst = gen_linear_qp(4, 2, 1, 0.7);
  const auto& s = *inst.problem.sampler;
  RngStream rng(3, 3);
  const auto saa = s.sample_average(20000, rng);
  const Vector x = vec({0.1, -0.2, 0.3, 0.4});
  CHECK(saa->finite_sum_size() == 20000u);
  CHECK(std::abs(saa->mean_value(x) - s.mean_value(x)) < 0.05);
}
