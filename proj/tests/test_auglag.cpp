#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "rmalm/auglag.hpp"
#include "rmalm/problems.hpp"

using namespace rmalm;
using testutil::vec;

namespace {

StochasticProblem square_problem() {
  StochasticProblem prob;
  prob.dim = 1;
  prob.f0.value = [](const Vector& x) { return x[0] * x[0]; };
  prob.f0.add_gradient = [](const Vector& x, double s, Vector& g) { g[0] += 2.0 * s * x[0]; };
  prob.constraints = std::make_shared<LinearConstraints>(Matrix::Constant(1, 1, 1.0), vec({1.0}));
  prob.project = box_projector(-10, 10);
  return prob;
}

}  // namespace

TEST_CASE("augmented Lagrangian value and gradient examples") {
  const auto prob = square_problem();
  CHECK(auglag_value(prob, vec({0}), {2.0, vec({0})}) == 0.0);
  CHECK(auglag_value(prob, vec({2}), {2.0, vec({0})}) == 5.0);
  CHECK(auglag_value(prob, vec({0}), {2.0, vec({2})}) == -1.0);
  CHECK(auglag_grad_full(prob, vec({0}), {2.0, vec({0})})[0] == 0.0);
  CHECK(auglag_grad_full(prob, vec({2}), {2.0, vec({0})})[0] == 6.0);
}

TEST_CASE("expectation-form objectives cannot be evaluated exactly") {
  const auto inst = gen_qcqp(3, 2, 2, QcqpMode::Expectation, 0, 1);
  PenaltyState st{1.0, Vector::Zero(2)};
  try {
    auglag_value(inst.problem, Vector::Zero(3), st);
    FAIL("expected unsupported");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Unsupported);
  }
  CHECK_THROWS_AS(auglag_grad_full(inst.problem, Vector::Zero(3), st), Error);
}

TEST_CASE("full batch reproduces the exact gradient") {
  const auto inst = gen_qcqp(5, 3, 4, QcqpMode::FiniteSum, 30, 2);
  RngStream rng(4, 4);
  for (int t = 0; t < 10; ++t) {
    const Vector x = testutil::random_vector(5, rng);
    PenaltyState st{3.0, testutil::random_vector(4, rng).cwiseAbs()};
    const Vector g = auglag_grad_full(inst.problem, x, st);
    CHECK((stoch_grad(inst.problem, x, st, full_batch(inst.problem)) - g).norm() <= 1e-12 * std::max(1.0, g.norm()));
  }
}

TEST_CASE("single constraint with batch one is exact") {
  const auto prob = square_problem();
  RngStream rng(1, 1);
  for (double x : {-2.0, 0.5, 1.5, 4.0}) {
    PenaltyState st{2.0, vec({0.7})};
    const SampleBatch b = draw_batch(prob, 1, 1, rng);
    CHECK(stoch_grad(prob, vec({x}), st, b)[0] == doctest::Approx(auglag_grad_full(prob, vec({x}), st)[0]));
  }
}

TEST_CASE("exhaustive singleton batches are unbiased") {
  const auto inst = gen_qcqp(3, 2, 2, QcqpMode::FiniteSum, 4, 5);
  RngStream rng(6, 6);
  for (int t = 0; t < 10; ++t) {
    // large x makes both constraints active
    const Vector x = testutil::random_vector(3, rng, 2.0);
    PenaltyState st{1.5, vec({0.3, 1.2})};
    Vector avg = Vector::Zero(3);
    for (std::uint64_t i = 0; i < 4; ++i) {
      for (Index j = 0; j < 2; ++j) avg += stoch_grad(inst.problem, x, st, SampleBatch{{i}, {j}}) / 8.0;
    }
    const Vector g = auglag_grad_full(inst.problem, x, st);
    CHECK((avg - g).norm() <= 1e-12 * std::max(1.0, g.norm()));
  }
}

TEST_CASE("exact gradient matches central differences") {
  const auto inst = gen_qcqp(6, 3, 4, QcqpMode::FiniteSum, 25, 8);
  RngStream rng(7, 7);
  for (int t = 0; t < 100; ++t) {
    const Vector x = testutil::random_vector(6, rng, 2.0);
    PenaltyState st{0.1 + 10 * rng.uniform(), testutil::random_vector(4, rng).cwiseAbs()};
    const Vector g = auglag_grad_full(inst.problem, x, st);
    Vector fd(6);
    for (Index i = 0; i < 6; ++i) {
      Vector e = Vector::Zero(6);
      e[i] = 1e-6;
      fd[i] = (auglag_value(inst.problem, x + e, st) - auglag_value(inst.problem, x - e, st)) / 2e-6;
    }
    CHECK((fd - g).norm() <= 1e-5 * std::max(1.0, g.norm()));
  }
}

TEST_CASE("augmented Lagrangian is convex along random chords") {
  const auto inst = gen_qcqp(4, 2, 3, QcqpMode::FiniteSum, 10, 9);
  RngStream rng(9, 9);
  for (int t = 0; t < 1000; ++t) {
    const Vector a = testutil::random_vector(4, rng, 3.0), b = testutil::random_vector(4, rng, 3.0);
    const double s = rng.uniform();
    PenaltyState st{5.0 * rng.uniform() + 0.01, testutil::random_vector(3, rng).cwiseAbs()};
    const double lhs = auglag_value(inst.problem, s * a + (1 - s) * b, st);
    const double rhs = s * auglag_value(inst.problem, a, st) + (1 - s) * auglag_value(inst.problem, b, st);
    CHECK(lhs <= rhs + 1e-10);
  }
}

TEST_CASE("multiplier update") {
  CHECK(multiplier_update(vec({1, 2}), 2, vec({-1, 0.5})) == vec({0, 3}));
  CHECK(multiplier_update(Vector::Zero(3), 4, vec({-1, 0, -2})) == Vector::Zero(3));
  CHECK(multiplier_update(vec({5}), 1, vec({0})) == vec({5}));
  CHECK_THROWS_AS(multiplier_update(vec({1, 2}), 1, vec({1})), Error);
  RngStream rng(2, 2);
  for (int t = 0; t < 200; ++t) {
    const Vector h = testutil::random_vector(5, rng);
    const Vector y1 = testutil::random_vector(5, rng).cwiseAbs(), y2 = testutil::random_vector(5, rng).cwiseAbs();
    const Vector u1 = multiplier_update(y1, 1.7, h), u2 = multiplier_update(y2, 1.7, h);
    CHECK(u1.minCoeff() >= 0.0);
    CHECK((u1 - u2).norm() <= (y1 - y2).norm() + 1e-15);
  }
}

TEST_CASE("batch policy and errors") {
  const auto inst = gen_qcqp(3, 2, 5, QcqpMode::FiniteSum, 10, 1);
  RngStream rng(3, 3);
  const SampleBatch all = draw_batch(inst.problem, 4, 5, rng);
  CHECK(all.constraint_indices == std::vector<Index>{0, 1, 2, 3, 4});
  CHECK(all.objective_draws.size() == 4);
  const SampleBatch some = draw_batch(inst.problem, 2, 3, rng);
  CHECK(some.constraint_indices.size() == 3);
  for (Index j : some.constraint_indices) CHECK((j >= 0 && j < 5));
  for (auto d : some.objective_draws) CHECK(d < 10u);

  PenaltyState st{1.0, Vector::Zero(5)};
  auto expect_batch_error = [&](const SampleBatch& b) {
    try {
      stoch_grad(inst.problem, Vector::Zero(3), st, b);
      FAIL("expected a batch error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::Batch);
    }
  };
  expect_batch_error(SampleBatch{{0}, {}});
  expect_batch_error(SampleBatch{{}, {0}});
  expect_batch_error(SampleBatch{{0}, {5}});
  expect_batch_error(SampleBatch{{10}, {0}});
  CHECK_THROWS_AS(draw_batch(inst.problem, 1, 0, rng), Error);
}

TEST_CASE("penalty state validation") {
  CHECK_THROWS_AS((PenaltyState{0.0, Vector::Zero(1)}.validate(1)), Error);
  CHECK_THROWS_AS((PenaltyState{1.0, vec({-1})}.validate(1)), Error);
  CHECK_THROWS_AS((PenaltyState{1.0, Vector::Zero(2)}.validate(1)), Error);
}
