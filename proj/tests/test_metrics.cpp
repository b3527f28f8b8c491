#include <doctest.h>

#include <sstream>

#include "helpers.hpp"
#include "rmalm/metrics.hpp"

using namespace rmalm;

TEST_CASE("metrics CSV round trip keeps full precision") {
  std::vector<MetricsRow> rows(3);
  rows[0] = {0, 0, 1.0 / 3.0, 0.0, 0.0, 2.0, std::nullopt, 0.001};
  rows[1] = {1, 9, -1e-300, 1e-17, 0.1, std::nullopt, 0.1 + 0.2, 1.5};
  rows[2] = {2, 24, 123456789.123456789, 3e10, 4e-5, 1e-12, 2.5e-8, 2.0};
  std::ostringstream os;
  write_metrics_csv(os, rows);
  const std::string text = os.str();
  CHECK(text.rfind("k,cum_inner,obj,avg_viol,max_viol,dist_sq_x,dist_sq_y,wall_time_s\n", 0) == 0);
  const auto back = parse_metrics_csv(text);
  REQUIRE(back.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(back[i].k == rows[i].k);
    CHECK(back[i].cum_inner == rows[i].cum_inner);
    CHECK(back[i].obj == rows[i].obj);
    CHECK(back[i].avg_viol == rows[i].avg_viol);
    CHECK(back[i].max_viol == rows[i].max_viol);
    CHECK(back[i].dist_sq_x == rows[i].dist_sq_x);
    CHECK(back[i].dist_sq_y == rows[i].dist_sq_y);
    CHECK(back[i].wall_time_s == rows[i].wall_time_s);
  }

  const std::string path = std::string(RMALM_TEST_TMP) + "/metrics_roundtrip.csv";
  write_metrics_csv(path, rows);
  CHECK(read_metrics_csv(path).size() == 3);
}

TEST_CASE("metrics CSV errors") {
  auto kind_of = [](const std::string& text) -> std::optional<ErrorKind> {
    try {
      parse_metrics_csv(text);
    } catch (const Error& e) {
      return e.kind();
    }
    return std::nullopt;
  };
  CHECK(kind_of("") == ErrorKind::Schema);
  CHECK(kind_of("k,cum_inner,obj,avg_viol,max_viol,dist_sq_x,wall_time_s\n") == ErrorKind::Schema);
  CHECK(kind_of("k,cum_inner,obj,avg_viol,max_viol,dist_sq_x,dist_sq_y,wall_time_s\n0,0,abc,0,0,,,0\n") ==
        ErrorKind::Parse);
  CHECK(kind_of("k,cum_inner,obj,avg_viol,max_viol,dist_sq_x,dist_sq_y,wall_time_s\n0,0,1,0\n") ==
        ErrorKind::Schema);
  // column order is free
  const auto rows = parse_metrics_csv("obj,k,cum_inner,avg_viol,max_viol,dist_sq_x,dist_sq_y,wall_time_s\n5,2,7,0,0,,,0\n");
  CHECK(rows.at(0).obj == 5.0);
  CHECK(rows.at(0).k == 2);
  CHECK_THROWS_AS(read_metrics_csv(std::string(RMALM_TEST_TMP) + "/no_such.csv"), Error);
}

TEST_CASE("metrics evaluator fills optional distances") {
  const auto prob = testutil::scalar_problem();
  MetricsEvaluator plain(prob);
  const auto r0 = plain.row(0, 0, testutil::vec({2.0}), testutil::vec({1.0}), testutil::vec({1.0}), 0.0);
  CHECK(r0.obj == 0.5);
  CHECK(r0.max_viol == 1.0);
  CHECK_FALSE(r0.dist_sq_x);
  MetricsEvaluator gt(prob, testutil::vec({1.0}), testutil::vec({2.0}));
  const auto r1 = gt.row(0, 0, testutil::vec({2.0}), testutil::vec({1.0}), testutil::vec({1.0}), 0.0);
  CHECK(*r1.dist_sq_x == 1.0);
  CHECK(*r1.dist_sq_y == 1.0);
}
