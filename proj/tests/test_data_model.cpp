#include <cmath>

#include <doctest.h>

#include "lodreg/data_model.hpp"
#include "lodreg/errors.hpp"

using namespace lodreg;

namespace {

ObservationSet small_set() {
  Eigen::VectorXd y(5), v(5);
  y << 1, 2, 3, 4, 5;
  Eigen::MatrixXd x(5, 1);
  x << 0, 1, 0, 1, 1;
  const double c = 0.9;
  v << 0.1, 0.5, 0.9, c, c;
  return make_observation_set(y, x, v, {1, 1, 1, 0, 0}, c);
}

}  // namespace

TEST_SUITE("data_model") {

TEST_CASE("transform limit") {
  CHECK(transform_limit(1.0) == doctest::Approx(0.0).scale(1.0));
  CHECK(transform_limit(0.4) == doctest::Approx(0.916290731874155).epsilon(1e-12));
  CHECK(transform_limit(std::exp(-2.0)) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK_THROWS_AS(transform_limit(0.0), DataError);
  CHECK_THROWS_AS(transform_limit(-1.0), DataError);
}

TEST_CASE("transformation round trip") {
  const Transformation t;
  for (double z : {1e-6, 0.1, 0.4, 1.0, 7.5, 1e4})
    CHECK(t.forward(t.inverse(z)) == doctest::Approx(z).epsilon(1e-12));
  // strictly decreasing
  CHECK(t.forward(1.0) < t.forward(0.5));
}

TEST_CASE("observation set invariants") {
  const ObservationSet s = small_set();
  CHECK(s.n() == 5);
  CHECK(s.p() == 1);
  CHECK(s.n_detected() == 3);
  CHECK(s.censoring_rate() == doctest::Approx(0.4).epsilon(1e-15));
}

TEST_CASE("observation set rejects bad input") {
  Eigen::VectorXd y(5), v(5);
  y << 1, 2, 3, 4, 5;
  Eigen::MatrixXd x(5, 1);
  x << 0, 1, 0, 1, 1;
  v << 0.1, 0.5, 0.9, 0.9, 0.9;

  SUBCASE("detected above the limit") {
    Eigen::VectorXd bad = v;
    bad[0] = 1.5;  // > c
    CHECK_THROWS_AS(make_observation_set(y, x, bad, {1, 1, 1, 0, 0}, 0.9),
                    DataError);
  }
  SUBCASE("censored row not at the limit") {
    Eigen::VectorXd bad = v;
    bad[3] = 0.7;
    CHECK_THROWS_AS(make_observation_set(y, x, bad, {1, 1, 1, 0, 0}, 0.9),
                    DataError);
  }
  SUBCASE("non-finite entry") {
    Eigen::VectorXd bad = y;
    bad[2] = std::nan("");
    CHECK_THROWS_AS(make_observation_set(bad, x, v, {1, 1, 1, 0, 0}, 0.9),
                    DataError);
  }
  SUBCASE("too few rows") {
    CHECK_THROWS_AS(
        make_observation_set(y.head(3), x.topRows(3), v.head(3), {1, 1, 1},
                             0.9),
        DataError);
  }
}

TEST_CASE("design layout") {
  LinearPredictorLayout layout{3};
  CHECK(layout.dim() == 5);
  Eigen::RowVectorXd x(2);
  x << 4.0, -1.0;
  const Eigen::VectorXd d = design_vector(x, 0.25);
  REQUIRE(d.size() == 4);
  CHECK(d[0] == 1.0);
  CHECK(d[1] == 4.0);
  CHECK(d[2] == -1.0);
  CHECK(d[3] == 0.25);
}

}  // TEST_SUITE
