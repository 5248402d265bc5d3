#include <cmath>

#include <doctest.h>

#include "lodreg/errors.hpp"
#include "lodreg/gehan.hpp"
#include "lodreg/reference.hpp"
#include "lodreg/rng.hpp"
#include "lodreg/sim.hpp"

using namespace lodreg;

namespace {

struct RawData {
  Eigen::VectorXd v;
  Eigen::MatrixXd x;
  std::vector<std::uint8_t> delta;
};

RawData make_raw_data(int n, int p, std::uint64_t seed, double cens = 0.3) {
  RngStream rng(seed, 0);
  RawData d;
  d.v.resize(n);
  d.x.resize(n, p);
  d.delta.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < p; ++j) d.x(i, j) = rng.next_normal();
    d.v[i] = rng.next_normal();
    d.delta[static_cast<std::size_t>(i)] = rng.next_bernoulli(1.0 - cens);
  }
  return d;
}

}  // namespace

TEST_SUITE("gehan") {

TEST_CASE("two point example") {
  Eigen::VectorXd v(2);
  v << 0.0, 1.0;
  Eigen::MatrixXd x(2, 1);
  x << 0.0, 1.0;
  const std::vector<std::uint8_t> delta{1, 1};
  Eigen::VectorXd alpha(1);

  for (double a : {-1.0, 0.0, 0.3, 1.0, 1.7}) {
    alpha << a;
    CHECK(gehan_objective(alpha, v, x, delta) ==
          doctest::Approx(std::abs(1.0 - a) / 4.0).epsilon(1e-14));
  }
  alpha << 0.0;
  const Eigen::VectorXd g = gehan_subgradient(alpha, v, x, delta);
  CHECK(g[0] == doctest::Approx(-0.25).epsilon(1e-14));
}

TEST_CASE("degenerate cases") {
  Eigen::VectorXd v(3);
  v << 1.0, 2.0, 3.0;
  Eigen::MatrixXd x(3, 1);
  x << 1.0, 2.0, 3.0;
  Eigen::VectorXd alpha(1);
  alpha << 1.0;  // all residuals zero
  CHECK(gehan_objective(alpha, v, x, {1, 1, 1}) == 0.0);

  // no detected rows carry no information
  const Eigen::VectorXd g = gehan_subgradient(alpha, v, x, {0, 0, 0});
  CHECK(g.norm() == 0.0);
}

TEST_CASE("production evaluators agree with the O(n^2) reference") {
  for (std::uint64_t seed : {1ULL, 2ULL, 3ULL}) {
    const RawData d = make_raw_data(150, 2, seed);
    RngStream rng(seed, 99);
    for (int k = 0; k < 10; ++k) {
      Eigen::VectorXd alpha(2);
      alpha << rng.next_normal(), rng.next_normal();
      const double fast = gehan_objective(alpha, d.v, d.x, d.delta);
      const double slow = ref::gehan_objective(alpha, d.v, d.x, d.delta);
      CHECK(fast == doctest::Approx(slow).epsilon(1e-12));
      const Eigen::VectorXd gf = gehan_subgradient(alpha, d.v, d.x, d.delta);
      const Eigen::VectorXd gs =
          ref::gehan_subgradient(alpha, d.v, d.x, d.delta);
      CHECK((gf - gs).lpNorm<Eigen::Infinity>() < 1e-12);
    }
  }
}

TEST_CASE("subgradient matches finite differences away from ties") {
  const RawData d = make_raw_data(80, 2, 42);
  RngStream rng(4, 0);
  int checked = 0;
  for (int k = 0; k < 50; ++k) {
    Eigen::VectorXd alpha(2);
    alpha << rng.next_normal(), rng.next_normal();
    const Eigen::VectorXd g = gehan_subgradient(alpha, d.v, d.x, d.delta);
    for (int j = 0; j < 2; ++j) {
      const double h = 1e-6;
      Eigen::VectorXd hi = alpha, lo = alpha;
      hi[j] += h;
      lo[j] -= h;
      const double num = (gehan_objective(hi, d.v, d.x, d.delta) -
                          gehan_objective(lo, d.v, d.x, d.delta)) /
                         (2 * h);
      CHECK(g[j] == doctest::Approx(num).epsilon(1e-6).scale(1.0));
    }
    ++checked;
  }
  CHECK(checked == 50);
}

TEST_CASE("objective is convex along random chords") {
  const RawData d = make_raw_data(60, 2, 7);
  RngStream rng(8, 0);
  for (int k = 0; k < 100; ++k) {
    Eigen::VectorXd a(2), b(2);
    a << rng.next_normal(), rng.next_normal();
    b << rng.next_normal(), rng.next_normal();
    const double lam = rng.next_double();
    const Eigen::VectorXd mid = lam * a + (1 - lam) * b;
    CHECK(gehan_objective(mid, d.v, d.x, d.delta) <=
          lam * gehan_objective(a, d.v, d.x, d.delta) +
              (1 - lam) * gehan_objective(b, d.v, d.x, d.delta) + 1e-12);
  }
}

TEST_CASE("fit matches a dense grid oracle on n=20 instances") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const RawData raw = make_raw_data(20, 2, seed, 0.25);
    Eigen::VectorXd v = raw.v;
    std::vector<std::uint8_t> delta = raw.delta;
    delta[0] = 1;  // at least two detected
    delta[1] = 1;
    // censored rows must carry the max as the limit for a valid set
    const double c = v.maxCoeff();
    for (int i = 0; i < 20; ++i)
      if (!delta[static_cast<std::size_t>(i)]) v[i] = c;
    const ObservationSet data =
        make_observation_set(Eigen::VectorXd::Zero(20), raw.x, v, delta, c);
    const AftFit fit = fit_gehan(data);

    // two-level grid on [alpha +- 0.5]^2: coarse 1e-2, then 1e-3 around the
    // coarse minimum (valid for a convex objective), reference evaluator
    auto grid_min = [&](Eigen::Vector2d center, double half, double step) {
      Eigen::Vector2d best = center;
      double best_obj = 1e300;
      Eigen::VectorXd a(2);
      for (double da = -half; da <= half + 1e-12; da += step)
        for (double db = -half; db <= half + 1e-12; db += step) {
          a << center[0] + da, center[1] + db;
          const double obj = ref::gehan_objective(a, data.v, data.x,
                                                  data.delta);
          if (obj < best_obj) {
            best_obj = obj;
            best = a;
          }
        }
      return std::make_pair(best, best_obj);
    };
    const auto [coarse, coarse_obj] =
        grid_min(fit.alpha, 0.5, 1e-2);
    const auto [fine, fine_obj] = grid_min(coarse, 2e-2, 1e-3);

    CHECK(fit.gehan_objective <= fine_obj + 1e-10);
    CHECK(std::abs(fit.gehan_objective - fine_obj) <
          2e-3 * (1.0 + std::abs(fine_obj)));
    CHECK((fit.alpha - fine).lpNorm<Eigen::Infinity>() < 5e-3);
  }
}

TEST_CASE("two point fit recovers the crossing") {
  Eigen::VectorXd y = Eigen::VectorXd::Zero(4), v(4);
  v << 0.0, 1.0, 0.4, 0.8;
  Eigen::MatrixXd x(4, 1);
  x << 0.0, 1.0, 0.4, 0.8;  // exact fit at alpha = 1
  const ObservationSet data =
      make_observation_set(y, x, v, {1, 1, 1, 1}, 2.0);
  const AftFit fit = fit_gehan(data);
  CHECK(fit.alpha[0] == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(fit.gehan_objective <= 1e-12);
}

TEST_CASE("location invariance and scale equivariance") {
  const RawData raw = make_raw_data(50, 1, 9, 0.0);
  Eigen::VectorXd y = Eigen::VectorXd::Zero(50);
  const double c = raw.v.maxCoeff() + 1.0;
  const ObservationSet base = make_observation_set(
      y, raw.x, raw.v, std::vector<std::uint8_t>(50, 1), c);
  const AftFit f0 = fit_gehan(base);

  // shifting v leaves the slope unchanged and shifts residuals
  const ObservationSet shifted = make_observation_set(
      y, raw.x, (raw.v.array() + 2.5).matrix(),
      std::vector<std::uint8_t>(50, 1), c + 2.5);
  const AftFit f1 = fit_gehan(shifted);
  CHECK((f0.alpha - f1.alpha).lpNorm<Eigen::Infinity>() < 1e-7);
  CHECK((f1.residuals - f0.residuals).array().abs().maxCoeff() ==
        doctest::Approx(2.5).epsilon(1e-6));

  // scaling v and x jointly leaves the slope unchanged; scaling v alone
  // rescales it
  const ObservationSet joint = make_observation_set(
      y, 3.0 * raw.x, 3.0 * raw.v, std::vector<std::uint8_t>(50, 1),
      3.0 * c);
  CHECK(fit_gehan(joint).alpha[0] ==
        doctest::Approx(f0.alpha[0]).epsilon(1e-6));
  const ObservationSet vonly = make_observation_set(
      y, raw.x, 3.0 * raw.v, std::vector<std::uint8_t>(50, 1), 3.0 * c);
  CHECK(fit_gehan(vonly).alpha[0] ==
        doctest::Approx(3.0 * f0.alpha[0]).epsilon(1e-6));
}

TEST_CASE("local minimum spot check against random perturbations") {
  SimScenario sc;
  sc.n = 150;
  const CalibratedLimit cal = calibrate_limit(sc, 100000);
  const GeneratedData gen = generate_dataset(sc, cal.c, 2);
  const AftFit fit = fit_gehan(gen.obs);
  RngStream rng(55, 0);
  for (int k = 0; k < 50; ++k) {
    Eigen::VectorXd dir(2);
    dir << rng.next_normal(), rng.next_normal();
    dir *= 0.1 / dir.norm();
    CHECK(gehan_objective(fit.alpha + dir, gen.obs) >=
          fit.gehan_objective - 1e-12);
  }
}

TEST_CASE("uncensored symmetric errors recover the slope") {
  // single covariate, alpha = -0.5, symmetric errors
  RngStream rng(95, 0);
  const int reps = 40, n = 400;
  double sum = 0.0, sumsq = 0.0;
  for (int r = 0; r < reps; ++r) {
    Eigen::VectorXd y = Eigen::VectorXd::Zero(n), v(n);
    Eigen::MatrixXd x(n, 1);
    for (int i = 0; i < n; ++i) {
      x(i, 0) = rng.next_normal();
      v[i] = -0.5 * x(i, 0) + 0.3 * rng.next_normal();
    }
    const ObservationSet data = make_observation_set(
        y, x, v, std::vector<std::uint8_t>(n, 1), v.maxCoeff());
    const AftFit fit = fit_gehan(data);
    sum += fit.alpha[0];
    sumsq += fit.alpha[0] * fit.alpha[0];
  }
  const double mean = sum / reps;
  const double sd = std::sqrt((sumsq / reps - mean * mean) * reps / (reps - 1));
  CHECK(std::abs(mean - (-0.5)) < 3.0 * sd / std::sqrt(reps));
}

TEST_CASE("simulation design slopes recovered at n=400") {
  SimScenario sc;
  const CalibratedLimit cal = calibrate_limit(sc, 1000000);
  const int reps = 60;
  Eigen::Vector2d sum = Eigen::Vector2d::Zero(), sumsq = Eigen::Vector2d::Zero();
  for (int r = 0; r < reps; ++r) {
    const GeneratedData gen = generate_dataset(sc, cal.c, 1000 + r);
    const AftFit fit = fit_gehan(gen.obs);
    sum += fit.alpha;
    sumsq += fit.alpha.cwiseAbs2();
  }
  const Eigen::Vector2d mean = sum / reps;
  const Eigen::Vector2d truth(sc.alpha1, sc.alpha2);
  for (int j = 0; j < 2; ++j) {
    const double sd = std::sqrt(
        (sumsq[j] / reps - mean[j] * mean[j]) * reps / (reps - 1.0));
    CHECK(std::abs(mean[j] - truth[j]) < 3.0 * sd / std::sqrt(reps));
  }
}

TEST_CASE("error paths") {
  Eigen::VectorXd y = Eigen::VectorXd::Zero(5), v(5);
  Eigen::MatrixXd x(5, 1);
  x << 1, 2, 3, 4, 5;
  const double c = 2.0;
  v << c, c, c, c, c;
  SUBCASE("all censored") {
    const ObservationSet data =
        make_observation_set(y, x, v, {0, 0, 0, 0, 0}, c);
    CHECK_THROWS_AS(fit_gehan(data), EstimationError);
  }
  SUBCASE("constant covariate") {
    Eigen::MatrixXd xc = Eigen::MatrixXd::Ones(5, 1);
    Eigen::VectorXd v2(5);
    v2 << 0.5, 1.0, 1.5, c, c;
    const ObservationSet data =
        make_observation_set(y, xc, v2, {1, 1, 1, 0, 0}, c);
    CHECK_THROWS_AS(fit_gehan(data), EstimationError);
  }
}

}  // TEST_SUITE
