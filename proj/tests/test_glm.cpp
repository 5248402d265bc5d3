#include <cmath>
#include <numbers>

#include <doctest.h>
#include <Eigen/Dense>

#include "lodreg/errors.hpp"
#include "lodreg/glm.hpp"
#include "lodreg/rng.hpp"
#include "lodreg/sim.hpp"
#include "test_util.hpp"

using namespace lodreg;

TEST_SUITE("glm") {

TEST_CASE("log density reference points") {
  Eigen::RowVectorXd x(0);
  Eigen::VectorXd theta(2);

  // bernoulli at w = 0, y = 1: log(1/2)
  theta << 0.0, 0.0;
  CHECK(log_density(1.0, 0.3, x, theta, 1.0, GlmFamily::bernoulli()) ==
        doctest::Approx(std::log(0.5)).epsilon(1e-12));

  // gaussian at the density peak: -log(2*pi)/2
  theta << 1.0, 0.5;
  const double t = 0.2;
  const double w = 1.0 + 0.5 * std::exp(-t);
  CHECK(log_density(w, t, x, theta, 1.0, GlmFamily::gaussian()) ==
        doctest::Approx(-0.5 * std::log(2.0 * std::numbers::pi))
            .epsilon(1e-12));

  // poisson at w = 0, y = 2: -1 - log 2
  theta << 0.0, 0.0;
  CHECK(log_density(2.0, 0.1, x, theta, 1.0, GlmFamily::poisson()) ==
        doctest::Approx(-1.0 - std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("score and hessian single observation") {
  Eigen::VectorXd theta(1), y(1);
  theta << 0.0;
  y << 1.0;
  Eigen::MatrixXd design(1, 1);
  design << 1.0;
  const auto [score, hess] =
      score_and_hessian(theta, y, design, GlmFamily::gaussian());
  CHECK(score[0] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(hess(0, 0) == doctest::Approx(-1.0).epsilon(1e-15));
}

TEST_CASE("score matches finite differences for all families") {
  RngStream rng(17, 0);
  for (const GlmFamily family :
       {GlmFamily::gaussian(), GlmFamily::bernoulli(), GlmFamily::poisson()}) {
    for (int rep = 0; rep < 34; ++rep) {
      const Eigen::Index n = 25, k = 3;
      Eigen::MatrixXd design(n, k);
      Eigen::VectorXd y(n);
      for (Eigen::Index i = 0; i < n; ++i) {
        design(i, 0) = 1.0;
        design(i, 1) = rng.next_normal();
        design(i, 2) = rng.next_double();
        switch (family.kind) {
          case GlmFamily::Kind::kGaussian:
            y[i] = rng.next_normal();
            break;
          case GlmFamily::Kind::kBernoulli:
            y[i] = rng.next_bernoulli(0.5);
            break;
          case GlmFamily::Kind::kPoisson:
            y[i] = static_cast<double>(rng.next_poisson(2.0));
            break;
        }
      }
      Eigen::VectorXd theta(k);
      for (Eigen::Index j = 0; j < k; ++j)
        theta[j] = rng.next_normal(0.0, 0.4);

      // phi = 1 so the score is exactly the gradient of the summed log density
      auto loglik = [&](const Eigen::VectorXd& th) {
        double s = 0;
        for (Eigen::Index i = 0; i < n; ++i) {
          const double w = design.row(i).dot(th);
          s += y[i] * w - family.b(w) + family.c(y[i], 1.0);
        }
        return s;
      };
      const Eigen::VectorXd g_num = test_util::numerical_gradient(loglik, theta);
      const auto [g_ana, hess] = score_and_hessian(theta, y, design, family);
      for (Eigen::Index j = 0; j < k; ++j)
        CHECK(g_ana[j] ==
              doctest::Approx(g_num[j]).epsilon(1e-6).scale(
                  1.0 + std::abs(g_num[j])));
      // hessian nsd: x'Hx <= 0 on a random direction
      const Eigen::VectorXd dir = Eigen::VectorXd::Random(k);
      CHECK(dir.dot(hess * dir) <= 1e-10);
    }
  }
}

TEST_CASE("complete case equals full fit without censoring") {
  SimScenario sc;
  sc.n = 120;
  const GeneratedData gen = generate_dataset(sc, 1e30, 3);  // nothing censored
  REQUIRE(gen.obs.n_detected() == gen.obs.n());
  const GlmFit cc = fit_complete_case(gen.obs, GlmFamily::gaussian());
  const Transformation t;
  Eigen::VectorXd z(gen.obs.n());
  for (Eigen::Index i = 0; i < gen.obs.n(); ++i)
    z[i] = t.forward(gen.obs.v[i]);
  const GlmFit full =
      fit_glm(gen.obs.y, build_design(gen.obs.x, z), GlmFamily::gaussian());
  CHECK((cc.theta - full.theta).lpNorm<Eigen::Infinity>() < 1e-12);
  CHECK(cc.phi == doctest::Approx(full.phi).epsilon(1e-12));
}

TEST_CASE("gaussian intercept plus covariate equals least squares") {
  // p = 0: design is (1, z) only, so the fit is closed-form OLS
  RngStream rng(23, 0);
  const Eigen::Index n = 40;
  Eigen::VectorXd y(n), v(n);
  Eigen::MatrixXd x(n, 0);
  std::vector<std::uint8_t> delta(n, 1);
  for (Eigen::Index i = 0; i < n; ++i) {
    v[i] = rng.next_double() * 2.0;
    y[i] = 1.0 + 2.0 * std::exp(-v[i]) + rng.next_normal();
  }
  const ObservationSet data =
      make_observation_set(y, x, v, delta, 10.0);
  const GlmFit fit = fit_complete_case(data, GlmFamily::gaussian());

  Eigen::MatrixXd d(n, 2);
  const Transformation t;
  for (Eigen::Index i = 0; i < n; ++i) {
    d(i, 0) = 1.0;
    d(i, 1) = t.forward(v[i]);
  }
  const Eigen::VectorXd ols = d.colPivHouseholderQr().solve(y);
  CHECK(fit.theta[0] == doctest::Approx(ols[0]).epsilon(1e-10));
  CHECK(fit.theta[1] == doctest::Approx(ols[1]).epsilon(1e-10));
  // dof-corrected dispersion
  CHECK(fit.phi ==
        doctest::Approx((y - d * ols).squaredNorm() / (n - 2)).epsilon(1e-10));
}

TEST_CASE("complete-case logistic matches a direct maximizer") {
  SimScenario sc;
  sc.family = GlmFamily::bernoulli();
  sc.n = 200;
  const CalibratedLimit cal = calibrate_limit(sc, 200000);
  const GeneratedData gen = generate_dataset(sc, cal.c, 11);
  const GlmFit fit = fit_complete_case(gen.obs, GlmFamily::bernoulli());

  // independent oracle: Nelder-Mead on the complete-case log likelihood
  const Transformation t;
  auto negloglik = [&](const Eigen::VectorXd& th) {
    double s = 0;
    for (Eigen::Index i = 0; i < gen.obs.n(); ++i) {
      if (!gen.obs.delta[(std::size_t)i]) continue;
      s -= log_density(gen.obs.y[i], gen.obs.v[i], gen.obs.x.row(i), th, 1.0,
                       GlmFamily::bernoulli());
    }
    return s;
  };
  const Eigen::VectorXd oracle = test_util::nelder_mead(
      negloglik, Eigen::VectorXd::Zero(4), 0.5, 20000, 1e-14);
  CHECK((fit.theta - oracle).lpNorm<Eigen::Infinity>() < 1e-5);
  CHECK(negloglik(fit.theta) <= negloglik(oracle) + 1e-9);
}

TEST_CASE("complete case is invariant to row permutation") {
  SimScenario sc;
  sc.n = 60;
  const CalibratedLimit cal = calibrate_limit(sc, 100000);
  const GeneratedData gen = generate_dataset(sc, cal.c, 5);
  const GlmFit a = fit_complete_case(gen.obs, GlmFamily::gaussian());

  const Eigen::Index n = gen.obs.n();
  Eigen::VectorXd y(n), v(n);
  Eigen::MatrixXd x(n, gen.obs.p());
  std::vector<std::uint8_t> delta(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Index src = (i * 7 + 3) % n;  // fixed permutation
    y[i] = gen.obs.y[src];
    v[i] = gen.obs.v[src];
    x.row(i) = gen.obs.x.row(src);
    delta[(std::size_t)i] = gen.obs.delta[(std::size_t)src];
  }
  const GlmFit b = fit_complete_case(
      make_observation_set(y, x, v, delta, gen.obs.c),
      GlmFamily::gaussian());
  CHECK((a.theta - b.theta).lpNorm<Eigen::Infinity>() < 1e-9);
}

TEST_CASE("bernoulli cumulant is stable to |w| = 700") {
  const GlmFamily f = GlmFamily::bernoulli();
  double prev = 0.0;
  for (double w = -700.0; w <= 700.0; w += 3.5) {
    const double b = f.b(w);
    const double mu = f.b_dot(w);
    REQUIRE(std::isfinite(b));
    REQUIRE(mu >= 0.0);
    REQUIRE(mu <= 1.0);
    if (w > -700.0) CHECK(mu >= prev);
    prev = mu;
  }
  CHECK(f.b(700.0) == doctest::Approx(700.0).epsilon(1e-12));
  CHECK(f.b(-700.0) == doctest::Approx(std::exp(-700.0)));
}

TEST_CASE("rank deficient design throws") {
  Eigen::VectorXd y(6);
  y << 1, 2, 3, 4, 5, 6;
  Eigen::MatrixXd design(6, 3);
  for (int i = 0; i < 6; ++i) {
    design(i, 0) = 1.0;
    design(i, 1) = i;
    design(i, 2) = 2.0 * i;  // collinear
  }
  CHECK_THROWS_AS(fit_glm(y, design, GlmFamily::gaussian()),
                  SingularityError);
}

TEST_CASE("too few detected rows throws") {
  Eigen::VectorXd y(5), v(5);
  y << 1, 2, 3, 4, 5;
  Eigen::MatrixXd x(5, 1);
  x << 0, 1, 0, 1, 1;
  const double c = 1.0;
  v << 0.5, c, c, c, c;
  const ObservationSet data =
      make_observation_set(y, x, v, {1, 0, 0, 0, 0}, c);
  CHECK_THROWS_AS(fit_complete_case(data, GlmFamily::gaussian()),
                  EstimationError);
}

}  // TEST_SUITE
