#include "lodreg/sim.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "lodreg/baselines.hpp"
#include "lodreg/bootstrap.hpp"
#include "lodreg/errors.hpp"
#include "lodreg/parallel.hpp"
#include "lodreg/pseudo.hpp"
#include "lodreg/rng.hpp"

namespace lodreg {

namespace {

constexpr std::uint64_t kCalibrateTag = 0x63616CULL << 40;   // "cal"
constexpr std::uint64_t kCondMeanTag = 0x636DULL << 48;      // "cm"
constexpr std::uint64_t kDataTag = 0x646174ULL << 40;        // "dat"
constexpr std::uint64_t kSeedDeriveTag = 0x7364ULL << 48;    // "sd"
constexpr std::uint64_t kDrawChunk = 1 << 16;

struct CovariateDraw {
  double x1, x2, err;
};

CovariateDraw draw_covariates(const SimScenario& sc, RngStream& rng) {
  CovariateDraw d;
  d.x1 = rng.next_bernoulli(0.5) ? 1.0 : 0.0;
  double xi;
  do {
    xi = rng.next_normal();
  } while (std::abs(xi) > sc.x2_trunc);
  d.x2 = 1.0 + xi;
  d.err = rng.next_bernoulli(sc.mix_weight)
              ? rng.next_normal(sc.mix_mean1, sc.mix_sd1)
              : rng.next_normal(sc.mix_mean2, sc.mix_sd2);
  return d;
}

double draw_t(const SimScenario& sc, RngStream& rng) {
  const CovariateDraw d = draw_covariates(sc, rng);
  return sc.alpha0 + sc.alpha1 * d.x1 + sc.alpha2 * d.x2 + d.err;
}

void validate(const SimScenario& sc) {
  if (!(sc.target_censoring > 0.0 && sc.target_censoring < 1.0))
    throw ConfigError("scenario: target censoring must be in (0,1)");
  if (sc.n < 10) throw ConfigError("scenario: n too small");
  if (sc.n_reps < 1) throw ConfigError("scenario: n_reps must be positive");
}

}  // namespace

CalibratedLimit calibrate_limit(const SimScenario& scenario,
                                std::uint64_t n_draws) {
  validate(scenario);
  std::vector<double> t(n_draws);
  const std::uint64_t n_chunks = (n_draws + kDrawChunk - 1) / kDrawChunk;
  par::parallel_for(static_cast<std::ptrdiff_t>(n_chunks), [&](std::ptrdiff_t c) {
    RngStream rng(scenario.seed,
                  kCalibrateTag | static_cast<std::uint64_t>(c));
    const std::uint64_t lo = static_cast<std::uint64_t>(c) * kDrawChunk;
    const std::uint64_t hi = std::min(n_draws, lo + kDrawChunk);
    for (std::uint64_t i = lo; i < hi; ++i) t[i] = draw_t(scenario, rng);
  });
  const auto k = static_cast<std::ptrdiff_t>(
      (1.0 - scenario.target_censoring) * static_cast<double>(n_draws));
  const auto kk = std::clamp<std::ptrdiff_t>(
      k, 0, static_cast<std::ptrdiff_t>(n_draws) - 1);
  std::nth_element(t.begin(), t.begin() + kk, t.end());
  CalibratedLimit cal;
  cal.c = t[static_cast<std::size_t>(kk)];
  cal.limit = std::exp(-cal.c);
  return cal;
}

double conditional_mean_oracle(const SimScenario& scenario, double c,
                               std::uint64_t n_draws) {
  validate(scenario);
  struct Acc {
    double sum = 0.0;
    std::uint64_t count = 0;
  };
  const std::uint64_t n_chunks = (n_draws + kDrawChunk - 1) / kDrawChunk;
  std::vector<Acc> parts(n_chunks);
  par::parallel_for(static_cast<std::ptrdiff_t>(n_chunks), [&](std::ptrdiff_t ci) {
    RngStream rng(scenario.seed, kCondMeanTag | static_cast<std::uint64_t>(ci));
    const std::uint64_t lo = static_cast<std::uint64_t>(ci) * kDrawChunk;
    const std::uint64_t hi = std::min(n_draws, lo + kDrawChunk);
    Acc a;
    for (std::uint64_t i = lo; i < hi; ++i) {
      const double t = draw_t(scenario, rng);
      if (t > c) {  // censored: Z below the limit
        a.sum += std::exp(-t);
        ++a.count;
      }
    }
    parts[static_cast<std::size_t>(ci)] = a;
  });
  double sum = 0.0;
  std::uint64_t count = 0;
  for (const auto& a : parts) {
    sum += a.sum;
    count += a.count;
  }
  if (count == 0) throw NumericError("conditional mean: no censored draws");
  return sum / static_cast<double>(count);
}

GeneratedData generate_dataset(const SimScenario& scenario, double c,
                               std::uint64_t rep_index) {
  validate(scenario);
  RngStream rng(scenario.seed, kDataTag | rep_index);
  const Eigen::Index n = scenario.n;
  Eigen::VectorXd y(n), v(n), z(n);
  Eigen::MatrixXd x(n, 2);
  std::vector<std::uint8_t> delta(static_cast<std::size_t>(n));
  const auto& th = scenario.theta_true;
  for (Eigen::Index i = 0; i < n; ++i) {
    const CovariateDraw d = draw_covariates(scenario, rng);
    const double t =
        scenario.alpha0 + scenario.alpha1 * d.x1 + scenario.alpha2 * d.x2 +
        d.err;
    x(i, 0) = d.x1;
    x(i, 1) = d.x2;
    z[i] = std::exp(-t);
    delta[static_cast<std::size_t>(i)] = t <= c ? 1 : 0;
    v[i] = std::min(t, c);
    const double lp = th[0] + th[1] * d.x1 + th[2] * d.x2 + th[3] * z[i];
    switch (scenario.family.kind) {
      case GlmFamily::Kind::kGaussian:
        y[i] = lp + scenario.gaussian_sd * rng.next_normal();
        break;
      case GlmFamily::Kind::kBernoulli:
        y[i] = rng.next_bernoulli(1.0 / (1.0 + std::exp(-lp))) ? 1.0 : 0.0;
        break;
      case GlmFamily::Kind::kPoisson: {
        const double rate = std::exp(lp);
        if (!(rate < 1e8))
          throw NumericError("generate: poisson rate overflow");
        y[i] = static_cast<double>(rng.next_poisson(rate));
        break;
      }
    }
  }
  GeneratedData g{make_observation_set(std::move(y), std::move(x),
                                       std::move(v), std::move(delta), c),
                  std::move(z)};
  return g;
}

std::string method_name(Method m) {
  switch (m) {
    case Method::kFullData:
      return "full_data";
    case Method::kTwoStage:
      return "two_stage";
    case Method::kCompleteCase:
      return "complete_case";
    case Method::kSubLimit:
      return "sub_L";
    case Method::kSubLimitSqrt2:
      return "sub_Lsqrt2";
    case Method::kSubZero:
      return "sub_zero";
    case Method::kSubCondMean:
      return "sub_condmean";
  }
  return "";
}

MonteCarloReport run_study(const SimScenario& scenario) {
  validate(scenario);
  const CalibratedLimit cal = calibrate_limit(scenario);
  const double cond_mean = conditional_mean_oracle(scenario, cal.c);
  const int n_reps = scenario.n_reps;
  const Eigen::Index dim = 4;
  constexpr std::size_t n_methods = kAllMethods.size();

  struct RepResult {
    std::array<Eigen::Vector4d, n_methods> theta;
    std::array<std::uint8_t, n_methods> ok{};
    Eigen::Vector4d boot_var = Eigen::Vector4d::Zero();
    std::array<std::uint8_t, 4> cover90{}, cover95{};
    bool boot_ok = false;
  };
  std::vector<RepResult> reps(static_cast<std::size_t>(n_reps));

  const double z90 = normal_quantile(0.95);
  const double z95 = normal_quantile(0.975);

  par::parallel_for(n_reps, [&](std::ptrdiff_t rep) {
    RepResult& out = reps[static_cast<std::size_t>(rep)];
    const GeneratedData gen =
        generate_dataset(scenario, cal.c, static_cast<std::uint64_t>(rep));
    const auto& obs = gen.obs;

    auto record = [&](Method m, auto&& fn) {
      try {
        out.theta[static_cast<std::size_t>(m)] = fn();
        out.ok[static_cast<std::size_t>(m)] = 1;
      } catch (const Error&) {
      }
    };

    record(Method::kFullData, [&] {
      return fit_glm(obs.y, build_design(obs.x, gen.z_latent),
                     scenario.family)
          .theta;
    });
    record(Method::kCompleteCase, [&] {
      return fit_complete_case(obs, scenario.family).theta;
    });
    record(Method::kSubLimit, [&] {
      return fit_substitution(obs, SubstitutionRule::at_limit(),
                              scenario.family)
          .theta;
    });
    record(Method::kSubLimitSqrt2, [&] {
      return fit_substitution(obs, SubstitutionRule::at_limit_over_sqrt2(),
                              scenario.family)
          .theta;
    });
    record(Method::kSubZero, [&] {
      return fit_substitution(obs, SubstitutionRule::at_zero(),
                              scenario.family)
          .theta;
    });
    record(Method::kSubCondMean, [&] {
      return fit_substitution(obs, SubstitutionRule::conditional_mean(cond_mean),
                              scenario.family)
          .theta;
    });

    if (scenario.n_boot > 0) {
      try {
        const std::uint64_t boot_seed = Philox4x64::block(
            scenario.seed, kSeedDeriveTag,
            static_cast<std::uint64_t>(rep))[0];
        const BootstrapResult br =
            bootstrap(obs, scenario.family, scenario.n_boot, boot_seed);
        out.theta[static_cast<std::size_t>(Method::kTwoStage)] = br.theta_hat;
        out.ok[static_cast<std::size_t>(Method::kTwoStage)] = 1;
        out.boot_var = br.boot_cov.diagonal();
        out.boot_ok = true;
        for (int j = 0; j < 4; ++j) {
          const double sd = std::sqrt(std::max(br.boot_cov(j, j), 0.0));
          const double err =
              std::abs(br.theta_hat[j] - scenario.theta_true[j]);
          out.cover90[static_cast<std::size_t>(j)] = err <= z90 * sd;
          out.cover95[static_cast<std::size_t>(j)] = err <= z95 * sd;
        }
      } catch (const Error&) {
      }
    } else {
      record(Method::kTwoStage, [&] {
        return fit_two_stage(obs, scenario.family).pseudo.theta;
      });
    }
  });

  MonteCarloReport report;
  report.c = cal.c;
  report.limit = cal.limit;
  report.cond_mean = cond_mean;
  report.n_reps = n_reps;
  report.n_boot = scenario.n_boot;
  report.n = scenario.n;
  report.family = scenario.family.name();
  report.seed = scenario.seed;

  for (std::size_t mi = 0; mi < n_methods; ++mi) {
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(dim);
    int used = 0;
    for (const auto& r : reps)
      if (r.ok[mi]) {
        mean += r.theta[mi];
        ++used;
      }
    MethodSummary& s = report.methods[mi];
    s.n_used = used;
    s.n_failed = n_reps - used;
    s.bias = Eigen::VectorXd::Constant(dim, std::nan(""));
    s.emp_var = Eigen::VectorXd::Constant(dim, std::nan(""));
    if (used == 0) continue;
    mean /= used;
    s.bias = mean - scenario.theta_true;
    if (used >= 2) {
      Eigen::VectorXd ss = Eigen::VectorXd::Zero(dim);
      for (const auto& r : reps)
        if (r.ok[mi]) ss += (r.theta[mi] - mean).cwiseAbs2();
      s.emp_var = ss / (used - 1);
    }
  }

  report.boot_var_mean = Eigen::VectorXd::Constant(dim, std::nan(""));
  report.coverage90 = Eigen::VectorXd::Constant(dim, std::nan(""));
  report.coverage95 = Eigen::VectorXd::Constant(dim, std::nan(""));
  int n_cov = 0;
  Eigen::Vector4d bv = Eigen::Vector4d::Zero();
  Eigen::Vector4d c90 = Eigen::Vector4d::Zero(), c95 = Eigen::Vector4d::Zero();
  for (const auto& r : reps) {
    if (!r.boot_ok) continue;
    ++n_cov;
    bv += r.boot_var;
    for (int j = 0; j < 4; ++j) {
      c90[j] += r.cover90[static_cast<std::size_t>(j)];
      c95[j] += r.cover95[static_cast<std::size_t>(j)];
    }
  }
  report.coverage_reps = n_cov;
  if (n_cov > 0) {
    report.boot_var_mean = bv / n_cov;
    report.coverage90 = c90 / n_cov;
    report.coverage95 = c95 / n_cov;
  }
  return report;
}

}  // namespace lodreg
