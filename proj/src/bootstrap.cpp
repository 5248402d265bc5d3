#include "lodreg/bootstrap.hpp"

#include <cmath>

#include "lodreg/errors.hpp"
#include "lodreg/parallel.hpp"
#include "lodreg/rng.hpp"

namespace lodreg {

namespace {
// stream tag separating bootstrap draws from other consumers of the seed
constexpr std::uint64_t kBootStreamTag = 0x626F6F74ULL << 32;  // "boot"
}  // namespace

std::vector<Eigen::Index> resample_indices(std::uint64_t seed,
                                           std::uint64_t replicate,
                                           Eigen::Index n) {
  RngStream rng(seed, kBootStreamTag | replicate);
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
  for (auto& v : idx)
    v = static_cast<Eigen::Index>(
        rng.next_below(static_cast<std::uint64_t>(n)));
  return idx;
}

ObservationSet resample(const ObservationSet& data,
                        const std::vector<Eigen::Index>& idx) {
  const Eigen::Index n = static_cast<Eigen::Index>(idx.size());
  Eigen::VectorXd y(n), v(n);
  Eigen::MatrixXd x(n, data.p());
  std::vector<std::uint8_t> delta(static_cast<std::size_t>(n));
  for (Eigen::Index r = 0; r < n; ++r) {
    const Eigen::Index i = idx[static_cast<std::size_t>(r)];
    y[r] = data.y[i];
    v[r] = data.v[i];
    x.row(r) = data.x.row(i);
    delta[static_cast<std::size_t>(r)] =
        data.delta[static_cast<std::size_t>(i)];
  }
  return make_observation_set(std::move(y), std::move(x), std::move(v),
                              std::move(delta), data.c);
}

BootstrapResult bootstrap(const ObservationSet& data, const GlmFamily& family,
                          int n_boot, std::uint64_t seed,
                          const TwoStageOptions& opts) {
  if (n_boot < 50) throw ConfigError("bootstrap: need n_boot >= 50");

  BootstrapResult res;
  res.n_boot = n_boot;
  res.seed = seed;
  res.theta_hat = fit_two_stage(data, family, opts).pseudo.theta;

  const Eigen::Index dim = data.p() + 2;
  std::vector<Eigen::VectorXd> estimates(static_cast<std::size_t>(n_boot));
  std::vector<std::uint8_t> ok(static_cast<std::size_t>(n_boot), 0);

  par::parallel_for(n_boot, [&](std::ptrdiff_t b) {
    try {
      const auto idx = resample_indices(
          seed, static_cast<std::uint64_t>(b), data.n());
      const ObservationSet rs = resample(data, idx);
      const TwoStageFit fit = fit_two_stage(rs, family, TwoStageOptions{});
      estimates[static_cast<std::size_t>(b)] = fit.pseudo.theta;
      ok[static_cast<std::size_t>(b)] = 1;
    } catch (const Error&) {
      // dropped and counted below
    }
  });

  Eigen::VectorXd mean = Eigen::VectorXd::Zero(dim);
  int n_ok = 0;
  for (int b = 0; b < n_boot; ++b) {
    if (!ok[static_cast<std::size_t>(b)]) continue;
    mean += estimates[static_cast<std::size_t>(b)];
    ++n_ok;
  }
  res.n_failed = n_boot - n_ok;
  if (res.n_failed * 2 > n_boot)
    throw NumericError("bootstrap: " + std::to_string(res.n_failed) + " of " +
                       std::to_string(n_boot) + " replicates failed");
  if (n_ok < 2) throw NumericError("bootstrap: fewer than 2 usable replicates");
  mean /= static_cast<double>(n_ok);

  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(dim, dim);
  for (int b = 0; b < n_boot; ++b) {
    if (!ok[static_cast<std::size_t>(b)]) continue;
    const Eigen::VectorXd d = estimates[static_cast<std::size_t>(b)] - mean;
    cov.noalias() += d * d.transpose();
  }
  cov /= static_cast<double>(n_ok - 1);
  res.boot_cov = cov;
  if (res.n_failed * 20 > n_boot)
    res.warning = "degraded: " + std::to_string(res.n_failed) +
                  " bootstrap replicates failed (>5%)";
  return res;
}

std::vector<std::pair<double, double>> wald_interval(
    const BootstrapResult& result, double level) {
  if (!(level > 0.0 && level < 1.0))
    throw ConfigError("wald_interval: level in (0,1)");
  const double z = normal_quantile(0.5 * (1.0 + level));
  std::vector<std::pair<double, double>> out;
  out.reserve(static_cast<std::size_t>(result.theta_hat.size()));
  for (Eigen::Index j = 0; j < result.theta_hat.size(); ++j) {
    const double sd = std::sqrt(std::max(result.boot_cov(j, j), 0.0));
    out.emplace_back(result.theta_hat[j] - z * sd,
                     result.theta_hat[j] + z * sd);
  }
  return out;
}

}  // namespace lodreg
