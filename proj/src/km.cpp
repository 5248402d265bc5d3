#include "lodreg/km.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "lodreg/errors.hpp"

namespace lodreg {

double StepDistribution::cdf(double t) const {
  const auto it =
      std::upper_bound(jump_points.begin(), jump_points.end(), t);
  const std::size_t k = static_cast<std::size_t>(it - jump_points.begin());
  return k == 0 ? 0.0 : cum_masses[k - 1];
}

StepDistribution km_fit(const Eigen::VectorXd& residuals,
                        const std::vector<std::uint8_t>& delta) {
  const Eigen::Index n = residuals.size();
  if (n == 0 || static_cast<Eigen::Index>(delta.size()) != n)
    throw DataError("km_fit: empty input or length mismatch");
  bool any_detected = false;
  for (auto d : delta) any_detected |= (d != 0);
  if (!any_detected)
    throw EstimationError("km_fit: all residuals censored");

  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    return residuals[a] < residuals[b] ||
           (residuals[a] == residuals[b] && a < b);
  });

  StepDistribution dist;
  double survival = 1.0;
  std::size_t i = 0;
  const auto sz = static_cast<std::size_t>(n);
  while (i < sz) {
    const double value = residuals[order[i]];
    std::size_t j = i;
    int n_events = 0;
    while (j < sz && residuals[order[j]] == value) {
      n_events += delta[static_cast<std::size_t>(order[j])];
      ++j;
    }
    if (n_events > 0) {
      // risk set counts everyone with residual >= value, censored included
      const double at_risk = static_cast<double>(sz - i);
      const double factor = 1.0 - 1.0 / at_risk;
      const double next = survival * std::pow(factor, n_events);
      dist.jump_points.push_back(value);
      dist.masses.push_back(survival - next);
      survival = next;
    }
    i = j;
  }
  dist.total_mass = 1.0 - survival;
  dist.cum_masses.resize(dist.masses.size());
  std::partial_sum(dist.masses.begin(), dist.masses.end(),
                   dist.cum_masses.begin());
  return dist;
}

JumpRange restricted_jumps(const StepDistribution& dist, double lower,
                           double upper) {
  if (!(lower < upper)) throw ConfigError("restricted_jumps: lower < upper");
  const auto b = std::upper_bound(dist.jump_points.begin(),
                                  dist.jump_points.end(), lower);
  const auto e = std::upper_bound(dist.jump_points.begin(),
                                  dist.jump_points.end(), upper);
  JumpRange r;
  r.dist = &dist;
  r.begin = static_cast<std::size_t>(b - dist.jump_points.begin());
  r.end = static_cast<std::size_t>(e - dist.jump_points.begin());
  return r;
}

}  // namespace lodreg
