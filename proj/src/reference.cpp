#include "lodreg/reference.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace lodreg::ref {

double gehan_objective(const Eigen::VectorXd& alpha, const Eigen::VectorXd& v,
                       const Eigen::MatrixXd& x,
                       const std::vector<std::uint8_t>& delta) {
  const Eigen::Index n = v.size();
  const Eigen::VectorXd e = v - x * alpha;
  double total = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!delta[static_cast<std::size_t>(i)]) continue;
    for (Eigen::Index j = 0; j < n; ++j)
      total += std::max(e[j] - e[i], 0.0);
  }
  return total / (static_cast<double>(n) * static_cast<double>(n));
}

Eigen::VectorXd gehan_subgradient(const Eigen::VectorXd& alpha,
                                  const Eigen::VectorXd& v,
                                  const Eigen::MatrixXd& x,
                                  const std::vector<std::uint8_t>& delta) {
  const Eigen::Index n = v.size();
  const Eigen::VectorXd e = v - x * alpha;
  Eigen::VectorXd g = Eigen::VectorXd::Zero(x.cols());
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!delta[static_cast<std::size_t>(i)]) continue;
    for (Eigen::Index j = 0; j < n; ++j)
      if (e[i] <= e[j]) g += (x.row(i) - x.row(j)).transpose();
  }
  return g / (static_cast<double>(n) * static_cast<double>(n));
}

double km_cdf_product(const Eigen::VectorXd& residuals,
                      const std::vector<std::uint8_t>& delta, double t) {
  const Eigen::Index n = residuals.size();
  double survival = 1.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!delta[static_cast<std::size_t>(i)] || residuals[i] > t) continue;
    Eigen::Index at_risk = 0;
    for (Eigen::Index j = 0; j < n; ++j)
      if (residuals[j] >= residuals[i]) ++at_risk;
    survival *= 1.0 - 1.0 / static_cast<double>(at_risk);
  }
  return 1.0 - survival;
}

namespace {

// distinct detected residual values with masses from product differences
void km_jumps_direct(const Eigen::VectorXd& residuals,
                     const std::vector<std::uint8_t>& delta,
                     std::vector<double>& points,
                     std::vector<double>& masses) {
  std::set<double> values;
  for (Eigen::Index i = 0; i < residuals.size(); ++i)
    if (delta[static_cast<std::size_t>(i)]) values.insert(residuals[i]);
  points.assign(values.begin(), values.end());
  masses.resize(points.size());
  double prev = 0.0;
  for (std::size_t k = 0; k < points.size(); ++k) {
    const double cur = km_cdf_product(residuals, delta, points[k]);
    masses[k] = cur - prev;
    prev = cur;
  }
}

}  // namespace

double pseudo_loglik(const Eigen::VectorXd& theta, const ObservationSet& data,
                     const NuisanceBundle& nuisance, const GlmFamily& family) {
  Eigen::VectorXd aft_resid(data.n());
  for (Eigen::Index i = 0; i < data.n(); ++i)
    aft_resid[i] = data.v[i] - data.x.row(i).dot(nuisance.alpha_hat);
  std::vector<double> pts, ms;
  km_jumps_direct(aft_resid, data.delta, pts, ms);

  const Transformation tr;
  double total = 0.0;
  for (Eigen::Index i = 0; i < data.n(); ++i) {
    if (data.delta[static_cast<std::size_t>(i)]) {
      total += log_density(data.y[i], data.v[i], data.x.row(i), theta,
                           nuisance.phi_hat, family);
      continue;
    }
    const double xa = data.x.row(i).dot(nuisance.alpha_hat);
    const double lower = data.c - xa;
    double s = 0.0;
    for (std::size_t k = 0; k < pts.size(); ++k) {
      if (!(pts[k] > lower && pts[k] <= nuisance.tau)) continue;
      s += ms[k] * std::exp(log_density(data.y[i], pts[k] + xa,
                                        data.x.row(i), theta,
                                        nuisance.phi_hat, family));
    }
    total += std::log(std::max(s, kIntegralFloor));
  }
  return total / static_cast<double>(data.n());
}

Eigen::VectorXd pseudo_score(const Eigen::VectorXd& theta,
                             const ObservationSet& data,
                             const NuisanceBundle& nuisance,
                             const GlmFamily& family) {
  const Transformation tr;
  const Eigen::Index dim = data.p() + 2;
  Eigen::VectorXd total = Eigen::VectorXd::Zero(dim);
  for (Eigen::Index i = 0; i < data.n(); ++i) {
    if (data.delta[static_cast<std::size_t>(i)]) {
      const Eigen::VectorXd d =
          design_vector(data.x.row(i), tr.forward(data.v[i]));
      total += (data.y[i] - family.b_dot(d.dot(theta))) * d;
      continue;
    }
    const CensoredWeights cw =
        censored_weights(data.x.row(i), data.y[i], theta, nuisance, family,
                         data.c);
    const double xa = data.x.row(i).dot(nuisance.alpha_hat);
    for (std::size_t k = 0; k < cw.points.size(); ++k) {
      const Eigen::VectorXd d =
          design_vector(data.x.row(i), tr.forward(cw.points[k] + xa));
      total +=
          cw.weights[k] * (data.y[i] - family.b_dot(d.dot(theta))) * d;
    }
  }
  return total / static_cast<double>(data.n());
}

}  // namespace lodreg::ref
