#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "lodreg/data_model.hpp"
#include "lodreg/glm.hpp"
#include "lodreg/km.hpp"
#include "lodreg/pseudo.hpp"

// Serial reference implementations: plain double loops and direct formula
// evaluations, kept independent of the production kernels. Used by the
// tests as oracles and by the benchmark target as the baseline.
namespace lodreg::ref {

// O(n^2) Gehan objective / subgradient.
double gehan_objective(const Eigen::VectorXd& alpha, const Eigen::VectorXd& v,
                       const Eigen::MatrixXd& x,
                       const std::vector<std::uint8_t>& delta);
Eigen::VectorXd gehan_subgradient(const Eigen::VectorXd& alpha,
                                  const Eigen::VectorXd& v,
                                  const Eigen::MatrixXd& x,
                                  const std::vector<std::uint8_t>& delta);

// Product-limit CDF evaluated directly from its defining product at t,
// with the risk set counted by an O(n^2) scan.
double km_cdf_product(const Eigen::VectorXd& residuals,
                      const std::vector<std::uint8_t>& delta, double t);

// Log pseudo-likelihood evaluated through km_cdf_product increments and a
// direct per-subject sum (no shared jump tables or softmax path).
double pseudo_loglik(const Eigen::VectorXd& theta, const ObservationSet& data,
                     const NuisanceBundle& nuisance, const GlmFamily& family);

// Plain per-subject pseudo-score sum in row order.
Eigen::VectorXd pseudo_score(const Eigen::VectorXd& theta,
                             const ObservationSet& data,
                             const NuisanceBundle& nuisance,
                             const GlmFamily& family);

}  // namespace lodreg::ref
