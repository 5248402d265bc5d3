#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "lodreg/data_model.hpp"
#include "lodreg/pseudo.hpp"

namespace lodreg {

struct BootstrapResult {
  Eigen::VectorXd theta_hat;   // two-stage estimate on the original data
  Eigen::MatrixXd boot_cov;    // sample covariance of replicate estimates
  int n_boot = 0;
  int n_failed = 0;
  std::uint64_t seed = 0;
  std::string warning;         // set when > 5% of replicates failed
};

// Row indices resampled with replacement for one replicate; a pure function
// of (seed, replicate), so replicates can run in any order.
std::vector<Eigen::Index> resample_indices(std::uint64_t seed,
                                           std::uint64_t replicate,
                                           Eigen::Index n);

ObservationSet resample(const ObservationSet& data,
                        const std::vector<Eigen::Index>& idx);

// Nonparametric bootstrap of the full two-stage pipeline. Replicates that
// fail to converge are dropped and counted; more than half failing is an
// error.
BootstrapResult bootstrap(const ObservationSet& data, const GlmFamily& family,
                          int n_boot, std::uint64_t seed,
                          const TwoStageOptions& opts = {});

// Wald interval theta_j +- z_{(1+level)/2} * sqrt(cov_jj) per coefficient.
std::vector<std::pair<double, double>> wald_interval(
    const BootstrapResult& result, double level);

}  // namespace lodreg
