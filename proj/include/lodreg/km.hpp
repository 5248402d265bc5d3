#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

namespace lodreg {

// Right-continuous nondecreasing step function: the Kaplan-Meier CDF of the
// AFT residuals. Possibly defective (total_mass < 1) when the largest
// residual is censored; the mass is kept as-is, never renormalized.
struct StepDistribution {
  std::vector<double> jump_points;  // strictly increasing
  std::vector<double> masses;       // positive, same length
  std::vector<double> cum_masses;   // prefix sums of masses
  double total_mass = 0.0;

  double cdf(double t) const;
  std::size_t size() const { return jump_points.size(); }
};

// Index range view of jumps in (lower, upper]: open at the lower endpoint,
// closed at the upper.
struct JumpRange {
  const StepDistribution* dist = nullptr;
  std::size_t begin = 0;
  std::size_t end = 0;

  std::size_t count() const { return end - begin; }
  double point(std::size_t k) const { return dist->jump_points[begin + k]; }
  double mass(std::size_t k) const { return dist->masses[begin + k]; }
};

// Product-limit estimator of the residual distribution: each detected
// residual contributes a factor 1 - 1/#{e_j >= e_i}; tied detected values
// multiply their factors at the tied point. Requires at least one
// detected residual.
StepDistribution km_fit(const Eigen::VectorXd& residuals,
                        const std::vector<std::uint8_t>& delta);

JumpRange restricted_jumps(const StepDistribution& dist, double lower,
                           double upper);

}  // namespace lodreg
