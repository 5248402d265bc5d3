#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "lodreg/data_model.hpp"

namespace lodreg {

struct AftFit {
  Eigen::VectorXd alpha;       // slope coefficients, no intercept
  Eigen::VectorXd residuals;   // v - x * alpha for every row
  std::vector<std::uint8_t> delta;
  double gehan_objective = 0.0;
  double subgradient_norm = 0.0;
  bool converged = false;
  int iterations = 0;
};

// Gehan objective (1/n^2) sum_i sum_j w_i w_j delta_i max(e_j - e_i, 0)
// with e_k = v_k - x_k' alpha and unit weights by default (pass `weights`
// for wild-bootstrap perturbations). Convex, piecewise linear. Evaluated
// in O(n log n) via a sort; summation order is fixed, so results are
// bit-identical for any worker count.
double gehan_objective(const Eigen::VectorXd& alpha, const Eigen::VectorXd& v,
                       const Eigen::MatrixXd& x,
                       const std::vector<std::uint8_t>& delta,
                       const Eigen::VectorXd* weights = nullptr);
double gehan_objective(const Eigen::VectorXd& alpha,
                       const ObservationSet& data);

// Subgradient (1/n^2) sum_i sum_j w_i w_j delta_i (x_i - x_j) 1{e_i <= e_j};
// equals the gradient away from kinks.
Eigen::VectorXd gehan_subgradient(const Eigen::VectorXd& alpha,
                                  const Eigen::VectorXd& v,
                                  const Eigen::MatrixXd& x,
                                  const std::vector<std::uint8_t>& delta,
                                  const Eigen::VectorXd* weights = nullptr);
Eigen::VectorXd gehan_subgradient(const Eigen::VectorXd& alpha,
                                  const ObservationSet& data);

// Minimizes the Gehan objective by exact line searches along subgradient,
// coordinate, and diagonal directions (bisection on the directional
// derivative), widening to kink-edge directions and a derivative-free
// polish at stalls; stops when a full round improves the objective by
// less than 1e-10.
AftFit fit_gehan(const ObservationSet& data, const Eigen::VectorXd& init,
                 const Eigen::VectorXd* weights = nullptr);
AftFit fit_gehan(const ObservationSet& data);  // complete-case LS init

}  // namespace lodreg
