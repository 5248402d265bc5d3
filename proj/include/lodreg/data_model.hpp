#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

namespace lodreg {

// Monotone decreasing map between the raw covariate scale z and the
// regression scale t. Only the negative-log pair t = -log z, z = exp(-t)
// ships.
struct Transformation {
  enum class Kind { kNegLog };
  Kind kind = Kind::kNegLog;

  double forward(double t) const;   // h(t):   t -> z
  double inverse(double z) const;   // h^-1:   z -> t
};

// One sample of censored-covariate regression data. v holds min(T, C) on
// the transformed scale; delta = 1 marks detected rows (value at or below
// the limit on the raw scale). Immutable after construction; safe to share
// across threads.
struct ObservationSet {
  Eigen::VectorXd y;                 // response
  Eigen::MatrixXd x;                 // n x p fully observed covariates
  Eigen::VectorXd v;                 // observed transformed covariate
  std::vector<std::uint8_t> delta;   // detection indicator
  double c = 0.0;                    // transformed detection limit

  Eigen::Index n() const { return y.size(); }
  Eigen::Index p() const { return x.cols(); }
  double censoring_rate() const;
  Eigen::Index n_detected() const;
};

// Validates the invariants and returns the set; throws DataError otherwise.
ObservationSet make_observation_set(Eigen::VectorXd y, Eigen::MatrixXd x,
                                    Eigen::VectorXd v,
                                    std::vector<std::uint8_t> delta, double c);

// C = h^-1(L); L must be positive.
double transform_limit(double limit, const Transformation& t = {});

// Linear predictor layout (1, x_1..x_p, h(t)); theta = (beta', gamma)'.
struct LinearPredictorLayout {
  Eigen::Index p = 0;
  Eigen::Index dim() const { return p + 2; }
};

// D(t) for one subject given the raw-scale covariate value z = h(t).
Eigen::VectorXd design_vector(const Eigen::RowVectorXd& x_row, double z);

// n x (p+2) design with the raw-scale covariate in the last column.
Eigen::MatrixXd build_design(const Eigen::MatrixXd& x,
                             const Eigen::VectorXd& z);

}  // namespace lodreg
