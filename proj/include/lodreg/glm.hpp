#pragma once

#include <string>
#include <utility>

#include <Eigen/Core>

#include "lodreg/data_model.hpp"

namespace lodreg {

// Exponential dispersion family under the canonical link:
// f(y) = exp{[y*w - b(w)]/a(phi) + c(y, phi)} with natural parameter w.
struct GlmFamily {
  enum class Kind { kGaussian, kBernoulli, kPoisson };
  Kind kind = Kind::kGaussian;

  static GlmFamily gaussian() { return {Kind::kGaussian}; }
  static GlmFamily bernoulli() { return {Kind::kBernoulli}; }
  static GlmFamily poisson() { return {Kind::kPoisson}; }

  double a(double phi) const;
  double b(double w) const;       // cumulant; +inf on overflow, never throws
  double b_dot(double w) const;   // mean function
  double b_ddot(double w) const;  // variance function
  double c(double y, double phi) const;
  bool has_free_dispersion() const { return kind == Kind::kGaussian; }
  std::string name() const;
};

GlmFamily family_from_name(const std::string& name);

struct GlmFit {
  Eigen::VectorXd theta;
  double phi = 1.0;
  Eigen::Index n_used = 0;
  bool converged = false;
  int iterations = 0;
};

// Canonical-link log density log f(y | t, x) with z = h(t).
double log_density(double y, double t, const Eigen::RowVectorXd& x,
                   const Eigen::VectorXd& theta, double phi,
                   const GlmFamily& family, const Transformation& tr = {});

// Score sum_i {y_i - bdot(D_i'theta)} D_i and Hessian -sum_i bddot * D D'
// over an explicit design matrix (no 1/a(phi) factor).
std::pair<Eigen::VectorXd, Eigen::MatrixXd> score_and_hessian(
    const Eigen::VectorXd& theta, const Eigen::VectorXd& y,
    const Eigen::MatrixXd& design, const GlmFamily& family);

// Damped Newton fit of the canonical GLM on an explicit design. For the
// gaussian family phi is the dof-corrected residual variance.
GlmFit fit_glm(const Eigen::VectorXd& y, const Eigen::MatrixXd& design,
               const GlmFamily& family);

// Complete-case analysis: GLM on the detected rows with design
// (1, x, h(v)). Throws EstimationError when too few detected rows remain.
GlmFit fit_complete_case(const ObservationSet& data, const GlmFamily& family,
                         const Transformation& t = {});

}  // namespace lodreg
