#pragma once

#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "lodreg/data_model.hpp"
#include "lodreg/gehan.hpp"
#include "lodreg/glm.hpp"
#include "lodreg/km.hpp"

namespace lodreg {

// Condition-9 floor for the censored-subject integral.
inline constexpr double kIntegralFloor = 1e-12;

// Stage-1 estimates consumed by the pseudo-likelihood. tau must cover the
// fitted support (>= the largest KM jump).
struct NuisanceBundle {
  double phi_hat = 1.0;
  Eigen::VectorXd alpha_hat;
  StepDistribution eta_hat;
  double tau = 0.0;
};

NuisanceBundle make_nuisance(double phi_hat, Eigen::VectorXd alpha_hat,
                             StepDistribution eta_hat, double tau);

struct PseudoFitResult {
  Eigen::VectorXd theta;
  bool converged = false;
  int iterations = 0;
  double score_norm = 0.0;
  int floored_subjects = 0;
};

// Per-subject integrand of the censored term: KM jumps in
// (c - x'alpha, tau] weighted by the conditional density, normalized to
// sum one. log_integral is log of the unnormalized sum (the Eq-(8)
// integrand), floored at log(kIntegralFloor).
struct CensoredWeights {
  std::vector<double> points;
  std::vector<double> weights;
  double log_integral = 0.0;
  bool floored = false;
};

CensoredWeights censored_weights(const Eigen::RowVectorXd& x_row, double y,
                                 const Eigen::VectorXd& theta,
                                 const NuisanceBundle& nuisance,
                                 const GlmFamily& family, double c);

// Log pseudo-likelihood (1/n) sum_i [ delta_i log f + (1-delta_i) log S_i ].
double pseudo_loglik(const Eigen::VectorXd& theta, const ObservationSet& data,
                     const NuisanceBundle& nuisance, const GlmFamily& family,
                     int* floored_subjects = nullptr);

// Estimating function Psi(theta): detected rows contribute the GLM score
// term {y - bdot(D'theta)} D, censored rows the weighted average of the
// same expression over the KM jumps. No 1/a(phi) factor anywhere; Psi is
// a(phi) times the gradient of pseudo_loglik, so the roots coincide.
Eigen::VectorXd pseudo_score(const Eigen::VectorXd& theta,
                             const ObservationSet& data,
                             const NuisanceBundle& nuisance,
                             const GlmFamily& family,
                             int* floored_subjects = nullptr);

// Analytic Jacobian of pseudo_score; negative definite near the optimum.
std::pair<Eigen::VectorXd, Eigen::MatrixXd> pseudo_score_jacobian(
    const Eigen::VectorXd& theta, const ObservationSet& data,
    const NuisanceBundle& nuisance, const GlmFamily& family,
    int* floored_subjects = nullptr);

// Damped Newton on pseudo_score from the complete-case estimate.
PseudoFitResult solve_pseudo(const ObservationSet& data,
                             const NuisanceBundle& nuisance,
                             const GlmFamily& family,
                             const Eigen::VectorXd& init);

struct TwoStageOptions {
  std::optional<double> tau_override;
};

struct TwoStageFit {
  GlmFit complete_case;
  AftFit aft;
  NuisanceBundle nuisance;
  PseudoFitResult pseudo;
};

// Full two-stage pipeline: complete-case GLM (phi and the Newton start),
// Gehan AFT fit, residual Kaplan-Meier, then the pseudo-likelihood solve.
TwoStageFit fit_two_stage(const ObservationSet& data, const GlmFamily& family,
                          const TwoStageOptions& opts = {});

}  // namespace lodreg
