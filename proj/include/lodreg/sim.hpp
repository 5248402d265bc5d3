#pragma once

#include <array>
#include <cstdint>
#include <string>

#include <Eigen/Core>

#include "lodreg/data_model.hpp"
#include "lodreg/glm.hpp"

namespace lodreg {

// Built-in generative scenario for the Monte Carlo comparison:
//   X1 ~ Bernoulli(1/2), X2 = 1 + xi with xi ~ N(0,1) truncated at +-3,
//   T = a0 + a1 X1 + a2 X2 + e with the two-component normal mixture e,
//   Z = exp(-T), censored below the limit L = exp(-C),
//   g(E[Y]) = b0 + b1 X1 + b2 X2 + g Z (gaussian noise sd 1).
struct SimScenario {
  GlmFamily family = GlmFamily::gaussian();
  Eigen::Vector4d theta_true{-1.0, 0.5, -1.0, 2.0};
  double alpha0 = 0.0;
  double alpha1 = 0.25;
  double alpha2 = -0.25;
  double mix_weight = 0.5;    // probability of the first mixture component
  double mix_mean1 = 0.0;
  double mix_sd1 = 1.0 / 16.0;
  double mix_mean2 = 0.125;
  double mix_sd2 = 1.0 / 20.0;
  double x2_trunc = 3.0;
  double gaussian_sd = 1.0;
  Eigen::Index n = 400;
  double target_censoring = 0.30;
  int n_reps = 200;
  int n_boot = 100;
  std::uint64_t seed = 1;
};

struct CalibratedLimit {
  double c = 0.0;      // transformed detection limit
  double limit = 0.0;  // L = exp(-c)
};

// C such that P(T > C) = target_censoring, by Monte Carlo quantile.
CalibratedLimit calibrate_limit(const SimScenario& scenario,
                                std::uint64_t n_draws = 10'000'000);

// E(Z | Z < L) under the scenario law, by Monte Carlo.
double conditional_mean_oracle(const SimScenario& scenario, double c,
                               std::uint64_t n_draws = 10'000'000);

// One replicate dataset; z_latent carries the uncensored covariate for the
// full-data benchmark arm only.
struct GeneratedData {
  ObservationSet obs;
  Eigen::VectorXd z_latent;
};

GeneratedData generate_dataset(const SimScenario& scenario, double c,
                               std::uint64_t rep_index);

enum class Method {
  kFullData,
  kTwoStage,
  kCompleteCase,
  kSubLimit,
  kSubLimitSqrt2,
  kSubZero,
  kSubCondMean,
};

inline constexpr std::array<Method, 7> kAllMethods = {
    Method::kFullData,     Method::kTwoStage,      Method::kCompleteCase,
    Method::kSubLimit,     Method::kSubLimitSqrt2, Method::kSubZero,
    Method::kSubCondMean};

std::string method_name(Method m);

struct MethodSummary {
  Eigen::VectorXd bias;
  Eigen::VectorXd emp_var;
  int n_used = 0;
  int n_failed = 0;
};

struct MonteCarloReport {
  std::array<MethodSummary, 7> methods;  // indexed by Method order
  Eigen::VectorXd boot_var_mean;         // two-stage mean bootstrap variance
  Eigen::VectorXd coverage90, coverage95;
  int coverage_reps = 0;
  double c = 0.0, limit = 0.0, cond_mean = 0.0;
  int n_reps = 0, n_boot = 0;
  Eigen::Index n = 0;
  std::string family;
  std::uint64_t seed = 0;

  const MethodSummary& summary(Method m) const {
    return methods[static_cast<std::size_t>(m)];
  }
};

// Runs all seven estimators per replicate; bootstrap coverage for the
// two-stage arm when n_boot > 0. A pure function of (scenario, seed).
MonteCarloReport run_study(const SimScenario& scenario);

}  // namespace lodreg
