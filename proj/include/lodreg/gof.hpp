#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "lodreg/gehan.hpp"

namespace lodreg {

// Cumulative-sum-of-martingale-residuals score process over one covariate,
// with normal-multiplier resampling for the null distribution.
struct ScoreProcess {
  int covariate_index = -1;
  std::vector<double> eval_points;   // sorted unique covariate values
  Eigen::VectorXd observed_path;
  Eigen::MatrixXd simulated_paths;   // n_sim x len
  double p_value = 1.0;
};

// Martingale residuals delta_i - Lambda(e_i) with Lambda the Nelson-Aalen
// cumulative hazard of the residuals; they sum to zero by construction.
// With weights, both the event counts and the risk sets are weighted (the
// wild-bootstrap analogue) and the weighted residual sum is zero.
Eigen::VectorXd martingale_residuals(const AftFit& fit,
                                     const Eigen::VectorXd* weights = nullptr);

// Observed process W(x) = n^{-1/2} sum_i 1(cov_i <= x) M_i. The null
// replicates are wild-bootstrap draws: Exp(1) subject weights perturb the
// whole estimating system (weighted Gehan refit, weighted Nelson-Aalen),
// and the replicate path is the perturbed weighted process minus the
// observed one. Naive multipliers on M_i alone ignore the refit and give a
// severely conservative test. Weights attach in a canonical
// (covariate, residual)-sorted order so the p-value does not depend on row
// order.
ScoreProcess score_process(const ObservationSet& data, const AftFit& fit,
                           int covariate_index, int n_sim, std::uint64_t seed);
// Same construction when the tested covariate is not among the AFT
// regressors (power against an omitted variable).
ScoreProcess score_process(const ObservationSet& data, const AftFit& fit,
                           const Eigen::VectorXd& covariate, int n_sim,
                           std::uint64_t seed);

// Tidy plot table: x, observed, first n_paths simulated paths.
struct PlotTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> columns;
};

PlotTable export_gof_plot_data(const ScoreProcess& process, int n_paths);

}  // namespace lodreg
