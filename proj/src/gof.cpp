#include "lodreg/gof.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "lodreg/errors.hpp"
#include "lodreg/parallel.hpp"
#include "lodreg/rng.hpp"

namespace lodreg {

namespace {
constexpr std::uint64_t kGofStreamTag = 0x676F66ULL << 32;  // "gof"
}

Eigen::VectorXd martingale_residuals(const AftFit& fit,
                                     const Eigen::VectorXd* weights) {
  const Eigen::Index n = fit.residuals.size();
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    return fit.residuals[a] < fit.residuals[b] ||
           (fit.residuals[a] == fit.residuals[b] && a < b);
  });

  // Lambda(e_(k)) via one sweep: each detected residual adds
  // w_k / (weighted count of e_j >= e_k) for its whole tie group
  std::vector<double> w_at_risk(static_cast<std::size_t>(n) + 1, 0.0);
  for (Eigen::Index k = n - 1; k >= 0; --k) {
    const int i = order[static_cast<std::size_t>(k)];
    w_at_risk[static_cast<std::size_t>(k)] =
        w_at_risk[static_cast<std::size_t>(k) + 1] +
        (weights ? (*weights)[i] : 1.0);
  }

  Eigen::VectorXd m(n);
  double hazard = 0.0;
  std::size_t i = 0;
  const auto sz = static_cast<std::size_t>(n);
  while (i < sz) {
    const double value = fit.residuals[order[i]];
    std::size_t j = i;
    double w_events = 0.0;
    while (j < sz && fit.residuals[order[j]] == value) {
      const int idx = order[j];
      if (fit.delta[static_cast<std::size_t>(idx)])
        w_events += weights ? (*weights)[idx] : 1.0;
      ++j;
    }
    hazard += w_events / w_at_risk[i];
    for (std::size_t k = i; k < j; ++k) {
      const int idx = order[k];
      m[idx] = static_cast<double>(
                   fit.delta[static_cast<std::size_t>(idx)]) -
               hazard;
    }
    i = j;
  }
  return m;
}

namespace {

ScoreProcess score_process_impl(const ObservationSet& data, const AftFit& fit,
                                const Eigen::VectorXd& covariate, int n_sim,
                                std::uint64_t seed) {
  const Eigen::Index n = covariate.size();
  if (fit.residuals.size() != n)
    throw ConfigError("score_process: length mismatch");
  if (n_sim < 1) throw ConfigError("score_process: n_sim must be positive");
  if ((covariate.array() == covariate[0]).all())
    throw DataError("score_process: constant covariate column");

  const Eigen::VectorXd mhat = martingale_residuals(fit);

  // canonical order: covariate, then residual value, so the process and the
  // weight assignment are invariant to permuting input rows
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (covariate[a] != covariate[b]) return covariate[a] < covariate[b];
    return fit.residuals[a] < fit.residuals[b];
  });

  ScoreProcess sp;
  std::vector<std::size_t> group_end;  // one past each unique covariate value
  {
    std::size_t i = 0;
    const auto sz = static_cast<std::size_t>(n);
    while (i < sz) {
      const double value = covariate[order[i]];
      std::size_t j = i;
      while (j < sz && covariate[order[j]] == value) ++j;
      sp.eval_points.push_back(value);
      group_end.push_back(j);
      i = j;
    }
  }
  const std::size_t len = sp.eval_points.size();
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));

  // path of per-subject terms in canonical order; both the observed path
  // (weighted residual sum zero) and the replicates are tied down at the
  // right edge
  auto build_path = [&](const Eigen::VectorXd& terms) {
    Eigen::VectorXd path(static_cast<Eigen::Index>(len));
    double cum = 0.0;
    std::size_t pos = 0;
    for (std::size_t g = 0; g < len; ++g) {
      for (; pos < group_end[g]; ++pos) cum += terms[order[pos]];
      path[static_cast<Eigen::Index>(g)] = scale * cum;
    }
    return path;
  };

  sp.observed_path = build_path(mhat);

  sp.simulated_paths.resize(n_sim, static_cast<Eigen::Index>(len));
  par::parallel_for(n_sim, [&](std::ptrdiff_t s) {
    RngStream rng(seed, kGofStreamTag | static_cast<std::uint64_t>(s));
    // Exp(1) weights drawn in canonical order
    Eigen::VectorXd w(n);
    for (Eigen::Index k = 0; k < n; ++k)
      w[order[static_cast<std::size_t>(k)]] =
          -std::log(1.0 - rng.next_double());
    Eigen::VectorXd path;
    try {
      const AftFit refit = fit_gehan(data, fit.alpha, &w);
      const Eigen::VectorXd m_w = martingale_residuals(refit, &w);
      path = build_path((w.array() * m_w.array()).matrix()) -
             sp.observed_path;
    } catch (const Error&) {
      // a failed perturbed refit contributes a flat path; counted against
      // rejection, never in its favor
      path = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(len), 1e6);
    }
    sp.simulated_paths.row(s) = path.transpose();
  });

  const double obs_sup = sp.observed_path.cwiseAbs().maxCoeff();
  int n_ge = 0;
  for (int s = 0; s < n_sim; ++s)
    if (sp.simulated_paths.row(s).cwiseAbs().maxCoeff() >= obs_sup) ++n_ge;
  sp.p_value = (1.0 + n_ge) / (1.0 + n_sim);
  return sp;
}

}  // namespace

ScoreProcess score_process(const ObservationSet& data, const AftFit& fit,
                           const Eigen::VectorXd& covariate, int n_sim,
                           std::uint64_t seed) {
  return score_process_impl(data, fit, covariate, n_sim, seed);
}

ScoreProcess score_process(const ObservationSet& data, const AftFit& fit,
                           int covariate_index, int n_sim,
                           std::uint64_t seed) {
  if (covariate_index < 0 || covariate_index >= data.p())
    throw ConfigError("score_process: covariate index out of range");
  ScoreProcess sp = score_process_impl(data, fit, data.x.col(covariate_index),
                                       n_sim, seed);
  sp.covariate_index = covariate_index;
  return sp;
}

PlotTable export_gof_plot_data(const ScoreProcess& process, int n_paths) {
  if (n_paths < 0 || n_paths > process.simulated_paths.rows())
    throw ConfigError("export_gof_plot_data: n_paths out of range");
  PlotTable t;
  t.header.push_back("x");
  t.header.push_back("observed");
  t.columns.push_back(process.eval_points);
  const std::size_t len = process.eval_points.size();
  std::vector<double> obs(len);
  for (std::size_t i = 0; i < len; ++i)
    obs[i] = process.observed_path[static_cast<Eigen::Index>(i)];
  t.columns.push_back(std::move(obs));
  for (int s = 0; s < n_paths; ++s) {
    t.header.push_back("sim_" + std::to_string(s + 1));
    std::vector<double> col(len);
    for (std::size_t i = 0; i < len; ++i)
      col[i] = process.simulated_paths(s, static_cast<Eigen::Index>(i));
    t.columns.push_back(std::move(col));
  }
  return t;
}

}  // namespace lodreg
