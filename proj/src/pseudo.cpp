#include "lodreg/pseudo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Dense>

#include "lodreg/errors.hpp"
#include "lodreg/parallel.hpp"

namespace lodreg {

namespace {

constexpr double kScoreTol = 1e-8;
constexpr int kMaxIter = 200;
constexpr int kMaxHalvings = 30;

const double kLogFloor = std::log(kIntegralFloor);

// Immutable per-solve state: detected designs and, for censored subjects,
// the jump range and the factorization z_ik = exp(-t_k) * exp(-x_i'alpha).
struct Context {
  const ObservationSet* data = nullptr;
  const NuisanceBundle* nuisance = nullptr;
  GlmFamily family;
  Transformation tr;

  std::vector<double> z_det;        // h(v_i) for detected rows
  std::vector<double> exp_neg_jump; // exp(-t_k) per KM jump
  std::vector<double> log_mass;     // log m_k per KM jump
  std::vector<double> zfac;         // exp(-x_i'alpha), censored rows only
  std::vector<std::size_t> jump_lo, jump_hi;  // per-row jump range
  std::vector<double> c_term;       // c(y_i, phi)

  Context(const ObservationSet& d, const NuisanceBundle& nu,
          const GlmFamily& fam)
      : data(&d), nuisance(&nu), family(fam) {
    const Eigen::Index n = d.n();
    z_det.assign(static_cast<std::size_t>(n), 0.0);
    zfac.assign(static_cast<std::size_t>(n), 0.0);
    jump_lo.assign(static_cast<std::size_t>(n), 0);
    jump_hi.assign(static_cast<std::size_t>(n), 0);
    c_term.assign(static_cast<std::size_t>(n), 0.0);
    const auto& eta = nu.eta_hat;
    exp_neg_jump.resize(eta.size());
    log_mass.resize(eta.size());
    for (std::size_t k = 0; k < eta.size(); ++k) {
      exp_neg_jump[k] = std::exp(-eta.jump_points[k]);
      log_mass[k] = std::log(eta.masses[k]);
    }
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto ui = static_cast<std::size_t>(i);
      c_term[ui] = family.c(d.y[i], nu.phi_hat);
      if (d.delta[ui]) {
        z_det[ui] = tr.forward(d.v[i]);
      } else {
        const double xa = d.x.row(i).dot(nu.alpha_hat);
        zfac[ui] = std::exp(-xa);
        const double lower = d.c - xa;
        if (lower < nu.tau) {
          const JumpRange r = restricted_jumps(eta, lower, nu.tau);
          jump_lo[ui] = r.begin;
          jump_hi[ui] = r.end;
        }
      }
    }
  }
};

struct Partial {
  Eigen::VectorXd score;
  Eigen::MatrixXd jac;
  double loglik = 0.0;
  long floored = 0;
};

enum class Want { kScore, kScoreJac, kLoglik };

// One pass over subjects [lo, hi). Censored weights are evaluated in log
// space (shift by the max exponent), so extreme theta only floors the
// integral instead of overflowing.
Partial subject_pass(const Context& ctx, const Eigen::VectorXd& theta,
                     std::ptrdiff_t lo, std::ptrdiff_t hi, Want want) {
  const auto& d = *ctx.data;
  const auto& fam = ctx.family;
  const double a_phi = fam.a(ctx.nuisance->phi_hat);
  const Eigen::Index p = d.p();
  const Eigen::Index dim = p + 2;
  const double gamma = theta[dim - 1];

  Partial out;
  out.score = Eigen::VectorXd::Zero(dim);
  if (want == Want::kScoreJac) out.jac = Eigen::MatrixXd::Zero(dim, dim);

  Eigen::VectorXd di(dim);
  di[0] = 1.0;
  Eigen::VectorXd psi(dim);
  std::vector<double> lk, zk, rk, bddk;

  for (std::ptrdiff_t ii = lo; ii < hi; ++ii) {
    const Eigen::Index i = static_cast<Eigen::Index>(ii);
    const auto ui = static_cast<std::size_t>(i);
    const double y = d.y[i];
    di.segment(1, p) = d.x.row(i).transpose();
    const double base = theta.head(dim - 1).dot(di.head(dim - 1));

    if (d.delta[ui]) {
      const double z = ctx.z_det[ui];
      const double w = base + gamma * z;
      di[dim - 1] = z;
      if (want == Want::kLoglik) {
        out.loglik += (y * w - fam.b(w)) / a_phi + ctx.c_term[ui];
      } else {
        const double r = y - fam.b_dot(w);
        out.score.noalias() += r * di;
        if (want == Want::kScoreJac)
          out.jac.noalias() -= fam.b_ddot(w) * di * di.transpose();
      }
      continue;
    }

    const std::size_t klo = ctx.jump_lo[ui];
    const std::size_t khi = ctx.jump_hi[ui];
    if (khi == klo) {
      ++out.floored;
      if (want == Want::kLoglik) out.loglik += kLogFloor;
      continue;
    }
    const std::size_t m = khi - klo;
    lk.resize(m);
    zk.resize(m);
    double lmax = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < m; ++k) {
      const double z = ctx.exp_neg_jump[klo + k] * ctx.zfac[ui];
      const double w = base + gamma * z;
      zk[k] = z;
      lk[k] = (y * w - fam.b(w)) / a_phi + ctx.log_mass[klo + k];
      if (lk[k] > lmax) lmax = lk[k];
    }
    double sumexp = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
      lk[k] = std::exp(lk[k] - lmax);  // now unnormalized weights
      sumexp += lk[k];
    }
    double log_s = lmax + std::log(sumexp) + ctx.c_term[ui];
    if (!(log_s >= kLogFloor)) {
      log_s = kLogFloor;
      ++out.floored;
    }
    if (want == Want::kLoglik) {
      out.loglik += log_s;
      continue;
    }

    rk.resize(m);
    if (want == Want::kScoreJac) bddk.resize(m);
    psi.setZero();
    double sum_wr = 0.0, sum_wrz = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
      const double wgt = lk[k] / sumexp;
      const double w = base + gamma * zk[k];
      const double r = y - fam.b_dot(w);
      rk[k] = r;
      if (want == Want::kScoreJac) bddk[k] = fam.b_ddot(w);
      sum_wr += wgt * r;
      sum_wrz += wgt * r * zk[k];
    }
    psi.head(dim - 1) = sum_wr * di.head(dim - 1);
    psi[dim - 1] = sum_wrz;
    out.score += psi;

    if (want == Want::kScoreJac) {
      // sum_k w_k (r_k^2/a - bdd_k) D_k D_k' - psi psi' / a with
      // D_k = (d_base, z_k): accumulate the scalar moments in z.
      double s0 = 0.0, s1 = 0.0, s2 = 0.0;
      for (std::size_t k = 0; k < m; ++k) {
        const double wgt = lk[k] / sumexp;
        const double g = rk[k] * rk[k] / a_phi - bddk[k];
        s0 += wgt * g;
        s1 += wgt * g * zk[k];
        s2 += wgt * g * zk[k] * zk[k];
      }
      auto head = di.head(dim - 1);
      out.jac.topLeftCorner(dim - 1, dim - 1).noalias() +=
          s0 * head * head.transpose();
      out.jac.topRightCorner(dim - 1, 1).noalias() += s1 * head;
      out.jac.bottomLeftCorner(1, dim - 1).noalias() +=
          s1 * head.transpose();
      out.jac(dim - 1, dim - 1) += s2;
      out.jac.noalias() -= psi * psi.transpose() / a_phi;
    }
  }
  return out;
}

Partial evaluate(const Context& ctx, const Eigen::VectorXd& theta,
                 Want want) {
  const Eigen::Index n = ctx.data->n();
  const Eigen::Index dim = ctx.data->p() + 2;
  Partial total;
  total.score = Eigen::VectorXd::Zero(dim);
  if (want == Want::kScoreJac) total.jac = Eigen::MatrixXd::Zero(dim, dim);
  par::chunked_reduce<Partial>(
      n, total,
      [&](std::ptrdiff_t lo, std::ptrdiff_t hi) {
        return subject_pass(ctx, theta, lo, hi, want);
      },
      [want](Partial& acc, const Partial& part) {
        acc.score += part.score;
        if (want == Want::kScoreJac) acc.jac += part.jac;
        acc.loglik += part.loglik;
        acc.floored += part.floored;
      });
  const double inv_n = 1.0 / static_cast<double>(n);
  total.score *= inv_n;
  if (want == Want::kScoreJac) total.jac *= inv_n;
  total.loglik *= inv_n;
  return total;
}

void check_theta(const Eigen::VectorXd& theta, const ObservationSet& data) {
  if (theta.size() != data.p() + 2)
    throw ConfigError("pseudo: theta dimension mismatch");
}

}  // namespace

NuisanceBundle make_nuisance(double phi_hat, Eigen::VectorXd alpha_hat,
                             StepDistribution eta_hat, double tau) {
  if (!(phi_hat > 0.0)) throw NumericError("nuisance: phi must be positive");
  if (!eta_hat.jump_points.empty() &&
      tau < eta_hat.jump_points.back() - 1e-12)
    throw ConfigError("nuisance: tau must cover the fitted support (max "
                      "jump " +
                      std::to_string(eta_hat.jump_points.back()) + ")");
  return NuisanceBundle{phi_hat, std::move(alpha_hat), std::move(eta_hat),
                        tau};
}

CensoredWeights censored_weights(const Eigen::RowVectorXd& x_row, double y,
                                 const Eigen::VectorXd& theta,
                                 const NuisanceBundle& nuisance,
                                 const GlmFamily& family, double c) {
  const Eigen::Index p = x_row.size();
  if (theta.size() != p + 2)
    throw ConfigError("censored_weights: theta dimension mismatch");
  const double xa = x_row.dot(nuisance.alpha_hat);
  const double lower = c - xa;
  CensoredWeights out;
  if (lower >= nuisance.tau) {
    out.log_integral = kLogFloor;
    out.floored = true;
    return out;
  }
  const JumpRange r = restricted_jumps(nuisance.eta_hat, lower, nuisance.tau);
  if (r.count() == 0) {
    out.log_integral = kLogFloor;
    out.floored = true;
    return out;
  }
  const double a_phi = family.a(nuisance.phi_hat);
  const double base = theta[0] + x_row.dot(theta.segment(1, p));
  const double gamma = theta[p + 1];
  std::vector<double> lk(r.count());
  double lmax = -std::numeric_limits<double>::infinity();
  out.points.resize(r.count());
  for (std::size_t k = 0; k < r.count(); ++k) {
    out.points[k] = r.point(k);
    const double z = std::exp(-(r.point(k) + xa));
    const double w = base + gamma * z;
    lk[k] = (y * w - family.b(w)) / a_phi + std::log(r.mass(k));
    lmax = std::max(lmax, lk[k]);
  }
  double sumexp = 0.0;
  out.weights.resize(r.count());
  for (std::size_t k = 0; k < r.count(); ++k) {
    out.weights[k] = std::exp(lk[k] - lmax);
    sumexp += out.weights[k];
  }
  for (auto& w : out.weights) w /= sumexp;
  out.log_integral =
      lmax + std::log(sumexp) + family.c(y, nuisance.phi_hat);
  if (!(out.log_integral >= kLogFloor)) {
    out.log_integral = kLogFloor;
    out.floored = true;
  }
  return out;
}

double pseudo_loglik(const Eigen::VectorXd& theta, const ObservationSet& data,
                     const NuisanceBundle& nuisance, const GlmFamily& family,
                     int* floored_subjects) {
  check_theta(theta, data);
  Context ctx(data, nuisance, family);
  const Partial r = evaluate(ctx, theta, Want::kLoglik);
  if (floored_subjects) *floored_subjects = static_cast<int>(r.floored);
  return r.loglik;
}

Eigen::VectorXd pseudo_score(const Eigen::VectorXd& theta,
                             const ObservationSet& data,
                             const NuisanceBundle& nuisance,
                             const GlmFamily& family, int* floored_subjects) {
  check_theta(theta, data);
  Context ctx(data, nuisance, family);
  const Partial r = evaluate(ctx, theta, Want::kScore);
  if (floored_subjects) *floored_subjects = static_cast<int>(r.floored);
  return r.score;
}

std::pair<Eigen::VectorXd, Eigen::MatrixXd> pseudo_score_jacobian(
    const Eigen::VectorXd& theta, const ObservationSet& data,
    const NuisanceBundle& nuisance, const GlmFamily& family,
    int* floored_subjects) {
  check_theta(theta, data);
  Context ctx(data, nuisance, family);
  Partial r = evaluate(ctx, theta, Want::kScoreJac);
  if (floored_subjects) *floored_subjects = static_cast<int>(r.floored);
  return {std::move(r.score), std::move(r.jac)};
}

PseudoFitResult solve_pseudo(const ObservationSet& data,
                             const NuisanceBundle& nuisance,
                             const GlmFamily& family,
                             const Eigen::VectorXd& init) {
  check_theta(init, data);
  Context ctx(data, nuisance, family);

  Eigen::VectorXd theta = init;
  Partial cur = evaluate(ctx, theta, Want::kScoreJac);
  double norm = cur.score.lpNorm<Eigen::Infinity>();
  if (!std::isfinite(norm))
    throw NumericError("pseudo: non-finite score at the initial value");

  PseudoFitResult res;
  int iter = 0;
  for (; iter < kMaxIter; ++iter) {
    if (norm <= kScoreTol) {
      res.converged = true;
      break;
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(cur.jac);
    if (!lu.isInvertible()) {
      Eigen::JacobiSVD<Eigen::MatrixXd> svd(cur.jac);
      const auto& sv = svd.singularValues();
      throw SingularityError(
          "pseudo: singular Jacobian, condition number " +
          std::to_string(sv(0) / std::max(sv(sv.size() - 1), 1e-300)));
    }
    const Eigen::VectorXd step = lu.solve(-cur.score);
    double scale = 1.0;
    bool accepted = false;
    for (int h = 0; h < kMaxHalvings; ++h) {
      const Eigen::VectorXd trial = theta + scale * step;
      const Partial t = evaluate(ctx, trial, Want::kScore);
      const double tnorm = t.score.lpNorm<Eigen::Infinity>();
      if (std::isfinite(tnorm) && tnorm < norm) {
        theta = trial;
        accepted = true;
        break;
      }
      scale *= 0.5;
    }
    if (!accepted)
      throw ConvergenceError("pseudo: step halving stalled at score norm " +
                                 std::to_string(norm),
                             theta);
    cur = evaluate(ctx, theta, Want::kScoreJac);
    norm = cur.score.lpNorm<Eigen::Infinity>();
  }
  if (!res.converged)
    throw ConvergenceError("pseudo: Newton did not converge, score norm " +
                               std::to_string(norm),
                           theta);
  res.theta = theta;
  res.iterations = iter;
  res.score_norm = norm;
  res.floored_subjects = static_cast<int>(cur.floored);
  return res;
}

TwoStageFit fit_two_stage(const ObservationSet& data, const GlmFamily& family,
                          const TwoStageOptions& opts) {
  TwoStageFit fit;
  fit.complete_case = fit_complete_case(data, family);
  fit.aft = fit_gehan(data);
  fit.nuisance.eta_hat = km_fit(fit.aft.residuals, data.delta);

  const double max_resid = fit.aft.residuals.maxCoeff();
  double tau = max_resid;
  if (opts.tau_override) {
    tau = *opts.tau_override;
    // residuals at or beyond tau must exist in the sample
    if (tau > max_resid + 1e-12)
      throw ConfigError("tau exceeds the largest observed residual " +
                        std::to_string(max_resid));
  }
  fit.nuisance = make_nuisance(fit.complete_case.phi, fit.aft.alpha,
                               std::move(fit.nuisance.eta_hat), tau);
  fit.pseudo =
      solve_pseudo(data, fit.nuisance, family, fit.complete_case.theta);
  return fit;
}

}  // namespace lodreg
