#include "lodreg/glm.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include <Eigen/Dense>

#include "lodreg/errors.hpp"

namespace lodreg {

namespace {
constexpr double kScoreTol = 1e-8;
constexpr int kMaxIter = 100;
constexpr int kMaxHalvings = 30;
}  // namespace

double GlmFamily::a(double phi) const {
  return kind == Kind::kGaussian ? phi : 1.0;
}

double GlmFamily::b(double w) const {
  switch (kind) {
    case Kind::kGaussian:
      return 0.5 * w * w;
    case Kind::kBernoulli:
      // log(1 + e^w), stable across the full double range
      return w > 0.0 ? w + std::log1p(std::exp(-w)) : std::log1p(std::exp(w));
    case Kind::kPoisson:
      return w > 709.0 ? std::numeric_limits<double>::infinity() : std::exp(w);
  }
  return 0.0;
}

double GlmFamily::b_dot(double w) const {
  switch (kind) {
    case Kind::kGaussian:
      return w;
    case Kind::kBernoulli:
      return w > 0.0 ? 1.0 / (1.0 + std::exp(-w))
                     : std::exp(w) / (1.0 + std::exp(w));
    case Kind::kPoisson:
      return w > 709.0 ? std::numeric_limits<double>::infinity() : std::exp(w);
  }
  return 0.0;
}

double GlmFamily::b_ddot(double w) const {
  switch (kind) {
    case Kind::kGaussian:
      return 1.0;
    case Kind::kBernoulli: {
      const double mu = b_dot(w);
      return mu * (1.0 - mu);
    }
    case Kind::kPoisson:
      return b_dot(w);
  }
  return 0.0;
}

double GlmFamily::c(double y, double phi) const {
  switch (kind) {
    case Kind::kGaussian:
      return -0.5 * y * y / phi - 0.5 * std::log(2.0 * std::numbers::pi * phi);
    case Kind::kBernoulli:
      return 0.0;
    case Kind::kPoisson:
      return -std::lgamma(y + 1.0);
  }
  return 0.0;
}

std::string GlmFamily::name() const {
  switch (kind) {
    case Kind::kGaussian:
      return "gaussian";
    case Kind::kBernoulli:
      return "bernoulli";
    case Kind::kPoisson:
      return "poisson";
  }
  return "";
}

GlmFamily family_from_name(const std::string& name) {
  if (name == "gaussian") return GlmFamily::gaussian();
  if (name == "bernoulli") return GlmFamily::bernoulli();
  if (name == "poisson") return GlmFamily::poisson();
  throw ConfigError("unknown family '" + name +
                    "' (expected gaussian|bernoulli|poisson)");
}

double log_density(double y, double t, const Eigen::RowVectorXd& x,
                   const Eigen::VectorXd& theta, double phi,
                   const GlmFamily& family, const Transformation& tr) {
  if (theta.size() != x.size() + 2)
    throw ConfigError("log_density: theta dimension mismatch");
  const double w = design_vector(x, tr.forward(t)).dot(theta);
  if (!std::isfinite(w)) throw NumericError("log_density: non-finite w");
  return (y * w - family.b(w)) / family.a(phi) + family.c(y, phi);
}

std::pair<Eigen::VectorXd, Eigen::MatrixXd> score_and_hessian(
    const Eigen::VectorXd& theta, const Eigen::VectorXd& y,
    const Eigen::MatrixXd& design, const GlmFamily& family) {
  const Eigen::Index k = design.cols();
  Eigen::VectorXd score = Eigen::VectorXd::Zero(k);
  Eigen::MatrixXd hess = Eigen::MatrixXd::Zero(k, k);
  for (Eigen::Index i = 0; i < design.rows(); ++i) {
    const double w = design.row(i).dot(theta);
    const double mu = family.b_dot(w);
    score.noalias() += (y[i] - mu) * design.row(i).transpose();
    hess.noalias() -=
        family.b_ddot(w) * design.row(i).transpose() * design.row(i);
  }
  return {std::move(score), std::move(hess)};
}

namespace {

// theta-dependent part of the log likelihood; -inf signals an overflowed
// trial step to the damping loop
double objective(const Eigen::VectorXd& theta, const Eigen::VectorXd& y,
                 const Eigen::MatrixXd& design, const GlmFamily& family) {
  double obj = 0.0;
  for (Eigen::Index i = 0; i < design.rows(); ++i) {
    const double w = design.row(i).dot(theta);
    obj += y[i] * w - family.b(w);
  }
  return std::isfinite(obj) ? obj
                            : -std::numeric_limits<double>::infinity();
}

}  // namespace

GlmFit fit_glm(const Eigen::VectorXd& y, const Eigen::MatrixXd& design,
               const GlmFamily& family) {
  const Eigen::Index n = design.rows();
  const Eigen::Index k = design.cols();
  if (n < k) throw EstimationError("glm: fewer rows than parameters");

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  if (qr.rank() < k)
    throw SingularityError("glm: design is rank deficient (rank " +
                           std::to_string(qr.rank()) + " < " +
                           std::to_string(k) + ")");

  Eigen::VectorXd theta = Eigen::VectorXd::Zero(k);
  double obj = objective(theta, y, design, family);
  int iter = 0;
  bool converged = false;
  for (; iter < kMaxIter; ++iter) {
    auto [score, hess] = score_and_hessian(theta, y, design, family);
    if (score.lpNorm<Eigen::Infinity>() <= kScoreTol) {
      converged = true;
      break;
    }
    Eigen::LDLT<Eigen::MatrixXd> ldlt(-hess);
    if (ldlt.info() != Eigen::Success)
      throw SingularityError("glm: Hessian factorization failed");
    Eigen::VectorXd step = ldlt.solve(score);
    // non-decrease up to rounding, so full Newton steps are accepted at the
    // objective's noise floor and convergence stays quadratic
    const double floor = obj - 1e-12 * (1.0 + std::abs(obj));
    double scale = 1.0;
    Eigen::VectorXd trial;
    double trial_obj = -std::numeric_limits<double>::infinity();
    for (int h = 0; h < kMaxHalvings; ++h) {
      trial = theta + scale * step;
      trial_obj = objective(trial, y, design, family);
      if (trial_obj >= floor) break;
      scale *= 0.5;
    }
    if (trial_obj < floor)
      throw ConvergenceError("glm: step halving failed to improve", theta);
    theta = trial;
    obj = std::max(obj, trial_obj);
  }
  if (!converged) throw ConvergenceError("glm: Newton did not converge", theta);

  GlmFit fit;
  fit.theta = theta;
  fit.n_used = n;
  fit.converged = true;
  fit.iterations = iter;
  if (family.has_free_dispersion()) {
    const Eigen::VectorXd resid = y - design * theta;
    const Eigen::Index dof = n - k;
    if (dof <= 0) throw EstimationError("glm: no degrees of freedom for phi");
    fit.phi = resid.squaredNorm() / static_cast<double>(dof);
  }
  return fit;
}

GlmFit fit_complete_case(const ObservationSet& data, const GlmFamily& family,
                         const Transformation& t) {
  const Eigen::Index n1 = data.n_detected();
  if (n1 < data.p() + 3)
    throw EstimationError("complete case: need at least p + 3 detected rows");
  Eigen::VectorXd y(n1), z(n1);
  Eigen::MatrixXd x(n1, data.p());
  Eigen::Index r = 0;
  for (Eigen::Index i = 0; i < data.n(); ++i) {
    if (!data.delta[static_cast<std::size_t>(i)]) continue;
    y[r] = data.y[i];
    x.row(r) = data.x.row(i);
    z[r] = t.forward(data.v[i]);
    ++r;
  }
  return fit_glm(y, build_design(x, z), family);
}

}  // namespace lodreg
