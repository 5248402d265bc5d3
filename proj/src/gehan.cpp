#include "lodreg/gehan.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include <Eigen/Dense>

#include "lodreg/errors.hpp"
#include "lodreg/parallel.hpp"

namespace lodreg {

namespace {

constexpr double kRoundTol = 1e-10;
constexpr int kMaxRounds = 500;

// Sort order of e with ties broken by index, shared by all evaluators so
// repeated runs see one deterministic ordering.
void sort_order(const Eigen::VectorXd& e, std::vector<int>& order) {
  order.resize(static_cast<std::size_t>(e.size()));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    return e[a] < e[b] || (e[a] == e[b] && a < b);
  });
}

// Shared O(n log n) pass over sorted residuals. For every row q at sorted
// position k, tie_hi[k] = one past its tie group (first strictly larger
// value) and tie_lo[k] = first index of its tie group (count >= e_q is
// n - tie_lo).
struct SortedResiduals {
  std::vector<int> order;
  std::vector<int> tie_lo, tie_hi;

  void build(const Eigen::VectorXd& e) {
    sort_order(e, order);
    const int n = static_cast<int>(order.size());
    tie_lo.assign(static_cast<std::size_t>(n), 0);
    tie_hi.assign(static_cast<std::size_t>(n), 0);
    int i = 0;
    while (i < n) {
      int j = i;
      while (j < n && e[order[static_cast<std::size_t>(j)]] ==
                          e[order[static_cast<std::size_t>(i)]])
        ++j;
      for (int k = i; k < j; ++k) {
        tie_lo[static_cast<std::size_t>(k)] = i;
        tie_hi[static_cast<std::size_t>(k)] = j;
      }
      i = j;
    }
  }
};

}  // namespace

double gehan_objective(const Eigen::VectorXd& alpha, const Eigen::VectorXd& v,
                       const Eigen::MatrixXd& x,
                       const std::vector<std::uint8_t>& delta,
                       const Eigen::VectorXd* weights) {
  const Eigen::Index n = v.size();
  const Eigen::VectorXd e = v - x * alpha;
  SortedResiduals sr;
  sr.build(e);
  // weighted suffix sums of sorted residual values and of the weights
  std::vector<double> we_suffix(static_cast<std::size_t>(n) + 1, 0.0);
  std::vector<double> w_suffix(static_cast<std::size_t>(n) + 1, 0.0);
  for (Eigen::Index k = n - 1; k >= 0; --k) {
    const int i = sr.order[static_cast<std::size_t>(k)];
    const double w = weights ? (*weights)[i] : 1.0;
    we_suffix[static_cast<std::size_t>(k)] =
        we_suffix[static_cast<std::size_t>(k) + 1] + w * e[i];
    w_suffix[static_cast<std::size_t>(k)] =
        w_suffix[static_cast<std::size_t>(k) + 1] + w;
  }

  double total = 0.0;
  par::chunked_reduce<double>(
      n, total,
      [&](std::ptrdiff_t lo, std::ptrdiff_t hi) {
        double part = 0.0;
        for (std::ptrdiff_t k = lo; k < hi; ++k) {
          const int i = sr.order[static_cast<std::size_t>(k)];
          if (!delta[static_cast<std::size_t>(i)]) continue;
          const int above = sr.tie_hi[static_cast<std::size_t>(k)];
          const double wi = weights ? (*weights)[i] : 1.0;
          part += wi * (we_suffix[static_cast<std::size_t>(above)] -
                        e[i] * w_suffix[static_cast<std::size_t>(above)]);
        }
        return part;
      },
      [](double& acc, double part) { acc += part; });
  return total / (static_cast<double>(n) * static_cast<double>(n));
}

Eigen::VectorXd gehan_subgradient(const Eigen::VectorXd& alpha,
                                  const Eigen::VectorXd& v,
                                  const Eigen::MatrixXd& x,
                                  const std::vector<std::uint8_t>& delta,
                                  const Eigen::VectorXd* weights) {
  const Eigen::Index n = v.size();
  const Eigen::Index p = x.cols();
  const Eigen::VectorXd e = v - x * alpha;
  SortedResiduals sr;
  sr.build(e);
  // weighted suffix sums of covariate rows in sorted order
  Eigen::MatrixXd xsuffix = Eigen::MatrixXd::Zero(n + 1, p);
  std::vector<double> w_suffix(static_cast<std::size_t>(n) + 1, 0.0);
  for (Eigen::Index k = n - 1; k >= 0; --k) {
    const int i = sr.order[static_cast<std::size_t>(k)];
    const double w = weights ? (*weights)[i] : 1.0;
    xsuffix.row(k) = xsuffix.row(k + 1) + w * x.row(i);
    w_suffix[static_cast<std::size_t>(k)] =
        w_suffix[static_cast<std::size_t>(k) + 1] + w;
  }

  Eigen::VectorXd total = Eigen::VectorXd::Zero(p);
  par::chunked_reduce<Eigen::VectorXd>(
      n, total,
      [&](std::ptrdiff_t lo, std::ptrdiff_t hi) {
        Eigen::VectorXd part = Eigen::VectorXd::Zero(p);
        for (std::ptrdiff_t k = lo; k < hi; ++k) {
          const int i = sr.order[static_cast<std::size_t>(k)];
          if (!delta[static_cast<std::size_t>(i)]) continue;
          const int from = sr.tie_lo[static_cast<std::size_t>(k)];
          const double wi = weights ? (*weights)[i] : 1.0;
          part += wi * (w_suffix[static_cast<std::size_t>(from)] *
                            x.row(i).transpose() -
                        xsuffix.row(from).transpose());
        }
        return part;
      },
      [](Eigen::VectorXd& acc, const Eigen::VectorXd& part) { acc += part; });
  return total / (static_cast<double>(n) * static_cast<double>(n));
}

double gehan_objective(const Eigen::VectorXd& alpha,
                       const ObservationSet& data) {
  return gehan_objective(alpha, data.v, data.x, data.delta);
}

Eigen::VectorXd gehan_subgradient(const Eigen::VectorXd& alpha,
                                  const ObservationSet& data) {
  return gehan_subgradient(alpha, data.v, data.x, data.delta);
}

namespace {

// Directional derivative of the objective at alpha + s*d along d, using the
// residual line e0 - s*xd. One O(n log n) pass.
double dir_deriv(const Eigen::VectorXd& e0, const Eigen::VectorXd& xd,
                 const std::vector<std::uint8_t>& delta, double s,
                 const Eigen::VectorXd* weights) {
  const Eigen::Index n = e0.size();
  const Eigen::VectorXd e = e0 - s * xd;
  SortedResiduals sr;
  sr.build(e);
  std::vector<double> xdsuffix(static_cast<std::size_t>(n) + 1, 0.0);
  std::vector<double> w_suffix(static_cast<std::size_t>(n) + 1, 0.0);
  for (Eigen::Index k = n - 1; k >= 0; --k) {
    const int i = sr.order[static_cast<std::size_t>(k)];
    const double w = weights ? (*weights)[i] : 1.0;
    xdsuffix[static_cast<std::size_t>(k)] =
        xdsuffix[static_cast<std::size_t>(k) + 1] + w * xd[i];
    w_suffix[static_cast<std::size_t>(k)] =
        w_suffix[static_cast<std::size_t>(k) + 1] + w;
  }
  double g = 0.0;
  for (Eigen::Index k = 0; k < n; ++k) {
    const int i = sr.order[static_cast<std::size_t>(k)];
    if (!delta[static_cast<std::size_t>(i)]) continue;
    const int from = sr.tie_lo[static_cast<std::size_t>(k)];
    const double wi = weights ? (*weights)[i] : 1.0;
    g += wi * (w_suffix[static_cast<std::size_t>(from)] * xd[i] -
               xdsuffix[static_cast<std::size_t>(from)]);
  }
  return g / (static_cast<double>(n) * static_cast<double>(n));
}

// Exact minimization along direction d: bracket the sign change of the
// directional derivative, then bisect. Returns the step (0 when d is not a
// descent direction).
double line_search(const Eigen::VectorXd& e0, const Eigen::VectorXd& xd,
                   const std::vector<std::uint8_t>& delta,
                   const Eigen::VectorXd* weights) {
  const double g0 = dir_deriv(e0, xd, delta, 0.0, weights);
  if (g0 >= -1e-15) return 0.0;
  double lo = 0.0, hi = 1.0;
  int doublings = 0;
  while (dir_deriv(e0, xd, delta, hi, weights) < 0.0) {
    lo = hi;
    hi *= 2.0;
    if (++doublings > 80) return hi;  // unbounded direction; caller rejects
  }
  for (int it = 0; it < 200 && hi - lo > 1e-14 * (1.0 + hi); ++it) {
    const double mid = 0.5 * (lo + hi);
    if (dir_deriv(e0, xd, delta, mid, weights) < 0.0)
      lo = mid;
    else
      hi = mid;
  }
  return hi;
}

}  // namespace

AftFit fit_gehan(const ObservationSet& data, const Eigen::VectorXd& init,
                 const Eigen::VectorXd* weights) {
  const Eigen::Index p = data.p();
  if (weights && (weights->size() != data.n() ||
                  !(weights->minCoeff() > 0.0)))
    throw ConfigError("fit_gehan: weights must be positive, one per row");
  if (init.size() != p) throw ConfigError("fit_gehan: init dimension");
  if (data.n_detected() < 2)
    throw EstimationError("fit_gehan: need at least 2 detected rows");
  for (Eigen::Index j = 0; j < p; ++j)
    if ((data.x.col(j).array() == data.x(0, j)).all())
      throw EstimationError("fit_gehan: covariate column " +
                            std::to_string(j) + " is constant");

  Eigen::VectorXd alpha = init;
  auto objective = [&](const Eigen::VectorXd& a) {
    return gehan_objective(a, data.v, data.x, data.delta, weights);
  };
  double best = objective(alpha);

  // cheap direction set: subgradient + coordinates + diagonals (p <= 4)
  std::vector<Eigen::VectorXd> diag_dirs;
  if (p >= 2 && p <= 4) {
    const int combos = 1 << p;
    for (int m = 0; m < combos; ++m) {
      Eigen::VectorXd d(p);
      for (Eigen::Index j = 0; j < p; ++j)
        d[j] = (m >> j) & 1 ? 1.0 : -1.0;
      diag_dirs.push_back(d / d.norm());
    }
  }
  // polish set, used once the cheap set stalls: a kink vertex can block
  // every axis-aligned direction while an oblique one still descends
  std::vector<Eigen::VectorXd> polish_dirs;
  if (p == 1) {
    // coordinates already cover p = 1
  } else if (p == 2) {
    for (int k = 0; k < 24; ++k) {
      const double a = std::numbers::pi * k / 24.0;
      Eigen::VectorXd d(2);
      d << std::cos(a), std::sin(a);
      polish_dirs.push_back(d);
    }
  } else {
    std::uint64_t state = 0x1cebc0de;
    auto unit = [&] {
      Eigen::VectorXd d(p);
      for (Eigen::Index j = 0; j < p; ++j) {
        // xorshift into (-1, 1); only direction coverage matters
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        d[j] = static_cast<double>(state >> 11) * 0x1.0p-52 - 1.0;
      }
      return (d / d.norm()).eval();
    };
    for (int k = 0; k < 32; ++k) polish_dirs.push_back(unit());
  }

  auto sweep = [&](const std::vector<Eigen::VectorXd>& dirs) {
    bool improved = false;
    for (const auto& d : dirs) {
      const Eigen::VectorXd e0 = data.v - data.x * alpha;
      const Eigen::VectorXd xd = data.x * d;
      const double s = line_search(e0, xd, data.delta, weights);
      if (s <= 0.0) continue;
      const Eigen::VectorXd trial = alpha + s * d;
      const double obj = objective(trial);
      if (obj < best) {
        alpha = trial;
        best = obj;
        improved = true;
      }
    }
    return improved;
  };

  // kink-edge directions: at a vertex the descent cone can be a thin wedge
  // between two active kink lines; its edges are orthogonal to the pair
  // normals x_i - x_j of nearly tied residuals (exact for p = 2)
  auto edge_dirs = [&] {
    std::vector<Eigen::VectorXd> dirs;
    if (p != 2) return dirs;
    const Eigen::VectorXd e = data.v - data.x * alpha;
    std::vector<int> order;
    sort_order(e, order);
    std::vector<std::pair<double, std::pair<int, int>>> gaps;
    for (std::size_t k = 0; k + 1 < order.size(); ++k)
      gaps.push_back({e[order[k + 1]] - e[order[k]],
                      {order[k], order[k + 1]}});
    std::sort(gaps.begin(), gaps.end());
    const std::size_t take = std::min<std::size_t>(40, gaps.size());
    for (std::size_t k = 0; k < take; ++k) {
      const Eigen::VectorXd n =
          (data.x.row(gaps[k].second.first) -
           data.x.row(gaps[k].second.second))
              .transpose();
      if (n.norm() < 1e-14) continue;
      Eigen::VectorXd d(2);
      d << -n[1], n[0];
      d /= d.norm();
      dirs.push_back(d);
      dirs.push_back(-d);
    }
    return dirs;
  };

  // derivative-free fallback for wedges the fixed rays miss
  auto nelder_mead_polish = [&] {
    const Eigen::Index dim = p;
    std::vector<Eigen::VectorXd> pts(static_cast<std::size_t>(dim) + 1,
                                     alpha);
    std::vector<double> vals(static_cast<std::size_t>(dim) + 1);
    const double h = 1e-3 * (1.0 + alpha.norm());
    for (Eigen::Index j = 0; j < dim; ++j)
      pts[static_cast<std::size_t>(j) + 1][j] += h;
    for (std::size_t i = 0; i < pts.size(); ++i)
      vals[i] = objective(pts[i]);
    for (int it = 0; it < 200; ++it) {
      std::size_t lo = 0, hi = 0, hi2 = 0;
      for (std::size_t i = 1; i < pts.size(); ++i) {
        if (vals[i] < vals[lo]) lo = i;
        if (vals[i] > vals[hi]) hi = i;
      }
      for (std::size_t i = 0; i < pts.size(); ++i)
        if (i != hi && vals[i] > vals[hi2]) hi2 = i;
      if (vals[hi] - vals[lo] < 1e-14 * (1.0 + std::abs(vals[lo]))) break;
      Eigen::VectorXd centroid = Eigen::VectorXd::Zero(dim);
      for (std::size_t i = 0; i < pts.size(); ++i)
        if (i != hi) centroid += pts[i];
      centroid /= static_cast<double>(dim);
      const Eigen::VectorXd refl = centroid + (centroid - pts[hi]);
      const double fr = objective(refl);
      if (fr < vals[lo]) {
        const Eigen::VectorXd ext = centroid + 2.0 * (centroid - pts[hi]);
        const double fe = objective(ext);
        if (fe < fr) {
          pts[hi] = ext;
          vals[hi] = fe;
        } else {
          pts[hi] = refl;
          vals[hi] = fr;
        }
      } else if (fr < vals[hi2]) {
        pts[hi] = refl;
        vals[hi] = fr;
      } else {
        const Eigen::VectorXd con = centroid + 0.5 * (pts[hi] - centroid);
        const double fc = objective(con);
        if (fc < vals[hi]) {
          pts[hi] = con;
          vals[hi] = fc;
        } else {
          for (std::size_t i = 0; i < pts.size(); ++i) {
            if (i == lo) continue;
            pts[i] = pts[lo] + 0.5 * (pts[i] - pts[lo]);
            vals[i] = objective(pts[i]);
          }
        }
      }
    }
    std::size_t lo = 0;
    for (std::size_t i = 1; i < pts.size(); ++i)
      if (vals[i] < vals[lo]) lo = i;
    if (vals[lo] < best - 1e-15) {
      alpha = pts[lo];
      best = vals[lo];
      return true;
    }
    return false;
  };

  int round = 0;
  bool converged = false;
  for (; round < kMaxRounds; ++round) {
    const double round_start = best;
    std::vector<Eigen::VectorXd> dirs;
    const Eigen::VectorXd sub =
        gehan_subgradient(alpha, data.v, data.x, data.delta, weights);
    if (sub.norm() > 0.0) dirs.push_back(-sub / sub.norm());
    for (Eigen::Index j = 0; j < p; ++j) {
      Eigen::VectorXd d = Eigen::VectorXd::Zero(p);
      d[j] = sub[j] > 0.0 ? -1.0 : 1.0;
      dirs.push_back(d);
      d[j] = -d[j];
      dirs.push_back(d);
    }
    dirs.insert(dirs.end(), diag_dirs.begin(), diag_dirs.end());
    sweep(dirs);
    if (round_start - best < kRoundTol * (1.0 + std::abs(best))) {
      // stalled on the cheap set; widen before declaring convergence
      bool moved = sweep(polish_dirs);
      if (!moved) moved = sweep(edge_dirs());
      if (!moved) moved = nelder_mead_polish();
      if (!moved &&
          round_start - best < kRoundTol * (1.0 + std::abs(best))) {
        converged = true;
        ++round;
        break;
      }
    }
  }
  if (!converged)
    throw ConvergenceError("fit_gehan: no convergence after " +
                               std::to_string(kMaxRounds) + " rounds",
                           alpha);

  AftFit fit;
  fit.alpha = alpha;
  fit.residuals = data.v - data.x * alpha;
  fit.delta = data.delta;
  fit.gehan_objective = best;
  fit.subgradient_norm =
      gehan_subgradient(alpha, data.v, data.x, data.delta, weights).norm();
  fit.converged = true;
  fit.iterations = round;
  return fit;
}

AftFit fit_gehan(const ObservationSet& data) {
  // complete-case least squares of v on (1, x) as the starting point
  const Eigen::Index n1 = data.n_detected();
  if (n1 < 2)
    throw EstimationError("fit_gehan: need at least 2 detected rows");
  Eigen::MatrixXd d(n1, data.p() + 1);
  Eigen::VectorXd v1(n1);
  Eigen::Index r = 0;
  for (Eigen::Index i = 0; i < data.n(); ++i) {
    if (!data.delta[static_cast<std::size_t>(i)]) continue;
    d(r, 0) = 1.0;
    d.row(r).tail(data.p()) = data.x.row(i);
    v1[r] = data.v[i];
    ++r;
  }
  const Eigen::VectorXd ls =
      d.colPivHouseholderQr().solve(v1).tail(data.p());
  return fit_gehan(data, ls);
}

}  // namespace lodreg
