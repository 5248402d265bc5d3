#pragma once

#include <algorithm>
#include <functional>
#include <vector>

#include <Eigen/Core>

// test-only helpers: independent optimizer and finite differences used as
// oracles against the analytic solver paths
namespace test_util {

// classic Nelder-Mead minimizer
inline Eigen::VectorXd nelder_mead(
    const std::function<double(const Eigen::VectorXd&)>& f,
    const Eigen::VectorXd& x0, double scale = 0.5, int max_iter = 5000,
    double ftol = 1e-12) {
  const int n = static_cast<int>(x0.size());
  std::vector<Eigen::VectorXd> pts(static_cast<std::size_t>(n) + 1, x0);
  std::vector<double> vals(static_cast<std::size_t>(n) + 1);
  for (int i = 0; i < n; ++i) pts[static_cast<std::size_t>(i) + 1][i] += scale;
  for (std::size_t i = 0; i < pts.size(); ++i) vals[i] = f(pts[i]);

  auto order = [&] {
    std::vector<std::size_t> idx(pts.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(),
              [&](std::size_t a, std::size_t b) { return vals[a] < vals[b]; });
    std::vector<Eigen::VectorXd> p2;
    std::vector<double> v2;
    for (auto i : idx) {
      p2.push_back(pts[i]);
      v2.push_back(vals[i]);
    }
    pts.swap(p2);
    vals.swap(v2);
  };

  for (int it = 0; it < max_iter; ++it) {
    order();
    if (vals.back() - vals.front() <
        ftol * (1.0 + std::abs(vals.front())))
      break;
    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) centroid += pts[i];
    centroid /= n;
    const Eigen::VectorXd refl = centroid + (centroid - pts.back());
    const double fr = f(refl);
    if (fr < vals.front()) {
      const Eigen::VectorXd exp2 = centroid + 2.0 * (centroid - pts.back());
      const double fe = f(exp2);
      if (fe < fr) {
        pts.back() = exp2;
        vals.back() = fe;
      } else {
        pts.back() = refl;
        vals.back() = fr;
      }
    } else if (fr < vals[vals.size() - 2]) {
      pts.back() = refl;
      vals.back() = fr;
    } else {
      const Eigen::VectorXd contr = centroid + 0.5 * (pts.back() - centroid);
      const double fc = f(contr);
      if (fc < vals.back()) {
        pts.back() = contr;
        vals.back() = fc;
      } else {
        for (std::size_t i = 1; i < pts.size(); ++i) {
          pts[i] = pts.front() + 0.5 * (pts[i] - pts.front());
          vals[i] = f(pts[i]);
        }
      }
    }
  }
  order();
  return pts.front();
}

// central differences, relative step
inline Eigen::VectorXd numerical_gradient(
    const std::function<double(const Eigen::VectorXd&)>& f,
    const Eigen::VectorXd& x, double step = 1e-5) {
  Eigen::VectorXd g(x.size());
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    const double h = step * (1.0 + std::abs(x[j]));
    Eigen::VectorXd hi = x, lo = x;
    hi[j] += h;
    lo[j] -= h;
    g[j] = (f(hi) - f(lo)) / (2.0 * h);
  }
  return g;
}

}  // namespace test_util
