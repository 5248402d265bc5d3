#include "lodreg/data_model.hpp"

#include <cmath>
#include <string>

#include "lodreg/errors.hpp"

namespace lodreg {

double Transformation::forward(double t) const { return std::exp(-t); }

double Transformation::inverse(double z) const {
  if (!(z > 0.0)) throw DataError("transformation: value must be positive");
  return -std::log(z);
}

double ObservationSet::censoring_rate() const {
  return 1.0 - static_cast<double>(n_detected()) / static_cast<double>(n());
}

Eigen::Index ObservationSet::n_detected() const {
  Eigen::Index k = 0;
  for (auto d : delta) k += d;
  return k;
}

ObservationSet make_observation_set(Eigen::VectorXd y, Eigen::MatrixXd x,
                                    Eigen::VectorXd v,
                                    std::vector<std::uint8_t> delta,
                                    double c) {
  const Eigen::Index n = y.size();
  if (x.rows() != n || v.size() != n ||
      static_cast<Eigen::Index>(delta.size()) != n)
    throw DataError("observation set: inconsistent array lengths");
  if (n < x.cols() + 3)
    throw DataError("observation set: need n >= p + 3, got n=" +
                    std::to_string(n) + ", p=" + std::to_string(x.cols()));
  if (!y.allFinite() || !x.allFinite() || !v.allFinite() ||
      !std::isfinite(c))
    throw DataError("observation set: non-finite entries");
  for (Eigen::Index i = 0; i < n; ++i) {
    if (delta[static_cast<std::size_t>(i)] > 1)
      throw DataError("observation set: detection flag must be 0 or 1");
    if (delta[static_cast<std::size_t>(i)] == 1) {
      if (v[i] > c)
        throw DataError("observation set: detected row " + std::to_string(i) +
                        " has v > c");
    } else if (v[i] != c) {
      throw DataError("observation set: censored row " + std::to_string(i) +
                      " must carry v = c");
    }
  }
  return ObservationSet{std::move(y), std::move(x), std::move(v),
                        std::move(delta), c};
}

double transform_limit(double limit, const Transformation& t) {
  if (!(limit > 0.0)) throw DataError("detection limit must be positive");
  return t.inverse(limit);
}

Eigen::VectorXd design_vector(const Eigen::RowVectorXd& x_row, double z) {
  Eigen::VectorXd d(x_row.size() + 2);
  d[0] = 1.0;
  d.segment(1, x_row.size()) = x_row.transpose();
  d[d.size() - 1] = z;
  return d;
}

Eigen::MatrixXd build_design(const Eigen::MatrixXd& x,
                             const Eigen::VectorXd& z) {
  Eigen::MatrixXd d(x.rows(), x.cols() + 2);
  d.col(0).setOnes();
  d.middleCols(1, x.cols()) = x;
  d.col(d.cols() - 1) = z;
  return d;
}

}  // namespace lodreg
