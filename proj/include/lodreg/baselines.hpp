#pragma once

#include <optional>

#include <Eigen/Core>

#include "lodreg/data_model.hpp"
#include "lodreg/glm.hpp"

namespace lodreg {

// Below-limit fill-in rules compared against the two-stage estimator.
struct SubstitutionRule {
  enum class Kind { kAtLimit, kAtLimitOverSqrt2, kAtZero, kConditionalMean };
  Kind kind = Kind::kAtLimit;
  std::optional<double> conditional_mean_value;  // required for kConditionalMean

  static SubstitutionRule at_limit() { return {Kind::kAtLimit, {}}; }
  static SubstitutionRule at_limit_over_sqrt2() {
    return {Kind::kAtLimitOverSqrt2, {}};
  }
  static SubstitutionRule at_zero() { return {Kind::kAtZero, {}}; }
  static SubstitutionRule conditional_mean(double value) {
    return {Kind::kConditionalMean, value};
  }

  // fill-in value on the raw covariate scale given the limit L
  double fill_value(double limit) const;
};

// GLM-ready rows on the raw covariate scale; censored rows keep their flag
// so substitution can be re-applied without touching detected rows.
struct FilledData {
  Eigen::VectorXd y;
  Eigen::MatrixXd x;
  Eigen::VectorXd z;
  std::vector<std::uint8_t> delta;
  double limit = 0.0;  // L on the raw scale
};

FilledData to_filled(const ObservationSet& data, const Transformation& t = {});

FilledData substitute(const ObservationSet& data, const SubstitutionRule& rule,
                      const Transformation& t = {});
FilledData substitute(const FilledData& data, const SubstitutionRule& rule);

// Substitute, then fit the ordinary GLM on all rows.
GlmFit fit_substitution(const ObservationSet& data,
                        const SubstitutionRule& rule, const GlmFamily& family,
                        const Transformation& t = {});

}  // namespace lodreg
