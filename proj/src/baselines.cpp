#include "lodreg/baselines.hpp"

#include <cmath>

#include "lodreg/errors.hpp"

namespace lodreg {

double SubstitutionRule::fill_value(double limit) const {
  switch (kind) {
    case Kind::kAtLimit:
      return limit;
    case Kind::kAtLimitOverSqrt2:
      return limit / std::sqrt(2.0);
    case Kind::kAtZero:
      return 0.0;
    case Kind::kConditionalMean:
      if (!conditional_mean_value)
        throw ConfigError("substitution: conditional mean value not supplied");
      if (!(*conditional_mean_value > 0.0 &&
            *conditional_mean_value < limit))
        throw ConfigError("substitution: conditional mean must lie in (0, L)");
      return *conditional_mean_value;
  }
  throw ConfigError("substitution: unknown rule");
}

FilledData to_filled(const ObservationSet& data, const Transformation& t) {
  FilledData f;
  f.y = data.y;
  f.x = data.x;
  f.delta = data.delta;
  f.limit = t.forward(data.c);
  f.z.resize(data.n());
  for (Eigen::Index i = 0; i < data.n(); ++i)
    f.z[i] = t.forward(data.v[i]);  // censored rows carry L, replaced below
  return f;
}

FilledData substitute(const FilledData& data, const SubstitutionRule& rule) {
  FilledData f = data;
  const double fill = rule.fill_value(f.limit);
  for (Eigen::Index i = 0; i < f.z.size(); ++i)
    if (!f.delta[static_cast<std::size_t>(i)]) f.z[i] = fill;
  return f;
}

FilledData substitute(const ObservationSet& data, const SubstitutionRule& rule,
                      const Transformation& t) {
  return substitute(to_filled(data, t), rule);
}

GlmFit fit_substitution(const ObservationSet& data,
                        const SubstitutionRule& rule, const GlmFamily& family,
                        const Transformation& t) {
  const FilledData f = substitute(data, rule, t);
  return fit_glm(f.y, build_design(f.x, f.z), family);
}

}  // namespace lodreg
