#pragma once

#include <optional>
#include <string>
#include <vector>

#include "grcca/model.hpp"
#include "grcca/table.hpp"

namespace grcca {

/// Which hyperparameter a coefficient path varies.
enum class Sweep { lambda1, mu1 };

struct PathPoint {
  Hyperparameters hyper;
  std::optional<FittedCCA> fit;
  std::string error;  // set when fit is empty
};

/// First-pair fits along a sorted grid of one hyperparameter.
///
/// Successive alpha vectors are sign-aligned: each successful point is
/// flipped (alpha and beta together) when its inner product with the
/// previous successful alpha is negative. Failed points keep their slot.
struct CoefficientPath {
  Sweep sweep = Sweep::lambda1;
  std::vector<PathPoint> points;
  std::vector<std::string> features;
  std::vector<std::string> feature_groups;  // empty strings without groups
};

/// `grid` must be nonempty and strictly ascending; `base` supplies the fixed
/// hyperparameters. Points are fitted concurrently and ordered by grid index.
CoefficientPath coefficient_path(const DataMatrix& x, const DataMatrix& y, const MethodSpec& spec,
                                 const Hyperparameters& base, Sweep sweep, const std::vector<double>& grid,
                                 unsigned threads = 1);

/// Long table with columns lambda, mu, feature, group, coefficient. Failed
/// points contribute rows with coefficient NA.
Table path_table(const CoefficientPath& path);

}  // namespace grcca
