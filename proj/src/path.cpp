#include "grcca/path.hpp"

#include "grcca/errors.hpp"
#include "grcca/parallel.hpp"

namespace grcca {

CoefficientPath coefficient_path(const DataMatrix& x, const DataMatrix& y, const MethodSpec& spec,
                                 const Hyperparameters& base, Sweep sweep, const std::vector<double>& grid,
                                 unsigned threads) {
  if (grid.empty()) throw DomainError("coefficient path grid is empty");
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (!(grid[i - 1] < grid[i])) throw DomainError("coefficient path grid must be strictly ascending");
  }
  validate(spec, x.cols(), y.cols());

  CoefficientPath path;
  path.sweep = sweep;
  path.features = x.column_names();
  path.feature_groups.assign(path.features.size(), std::string());
  if (spec.groups_x) {
    for (std::size_t j = 0; j < path.features.size(); ++j) {
      path.feature_groups[j] = spec.groups_x->names()[static_cast<std::size_t>(spec.groups_x->assignments()[j])];
    }
  }

  path.points.resize(grid.size());
  parallel_for(grid.size(), threads, [&](std::size_t i) {
    PathPoint& point = path.points[i];
    point.hyper = base;
    (sweep == Sweep::lambda1 ? point.hyper.lambda1 : point.hyper.mu1) = grid[i];
    try {
      point.fit = fit_model(x, y, spec, point.hyper, 1);
    } catch (const Error& e) {
      point.error = e.what();
    }
  });

  const Vector* previous = nullptr;
  Vector last;
  for (auto& point : path.points) {
    if (!point.fit) continue;
    if (previous && point.fit->alpha.col(0).dot(*previous) < 0.0) {
      point.fit->alpha.col(0) *= -1.0;
      point.fit->beta.col(0) *= -1.0;
    }
    last = point.fit->alpha.col(0);
    previous = &last;
  }
  return path;
}

Table path_table(const CoefficientPath& path) {
  Table table{{"lambda", "mu", "feature", "group", "coefficient"}, {}};
  for (const auto& point : path.points) {
    const std::string lambda = format_number(point.hyper.lambda1);
    const std::string mu = format_number(point.hyper.mu1);
    for (std::size_t j = 0; j < path.features.size(); ++j) {
      std::optional<double> value;
      if (point.fit) value = point.fit->alpha(static_cast<Index>(j), 0);
      table.rows.push_back({lambda, mu, path.features[j], path.feature_groups[j], format_number(value)});
    }
  }
  return table;
}

}  // namespace grcca
