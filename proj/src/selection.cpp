#include "grcca/selection.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <tuple>

#include "grcca/errors.hpp"
#include "grcca/parallel.hpp"
#include "grcca/rng.hpp"

namespace grcca {

namespace {

void normalize_axis(std::vector<double>& axis, const char* name) {
  if (axis.empty()) throw DomainError(std::string("grid axis ") + name + " is empty");
  for (double v : axis) {
    if (!std::isfinite(v) || v < 0.0) {
      throw DomainError(std::string("grid axis ") + name + " has a negative or non-finite value");
    }
  }
  std::sort(axis.begin(), axis.end());
  axis.erase(std::unique(axis.begin(), axis.end()), axis.end());
}

double parse_number(const std::string& text) {
  std::size_t used = 0;
  double value = 0.0;
  try {
    value = std::stod(text, &used);
  } catch (const std::exception&) {
    throw DomainError("grid value '" + text + "' is not a number");
  }
  while (used < text.size() && std::isspace(static_cast<unsigned char>(text[used]))) ++used;
  if (used != text.size()) throw DomainError("grid value '" + text + "' is not a number");
  return value;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return {};
  return s.substr(b, s.find_last_not_of(" \t") - b + 1);
}

int exact_decade(double v, const std::string& text) {
  if (!(v > 0.0)) throw DomainError("log10 grid bound '" + text + "' must be positive");
  const double e = std::round(std::log10(v));
  if (std::abs(v / std::pow(10.0, e) - 1.0) > 1e-12) {
    throw DomainError("log10 grid bound '" + text + "' is not a power of ten");
  }
  return static_cast<int>(e);
}

}  // namespace

void Grid::normalize() {
  normalize_axis(lambda1, "lambda1");
  normalize_axis(mu1, "mu1");
  normalize_axis(lambda2, "lambda2");
  normalize_axis(mu2, "mu2");
}

std::vector<Hyperparameters> Grid::points() const {
  std::vector<Hyperparameters> out;
  out.reserve(lambda1.size() * mu1.size() * lambda2.size() * mu2.size());
  for (double l1 : lambda1)
    for (double m1 : mu1)
      for (double l2 : lambda2)
        for (double m2 : mu2) out.push_back({l1, m1, l2, m2});
  return out;
}

std::vector<double> parse_grid_axis(const std::string& text) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  for (std::string part; std::getline(ss, part, ':');) parts.push_back(trim(part));
  if (parts.size() == 3) {
    if (parts[2] != "log10") throw DomainError("grid '" + text + "': only the log10 step is supported");
    const int lo = exact_decade(parse_number(parts[0]), parts[0]);
    const int hi = exact_decade(parse_number(parts[1]), parts[1]);
    if (lo > hi) throw DomainError("grid '" + text + "' runs downward");
    std::vector<double> values;
    // Parsing "1e<k>" yields the same double as the literal.
    for (int k = lo; k <= hi; ++k) values.push_back(std::stod("1e" + std::to_string(k)));
    return values;
  }
  if (parts.size() != 1) throw DomainError("grid '" + text + "' is neither a:b:log10 nor a list");
  std::vector<double> values;
  std::stringstream list(text);
  for (std::string item; std::getline(list, item, ',');) {
    item = trim(item);
    if (item.empty()) throw DomainError("grid '" + text + "' has an empty entry");
    values.push_back(parse_number(item));
  }
  if (values.empty()) throw DomainError("grid '" + text + "' is empty");
  return values;
}

std::vector<std::vector<Index>> kfold_split(Index n, Index k, std::uint64_t seed) {
  if (k < 2) throw DomainError("need at least 2 folds");
  if (k > n) throw DomainError("cannot split " + std::to_string(n) + " rows into " + std::to_string(k) + " folds");
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  CounterRng rng(derive_seed(seed, 0x6b666f6c64ULL));
  for (std::size_t i = order.size() - 1; i > 0; --i) {
    std::swap(order[i], order[rng.below(i + 1)]);
  }
  std::vector<std::vector<Index>> folds(static_cast<std::size_t>(k));
  for (std::size_t i = 0; i < order.size(); ++i) folds[i % static_cast<std::size_t>(k)].push_back(order[i]);
  for (auto& f : folds) std::sort(f.begin(), f.end());
  return folds;
}

std::vector<Index> complement(Index n, const std::vector<Index>& fold) {
  std::vector<char> held(static_cast<std::size_t>(n), 0);
  for (Index i : fold) held.at(static_cast<std::size_t>(i)) = 1;
  std::vector<Index> out;
  out.reserve(static_cast<std::size_t>(n) - fold.size());
  for (Index i = 0; i < n; ++i) {
    if (!held[static_cast<std::size_t>(i)]) out.push_back(i);
  }
  return out;
}

namespace {

struct PreparedRows {
  DataMatrix x_train;
  DataMatrix y_train;
  std::optional<DataMatrix> x_val;
  std::optional<DataMatrix> y_val;
};

// Training statistics (covariate fit, means) come from `train` alone.
PreparedRows prepare_rows(const DataMatrix& x, const DataMatrix& y, const DataMatrix* covariates,
                          const std::vector<Index>& train, const std::vector<Index>* validation) {
  if (validation && validation->size() < 2) {
    throw ShapeError("validation fold has " + std::to_string(validation->size()) +
                     " row; correlations need at least 2");
  }
  DataMatrix xt = x.select_rows(train);
  DataMatrix yt = y.select_rows(train);
  std::optional<DataMatrix> xv;
  std::optional<DataMatrix> yv;
  if (validation) {
    xv = x.select_rows(*validation);
    yv = y.select_rows(*validation);
  }
  if (covariates) {
    const DataMatrix ct = covariates->select_rows(train);
    const CovariateFit fx = fit_covariates(xt, ct);
    const CovariateFit fy = fit_covariates(yt, ct);
    if (validation) {
      const DataMatrix cv = covariates->select_rows(*validation);
      xv = fx.residuals(*xv, cv);
      yv = fy.residuals(*yv, cv);
    }
    xt = fx.residuals(xt, ct);
    yt = fy.residuals(yt, ct);
  }
  PreparedRows out{center_columns(xt), center_columns(yt), std::nullopt, std::nullopt};
  if (validation) {
    out.x_val = subtract_means(*xv, column_means(xt));
    out.y_val = subtract_means(*yv, column_means(yt));
  }
  return out;
}

FoldScore score_fold(const DataMatrix& x, const DataMatrix& y, const DataMatrix* covariates,
                     const std::vector<Index>& train, const std::vector<Index>& validation, const MethodSpec& spec,
                     const Hyperparameters& hyper) {
  const PreparedRows rows = prepare_rows(x, y, covariates, train, &validation);
  const FittedCCA fit = fit_model(rows.x_train, rows.y_train, spec, hyper, 1);
  const Vector a = fit.alpha.col(0);
  const Vector b = fit.beta.col(0);
  FoldScore score;
  score.train_cor = plain_correlation(rows.x_train, rows.y_train, a, b);
  score.val_cor = plain_correlation(*rows.x_val, *rows.y_val, a, b);
  return score;
}

bool prefer(const GridPointResult& a, const GridPointResult& b) {
  // True when a beats b: higher score, then stronger regularization.
  if (*a.mean_val != *b.mean_val) return *a.mean_val > *b.mean_val;
  return std::tie(a.hyper.lambda1, a.hyper.mu1, a.hyper.lambda2, a.hyper.mu2) >
         std::tie(b.hyper.lambda1, b.hyper.mu1, b.hyper.lambda2, b.hyper.mu2);
}

}  // namespace

FittedCCA fit_training_rows(const DataMatrix& x, const DataMatrix& y, const DataMatrix* covariates,
                            const std::vector<Index>& train, const MethodSpec& spec, const Hyperparameters& hyper) {
  const PreparedRows rows = prepare_rows(x, y, covariates, train, nullptr);
  return fit_model(rows.x_train, rows.y_train, spec, hyper, 1);
}

FoldScore evaluate_fold(const DataMatrix& x, const DataMatrix& y, const DataMatrix* covariates,
                        const std::vector<Index>& train, const std::vector<Index>& validation,
                        const MethodSpec& spec, const Hyperparameters& hyper) {
  try {
    return score_fold(x, y, covariates, train, validation, spec, hyper);
  } catch (const Error& e) {
    FoldScore failed;
    failed.error = e.what();
    return failed;
  }
}

std::pair<double, double> mean_and_se(const std::vector<double>& values) {
  if (values.empty()) throw DomainError("mean of an empty set");
  const double count = static_cast<double>(values.size());
  double sum = 0.0;
  for (double v : values) sum += v;
  const double mean = sum / count;
  if (values.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return {mean, std::sqrt(ss / (count - 1.0)) / std::sqrt(count)};
}

std::optional<std::size_t> best_point_index(const std::vector<GridPointResult>& points) {
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (!points[i].mean_val) continue;
    if (!best || prefer(points[i], points[*best])) best = i;
  }
  return best;
}

CVResult cross_validate(const DataMatrix& x, const DataMatrix& y, const MethodSpec& spec, const Grid& grid,
                        const CVOptions& options) {
  if (x.rows() != y.rows()) throw ShapeError("X and Y have different row counts");
  if (options.covariates && options.covariates->rows() != x.rows()) {
    throw ShapeError("covariates have a different row count");
  }
  validate(spec, x.cols(), y.cols());
  Grid g = grid;
  g.normalize();

  CVResult result;
  result.seed = options.seed;
  result.folds = kfold_split(x.rows(), options.folds, options.seed);
  const auto hypers = g.points();
  const std::size_t k = result.folds.size();
  std::vector<std::vector<Index>> train(k);
  for (std::size_t f = 0; f < k; ++f) train[f] = complement(x.rows(), result.folds[f]);

  result.points.resize(hypers.size());
  for (std::size_t i = 0; i < hypers.size(); ++i) {
    result.points[i].hyper = hypers[i];
    result.points[i].folds.resize(k);
  }
  parallel_for(hypers.size() * k, options.threads, [&](std::size_t task) {
    const std::size_t i = task / k;
    const std::size_t f = task % k;
    result.points[i].folds[f] =
        evaluate_fold(x, y, options.covariates, train[f], result.folds[f], spec, hypers[i]);
  });

  for (auto& point : result.points) {
    std::vector<double> tr;
    std::vector<double> va;
    for (std::size_t f = 0; f < k; ++f) {
      const FoldScore& s = point.folds[f];
      if (!s.val_cor) {
        if (point.failure.empty()) point.failure = "fold " + std::to_string(f + 1) + ": " + s.error;
        continue;
      }
      tr.push_back(*s.train_cor);
      va.push_back(*s.val_cor);
    }
    if (!point.failure.empty()) continue;
    std::tie(point.mean_train, point.se_train) = mean_and_se(tr);
    std::tie(point.mean_val, point.se_val) = mean_and_se(va);
  }

  const auto best = best_point_index(result.points);
  if (!best) {
    throw NoFeasiblePoint("every grid point failed; first failure: " + result.points.front().failure);
  }
  result.best = *best;
  return result;
}

NCVResult nested_cross_validate(const DataMatrix& x, const DataMatrix& y, const MethodSpec& spec, const Grid& grid,
                                const NCVOptions& options) {
  if (options.outer_folds * 2 > x.rows()) {
    throw DomainError("nested CV needs at least 2 rows per outer fold (outer folds " +
                      std::to_string(options.outer_folds) + ", rows " + std::to_string(x.rows()) + ")");
  }
  NCVResult result;
  result.seed = options.seed;
  const auto outer = kfold_split(x.rows(), options.outer_folds, options.seed);
  std::vector<double> inner_scores;
  std::vector<double> test_scores;
  for (std::size_t i = 0; i < outer.size(); ++i) {
    const std::vector<Index> rest = complement(x.rows(), outer[i]);
    const DataMatrix xr = x.select_rows(rest);
    const DataMatrix yr = y.select_rows(rest);
    std::optional<DataMatrix> cr;
    if (options.covariates) cr = options.covariates->select_rows(rest);

    CVOptions inner;
    inner.folds = options.inner_folds;
    inner.seed = derive_seed(options.seed, i + 1);
    inner.threads = options.threads;
    inner.covariates = cr ? &*cr : nullptr;
    const CVResult cv = cross_validate(xr, yr, spec, grid, inner);

    OuterFoldResult fold;
    fold.test_rows = outer[i];
    fold.best = cv.best_point().hyper;
    fold.inner_score = *cv.best_point().mean_val;
    fold.test_score = *score_fold(x, y, options.covariates, rest, outer[i], spec, fold.best).val_cor;
    inner_scores.push_back(fold.inner_score);
    test_scores.push_back(fold.test_score);
    result.outer.push_back(std::move(fold));
  }
  std::tie(result.mean_inner, result.se_inner) = mean_and_se(inner_scores);
  std::tie(result.mean_test, result.se_test) = mean_and_se(test_scores);
  return result;
}

Table cv_fold_table(const CVResult& result) {
  Table table{{"lambda1", "mu1", "lambda2", "mu2", "fold", "train_cor", "val_cor"}, {}};
  for (const auto& point : result.points) {
    for (std::size_t f = 0; f < point.folds.size(); ++f) {
      table.rows.push_back({format_number(point.hyper.lambda1), format_number(point.hyper.mu1),
                            format_number(point.hyper.lambda2), format_number(point.hyper.mu2),
                            std::to_string(f + 1), format_number(point.folds[f].train_cor),
                            format_number(point.folds[f].val_cor)});
    }
  }
  return table;
}

Table cv_summary_table(const CVResult& result) {
  Table table{{"lambda1", "mu1", "lambda2", "mu2", "mean_train", "se_train", "mean_val", "se_val", "best", "failure"},
              {}};
  for (std::size_t i = 0; i < result.points.size(); ++i) {
    const auto& p = result.points[i];
    table.rows.push_back({format_number(p.hyper.lambda1), format_number(p.hyper.mu1),
                          format_number(p.hyper.lambda2), format_number(p.hyper.mu2), format_number(p.mean_train),
                          format_number(p.se_train), format_number(p.mean_val), format_number(p.se_val),
                          i == result.best ? "1" : "0", p.failure});
  }
  return table;
}

Table ncv_outer_table(const NCVResult& result) {
  Table table{{"outer_fold", "test_rows", "lambda1", "mu1", "lambda2", "mu2", "inner_cor", "test_cor"}, {}};
  for (std::size_t i = 0; i < result.outer.size(); ++i) {
    const auto& f = result.outer[i];
    table.rows.push_back({std::to_string(i + 1), std::to_string(f.test_rows.size()), format_number(f.best.lambda1),
                          format_number(f.best.mu1), format_number(f.best.lambda2), format_number(f.best.mu2),
                          format_number(f.inner_score), format_number(f.test_score)});
  }
  return table;
}

}  // namespace grcca
