#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "grcca/model.hpp"
#include "grcca/table.hpp"

namespace grcca {

/// Hyperparameter grid; unused axes stay at the singleton {0}.
struct Grid {
  std::vector<double> lambda1{0.0};
  std::vector<double> mu1{0.0};
  std::vector<double> lambda2{0.0};
  std::vector<double> mu2{0.0};

  /// Sorts and deduplicates every axis; throws on empty axes or negative or
  /// non-finite values.
  void normalize();
  /// Cartesian product, lambda1 varying slowest and mu2 fastest.
  std::vector<Hyperparameters> points() const;
};

/// Parses "a:b:log10" (powers of ten from a to b, both exact powers), or a
/// comma separated list of numbers.
std::vector<double> parse_grid_axis(const std::string& text);

/// Shuffles 0..n-1 with a seeded Fisher-Yates and deals position i to fold
/// i mod k. Folds are sorted, disjoint, cover 0..n-1 and differ in size by
/// at most one.
std::vector<std::vector<Index>> kfold_split(Index n, Index k, std::uint64_t seed);

/// Row indices outside `fold`, ascending.
std::vector<Index> complement(Index n, const std::vector<Index>& fold);

struct FoldScore {
  std::optional<double> train_cor;
  std::optional<double> val_cor;
  std::string error;
};

/// Fits on the training rows (centered with their own means, optionally
/// covariate-adjusted with a fit on those rows only) and scores the first
/// canonical pair on both sets. `covariates` may be null.
FoldScore evaluate_fold(const DataMatrix& x, const DataMatrix& y, const DataMatrix* covariates,
                        const std::vector<Index>& train, const std::vector<Index>& validation,
                        const MethodSpec& spec, const Hyperparameters& hyper);

/// Fit used by evaluate_fold, exposed so callers can inspect coefficients.
FittedCCA fit_training_rows(const DataMatrix& x, const DataMatrix& y, const DataMatrix* covariates,
                            const std::vector<Index>& train, const MethodSpec& spec, const Hyperparameters& hyper);

struct GridPointResult {
  Hyperparameters hyper;
  std::vector<FoldScore> folds;
  /// Present only when every fold succeeded.
  std::optional<double> mean_train;
  std::optional<double> se_train;
  std::optional<double> mean_val;
  std::optional<double> se_val;
  std::string failure;
};

struct CVResult {
  std::vector<GridPointResult> points;
  std::size_t best = 0;
  std::uint64_t seed = 0;
  std::vector<std::vector<Index>> folds;

  const GridPointResult& best_point() const { return points.at(best); }
};

struct CVOptions {
  Index folds = 10;
  std::uint64_t seed = 0;
  unsigned threads = 1;
  /// When set, covariates are regressed out inside every training fold and
  /// the fitted coefficients are applied to the held-out rows.
  const DataMatrix* covariates = nullptr;
};

/// k-fold grid search on uncentered x, y. Throws NoFeasiblePoint when no
/// grid point has a complete set of fold scores.
CVResult cross_validate(const DataMatrix& x, const DataMatrix& y, const MethodSpec& spec, const Grid& grid,
                        const CVOptions& options);

/// Index of the best scored point: highest mean validation correlation,
/// ties to larger lambda1, then mu1, lambda2, mu2.
std::optional<std::size_t> best_point_index(const std::vector<GridPointResult>& points);

struct OuterFoldResult {
  std::vector<Index> test_rows;
  Hyperparameters best;
  double inner_score = 0.0;
  double test_score = 0.0;
};

struct NCVResult {
  std::vector<OuterFoldResult> outer;
  double mean_inner = 0.0;
  double se_inner = 0.0;
  double mean_test = 0.0;
  double se_test = 0.0;
  std::uint64_t seed = 0;
};

struct NCVOptions {
  Index outer_folds = 11;
  Index inner_folds = 10;
  std::uint64_t seed = 0;
  unsigned threads = 1;
  const DataMatrix* covariates = nullptr;
};

/// Outer folds from `seed`; inner CV of outer fold i uses a seed derived from
/// (seed, i). Requires 2 * outer_folds <= n.
NCVResult nested_cross_validate(const DataMatrix& x, const DataMatrix& y, const MethodSpec& spec, const Grid& grid,
                                const NCVOptions& options);

/// Arithmetic mean and sd / sqrt(count) with the 1/(count-1) sd.
std::pair<double, double> mean_and_se(const std::vector<double>& values);

/// Flat per-fold CSV: lambda1, mu1, lambda2, mu2, fold, train_cor, val_cor.
Table cv_fold_table(const CVResult& result);
/// One row per grid point with means, standard errors and failure reason.
Table cv_summary_table(const CVResult& result);
/// One row per outer fold.
Table ncv_outer_table(const NCVResult& result);

}  // namespace grcca
