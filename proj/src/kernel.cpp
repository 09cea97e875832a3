#include "grcca/kernel.hpp"

#include <cmath>
#include <numeric>

#include "grcca/errors.hpp"

namespace grcca {

namespace {

void require_centered(const DataMatrix& m, const char* what) {
  if (!m.centered()) throw StateError(std::string(what) + " must be column-centered");
}

void require_rows(const DataMatrix& a, const DataMatrix& b) {
  if (a.rows() != b.rows()) {
    throw ShapeError("row counts differ: " + std::to_string(a.rows()) + " vs " + std::to_string(b.rows()));
  }
}

CovarianceBlock cross(const Matrix& a, const Matrix& b) {
  return CovarianceBlock(a.transpose() * b / static_cast<double>(a.rows()));
}

// Partially penalized problem on [x1 | x2] with penalty `lambda` on x1 only,
// solved in reduced coordinates. Alpha rows follow [x1 | x2].
FittedCCA prcca_core(const Matrix& x1, const Matrix& x2, const Matrix& y, double lambda, const Matrix& ky,
                     Index r) {
  const Index n = x1.rows();
  const Index p2 = x2.cols();
  Matrix b;  // p2 x p1 regression of x1 on x2
  Matrix x1_tilde;
  if (p2 > 0) {
    if (p2 >= n) {
      throw IdentifiabilityError("unpenalized block has " + std::to_string(p2) + " columns but only " +
                                 std::to_string(n) + " rows; shrink the unpenalized set");
    }
    Eigen::ColPivHouseholderQR<Matrix> qr(x2);
    qr.setThreshold(1e-10);
    if (qr.rank() < p2) {
      throw IdentifiabilityError("unpenalized block has rank " + std::to_string(qr.rank()) + " < " +
                                 std::to_string(p2) + "; shrink the unpenalized set");
    }
    b = qr.solve(x1);
    x1_tilde = x1 - x2 * b;
  }
  const RowFactorization f = factor_rows(p2 > 0 ? x1_tilde : x1);
  const Index k = f.r.cols();

  Matrix reduced(n, k + p2);
  reduced.leftCols(k) = f.r;
  if (p2 > 0) reduced.rightCols(p2) = x2;

  Matrix kx = Matrix::Zero(k + p2, k + p2);
  kx.diagonal().head(k).setConstant(lambda);

  const Index max_r = std::min(k + p2, y.cols());
  if (r > max_r) throw DomainError("at most " + std::to_string(max_r) + " components are identifiable");
  FittedCCA fit = solve_direct(cross(reduced, reduced), cross(y, y), cross(reduced, y), kx, ky, r);

  Matrix alpha(x1.cols() + p2, r);
  alpha.topRows(x1.cols()) = f.v * fit.alpha.topRows(k);
  if (p2 > 0) alpha.bottomRows(p2) = fit.alpha.bottomRows(p2) - b * alpha.topRows(x1.cols());
  fit.alpha = std::move(alpha);
  return fit;
}

void finish(FittedCCA& fit, FitPath path, PenaltySpec px, PenaltySpec py, const DataMatrix& x,
            const DataMatrix& y) {
  fit.path = path;
  fit.penalty_x = std::move(px);
  fit.penalty_y = std::move(py);
  fit.x_names = x.column_names();
  fit.y_names = y.column_names();
  apply_sign_convention(fit);
}

Matrix y_penalty(const PenaltySpec& py, const DataMatrix& y) { return build_penalty_matrix(py, y.cols()); }

}  // namespace

RowFactorization factor_rows(const Matrix& x) {
  const Index n = x.rows();
  const Index m = x.cols();
  if (m > n) {
    Eigen::HouseholderQR<Matrix> qr(x.transpose());
    const Matrix q = qr.householderQ() * Matrix::Identity(m, n);
    const Matrix rt = qr.matrixQR().topRows(n).triangularView<Eigen::Upper>().toDenseMatrix().transpose();
    Eigen::JacobiSVD<Matrix> svd(rt, Eigen::ComputeFullU | Eigen::ComputeFullV);
    return {svd.matrixU() * svd.singularValues().asDiagonal(), q * svd.matrixV()};
  }
  Eigen::BDCSVD<Matrix> svd(x, Eigen::ComputeThinU | Eigen::ComputeThinV);
  return {svd.matrixU() * svd.singularValues().asDiagonal(), svd.matrixV()};
}

FittedCCA rcca_kernel_fit(const DataMatrix& x, const DataMatrix& y, double lambda1, const PenaltySpec& penalty_y,
                          Index r) {
  require_centered(x, "X");
  require_centered(y, "Y");
  require_rows(x, y);
  if (!(lambda1 >= 0.0)) throw DomainError("lambda1 must be nonnegative");
  FittedCCA fit = prcca_core(x.values(), Matrix(x.rows(), 0), y.values(), lambda1, y_penalty(penalty_y, y), r);
  finish(fit, FitPath::rcca_kernel, RidgePenalty{lambda1}, penalty_y, x, y);
  return fit;
}

FittedCCA prcca_kernel_fit(const DataMatrix& x1, const DataMatrix& x2, const DataMatrix& y, double lambda1,
                           const PenaltySpec& penalty_y, Index r) {
  require_centered(x1, "X1");
  require_centered(x2, "X2");
  require_centered(y, "Y");
  require_rows(x1, y);
  require_rows(x2, y);
  if (!(lambda1 >= 0.0)) throw DomainError("lambda1 must be nonnegative");
  FittedCCA fit = prcca_core(x1.values(), x2.values(), y.values(), lambda1, y_penalty(penalty_y, y), r);

  std::vector<std::string> names = x1.column_names();
  names.insert(names.end(), x2.column_names().begin(), x2.column_names().end());
  std::vector<Index> penalized(static_cast<std::size_t>(x1.cols()));
  std::iota(penalized.begin(), penalized.end(), Index{0});
  fit.path = FitPath::prcca_kernel;
  fit.penalty_x = PartialPenalty{lambda1, std::move(penalized)};
  fit.penalty_y = penalty_y;
  fit.x_names = std::move(names);
  fit.y_names = y.column_names();
  apply_sign_convention(fit);
  return fit;
}

FittedCCA prcca_kernel_fit(const DataMatrix& x, std::span<const Index> unpenalized, const DataMatrix& y,
                           double lambda1, const PenaltySpec& penalty_y, Index r) {
  require_centered(x, "X");
  require_centered(y, "Y");
  require_rows(x, y);
  if (!(lambda1 >= 0.0)) throw DomainError("lambda1 must be nonnegative");
  const std::vector<Index> free_cols(unpenalized.begin(), unpenalized.end());
  const PartialPenalty partial = PartialPenalty::from_unpenalized(lambda1, free_cols, x.cols());
  if (partial.penalized.size() + free_cols.size() != static_cast<std::size_t>(x.cols())) {
    throw DomainError("unpenalized indices contain duplicates");
  }

  Matrix x1(x.rows(), static_cast<Index>(partial.penalized.size()));
  for (std::size_t j = 0; j < partial.penalized.size(); ++j) x1.col(static_cast<Index>(j)) = x.values().col(partial.penalized[j]);
  Matrix x2(x.rows(), static_cast<Index>(free_cols.size()));
  for (std::size_t j = 0; j < free_cols.size(); ++j) x2.col(static_cast<Index>(j)) = x.values().col(free_cols[j]);

  FittedCCA fit = prcca_core(x1, x2, y.values(), lambda1, y_penalty(penalty_y, y), r);
  Matrix alpha(x.cols(), fit.alpha.cols());
  for (std::size_t j = 0; j < partial.penalized.size(); ++j) alpha.row(partial.penalized[j]) = fit.alpha.row(static_cast<Index>(j));
  for (std::size_t j = 0; j < free_cols.size(); ++j) {
    alpha.row(free_cols[j]) = fit.alpha.row(static_cast<Index>(partial.penalized.size() + j));
  }
  fit.alpha = std::move(alpha);
  finish(fit, FitPath::prcca_kernel, partial, penalty_y, x, y);
  return fit;
}

Matrix GeneralReduction::recover(const Matrix& alpha_reduced) const {
  Matrix basis_coords(alpha_reduced.rows(), alpha_reduced.cols());
  for (std::size_t c = 0; c < order.size(); ++c) {
    basis_coords.row(order[c]) = alpha_reduced.row(static_cast<Index>(c)) / scale(static_cast<Index>(c));
  }
  return factorization.map_coefficients(basis_coords);
}

GeneralReduction general_reduce(const DataMatrix& x, const PenaltyFactorization& penalty) {
  if (penalty.dim() != x.cols()) throw ShapeError("penalty dimension does not match data columns");
  const Vector& d = penalty.diag();
  std::vector<Index> order;
  for (Index i = 0; i < d.size(); ++i) {
    if (d(i) >= penalty.zero_tolerance()) order.push_back(i);
  }
  const Index penalized = static_cast<Index>(order.size());
  for (Index i = 0; i < d.size(); ++i) {
    if (d(i) < penalty.zero_tolerance()) order.push_back(i);
  }

  const Matrix rotated = penalty.transform_columns(x.values());
  Matrix transformed(x.rows(), x.cols());
  Vector scale(x.cols());
  for (std::size_t c = 0; c < order.size(); ++c) {
    const Index i = order[c];
    const auto cc = static_cast<Index>(c);
    scale(cc) = cc < penalized ? std::sqrt(d(i)) : 1.0;
    transformed.col(cc) = rotated.col(i) / scale(cc);
  }
  return GeneralReduction{DataMatrix(std::move(transformed), default_column_names(x.cols(), "u"), x.centered()),
                          penalized,
                          x.cols() - penalized,
                          penalty,
                          std::move(order),
                          std::move(scale)};
}

FittedCCA general_fit(const DataMatrix& x, const DataMatrix& y, const PenaltyFactorization& penalty,
                      const PenaltySpec& penalty_y, Index r) {
  require_centered(x, "X");
  require_centered(y, "Y");
  require_rows(x, y);
  const GeneralReduction red = general_reduce(x, penalty);
  const Matrix& t = red.transformed.values();
  FittedCCA fit = prcca_core(t.leftCols(red.penalized), t.rightCols(red.unpenalized), y.values(), 1.0,
                             y_penalty(penalty_y, y), r);
  fit.alpha = red.recover(fit.alpha);
  finish(fit, penalty.structured() ? FitPath::grcca_eigen : FitPath::general_eigen, penalty.source(), penalty_y,
         x, y);
  return fit;
}

GroupPath resolve_group_path(GroupPath requested, Index n, Index p, Index k) {
  if (requested != GroupPath::automatic) return requested;
  return p + k < 4 * (n + k) ? GroupPath::extend : GroupPath::eigen;
}

FittedCCA grcca_fit(const DataMatrix& x, const DataMatrix& y, const GroupStructure& groups, double lambda1,
                    double mu1, const PenaltySpec& penalty_y, Index r, GroupPath path) {
  require_centered(x, "X");
  require_centered(y, "Y");
  require_rows(x, y);
  if (groups.feature_count() != x.cols()) {
    throw ShapeError("group structure covers " + std::to_string(groups.feature_count()) +
                     " features but X has " + std::to_string(x.cols()));
  }
  if (!(mu1 >= 0.0)) throw DomainError("mu1 must be nonnegative");
  if (!(lambda1 > 0.0)) throw UnsupportedPenalty("GRCCA requires lambda1 > 0");

  const GroupPenalty spec{lambda1, mu1, groups};
  const Matrix ky = y_penalty(penalty_y, y);
  const Index kgroups = groups.group_count();
  const GroupPath resolved = resolve_group_path(path, x.rows(), x.cols(), kgroups);

  FittedCCA fit;
  if (resolved == GroupPath::eigen) {
    const GeneralReduction red = general_reduce(x, factor_group_penalty(spec));
    const Matrix& t = red.transformed.values();
    fit = prcca_core(t.leftCols(red.penalized), t.rightCols(red.unpenalized), y.values(), 1.0, ky, r);
    fit.alpha = red.recover(fit.alpha);
  } else {
    const bool sparse = mu1 > 0.0;
    const double b = sparse ? mu1 : 1.0;
    const DataMatrix ext = extend_features(x, groups, lambda1, b);
    const Matrix& e = ext.values();
    // Extended columns are group-major with the mean column last per group.
    std::vector<Index> dev_cols;
    std::vector<Index> mean_cols;
    Index col = 0;
    for (Index g = 0; g < kgroups; ++g) {
      for (Index i = 0; i < groups.size(g); ++i) dev_cols.push_back(col++);
      mean_cols.push_back(col++);
    }
    Matrix alpha_ext;
    if (sparse) {
      fit = prcca_core(e, Matrix(e.rows(), 0), y.values(), 1.0, ky, r);
      alpha_ext = fit.alpha;
    } else {
      Matrix x1(e.rows(), static_cast<Index>(dev_cols.size()));
      for (std::size_t j = 0; j < dev_cols.size(); ++j) x1.col(static_cast<Index>(j)) = e.col(dev_cols[j]);
      Matrix x2(e.rows(), kgroups);
      for (Index g = 0; g < kgroups; ++g) x2.col(g) = e.col(mean_cols[static_cast<std::size_t>(g)]);
      fit = prcca_core(x1, x2, y.values(), 1.0, ky, r);
      alpha_ext.resize(e.cols(), fit.alpha.cols());
      for (std::size_t j = 0; j < dev_cols.size(); ++j) alpha_ext.row(dev_cols[j]) = fit.alpha.row(static_cast<Index>(j));
      for (Index g = 0; g < kgroups; ++g) {
        alpha_ext.row(mean_cols[static_cast<std::size_t>(g)]) = fit.alpha.row(static_cast<Index>(dev_cols.size()) + g);
      }
    }
    // alpha_k = (I - C)(dev part)/sqrt(lambda1) + 1 * mean part / sqrt(p_k b)
    Matrix alpha(x.cols(), alpha_ext.cols());
    col = 0;
    for (Index g = 0; g < kgroups; ++g) {
      const auto& members = groups.members(g);
      const Index pk = static_cast<Index>(members.size());
      const Matrix dev = alpha_ext.middleRows(col, pk);
      const Eigen::RowVectorXd dev_mean = dev.colwise().mean();
      const Eigen::RowVectorXd mean_part =
          alpha_ext.row(col + pk) / std::sqrt(static_cast<double>(pk) * b);
      for (Index i = 0; i < pk; ++i) {
        alpha.row(members[static_cast<std::size_t>(i)]) = (dev.row(i) - dev_mean) / std::sqrt(lambda1) + mean_part;
      }
      col += pk + 1;
    }
    fit.alpha = std::move(alpha);
  }
  finish(fit, resolved == GroupPath::eigen ? FitPath::grcca_eigen : FitPath::grcca_extend, spec, penalty_y, x, y);
  return fit;
}

}  // namespace grcca
