#include "grcca/solver.hpp"

#include <algorithm>
#include <cmath>

#include "grcca/errors.hpp"

namespace grcca {

std::string to_string(FitPath path) {
  switch (path) {
    case FitPath::direct: return "direct";
    case FitPath::rcca_kernel: return "rcca-kernel";
    case FitPath::prcca_kernel: return "prcca-kernel";
    case FitPath::general_eigen: return "general-eigen";
    case FitPath::grcca_eigen: return "grcca-eigen";
    case FitPath::grcca_extend: return "grcca-extend";
  }
  return "unknown";
}

Matrix inverse_sqrt_pd(const Matrix& c, char side) {
  const Index m = c.rows();
  Eigen::SelfAdjointEigenSolver<Matrix> eig(c);
  if (eig.info() != Eigen::Success) throw NumericalConsistency("symmetric eigensolver failed");
  const double min_eig = eig.eigenvalues()(0);
  const double tol = 1e-10 * c.trace() / static_cast<double>(m);
  if (!(min_eig > tol)) throw SingularCovariance(side, min_eig);
  const Vector inv_sqrt = eig.eigenvalues().array().rsqrt();
  return eig.eigenvectors() * inv_sqrt.asDiagonal() * eig.eigenvectors().transpose();
}

void apply_sign_convention(FittedCCA& fit) {
  for (Index i = 0; i < fit.alpha.cols(); ++i) {
    Index arg = 0;
    double best = -1.0;
    for (Index j = 0; j < fit.alpha.rows(); ++j) {
      const double a = std::abs(fit.alpha(j, i));
      if (a > best) {
        best = a;
        arg = j;
      }
    }
    if (fit.alpha(arg, i) < 0.0) {
      fit.alpha.col(i) *= -1.0;
      fit.beta.col(i) *= -1.0;
    }
  }
}

FittedCCA solve_direct(const CovarianceBlock& sxx, const CovarianceBlock& syy, const CovarianceBlock& sxy,
                       const Matrix& kx, const Matrix& ky, Index r) {
  const Index p = sxx.matrix().rows();
  const Index q = syy.matrix().rows();
  if (sxx.matrix().cols() != p || syy.matrix().cols() != q || sxy.matrix().rows() != p ||
      sxy.matrix().cols() != q) {
    throw ShapeError("covariance blocks have inconsistent shapes");
  }
  if (kx.rows() != p || kx.cols() != p || ky.rows() != q || ky.cols() != q) {
    throw ShapeError("penalty matrices do not match covariance shapes");
  }
  if (r < 1 || r > std::min(p, q)) {
    throw DomainError("number of components must lie in [1, " + std::to_string(std::min(p, q)) + "]");
  }

  const Matrix wx = inverse_sqrt_pd(sxx.matrix() + kx, 'X');
  const Matrix wy = inverse_sqrt_pd(syy.matrix() + ky, 'Y');
  const Matrix whitened = wx * sxy.matrix() * wy;
  Eigen::BDCSVD<Matrix> svd(whitened, Eigen::ComputeThinU | Eigen::ComputeThinV);

  FittedCCA fit;
  fit.alpha = wx * svd.matrixU().leftCols(r);
  fit.beta = wy * svd.matrixV().leftCols(r);
  fit.correlations = svd.singularValues().head(r);
  for (Index i = 0; i < r; ++i) {
    double& c = fit.correlations(i);
    if (c > 1.0 + 1e-8) {
      throw NumericalConsistency("canonical correlation " + std::to_string(c) + " exceeds 1");
    }
    c = std::clamp(c, 0.0, 1.0);
  }
  fit.path = FitPath::direct;
  fit.penalty_x = GeneralPenalty{kx};
  fit.penalty_y = GeneralPenalty{ky};
  apply_sign_convention(fit);
  return fit;
}

FittedCCA fit_direct(const DataMatrix& x, const DataMatrix& y, const PenaltySpec& px, const PenaltySpec& py,
                     Index r) {
  const Matrix kx = build_penalty_matrix(px, x.cols());
  const Matrix ky = build_penalty_matrix(py, y.cols());
  FittedCCA fit = solve_direct(sample_covariance(x, x), sample_covariance(y, y), sample_covariance(x, y), kx,
                               ky, r);
  fit.penalty_x = px;
  fit.penalty_y = py;
  fit.x_names = x.column_names();
  fit.y_names = y.column_names();
  return fit;
}

double modified_correlation(const Vector& alpha, const Vector& beta, const CovarianceBlock& sxx,
                            const CovarianceBlock& syy, const CovarianceBlock& sxy, const Matrix& kx,
                            const Matrix& ky) {
  const double ax = alpha.dot((sxx.matrix() + kx) * alpha);
  const double by = beta.dot((syy.matrix() + ky) * beta);
  if (!(ax > 0.0) || !(by > 0.0)) throw DegenerateDirection("modified correlation has a zero denominator");
  return alpha.dot(sxy.matrix() * beta) / (std::sqrt(ax) * std::sqrt(by));
}

double pearson(const Vector& u, const Vector& v) {
  if (u.size() != v.size()) throw ShapeError("variates have different lengths");
  const Vector uc = u.array() - u.mean();
  const Vector vc = v.array() - v.mean();
  const double su = uc.norm();
  const double sv = vc.norm();
  // Constant (or all-zero) variates: the centered norm is pure roundoff.
  if (!(su > 1e-12 * u.norm()) || !(sv > 1e-12 * v.norm())) {
    throw DegenerateVariate("variate has zero variance on the evaluation rows");
  }
  return uc.dot(vc) / (su * sv);
}

double plain_correlation(const DataMatrix& x, const DataMatrix& y, const Vector& alpha, const Vector& beta) {
  if (x.rows() != y.rows()) throw ShapeError("row counts differ");
  if (alpha.size() != x.cols() || beta.size() != y.cols()) throw ShapeError("coefficient length mismatch");
  return pearson(x.values() * alpha, y.values() * beta);
}

}  // namespace grcca
