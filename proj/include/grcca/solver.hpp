#pragma once

#include <string>
#include <vector>

#include "grcca/data.hpp"
#include "grcca/penalty.hpp"

namespace grcca {

/// Which computation produced a fit.
enum class FitPath { direct, rcca_kernel, prcca_kernel, general_eigen, grcca_eigen, grcca_extend };

std::string to_string(FitPath path);

/// Canonical coefficients and correlations of a (regularized) CCA fit.
///
/// Column i of `alpha` / `beta` is the i-th pair. Columns are normalized in
/// the regularized metric, alpha_i^T (Sxx + Kx) alpha_i = 1, mutually
/// orthogonal in it, and signed so that the largest |entry| of each alpha
/// column is positive (first index wins ties).
struct FittedCCA {
  Matrix alpha;
  Matrix beta;
  Vector correlations;
  FitPath path = FitPath::direct;
  PenaltySpec penalty_x;
  PenaltySpec penalty_y;
  std::vector<std::string> x_names;
  std::vector<std::string> y_names;

  Index components() const noexcept { return correlations.size(); }
};

/// Generalized regularized CCA in covariance space: SVD of
/// (Sxx + Kx)^{-1/2} Sxy (Syy + Ky)^{-1/2}. Throws SingularCovariance when a
/// regularized self-covariance has min eigenvalue <= 1e-10 trace/m.
FittedCCA solve_direct(const CovarianceBlock& sxx, const CovarianceBlock& syy, const CovarianceBlock& sxy,
                       const Matrix& kx, const Matrix& ky, Index r = 1);

/// Covariance-space fit straight from centered data and penalty specs.
FittedCCA fit_direct(const DataMatrix& x, const DataMatrix& y, const PenaltySpec& px, const PenaltySpec& py,
                     Index r = 1);

/// Flips column pairs so the max-|entry| of each alpha column is positive.
void apply_sign_convention(FittedCCA& fit);

/// Symmetric inverse square root; `side` only labels the error.
Matrix inverse_sqrt_pd(const Matrix& c, char side);

double modified_correlation(const Vector& alpha, const Vector& beta, const CovarianceBlock& sxx,
                            const CovarianceBlock& syy, const CovarianceBlock& sxy, const Matrix& kx,
                            const Matrix& ky);

/// Pearson correlation of X alpha and Y beta, centered on the rows given.
double plain_correlation(const DataMatrix& x, const DataMatrix& y, const Vector& alpha, const Vector& beta);
double pearson(const Vector& u, const Vector& v);

}  // namespace grcca
