#pragma once

#include <span>
#include <vector>

#include "grcca/data.hpp"
#include "grcca/penalty.hpp"
#include "grcca/solver.hpp"

namespace grcca {

/// X = R V^T with V (m x k) having orthonormal columns and k = min(n, m).
///
/// Computed as a thin SVD (R = U S). For wide X the SVD is taken of the
/// triangular factor of a Householder QR of X^T, so no m x m array is formed.
struct RowFactorization {
  Matrix r;
  Matrix v;
};

RowFactorization factor_rows(const Matrix& x);

/// Ridge-penalized X side solved in the n-dimensional row space of X.
/// Requires centered inputs; lambda1 > 0 whenever p >= n.
FittedCCA rcca_kernel_fit(const DataMatrix& x, const DataMatrix& y, double lambda1, const PenaltySpec& penalty_y,
                          Index r = 1);

/// Partially penalized fit: lambda1 on x1, nothing on x2. x2 must be tall
/// and of full column rank. Rows of the returned alpha follow [x1 | x2].
FittedCCA prcca_kernel_fit(const DataMatrix& x1, const DataMatrix& x2, const DataMatrix& y, double lambda1,
                           const PenaltySpec& penalty_y, Index r = 1);

/// Same, with the unpenalized block given as column indices of x (may be
/// empty). Rows of alpha follow the columns of x.
FittedCCA prcca_kernel_fit(const DataMatrix& x, std::span<const Index> unpenalized, const DataMatrix& y,
                           double lambda1, const PenaltySpec& penalty_y, Index r = 1);

/// Change of basis turning a general penalty U D U^T into a unit ridge on
/// the penalized coordinates and no penalty on the zero-eigenvalue ones.
///
/// `transformed` = X U S^{-1} with columns reordered so that the `penalized`
/// coordinates come first; S is sqrt(D) on positive entries and 1 elsewhere.
struct GeneralReduction {
  DataMatrix transformed;
  Index penalized = 0;
  Index unpenalized = 0;
  PenaltyFactorization factorization;
  /// transformed column c holds basis column order[c], scaled by 1/scale[c]
  std::vector<Index> order;
  Vector scale;

  /// alpha = U S^{-1} alpha_reduced (rows of alpha_reduced follow `transformed`).
  Matrix recover(const Matrix& alpha_reduced) const;
};

GeneralReduction general_reduce(const DataMatrix& x, const PenaltyFactorization& penalty);

/// Fit under a factored general penalty via general_reduce and the kernel fits.
FittedCCA general_fit(const DataMatrix& x, const DataMatrix& y, const PenaltyFactorization& penalty,
                      const PenaltySpec& penalty_y, Index r = 1);

enum class GroupPath { automatic, eigen, extend };

/// Picks extend when p + K < 4 (n + K), eigen otherwise.
GroupPath resolve_group_path(GroupPath requested, Index n, Index p, Index k);

/// Group-regularized fit with penalty lambda1 (I - C) + mu1 C on X.
/// lambda1 must be positive; mu1 = 0 leaves the K group means unpenalized.
FittedCCA grcca_fit(const DataMatrix& x, const DataMatrix& y, const GroupStructure& groups, double lambda1,
                    double mu1, const PenaltySpec& penalty_y, Index r = 1, GroupPath path = GroupPath::automatic);

}  // namespace grcca
