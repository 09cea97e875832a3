#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "grcca/data.hpp"

namespace grcca {

/// Partition of m feature indices into K named, non-empty groups.
///
/// Group ids are dense (0..K-1). Members of each group are kept in ascending
/// feature order; groups need not be contiguous in the feature order.
class GroupStructure {
 public:
  GroupStructure(std::vector<Index> assignments, std::vector<std::string> names);

  /// Consecutive groups of the given sizes, named G1..GK.
  static GroupStructure contiguous(const std::vector<Index>& sizes);

  Index feature_count() const noexcept { return static_cast<Index>(assignments_.size()); }
  Index group_count() const noexcept { return static_cast<Index>(names_.size()); }
  const std::vector<Index>& assignments() const noexcept { return assignments_; }
  const std::vector<std::string>& names() const noexcept { return names_; }
  Index size(Index k) const { return static_cast<Index>(members_[static_cast<std::size_t>(k)].size()); }
  std::vector<Index> sizes() const;
  const std::vector<Index>& members(Index k) const { return members_[static_cast<std::size_t>(k)]; }

 private:
  std::vector<Index> assignments_;
  std::vector<std::string> names_;
  std::vector<std::vector<Index>> members_;
};

/// Reads a `feature,group` CSV (with header). Every name in `features` must be
/// listed exactly once; groups are numbered by first appearance in feature
/// order.
GroupStructure parse_group_map(std::istream& in, const std::vector<std::string>& features);
GroupStructure load_group_map(const std::filesystem::path& path,
                              const std::vector<std::string>& features);

struct NoPenalty {};

struct RidgePenalty {
  double lambda = 0.0;
};

/// lambda on the penalized coordinates, nothing on the rest.
struct PartialPenalty {
  double lambda = 0.0;
  std::vector<Index> penalized;

  static PartialPenalty from_unpenalized(double lambda, const std::vector<Index>& unpenalized, Index m);
  std::vector<Index> unpenalized(Index m) const;
};

/// lambda (I - C) + mu C, with C block diagonal of 11^T / p_k per group.
struct GroupPenalty {
  double lambda = 0.0;
  double mu = 0.0;
  GroupStructure groups;
};

struct GeneralPenalty {
  Matrix matrix;
};

using PenaltySpec = std::variant<NoPenalty, RidgePenalty, PartialPenalty, GroupPenalty, GeneralPenalty>;

/// Checks lambda, mu >= 0 and, for a general matrix, symmetry within 1e-10
/// and positive semi-definiteness.
void validate(const PenaltySpec& spec);
std::string describe(const PenaltySpec& spec);

Matrix build_penalty_matrix(const PenaltySpec& spec, Index m);

/// Orthonormal basis of the complement of the constant vector, from
/// normalized Helmert contrasts: column j (1-based) has -1 in its first j
/// rows and j in row j+1, scaled by 1/sqrt(j(j+1)).
Matrix helmert_complement(Index m);

/// Eigen-factorization K = U D U^T of a penalty matrix.
///
/// Two representations share the interface. A dense one stores U. A
/// group-structured one never stores U: per group its columns are the unit
/// mean direction 1/sqrt(p_k) followed by the Helmert complement, and
/// products with U are applied in O(n p) with running sums.
class PenaltyFactorization {
 public:
  static PenaltyFactorization dense(Matrix basis, Vector diag, double zero_tolerance);
  static PenaltyFactorization grouped(GroupStructure groups, double lambda, double mu);

  Index dim() const noexcept { return diag_.size(); }
  const Vector& diag() const noexcept { return diag_; }
  double zero_tolerance() const noexcept { return zero_tol_; }
  Index zero_multiplicity() const;
  bool structured() const noexcept { return groups_.has_value(); }
  const std::optional<GroupStructure>& groups() const noexcept { return groups_; }
  /// The penalty this factorization represents (group or general).
  const PenaltySpec& source() const noexcept { return source_; }

  /// Materialized U (m x m).
  Matrix basis() const;
  /// x U for an n x m matrix x.
  Matrix transform_columns(const Matrix& x) const;
  /// U a for an m x r matrix a.
  Matrix map_coefficients(const Matrix& a) const;
  /// U D U^T.
  Matrix reconstruct() const;

 private:
  PenaltyFactorization(std::optional<Matrix> basis, std::optional<GroupStructure> groups, Vector diag,
                       double zero_tol, PenaltySpec source);

  std::optional<Matrix> basis_;
  std::optional<GroupStructure> groups_;
  Vector diag_;
  double zero_tol_;
  PenaltySpec source_;
};

/// Analytic factorization of the group penalty. Requires lambda > 0.
PenaltyFactorization factor_group_penalty(const GroupPenalty& spec);

/// Numerical factorization of a general PSD penalty (symmetric eigensolver).
PenaltyFactorization factor_general_penalty(const Matrix& k);

/// Group-major extended matrix: per group, sqrt(1/a)(X_k - Xbar_k 1^T)
/// followed by one column sqrt(p_k/b) Xbar_k, Xbar_k the row-wise group mean.
DataMatrix extend_features(const DataMatrix& x, const GroupStructure& groups, double a, double b);

}  // namespace grcca
