#include "grcca/penalty.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <unordered_map>

#include "grcca/errors.hpp"

namespace grcca {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void check_nonnegative(double v, const char* name) {
  if (!(v >= 0.0) || !std::isfinite(v)) {
    throw DomainError(std::string(name) + " must be a finite nonnegative number");
  }
}

// (x M)_j for the Helmert complement M of a group, x restricted to the
// group's columns. Column j (1-based) is (j x_j - sum_{i<j} x_i)/sqrt(j(j+1)).
void helmert_columns(const Matrix& x, const std::vector<Index>& members, Eigen::Ref<Matrix> out) {
  Vector prefix = x.col(members[0]);
  for (std::size_t j = 1; j < members.size(); ++j) {
    const double jj = static_cast<double>(j);
    out.col(static_cast<Index>(j - 1)) =
        (jj * x.col(members[j]) - prefix) / std::sqrt(jj * (jj + 1.0));
    prefix += x.col(members[j]);
  }
}

// M a for the Helmert complement, a of length m-1; returns length m.
Vector helmert_apply(const Eigen::Ref<const Vector>& a) {
  const Index m = a.size() + 1;
  Vector out = Vector::Zero(m);
  double suffix = 0.0;
  for (Index i = m - 1; i >= 0; --i) {
    if (i >= 1) {
      const double ii = static_cast<double>(i);
      const double c = a(i - 1) / std::sqrt(ii * (ii + 1.0));
      out(i) = ii * c - suffix;
      suffix += c;
    } else {
      out(i) = -suffix;
    }
  }
  return out;
}

}  // namespace

GroupStructure::GroupStructure(std::vector<Index> assignments, std::vector<std::string> names)
    : assignments_(std::move(assignments)), names_(std::move(names)), members_(names_.size()) {
  if (assignments_.empty()) throw ShapeError("group structure has no features");
  for (std::size_t j = 0; j < assignments_.size(); ++j) {
    const Index g = assignments_[j];
    if (g < 0 || g >= static_cast<Index>(names_.size())) {
      throw DomainError("feature " + std::to_string(j) + " assigned to unknown group " + std::to_string(g));
    }
    members_[static_cast<std::size_t>(g)].push_back(static_cast<Index>(j));
  }
  for (std::size_t k = 0; k < members_.size(); ++k) {
    if (members_[k].empty()) throw DomainError("group '" + names_[k] + "' is empty");
  }
}

GroupStructure GroupStructure::contiguous(const std::vector<Index>& sizes) {
  std::vector<Index> assignments;
  std::vector<std::string> names;
  for (std::size_t k = 0; k < sizes.size(); ++k) {
    if (sizes[k] < 1) throw DomainError("group sizes must be positive");
    assignments.insert(assignments.end(), static_cast<std::size_t>(sizes[k]), static_cast<Index>(k));
    names.push_back("G" + std::to_string(k + 1));
  }
  return GroupStructure(std::move(assignments), std::move(names));
}

std::vector<Index> GroupStructure::sizes() const {
  std::vector<Index> out;
  out.reserve(members_.size());
  for (const auto& m : members_) out.push_back(static_cast<Index>(m.size()));
  return out;
}

GroupStructure parse_group_map(std::istream& in, const std::vector<std::string>& features) {
  const CsvRecords records = read_csv_records(in, true);
  if (records.header.size() != 2) throw ParseError("group map must have two columns: feature,group", 0, 0);

  std::unordered_map<std::string, std::size_t> feature_index;
  for (std::size_t j = 0; j < features.size(); ++j) feature_index.emplace(features[j], j);

  std::vector<std::string> group_of(features.size());
  std::vector<bool> seen(features.size(), false);
  for (std::size_t i = 0; i < records.rows.size(); ++i) {
    const auto& row = records.rows[i];
    const long r = static_cast<long>(i + 1);
    if (row.size() != 2) throw ParseError("group map row " + std::to_string(r) + " must have 2 fields", r, 0);
    const auto it = feature_index.find(row[0]);
    if (it == feature_index.end()) throw ParseError("group map names unknown feature '" + row[0] + "'", r, 1);
    if (seen[it->second]) throw ParseError("feature '" + row[0] + "' listed twice in group map", r, 1);
    if (row[1].empty()) throw ParseError("empty group name for feature '" + row[0] + "'", r, 2);
    seen[it->second] = true;
    group_of[it->second] = row[1];
  }

  std::vector<Index> assignments(features.size());
  std::vector<std::string> names;
  std::map<std::string, Index> id;
  for (std::size_t j = 0; j < features.size(); ++j) {
    if (!seen[j]) throw InputError("feature '" + features[j] + "' missing from group map");
    auto [it, inserted] = id.emplace(group_of[j], static_cast<Index>(names.size()));
    if (inserted) names.push_back(group_of[j]);
    assignments[j] = it->second;
  }
  return GroupStructure(std::move(assignments), std::move(names));
}

GroupStructure load_group_map(const std::filesystem::path& path, const std::vector<std::string>& features) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  return parse_group_map(in, features);
}

PartialPenalty PartialPenalty::from_unpenalized(double lambda, const std::vector<Index>& unpenalized, Index m) {
  std::vector<bool> free(static_cast<std::size_t>(m), false);
  for (Index j : unpenalized) {
    if (j < 0 || j >= m) throw DomainError("unpenalized index " + std::to_string(j) + " out of range");
    free[static_cast<std::size_t>(j)] = true;
  }
  PartialPenalty out{lambda, {}};
  for (Index j = 0; j < m; ++j) {
    if (!free[static_cast<std::size_t>(j)]) out.penalized.push_back(j);
  }
  return out;
}

std::vector<Index> PartialPenalty::unpenalized(Index m) const {
  std::vector<bool> pen(static_cast<std::size_t>(m), false);
  for (Index j : penalized) pen[static_cast<std::size_t>(j)] = true;
  std::vector<Index> out;
  for (Index j = 0; j < m; ++j) {
    if (!pen[static_cast<std::size_t>(j)]) out.push_back(j);
  }
  return out;
}

void validate(const PenaltySpec& spec) {
  std::visit(overloaded{
                 [](const NoPenalty&) {},
                 [](const RidgePenalty& s) { check_nonnegative(s.lambda, "lambda"); },
                 [](const PartialPenalty& s) { check_nonnegative(s.lambda, "lambda"); },
                 [](const GroupPenalty& s) {
                   check_nonnegative(s.lambda, "lambda");
                   check_nonnegative(s.mu, "mu");
                 },
                 [](const GeneralPenalty& s) {
                   const Matrix& k = s.matrix;
                   if (k.rows() != k.cols()) throw ShapeError("general penalty matrix must be square");
                   const double scale = std::max(1.0, k.cwiseAbs().maxCoeff());
                   if ((k - k.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
                     throw DomainError("general penalty matrix is not symmetric");
                   }
                   Eigen::SelfAdjointEigenSolver<Matrix> eig(k, Eigen::EigenvaluesOnly);
                   const double trace = std::max(k.trace(), 1.0);
                   if (k.rows() > 0 && eig.eigenvalues()(0) < -1e-10 * trace) {
                     throw DomainError("general penalty matrix is not positive semi-definite");
                   }
                 },
             },
             spec);
}

std::string describe(const PenaltySpec& spec) {
  return std::visit(overloaded{
                        [](const NoPenalty&) { return std::string("none"); },
                        [](const RidgePenalty& s) { return "ridge(lambda=" + std::to_string(s.lambda) + ")"; },
                        [](const PartialPenalty& s) {
                          return "partial(lambda=" + std::to_string(s.lambda) +
                                 ", penalized=" + std::to_string(s.penalized.size()) + ")";
                        },
                        [](const GroupPenalty& s) {
                          return "group(lambda=" + std::to_string(s.lambda) + ", mu=" + std::to_string(s.mu) +
                                 ", K=" + std::to_string(s.groups.group_count()) + ")";
                        },
                        [](const GeneralPenalty& s) {
                          return "general(" + std::to_string(s.matrix.rows()) + "x" +
                                 std::to_string(s.matrix.cols()) + ")";
                        },
                    },
                    spec);
}

Matrix build_penalty_matrix(const PenaltySpec& spec, Index m) {
  validate(spec);
  return std::visit(
      overloaded{
          [m](const NoPenalty&) -> Matrix { return Matrix::Zero(m, m); },
          [m](const RidgePenalty& s) -> Matrix { return s.lambda * Matrix::Identity(m, m); },
          [m](const PartialPenalty& s) -> Matrix {
            Matrix k = Matrix::Zero(m, m);
            for (Index j : s.penalized) {
              if (j < 0 || j >= m) throw ShapeError("penalized index " + std::to_string(j) + " out of range");
              k(j, j) = s.lambda;
            }
            return k;
          },
          [m](const GroupPenalty& s) -> Matrix {
            if (s.groups.feature_count() != m) {
              throw ShapeError("group structure covers " + std::to_string(s.groups.feature_count()) +
                               " features, expected " + std::to_string(m));
            }
            Matrix k = s.lambda * Matrix::Identity(m, m);
            for (Index g = 0; g < s.groups.group_count(); ++g) {
              const auto& members = s.groups.members(g);
              const double w = (s.mu - s.lambda) / static_cast<double>(members.size());
              for (Index i : members) {
                for (Index j : members) k(i, j) += w;
              }
            }
            return k;
          },
          [m](const GeneralPenalty& s) -> Matrix {
            if (s.matrix.rows() != m) {
              throw ShapeError("general penalty is " + std::to_string(s.matrix.rows()) + "x" +
                               std::to_string(s.matrix.cols()) + ", expected " + std::to_string(m));
            }
            return s.matrix;
          },
      },
      spec);
}

Matrix helmert_complement(Index m) {
  if (m < 2) throw DomainError("Helmert complement needs m >= 2");
  Matrix h = Matrix::Zero(m, m - 1);
  for (Index j = 1; j < m; ++j) {
    const double jj = static_cast<double>(j);
    const double s = 1.0 / std::sqrt(jj * (jj + 1.0));
    h.col(j - 1).head(j).setConstant(-s);
    h(j, j - 1) = jj * s;
  }
  return h;
}

PenaltyFactorization::PenaltyFactorization(std::optional<Matrix> basis, std::optional<GroupStructure> groups,
                                           Vector diag, double zero_tol, PenaltySpec source)
    : basis_(std::move(basis)),
      groups_(std::move(groups)),
      diag_(std::move(diag)),
      zero_tol_(zero_tol),
      source_(std::move(source)) {}

PenaltyFactorization PenaltyFactorization::dense(Matrix basis, Vector diag, double zero_tolerance) {
  if (basis.rows() != basis.cols() || basis.cols() != diag.size()) {
    throw ShapeError("factorization basis and diagonal sizes disagree");
  }
  Matrix k = basis * diag.asDiagonal() * basis.transpose();
  return PenaltyFactorization(std::move(basis), std::nullopt, std::move(diag), zero_tolerance,
                              GeneralPenalty{std::move(k)});
}

PenaltyFactorization PenaltyFactorization::grouped(GroupStructure groups, double lambda, double mu) {
  Vector diag(groups.feature_count());
  Index offset = 0;
  for (Index g = 0; g < groups.group_count(); ++g) {
    const Index pk = groups.size(g);
    diag(offset) = mu;
    diag.segment(offset + 1, pk - 1).setConstant(lambda);
    offset += pk;
  }
  const double tol = 1e-12 * (1.0 + lambda + mu);
  GroupPenalty source{lambda, mu, groups};
  return PenaltyFactorization(std::nullopt, std::move(groups), std::move(diag), tol, std::move(source));
}

Index PenaltyFactorization::zero_multiplicity() const {
  return static_cast<Index>((diag_.array() < zero_tol_).count());
}

Matrix PenaltyFactorization::transform_columns(const Matrix& x) const {
  if (x.cols() != dim()) throw ShapeError("column count does not match penalty dimension");
  if (basis_) return x * *basis_;
  const GroupStructure& groups = *groups_;
  Matrix out(x.rows(), dim());
  Index offset = 0;
  for (Index g = 0; g < groups.group_count(); ++g) {
    const auto& members = groups.members(g);
    const Index pk = static_cast<Index>(members.size());
    Vector sum = Vector::Zero(x.rows());
    for (Index j : members) sum += x.col(j);
    out.col(offset) = sum / std::sqrt(static_cast<double>(pk));
    if (pk > 1) helmert_columns(x, members, out.middleCols(offset + 1, pk - 1));
    offset += pk;
  }
  return out;
}

Matrix PenaltyFactorization::map_coefficients(const Matrix& a) const {
  if (a.rows() != dim()) throw ShapeError("coefficient rows do not match penalty dimension");
  if (basis_) return *basis_ * a;
  const GroupStructure& groups = *groups_;
  Matrix out(dim(), a.cols());
  for (Index c = 0; c < a.cols(); ++c) {
    Index offset = 0;
    for (Index g = 0; g < groups.group_count(); ++g) {
      const auto& members = groups.members(g);
      const Index pk = static_cast<Index>(members.size());
      const double mean_part = a(offset, c) / std::sqrt(static_cast<double>(pk));
      Vector contrast = pk > 1 ? helmert_apply(a.col(c).segment(offset + 1, pk - 1)) : Vector::Zero(1);
      for (Index i = 0; i < pk; ++i) out(members[static_cast<std::size_t>(i)], c) = mean_part + contrast(i);
      offset += pk;
    }
  }
  return out;
}

Matrix PenaltyFactorization::basis() const {
  if (basis_) return *basis_;
  return map_coefficients(Matrix::Identity(dim(), dim()));
}

Matrix PenaltyFactorization::reconstruct() const {
  const Matrix u = basis();
  return u * diag_.asDiagonal() * u.transpose();
}

PenaltyFactorization factor_group_penalty(const GroupPenalty& spec) {
  validate(spec);
  if (!(spec.lambda > 0.0)) {
    throw UnsupportedPenalty("group penalty factorization requires lambda > 0 (group homogeneity)");
  }
  return PenaltyFactorization::grouped(spec.groups, spec.lambda, spec.mu);
}

PenaltyFactorization factor_general_penalty(const Matrix& k) {
  validate(GeneralPenalty{k});
  Eigen::SelfAdjointEigenSolver<Matrix> eig(k);
  if (eig.info() != Eigen::Success) throw NumericalConsistency("eigendecomposition of penalty failed");
  // Descending order so penalized coordinates come first.
  const Index m = k.rows();
  Matrix basis = eig.eigenvectors().rowwise().reverse();
  Vector diag = eig.eigenvalues().reverse();
  const double tol = 1e-10 * std::max(1.0, m > 0 ? diag(0) : 0.0);
  for (Index i = 0; i < m; ++i) {
    if (diag(i) < tol) diag(i) = 0.0;
  }
  return PenaltyFactorization::dense(std::move(basis), std::move(diag), tol);
}

DataMatrix extend_features(const DataMatrix& x, const GroupStructure& groups, double a, double b) {
  if (groups.feature_count() != x.cols()) {
    throw ShapeError("group structure covers " + std::to_string(groups.feature_count()) +
                     " features but data has " + std::to_string(x.cols()));
  }
  if (!(a > 0.0) || !(b > 0.0)) throw DomainError("extension scales a and b must be positive");
  const Matrix& v = x.values();
  const Index n = x.rows();
  Matrix out(n, x.cols() + groups.group_count());
  std::vector<std::string> names;
  names.reserve(static_cast<std::size_t>(out.cols()));
  const double dev_scale = std::sqrt(1.0 / a);
  Index col = 0;
  for (Index g = 0; g < groups.group_count(); ++g) {
    const auto& members = groups.members(g);
    const double pk = static_cast<double>(members.size());
    Vector mean = Vector::Zero(n);
    for (Index j : members) mean += v.col(j);
    mean /= pk;
    for (Index j : members) {
      out.col(col++) = dev_scale * (v.col(j) - mean);
      names.push_back(x.column_names()[static_cast<std::size_t>(j)]);
    }
    out.col(col++) = std::sqrt(pk / b) * mean;
    names.push_back(groups.names()[static_cast<std::size_t>(g)] + ".mean");
  }
  return DataMatrix(std::move(out), std::move(names), x.centered());
}

}  // namespace grcca
