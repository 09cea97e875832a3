#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace grcca {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// An n x m table of observations with named columns.
///
/// Rows are observations, columns are features. The `centered` flag records
/// that every column mean is zero (up to 1e-10 of the column's absolute
/// scale); the constructor verifies the claim, so a centered DataMatrix can
/// be fed to the solvers directly.
class DataMatrix {
 public:
  DataMatrix(Matrix values, std::vector<std::string> names, bool centered = false);
  /// Columns are named V1..Vm.
  explicit DataMatrix(Matrix values, bool centered = false);

  const Matrix& values() const noexcept { return values_; }
  const std::vector<std::string>& column_names() const noexcept { return names_; }
  bool centered() const noexcept { return centered_; }
  Index rows() const noexcept { return values_.rows(); }
  Index cols() const noexcept { return values_.cols(); }

  /// Row subset; the result is never flagged centered.
  DataMatrix select_rows(std::span<const Index> rows) const;
  /// Column subset; keeps the centered flag.
  DataMatrix select_columns(std::span<const Index> columns) const;

 private:
  Matrix values_;
  std::vector<std::string> names_;
  bool centered_;
};

std::vector<std::string> default_column_names(Index m, const std::string& prefix = "V");

/// Sample covariance block (1/n) X^T Y. The 1/n convention is fixed; it is
/// the scale the penalty parameters are expressed against.
class CovarianceBlock {
 public:
  explicit CovarianceBlock(Matrix m) : matrix_(std::move(m)) {}
  const Matrix& matrix() const noexcept { return matrix_; }

 private:
  Matrix matrix_;
};

/// Raw records of a CSV file: optional header plus rows of cells.
struct CsvRecords {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

/// RFC-4180 style reader (quoted fields, "" escapes, CRLF). Trailing blank
/// lines are ignored.
CsvRecords read_csv_records(std::istream& in, bool has_header);

DataMatrix parse_csv(std::istream& in, bool has_header);
DataMatrix load_csv(const std::filesystem::path& path, bool has_header = true);

DataMatrix center_columns(const DataMatrix& x);
Vector column_means(const DataMatrix& x);
/// Subtracts externally supplied means (e.g. training-fold means from
/// validation rows). The result is flagged centered only when the means
/// happen to match its own.
DataMatrix subtract_means(const DataMatrix& x, const Vector& means);
/// Divides every column by its 1/n standard deviation; zero-variance columns
/// are left untouched. Opt-in only.
DataMatrix scale_columns(const DataMatrix& x);

CovarianceBlock sample_covariance(const DataMatrix& x, const DataMatrix& y);

/// Least-squares coefficients of x on [1 | covariates], reusable on rows
/// that did not take part in the fit.
struct CovariateFit {
  Matrix coefficients;  // (1 + c) x m

  /// x minus its prediction from `covariates`; never flagged centered.
  DataMatrix residuals(const DataMatrix& x, const DataMatrix& covariates) const;
};

/// Throws SingularDesign when [1 | covariates] is rank deficient.
CovariateFit fit_covariates(const DataMatrix& x, const DataMatrix& covariates);

/// Residuals of every column of x regressed on [1 | covariates].
DataMatrix regress_out(const DataMatrix& x, const DataMatrix& covariates);

/// Per-column mean / sample sd (1/(n-1)). Zero-variance columns yield +/-inf
/// (signed by the mean) and append a message to `warnings` when given.
Vector cohens_d(const DataMatrix& x, std::vector<std::string>* warnings = nullptr);

/// Column indices whose Cohen's d exceeds the threshold.
std::vector<Index> select_by_cohens_d(const Vector& d, double threshold);

}  // namespace grcca
