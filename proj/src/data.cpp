#include "grcca/data.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iterator>
#include <sstream>

#include "grcca/errors.hpp"

namespace grcca {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t");
  return std::string(s.substr(first, last - first + 1));
}

bool is_blank_record(const std::vector<std::string>& record) {
  return record.size() == 1 && trim(record.front()).empty();
}

// Columns that are pure roundoff (e.g. a deviation from an identical group
// mean) are judged against the matrix-wide scale instead of their own.
void check_centered(const Matrix& values) {
  const double global = values.cwiseAbs().maxCoeff();
  for (Index j = 0; j < values.cols(); ++j) {
    const double mean = values.col(j).mean();
    const double scale = values.col(j).cwiseAbs().maxCoeff();
    if (std::abs(mean) > 1e-10 * scale + 1e-13 * global) {
      throw StateError("column " + std::to_string(j) + " flagged centered but has mean " +
                       std::to_string(mean));
    }
  }
}

}  // namespace

std::vector<std::string> default_column_names(Index m, const std::string& prefix) {
  std::vector<std::string> names;
  names.reserve(static_cast<std::size_t>(m));
  for (Index j = 0; j < m; ++j) names.push_back(prefix + std::to_string(j + 1));
  return names;
}

DataMatrix::DataMatrix(Matrix values, std::vector<std::string> names, bool centered)
    : values_(std::move(values)), names_(std::move(names)), centered_(centered) {
  if (values_.rows() < 2) throw ShapeError("a data matrix needs at least 2 rows");
  if (values_.cols() < 1) throw ShapeError("a data matrix needs at least 1 column");
  if (static_cast<Index>(names_.size()) != values_.cols()) {
    throw ShapeError("column name count " + std::to_string(names_.size()) +
                     " does not match column count " + std::to_string(values_.cols()));
  }
  if (!values_.allFinite()) throw DomainError("data matrix contains non-finite entries");
  if (centered_) check_centered(values_);
}

DataMatrix::DataMatrix(Matrix values, bool centered)
    : DataMatrix(values, default_column_names(values.cols()), centered) {}

DataMatrix DataMatrix::select_rows(std::span<const Index> rows) const {
  Matrix out(static_cast<Index>(rows.size()), values_.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Index>(i)) = values_.row(rows[i]);
  return DataMatrix(std::move(out), names_, false);
}

DataMatrix DataMatrix::select_columns(std::span<const Index> columns) const {
  Matrix out(values_.rows(), static_cast<Index>(columns.size()));
  std::vector<std::string> names;
  names.reserve(columns.size());
  for (std::size_t j = 0; j < columns.size(); ++j) {
    out.col(static_cast<Index>(j)) = values_.col(columns[j]);
    names.push_back(names_[static_cast<std::size_t>(columns[j])]);
  }
  return DataMatrix(std::move(out), std::move(names), centered_);
}

CsvRecords read_csv_records(std::istream& in, bool has_header) {
  const std::string text{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool in_quotes = false;
  bool any = false;

  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    any = true;
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        field.push_back(c);
      }
      continue;
    }
    switch (c) {
      case '"':
        in_quotes = true;
        break;
      case ',':
        record.push_back(std::move(field));
        field.clear();
        break;
      case '\r':
        break;
      case '\n':
        record.push_back(std::move(field));
        field.clear();
        records.push_back(std::move(record));
        record.clear();
        any = false;
        break;
      default:
        field.push_back(c);
    }
  }
  if (in_quotes) throw ParseError("unterminated quoted field", static_cast<long>(records.size()), 0);
  if (any) {
    record.push_back(std::move(field));
    records.push_back(std::move(record));
  }
  while (!records.empty() && is_blank_record(records.back())) records.pop_back();
  if (records.empty()) throw EmptyInput("CSV input is empty");

  CsvRecords out;
  auto first = records.begin();
  if (has_header) {
    out.header = std::move(records.front());
    for (auto& h : out.header) h = trim(h);
    ++first;
  }
  out.rows.assign(std::make_move_iterator(first), std::make_move_iterator(records.end()));
  return out;
}

DataMatrix parse_csv(std::istream& in, bool has_header) {
  CsvRecords records = read_csv_records(in, has_header);
  if (records.rows.empty()) throw EmptyInput("CSV input has no data rows");

  const std::size_t m = has_header ? records.header.size() : records.rows.front().size();
  const auto n = static_cast<Index>(records.rows.size());
  Matrix values(n, static_cast<Index>(m));
  for (Index i = 0; i < n; ++i) {
    const auto& row = records.rows[static_cast<std::size_t>(i)];
    if (row.size() != m) {
      throw ParseError("row " + std::to_string(i + 1) + " has " + std::to_string(row.size()) +
                           " fields, expected " + std::to_string(m),
                       static_cast<long>(i + 1), 0);
    }
    for (std::size_t j = 0; j < m; ++j) {
      const std::string cell = trim(row[j]);
      double v = 0.0;
      const char* begin = cell.data();
      const char* end = begin + cell.size();
      if (!cell.empty() && *begin == '+') ++begin;
      const auto [ptr, ec] = std::from_chars(begin, end, v);
      const auto coords = "(row " + std::to_string(i + 1) + ", column " + std::to_string(j + 1) + ")";
      if (cell.empty() || ec != std::errc() || ptr != end) {
        throw ParseError("non-numeric cell '" + cell + "' " + coords, static_cast<long>(i + 1),
                         static_cast<long>(j + 1));
      }
      if (!std::isfinite(v)) {
        throw ParseError("non-finite cell '" + cell + "' " + coords, static_cast<long>(i + 1),
                         static_cast<long>(j + 1));
      }
      values(i, static_cast<Index>(j)) = v;
    }
  }
  auto names = has_header ? records.header : default_column_names(static_cast<Index>(m));
  return DataMatrix(std::move(values), std::move(names), false);
}

DataMatrix load_csv(const std::filesystem::path& path, bool has_header) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  return parse_csv(in, has_header);
}

Vector column_means(const DataMatrix& x) { return x.values().colwise().mean().transpose(); }

DataMatrix center_columns(const DataMatrix& x) {
  if (x.centered()) return x;
  Matrix v = x.values().rowwise() - x.values().colwise().mean();
  // second pass removes the roundoff left by large offsets
  v.rowwise() -= v.colwise().mean();
  return DataMatrix(std::move(v), x.column_names(), true);
}

DataMatrix subtract_means(const DataMatrix& x, const Vector& means) {
  if (means.size() != x.cols()) throw ShapeError("mean vector length does not match column count");
  Matrix v = x.values().rowwise() - means.transpose();
  return DataMatrix(std::move(v), x.column_names(), false);
}

DataMatrix scale_columns(const DataMatrix& x) {
  Matrix v = x.values();
  const double n = static_cast<double>(v.rows());
  for (Index j = 0; j < v.cols(); ++j) {
    const double mean = v.col(j).mean();
    const double sd = std::sqrt((v.col(j).array() - mean).square().sum() / n);
    if (sd > 0.0) v.col(j) /= sd;
  }
  return DataMatrix(std::move(v), x.column_names(), x.centered());
}

CovarianceBlock sample_covariance(const DataMatrix& x, const DataMatrix& y) {
  if (x.rows() != y.rows()) {
    throw ShapeError("row counts differ: " + std::to_string(x.rows()) + " vs " +
                     std::to_string(y.rows()));
  }
  if (!x.centered() || !y.centered()) throw StateError("sample_covariance requires centered inputs");
  const double n = static_cast<double>(x.rows());
  if (&x == &y) {
    Matrix s = Matrix::Zero(x.cols(), x.cols());
    s.selfadjointView<Eigen::Lower>().rankUpdate(x.values().transpose(), 1.0 / n);
    return CovarianceBlock(s.selfadjointView<Eigen::Lower>());
  }
  return CovarianceBlock(x.values().transpose() * y.values() / n);
}

namespace {

Matrix with_intercept(const DataMatrix& covariates) {
  Matrix design(covariates.rows(), covariates.cols() + 1);
  design.col(0).setOnes();
  design.rightCols(covariates.cols()) = covariates.values();
  return design;
}

}  // namespace

CovariateFit fit_covariates(const DataMatrix& x, const DataMatrix& covariates) {
  if (x.rows() != covariates.rows()) throw ShapeError("covariate row count does not match data");
  const Matrix design = with_intercept(covariates);
  Eigen::ColPivHouseholderQR<Matrix> qr(design);
  qr.setThreshold(1e-10);
  if (qr.rank() < design.cols()) {
    throw SingularDesign("covariate design [intercept | covariates] has rank " +
                         std::to_string(qr.rank()) + " < " + std::to_string(design.cols()));
  }
  return {qr.solve(x.values())};
}

DataMatrix CovariateFit::residuals(const DataMatrix& x, const DataMatrix& covariates) const {
  if (x.rows() != covariates.rows()) throw ShapeError("covariate row count does not match data");
  if (covariates.cols() + 1 != coefficients.rows() || x.cols() != coefficients.cols()) {
    throw ShapeError("covariate fit does not match the data widths");
  }
  return DataMatrix(x.values() - with_intercept(covariates) * coefficients, x.column_names());
}

DataMatrix regress_out(const DataMatrix& x, const DataMatrix& covariates) {
  Matrix residual = fit_covariates(x, covariates).residuals(x, covariates).values();
  // Residuals are orthogonal to the intercept column; remove the roundoff so
  // the centered invariant holds exactly.
  residual.rowwise() -= residual.colwise().mean();
  return DataMatrix(std::move(residual), x.column_names(), true);
}

Vector cohens_d(const DataMatrix& x, std::vector<std::string>* warnings) {
  const Matrix& v = x.values();
  const double n = static_cast<double>(v.rows());
  Vector d(v.cols());
  for (Index j = 0; j < v.cols(); ++j) {
    const double mean = v.col(j).mean();
    const double var = (v.col(j).array() - mean).square().sum() / (n - 1.0);
    if (var > 0.0) {
      d(j) = mean / std::sqrt(var);
    } else {
      d(j) = std::copysign(std::numeric_limits<double>::infinity(), mean);
      if (warnings) {
        warnings->push_back("column '" + x.column_names()[static_cast<std::size_t>(j)] +
                            "' has zero variance; Cohen's d reported as " +
                            (d(j) > 0 ? "+inf" : "-inf"));
      }
    }
  }
  return d;
}

std::vector<Index> select_by_cohens_d(const Vector& d, double threshold) {
  std::vector<Index> out;
  for (Index j = 0; j < d.size(); ++j) {
    if (d(j) > threshold) out.push_back(j);
  }
  return out;
}

}  // namespace grcca
