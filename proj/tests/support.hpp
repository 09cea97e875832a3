#pragma once

// Test-only generators and independent reference computations. Nothing here
// calls into the reduction code under test.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "grcca/data.hpp"
#include "grcca/penalty.hpp"

namespace testsupport {

using grcca::DataMatrix;
using grcca::Index;
using grcca::Matrix;
using grcca::Vector;

class Gen {
 public:
  explicit Gen(std::uint64_t seed) : engine_(seed) {}

  double normal() { return normal_(engine_); }
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(engine_); }
  Index integer(Index lo, Index hi) { return std::uniform_int_distribution<Index>(lo, hi)(engine_); }

  Matrix matrix(Index rows, Index cols) {
    Matrix m(rows, cols);
    for (Index j = 0; j < cols; ++j)
      for (Index i = 0; i < rows; ++i) m(i, j) = normal();
    return m;
  }

  /// Rows of x with a shared latent signal planted in the first columns of y.
  std::pair<Matrix, Matrix> correlated(Index n, Index p, Index q, double strength) {
    Matrix x = matrix(n, p);
    Matrix y = matrix(n, q);
    for (Index j = 0; j < q; ++j) y.col(j) += strength * x.col(j % p);
    return {x, y};
  }

  /// Random partition of p features into k nonempty groups, not contiguous.
  grcca::GroupStructure groups(Index p, Index k) {
    std::vector<Index> a(static_cast<std::size_t>(p));
    for (Index j = 0; j < p; ++j) a[static_cast<std::size_t>(j)] = j < k ? j : integer(0, k - 1);
    std::shuffle(a.begin(), a.end(), engine_);
    // Renumber by first appearance so group ids follow feature order.
    std::vector<Index> relabel(static_cast<std::size_t>(k), -1);
    Index next = 0;
    for (auto& g : a) {
      auto& r = relabel[static_cast<std::size_t>(g)];
      if (r < 0) r = next++;
      g = r;
    }
    std::vector<std::string> names;
    for (Index g = 0; g < k; ++g) names.push_back("G" + std::to_string(g + 1));
    return grcca::GroupStructure(a, names);
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

/// Column-centers with a plain loop.
inline Matrix center(const Matrix& m) {
  Matrix c = m;
  for (Index j = 0; j < m.cols(); ++j) {
    double s = 0.0;
    for (Index i = 0; i < m.rows(); ++i) s += m(i, j);
    const double mean = s / static_cast<double>(m.rows());
    for (Index i = 0; i < m.rows(); ++i) c(i, j) -= mean;
  }
  return c;
}

inline DataMatrix centered_data(const Matrix& m) { return DataMatrix(center(m), true); }

/// (1/n) X^T Y by an explicit triple loop.
inline Matrix brute_covariance(const Matrix& x, const Matrix& y) {
  Matrix s = Matrix::Zero(x.cols(), y.cols());
  for (Index a = 0; a < x.cols(); ++a)
    for (Index b = 0; b < y.cols(); ++b) {
      double acc = 0.0;
      for (Index i = 0; i < x.rows(); ++i) acc += x(i, a) * y(i, b);
      s(a, b) = acc / static_cast<double>(x.rows());
    }
  return s;
}

/// Group penalty lambda (I - C) + mu C assembled entry by entry.
inline Matrix brute_group_penalty(const grcca::GroupStructure& g, double lambda, double mu) {
  const Index p = g.feature_count();
  Matrix k = Matrix::Zero(p, p);
  for (Index i = 0; i < p; ++i) {
    for (Index j = 0; j < p; ++j) {
      const Index gi = g.assignments()[static_cast<std::size_t>(i)];
      const Index gj = g.assignments()[static_cast<std::size_t>(j)];
      const double c = gi == gj ? 1.0 / static_cast<double>(g.size(gi)) : 0.0;
      k(i, j) = lambda * ((i == j ? 1.0 : 0.0) - c) + mu * c;
    }
  }
  return k;
}

struct OracleFit {
  Vector rho;
  Matrix alpha;
  Matrix beta;
};

/// Regularized CCA as the generalized symmetric eigenproblem
/// Sxy (Syy+Ky)^{-1} Syx a = rho^2 (Sxx+Kx) a, on centered data.
inline OracleFit oracle_cca(const Matrix& xc, const Matrix& yc, const Matrix& kx, const Matrix& ky, Index r) {
  const Matrix sxx = brute_covariance(xc, xc) + kx;
  const Matrix syy = brute_covariance(yc, yc) + ky;
  const Matrix sxy = brute_covariance(xc, yc);
  const Eigen::LDLT<Matrix> syy_ldlt(syy);
  Matrix a = sxy * syy_ldlt.solve(sxy.transpose());
  a = 0.5 * (a + a.transpose()).eval();
  Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> ges(a, sxx);
  const Index p = xc.cols();
  OracleFit out{Vector(r), Matrix(p, r), Matrix(yc.cols(), r)};
  for (Index i = 0; i < r; ++i) {
    const Index idx = p - 1 - i;
    const double ev = std::max(0.0, ges.eigenvalues()(idx));
    out.rho(i) = std::sqrt(ev);
    out.alpha.col(i) = ges.eigenvectors().col(idx);
    out.beta.col(i) = syy_ldlt.solve(sxy.transpose() * out.alpha.col(i)) / out.rho(i);
  }
  return out;
}

/// ||u - s v|| / ||v|| with the sign s that best aligns u to v.
inline double aligned_relative_error(const Vector& u, const Vector& v) {
  const double s = u.dot(v) >= 0.0 ? 1.0 : -1.0;
  return (u - s * v).norm() / v.norm();
}

/// Two-pass Pearson correlation.
inline double textbook_correlation(const Vector& u, const Vector& v) {
  const double n = static_cast<double>(u.size());
  double mu = 0.0, mv = 0.0;
  for (Index i = 0; i < u.size(); ++i) {
    mu += u(i);
    mv += v(i);
  }
  mu /= n;
  mv /= n;
  double suv = 0.0, suu = 0.0, svv = 0.0;
  for (Index i = 0; i < u.size(); ++i) {
    suv += (u(i) - mu) * (v(i) - mv);
    suu += (u(i) - mu) * (u(i) - mu);
    svv += (v(i) - mv) * (v(i) - mv);
  }
  return suv / std::sqrt(suu * svv);
}

}  // namespace testsupport
