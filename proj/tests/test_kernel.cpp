#include <doctest.h>
#include <numeric>

#include "grcca/errors.hpp"
#include "grcca/kernel.hpp"
#include "support.hpp"

using namespace grcca;
using testsupport::Gen;

namespace {

struct Data {
  DataMatrix x;
  DataMatrix y;
};

Data make(Gen& gen, Index n, Index p, Index q, double strength = 0.8) {
  auto [x, y] = gen.correlated(n, p, q, strength);
  return {testsupport::centered_data(x), testsupport::centered_data(y)};
}

// Correlations and first-pair variates of `got` against `want` on the same data.
void check_same_fit(const FittedCCA& got, const FittedCCA& want, const Data& d, double tol) {
  REQUIRE(got.components() == want.components());
  CHECK((got.correlations - want.correlations).cwiseAbs().maxCoeff() < tol);
  const Vector xa = d.x.values() * got.alpha.col(0);
  const Vector xb = d.x.values() * want.alpha.col(0);
  CHECK(testsupport::aligned_relative_error(xa, xb) < tol);
  const Vector ya = d.y.values() * got.beta.col(0);
  const Vector yb = d.y.values() * want.beta.col(0);
  CHECK(testsupport::aligned_relative_error(ya, yb) < tol);
}

Matrix alpha_metric(const FittedCCA& fit, const DataMatrix& x, const Matrix& k) {
  const Matrix s = x.values().transpose() * x.values() / static_cast<double>(x.rows()) + k;
  return fit.alpha.transpose() * s * fit.alpha;
}

}  // namespace

TEST_SUITE("row factorization") {
  TEST_CASE("X = R V^T with orthonormal V, wide and tall") {
    Gen gen(1);
    for (auto [n, m] : {std::pair<Index, Index>{5, 40}, {40, 5}, {7, 7}}) {
      const Matrix x = gen.matrix(n, m);
      const RowFactorization f = factor_rows(x);
      const Index k = std::min(n, m);
      CHECK(f.r.cols() == k);
      CHECK(f.v.cols() == k);
      CHECK((f.r * f.v.transpose() - x).cwiseAbs().maxCoeff() < 1e-12);
      CHECK((f.v.transpose() * f.v - Matrix::Identity(k, k)).cwiseAbs().maxCoeff() < 1e-12);
    }
  }
}

TEST_SUITE("rcca kernel") {
  TEST_CASE("n=20, p=200, lambda 0.5 matches the direct covariance-space fit") {
    Gen gen(2);
    const Data d = make(gen, 20, 200, 4);
    const FittedCCA kernel = rcca_kernel_fit(d.x, d.y, 0.5, NoPenalty{}, 4);
    const FittedCCA direct = fit_direct(d.x, d.y, RidgePenalty{0.5}, NoPenalty{}, 4);
    check_same_fit(kernel, direct, d, 1e-8);
    CHECK(kernel.path == FitPath::rcca_kernel);
  }

  TEST_CASE("agrees with the generalized eigenproblem oracle and a Y-side ridge") {
    Gen gen(3);
    for (int t = 0; t < 10; ++t) {
      const Data d = make(gen, 12, 60, 3);
      const double lambda = gen.uniform(0.05, 5.0);
      const FittedCCA kernel = rcca_kernel_fit(d.x, d.y, lambda, RidgePenalty{0.2}, 3);
      const auto oracle = testsupport::oracle_cca(d.x.values(), d.y.values(), lambda * Matrix::Identity(60, 60),
                                                  0.2 * Matrix::Identity(3, 3), 3);
      CHECK((kernel.correlations - oracle.rho).cwiseAbs().maxCoeff() < 1e-9);
      CHECK(testsupport::aligned_relative_error(d.x.values() * kernel.alpha.col(0),
                                                d.x.values() * oracle.alpha.col(0)) < 1e-7);
    }
  }

  TEST_CASE("coefficients satisfy the regularized metric constraints") {
    Gen gen(4);
    const Data d = make(gen, 15, 80, 3);
    const FittedCCA fit = rcca_kernel_fit(d.x, d.y, 2.0, NoPenalty{}, 3);
    const Matrix g = alpha_metric(fit, d.x, 2.0 * Matrix::Identity(80, 80));
    CHECK((g - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-8);
  }

  TEST_CASE("lambda = 0 with p > n is singular") {
    Gen gen(5);
    const Data d = make(gen, 8, 30, 2);
    CHECK_THROWS_AS(rcca_kernel_fit(d.x, d.y, 0.0, NoPenalty{}, 1), SingularCovariance);
  }

  TEST_CASE("uncentered input is rejected") {
    Gen gen(6);
    const DataMatrix raw(gen.matrix(6, 10));
    const DataMatrix y = testsupport::centered_data(gen.matrix(6, 2));
    CHECK_THROWS_AS(rcca_kernel_fit(raw, y, 1.0, NoPenalty{}, 1), StateError);
  }
}

TEST_SUITE("prcca kernel") {
  TEST_CASE("n=15, p1=60, p2=4, lambda 1 matches the direct block-penalty fit") {
    Gen gen(7);
    const Data d1 = make(gen, 15, 64, 3);
    std::vector<Index> head(60), tail(4);
    std::iota(head.begin(), head.end(), Index{0});
    std::iota(tail.begin(), tail.end(), Index{60});
    const DataMatrix x1 = d1.x.select_columns(head);
    const DataMatrix x2 = d1.x.select_columns(tail);
    const FittedCCA kernel = prcca_kernel_fit(x1, x2, d1.y, 1.0, NoPenalty{}, 3);
    const FittedCCA direct = fit_direct(d1.x, d1.y, PartialPenalty{1.0, head}, NoPenalty{}, 3);
    check_same_fit(kernel, direct, d1, 1e-8);
    CHECK(kernel.path == FitPath::prcca_kernel);
  }

  TEST_CASE("index form keeps the original column order") {
    Gen gen(8);
    for (int t = 0; t < 10; ++t) {
      const Data d = make(gen, 14, 50, 2);
      const std::vector<Index> free_cols{3, 17, 41};
      const FittedCCA kernel = prcca_kernel_fit(d.x, free_cols, d.y, 0.7, RidgePenalty{0.1}, 2);
      const FittedCCA direct =
          fit_direct(d.x, d.y, PartialPenalty::from_unpenalized(0.7, free_cols, 50), RidgePenalty{0.1}, 2);
      check_same_fit(kernel, direct, d, 1e-8);
      CHECK((kernel.alpha - direct.alpha).cwiseAbs().maxCoeff() < 1e-7 * direct.alpha.cwiseAbs().maxCoeff());
    }
  }

  TEST_CASE("empty unpenalized set equals ridge") {
    Gen gen(9);
    const Data d = make(gen, 10, 30, 2);
    const FittedCCA a = prcca_kernel_fit(d.x, std::vector<Index>{}, d.y, 0.4, NoPenalty{}, 2);
    const FittedCCA b = rcca_kernel_fit(d.x, d.y, 0.4, NoPenalty{}, 2);
    check_same_fit(a, b, d, 1e-10);
  }

  TEST_CASE("unpenalized block as wide as n is not identifiable") {
    Gen gen(10);
    const Data d = make(gen, 6, 20, 2);
    std::vector<Index> free_cols{0, 1, 2, 3, 4, 5};
    CHECK_THROWS_AS(prcca_kernel_fit(d.x, free_cols, d.y, 1.0, NoPenalty{}, 1), IdentifiabilityError);
  }

  TEST_CASE("collinear unpenalized block is not identifiable") {
    Gen gen(11);
    Matrix x = testsupport::center(gen.matrix(10, 12));
    x.col(1) = 2.0 * x.col(0);
    const DataMatrix xd(x, true);
    const DataMatrix y = testsupport::centered_data(gen.matrix(10, 2));
    CHECK_THROWS_AS(prcca_kernel_fit(xd, std::vector<Index>{0, 1}, y, 1.0, NoPenalty{}, 1), IdentifiabilityError);
  }

  TEST_CASE("duplicate or out-of-range indices") {
    Gen gen(12);
    const Data d = make(gen, 8, 10, 2);
    CHECK_THROWS_AS(prcca_kernel_fit(d.x, std::vector<Index>{1, 1}, d.y, 1.0, NoPenalty{}, 1), DomainError);
    CHECK_THROWS_AS(prcca_kernel_fit(d.x, std::vector<Index>{10}, d.y, 1.0, NoPenalty{}, 1), DomainError);
  }
}

TEST_SUITE("general reduction") {
  TEST_CASE("random PSD K on p = 12 recovers the direct solution") {
    Gen gen(13);
    for (int t = 0; t < 10; ++t) {
      const Data d = make(gen, 9, 12, 2);
      const Index rank = t % 2 == 0 ? 12 : 9;
      const Matrix b = gen.matrix(12, rank);
      const Matrix k = b * b.transpose() / 12.0;
      const FittedCCA reduced = general_fit(d.x, d.y, factor_general_penalty(k), NoPenalty{}, 2);
      const FittedCCA direct = fit_direct(d.x, d.y, GeneralPenalty{k}, NoPenalty{}, 2);
      check_same_fit(reduced, direct, d, 1e-8);
      CHECK(reduced.path == FitPath::general_eigen);
      CHECK((alpha_metric(reduced, d.x, k) - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-8);
    }
  }

  TEST_CASE("recovery map is consistent with the transformed matrix") {
    Gen gen(14);
    for (int t = 0; t < 10; ++t) {
      const Index p = gen.integer(3, 25);
      const DataMatrix x = testsupport::centered_data(gen.matrix(8, p));
      const Matrix b = gen.matrix(p, gen.integer(1, p));
      const GeneralReduction red = general_reduce(x, factor_general_penalty(b * b.transpose()));
      const Matrix a = gen.matrix(p, 2);
      const Matrix lhs = x.values() * red.recover(a);
      const Matrix rhs = red.transformed.values() * a;
      CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-10 * (1 + rhs.cwiseAbs().maxCoeff()));
      CHECK(red.penalized + red.unpenalized == p);
    }
  }

  TEST_CASE("penalized coordinates carry a unit ridge") {
    Gen gen(15);
    const Index p = 6;
    const DataMatrix x = testsupport::centered_data(gen.matrix(10, p));
    const Matrix b = gen.matrix(p, 4);
    const Matrix k = b * b.transpose();
    const GeneralReduction red = general_reduce(x, factor_general_penalty(k));
    // alpha^T K alpha = |head of reduced alpha|^2 for alpha = recover(a)
    const Matrix a = gen.matrix(p, 1);
    const Vector alpha = red.recover(a);
    CHECK(alpha.dot(k * alpha) == doctest::Approx(a.topRows(red.penalized).squaredNorm()).epsilon(1e-10));
  }
}

TEST_SUITE("grcca") {
  TEST_CASE("eigen and extend paths agree with each other and with the direct fit") {
    Gen gen(16);
    for (int t = 0; t < 12; ++t) {
      const Data d = make(gen, 12, 30, 3);
      const GroupStructure g = gen.groups(30, 5);
      const double lambda = gen.uniform(0.1, 10.0);
      const double mu = t % 3 == 0 ? 0.0 : gen.uniform(0.01, 10.0);
      const FittedCCA eigen = grcca_fit(d.x, d.y, g, lambda, mu, NoPenalty{}, 3, GroupPath::eigen);
      const FittedCCA extend = grcca_fit(d.x, d.y, g, lambda, mu, NoPenalty{}, 3, GroupPath::extend);
      const FittedCCA direct = fit_direct(d.x, d.y, GroupPenalty{lambda, mu, g}, NoPenalty{}, 3);
      check_same_fit(eigen, extend, d, 1e-8);
      check_same_fit(eigen, direct, d, 1e-8);
      CHECK(eigen.path == FitPath::grcca_eigen);
      CHECK(extend.path == FitPath::grcca_extend);
      const Matrix k = testsupport::brute_group_penalty(g, lambda, mu);
      CHECK((alpha_metric(extend, d.x, k) - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-8);
      CHECK((alpha_metric(eigen, d.x, k) - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-8);
    }
  }

  TEST_CASE("lambda = mu reproduces RCCA") {
    Gen gen(17);
    const Data d = make(gen, 10, 25, 2);
    const GroupStructure g = gen.groups(25, 4);
    for (GroupPath path : {GroupPath::eigen, GroupPath::extend}) {
      const FittedCCA a = grcca_fit(d.x, d.y, g, 3.0, 3.0, NoPenalty{}, 2, path);
      const FittedCCA b = rcca_kernel_fit(d.x, d.y, 3.0, NoPenalty{}, 2);
      check_same_fit(a, b, d, 1e-9);
    }
  }

  TEST_CASE("automatic path follows the width heuristic") {
    CHECK(resolve_group_path(GroupPath::automatic, 10, 15, 5) == GroupPath::extend);
    CHECK(resolve_group_path(GroupPath::automatic, 10, 100, 5) == GroupPath::eigen);
    CHECK(resolve_group_path(GroupPath::eigen, 10, 15, 5) == GroupPath::eigen);
  }

  TEST_CASE("lambda = 0 is unsupported") {
    Gen gen(18);
    const Data d = make(gen, 8, 10, 2);
    CHECK_THROWS_AS(grcca_fit(d.x, d.y, GroupStructure::contiguous({5, 5}), 0.0, 1.0, NoPenalty{}, 1),
                    UnsupportedPenalty);
  }

  TEST_CASE("mu = 0 with more groups than rows is not identifiable") {
    Gen gen(19);
    const Data d = make(gen, 6, 16, 2);
    std::vector<Index> sizes(8, 2);
    CHECK_THROWS_AS(grcca_fit(d.x, d.y, GroupStructure::contiguous(sizes), 1.0, 0.0, NoPenalty{}, 1,
                              GroupPath::extend),
                    IdentifiabilityError);
  }
}
