#include <doctest.h>

#include <sstream>

#include "grcca/errors.hpp"
#include "grcca/penalty.hpp"
#include "support.hpp"

using namespace grcca;

namespace {

double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

Vector sorted_eigenvalues(const Matrix& k) {
  return Eigen::SelfAdjointEigenSolver<Matrix>(k, Eigen::EigenvaluesOnly).eigenvalues();
}

}  // namespace

TEST_SUITE("group structure") {
  TEST_CASE("contiguous sizes") {
    const GroupStructure g = GroupStructure::contiguous({2, 3});
    CHECK(g.feature_count() == 5);
    CHECK(g.group_count() == 2);
    CHECK(g.names() == std::vector<std::string>{"G1", "G2"});
    CHECK(g.members(1) == std::vector<Index>{2, 3, 4});
  }

  TEST_CASE("empty group or bad ids are rejected") {
    CHECK_THROWS_AS(GroupStructure({0, 0, 2}, {"a", "b", "c"}), InputError);
    CHECK_THROWS_AS(GroupStructure({0, 3}, {"a", "b"}), InputError);
  }

  TEST_CASE("group map numbers groups by first appearance in feature order") {
    std::istringstream in("feature,group\nc,right\na,left\nb,right\n");
    const GroupStructure g = parse_group_map(in, {"a", "b", "c"});
    CHECK(g.names() == std::vector<std::string>{"left", "right"});
    CHECK(g.assignments() == std::vector<Index>{0, 1, 1});
  }

  TEST_CASE("group map errors") {
    std::istringstream unknown("feature,group\na,g\nz,g\n");
    CHECK_THROWS_AS(parse_group_map(unknown, {"a", "b"}), ParseError);
    std::istringstream twice("feature,group\na,g\na,h\nb,g\n");
    CHECK_THROWS_AS(parse_group_map(twice, {"a", "b"}), ParseError);
    std::istringstream missing("feature,group\na,g\n");
    CHECK_THROWS_AS(parse_group_map(missing, {"a", "b"}), InputError);
    std::istringstream wide("feature,group,extra\na,g,1\n");
    CHECK_THROWS_AS(parse_group_map(wide, {"a"}), ParseError);
  }
}

TEST_SUITE("penalty matrices") {
  TEST_CASE("ridge and partial") {
    const Matrix r = build_penalty_matrix(RidgePenalty{2.5}, 3);
    CHECK(r == 2.5 * Matrix::Identity(3, 3));
    const Matrix p = build_penalty_matrix(PartialPenalty::from_unpenalized(4.0, {1}, 3), 3);
    Vector expected(3);
    expected << 4.0, 0.0, 4.0;
    CHECK(p == Matrix(expected.asDiagonal()));
    CHECK(build_penalty_matrix(NoPenalty{}, 2) == Matrix::Zero(2, 2));
  }

  TEST_CASE("group with lambda = mu is a ridge") {
    testsupport::Gen gen(3);
    for (double lambda : {0.1, 1.0, 7.0}) {
      const GroupStructure g = gen.groups(9, 3);
      const Matrix k = build_penalty_matrix(GroupPenalty{lambda, lambda, g}, 9);
      CHECK(max_abs(k - lambda * Matrix::Identity(9, 9)) < 1e-14 * (1 + lambda));
    }
  }

  TEST_CASE("one group of size 2, lambda 2, mu 4") {
    const Matrix k = build_penalty_matrix(GroupPenalty{2.0, 4.0, GroupStructure::contiguous({2})}, 2);
    Matrix expected(2, 2);
    expected << 3, 1, 1, 3;
    CHECK(max_abs(k - expected) < 1e-15);
  }

  TEST_CASE("sizes (2,3), lambda 1, mu 0: spectrum is 0 twice and 1 three times") {
    const Matrix k = build_penalty_matrix(GroupPenalty{1.0, 0.0, GroupStructure::contiguous({2, 3})}, 5);
    const Vector ev = sorted_eigenvalues(k);
    CHECK(std::abs(ev(0)) < 1e-14);
    CHECK(std::abs(ev(1)) < 1e-14);
    for (Index i = 2; i < 5; ++i) CHECK(ev(i) == doctest::Approx(1.0).epsilon(1e-14));
  }

  TEST_CASE("group matrix matches the entrywise oracle") {
    testsupport::Gen gen(4);
    for (int t = 0; t < 20; ++t) {
      const Index p = gen.integer(2, 40);
      const GroupStructure g = gen.groups(p, gen.integer(1, std::min<Index>(p, 6)));
      const double lambda = gen.uniform(0.0, 5.0);
      const double mu = gen.uniform(0.0, 5.0);
      const Matrix k = build_penalty_matrix(GroupPenalty{lambda, mu, g}, p);
      CHECK(max_abs(k - testsupport::brute_group_penalty(g, lambda, mu)) < 1e-14 * (1 + lambda + mu));
    }
  }

  TEST_CASE("every spec builds a symmetric PSD matrix") {
    testsupport::Gen gen(5);
    for (int t = 0; t < 30; ++t) {
      const Index m = gen.integer(1, 25);
      const Matrix a = gen.matrix(m, m);
      std::vector<PenaltySpec> specs{NoPenalty{}, RidgePenalty{gen.uniform(0, 10)},
                                     PartialPenalty::from_unpenalized(gen.uniform(0, 10), {0}, m),
                                     GeneralPenalty{a * a.transpose()}};
      if (m >= 1) specs.push_back(GroupPenalty{gen.uniform(0, 10), gen.uniform(0, 10), gen.groups(m, 1)});
      for (const auto& spec : specs) {
        const Matrix k = build_penalty_matrix(spec, m);
        CHECK(max_abs(k - k.transpose()) < 1e-12 * (1 + max_abs(k)));
        CHECK(sorted_eigenvalues(k)(0) >= -1e-10 * std::max(1.0, k.trace()));
      }
    }
  }

  TEST_CASE("validation") {
    CHECK_THROWS_AS(validate(RidgePenalty{-1.0}), DomainError);
    CHECK_THROWS_AS(validate(GroupPenalty{1.0, -0.5, GroupStructure::contiguous({2})}), DomainError);
    Matrix asym(2, 2);
    asym << 1, 0.5, 0, 1;
    CHECK_THROWS_AS(validate(GeneralPenalty{asym}), InputError);
    Matrix indefinite(2, 2);
    indefinite << 1, 2, 2, 1;
    CHECK_THROWS_AS(validate(GeneralPenalty{indefinite}), InputError);
    CHECK_THROWS_AS(build_penalty_matrix(GroupPenalty{1, 1, GroupStructure::contiguous({2})}, 3), ShapeError);
    CHECK_THROWS_AS(build_penalty_matrix(GeneralPenalty{Matrix::Identity(2, 2)}, 3), ShapeError);
  }
}

TEST_SUITE("helmert") {
  TEST_CASE("m = 2 is (1, -1)/sqrt(2) up to sign") {
    const Matrix h = helmert_complement(2);
    REQUIRE(h.rows() == 2);
    REQUIRE(h.cols() == 1);
    CHECK(std::abs(std::abs(h(0, 0)) - 1 / std::sqrt(2.0)) < 1e-15);
    CHECK(h(0, 0) == doctest::Approx(-h(1, 0)));
  }

  TEST_CASE("defining properties at m = 4 and m = 100") {
    for (Index m : {4, 100}) {
      const Matrix h = helmert_complement(m);
      const double tol = m == 4 ? 1e-12 : 1e-10;
      CHECK(max_abs(h.transpose() * Vector::Ones(m)) < tol);
      CHECK(max_abs(h.transpose() * h - Matrix::Identity(m - 1, m - 1)) < tol);
      Matrix full(m, m);
      full << Vector::Constant(m, 1 / std::sqrt(static_cast<double>(m))), h;
      CHECK(max_abs(full.transpose() * full - Matrix::Identity(m, m)) < 1e-10);
      const Matrix projector = Matrix::Identity(m, m) - Matrix::Constant(m, m, 1.0 / static_cast<double>(m));
      CHECK(max_abs(h * h.transpose() - projector) < 1e-10);
    }
  }

  TEST_CASE("m < 2 is rejected") {
    CHECK_THROWS_AS(helmert_complement(1), DomainError);
    CHECK_THROWS_AS(helmert_complement(0), DomainError);
  }
}

TEST_SUITE("group factorization") {
  TEST_CASE("sizes (2,3), lambda = mu = 1: unit diagonal, identity reconstruction") {
    const PenaltyFactorization f = factor_group_penalty({1.0, 1.0, GroupStructure::contiguous({2, 3})});
    CHECK(max_abs(f.diag() - Vector::Ones(5)) == 0.0);
    CHECK(max_abs(f.reconstruct() - Matrix::Identity(5, 5)) < 1e-14);
    CHECK(f.zero_multiplicity() == 0);
  }

  TEST_CASE("single group of 5 with mu = 0 has one zero") {
    const PenaltyFactorization f = factor_group_penalty({3.0, 0.0, GroupStructure::contiguous({5})});
    CHECK(f.zero_multiplicity() == 1);
  }

  TEST_CASE("mu = 0 gives K zeros, tiny mu none") {
    const GroupStructure g = GroupStructure::contiguous({3, 1, 4, 2});
    CHECK(factor_group_penalty({2.0, 0.0, g}).zero_multiplicity() == 4);
    CHECK(factor_group_penalty({2.0, 1e-9, g}).zero_multiplicity() == 0);
  }

  TEST_CASE("D holds mu once and lambda p_k - 1 times per group") {
    const PenaltyFactorization f = factor_group_penalty({2.0, 0.5, GroupStructure::contiguous({3, 2})});
    std::vector<double> d(f.diag().data(), f.diag().data() + f.dim());
    std::sort(d.begin(), d.end());
    CHECK(d == std::vector<double>{0.5, 0.5, 2.0, 2.0, 2.0});
  }

  TEST_CASE("lambda = 0 is unsupported") {
    CHECK_THROWS_AS(factor_group_penalty({0.0, 1.0, GroupStructure::contiguous({2})}), UnsupportedPenalty);
  }

  TEST_CASE("reconstruction matches the dense matrix on random groups up to p = 500") {
    testsupport::Gen gen(12);
    for (int t = 0; t < 12; ++t) {
      const Index p = t < 10 ? gen.integer(2, 80) : 500;
      const GroupStructure g = gen.groups(p, gen.integer(1, std::min<Index>(p, 25)));
      const double lambda = t % 3 == 0 ? 2.0 : gen.uniform(0.01, 50.0);
      const double mu = t % 3 == 0 ? 0.5 : gen.uniform(0.0, 50.0);
      const PenaltyFactorization f = factor_group_penalty({lambda, mu, g});
      const Matrix k = testsupport::brute_group_penalty(g, lambda, mu);
      CHECK(max_abs(f.reconstruct() - k) <= 1e-10 * (1 + lambda + mu));
      const Matrix u = f.basis();
      CHECK(max_abs(u.transpose() * u - Matrix::Identity(p, p)) < 1e-10);
    }
  }

  TEST_CASE("structured products agree with the materialized basis") {
    testsupport::Gen gen(13);
    for (int t = 0; t < 15; ++t) {
      const Index p = gen.integer(2, 60);
      const GroupStructure g = gen.groups(p, gen.integer(1, std::min<Index>(p, 8)));
      const PenaltyFactorization f = factor_group_penalty({gen.uniform(0.1, 3), gen.uniform(0, 3), g});
      const Matrix u = f.basis();
      const Matrix x = gen.matrix(7, p);
      const Matrix a = gen.matrix(p, 3);
      CHECK(max_abs(f.transform_columns(x) - x * u) < 1e-12 * (1 + max_abs(x)) * static_cast<double>(p));
      CHECK(max_abs(f.map_coefficients(a) - u * a) < 1e-12 * (1 + max_abs(a)) * static_cast<double>(p));
    }
  }
}

TEST_SUITE("general factorization") {
  TEST_CASE("reconstructs random PSD matrices and counts zeros") {
    testsupport::Gen gen(14);
    for (int t = 0; t < 20; ++t) {
      const Index m = gen.integer(2, 30);
      const Index rank = gen.integer(1, m);
      const Matrix b = gen.matrix(m, rank);
      const Matrix k = b * b.transpose();
      const PenaltyFactorization f = factor_general_penalty(k);
      CHECK(max_abs(f.reconstruct() - k) < 1e-8 * (1 + f.diag().maxCoeff()));
      CHECK(f.zero_multiplicity() == m - rank);
      CHECK_FALSE(f.structured());
      for (Index i = 1; i < m; ++i) CHECK(f.diag()(i - 1) >= f.diag()(i));
    }
  }

  TEST_CASE("zero matrix is all zeros") {
    CHECK(factor_general_penalty(Matrix::Zero(3, 3)).zero_multiplicity() == 3);
  }
}

TEST_SUITE("feature extension") {
  TEST_CASE("single group of 2 with a = b = 1") {
    Matrix x(3, 2);
    x << 1, 3, -2, 0, 1, -3;
    const DataMatrix e = extend_features(DataMatrix(x, true), GroupStructure::contiguous({2}), 1.0, 1.0);
    REQUIRE(e.cols() == 3);
    const Vector mean = x.rowwise().mean();
    CHECK(max_abs(e.values().col(0) - (x.col(0) - mean)) < 1e-15);
    CHECK(max_abs(e.values().col(1) - (x.col(1) - mean)) < 1e-15);
    CHECK(max_abs(e.values().col(2) - std::sqrt(2.0) * mean) < 1e-15);
    CHECK(e.centered());
  }

  TEST_CASE("equal columns in a group give exactly zero deviations") {
    Matrix x(4, 3);
    x.col(0) << 1, -1, 2, -2;
    x.col(1) = x.col(0);
    x.col(2) = x.col(0);
    const DataMatrix e = extend_features(DataMatrix(x, true), GroupStructure::contiguous({3}), 1.0, 1.0);
    CHECK(e.values().leftCols(3).cwiseAbs().maxCoeff() == 0.0);
  }

  TEST_CASE("group-major layout with scaling, non-contiguous groups") {
    testsupport::Gen gen(15);
    const GroupStructure g({1, 0, 1, 0, 0}, {"b", "a"});
    const Matrix x = testsupport::center(gen.matrix(6, 5));
    const double a = 4.0, b = 9.0;
    const DataMatrix e = extend_features(DataMatrix(x, true), g, a, b);
    REQUIRE(e.cols() == 7);
    // id 0 is "b" = features {1, 3, 4}; id 1 is "a" = features {0, 2}
    const Vector mb = (x.col(1) + x.col(3) + x.col(4)) / 3.0;
    const Vector ma = (x.col(0) + x.col(2)) / 2.0;
    CHECK(max_abs(e.values().col(0) - (x.col(1) - mb) / 2.0) < 1e-14);
    CHECK(max_abs(e.values().col(2) - (x.col(4) - mb) / 2.0) < 1e-14);
    CHECK(max_abs(e.values().col(3) - std::sqrt(3.0 / 9.0) * mb) < 1e-14);
    CHECK(max_abs(e.values().col(5) - (x.col(2) - ma) / 2.0) < 1e-14);
    CHECK(max_abs(e.values().col(6) - std::sqrt(2.0 / 9.0) * ma) < 1e-14);
    CHECK(e.column_names()[3] == "b.mean");
    CHECK(e.column_names()[6] == "a.mean");
  }

  TEST_CASE("bad scale factors and widths") {
    const DataMatrix x(Matrix::Zero(3, 2), true);
    CHECK_THROWS_AS(extend_features(x, GroupStructure::contiguous({2}), 0.0, 1.0), DomainError);
    CHECK_THROWS_AS(extend_features(x, GroupStructure::contiguous({3}), 1.0, 1.0), ShapeError);
  }
}
