#include <catch_amalgamated.hpp>

#include "evans/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <random>

using namespace evans;
using Catch::Approx;

namespace {

ComplexMatrix random_matrix(int rows, int cols, unsigned seed) {
    std::mt19937 gen(seed);
    std::normal_distribution<double> d;
    ComplexMatrix m(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) m(i, j) = Complex(d(gen), d(gen));
    return m;
}

// Laplace expansion along the first row.
Complex cofactor_det(const ComplexMatrix& m) {
    const auto n = m.rows();
    if (n == 1) return m(0, 0);
    Complex acc = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
        ComplexMatrix minor(n - 1, n - 1);
        for (Eigen::Index r = 1; r < n; ++r) {
            Eigen::Index c2 = 0;
            for (Eigen::Index c = 0; c < n; ++c) {
                if (c == j) continue;
                minor(r - 1, c2++) = m(r, c);
            }
        }
        acc += ((j % 2 == 0) ? 1.0 : -1.0) * m(0, j) * cofactor_det(minor);
    }
    return acc;
}

bool contains(const ComplexVector& values, Complex z, double tol) {
    for (Eigen::Index i = 0; i < values.size(); ++i)
        if (std::abs(values(i) - z) < tol) return true;
    return false;
}

}  // namespace

TEST_CASE("eig_dense on a diagonal matrix", "[eig]") {
    ComplexMatrix m = ComplexMatrix::Zero(3, 3);
    m(0, 0) = 2.0;
    m(1, 1) = -1.0;
    m(2, 2) = Complex(0.0, 0.5);
    const auto e = eig_dense(m);
    for (int k = 0; k < 3; ++k) {
        REQUIRE(contains(e.values, m(k, k), 1e-14));
    }
    for (Eigen::Index j = 0; j < 3; ++j) {
        // each eigenvector is a (phase multiple of a) standard basis vector
        Eigen::Index imax;
        e.vectors.col(j).cwiseAbs().maxCoeff(&imax);
        CHECK(std::abs(e.vectors(imax, j)) == Approx(1.0).margin(1e-14));
        CHECK(std::abs(e.values(j) - m(imax, imax)) < 1e-14);
    }
}

TEST_CASE("eig_dense on the swap matrix and the KdV companion matrix", "[eig]") {
    ComplexMatrix swap(2, 2);
    swap << 0, 1, 1, 0;
    auto e = eig_dense(swap);
    CHECK(contains(e.values, 1.0, 1e-14));
    CHECK(contains(e.values, -1.0, 1e-14));

    // nu^3 - 5 nu = 0
    ComplexMatrix comp(3, 3);
    comp << 0, 1, 0, 0, 0, 1, 0, 5, 0;
    e = eig_dense(comp);
    CHECK(contains(e.values, 0.0, 1e-12));
    CHECK(contains(e.values, std::sqrt(5.0), 1e-12));
    CHECK(contains(e.values, -std::sqrt(5.0), 1e-12));
    CHECK(e.relative_residual(comp) <= 1e-10);
}

TEST_CASE("eig_dense residual invariant and unit columns", "[eig]") {
    for (unsigned seed : {1u, 2u, 3u}) {
        const ComplexMatrix m = random_matrix(32, 32, seed);
        const auto e = eig_dense(m);
        CHECK(e.relative_residual(m) <= 1e-10);
        for (Eigen::Index j = 0; j < m.cols(); ++j) CHECK(e.vectors.col(j).norm() == Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("eig_dense rejects non-finite input", "[eig]") {
    ComplexMatrix m = ComplexMatrix::Identity(2, 2);
    m(0, 1) = std::nan("");
    CHECK_THROWS_AS(eig_dense(m), InvalidArgument);
}

TEST_CASE("det_lu examples", "[det]") {
    CHECK(std::abs(det_lu(ComplexMatrix::Identity(4, 4)) - 1.0) < 1e-15);

    ComplexMatrix u(3, 3);
    u << 1, 5, Complex(2, 1), 0, Complex(0, 2), 7, 0, 0, -3;
    CHECK(std::abs(det_lu(u) - Complex(0, -6)) < 1e-13);

    const ComplexMatrix r = random_matrix(3, 3, 42);
    const Complex want = cofactor_det(r);
    CHECK(std::abs(det_lu(r) - want) <= 1e-13 * std::abs(want));

    CHECK(det_lu(ComplexMatrix::Zero(3, 3)) == Complex(0.0, 0.0));
}

TEST_CASE("det_lu agrees with cofactor expansion on 5x5", "[det]") {
    const ComplexMatrix r = random_matrix(5, 5, 7);
    const Complex want = cofactor_det(r);
    CHECK(std::abs(det_lu(r) - want) <= 1e-12 * std::abs(want));
}

TEST_CASE("det_lu permutation parity", "[det]") {
    const ComplexMatrix m = random_matrix(5, 5, 11);
    const Complex d = det_lu(m);
    std::vector<int> perm{0, 1, 2, 3, 4};
    std::mt19937 gen(5);
    for (int trial = 0; trial < 10; ++trial) {
        std::shuffle(perm.begin(), perm.end(), gen);
        ComplexMatrix p = ComplexMatrix::Zero(5, 5);
        for (int i = 0; i < 5; ++i) p(i, perm[i]) = 1.0;
        int inversions = 0;
        for (int i = 0; i < 5; ++i)
            for (int j = i + 1; j < 5; ++j) inversions += perm[i] > perm[j];
        const double sign = inversions % 2 ? -1.0 : 1.0;
        CHECK(std::abs(det_lu(p * m) - sign * d) <= 1e-12 * std::abs(d));
    }
}

TEST_CASE("det_lu is multiplicative", "[det]") {
    for (unsigned seed = 20; seed < 25; ++seed) {
        const ComplexMatrix a = random_matrix(5, 5, seed);
        const ComplexMatrix b = random_matrix(5, 5, seed + 100);
        const Complex lhs = det_lu(a * b);
        const Complex rhs = det_lu(a) * det_lu(b);
        CHECK(std::abs(lhs - rhs) <= 1e-10 * std::abs(rhs));
    }
}

TEST_CASE("log_det survives products that overflow a double", "[det]") {
    const ComplexMatrix m = 1e20 * ComplexMatrix::Identity(32, 32);
    const auto ld = log_det(m);
    CHECK(ld.log10_magnitude == Approx(640.0));
    CHECK_FALSE(ld.singular);
}

TEST_CASE("lstsq examples", "[lstsq]") {
    const ComplexMatrix q = random_matrix(5, 3, 3).householderQr().householderQ() * ComplexMatrix::Identity(5, 3);
    CHECK((lstsq(q, q) - ComplexMatrix::Identity(3, 3)).norm() < 1e-13);

    const ComplexMatrix e = ComplexMatrix::Identity(5, 2);
    const ComplexMatrix b = random_matrix(5, 2, 9);
    CHECK((lstsq(e, b) - b.topRows(2)).norm() < 1e-14);

    // normal-equations oracle
    const ComplexMatrix a = random_matrix(4, 2, 13);
    const ComplexMatrix rhs = random_matrix(4, 2, 14);
    const ComplexMatrix normal = (a.adjoint() * a).inverse() * (a.adjoint() * rhs);
    CHECK((lstsq(a, rhs) - normal).norm() < 1e-12 * normal.norm());
}

TEST_CASE("lstsq reports rank deficiency", "[lstsq]") {
    ComplexMatrix a = random_matrix(4, 2, 1);
    a.col(1) = Complex(2.0, -1.0) * a.col(0);
    CHECK_THROWS_AS(lstsq(a, random_matrix(4, 2, 2)), RankDeficientError);
    CHECK_THROWS_AS(lstsq(random_matrix(2, 3, 1), random_matrix(2, 3, 1)), InvalidArgument);
}

TEST_CASE("cheb_grid basic structure", "[cheb]") {
    CHECK_THROWS_AS(cheb_grid(1, 0.0, 1.0), InvalidArgument);
    CHECK_THROWS_AS(cheb_grid(8, 1.0, 1.0), InvalidArgument);

    const auto g = cheb_grid(20, -2.0, 3.0);
    REQUIRE(g.size() == 21);
    CHECK(g.nodes(0) == Approx(-2.0));
    CHECK(g.nodes(20) == Approx(3.0));
    for (int i = 0; i < 20; ++i) CHECK(g.nodes(i) < g.nodes(i + 1));
    CHECK((g.diff * RealVector::Ones(21)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("cheb_grid differentiates x^2 and sin", "[cheb]") {
    auto g = cheb_grid(5, 0.0, 1.0);
    RealVector f = g.nodes.array().square();
    CHECK((g.diff * f - 2.0 * g.nodes).cwiseAbs().maxCoeff() < 1e-13);

    g = cheb_grid(30, 0.0, 1.0);
    f = g.nodes.array().sin();
    CHECK((g.diff * f - RealVector(g.nodes.array().cos())).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("cheb_grid is exact on monomials up to degree N", "[cheb]") {
    for (int n : {4, 10, 16}) {
        const auto g = cheb_grid(n, -1.0, 2.0);
        for (int k = 0; k <= n; ++k) {
            const RealVector f = g.nodes.array().pow(k);
            const RealVector df =
                k == 0 ? RealVector::Zero(n + 1) : RealVector(k * g.nodes.array().pow(k - 1));
            const double scale = std::max(1.0, df.cwiseAbs().maxCoeff());
            CHECK((g.diff * f - df).cwiseAbs().maxCoeff() <= 1e-9 * scale);
        }
    }
}

TEST_CASE("chebyshev_coefficients recovers T_k", "[cheb]") {
    const int n = 12;
    const auto g = cheb_grid(n, 0.0, 4.0);
    ComplexVector v(n + 1);
    for (int i = 0; i <= n; ++i) {
        const double t = (g.nodes(i) - 2.0) / 2.0;
        v(i) = std::cos(3 * std::acos(std::clamp(t, -1.0, 1.0))) + 0.5;
    }
    const ComplexVector c = chebyshev_coefficients(v);
    CHECK(std::abs(c(0) - 0.5) < 1e-13);
    CHECK(std::abs(c(3) - 1.0) < 1e-13);
    for (int k : {1, 2, 4, 5, 12}) CHECK(std::abs(c(k)) < 1e-13);
}
