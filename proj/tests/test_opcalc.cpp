#include <doctest.h>

#include <random>

#include <Eigen/Eigenvalues>

#include "detsplit/opcalc.hpp"

using namespace detsplit;

namespace {

CMatrix random_matrix(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols) {
    std::normal_distribution<double> n(0.0, 1.0);
    CMatrix m(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
        for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = Complex(n(rng), n(rng));
    return m;
}

}  // namespace

TEST_CASE("trace of a Hermitian matrix is the eigenvalue sum") {
    std::mt19937_64 rng(11);
    const CMatrix g = random_matrix(rng, 8, 8);
    const CMatrix a = g + g.adjoint();
    Eigen::SelfAdjointEigenSolver<CMatrix> es(a);
    CHECK(std::abs(trace(a) - es.eigenvalues().sum()) < 1e-12);
    CHECK_THROWS_AS(trace(random_matrix(rng, 2, 3)), DimensionError);
}

TEST_CASE("trace norm") {
    CHECK(trace_norm(CMatrix::Zero(3, 3)) == 0.0);
    CMatrix d = CMatrix::Zero(3, 3);
    d.diagonal() << 1.0, -2.0, 3.0;
    CHECK(trace_norm(d) == doctest::Approx(6.0));

    std::mt19937_64 rng(12);
    const CMatrix a = random_matrix(rng, 10, 6);
    // Oracle: singular values are square roots of the eigenvalues of A*A.
    Eigen::SelfAdjointEigenSolver<CMatrix> es(a.adjoint() * a);
    const double oracle = es.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();
    CHECK(std::abs(trace_norm(a) - oracle) / oracle < 1e-10);
}

TEST_CASE("wedge traces") {
    std::mt19937_64 rng(13);
    const CMatrix a = random_matrix(rng, 5, 5);
    CHECK(wedge_trace(a, 0) == Complex(1.0));
    CHECK(std::abs(wedge_trace(a, 1) - a.trace()) < 1e-12);
    CHECK(wedge_trace(a, 6) == Complex(0.0));
    CHECK_THROWS_AS(wedge_trace(a, -1), ArgumentError);

    CMatrix d = CMatrix::Zero(2, 2);
    d(0, 0) = Complex(2.0, 1.0);
    d(1, 1) = Complex(-3.0, 0.5);
    CHECK(std::abs(wedge_trace(d, 2) - d(0, 0) * d(1, 1)) < 1e-12);

    // Characteristic polynomial det(t - A) = sum_r (-1)^r e_r t^{n-r}: at t = -1
    // this is (-1)^n det(I + A).
    const Complex det = (CMatrix::Identity(5, 5) + a).determinant();
    Complex sum(0.0);
    for (int r = 0; r <= 5; ++r) sum += wedge_trace(a, r);
    CHECK(std::abs(sum - det) < 1e-10 * std::abs(det));
}

TEST_CASE("Fredholm determinant examples") {
    CHECK(std::abs(fredholm_det(CMatrix::Zero(4, 4)) - 1.0) < 1e-15);
    CMatrix e = CMatrix::Zero(4, 4);
    e(0, 0) = 1.0;
    CHECK(std::abs(fredholm_det(e) - 2.0) < 1e-14);
    CHECK(std::abs(fredholm_det(e, DetMethod::series) - 2.0) < 1e-14);
    const CMatrix half = -0.5 * CMatrix::Identity(2, 2);
    CHECK(std::abs(fredholm_det(half) - 0.25) < 1e-15);
    CHECK(std::abs(fredholm_det(half, DetMethod::series) - 0.25) < 1e-15);
    CHECK_THROWS_AS(fredholm_det(half, DetMethod::series, 0.0), ArgumentError);
}

TEST_CASE("series and dense methods agree near a zero determinant") {
    CMatrix a = CMatrix::Zero(3, 3);
    a(0, 0) = -1.0 + 1e-9;
    a(1, 2) = 0.3;
    const Complex dense = fredholm_det(a);
    const Complex series = fredholm_det(a, DetMethod::series);
    CHECK(std::abs(series - dense) < 1e-14);
}

TEST_CASE("restricted determinant acts on the range of p") {
    CMatrix p = CMatrix::Zero(3, 3);
    p(0, 0) = p(1, 1) = 1.0;
    CMatrix e = CMatrix::Zero(3, 3);
    e(0, 0) = 2.0;
    e(1, 1) = 3.0;
    CHECK(std::abs(restricted_det(e, p) - 6.0) < 1e-14);
}
