#include <doctest.h>

#include <random>

#include "detsplit/curvature.hpp"
#include "detsplit/detline.hpp"
#include "detsplit/models.hpp"

using namespace detsplit;

namespace {

CMatrix random_matrix(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols) {
    std::normal_distribution<double> n(0.0, 1.0);
    CMatrix m(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
        for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = Complex(n(rng), n(rng));
    return m;
}

double rel(Complex a, Complex b) { return std::abs(a - b) / std::max(std::abs(a), std::abs(b)); }

}  // namespace

TEST_CASE("canonical det detects invertibility") {
    std::mt19937_64 rng(31);
    const CMatrix a = random_matrix(rng, 4, 4);
    const Fiber f = Fiber::of_operator(a);
    const Trivialization alpha{random_matrix(rng, 4, 4), 1e6};
    CHECK(std::abs(coordinate(canonical_det(f), alpha)) > 1e-6);

    CMatrix s = a;
    s.col(0) = s.col(1);
    const Fiber singular = Fiber::of_operator(s);
    CHECK(std::abs(coordinate(canonical_det(singular), alpha)) < 1e-12);
    CHECK(std::abs(coordinate(canonical_det(singular), {random_matrix(rng, 4, 4), 1e6})) < 1e-12);
    CHECK_THROWS_AS(coordinate(canonical_det(singular), Trivialization::canonical(4)), OutOfChart);
}

TEST_CASE("coordinates in finite dimensions") {
    std::mt19937_64 rng(32);
    const CMatrix a = random_matrix(rng, 5, 5);
    const Fiber f = Fiber::of_operator(a);
    const Trivialization alpha{random_matrix(rng, 5, 5), 1e6};
    const CMatrix aa = a + alpha.shift;

    CHECK(std::abs(coordinate({f, aa, 1.0}, alpha) - 1.0) < 1e-12);

    const CMatrix t = random_matrix(rng, 5, 5);
    const Complex lambda(0.7, -0.2);
    CHECK(rel(coordinate({f, t, lambda}, alpha), lambda * t.determinant() / aa.determinant()) < 1e-10);

    // [T q, lambda] ~ [T, det(q) lambda]
    const CMatrix q = CMatrix::Identity(5, 5) + 0.3 * random_matrix(rng, 5, 5);
    CHECK(rel(coordinate({f, t * q, lambda}, alpha), coordinate({f, t, q.determinant() * lambda}, alpha)) < 1e-10);
}

TEST_CASE("transition functions") {
    std::mt19937_64 rng(33);
    const CMatrix a = random_matrix(rng, 4, 4);
    const Fiber f = Fiber::of_operator(a);
    const Trivialization alpha{random_matrix(rng, 4, 4), 1e6}, beta{random_matrix(rng, 4, 4), 1e6},
        gamma{random_matrix(rng, 4, 4), 1e6};
    CHECK(std::abs(transition(f, alpha, alpha) - 1.0) < 1e-12);
    CHECK(rel(transition(f, alpha, beta), (a + alpha.shift).determinant() / (a + beta.shift).determinant()) < 1e-10);
    CHECK(rel(transition(f, alpha, beta) * transition(f, beta, gamma), transition(f, alpha, gamma)) < 1e-10);

    const LineElement e{f, random_matrix(rng, 4, 4), Complex(1.3, 0.4)};
    CHECK(rel(coordinate(e, beta), transition(f, alpha, beta) * coordinate(e, alpha)) < 1e-10);
}

TEST_CASE("inner product") {
    std::mt19937_64 rng(34);
    const Fiber f = Fiber::of_operator(random_matrix(rng, 3, 3));
    const CMatrix u = Eigen::HouseholderQR<CMatrix>(random_matrix(rng, 3, 3)).householderQ();
    const LineElement unit{f, u, 1.0};
    CHECK(std::abs(inner_product(unit, unit) - 1.0) < 1e-12);

    const CMatrix t = random_matrix(rng, 3, 3);
    const LineElement e{f, t, Complex(0.5, 2.0)};
    const Complex mu(1.5, -0.5);
    const LineElement scaled{f, t, mu * e.scale};
    CHECK(rel(inner_product(scaled, scaled), std::norm(mu) * inner_product(e, e)) < 1e-12);
    CHECK(rel(inner_product(e, e), std::norm(e.scale) * std::norm(t.determinant())) < 1e-10);
    CHECK(inner_product(e, e).real() > 0.0);

    const LineElement g{f, random_matrix(rng, 3, 3), Complex(0.1, 0.9)};
    CHECK(std::abs(inner_product(e, g) - std::conj(inner_product(g, e))) < 1e-12 * std::abs(inner_product(e, g)));
}

TEST_CASE("metric of coincident projections is 1") {
    std::mt19937_64 rng(35);
    const Projection p = Projection::onto_columns(random_matrix(rng, 6, 3));
    CHECK(std::abs(metric_norm_sq(Fiber::of_toeplitz(p, p)) - 1.0) < 1e-12);
}

TEST_CASE("metric through a chart equals the direct value") {
    std::mt19937_64 rng(36);
    const Projection p0 = Projection::onto_columns(random_matrix(rng, 6, 3));
    const Projection p1 = Projection::onto_columns(random_matrix(rng, 6, 3));
    const Fiber f = Fiber::of_toeplitz(p0, p1);
    const Trivialization a{random_matrix(rng, 6, 6), 1e6}, b{random_matrix(rng, 6, 6), 1e6};
    CHECK(rel(metric_norm_sq_in_chart(f, a), metric_norm_sq(f)) < 1e-10);
    CHECK(rel(metric_norm_sq_in_chart(f, a), metric_norm_sq_in_chart(f, b)) < 1e-10);
}

TEST_CASE("kernel at integer constant potential") {
    const Dirac1DFamily fam = Dirac1DFamily::constant_scalar();
    for (double c : {0.0, 1.0, 2.0}) {
        const std::array<double, 2> b{c, 0.0};
        const Fiber f = Fiber::of_toeplitz(calderon_projection(fam, b, Side::left),
                                           calderon_projection(fam, b, Side::right).complement());
        CHECK(metric_norm_sq(f) < 1e-12);
        const Trivialization chart = frame_chart(f.source, f.target, 1e6);
        CHECK(std::abs(coordinate(canonical_det(f), chart)) < 1e-6);
    }
}

TEST_CASE("sewing") {
    std::mt19937_64 rng(37);
    const Projection p = Projection::onto_columns(random_matrix(rng, 5, 2));
    const Fiber f = Fiber::of_toeplitz(p, p);
    const LineElement sewn = sew(canonical_det(f), canonical_det(f));
    CHECK((sewn.rep - p.matrix()).norm() < 1e-12);
    CHECK(std::abs(coordinate(sewn, Trivialization::canonical(5)) - 1.0) < 1e-12);

    const Projection q = Projection::onto_columns(random_matrix(rng, 5, 3));
    CHECK_THROWS(sew(canonical_det(Fiber::of_toeplitz(p, p)), canonical_det(Fiber::of_toeplitz(p, q))));
}

TEST_CASE("sewing correction reduces to 1 in the composite chart") {
    std::mt19937_64 rng(38);
    const Projection p0 = Projection::onto_columns(random_matrix(rng, 6, 2));
    const Projection p1 = Projection::onto_columns(random_matrix(rng, 6, 2));
    const Projection p2 = Projection::onto_columns(random_matrix(rng, 6, 2));
    const Fiber f01 = Fiber::of_toeplitz(p0, p1), f12 = Fiber::of_toeplitz(p1, p2);
    const Trivialization a{random_matrix(rng, 6, 6), 1e6}, b{random_matrix(rng, 6, 6), 1e6};
    const LineElement e01{f01, random_matrix(rng, 6, 6), 1.0}, e12{f12, random_matrix(rng, 6, 6), 1.0};
    const Fiber f02 = Fiber::of_toeplitz(p0, p2);
    const Trivialization c{(p2.matrix() * chart_operator(f12, b) * chart_operator(f01, a) * p0.matrix() - f02.base).eval(),
                           1e6};
    CHECK(std::abs(sew_correction(e01, a, e12, b, c) - 1.0) < 1e-10);
}

TEST_CASE("padding to index zero") {
    std::mt19937_64 rng(39);
    const CMatrix tall = random_matrix(rng, 5, 3);
    const CMatrix padded = pad_to_index_zero(tall);
    CHECK(padded.rows() == 5);
    CHECK(padded.cols() == 5);
    CHECK((padded.leftCols(3) - tall).norm() == 0.0);
    CHECK(std::abs(padded.determinant()) < 1e-12);
    CHECK_THROWS_AS(Fiber::of_operator(tall), DimensionError);
}
