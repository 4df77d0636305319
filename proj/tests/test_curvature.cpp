#include <doctest.h>

#include <cmath>
#include <random>

#include "detsplit/curvature.hpp"
#include "detsplit/models.hpp"

using namespace detsplit;

namespace {

Projection line(Complex a, Complex b) {
    CMatrix v(2, 1);
    v << a, b;
    return Projection::onto_columns(v);
}

ProjectionSection constant_section(const BaseGrid& g, const Projection& p) {
    return ProjectionSection::sample(g, [&](const std::array<double, 2>&) { return p; });
}

ProjectionSection bloch_section(int n, double mass) {
    return ProjectionSection::sample(BaseGrid::torus(n),
                                     [&](const std::array<double, 2>& b) { return bloch_projection(1, b, mass); });
}

double max_valid(const ScalarForm& f) {
    double m = 0.0;
    for (std::size_t k = 0; k < f.size(); ++k)
        if (f.valid(k)) m = std::max(m, std::abs(f[k]));
    return m;
}

Projection random_projection(std::mt19937_64& rng, Eigen::Index dim, Eigen::Index rank) {
    std::normal_distribution<double> n(0.0, 1.0);
    CMatrix v(dim, rank);
    for (Eigen::Index j = 0; j < rank; ++j)
        for (Eigen::Index i = 0; i < dim; ++i) v(i, j) = Complex(n(rng), n(rng));
    return Projection::onto_columns(v);
}

}  // namespace

TEST_CASE("atlas cell counts divide the grid") {
    CHECK(atlas_cells_for(32, 16) == 16);
    CHECK(atlas_cells_for(16, 16) == 8);
    CHECK(atlas_cells_for(24, 16) == 12);
    CHECK(atlas_cells_for(10, 16) == 5);
    CHECK(atlas_cells_for(2, 16) == 1);
    for (int n : {8, 12, 18, 30, 64})
        CHECK(n % (2 * atlas_cells_for(n, 16)) == 0);
}

TEST_CASE("cover generation") {
    const Cover c = Cover::generate(3, 4, 2.5, 10.0, 7, 4);
    REQUIRE(c.charts.size() == 5);
    CHECK(c.cond_tol() == 10.0);
    CHECK(c.charts.front().shift.norm() == 0.0);
    for (std::size_t k = 1; k < c.charts.size(); ++k)
        CHECK(Eigen::BDCSVD<CMatrix>(c.charts[k].shift).singularValues()(0) == doctest::Approx(2.5));
    const Cover d = Cover::generate(3, 4, 2.5, 10.0, 7, 4);
    for (std::size_t k = 0; k < c.charts.size(); ++k) CHECK(c.charts[k].shift == d.charts[k].shift);
    const Cover adj = c.adjoint();
    CHECK((adj.charts[2].shift - c.charts[2].shift.adjoint()).norm() == 0.0);

    CHECK_THROWS_AS(Cover::generate(3, -1, 1.0, 10.0, 1, 4), ArgumentError);
    CHECK_THROWS_AS(Cover::generate(3, 1, 1.0, 0.0, 1, 4), ArgumentError);
}

TEST_CASE("frame chart is unitary at its center") {
    std::mt19937_64 rng(3);
    const Projection p0 = random_projection(rng, 5, 2);
    const Projection p1 = random_projection(rng, 5, 2);
    const Trivialization t = frame_chart(p0, p1, 10.0);
    const CMatrix m = p1.frame().adjoint() * (p1.matrix() * p0.matrix() + t.shift) * p0.frame();
    CHECK((m.adjoint() * m - CMatrix::Identity(2, 2)).norm() < 1e-10);
}

TEST_CASE("constant sections have a flat connection") {
    const BaseGrid g = BaseGrid::torus(8);
    const ProjectionSection s0 = constant_section(g, line(1.0, 0.0));
    const ProjectionSection s1 = constant_section(g, line(1.0, Complex(0.5, 0.3)));
    const Cover cover = Cover::generate(2, 2, 1.0, 10.0, 5, atlas_cells_for(8, 16));
    const ChartedConnection conn = connection_one_form(s0, s1, cover);
    for (const ScalarForm& w : conn.omega) CHECK(max_valid(w) < 1e-12);
    CHECK(max_valid(curvature_of(conn)) < 1e-12);
    CHECK_NOTHROW(require_coverage(conn));
    CHECK(chern_number(s0) == 0);
    CHECK(chern_number(s0, s1) == 0);
}

TEST_CASE("DET(P, P) is flat with zero Chern number") {
    auto residual = [](int n) {
        const ProjectionSection s = bloch_section(n, 1.0);
        const Cover cover = Cover::from_frames(s, s, 4, 1e3, atlas_cells_for(n, 16));
        const ScalarForm f = curvature_of(connection_one_form(s, s, cover));
        CHECK(std::abs(integrate(f)) < 1e-12);
        return max_valid(f);
    };
    const double r16 = residual(16), r32 = residual(32), r64 = residual(64);
    CHECK(r16 < 1e-2);
    CHECK(r32 < r16);
    CHECK(r64 < r32 / 2.0);
    const ProjectionSection s = bloch_section(16, 1.0);
    CHECK(chern_number(s, s) == 0);
    CHECK(std::abs(chern_sum(s, s)) < 1e-12);
}

TEST_CASE("Chern numbers of Bloch sections") {
    const ProjectionSection topo = bloch_section(16, 1.0);
    const ProjectionSection trivial = bloch_section(16, 3.0);
    CHECK(std::abs(chern_number(topo)) == 1);
    CHECK(chern_number(trivial) == 0);
    CHECK(std::abs(chern_sum(topo) - std::round(chern_sum(topo))) < 1e-9);
    CHECK(chern_number(trivial, topo) == chern_number(topo));
    CHECK(chern_number(topo, trivial) == -chern_number(topo));
    CHECK(chern_number(topo.complement()) == -chern_number(topo));
}

TEST_CASE("Chern number errors") {
    const BaseGrid g = BaseGrid::torus(4);
    const ProjectionSection flip = ProjectionSection::sample(g, [](const std::array<double, 2>& b) {
        const bool odd = static_cast<int>(std::lround(b[0] / (M_PI / 2))) % 2 == 1;
        return odd ? line(0.0, 1.0) : line(1.0, 0.0);
    });
    CHECK_THROWS_AS(chern_number(flip), VortexOnLink);

    const BaseGrid sphere = BaseGrid::sphere(8, 8);
    const ProjectionSection s = ProjectionSection::sample(
        sphere, [](const std::array<double, 2>& b) { return sphere_bloch_projection(b[0], b[1]); });
    CHECK_THROWS_AS(chern_number(s), ArgumentError);
}

TEST_CASE("families formula vanishes for equal sections") {
    const ProjectionSection s = bloch_section(16, 1.0);
    const Cover cover = Cover::from_frames(s, s, 4, 1e3, atlas_cells_for(16, 16));
    const FamiliesCurvature f = curvature_families_formula(s, s, cover);
    CHECK(max_valid(f.full) < 1e-10);
    CHECK(max_valid(f.simplified) < 1e-10);
}

TEST_CASE("coarsening and refinement ratios") {
    const BaseGrid fine = BaseGrid::torus(8);
    ScalarForm two(2, fine, Complex(0.0));
    for (std::size_t p = 0; p < two.size(); ++p) two[p] = Complex(1.0, -2.0);
    const ScalarForm c2 = coarsen_plaquettes(two);
    CHECK(c2.grid().size(0) == 4);
    CHECK(c2.size() == 16);
    CHECK(max_valid(c2) == doctest::Approx(std::abs(Complex(1.0, -2.0))));
    two.set_valid(0, false);
    CHECK(coarsen_plaquettes(two).valid_count() == 15);

    ScalarForm zero(0, fine, Complex(0.0));
    for (std::size_t v = 0; v < zero.size(); ++v) zero[v] = Complex(static_cast<double>(v));
    const ScalarForm cz = coarsen_vertices(zero);
    REQUIRE(cz.size() == 16);
    CHECK(cz[1] == zero[2]);
    CHECK(cz[4] == zero[16]);

    ScalarForm coarse(2, BaseGrid::torus(4), Complex(0.0));
    ScalarForm finer(2, BaseGrid::torus(4), Complex(0.0));
    for (std::size_t p = 0; p < coarse.size(); ++p) {
        coarse[p] = 0.4 * (1.0 + static_cast<double>(p % 3));
        finer[p] = 0.1 * (1.0 + static_cast<double>(p % 3));
    }
    finer.set_valid(3, false);
    const RatioTest r = refinement_ratio(coarse, finer);
    CHECK(r.ratio == doctest::Approx(4.0));
    CHECK(r.samples == 15);
    CHECK_THROWS_AS(refinement_ratio(coarse, two), DimensionError);
}

TEST_CASE("winding of F") {
    const BaseGrid g = BaseGrid::torus(8);
    std::vector<std::optional<Complex>> smooth(g.vertex_count()), missing(g.vertex_count());
    for (std::size_t v = 0; v < g.vertex_count(); ++v) {
        const auto b = g.point(v);
        smooth[v] = std::polar(1.0 + 0.2 * std::cos(b[1]), b[0] + 0.5 * std::sin(b[1]));
        missing[v] = smooth[v];
    }
    const ScalarForm w = f_winding(smooth, g);
    CHECK(w.valid_count() == w.size());
    CHECK(max_valid(w) < 1e-12);
    missing[0].reset();
    CHECK(f_winding(missing, g).valid_count() == w.size() - 4);
}

TEST_CASE("coverage check") {
    CurvatureReport r;
    CHECK_NOTHROW(require_coverage(r));
    r.exclusion = {0.0, 0.06, 0.0};
    CHECK(r.max_exclusion() == 0.06);
    CHECK_THROWS_AS(require_coverage(r), CoverageError);
    r.chern = {1, 1, 0};
    CHECK(r.chern_additive());
    r.chern = {1, 0, 0};
    CHECK_FALSE(r.chern_additive());
}

TEST_CASE("closing trace identities on random projections") {
    std::mt19937_64 rng(11);
    std::normal_distribution<double> n(0.0, 1.0);
    for (int trial = 0; trial < 10; ++trial) {
        const Eigen::Index dim = 6, rank = 3;
        const Projection p0 = random_projection(rng, dim, rank);
        const Projection p1 = random_projection(rng, dim, rank);
        const Projection p2 = random_projection(rng, dim, rank);
        std::array<CMatrix, 3> r;
        for (CMatrix& m : r) {
            m.resize(dim, dim);
            for (Eigen::Index j = 0; j < dim; ++j)
                for (Eigen::Index i = 0; i < dim; ++i) m(i, j) = Complex(n(rng), n(rng));
        }
        const TraceIdentityResiduals res = closing_trace_identities(p0, p1, p2, r[0], r[1], r[2], 1e8);
        CHECK(res.conjugation_swap < 1e-9);
        CHECK(res.composition < 1e-9);
    }
}

TEST_CASE("split analysis of the demo family on a small grid") {
    const SplitProblem problem = make_split_problem(Dirac1DFamily::demo(), SectionSpec{}, BaseGrid::torus(16));
    CoverSpec spec;
    spec.atlas_cells = atlas_cells_for(16, spec.atlas_cells);
    const SplitAnalysis a = analyze_split(problem, spec);
    CHECK(a.full.chern == a.left.chern + a.right.chern);
    for (const BundleCurvature* b : {&a.full, &a.left, &a.right}) CHECK(b->exclusion_fraction <= kMaxExclusion);
    double re = 0.0;
    for (const BundleCurvature* b : {&a.full, &a.left, &a.right})
        for (const ScalarForm* f : {&b->families.full, &b->families.simplified})
            for (std::size_t k = 0; k < f->size(); ++k)
                if (f->valid(k)) re = std::max(re, std::abs((*f)[k].real()));
    CHECK(re < 1e-9);
}
