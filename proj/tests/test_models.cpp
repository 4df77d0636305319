#include <doctest.h>

#include <numbers>

#include "detsplit/models.hpp"
#include "detsplit/opcalc.hpp"

using namespace detsplit;

namespace {

constexpr double pi = std::numbers::pi;

double min_singular(const CMatrix& m) { return Eigen::BDCSVD<CMatrix>(m).singularValues().minCoeff(); }

}  // namespace

TEST_CASE("demo potential is Hermitian and periodic") {
    const Dirac1DFamily fam = Dirac1DFamily::demo();
    for (double x : {0.0, 0.7, 2.0, 5.5}) {
        const CMatrix a = fam.potential({0.4, 1.9}, x);
        CHECK((a - a.adjoint()).norm() < 1e-12);
    }
    CHECK((fam.potential({0.4, 1.9}, 0.0) - fam.potential({0.4, 1.9}, 2.0 * pi)).norm() < 1e-12);
}

TEST_CASE("transfer matrix closed forms") {
    Dirac1DFamily zero;
    zero.rank = 2;
    CHECK((transfer_matrix(zero, {1.0, 1.0}, 0.0, 2.0 * pi) - CMatrix::Identity(2, 2)).norm() < 1e-14);

    Dirac1DFamily scalar = Dirac1DFamily::constant_scalar();
    scalar.steps = 4096;
    const CMatrix t = transfer_matrix(scalar, {0.8, 0.0}, 0.5, 3.0);
    CHECK(std::abs(t(0, 0) - std::exp(Complex(0.0, 0.8 * 2.5))) < 1e-10);

    CHECK_THROWS_AS(transfer_matrix(scalar, {0.8, 0.0}, 2.0, 1.0), ArgumentError);
}

TEST_CASE("transfer matrix flow property and order") {
    Dirac1DFamily fam = Dirac1DFamily::demo();
    const std::array<double, 2> b{0.9, 2.2};
    const CMatrix whole = transfer_matrix(fam, b, 0.3, 5.0);
    const CMatrix split = transfer_matrix(fam, b, 2.0, 5.0) * transfer_matrix(fam, b, 0.3, 2.0);
    CHECK((whole - split).norm() < 1e-10);

    auto at = [&](int steps) {
        fam.steps = steps;
        return transfer_matrix(fam, b, 0.0, 2.0 * pi);
    };
    const double ratio = (at(32) - at(64)).norm() / (at(64) - at(128)).norm();
    CHECK(ratio > 12.0);
    CHECK(ratio < 20.0);
}

TEST_CASE("integration warning for coarse steps") {
    Dirac1DFamily fam = Dirac1DFamily::demo();
    CHECK_FALSE(integration_warning(fam, {1.0, 1.0}));
    fam.steps = 4;
    CHECK(integration_warning(fam, {1.0, 1.0}));
}

TEST_CASE("Calderon projections") {
    Dirac1DFamily zero;
    zero.rank = 1;
    CHECK((calderon_projection(zero, {0.0, 0.0}, Side::left).matrix() - 0.5 * CMatrix::Ones(2, 2)).norm() < 1e-12);

    Dirac1DFamily scalar = Dirac1DFamily::constant_scalar();
    scalar.steps = 4096;
    const double c = 0.37;
    CMatrix v(2, 1);
    v << 1.0, std::exp(Complex(0.0, c * pi));
    CHECK((calderon_projection(scalar, {c, 0.0}, Side::left).matrix() - Projection::onto_columns(v).matrix()).norm() <
          1e-10);

    const Dirac1DFamily demo = Dirac1DFamily::demo();
    for (Side side : {Side::left, Side::right}) CHECK(calderon_projection(demo, {0.3, 1.1}, side).rank() == 2);
}

TEST_CASE("Cauchy data ranges meet exactly at the kernel") {
    const Dirac1DFamily scalar = Dirac1DFamily::constant_scalar();
    auto overlap = [&](double c) {
        const Projection l = calderon_projection(scalar, {c, 0.0}, Side::left);
        const Projection r = calderon_projection(scalar, {c, 0.0}, Side::right);
        CMatrix both(2, 2);
        both << l.frame(), r.frame();
        return min_singular(both);
    };
    CHECK(overlap(1.0) < 1e-8);
    CHECK(overlap(0.5) > 0.1);
}

TEST_CASE("monodromy determinant") {
    Dirac1DFamily zero;
    zero.rank = 2;
    CHECK(std::abs(full_monodromy_det(zero, {0.0, 0.0})) < 1e-14);
    Dirac1DFamily scalar = Dirac1DFamily::constant_scalar();
    scalar.steps = 4096;
    CHECK(std::abs(full_monodromy_det(scalar, {0.5, 0.0}) - 2.0) < 1e-9);
}

TEST_CASE("APS sections") {
    CylinderFamily fam;
    fam.truncation = 2;
    fam.static_amplitude = 0.0;
    fam.drive_amplitude = 0.0;
    const CylinderModel model(fam);
    const Projection p = model.aps_projection({0.0, 0.0});
    CHECK(p.rank() == 3);
    CMatrix expect = CMatrix::Zero(5, 5);
    expect(2, 2) = expect(3, 3) = expect(4, 4) = 1.0;
    CHECK((p.matrix() - expect).norm() < 1e-12);

    const CylinderFamily smooth;
    const ProjectionSection s = aps_section(smooth, BaseGrid::torus(8));
    CHECK(s.base_rank() == smooth.truncation + 1);
    CHECK(s.smoothness_constant() < 10.0);
}

TEST_CASE("smoothing perturbation") {
    const CMatrix s = smoothing_perturbation(3, 0.5, 16);
    CHECK((s - s.adjoint()).norm() == 0.0);
    for (int j = -16; j <= 16; ++j)
        for (int k = -16; k <= 16; ++k)
            CHECK(std::abs(s(j + 16, k + 16)) <= std::exp(-0.5 * (std::abs(j) + std::abs(k))) + 1e-15);

    // Nested truncations share entries.
    const CMatrix big = smoothing_perturbation(3, 0.5, 32);
    CHECK((big.block(16, 16, 33, 33) - s).norm() == 0.0);

    const double t32 = trace_norm(smoothing_perturbation(3, 0.5, 32));
    const double t64 = trace_norm(smoothing_perturbation(3, 0.5, 64));
    CHECK(std::abs(t64 - t32) / t64 < 1e-2);

    const CMatrix steep = smoothing_perturbation(3, 8.0, 8);
    CHECK(steep.norm() - std::abs(steep(8, 8)) < 1e-6);
    CHECK_THROWS_AS(smoothing_perturbation(3, 0.0, 8), ArgumentError);
}

TEST_CASE("Grassmann section is a conjugate of the APS section") {
    const CylinderFamily fam;
    const CylinderModel model(fam);
    const std::array<double, 2> b{0.7, 2.1};
    const CMatrix e = model.section_rotation(b);
    CHECK((e * e.adjoint() - CMatrix::Identity(fam.dim(), fam.dim())).norm() < 1e-10);
    CHECK((model.grassmann_projection(b).matrix() - e * model.aps_projection(b).matrix() * e.adjoint()).norm() < 1e-10);
}

TEST_CASE("config-level parsing of potential terms") {
    CHECK(parse_base_fn("sin_b2") == BaseFn::sin_b2);
    CHECK_THROWS_AS(parse_base_fn("tan_b1"), ConfigError);
    CHECK_THROWS(basis_matrix("s7", 2));
}
