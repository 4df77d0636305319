#include "detsplit/models.hpp"

#include <cmath>
#include <random>

namespace detsplit {

namespace {

double eval_base(BaseFn f, const std::array<double, 2>& b) {
    switch (f) {
        case BaseFn::one: return 1.0;
        case BaseFn::cos_b1: return std::cos(b[0]);
        case BaseFn::sin_b1: return std::sin(b[0]);
        case BaseFn::cos_b2: return std::cos(b[1]);
        case BaseFn::sin_b2: return std::sin(b[1]);
        case BaseFn::b1: return b[0];
        case BaseFn::b2: return b[1];
    }
    return 0.0;
}

/// a(b, x) = a0 + cos(x) ac + sin(x) as for fixed b.
struct FrozenPotential {
    CMatrix a0, ac, as;

    FrozenPotential(const Dirac1DFamily& fam, const std::array<double, 2>& b)
        : a0(CMatrix::Zero(fam.rank, fam.rank)), ac(a0), as(a0) {
        for (const auto& t : fam.terms) {
            const CMatrix m = t.coeff * eval_base(t.base, b) * basis_matrix(t.matrix, fam.rank);
            switch (t.position) {
                case PositionFn::one: a0 += m; break;
                case PositionFn::cos_x: ac += m; break;
                case PositionFn::sin_x: as += m; break;
            }
        }
    }

    void at(double x, CMatrix& out) const { out = a0 + std::cos(x) * ac + std::sin(x) * as; }
};

}  // namespace

BaseFn parse_base_fn(const std::string& s) {
    if (s == "1" || s == "one") return BaseFn::one;
    if (s == "cos_b1") return BaseFn::cos_b1;
    if (s == "sin_b1") return BaseFn::sin_b1;
    if (s == "cos_b2") return BaseFn::cos_b2;
    if (s == "sin_b2") return BaseFn::sin_b2;
    if (s == "b1") return BaseFn::b1;
    if (s == "b2") return BaseFn::b2;
    throw ConfigError("unknown parameter function '" + s + "'");
}

PositionFn parse_position_fn(const std::string& s) {
    if (s == "1" || s == "one") return PositionFn::one;
    if (s == "cos_x") return PositionFn::cos_x;
    if (s == "sin_x") return PositionFn::sin_x;
    throw ConfigError("unknown position function '" + s + "'");
}

const char* to_string(BaseFn f) {
    switch (f) {
        case BaseFn::one: return "1";
        case BaseFn::cos_b1: return "cos_b1";
        case BaseFn::sin_b1: return "sin_b1";
        case BaseFn::cos_b2: return "cos_b2";
        case BaseFn::sin_b2: return "sin_b2";
        case BaseFn::b1: return "b1";
        case BaseFn::b2: return "b2";
    }
    return "?";
}

const char* to_string(PositionFn f) {
    switch (f) {
        case PositionFn::one: return "1";
        case PositionFn::cos_x: return "cos_x";
        case PositionFn::sin_x: return "sin_x";
    }
    return "?";
}

CMatrix basis_matrix(const std::string& name, int n) {
    const Complex i(0.0, 1.0);
    CMatrix m = CMatrix::Zero(n, n);
    auto index = [&](char c) {
        const int k = c - '0';
        if (c < '0' || c > '9' || k >= n) throw ConfigError("basis matrix '" + name + "': bad index");
        return k;
    };
    if (name == "I") return CMatrix::Identity(n, n);
    if (name == "s1" || name == "s2" || name == "s3") {
        if (n < 2) throw ConfigError("Pauli basis matrices need rank >= 2");
        if (name == "s1") m(0, 1) = m(1, 0) = 1.0;
        if (name == "s2") {
            m(0, 1) = -i;
            m(1, 0) = i;
        }
        if (name == "s3") {
            m(0, 0) = 1.0;
            m(1, 1) = -1.0;
        }
        return m;
    }
    if (name.size() == 2 && name[0] == 'd') {
        const int k = index(name[1]);
        m(k, k) = 1.0;
        return m;
    }
    if (name.size() == 3 && (name[0] == 'h' || name[0] == 'a')) {
        const int j = index(name[1]);
        const int k = index(name[2]);
        if (j == k) throw ConfigError("basis matrix '" + name + "': indices must differ");
        if (name[0] == 'h') {
            m(j, k) = m(k, j) = 1.0;
        } else {
            m(j, k) = -i;
            m(k, j) = i;
        }
        return m;
    }
    throw ConfigError("unknown basis matrix '" + name + "'");
}

CMatrix Dirac1DFamily::potential(const std::array<double, 2>& b, double x) const {
    CMatrix out;
    FrozenPotential(*this, b).at(x, out);
    return out;
}

double Dirac1DFamily::potential_bound(const std::array<double, 2>& b) const {
    const FrozenPotential fp(*this, b);
    auto opn = [](const CMatrix& m) {
        Eigen::JacobiSVD<CMatrix> svd(m);
        return svd.singularValues()(0);
    };
    return opn(fp.a0) + opn(fp.ac) + opn(fp.as);
}

Dirac1DFamily Dirac1DFamily::demo(double mass, double amplitude) {
    Dirac1DFamily f;
    f.rank = 2;
    f.terms = {
        {amplitude, BaseFn::sin_b1, PositionFn::one, "s3"},
        {amplitude, BaseFn::sin_b2, PositionFn::cos_x, "s1"},
        {amplitude, BaseFn::sin_b2, PositionFn::sin_x, "s2"},
        {mass, BaseFn::one, PositionFn::one, "s1"},
    };
    return f;
}

Dirac1DFamily Dirac1DFamily::constant_scalar() {
    Dirac1DFamily f;
    f.rank = 1;
    f.terms = {{1.0, BaseFn::b1, PositionFn::one, "I"}};
    return f;
}

CMatrix transfer_matrix(const Dirac1DFamily& fam, const std::array<double, 2>& b, double x0, double x1) {
    if (!(x0 >= 0.0 && x0 <= x1 && x1 <= 2.0 * kPi + 1e-12))
        throw ArgumentError("transfer_matrix: need 0 <= x0 <= x1 <= 2pi");
    if (fam.steps < 1) throw ArgumentError("transfer_matrix: steps must be positive");
    const int n = fam.rank;
    const FrozenPotential pot(fam, b);
    const double h = 2.0 * kPi / fam.steps;
    const Complex i(0.0, 1.0);

    CMatrix t = CMatrix::Identity(n, n);
    CMatrix a_lo(n, n), a_mid(n, n), a_hi(n, n);
    CMatrix k1(n, n), k2(n, n), k3(n, n), k4(n, n), tmp(n, n), next(n, n);

    auto step = [&](double x, double dx) {
        pot.at(x, a_lo);
        pot.at(x + 0.5 * dx, a_mid);
        pot.at(x + dx, a_hi);
        k1.noalias() = i * a_lo * t;
        tmp = t + (0.5 * dx) * k1;
        k2.noalias() = i * a_mid * tmp;
        tmp = t + (0.5 * dx) * k2;
        k3.noalias() = i * a_mid * tmp;
        tmp = t + dx * k3;
        k4.noalias() = i * a_hi * tmp;
        next = t + (dx / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        t.swap(next);
    };

    double x = x0;
    // Advance to the next node, then node to node, then the remainder.
    const double eps = 1e-12 * h;
    double node = std::ceil(x0 / h - 1e-9) * h;
    if (node > x1) node = x1;
    if (node - x > eps) {
        step(x, node - x);
        x = node;
    }
    while (x1 - x > eps) {
        const double dx = std::min(h, x1 - x);
        step(x, dx);
        x += dx;
    }
    return t;
}

bool integration_warning(const Dirac1DFamily& fam, const std::array<double, 2>& b) {
    return 2.0 * kPi / fam.steps * fam.potential_bound(b) > 0.5;
}

Projection calderon_projection(const Dirac1DFamily& fam, const std::array<double, 2>& b, Side side) {
    if (side == Side::left) return graph_projection(transfer_matrix(fam, b, 0.0, kPi));
    const CMatrix t = transfer_matrix(fam, b, kPi, 2.0 * kPi);
    CMatrix cols(2 * fam.rank, fam.rank);
    cols.topRows(fam.rank) = t;
    cols.bottomRows(fam.rank) = CMatrix::Identity(fam.rank, fam.rank);
    return Projection::onto_columns(cols);
}

ProjectionSection calderon_section(const Dirac1DFamily& fam, const BaseGrid& grid, Side side) {
    return ProjectionSection::sample(grid, [&](const std::array<double, 2>& b) {
        return calderon_projection(fam, b, side);
    });
}

Complex full_monodromy_det(const Dirac1DFamily& fam, const std::array<double, 2>& b) {
    const CMatrix m = transfer_matrix(fam, b, kPi, 2.0 * kPi) * transfer_matrix(fam, b, 0.0, kPi);
    return (CMatrix::Identity(fam.rank, fam.rank) - m).determinant();
}

namespace {

CMatrix half_sphere_block(double nx, double ny, double nz) {
    const Complex i(0.0, 1.0);
    CMatrix p(2, 2);
    p(0, 0) = 0.5 * (1.0 + nz);
    p(1, 1) = 0.5 * (1.0 - nz);
    p(0, 1) = 0.5 * (nx - i * ny);
    p(1, 0) = 0.5 * (nx + i * ny);
    return p;
}

}  // namespace

Projection bloch_projection(int n, const std::array<double, 2>& b, double mass) {
    const double nx = std::sin(b[0]);
    const double ny = std::sin(b[1]);
    const double nz = mass + std::cos(b[0]) + std::cos(b[1]);
    const double r = std::sqrt(nx * nx + ny * ny + nz * nz);
    if (r < 1e-12) throw DegenerateSpectrum("bloch_projection: Bloch vector vanishes");
    CMatrix p = CMatrix::Zero(2 * n, 2 * n);
    const CMatrix blk = half_sphere_block(nx / r, ny / r, nz / r);
    p(0, 0) = blk(0, 0);
    p(0, n) = blk(0, 1);
    p(n, 0) = blk(1, 0);
    p(n, n) = blk(1, 1);
    for (int k = 1; k < n; ++k) p(k, k) = 1.0;
    return Projection(std::move(p));
}

Projection sphere_bloch_projection(double theta, double phi) {
    return Projection(half_sphere_block(std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi),
                                        std::cos(theta)));
}

Projection boundary_projection(const SectionSpec& spec, int n, const std::array<double, 2>& b) {
    switch (spec.kind) {
        case SectionSpec::Kind::bloch: return bloch_projection(n, b, spec.mass);
        case SectionSpec::Kind::reference:
            if (spec.reference.rank != n) throw ConfigError("reference family rank differs from the model rank");
            return calderon_projection(spec.reference, b, Side::left);
        case SectionSpec::Kind::constant: {
            CMatrix p = CMatrix::Zero(2 * n, 2 * n);
            p.topLeftCorner(n, n).setIdentity();
            return Projection(std::move(p));
        }
    }
    throw ConfigError("unknown section kind");
}

SplitProblem make_split_problem(const Dirac1DFamily& fam, const SectionSpec& spec, const BaseGrid& grid) {
    std::vector<Projection> left, right_c, bnd;
    left.reserve(grid.vertex_count());
    right_c.reserve(grid.vertex_count());
    bnd.reserve(grid.vertex_count());
    for (std::size_t v = 0; v < grid.vertex_count(); ++v) {
        const auto b = grid.point(v);
        left.push_back(calderon_projection(fam, b, Side::left));
        right_c.push_back(calderon_projection(fam, b, Side::right).complement());
        bnd.push_back(boundary_projection(spec, fam.rank, b));
    }
    return {ProjectionSection(grid, std::move(left)), ProjectionSection(grid, std::move(right_c)),
            ProjectionSection(grid, std::move(bnd))};
}

CMatrix smoothing_perturbation(std::uint64_t seed, double gamma, int truncation) {
    if (!(gamma > 0.0)) throw ArgumentError("smoothing_perturbation: gamma must be positive");
    const int n = truncation;
    CMatrix s = CMatrix::Zero(2 * n + 1, 2 * n + 1);
    for (int j = -n; j <= n; ++j)
        for (int k = j; k <= n; ++k) {
            std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                              static_cast<std::uint32_t>(j + (1 << 20)), static_cast<std::uint32_t>(k + (1 << 20))};
            std::mt19937_64 rng(seq);
            std::uniform_real_distribution<double> unit(0.0, 1.0);
            const double envelope = std::exp(-gamma * (std::abs(j) + std::abs(k)));
            if (j == k) {
                s(j + n, j + n) = envelope * (2.0 * unit(rng) - 1.0);
                continue;
            }
            const double r = std::sqrt(unit(rng));
            const double th = 2.0 * kPi * unit(rng);
            const Complex z = envelope * std::polar(r, th);
            s(j + n, k + n) = z;
            s(k + n, j + n) = std::conj(z);
        }
    return s;
}

CylinderModel::CylinderModel(const CylinderFamily& fam) : fam_(fam) {
    const int n = fam.truncation;
    if (n < 1) throw ArgumentError("CylinderModel: truncation must be positive");
    static_operator_ = CMatrix::Zero(fam.dim(), fam.dim());
    for (int k = -n; k <= n; ++k) static_operator_(k + n, k + n) = k;
    static_operator_ += fam.static_amplitude * smoothing_perturbation(fam.seed, fam.gamma, n);
    for (std::size_t g = 0; g < generators_.size(); ++g)
        generators_[g] = smoothing_perturbation(fam.seed + 1 + g, fam.gamma, n);
}

CMatrix CylinderModel::boundary_operator(const std::array<double, 2>& b) const {
    const CMatrix gen = std::cos(b[0]) * generators_[0] + std::sin(b[0]) * generators_[1] +
                        std::cos(b[1]) * generators_[2] + std::sin(b[1]) * generators_[3];
    const CMatrix u = unitary_exp(fam_.drive_amplitude * gen);
    const CMatrix a = u * static_operator_ * u.adjoint();
    return 0.5 * (a + a.adjoint());
}

CMatrix CylinderModel::section_rotation(const std::array<double, 2>& b) const {
    const CMatrix gen = std::cos(b[1]) * generators_[4] + std::sin(b[0]) * generators_[5];
    return unitary_exp(fam_.section_amplitude * gen);
}

Projection CylinderModel::aps_projection(const std::array<double, 2>& b) const {
    return spectral_projection(boundary_operator(b), fam_.gap_tol);
}

Projection CylinderModel::grassmann_projection(const std::array<double, 2>& b) const {
    const CMatrix e = section_rotation(b);
    const CMatrix p = e * aps_projection(b).matrix() * e.adjoint();
    return Projection(0.5 * (p + p.adjoint()));
}

ProjectionSection aps_section(const CylinderFamily& fam, const BaseGrid& grid) {
    const CylinderModel model(fam);
    return ProjectionSection::sample(grid, [&](const std::array<double, 2>& b) { return model.aps_projection(b); });
}

ProjectionSection cylinder_grassmann_section(const CylinderFamily& fam, const BaseGrid& grid) {
    const CylinderModel model(fam);
    return ProjectionSection::sample(grid,
                                     [&](const std::array<double, 2>& b) { return model.grassmann_projection(b); });
}

}  // namespace detsplit
