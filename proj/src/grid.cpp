#include "detsplit/grid.hpp"

#include <cmath>
#include <ostream>

namespace detsplit {

BaseGrid::BaseGrid(std::vector<Axis> axes) : axes_(std::move(axes)) {
    if (axes_.empty() || axes_.size() > 2) throw ArgumentError("BaseGrid: dimension must be 1 or 2");
    for (const auto& a : axes_) {
        if (a.size < 4) throw ArgumentError("BaseGrid: every axis needs at least 4 points");
        if (!(a.spacing > 0.0)) throw ArgumentError("BaseGrid: spacing must be positive");
    }
}

BaseGrid BaseGrid::torus(int n) {
    const double h = 2.0 * kPi / n;
    return BaseGrid({{n, 0.0, h, true}, {n, 0.0, h, true}});
}

BaseGrid BaseGrid::sphere(int n_theta, int n_phi) {
    return BaseGrid({{n_theta + 1, 0.0, kPi / n_theta, false}, {n_phi, 0.0, 2.0 * kPi / n_phi, true}});
}

bool BaseGrid::fully_periodic() const {
    for (const auto& a : axes_)
        if (!a.periodic) return false;
    return true;
}

std::size_t BaseGrid::vertex_count() const {
    std::size_t c = 1;
    for (const auto& a : axes_) c *= static_cast<std::size_t>(a.size);
    return c;
}

std::size_t BaseGrid::plaquette_count() const {
    if (dimension() != 2) return 0;
    return static_cast<std::size_t>(cells(0)) * static_cast<std::size_t>(cells(1));
}

std::size_t BaseGrid::vertex_index(int i, int j) const {
    return static_cast<std::size_t>(i) + static_cast<std::size_t>(size(0)) * static_cast<std::size_t>(j);
}

std::array<int, 2> BaseGrid::vertex_coords(std::size_t v) const {
    const auto n0 = static_cast<std::size_t>(size(0));
    return {static_cast<int>(v % n0), static_cast<int>(v / n0)};
}

std::size_t BaseGrid::plaquette_index(int i, int j) const {
    return static_cast<std::size_t>(i) + static_cast<std::size_t>(cells(0)) * static_cast<std::size_t>(j);
}

std::array<int, 2> BaseGrid::plaquette_coords(std::size_t p) const {
    const auto c0 = static_cast<std::size_t>(cells(0));
    return {static_cast<int>(p % c0), static_cast<int>(p / c0)};
}

std::array<double, 2> BaseGrid::point(std::size_t v) const {
    const auto ij = vertex_coords(v);
    std::array<double, 2> x{0.0, 0.0};
    for (int mu = 0; mu < dimension(); ++mu) x[mu] = axis(mu).origin + ij[mu] * axis(mu).spacing;
    return x;
}

bool BaseGrid::has_neighbor(std::size_t v, int mu, int step) const {
    if (mu < 0 || mu >= dimension()) return false;
    if (periodic(mu)) return true;
    const int k = vertex_coords(v)[mu] + step;
    return k >= 0 && k < size(mu);
}

std::size_t BaseGrid::neighbor(std::size_t v, int mu, int step) const {
    if (mu < 0 || mu >= dimension()) throw OutOfDomain("BaseGrid: axis out of range");
    auto ij = vertex_coords(v);
    int k = ij[mu] + step;
    const int n = size(mu);
    if (periodic(mu)) {
        k = ((k % n) + n) % n;
    } else if (k < 0 || k >= n) {
        throw OutOfDomain("BaseGrid: step leaves a closed axis");
    }
    ij[mu] = k;
    return vertex_index(ij[0], ij[1]);
}

std::array<std::size_t, 4> BaseGrid::plaquette_corners(std::size_t p) const {
    const auto ij = plaquette_coords(p);
    const std::size_t v00 = vertex_index(ij[0], ij[1]);
    const std::size_t v10 = neighbor(v00, 0, 1);
    const std::size_t v11 = neighbor(v10, 1, 1);
    const std::size_t v01 = neighbor(v00, 1, 1);
    return {v00, v10, v11, v01};
}

bool BaseGrid::operator==(const BaseGrid& other) const {
    if (axes_.size() != other.axes_.size()) return false;
    for (std::size_t k = 0; k < axes_.size(); ++k) {
        const auto& a = axes_[k];
        const auto& b = other.axes_[k];
        if (a.size != b.size || a.origin != b.origin || a.spacing != b.spacing || a.periodic != b.periodic)
            return false;
    }
    return true;
}

CMatrix wedge_at(const MatrixForm& a, const MatrixForm& b, std::size_t vertex) {
    if (a.degree() != 1 || b.degree() != 1) throw ArgumentError("wedge_at: expects 1-forms");
    return a[a.slot(vertex, 0)] * b[b.slot(vertex, 1)] - a[a.slot(vertex, 1)] * b[b.slot(vertex, 0)];
}

ScalarForm exterior_derivative(const ScalarForm& one_form) {
    if (one_form.degree() != 1) throw ArgumentError("exterior_derivative: expects a 1-form");
    const BaseGrid& g = one_form.grid();
    ScalarForm out(2, g, Complex(0.0));
    const double area = g.spacing(0) * g.spacing(1);
    for (std::size_t p = 0; p < g.plaquette_count(); ++p) {
        const auto c = g.plaquette_corners(p);
        const bool ok = one_form.edge_valid(c[0], 0) && one_form.edge_valid(c[1], 1) &&
                        one_form.edge_valid(c[3], 0) && one_form.edge_valid(c[0], 1);
        if (!ok) {
            out.set_valid(p, false);
            out[p] = Complex(NAN, NAN);
            continue;
        }
        const Complex circ = one_form.edge_value(c[0], 0) + one_form.edge_value(c[1], 1) -
                             one_form.edge_value(c[3], 0) - one_form.edge_value(c[0], 1);
        out[p] = circ / area;
    }
    return out;
}

Complex integrate(const ScalarForm& two_form) {
    if (two_form.degree() != 2) throw ArgumentError("integrate: expects a 2-form");
    const BaseGrid& g = two_form.grid();
    const double area = g.spacing(0) * g.spacing(1);
    Complex sum(0.0);
    for (std::size_t p = 0; p < two_form.size(); ++p)
        if (two_form.valid(p)) sum += two_form[p] * area;
    return sum;
}

void write_csv(std::ostream& out, const ScalarForm& form) {
    const BaseGrid& g = form.grid();
    const int d = g.dimension();
    out << (d == 2 ? "i,j," : "i,");
    if (form.degree() == 1) out << "mu,";
    out << "re,im\n";
    out.precision(17);
    auto emit = [&](const Complex& z, bool ok) {
        if (ok)
            out << z.real() << ',' << z.imag() << '\n';
        else
            out << "nan,nan\n";
    };
    if (form.degree() == 2) {
        for (std::size_t p = 0; p < form.size(); ++p) {
            const auto ij = g.plaquette_coords(p);
            out << ij[0] << ',' << ij[1] << ',';
            emit(form[p], form.valid(p));
        }
        return;
    }
    for (std::size_t v = 0; v < g.vertex_count(); ++v) {
        const auto ij = g.vertex_coords(v);
        const int comps = form.degree() == 1 ? d : 1;
        for (int mu = 0; mu < comps; ++mu) {
            out << ij[0] << ',';
            if (d == 2) out << ij[1] << ',';
            std::size_t k = v;
            if (form.degree() == 1) {
                out << mu << ',';
                k = form.slot(v, mu);
            }
            emit(form[k], form.valid(k));
        }
    }
}

}  // namespace detsplit
