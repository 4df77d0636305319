#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <vector>

#include "detsplit/types.hpp"

namespace detsplit {

/// Regular grid over the parameter manifold: one or two axes, each either
/// periodic (n points covering [origin, origin + n h)) or closed
/// (n points covering [origin, origin + (n-1) h]).
class BaseGrid {
public:
    struct Axis {
        int size = 0;
        double origin = 0.0;
        double spacing = 0.0;
        bool periodic = true;
    };

    BaseGrid() = default;
    explicit BaseGrid(std::vector<Axis> axes);

    /// Flat periodic n x n torus [0, 2pi)^2.
    static BaseGrid torus(int n);
    /// theta in [0, pi] closed (n_theta + 1 points), phi in [0, 2pi) periodic.
    static BaseGrid sphere(int n_theta, int n_phi);

    int dimension() const { return static_cast<int>(axes_.size()); }
    const Axis& axis(int mu) const { return axes_.at(static_cast<std::size_t>(mu)); }
    int size(int mu) const { return axis(mu).size; }
    double spacing(int mu) const { return axis(mu).spacing; }
    bool periodic(int mu) const { return axis(mu).periodic; }
    bool fully_periodic() const;

    std::size_t vertex_count() const;
    std::size_t plaquette_count() const;
    int cells(int mu) const { return periodic(mu) ? size(mu) : size(mu) - 1; }

    /// Multi-index <-> flat index (axis 0 fastest).
    std::size_t vertex_index(int i, int j = 0) const;
    std::array<int, 2> vertex_coords(std::size_t v) const;
    std::size_t plaquette_index(int i, int j) const;
    std::array<int, 2> plaquette_coords(std::size_t p) const;

    /// Parameter values of a vertex.
    std::array<double, 2> point(std::size_t v) const;

    /// Vertex one step along +-mu. Throws OutOfDomain on a closed boundary.
    std::size_t neighbor(std::size_t v, int mu, int step) const;
    bool has_neighbor(std::size_t v, int mu, int step) const;

    /// Corners of a plaquette, counter-clockwise from its lower-left vertex.
    std::array<std::size_t, 4> plaquette_corners(std::size_t p) const;

    bool operator==(const BaseGrid& other) const;

private:
    std::vector<Axis> axes_;
};

enum class Orientation { positive, negative };

/// Scalar- or matrix-valued forms sampled on a BaseGrid.
///
/// degree 0: one sample per vertex.
/// degree 1: the component omega_mu sampled at each vertex; the value on a
///           directed edge is obtained by the trapezoid rule and flips sign
///           under edge reversal.
/// degree 2: the density F_12 at each plaquette center; the plaquette value
///           flips sign under orientation reversal.
/// Samples may be marked invalid (excluded).
template <typename Value>
class DiscreteForm {
public:
    DiscreteForm() = default;
    DiscreteForm(int degree, BaseGrid grid, Value zero)
        : degree_(degree), grid_(std::move(grid)), samples_(slots(degree_, grid_), zero),
          valid_(samples_.size(), true) {
        if (degree_ < 0 || degree_ > 2) throw ArgumentError("DiscreteForm: degree must be 0, 1 or 2");
        if (degree_ == 2 && grid_.dimension() != 2)
            throw ArgumentError("DiscreteForm: 2-forms need a 2-dimensional grid");
    }

    int degree() const { return degree_; }
    const BaseGrid& grid() const { return grid_; }
    std::size_t size() const { return samples_.size(); }

    Value& operator[](std::size_t k) { return samples_[k]; }
    const Value& operator[](std::size_t k) const { return samples_[k]; }

    /// Component slot of a 1-form.
    std::size_t slot(std::size_t vertex, int mu) const {
        return vertex * static_cast<std::size_t>(grid_.dimension()) + static_cast<std::size_t>(mu);
    }

    bool valid(std::size_t k) const { return valid_[k]; }
    void set_valid(std::size_t k, bool v) { valid_[k] = v; }
    std::size_t valid_count() const {
        std::size_t c = 0;
        for (bool v : valid_) c += v ? 1 : 0;
        return c;
    }

    /// Integral of a 1-form over the edge v -> v + mu (or its reverse).
    Value edge_value(std::size_t v, int mu, Orientation o = Orientation::positive) const {
        const std::size_t w = grid_.neighbor(v, mu, +1);
        Value val = (samples_[slot(v, mu)] + samples_[slot(w, mu)]) * (0.5 * grid_.spacing(mu));
        return o == Orientation::positive ? val : Value(-val);
    }

    bool edge_valid(std::size_t v, int mu) const {
        return grid_.has_neighbor(v, mu, +1) && valid_[slot(v, mu)] &&
               valid_[slot(grid_.neighbor(v, mu, +1), mu)];
    }

    /// Oriented plaquette density of a 2-form.
    Value plaquette_value(std::size_t p, Orientation o = Orientation::positive) const {
        return o == Orientation::positive ? samples_[p] : Value(-samples_[p]);
    }

private:
    static std::size_t slots(int degree, const BaseGrid& g) {
        switch (degree) {
            case 0: return g.vertex_count();
            case 1: return g.vertex_count() * static_cast<std::size_t>(g.dimension());
            default: return g.dimension() == 2 ? g.plaquette_count() : 0;
        }
    }

    int degree_ = 0;
    BaseGrid grid_;
    std::vector<Value> samples_;
    std::vector<bool> valid_;
};

using ScalarForm = DiscreteForm<Complex>;
using MatrixForm = DiscreteForm<CMatrix>;

/// Wedge product of two matrix-valued 1-forms at a vertex:
/// (a ^ b)_{12} = a_1 b_2 - a_2 b_1.
CMatrix wedge_at(const MatrixForm& a, const MatrixForm& b, std::size_t vertex);

/// Circulation of a scalar 1-form around a plaquette divided by its area
/// (discrete exterior derivative). Invalid where an edge is invalid.
ScalarForm exterior_derivative(const ScalarForm& one_form);

/// Sum over valid plaquettes of density * cell area, in index order.
Complex integrate(const ScalarForm& two_form);

/// CSV export. Columns: vertex/plaquette indices per axis, then mu for
/// 1-forms, then re, im. Invalid samples are written as nan.
void write_csv(std::ostream& out, const ScalarForm& form);

}  // namespace detsplit
