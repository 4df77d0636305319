#pragma once

#include <functional>
#include <vector>

#include "detsplit/grid.hpp"
#include "detsplit/types.hpp"

namespace detsplit {

/// Orthogonal projection on C^dim. Construction validates
/// |P^2 - P| <= tol and |P - P*| <= tol and caches an orthonormal frame of
/// the range (columns), so that P = frame * frame^*.
class Projection {
public:
    static constexpr double kTolerance = 1e-10;

    Projection() = default;
    explicit Projection(CMatrix matrix, double tol = kTolerance);

    static Projection identity(Eigen::Index dim);
    /// Projection onto the span of the given (not necessarily orthonormal) columns.
    static Projection onto_columns(const CMatrix& columns);

    Eigen::Index dim() const { return matrix_.rows(); }
    Eigen::Index rank() const { return frame_.cols(); }
    const CMatrix& matrix() const { return matrix_; }
    const CMatrix& frame() const { return frame_; }

    Projection complement() const;

private:
    CMatrix matrix_;
    CMatrix frame_;
};

/// Projection onto the eigenvectors of a Hermitian matrix with eigenvalue >= 0.
/// Zero eigenvalues count as non-negative; eigenvalues in (-gap_tol, 0) raise
/// DegenerateSpectrum.
Projection spectral_projection(const CMatrix& a, double gap_tol);

/// Projection onto the graph {(v, T v)} in C^n + C^n:
/// [[G, G T^*], [T G, T G T^*]] with G = (I + T^* T)^{-1}.
Projection graph_projection(const CMatrix& t);

/// Ambient matrix P1 P0 of the generalized Toeplitz map range(P0) -> range(P1).
CMatrix toeplitz(const Projection& p0, const Projection& p1);

/// The restriction U1^* phi U0 of an ambient map phi: range(P0) -> range(P1)
/// to orthonormal frames.
CMatrix restrict_to_frames(const Projection& p0, const Projection& p1, const CMatrix& phi);

/// Smallest singular value of phi restricted to range(P0) -> range(P1).
double restricted_min_singular(const Projection& p0, const Projection& p1, const CMatrix& phi);

/// Ambient X with X phi = P0 and phi X = P1. Throws NearSingular when the
/// smallest restricted singular value is below 1/cond_tol and
/// DimensionError when the ranks differ.
CMatrix toeplitz_inverse(const Projection& p0, const Projection& p1, const CMatrix& phi, double cond_tol);

/// Projection values over a BaseGrid with constant rank.
class ProjectionSection {
public:
    ProjectionSection(BaseGrid grid, std::vector<Projection> values);
    /// Samples `f` at every grid point.
    static ProjectionSection sample(const BaseGrid& grid,
                                    const std::function<Projection(const std::array<double, 2>&)>& f);

    const BaseGrid& grid() const { return grid_; }
    const Projection& operator[](std::size_t v) const { return values_[v]; }
    std::size_t size() const { return values_.size(); }
    Eigen::Index base_rank() const { return base_rank_; }
    Eigen::Index dim() const { return values_.front().dim(); }
    /// max |P(b + mu) - P(b)| / h over all edges (operator norm).
    double smoothness_constant() const { return smoothness_; }

    ProjectionSection complement() const;
    /// Conjugation by a constant unitary, b -> U P(b) U^*.
    ProjectionSection conjugated(const CMatrix& unitary) const;

    /// Central difference (P(b + mu) - P(b - mu)) / 2h.
    CMatrix derivative(std::size_t v, int mu) const;

private:
    BaseGrid grid_;
    std::vector<Projection> values_;
    Eigen::Index base_rank_ = 0;
    double smoothness_ = 0.0;
};

/// Discrete Hom-connection for the flat ambient connection:
/// P1(b) [phi(b + mu) - phi(b - mu)] / 2h P0(b).
/// `phi` holds one ambient matrix per vertex.
CMatrix hom_derivative(const ProjectionSection& s0, const ProjectionSection& s1,
                       const std::vector<CMatrix>& phi, std::size_t v, int mu);

/// Tr(P [d_1 P, d_2 P]) at plaquette centers. P and its derivatives at a
/// center are built from the four corner projections.
ScalarForm curvature_trace_form(const ProjectionSection& s);

/// Operator-valued plaquette curvature P (d_1P d_2P - d_2P d_1P) P at the
/// center of plaquette p (same stencil as curvature_trace_form).
CMatrix plaquette_curvature(const ProjectionSection& s, std::size_t p);

/// Operator-valued vertex curvature P (d_1P d_2P - d_2P d_1P) P with central
/// differences.
CMatrix vertex_curvature(const ProjectionSection& s, std::size_t v);

/// (I - P(b)) dP_mu P(b), central difference.
CMatrix second_fundamental_form(const ProjectionSection& s, std::size_t v, int mu);

/// Tr(P dP) as a scalar 1-form (vertex components, central differences).
ScalarForm trace_connection_form(const ProjectionSection& s);

/// exp(i h) for Hermitian h.
CMatrix unitary_exp(const CMatrix& hermitian);

}  // namespace detsplit
