#pragma once

#include <vector>

#include "detsplit/grassmann.hpp"
#include "detsplit/opcalc.hpp"

namespace detsplit {

/// Fiber of a determinant line bundle: an admissible map `base` from
/// range(source) to range(target), stored as an ambient matrix with
/// base = target * base * source. Plain square matrices use identity
/// projections.
struct Fiber {
    Projection source;
    Projection target;
    CMatrix base;

    static Fiber of_operator(const CMatrix& a);
    static Fiber of_toeplitz(const Projection& p0, const Projection& p1);
};

/// Element [rep, scale] of Det(base). Two elements are compared through
/// their coordinates only.
struct LineElement {
    Fiber fiber;
    CMatrix rep;
    Complex scale{1.0, 0.0};
};

/// Local trivialization over U_alpha = {b : base_b + alpha_b invertible},
/// with alpha_b = P1(b) shift P0(b) of rank <= rank(P0). The zero shift is
/// the canonical chart. A point is in the domain when the restricted
/// smallest singular value of base + alpha is at least 1/cond_tol.
struct Trivialization {
    CMatrix shift;
    double cond_tol = 1e3;

    static Trivialization canonical(Eigen::Index dim, double cond_tol = 1e3);
};

/// base + alpha as an ambient matrix.
CMatrix chart_operator(const Fiber& f, const Trivialization& chart);
double chart_min_singular(const Fiber& f, const Trivialization& chart);
bool in_domain(const Fiber& f, const Trivialization& chart);
/// Ambient inverse of the chart operator; throws OutOfChart outside the domain.
CMatrix chart_inverse(const Fiber& f, const Trivialization& chart);

/// [base, 1].
LineElement canonical_det(const Fiber& f);

/// z_alpha(e) = scale * det_F((base + alpha)^{-1} rep - I) on range(source).
Complex coordinate(const LineElement& e, const Trivialization& chart);

/// g_ab = det_F((base + alpha)(base + beta)^{-1} - I). Coordinates obey
/// z_b = g_ab z_a and the cocycle g_ab g_bc = g_ac.
Complex transition(const Fiber& f, const Trivialization& a, const Trivialization& b);

/// conj(scale1) scale2 det_F(rep1^* rep2 - I).
Complex inner_product(const LineElement& e1, const LineElement& e2);

/// |det|^2 = det_F(Delta - I) with Delta = base^* base on range(source).
double metric_norm_sq(const Fiber& f);

/// |det|^2 assembled in a chart: |z_alpha(det)|^2 * |[base + alpha, 1]|^2.
double metric_norm_sq_in_chart(const Fiber& f, const Trivialization& chart);

/// [rep12 rep01, scale01 scale12] in Det of the composite fiber
/// range(P0) -> range(P2), whose base is the Toeplitz map P2 P0.
LineElement sew(const LineElement& e01, const LineElement& e12);

/// Factor g with z_c(sew(e01, e12)) = z_a(e01) z_b(e12) g, where a, b, c are
/// charts of the three fibers: g = det((P2P0 + gamma)^{-1} (A12 + beta)(A01 + alpha)).
/// It is 1 when the sewn fiber is trivialized by the composite chart.
Complex sew_correction(const LineElement& e01, const Trivialization& a, const LineElement& e12,
                       const Trivialization& b, const Trivialization& c);

/// A (m x n, index n - m) padded by zero rows or columns to a square matrix.
CMatrix pad_to_index_zero(const CMatrix& a);

/// The three determinant bundles of a partitioned problem.
enum class BundleKind { full, left, right };

const char* to_string(BundleKind k);

/// Boundary data of a split family over a grid: the Calderon section
/// P(D0), the complement I - P(D1) of the right Calderon section, and a
/// Grassmann section P.
///   full  = (P(D0), I - P(D1))
///   left  = (P(D0), P)
///   right = (P, I - P(D1))
struct SplitProblem {
    ProjectionSection calderon_left;
    ProjectionSection calderon_right_complement;
    ProjectionSection boundary;

    const BaseGrid& grid() const { return calderon_left.grid(); }
    const ProjectionSection& source(BundleKind k) const;
    const ProjectionSection& target(BundleKind k) const;
    Fiber fiber(BundleKind k, std::size_t v) const;
};

double metric_norm_sq(const SplitProblem& problem, std::size_t v, BundleKind which);

}  // namespace detsplit
