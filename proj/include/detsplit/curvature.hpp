#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "detsplit/detline.hpp"
#include "detsplit/grassmann.hpp"

namespace detsplit {

/// Chart whose operator at (p0, p1) is the unitary polar factor of P1 P0.
Trivialization frame_chart(const Projection& p0, const Projection& p1, double cond_tol);

/// Finite family of trivializations together with a coarse atlas that picks,
/// for each atlas cell of the (periodic) base, the chart used on every
/// plaquette inside it. Chart 0 is always the canonical chart.
struct Cover {
    std::vector<Trivialization> charts;
    /// Atlas cells per axis; the grid size must be a multiple of 2 * atlas_cells.
    int atlas_cells = 16;

    /// Canonical chart plus `extra` charts with shift C, |C|_op = scale,
    /// drawn from `seed`. The chart maps are alpha_b = P1(b) C P0(b).
    static Cover generate(Eigen::Index dim, int extra, double scale, double cond_tol, std::uint64_t seed,
                          int atlas_cells);
    /// Charts on centers^2 base points b_c (nearest vertices to the lattice
    /// 2 pi (i, j) / centers): shift C = U1 W U0^* - P1 P0 at b_c, with W the
    /// unitary polar factor of U1^* P1 P0 U0, so the chart map is unitary at b_c.
    static Cover from_frames(const ProjectionSection& s0, const ProjectionSection& s1, int centers,
                             double cond_tol, int atlas_cells);
    double cond_tol() const { return charts.front().cond_tol; }
    /// Charts of the reversed bundle DET(P1, P0): shifts replaced by adjoints.
    Cover adjoint() const;
};

/// Cover recipe, resolved per bundle.
struct CoverSpec {
    int centers = 4;
    int random = 8;
    double scale = 3.0;
    double cond_tol = 2.0;
    int atlas_cells = 16;
    std::uint64_t seed = 1;

    /// Canonical chart, then the frame charts, then the random charts.
    Cover build(const ProjectionSection& s0, const ProjectionSection& s1) const;
};

/// Largest atlas cell count <= preferred that is compatible with grid size n.
int atlas_cells_for(int n, int preferred);

struct ChartAtlas {
    int cells = 0;
    /// Chart index per atlas cell (axis 0 fastest); -1 where no chart applies.
    std::vector<int> chart_of_cell;

    int chart_for_plaquette(const BaseGrid& grid, std::size_t p) const;
};

/// Assigns to each atlas cell the chart whose smallest restricted singular
/// value, minimized over the 3 x 3 cell sample vertices, is largest.
ChartAtlas build_atlas(const ProjectionSection& s0, const ProjectionSection& s1, const Cover& cover);

/// Connection 1-forms omega_alpha = Tr[(P0,P1)_alpha^{-1} P1 d(P0,P1)_alpha P0]
/// of DET(P0, P1), one per chart, sampled at vertices. Components at vertices
/// outside a chart's domain are invalid.
struct ChartedConnection {
    Cover cover;
    ChartAtlas atlas;
    std::vector<ScalarForm> omega;
    /// Smallest restricted singular value per chart and vertex.
    std::vector<std::vector<double>> min_singular;

    const BaseGrid& grid() const { return omega.front().grid(); }
    bool in_domain(std::size_t chart, std::size_t v) const {
        return min_singular[chart][v] >= 1.0 / cover.charts[chart].cond_tol;
    }
    /// Chart with the largest smallest singular value at v.
    std::size_t best_chart(std::size_t v) const;
};

ChartedConnection connection_one_form(const ProjectionSection& s0, const ProjectionSection& s1, const Cover& cover);

/// Throws CoverageError when some vertex lies in no chart domain.
void require_coverage(const ChartedConnection& conn);

/// Discrete exterior derivative of omega in the atlas chart of each
/// plaquette (density at plaquette centers). Invalid where the chart does
/// not contain all four corners.
ScalarForm curvature_of(const ChartedConnection& conn);

/// Families curvature of DET(P0, P1) for the flat boundary connection.
///   full:       Tr[Phi^{-1} R^{W1} Phi - R^{W0}] at vertices (best chart),
///               averaged over plaquette corners
///   simplified: Tr R^{W1} - Tr R^{W0} at plaquette centers
struct FamiliesCurvature {
    ScalarForm full;
    ScalarForm simplified;
};

FamiliesCurvature curvature_families_formula(const ProjectionSection& s0, const ProjectionSection& s1,
                                             const Cover& cover);

/// Transition function g_ab of DET(P0, P1) at a vertex.
Complex transition_at(const ProjectionSection& s0, const ProjectionSection& s1, const Trivialization& a,
                      const Trivialization& b, std::size_t v);

/// F = det_F[(P,I-P1)_c (P0,P)_b]^{-1} (P0,I-P1)_a - I) on range(P(D0)),
/// with charts a, b, c of the full, left and right bundles. Throws
/// NearSingular when one of the Toeplitz maps is not invertible.
Complex f_function(const SplitProblem& problem, std::size_t v, const Trivialization& a, const Trivialization& b,
                   const Trivialization& c);

/// First Chern number of the line bundle det(range P) from plaquette
/// holonomies of normalized frame overlaps det(U(b)^* U(b + mu)):
/// (1 / 2 pi i) sum_p Log(holonomy). Throws VortexOnLink when an overlap
/// modulus is below 1e-8 and ArgumentError on non-periodic grids.
int chern_number(const ProjectionSection& s);
/// Chern number of DET(P0, P1) = det(range P1) (x) det(range P0)^*.
int chern_number(const ProjectionSection& s0, const ProjectionSection& s1);
/// The holonomy sums before rounding.
double chern_sum(const ProjectionSection& s);
double chern_sum(const ProjectionSection& s0, const ProjectionSection& s1);

/// Plaquette sum of principal logs of F(next)/F(current) around each
/// plaquette, divided by 2 pi i (winding of F; integer valued).
ScalarForm f_winding(const std::vector<std::optional<Complex>>& f_values, const BaseGrid& grid);

/// Averages each 2 x 2 block of plaquettes of a form on an n x n torus onto
/// the n/2 x n/2 torus; a block is invalid if any member is.
ScalarForm coarsen_plaquettes(const ScalarForm& fine);
/// Restriction of a vertex (degree 0) or vertex-sampled 1-form to even vertices.
ScalarForm coarsen_vertices(const ScalarForm& fine);

/// max|coarse| / max|fine| over slots valid in both. NaN when no slot is.
struct RatioTest {
    double coarse_max = 0.0;
    double fine_max = 0.0;
    double ratio = 0.0;
    std::size_t samples = 0;
};
RatioTest refinement_ratio(const ScalarForm& coarse, const ScalarForm& fine_coarsened);

/// Residual of an identity between chart pairs (a, b), one vertex-sampled
/// 1-form per pair that has at least one valid sample.
struct PatchingResidual {
    std::vector<std::array<std::size_t, 2>> pairs;
    std::vector<ScalarForm> residual;
    double max() const;
};

/// Ratio test over the samples shared by equal chart pairs.
RatioTest refinement_ratio(const PatchingResidual& coarse, const PatchingResidual& fine);

/// Per-bundle curvature data on one grid.
struct BundleCurvature {
    BundleKind kind = BundleKind::full;
    ChartedConnection connection;
    ScalarForm curvature;
    FamiliesCurvature families;
    int chern = 0;
    /// Holonomy sum before rounding.
    double chern_raw = 0.0;
    /// (1 / 2 pi i) times the integral of the simplified families curvature.
    double chern_integrated = 0.0;
    double exclusion_fraction = 0.0;
};

BundleCurvature analyze_bundle(const SplitProblem& problem, BundleKind kind, const CoverSpec& spec);

/// All three bundles on one grid, with additivity, F and patching residuals.
struct SplitAnalysis {
    BundleCurvature full, left, right;
    /// R+ - R0 - R1 per plaquette.
    ScalarForm additivity;
    /// Curvature of the connection minus the simplified families formula, full bundle.
    ScalarForm families_gap;
    /// |omega+ - omega0 - omega1 - dlog F| per vertex and axis, each bundle in
    /// its best chart at the vertex.
    ScalarForm f_consistency;
    /// F in the canonical charts, where all three are invertible.
    std::vector<std::optional<Complex>> f_values;
    /// Patching residuals per bundle:
    ///   inverse ratio  |(omega_a - omega_b) - dlog g_ab|
    ///   adjoint ratio  |dlog det(Psi_b Phi_a) - omega_a - omega'_b|
    /// with Psi_b, omega'_b the chart map and connection of DET(P1, P0).
    std::map<BundleKind, PatchingResidual> patching_inverse;
    std::map<BundleKind, PatchingResidual> patching_adjoint;
    /// |D log |det|^2 - 2 Re omega_0| per vertex and axis, full bundle.
    ScalarForm metric_compatibility;

    const BundleCurvature& bundle(BundleKind k) const;
};

SplitAnalysis analyze_split(const SplitProblem& problem, const CoverSpec& spec);

using ProblemFactory = std::function<SplitProblem(const BaseGrid&)>;

/// Additivity report over two resolutions n and 2n of the torus.
struct CurvatureReport {
    int coarse_size = 0;
    int fine_size = 0;
    /// Fine-grid additivity residual R+ - R0 - R1.
    ScalarForm curvature;
    /// Fine-grid curvature of the full, left and right bundles.
    std::array<ScalarForm, 3> bundle_curvature;
    /// Fine-grid winding of F around each plaquette.
    ScalarForm f_winding;
    std::array<int, 3> chern{0, 0, 0};
    std::array<double, 3> chern_raw{0.0, 0.0, 0.0};
    std::array<double, 3> chern_integrated{0.0, 0.0, 0.0};
    std::array<double, 3> exclusion{0.0, 0.0, 0.0};
    std::map<std::string, double> residuals;
    bool chern_additive() const { return chern[0] == chern[1] + chern[2]; }
    double max_exclusion() const { return std::max({exclusion[0], exclusion[1], exclusion[2]}); }
};

/// Runs analyze_split on n x n and 2n x 2n tori and compares residuals on
/// common locations.
CurvatureReport additivity_residual(const ProblemFactory& make, int n, const CoverSpec& spec);

/// Relative residuals of the two trace identities relating Toeplitz
/// conjugates of curvature operators R_i (taken as P_i R_i P_i):
///   Tr[R0 - X01 R1 Phi01] = Tr[Phi01 R0 X01 - R1]
///   Tr[X02 R2 Phi02 - R0] = Tr[(Phi12 Phi01)^{-1} R2 (Phi12 Phi01) - R0]
/// with Phi_ij = P_j P_i and X_ij its inverse.
struct TraceIdentityResiduals {
    double conjugation_swap = 0.0;
    double composition = 0.0;
};
TraceIdentityResiduals closing_trace_identities(const Projection& p0, const Projection& p1, const Projection& p2,
                                                const CMatrix& r0, const CMatrix& r1, const CMatrix& r2,
                                                double cond_tol);

inline constexpr double kMaxExclusion = 0.05;

/// Throws CoverageError when more than 5% of the plaquettes of some bundle
/// are excluded.
void require_coverage(const CurvatureReport& r);

}  // namespace detsplit
