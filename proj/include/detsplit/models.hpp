#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "detsplit/detline.hpp"
#include "detsplit/grassmann.hpp"

namespace detsplit {

/// Scalar parameter dependence of a potential term.
enum class BaseFn { one, cos_b1, sin_b1, cos_b2, sin_b2, b1, b2 };
/// Position dependence of a potential term.
enum class PositionFn { one, cos_x, sin_x };

BaseFn parse_base_fn(const std::string& s);
PositionFn parse_position_fn(const std::string& s);
const char* to_string(BaseFn f);
const char* to_string(PositionFn f);

/// Hermitian basis matrix by name, for rank n:
///   I            identity
///   s1, s2, s3   Pauli matrices on the first two components
///   dK           |K><K|
///   hJK          |J><K| + |K><J|
///   aJK          -i|J><K| + i|K><J|
CMatrix basis_matrix(const std::string& name, int n);

struct PotentialTerm {
    double coeff = 0.0;
    BaseFn base = BaseFn::one;
    PositionFn position = PositionFn::one;
    std::string matrix = "I";
};

/// First-order family psi' = i a(b, x) psi on the circle [0, 2pi), cut at
/// x = 0 and x = pi into X0 = [0, pi] and X1 = [pi, 2pi]. Boundary data are
/// ordered (value at x = 0, value at x = pi).
struct Dirac1DFamily {
    int rank = 1;
    std::vector<PotentialTerm> terms;
    /// Integration steps per 2pi.
    int steps = 1024;

    CMatrix potential(const std::array<double, 2>& b, double x) const;
    double potential_bound(const std::array<double, 2>& b) const;

    /// The shipped demo family: a = A (sin(b1) s3 + sin(b2)(cos x s1 + sin x s2)) + m s1.
    static Dirac1DFamily demo(double mass = 0.5, double amplitude = 0.5);
    /// a = c with c the first base coordinate (rank 1).
    static Dirac1DFamily constant_scalar();
};

/// Solution operator x0 -> x1 of psi' = i a(b, x) psi by classical RK4 on
/// the fixed node set x_k = 2 pi k / steps (partial steps at the ends).
CMatrix transfer_matrix(const Dirac1DFamily& fam, const std::array<double, 2>& b, double x0, double x1);

/// True when h * max|a| exceeds 0.5 and RK4 accuracy degrades.
bool integration_warning(const Dirac1DFamily& fam, const std::array<double, 2>& b);

enum class Side { left, right };

/// Cauchy data projection at one parameter value.
///   left:  graph of T(0 -> pi), {(v, T v)}
///   right: {(T(pi -> 2pi) w, w)}
Projection calderon_projection(const Dirac1DFamily& fam, const std::array<double, 2>& b, Side side);
ProjectionSection calderon_section(const Dirac1DFamily& fam, const BaseGrid& grid, Side side);

/// det(I - T(0 -> 2pi)); zero iff the closed-circle operator has a kernel.
Complex full_monodromy_det(const Dirac1DFamily& fam, const std::array<double, 2>& b);

/// Grassmann section on C^n + C^n used as the boundary condition P.
struct SectionSpec {
    enum class Kind { bloch, reference, constant } kind = Kind::bloch;
    /// bloch: mass of the lattice Bloch map on the pair (u_0, v_0).
    double mass = 1.0;
    /// reference: left Calderon section of this family.
    Dirac1DFamily reference;
};

/// Rank-n projection on C^{2n}: on the pair of coordinates (u_0, v_0) it is
/// (I + n.sigma)/2 with n ~ (sin b1, sin b2, m + cos b1 + cos b2), on the
/// remaining pairs the projection onto u_k.
Projection bloch_projection(int n, const std::array<double, 2>& b, double mass);

/// (I + n.sigma)/2 for the unit vector n(theta, phi).
Projection sphere_bloch_projection(double theta, double phi);

Projection boundary_projection(const SectionSpec& spec, int n, const std::array<double, 2>& b);

SplitProblem make_split_problem(const Dirac1DFamily& fam, const SectionSpec& spec, const BaseGrid& grid);

/// Truncated boundary family on Y = S^1 with Fourier modes |k| <= N:
///   A_b = U_b (diag(k) + static_amplitude V) U_b^*,
///   U_b = exp(i drive_amplitude (cos b1 S1 + sin b1 S2 + cos b2 S3 + sin b2 S4)),
/// and Grassmann section
///   P_b = E_b Pi_>=(A_b) E_b^*, E_b = exp(i section_amplitude (cos b2 S5 + sin b1 S6)),
/// with V, S1..S6 smoothing perturbations of decay gamma.
struct CylinderFamily {
    int truncation = 32;
    double gamma = 0.5;
    std::uint64_t seed = 1;
    double static_amplitude = 0.3;
    double drive_amplitude = 0.4;
    double section_amplitude = 0.4;
    double gap_tol = 1e-6;

    Eigen::Index dim() const { return 2 * truncation + 1; }
};

/// CylinderFamily with its perturbation matrices generated once.
class CylinderModel {
public:
    explicit CylinderModel(const CylinderFamily& fam);

    const CylinderFamily& family() const { return fam_; }
    CMatrix boundary_operator(const std::array<double, 2>& b) const;
    CMatrix section_rotation(const std::array<double, 2>& b) const;
    Projection aps_projection(const std::array<double, 2>& b) const;
    Projection grassmann_projection(const std::array<double, 2>& b) const;

private:
    CylinderFamily fam_;
    CMatrix static_operator_;
    std::array<CMatrix, 6> generators_;
};

/// Hermitian S on modes |k| <= N with |S_jk| <= exp(-gamma (|j| + |k|)).
/// Entries depend only on (seed, j, k), so truncations are nested.
CMatrix smoothing_perturbation(std::uint64_t seed, double gamma, int truncation);

ProjectionSection aps_section(const CylinderFamily& fam, const BaseGrid& grid);
ProjectionSection cylinder_grassmann_section(const CylinderFamily& fam, const BaseGrid& grid);

}  // namespace detsplit
