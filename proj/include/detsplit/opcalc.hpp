#pragma once

// Trace-class calculus on dense matrices: trace, trace norm, traces of
// exterior powers and the Fredholm determinant det_F(1 + A).
//
// All functions accept any Eigen dense expression and work for real or
// complex scalars.

#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "detsplit/types.hpp"

namespace detsplit {

enum class DetMethod { dense, series };

struct SchattenProfile {
    double trace_norm = 0.0;
    double operator_norm = 0.0;
};

namespace detail {

template <typename Derived>
void require_square(const Eigen::MatrixBase<Derived>& a, const char* op) {
    if (a.rows() != a.cols()) {
        throw DimensionError(std::string(op) + ": matrix is " + std::to_string(a.rows()) + "x" +
                             std::to_string(a.cols()) + ", expected square");
    }
}

}  // namespace detail

template <typename Derived>
typename Derived::Scalar trace(const Eigen::MatrixBase<Derived>& a) {
    detail::require_square(a, "trace");
    return a.trace();
}

/// Sum of singular values.
template <typename Derived>
double trace_norm(const Eigen::MatrixBase<Derived>& a) {
    if (a.size() == 0) return 0.0;
    using Plain = typename Derived::PlainObject;
    Eigen::JacobiSVD<Plain> svd(a.eval());
    return svd.singularValues().sum();
}

template <typename Derived>
SchattenProfile schatten_profile(const Eigen::MatrixBase<Derived>& a) {
    if (a.size() == 0) return {};
    using Plain = typename Derived::PlainObject;
    Eigen::JacobiSVD<Plain> svd(a.eval());
    const auto& s = svd.singularValues();
    return {s.sum(), s.size() ? s(0) : 0.0};
}

/// Elementary symmetric polynomials e_0..e_rmax of the eigenvalues of `a`,
/// from the power sums tr(a^k) via Newton's identities
///   r e_r = sum_{k=1}^{r} (-1)^{k-1} e_{r-k} p_k.
/// Entries with r > dim(a) are zero.
template <typename Derived>
std::vector<typename Derived::Scalar> elementary_symmetric(const Eigen::MatrixBase<Derived>& a,
                                                           Eigen::Index rmax) {
    using Scalar = typename Derived::Scalar;
    using Plain = typename Derived::PlainObject;
    detail::require_square(a, "elementary_symmetric");
    if (rmax < 0) throw ArgumentError("elementary_symmetric: negative order");

    const Eigen::Index n = a.rows();
    const Eigen::Index top = std::min(rmax, n);
    std::vector<Scalar> e(static_cast<std::size_t>(rmax + 1), Scalar(0));
    std::vector<Scalar> p(static_cast<std::size_t>(top + 1), Scalar(0));
    e[0] = Scalar(1);

    const Plain base = a.eval();
    Plain power = base;
    for (Eigen::Index r = 1; r <= top; ++r) {
        if (r > 1) power = (power * base).eval();
        p[r] = power.trace();
        Scalar acc(0);
        for (Eigen::Index k = 1; k <= r; ++k) {
            const Scalar term = e[r - k] * p[k];
            acc += (k % 2 == 1) ? term : -term;
        }
        e[r] = acc / static_cast<double>(r);
    }
    return e;
}

/// tr(wedge^r a): the r-th elementary symmetric polynomial of the eigenvalues.
template <typename Derived>
typename Derived::Scalar wedge_trace(const Eigen::MatrixBase<Derived>& a, Eigen::Index r) {
    using Scalar = typename Derived::Scalar;
    detail::require_square(a, "wedge_trace");
    if (r < 0) throw ArgumentError("wedge_trace: negative order");
    if (r > a.rows()) return Scalar(0);
    return elementary_symmetric(a, r)[static_cast<std::size_t>(r)];
}

/// det_F(1 + a) = sum_r tr(wedge^r a).
///
/// `dense` is the LU determinant of I + a. `series` accumulates the
/// exterior-power traces and stops once the last term and the a-priori tail
/// bound sum_{s>r} |a|_tr^s / s! both fall below tol * (1 + |partial sum|),
/// or when r reaches dim(a).
template <typename Derived>
typename Derived::Scalar fredholm_det(const Eigen::MatrixBase<Derived>& a,
                                      DetMethod method = DetMethod::dense, double tol = 1e-14) {
    using Scalar = typename Derived::Scalar;
    using Plain = typename Derived::PlainObject;
    detail::require_square(a, "fredholm_det");
    if (!(tol > 0.0)) throw ArgumentError("fredholm_det: tol must be positive");

    const Eigen::Index n = a.rows();
    if (n == 0) return Scalar(1);
    if (method == DetMethod::dense) {
        Plain shifted = a.eval();
        shifted.diagonal().array() += Scalar(1);
        return shifted.partialPivLu().determinant();
    }

    const Plain base = a.eval();
    const double norm = trace_norm(base);
    Plain power = base;
    std::vector<Scalar> e{Scalar(1)};
    std::vector<Scalar> p{Scalar(0)};
    Scalar sum(1);
    // term_bound = norm^r / r!
    double term_bound = 1.0;
    for (Eigen::Index r = 1; r <= n; ++r) {
        if (r > 1) power = (power * base).eval();
        p.push_back(power.trace());
        Scalar acc(0);
        for (Eigen::Index k = 1; k <= r; ++k) {
            const Scalar t = e[r - k] * p[k];
            acc += (k % 2 == 1) ? t : -t;
        }
        const Scalar er = acc / static_cast<double>(r);
        e.push_back(er);
        sum += er;

        term_bound *= norm / static_cast<double>(r);
        // tail <= term_bound * sum_{j>=1} (norm/(r+1))^j
        const double q = norm / static_cast<double>(r + 1);
        const double tail = q < 1.0 ? term_bound * q / (1.0 - q) : INFINITY;
        const double scale = tol * (1.0 + std::abs(sum));
        if (std::abs(er) < scale && tail < scale) break;
    }
    return sum;
}

/// Determinant of an endomorphism `e` of range(p), both given as ambient
/// matrices with e = p e p: det(e|range p) = det_F(1 + (e - p)).
template <typename DerivedE, typename DerivedP>
typename DerivedE::Scalar restricted_det(const Eigen::MatrixBase<DerivedE>& e,
                                         const Eigen::MatrixBase<DerivedP>& p) {
    return fredholm_det((e - p).eval());
}

}  // namespace detsplit
