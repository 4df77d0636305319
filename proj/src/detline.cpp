#include "detsplit/detline.hpp"

#include <sstream>

namespace detsplit {

Fiber Fiber::of_operator(const CMatrix& a) {
    if (a.rows() != a.cols()) throw DimensionError("Fiber: pad non-square operators with pad_to_index_zero");
    return {Projection::identity(a.rows()), Projection::identity(a.rows()), a};
}

Fiber Fiber::of_toeplitz(const Projection& p0, const Projection& p1) { return {p0, p1, toeplitz(p0, p1)}; }

Trivialization Trivialization::canonical(Eigen::Index dim, double cond_tol) {
    return {CMatrix::Zero(dim, dim), cond_tol};
}

CMatrix chart_operator(const Fiber& f, const Trivialization& chart) {
    if (chart.shift.rows() != f.target.dim() || chart.shift.cols() != f.source.dim())
        throw DimensionError("chart_operator: chart shift has the wrong shape");
    return f.base + f.target.matrix() * chart.shift * f.source.matrix();
}

double chart_min_singular(const Fiber& f, const Trivialization& chart) {
    return restricted_min_singular(f.source, f.target, chart_operator(f, chart));
}

bool in_domain(const Fiber& f, const Trivialization& chart) {
    return f.source.rank() == f.target.rank() && chart_min_singular(f, chart) >= 1.0 / chart.cond_tol;
}

CMatrix chart_inverse(const Fiber& f, const Trivialization& chart) {
    try {
        return toeplitz_inverse(f.source, f.target, chart_operator(f, chart), chart.cond_tol);
    } catch (const NearSingular& e) {
        throw OutOfChart(std::string("point outside the chart domain: ") + e.what());
    }
}

LineElement canonical_det(const Fiber& f) { return {f, f.base, Complex(1.0)}; }

Complex coordinate(const LineElement& e, const Trivialization& chart) {
    const CMatrix x = chart_inverse(e.fiber, chart);
    return e.scale * restricted_det((x * e.rep * e.fiber.source.matrix()).eval(), e.fiber.source.matrix());
}

Complex transition(const Fiber& f, const Trivialization& a, const Trivialization& b) {
    const CMatrix xb = chart_inverse(f, b);
    (void)chart_inverse(f, a);
    const CMatrix e = chart_operator(f, a) * xb;
    return restricted_det(e, f.target.matrix());
}

Complex inner_product(const LineElement& e1, const LineElement& e2) {
    if (e1.fiber.source.dim() != e2.fiber.source.dim())
        throw DimensionError("inner_product: elements live over different fibers");
    const CMatrix& p0 = e1.fiber.source.matrix();
    const CMatrix gram = p0 * e1.rep.adjoint() * e2.rep * p0;
    return std::conj(e1.scale) * e2.scale * restricted_det(gram, p0);
}

double metric_norm_sq(const Fiber& f) {
    const CMatrix& p0 = f.source.matrix();
    const CMatrix laplacian = p0 * f.base.adjoint() * f.base * p0;
    return restricted_det(laplacian, p0).real();
}

double metric_norm_sq_in_chart(const Fiber& f, const Trivialization& chart) {
    const Complex z = coordinate(canonical_det(f), chart);
    const LineElement frame{f, chart_operator(f, chart), Complex(1.0)};
    return std::norm(z) * inner_product(frame, frame).real();
}

LineElement sew(const LineElement& e01, const LineElement& e12) {
    const Fiber& f01 = e01.fiber;
    const Fiber& f12 = e12.fiber;
    if (f01.target.dim() != f12.source.dim() ||
        (f01.target.matrix() - f12.source.matrix()).norm() > Projection::kTolerance)
        throw DimensionError("sew: the middle projections differ");
    if (f01.source.rank() != f01.target.rank() || f12.source.rank() != f12.target.rank())
        throw DimensionError("sew: rank mismatch");
    Fiber composite = Fiber::of_toeplitz(f01.source, f12.target);
    return {std::move(composite), e12.rep * e01.rep, e01.scale * e12.scale};
}

Complex sew_correction(const LineElement& e01, const Trivialization& a, const LineElement& e12,
                       const Trivialization& b, const Trivialization& c) {
    const Fiber composite = Fiber::of_toeplitz(e01.fiber.source, e12.fiber.target);
    const CMatrix chain = chart_operator(e12.fiber, b) * chart_operator(e01.fiber, a);
    const CMatrix x = chart_inverse(composite, c);
    const CMatrix& p0 = composite.source.matrix();
    return restricted_det((x * chain * p0).eval(), p0);
}

CMatrix pad_to_index_zero(const CMatrix& a) {
    const Eigen::Index n = std::max(a.rows(), a.cols());
    CMatrix out = CMatrix::Zero(n, n);
    out.topLeftCorner(a.rows(), a.cols()) = a;
    return out;
}

const char* to_string(BundleKind k) {
    switch (k) {
        case BundleKind::full: return "full";
        case BundleKind::left: return "left";
        case BundleKind::right: return "right";
    }
    return "?";
}

const ProjectionSection& SplitProblem::source(BundleKind k) const {
    return k == BundleKind::right ? boundary : calderon_left;
}

const ProjectionSection& SplitProblem::target(BundleKind k) const {
    return k == BundleKind::left ? boundary : calderon_right_complement;
}

Fiber SplitProblem::fiber(BundleKind k, std::size_t v) const {
    return Fiber::of_toeplitz(source(k)[v], target(k)[v]);
}

double metric_norm_sq(const SplitProblem& problem, std::size_t v, BundleKind which) {
    return metric_norm_sq(problem.fiber(which, v));
}

}  // namespace detsplit
