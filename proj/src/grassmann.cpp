#include "detsplit/grassmann.hpp"

#include <cmath>
#include <sstream>

namespace detsplit {

namespace {

/// Operator norm of a Hermitian matrix.
double hermitian_norm(const CMatrix& m) {
    if (m.size() == 0) return 0.0;
    Eigen::SelfAdjointEigenSolver<CMatrix> es(m, Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace

Projection::Projection(CMatrix matrix, double tol) : matrix_(std::move(matrix)) {
    if (matrix_.rows() != matrix_.cols() || matrix_.rows() == 0)
        throw DimensionError("Projection: matrix must be square and non-empty");
    if (!matrix_.allFinite()) throw InvalidProjection("Projection: non-finite entries");
    const double herm = (matrix_ - matrix_.adjoint()).norm();
    const double idem = (matrix_ * matrix_ - matrix_).norm();
    if (herm > tol || idem > tol) {
        std::ostringstream msg;
        msg << "Projection: |P - P*| = " << herm << ", |P^2 - P| = " << idem << " exceed " << tol;
        throw InvalidProjection(msg.str());
    }
    Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (matrix_ + matrix_.adjoint()));
    const RVector& ev = es.eigenvalues();
    Eigen::Index first = 0;
    while (first < ev.size() && ev(first) < 0.5) ++first;
    frame_ = es.eigenvectors().rightCols(ev.size() - first);

    const double tr = matrix_.trace().real();
    if (std::abs(tr - static_cast<double>(frame_.cols())) > 1e-8)
        throw InvalidProjection("Projection: trace is not the rank");
}

Projection Projection::identity(Eigen::Index dim) { return Projection(CMatrix::Identity(dim, dim)); }

Projection Projection::onto_columns(const CMatrix& columns) {
    Eigen::HouseholderQR<CMatrix> qr(columns);
    const CMatrix q = qr.householderQ() * CMatrix::Identity(columns.rows(), columns.cols());
    return Projection(q * q.adjoint());
}

Projection Projection::complement() const {
    CMatrix c = -matrix_;
    c.diagonal().array() += 1.0;
    return Projection(std::move(c));
}

Projection spectral_projection(const CMatrix& a, double gap_tol) {
    if (a.rows() != a.cols()) throw DimensionError("spectral_projection: matrix must be square");
    if (!(gap_tol > 0.0)) throw ArgumentError("spectral_projection: gap_tol must be positive");
    if ((a - a.adjoint()).norm() > 1e-10) throw ArgumentError("spectral_projection: matrix is not Hermitian");
    Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (a + a.adjoint()));
    const RVector& ev = es.eigenvalues();
    Eigen::Index first = 0;
    while (first < ev.size() && ev(first) < 0.0) {
        if (ev(first) > -gap_tol) {
            std::ostringstream msg;
            msg << "spectral_projection: eigenvalue " << ev(first) << " inside (-" << gap_tol << ", 0)";
            throw DegenerateSpectrum(msg.str());
        }
        ++first;
    }
    const CMatrix u = es.eigenvectors().rightCols(ev.size() - first);
    return Projection(u * u.adjoint());
}

Projection graph_projection(const CMatrix& t) {
    if (t.rows() != t.cols()) throw DimensionError("graph_projection: T must be square");
    const Eigen::Index n = t.rows();
    CMatrix gram = t.adjoint() * t;
    gram.diagonal().array() += 1.0;
    const CMatrix g = gram.llt().solve(CMatrix::Identity(n, n));
    CMatrix p(2 * n, 2 * n);
    p.topLeftCorner(n, n) = g;
    p.topRightCorner(n, n) = g * t.adjoint();
    p.bottomLeftCorner(n, n) = t * g;
    p.bottomRightCorner(n, n) = t * g * t.adjoint();
    // Symmetrize away rounding in the solve.
    return Projection(0.5 * (p + p.adjoint()));
}

CMatrix toeplitz(const Projection& p0, const Projection& p1) {
    if (p0.dim() != p1.dim()) throw DimensionError("toeplitz: projections act on different spaces");
    return p1.matrix() * p0.matrix();
}

CMatrix restrict_to_frames(const Projection& p0, const Projection& p1, const CMatrix& phi) {
    if (phi.rows() != p1.dim() || phi.cols() != p0.dim())
        throw DimensionError("restrict_to_frames: ambient map has the wrong shape");
    return p1.frame().adjoint() * phi * p0.frame();
}

double restricted_min_singular(const Projection& p0, const Projection& p1, const CMatrix& phi) {
    const CMatrix m = restrict_to_frames(p0, p1, phi);
    if (m.rows() != m.cols()) return 0.0;
    if (m.size() == 0) return INFINITY;
    Eigen::BDCSVD<CMatrix> svd(m);
    return svd.singularValues()(svd.singularValues().size() - 1);
}

CMatrix toeplitz_inverse(const Projection& p0, const Projection& p1, const CMatrix& phi, double cond_tol) {
    if (p0.rank() != p1.rank())
        throw DimensionError("toeplitz_inverse: ranges have different dimensions (index != 0)");
    const CMatrix m = restrict_to_frames(p0, p1, phi);
    Eigen::BDCSVD<CMatrix> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const RVector& s = svd.singularValues();
    const double smin = s.size() ? s(s.size() - 1) : INFINITY;
    if (smin < 1.0 / cond_tol) {
        std::ostringstream msg;
        msg << "toeplitz_inverse: smallest restricted singular value " << smin << " < 1/" << cond_tol;
        throw NearSingular(msg.str(), smin);
    }
    const CMatrix minv = svd.matrixV() * s.cwiseInverse().asDiagonal() * svd.matrixU().adjoint();
    return p0.frame() * minv * p1.frame().adjoint();
}

ProjectionSection::ProjectionSection(BaseGrid grid, std::vector<Projection> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
    if (values_.size() != grid_.vertex_count())
        throw DimensionError("ProjectionSection: one projection per grid point required");
    base_rank_ = values_.front().rank();
    for (const auto& p : values_) {
        if (p.dim() != values_.front().dim()) throw DimensionError("ProjectionSection: dimension varies");
        if (p.rank() != base_rank_) throw InvalidProjection("ProjectionSection: rank is not constant");
    }
    for (std::size_t v = 0; v < values_.size(); ++v)
        for (int mu = 0; mu < grid_.dimension(); ++mu)
            if (grid_.has_neighbor(v, mu, 1)) {
                const double d = hermitian_norm(values_[grid_.neighbor(v, mu, 1)].matrix() - values_[v].matrix());
                smoothness_ = std::max(smoothness_, d / grid_.spacing(mu));
            }
}

ProjectionSection ProjectionSection::sample(const BaseGrid& grid,
                                            const std::function<Projection(const std::array<double, 2>&)>& f) {
    std::vector<Projection> vals;
    vals.reserve(grid.vertex_count());
    for (std::size_t v = 0; v < grid.vertex_count(); ++v) vals.push_back(f(grid.point(v)));
    return ProjectionSection(grid, std::move(vals));
}

ProjectionSection ProjectionSection::complement() const {
    std::vector<Projection> vals;
    vals.reserve(values_.size());
    for (const auto& p : values_) vals.push_back(p.complement());
    return ProjectionSection(grid_, std::move(vals));
}

ProjectionSection ProjectionSection::conjugated(const CMatrix& unitary) const {
    std::vector<Projection> vals;
    vals.reserve(values_.size());
    for (const auto& p : values_) {
        const CMatrix m = unitary * p.matrix() * unitary.adjoint();
        vals.emplace_back(0.5 * (m + m.adjoint()));
    }
    return ProjectionSection(grid_, std::move(vals));
}

CMatrix ProjectionSection::derivative(std::size_t v, int mu) const {
    const std::size_t fwd = grid_.neighbor(v, mu, +1);
    const std::size_t bwd = grid_.neighbor(v, mu, -1);
    return (values_[fwd].matrix() - values_[bwd].matrix()) / (2.0 * grid_.spacing(mu));
}

CMatrix hom_derivative(const ProjectionSection& s0, const ProjectionSection& s1,
                       const std::vector<CMatrix>& phi, std::size_t v, int mu) {
    const BaseGrid& g = s0.grid();
    if (!(g == s1.grid())) throw DimensionError("hom_derivative: sections live on different grids");
    if (phi.size() != g.vertex_count()) throw DimensionError("hom_derivative: phi needs one value per vertex");
    const std::size_t fwd = g.neighbor(v, mu, +1);
    const std::size_t bwd = g.neighbor(v, mu, -1);
    return s1[v].matrix() * ((phi[fwd] - phi[bwd]) / (2.0 * g.spacing(mu))) * s0[v].matrix();
}

namespace {

struct CenterStencil {
    CMatrix p, d1, d2;
};

CenterStencil center_stencil(const ProjectionSection& s, std::size_t p) {
    const BaseGrid& g = s.grid();
    const auto c = g.plaquette_corners(p);
    const CMatrix& p00 = s[c[0]].matrix();
    const CMatrix& p10 = s[c[1]].matrix();
    const CMatrix& p11 = s[c[2]].matrix();
    const CMatrix& p01 = s[c[3]].matrix();
    return {0.25 * (p00 + p10 + p11 + p01), ((p10 + p11) - (p00 + p01)) / (2.0 * g.spacing(0)),
            ((p01 + p11) - (p00 + p10)) / (2.0 * g.spacing(1))};
}

}  // namespace

ScalarForm curvature_trace_form(const ProjectionSection& s) {
    const BaseGrid& g = s.grid();
    ScalarForm out(2, g, Complex(0.0));
    for (std::size_t p = 0; p < g.plaquette_count(); ++p) {
        const auto st = center_stencil(s, p);
        out[p] = (st.p * (st.d1 * st.d2 - st.d2 * st.d1)).trace();
    }
    return out;
}

CMatrix plaquette_curvature(const ProjectionSection& s, std::size_t p) {
    const auto st = center_stencil(s, p);
    return st.p * (st.d1 * st.d2 - st.d2 * st.d1) * st.p;
}

CMatrix vertex_curvature(const ProjectionSection& s, std::size_t v) {
    const CMatrix& p = s[v].matrix();
    const CMatrix d1 = s.derivative(v, 0);
    const CMatrix d2 = s.derivative(v, 1);
    return p * (d1 * d2 - d2 * d1) * p;
}

CMatrix second_fundamental_form(const ProjectionSection& s, std::size_t v, int mu) {
    const CMatrix& p = s[v].matrix();
    CMatrix q = -p;
    q.diagonal().array() += 1.0;
    return q * s.derivative(v, mu) * p;
}

ScalarForm trace_connection_form(const ProjectionSection& s) {
    const BaseGrid& g = s.grid();
    ScalarForm out(1, g, Complex(0.0));
    for (std::size_t v = 0; v < g.vertex_count(); ++v)
        for (int mu = 0; mu < g.dimension(); ++mu) {
            const std::size_t k = out.slot(v, mu);
            if (!g.has_neighbor(v, mu, 1) || !g.has_neighbor(v, mu, -1)) {
                out.set_valid(k, false);
                continue;
            }
            out[k] = (s[v].matrix() * s.derivative(v, mu)).trace();
        }
    return out;
}

CMatrix unitary_exp(const CMatrix& hermitian) {
    Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (hermitian + hermitian.adjoint()));
    const CVector phases = (es.eigenvalues().cast<Complex>() * Complex(0.0, 1.0)).array().exp();
    return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

}  // namespace detsplit
