#include "detsplit/curvature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace detsplit {

namespace {

std::vector<CMatrix> chart_operators(const ProjectionSection& s0, const ProjectionSection& s1,
                                     const Trivialization& chart) {
    std::vector<CMatrix> out;
    out.reserve(s0.size());
    for (std::size_t v = 0; v < s0.size(); ++v) {
        out.push_back(chart_operator(Fiber::of_toeplitz(s0[v], s1[v]), chart));
    }
    return out;
}

void require_torus(const BaseGrid& grid, const char* who) {
    if (grid.dimension() != 2 || !grid.fully_periodic())
        throw ArgumentError(std::string(who) + ": needs a periodic two-dimensional grid");
}

Complex principal_log_ratio(Complex next, Complex current) { return std::log(next / current); }

}  // namespace

Cover Cover::generate(Eigen::Index dim, int extra, double scale, double cond_tol, std::uint64_t seed,
                      int atlas_cells) {
    if (extra < 0) throw ArgumentError("Cover: negative chart count");
    if (cond_tol <= 0.0) throw ArgumentError("Cover: cond_tol must be positive");
    Cover c;
    c.atlas_cells = atlas_cells;
    c.charts.push_back(Trivialization::canonical(dim, cond_tol));
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (int k = 0; k < extra; ++k) {
        CMatrix m(dim, dim);
        for (Eigen::Index j = 0; j < dim; ++j)
            for (Eigen::Index i = 0; i < dim; ++i) m(i, j) = Complex(normal(rng), normal(rng));
        const double op = Eigen::BDCSVD<CMatrix>(m).singularValues()(0);
        c.charts.push_back({m * (scale / op), cond_tol});
    }
    return c;
}

Trivialization frame_chart(const Projection& p0, const Projection& p1, double cond_tol) {
    const CMatrix phi = toeplitz(p0, p1);
    const CMatrix m = restrict_to_frames(p0, p1, phi);
    Eigen::BDCSVD<CMatrix> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const CMatrix w = svd.matrixU() * svd.matrixV().adjoint();
    return {p1.frame() * w * p0.frame().adjoint() - phi, cond_tol};
}

Cover Cover::from_frames(const ProjectionSection& s0, const ProjectionSection& s1, int centers, double cond_tol,
                         int atlas_cells) {
    if (centers < 0) throw ArgumentError("Cover: negative center count");
    if (cond_tol <= 0.0) throw ArgumentError("Cover: cond_tol must be positive");
    const BaseGrid& grid = s0.grid();
    require_torus(grid, "Cover::from_frames");
    Cover c;
    c.atlas_cells = atlas_cells;
    c.charts.push_back(Trivialization::canonical(s0.dim(), cond_tol));
    for (int cj = 0; cj < centers; ++cj) {
        for (int ci = 0; ci < centers; ++ci) {
            const int i = static_cast<int>(std::lround(static_cast<double>(ci) * grid.size(0) / centers)) % grid.size(0);
            const int j = static_cast<int>(std::lround(static_cast<double>(cj) * grid.size(1) / centers)) % grid.size(1);
            const std::size_t v = grid.vertex_index(i, j);
            c.charts.push_back(frame_chart(s0[v], s1[v], cond_tol));
        }
    }
    return c;
}

Cover Cover::adjoint() const {
    Cover c = *this;
    for (Trivialization& t : c.charts) t.shift = t.shift.adjoint().eval();
    return c;
}

Cover CoverSpec::build(const ProjectionSection& s0, const ProjectionSection& s1) const {
    Cover c = Cover::from_frames(s0, s1, centers, cond_tol, atlas_cells);
    const Cover r = Cover::generate(s0.dim(), random, scale, cond_tol, seed, atlas_cells);
    c.charts.insert(c.charts.end(), r.charts.begin() + 1, r.charts.end());
    return c;
}

int atlas_cells_for(int n, int preferred) {
    int cells = std::max(1, std::min(preferred, n / 2));
    while (cells > 1 && n % (2 * cells) != 0) --cells;
    return cells;
}

int ChartAtlas::chart_for_plaquette(const BaseGrid& grid, std::size_t p) const {
    const auto ij = grid.plaquette_coords(p);
    const int span0 = grid.size(0) / cells;
    const int span1 = grid.size(1) / cells;
    return chart_of_cell[static_cast<std::size_t>(ij[1] / span1 * cells + ij[0] / span0)];
}

ChartAtlas build_atlas(const ProjectionSection& s0, const ProjectionSection& s1, const Cover& cover) {
    const BaseGrid& grid = s0.grid();
    require_torus(grid, "build_atlas");
    ChartAtlas atlas;
    atlas.cells = atlas_cells_for(std::min(grid.size(0), grid.size(1)), cover.atlas_cells);
    const int span0 = grid.size(0) / atlas.cells;
    const int span1 = grid.size(1) / atlas.cells;
    atlas.chart_of_cell.assign(static_cast<std::size_t>(atlas.cells * atlas.cells), -1);
    for (int cj = 0; cj < atlas.cells; ++cj) {
        for (int ci = 0; ci < atlas.cells; ++ci) {
            double best = -1.0;
            int best_chart = -1;
            for (std::size_t k = 0; k < cover.charts.size(); ++k) {
                double worst = std::numeric_limits<double>::infinity();
                for (int a = 0; a <= 2 && worst > best; ++a) {
                    for (int c = 0; c <= 2 && worst > best; ++c) {
                        const int i = (ci * span0 + a * span0 / 2) % grid.size(0);
                        const int j = (cj * span1 + c * span1 / 2) % grid.size(1);
                        const std::size_t v = grid.vertex_index(i, j);
                        worst = std::min(worst,
                                         chart_min_singular(Fiber::of_toeplitz(s0[v], s1[v]), cover.charts[k]));
                    }
                }
                if (worst > best) {
                    best = worst;
                    best_chart = static_cast<int>(k);
                }
            }
            if (best >= 1.0 / cover.cond_tol())
                atlas.chart_of_cell[static_cast<std::size_t>(cj * atlas.cells + ci)] = best_chart;
        }
    }
    return atlas;
}

std::size_t ChartedConnection::best_chart(std::size_t v) const {
    std::size_t best = 0;
    for (std::size_t k = 1; k < min_singular.size(); ++k)
        if (min_singular[k][v] > min_singular[best][v]) best = k;
    return best;
}

ChartedConnection connection_one_form(const ProjectionSection& s0, const ProjectionSection& s1, const Cover& cover) {
    if (!(s0.grid() == s1.grid())) throw DimensionError("connection_one_form: sections on different grids");
    if (s0.base_rank() != s1.base_rank()) throw DimensionError("connection_one_form: rank mismatch");
    const BaseGrid& grid = s0.grid();
    ChartedConnection conn;
    conn.cover = cover;
    conn.atlas = build_atlas(s0, s1, cover);
    for (const Trivialization& chart : cover.charts) {
        const std::vector<CMatrix> phi = chart_operators(s0, s1, chart);
        ScalarForm omega(1, grid, Complex(0.0));
        std::vector<double> sigma(grid.vertex_count());
        for (std::size_t v = 0; v < grid.vertex_count(); ++v) {
            sigma[v] = restricted_min_singular(s0[v], s1[v], phi[v]);
            const bool inside = sigma[v] >= 1.0 / chart.cond_tol;
            CMatrix x;
            if (inside) x = toeplitz_inverse(s0[v], s1[v], phi[v], chart.cond_tol);
            for (int mu = 0; mu < grid.dimension(); ++mu) {
                const std::size_t k = omega.slot(v, mu);
                if (!inside) {
                    omega[k] = Complex(std::nan(""), std::nan(""));
                    omega.set_valid(k, false);
                    continue;
                }
                omega[k] = (x * hom_derivative(s0, s1, phi, v, mu)).trace();
            }
        }
        conn.omega.push_back(std::move(omega));
        conn.min_singular.push_back(std::move(sigma));
    }
    return conn;
}

void require_coverage(const ChartedConnection& conn) {
    const std::size_t n = conn.grid().vertex_count();
    for (std::size_t v = 0; v < n; ++v) {
        bool covered = false;
        for (std::size_t k = 0; k < conn.omega.size() && !covered; ++k) covered = conn.in_domain(k, v);
        if (!covered) {
            const auto ij = conn.grid().vertex_coords(v);
            throw CoverageError("vertex (" + std::to_string(ij[0]) + ", " + std::to_string(ij[1]) +
                                ") lies in no chart domain");
        }
    }
}

ScalarForm curvature_of(const ChartedConnection& conn) {
    const BaseGrid& grid = conn.grid();
    ScalarForm out(2, grid, Complex(0.0));
    std::vector<ScalarForm> d;
    d.reserve(conn.omega.size());
    for (const ScalarForm& w : conn.omega) d.push_back(exterior_derivative(w));
    for (std::size_t p = 0; p < grid.plaquette_count(); ++p) {
        const int chart = conn.atlas.chart_for_plaquette(grid, p);
        if (chart < 0 || !d[static_cast<std::size_t>(chart)].valid(p)) {
            out[p] = Complex(std::nan(""), std::nan(""));
            out.set_valid(p, false);
            continue;
        }
        out[p] = d[static_cast<std::size_t>(chart)][p];
    }
    return out;
}

FamiliesCurvature curvature_families_formula(const ProjectionSection& s0, const ProjectionSection& s1,
                                             const Cover& cover) {
    const BaseGrid& grid = s0.grid();
    FamiliesCurvature out{ScalarForm(2, grid, Complex(0.0)), ScalarForm(2, grid, Complex(0.0))};
    const ScalarForm t0 = curvature_trace_form(s0);
    const ScalarForm t1 = curvature_trace_form(s1);
    for (std::size_t p = 0; p < grid.plaquette_count(); ++p) out.simplified[p] = t1[p] - t0[p];

    std::vector<std::optional<Complex>> vertex(grid.vertex_count());
    for (std::size_t v = 0; v < grid.vertex_count(); ++v) {
        const Fiber f = Fiber::of_toeplitz(s0[v], s1[v]);
        double best = -1.0;
        std::size_t chart = 0;
        for (std::size_t k = 0; k < cover.charts.size(); ++k) {
            const double s = chart_min_singular(f, cover.charts[k]);
            if (s > best) {
                best = s;
                chart = k;
            }
        }
        if (best < 1.0 / cover.charts[chart].cond_tol) continue;
        const CMatrix phi = chart_operator(f, cover.charts[chart]);
        const CMatrix x = toeplitz_inverse(s0[v], s1[v], phi, cover.charts[chart].cond_tol);
        const CMatrix r0 = vertex_curvature(s0, v);
        const CMatrix r1 = vertex_curvature(s1, v);
        vertex[v] = (x * r1 * phi - r0).trace();
    }
    for (std::size_t p = 0; p < grid.plaquette_count(); ++p) {
        Complex sum(0.0);
        bool ok = true;
        for (std::size_t v : grid.plaquette_corners(p)) {
            if (!vertex[v]) {
                ok = false;
                break;
            }
            sum += *vertex[v];
        }
        out.full[p] = ok ? 0.25 * sum : Complex(std::nan(""), std::nan(""));
        out.full.set_valid(p, ok);
    }
    return out;
}

Complex transition_at(const ProjectionSection& s0, const ProjectionSection& s1, const Trivialization& a,
                      const Trivialization& b, std::size_t v) {
    return transition(Fiber::of_toeplitz(s0[v], s1[v]), a, b);
}

Complex f_function(const SplitProblem& problem, std::size_t v, const Trivialization& a, const Trivialization& b,
                   const Trivialization& c) {
    const Projection& k0 = problem.calderon_left[v];
    const Projection& k1 = problem.calderon_right_complement[v];
    const Projection& p = problem.boundary[v];
    const CMatrix full = chart_operator(problem.fiber(BundleKind::full, v), a);
    const CMatrix left = chart_operator(problem.fiber(BundleKind::left, v), b);
    const CMatrix right = chart_operator(problem.fiber(BundleKind::right, v), c);
    (void)toeplitz_inverse(k0, p, left, b.cond_tol);
    (void)toeplitz_inverse(p, k1, right, c.cond_tol);
    const CMatrix x = toeplitz_inverse(k0, k1, (right * left).eval(), b.cond_tol * c.cond_tol);
    return restricted_det((x * full * k0.matrix()).eval(), k0.matrix());
}

namespace {

std::vector<std::array<Complex, 2>> frame_links(const ProjectionSection& s) {
    const BaseGrid& grid = s.grid();
    std::vector<std::array<Complex, 2>> links(grid.vertex_count());
    for (std::size_t v = 0; v < grid.vertex_count(); ++v) {
        for (int mu = 0; mu < 2; ++mu) {
            const std::size_t w = grid.neighbor(v, mu, +1);
            const Complex l = (s[v].frame().adjoint() * s[w].frame()).determinant();
            if (std::abs(l) < 1e-8) {
                const auto ij = grid.vertex_coords(v);
                throw VortexOnLink("frame overlap vanishes on the link at (" + std::to_string(ij[0]) + ", " +
                                   std::to_string(ij[1]) + ") along axis " + std::to_string(mu));
            }
            links[v][static_cast<std::size_t>(mu)] = l / std::abs(l);
        }
    }
    return links;
}

double holonomy_sum(const BaseGrid& grid, const std::vector<std::array<Complex, 2>>& links) {
    double total = 0.0;
    for (std::size_t p = 0; p < grid.plaquette_count(); ++p) {
        const auto c = grid.plaquette_corners(p);
        const Complex hol = links[c[0]][0] * links[c[1]][1] * std::conj(links[c[3]][0]) * std::conj(links[c[0]][1]);
        total += std::arg(hol);
    }
    return total / (2.0 * kPi);
}

std::vector<std::array<Complex, 2>> det_links(const ProjectionSection& s0, const ProjectionSection& s1) {
    if (!(s0.grid() == s1.grid())) throw DimensionError("chern_number: sections on different grids");
    auto l0 = frame_links(s0);
    const auto l1 = frame_links(s1);
    for (std::size_t v = 0; v < l0.size(); ++v)
        for (std::size_t mu = 0; mu < 2; ++mu) l0[v][mu] = l1[v][mu] * std::conj(l0[v][mu]);
    return l0;
}

}  // namespace

double chern_sum(const ProjectionSection& s) {
    require_torus(s.grid(), "chern_number");
    return holonomy_sum(s.grid(), frame_links(s));
}

double chern_sum(const ProjectionSection& s0, const ProjectionSection& s1) {
    require_torus(s0.grid(), "chern_number");
    return holonomy_sum(s0.grid(), det_links(s0, s1));
}

int chern_number(const ProjectionSection& s) { return static_cast<int>(std::lround(chern_sum(s))); }

int chern_number(const ProjectionSection& s0, const ProjectionSection& s1) {
    return static_cast<int>(std::lround(chern_sum(s0, s1)));
}

ScalarForm f_winding(const std::vector<std::optional<Complex>>& f_values, const BaseGrid& grid) {
    require_torus(grid, "f_winding");
    ScalarForm out(2, grid, Complex(0.0));
    for (std::size_t p = 0; p < grid.plaquette_count(); ++p) {
        const auto c = grid.plaquette_corners(p);
        bool ok = true;
        for (std::size_t v : c) ok = ok && f_values[v].has_value() && std::abs(*f_values[v]) > 0.0;
        if (!ok) {
            out[p] = Complex(std::nan(""), std::nan(""));
            out.set_valid(p, false);
            continue;
        }
        Complex sum(0.0);
        for (std::size_t k = 0; k < 4; ++k) sum += principal_log_ratio(*f_values[c[(k + 1) % 4]], *f_values[c[k]]);
        out[p] = sum / Complex(0.0, 2.0 * kPi);
    }
    return out;
}

ScalarForm coarsen_plaquettes(const ScalarForm& fine) {
    const BaseGrid& g = fine.grid();
    require_torus(g, "coarsen_plaquettes");
    if (fine.degree() != 2 || g.size(0) != g.size(1) || g.size(0) % 2 != 0)
        throw ArgumentError("coarsen_plaquettes: needs a 2-form on an even square torus");
    ScalarForm out(2, BaseGrid::torus(g.size(0) / 2), Complex(0.0));
    for (std::size_t p = 0; p < out.size(); ++p) {
        const auto ij = out.grid().plaquette_coords(p);
        Complex sum(0.0);
        bool ok = true;
        for (int a = 0; a < 2; ++a)
            for (int b = 0; b < 2; ++b) {
                const std::size_t q = g.plaquette_index(2 * ij[0] + a, 2 * ij[1] + b);
                ok = ok && fine.valid(q);
                sum += fine[q];
            }
        out[p] = ok ? 0.25 * sum : Complex(std::nan(""), std::nan(""));
        out.set_valid(p, ok);
    }
    return out;
}

ScalarForm coarsen_vertices(const ScalarForm& fine) {
    const BaseGrid& g = fine.grid();
    require_torus(g, "coarsen_vertices");
    if (fine.degree() == 2 || g.size(0) != g.size(1) || g.size(0) % 2 != 0)
        throw ArgumentError("coarsen_vertices: needs a vertex-sampled form on an even square torus");
    ScalarForm out(fine.degree(), BaseGrid::torus(g.size(0) / 2), Complex(0.0));
    const int comps = fine.degree() == 0 ? 1 : 2;
    for (std::size_t v = 0; v < out.grid().vertex_count(); ++v) {
        const auto ij = out.grid().vertex_coords(v);
        const std::size_t w = g.vertex_index(2 * ij[0], 2 * ij[1]);
        for (int mu = 0; mu < comps; ++mu) {
            const std::size_t from = fine.degree() == 0 ? w : fine.slot(w, mu);
            const std::size_t to = fine.degree() == 0 ? v : out.slot(v, mu);
            out[to] = fine[from];
            out.set_valid(to, fine.valid(from));
        }
    }
    return out;
}

namespace {

void accumulate(RatioTest& r, const ScalarForm& coarse, const ScalarForm& fine_coarsened) {
    if (coarse.size() != fine_coarsened.size()) throw DimensionError("refinement_ratio: size mismatch");
    for (std::size_t k = 0; k < coarse.size(); ++k) {
        if (!coarse.valid(k) || !fine_coarsened.valid(k)) continue;
        r.coarse_max = std::max(r.coarse_max, std::abs(coarse[k]));
        r.fine_max = std::max(r.fine_max, std::abs(fine_coarsened[k]));
        ++r.samples;
    }
}

void finish(RatioTest& r) { r.ratio = r.samples == 0 ? std::nan("") : r.coarse_max / r.fine_max; }

}  // namespace

RatioTest refinement_ratio(const ScalarForm& coarse, const ScalarForm& fine_coarsened) {
    RatioTest r;
    accumulate(r, coarse, fine_coarsened);
    finish(r);
    return r;
}

double PatchingResidual::max() const {
    double m = 0.0;
    for (const ScalarForm& f : residual)
        for (std::size_t k = 0; k < f.size(); ++k)
            if (f.valid(k)) m = std::max(m, std::abs(f[k]));
    return m;
}

RatioTest refinement_ratio(const PatchingResidual& coarse, const PatchingResidual& fine) {
    RatioTest r;
    for (std::size_t i = 0; i < coarse.pairs.size(); ++i) {
        const auto it = std::find(fine.pairs.begin(), fine.pairs.end(), coarse.pairs[i]);
        if (it == fine.pairs.end()) continue;
        const auto j = static_cast<std::size_t>(it - fine.pairs.begin());
        accumulate(r, coarse.residual[i], coarsen_vertices(fine.residual[j]));
    }
    finish(r);
    return r;
}

BundleCurvature analyze_bundle(const SplitProblem& problem, BundleKind kind, const CoverSpec& spec) {
    const ProjectionSection& s0 = problem.source(kind);
    const ProjectionSection& s1 = problem.target(kind);
    const Cover cover = spec.build(s0, s1);
    BundleCurvature out{kind, connection_one_form(s0, s1, cover), ScalarForm(2, s0.grid(), Complex(0.0)),
                        curvature_families_formula(s0, s1, cover)};
    out.curvature = curvature_of(out.connection);
    out.chern_raw = chern_sum(s0, s1);
    out.chern = static_cast<int>(std::lround(out.chern_raw));
    out.chern_integrated = (integrate(out.families.simplified) / Complex(0.0, 2.0 * kPi)).real();
    out.exclusion_fraction =
        1.0 - static_cast<double>(out.curvature.valid_count()) / static_cast<double>(out.curvature.size());
    return out;
}

const BundleCurvature& SplitAnalysis::bundle(BundleKind k) const {
    switch (k) {
        case BundleKind::left: return left;
        case BundleKind::right: return right;
        default: return full;
    }
}

namespace {

ScalarForm invalid_form(int degree, const BaseGrid& grid) {
    ScalarForm out(degree, grid, Complex(std::nan(""), std::nan("")));
    for (std::size_t v = 0; v < out.size(); ++v) out.set_valid(v, false);
    return out;
}

void record(ScalarForm& form, std::size_t slot, double r) {
    form[slot] = Complex(r);
    form.set_valid(slot, true);
}

void keep_if_sampled(PatchingResidual& out, std::size_t a, std::size_t b, ScalarForm&& form) {
    if (form.valid_count() == 0) return;
    out.pairs.push_back({a, b});
    out.residual.push_back(std::move(form));
}

Complex dlog_central(Complex forward, Complex backward, double h) { return std::log(forward / backward) / (2.0 * h); }

PatchingResidual patching_inverse_residual(const ProjectionSection& s0, const ProjectionSection& s1,
                                           const ChartedConnection& conn) {
    const BaseGrid& grid = s0.grid();
    PatchingResidual out;
    const std::vector<Trivialization>& charts = conn.cover.charts;
    for (std::size_t a = 0; a < charts.size(); ++a) {
        for (std::size_t b = a + 1; b < charts.size(); ++b) {
            std::vector<std::optional<Complex>> g(grid.vertex_count());
            for (std::size_t v = 0; v < grid.vertex_count(); ++v)
                if (conn.in_domain(a, v) && conn.in_domain(b, v)) g[v] = transition_at(s0, s1, charts[a], charts[b], v);
            ScalarForm res = invalid_form(1, grid);
            for (std::size_t v = 0; v < grid.vertex_count(); ++v) {
                if (!g[v]) continue;
                for (int mu = 0; mu < 2; ++mu) {
                    const std::size_t fw = grid.neighbor(v, mu, +1);
                    const std::size_t bw = grid.neighbor(v, mu, -1);
                    if (!g[fw] || !g[bw]) continue;
                    const std::size_t slot = res.slot(v, mu);
                    const Complex lhs = conn.omega[a][slot] - conn.omega[b][slot];
                    record(res, slot, std::abs(lhs - dlog_central(*g[fw], *g[bw], grid.spacing(mu))));
                }
            }
            keep_if_sampled(out, a, b, std::move(res));
        }
    }
    return out;
}

PatchingResidual patching_adjoint_residual(const ProjectionSection& s0, const ProjectionSection& s1,
                                           const ChartedConnection& conn) {
    const BaseGrid& grid = s0.grid();
    PatchingResidual out;
    const ChartedConnection reverse = connection_one_form(s1, s0, conn.cover.adjoint());
    const std::size_t n = conn.cover.charts.size();
    std::vector<CMatrix> phi(grid.vertex_count());
    for (std::size_t v = 0; v < grid.vertex_count(); ++v) phi[v] = toeplitz(s0[v], s1[v]);
    for (std::size_t a = 0; a < n; ++a) {
        for (std::size_t b = 0; b < n; ++b) {
            std::vector<std::optional<Complex>> d(grid.vertex_count());
            for (std::size_t v = 0; v < grid.vertex_count(); ++v) {
                if (!conn.in_domain(a, v) || !reverse.in_domain(b, v)) continue;
                const CMatrix phi_a = phi[v] + s1[v].matrix() * conn.cover.charts[a].shift * s0[v].matrix();
                const CMatrix psi_b = chart_operator(Fiber::of_toeplitz(s1[v], s0[v]), reverse.cover.charts[b]);
                d[v] = restricted_det((psi_b * phi_a).eval(), s0[v].matrix());
            }
            ScalarForm res = invalid_form(1, grid);
            for (std::size_t v = 0; v < grid.vertex_count(); ++v) {
                if (!d[v]) continue;
                for (int mu = 0; mu < 2; ++mu) {
                    const std::size_t fw = grid.neighbor(v, mu, +1);
                    const std::size_t bw = grid.neighbor(v, mu, -1);
                    if (!d[fw] || !d[bw]) continue;
                    const std::size_t slot = res.slot(v, mu);
                    const Complex rhs = conn.omega[a][slot] + reverse.omega[b][slot];
                    record(res, slot, std::abs(dlog_central(*d[fw], *d[bw], grid.spacing(mu)) - rhs));
                }
            }
            keep_if_sampled(out, a, b, std::move(res));
        }
    }
    return out;
}

ScalarForm metric_residual(const SplitProblem& problem, const ChartedConnection& conn) {
    const BaseGrid& grid = problem.grid();
    ScalarForm out = invalid_form(1, grid);
    std::vector<double> norm(grid.vertex_count());
    for (std::size_t v = 0; v < grid.vertex_count(); ++v) norm[v] = metric_norm_sq(problem, v, BundleKind::full);
    for (std::size_t v = 0; v < grid.vertex_count(); ++v) {
        if (!conn.in_domain(0, v)) continue;
        for (int mu = 0; mu < 2; ++mu) {
            const std::size_t fw = grid.neighbor(v, mu, +1);
            const std::size_t bw = grid.neighbor(v, mu, -1);
            if (norm[fw] <= 0.0 || norm[bw] <= 0.0) continue;
            const double lhs = (std::log(norm[fw]) - std::log(norm[bw])) / (2.0 * grid.spacing(mu));
            record(out, out.slot(v, mu), std::abs(lhs - 2.0 * conn.omega[0][out.slot(v, mu)].real()));
        }
    }
    return out;
}

}  // namespace

SplitAnalysis analyze_split(const SplitProblem& problem, const CoverSpec& spec) {
    const BaseGrid& grid = problem.grid();
    SplitAnalysis a{analyze_bundle(problem, BundleKind::full, spec),
                    analyze_bundle(problem, BundleKind::left, spec),
                    analyze_bundle(problem, BundleKind::right, spec),
                    ScalarForm(2, grid, Complex(0.0)),
                    ScalarForm(2, grid, Complex(0.0)),
                    invalid_form(1, grid),
                    {},
                    {},
                    {},
                    invalid_form(1, grid)};
    const Complex nan(std::nan(""), std::nan(""));
    for (std::size_t p = 0; p < grid.plaquette_count(); ++p) {
        const bool ok = a.full.curvature.valid(p) && a.left.curvature.valid(p) && a.right.curvature.valid(p);
        a.additivity[p] = ok ? a.full.curvature[p] - a.left.curvature[p] - a.right.curvature[p] : nan;
        a.additivity.set_valid(p, ok);
        const bool fg = a.full.curvature.valid(p);
        a.families_gap[p] = fg ? a.full.curvature[p] - a.full.families.simplified[p] : nan;
        a.families_gap.set_valid(p, fg);
    }

    a.f_values.resize(grid.vertex_count());
    const Trivialization& canon = a.full.connection.cover.charts.front();
    for (std::size_t v = 0; v < grid.vertex_count(); ++v) {
        if (!a.full.connection.in_domain(0, v) || !a.left.connection.in_domain(0, v) ||
            !a.right.connection.in_domain(0, v))
            continue;
        try {
            a.f_values[v] = f_function(problem, v, canon, canon, canon);
        } catch (const NearSingular&) {
        }
    }
    for (std::size_t v = 0; v < grid.vertex_count(); ++v) {
        const std::array<std::size_t, 3> chart{a.full.connection.best_chart(v), a.left.connection.best_chart(v),
                                               a.right.connection.best_chart(v)};
        auto f_at = [&](std::size_t w) -> std::optional<Complex> {
            if (!a.full.connection.in_domain(chart[0], w) || !a.left.connection.in_domain(chart[1], w) ||
                !a.right.connection.in_domain(chart[2], w))
                return std::nullopt;
            try {
                return f_function(problem, w, a.full.connection.cover.charts[chart[0]],
                                  a.left.connection.cover.charts[chart[1]], a.right.connection.cover.charts[chart[2]]);
            } catch (const NearSingular&) {
                return std::nullopt;
            }
        };
        if (!f_at(v)) continue;
        for (int mu = 0; mu < 2; ++mu) {
            const auto fw = f_at(grid.neighbor(v, mu, +1));
            const auto bw = f_at(grid.neighbor(v, mu, -1));
            if (!fw || !bw) continue;
            const std::size_t slot = a.full.connection.omega[0].slot(v, mu);
            const Complex lhs = a.full.connection.omega[chart[0]][slot] - a.left.connection.omega[chart[1]][slot] -
                                a.right.connection.omega[chart[2]][slot];
            record(a.f_consistency, slot, std::abs(lhs - dlog_central(*fw, *bw, grid.spacing(mu))));
        }
    }

    for (BundleKind k : {BundleKind::full, BundleKind::left, BundleKind::right}) {
        const BundleCurvature& b = a.bundle(k);
        a.patching_inverse.emplace(k, patching_inverse_residual(problem.source(k), problem.target(k), b.connection));
        a.patching_adjoint.emplace(k, patching_adjoint_residual(problem.source(k), problem.target(k), b.connection));
    }
    a.metric_compatibility = metric_residual(problem, a.full.connection);
    return a;
}

namespace {

double max_abs_real(const ScalarForm& f) {
    double m = 0.0;
    for (std::size_t k = 0; k < f.size(); ++k)
        if (f.valid(k)) m = std::max(m, std::abs(f[k].real()));
    return m;
}

}  // namespace

CurvatureReport additivity_residual(const ProblemFactory& make, int n, const CoverSpec& spec) {
    const SplitAnalysis coarse = analyze_split(make(BaseGrid::torus(n)), spec);
    const SplitAnalysis fine = analyze_split(make(BaseGrid::torus(2 * n)), spec);
    CurvatureReport r;
    r.coarse_size = n;
    r.fine_size = 2 * n;
    r.curvature = fine.additivity;
    const std::array<BundleKind, 3> kinds{BundleKind::full, BundleKind::left, BundleKind::right};
    double exclusion = 0.0;
    for (std::size_t i = 0; i < 3; ++i) {
        const BundleCurvature& b = fine.bundle(kinds[i]);
        r.chern[i] = b.chern;
        r.chern_raw[i] = b.chern_raw;
        r.chern_integrated[i] = b.chern_integrated;
        r.exclusion[i] = std::max(b.exclusion_fraction, coarse.bundle(kinds[i]).exclusion_fraction);
        exclusion = std::max(exclusion, r.exclusion[i]);
    }
    for (std::size_t i = 0; i < 3; ++i) r.bundle_curvature[i] = fine.bundle(kinds[i]).curvature;
    r.f_winding = f_winding(fine.f_values, fine.additivity.grid());

    auto ratio = [&](const std::string& name, const ScalarForm& c, const ScalarForm& f) {
        const RatioTest t = refinement_ratio(c, f);
        r.residuals[name + "_coarse"] = t.coarse_max;
        r.residuals[name + "_fine"] = t.fine_max;
        r.residuals[name + "_ratio"] = t.ratio;
    };
    ratio("additivity", coarse.additivity, coarsen_plaquettes(fine.additivity));
    ratio("families_gap", coarse.families_gap, coarsen_plaquettes(fine.families_gap));
    ratio("f_consistency", coarse.f_consistency, coarsen_vertices(fine.f_consistency));
    ratio("metric_compatibility", coarse.metric_compatibility, coarsen_vertices(fine.metric_compatibility));

    auto patching = [&](const std::string& name, const std::map<BundleKind, PatchingResidual> SplitAnalysis::*field) {
        RatioTest total;
        for (BundleKind k : kinds) {
            const RatioTest t = refinement_ratio((coarse.*field).at(k), (fine.*field).at(k));
            total.coarse_max = std::max(total.coarse_max, t.coarse_max);
            total.fine_max = std::max(total.fine_max, t.fine_max);
            total.samples += t.samples;
        }
        r.residuals[name + "_coarse"] = total.coarse_max;
        r.residuals[name + "_fine"] = total.fine_max;
        r.residuals[name + "_ratio"] = total.samples == 0 ? std::nan("") : total.coarse_max / total.fine_max;
    };
    patching("patching_inverse", &SplitAnalysis::patching_inverse);
    patching("patching_adjoint", &SplitAnalysis::patching_adjoint);

    double inverse = 0.0, adjoint = 0.0, real_part = 0.0, chern_dev = 0.0, integrated_dev = 0.0;
    for (BundleKind k : kinds) {
        inverse = std::max(inverse, fine.patching_inverse.at(k).max());
        adjoint = std::max(adjoint, fine.patching_adjoint.at(k).max());
        real_part = std::max(real_part, max_abs_real(fine.bundle(k).families.simplified));
        const double c = fine.bundle(k).chern_raw;
        chern_dev = std::max(chern_dev, std::abs(c - std::round(c)));
        const double ci = fine.bundle(k).chern_integrated;
        integrated_dev = std::max(integrated_dev, std::abs(ci - std::round(ci)));
    }
    r.residuals["patching_inverse_max"] = inverse;
    r.residuals["patching_adjoint_max"] = adjoint;
    r.residuals["families_real_part_max"] = real_part;
    r.residuals["chern_integer_deviation"] = chern_dev;
    r.residuals["chern_integrated_deviation"] = integrated_dev;
    r.residuals["exclusion_max"] = exclusion;
    return r;
}

void require_coverage(const CurvatureReport& r) {
    if (r.max_exclusion() > kMaxExclusion)
        throw CoverageError(std::to_string(100.0 * r.max_exclusion()) +
                            "% of the plaquettes of some bundle lie outside every chart");
}

TraceIdentityResiduals closing_trace_identities(const Projection& p0, const Projection& p1, const Projection& p2,
                                                const CMatrix& r0, const CMatrix& r1, const CMatrix& r2,
                                                double cond_tol) {
    const CMatrix phi01 = toeplitz(p0, p1);
    const CMatrix phi12 = toeplitz(p1, p2);
    const CMatrix phi02 = toeplitz(p0, p2);
    const CMatrix x01 = toeplitz_inverse(p0, p1, phi01, cond_tol);
    const CMatrix x02 = toeplitz_inverse(p0, p2, phi02, cond_tol);
    const CMatrix chain = phi12 * phi01;
    const CMatrix xchain = toeplitz_inverse(p0, p2, chain, cond_tol * cond_tol);
    const CMatrix& m0 = p0.matrix();
    const CMatrix& m1 = p1.matrix();
    const CMatrix& m2 = p2.matrix();
    const CMatrix w0 = m0 * r0 * m0, w1 = m1 * r1 * m1, w2 = m2 * r2 * m2;

    TraceIdentityResiduals out;
    const Complex swap_lhs = (w0 - x01 * w1 * phi01).trace();
    const Complex swap_rhs = (phi01 * w0 * x01 - w1).trace();
    out.conjugation_swap = std::abs(swap_lhs - swap_rhs) / (1.0 + std::abs(swap_lhs));
    const Complex tel_lhs = (x02 * w2 * phi02 - w0).trace();
    const Complex tel_rhs = (xchain * w2 * chain - w0).trace();
    out.composition = std::abs(tel_lhs - tel_rhs) / (1.0 + std::abs(tel_lhs));
    return out;
}

}  // namespace detsplit
