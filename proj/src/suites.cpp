#include "detsplit/suites.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include <Eigen/Eigenvalues>

#include "detsplit/opcalc.hpp"

namespace detsplit {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Rng {
    std::mt19937_64 gen;
    std::normal_distribution<double> normal{0.0, 1.0};

    explicit Rng(std::uint64_t seed, std::uint64_t stream) {
        std::seed_seq seq{seed, stream};
        gen.seed(seq);
    }

    int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(gen); }
    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(gen); }

    CMatrix gaussian(Eigen::Index rows, Eigen::Index cols) {
        CMatrix m(rows, cols);
        for (Eigen::Index j = 0; j < cols; ++j)
            for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = Complex(normal(gen), normal(gen));
        return m;
    }

    /// Gaussian matrix rescaled to trace norm t.
    CMatrix trace_class(Eigen::Index dim, double t) {
        const CMatrix m = gaussian(dim, dim);
        return m * (t / trace_norm(m));
    }

    CMatrix hermitian(Eigen::Index dim) {
        const CMatrix m = gaussian(dim, dim);
        return 0.5 * (m + m.adjoint());
    }

    Projection projection(Eigen::Index dim, Eigen::Index rank) { return Projection::onto_columns(gaussian(dim, rank)); }
};

double rel(Complex a, Complex b) {
    const double scale = std::max(std::abs(a), std::abs(b));
    return scale == 0.0 ? 0.0 : std::abs(a - b) / scale;
}

struct Collector {
    std::string suite;
    std::vector<InvariantResult> out;

    void upper(const std::string& name, double value, double threshold, const std::string& note = "") {
        out.push_back({suite, name, value, threshold, -kInf, note});
    }
    void lower(const std::string& name, double value, double bound, const std::string& note = "") {
        out.push_back({suite, name, value, kInf, bound, note});
    }
    void band(const std::string& name, double value, double lo, double hi, const std::string& note = "") {
        out.push_back({suite, name, value, hi, lo, note});
    }
};

/// Max of a running statistic where NaN poisons the result.
void raise(double& acc, double v) {
    if (std::isnan(v) || std::isnan(acc)) acc = std::nan("");
    else acc = std::max(acc, v);
}

}  // namespace

const std::vector<std::string>& suite_names() {
    static const std::vector<std::string> names{"opcalc", "grassmann", "detline", "models", "curvature", "all"};
    return names;
}

std::vector<InvariantResult> opcalc_suite(const RunConfig& cfg) {
    Collector c{"opcalc", {}};
    Rng rng(cfg.seed, 1);

    double series = 0.0, mult = 0.0, slope = 0.0, wedge = 0.0, cyclic = 0.0, block = 0.0, eig = 0.0, minors = 0.0,
           similar = 0.0;
    for (int k = 0; k < 200; ++k) {
        const int dim = rng.integer(2, 64);
        const CMatrix a = rng.trace_class(dim, rng.uniform(0.1, 4.0));
        raise(series, rel(fredholm_det(a, DetMethod::series), fredholm_det(a)));

        if (k % 4 != 0) continue;
        const CMatrix b = rng.trace_class(dim, rng.uniform(0.1, 4.0));
        raise(mult, rel(fredholm_det((a + b + a * b).eval()), fredholm_det(a) * fredholm_det(b)));

        const Complex tr = trace(a);
        auto quotient = [&](double eps) { return (fredholm_det((eps * a).eval()) - 1.0) / eps; };
        const double eps = 1e-5;
        const Complex richardson = 2.0 * quotient(eps / 2) - quotient(eps);
        raise(slope, std::abs(richardson - tr) / std::max(1.0, std::abs(tr)));

        const double norm = trace_norm(a);
        double bound = 1.0;
        for (int r = 1; r <= 6; ++r) {
            bound *= norm / r;
            raise(wedge, std::abs(wedge_trace(a, r)) / bound);
        }

        raise(cyclic, std::abs(trace(a * b) - trace(b * a)) / (1.0 + std::abs(trace(a * b))));

        CMatrix tri = CMatrix::Zero(2 * dim, 2 * dim);
        tri.topLeftCorner(dim, dim) = a;
        tri.topRightCorner(dim, dim) = rng.gaussian(dim, dim);
        tri.bottomRightCorner(dim, dim) = b;
        raise(block, rel(fredholm_det(tri), fredholm_det(a) * fredholm_det(b)));

        Eigen::ComplexEigenSolver<CMatrix> es(a);
        Complex prod(1.0);
        for (Eigen::Index i = 0; i < dim; ++i) prod *= 1.0 + es.eigenvalues()(i);
        raise(eig, rel(fredholm_det(a, DetMethod::series), prod));

        CMatrix sim = rng.gaussian(dim, dim);
        sim.diagonal().array() += 2.0 * std::sqrt(static_cast<double>(dim));
        const CMatrix conj = sim * (CMatrix::Identity(dim, dim) + a) * sim.inverse() - CMatrix::Identity(dim, dim);
        raise(similar, rel(fredholm_det(conj), fredholm_det(a)));

        if (dim <= 8) {
            Complex m2(0.0);
            for (int i = 0; i < dim; ++i)
                for (int j = i + 1; j < dim; ++j) m2 += a(i, i) * a(j, j) - a(i, j) * a(j, i);
            raise(minors, rel(wedge_trace(a, 2), m2));
        }
    }
    c.upper("series_vs_dense", series, cfg.tol, "200 matrices, dim 2..64, trace norm <= 4");
    c.upper("multiplicativity", mult, cfg.tol);
    c.upper("trace_slope_richardson", slope, 1e-8);
    c.upper("wedge_trace_bound", wedge, 1.0 + 1e-12, "|tr wedge^r A| r! / |A|_1^r");
    c.upper("trace_cyclicity", cyclic, cfg.tol);
    c.upper("block_triangular", block, cfg.tol);
    c.upper("eigenvalue_product", eig, cfg.tol);
    c.upper("principal_minors", minors, cfg.tol);
    c.upper("similarity_invariance", similar, cfg.tol);
    return std::move(c.out);
}

std::vector<InvariantResult> grassmann_suite(const RunConfig& cfg) {
    Collector c{"grassmann", {}};
    Rng rng(cfg.seed, 2);

    double idem = 0.0, graph = 0.0, left_inv = 0.0, right_inv = 0.0;
    for (int k = 0; k < 50; ++k) {
        const int dim = rng.integer(2, 16);
        const Projection p = spectral_projection(rng.hermitian(dim), 1e-8);
        const CMatrix& m = p.matrix();
        raise(idem, std::max((m * m - m).norm(), (m - m.adjoint()).norm()));

        const CMatrix t = rng.gaussian(dim, dim);
        CMatrix cols(2 * dim, dim);
        cols << CMatrix::Identity(dim, dim), t;
        raise(graph, (graph_projection(t).matrix() - Projection::onto_columns(cols).matrix()).norm());

        const int rank = rng.integer(1, dim - 1);
        const Projection p0 = rng.projection(dim, rank);
        const Projection p1 = rng.projection(dim, rank);
        const CMatrix phi = toeplitz(p0, p1);
        const CMatrix x = toeplitz_inverse(p0, p1, phi, 1e12);
        const double scale = 1.0 + x.norm() * phi.norm();
        raise(left_inv, (x * phi - p0.matrix()).norm() / scale);
        raise(right_inv, (phi * x - p1.matrix()).norm() / scale);
    }
    c.upper("spectral_projection_valid", idem, 1e-10, "|P^2 - P| and |P - P*|");
    c.upper("graph_projection_vs_qr", graph, 1e-10);
    c.upper("toeplitz_left_inverse", left_inv, cfg.tol, "X Phi = P0");
    c.upper("toeplitz_right_inverse", right_inv, cfg.tol, "Phi X = P1");

    const BaseGrid sphere = BaseGrid::sphere(64, 64);
    const ProjectionSection bloch_sphere = ProjectionSection::sample(
        sphere, [](const std::array<double, 2>& b) { return sphere_bloch_projection(b[0], b[1]); });
    const Complex total = integrate(curvature_trace_form(bloch_sphere));
    const double two_pi = 2.0 * std::numbers::pi;
    c.upper("sphere_bloch_integral", std::min(std::abs(total - Complex(0, two_pi)), std::abs(total + Complex(0, two_pi))) / two_pi,
            1e-2, "relative distance of the trace-form integral to +-2 pi i on a 64 x 64 sphere grid");

    const BaseGrid torus = BaseGrid::torus(cfg.grid);
    const ProjectionSection qwz = ProjectionSection::sample(
        torus, [&](const std::array<double, 2>& b) { return bloch_projection(1, b, cfg.section.mass); });
    const double chern = chern_sum(qwz);
    c.upper("bloch_chern_unit", std::abs(std::abs(chern) - 1.0), 1e-6, "rank-1 Bloch control");

    double re = 0.0;
    const ScalarForm form = curvature_trace_form(qwz);
    for (std::size_t p = 0; p < form.size(); ++p) raise(re, std::abs(form[p].real()));
    c.upper("trace_form_imaginary", re, cfg.tol);

    const CMatrix u = unitary_exp(rng.hermitian(2));
    const ScalarForm rotated = curvature_trace_form(qwz.conjugated(u));
    double gauge = 0.0;
    for (std::size_t p = 0; p < form.size(); ++p) raise(gauge, std::abs(rotated[p] - form[p]));
    c.upper("trace_form_unitary_invariance", gauge, 1e-10);

    auto closedness = [&](int n) {
        const ProjectionSection s = ProjectionSection::sample(BaseGrid::torus(n), [&](const std::array<double, 2>& b) {
            return bloch_projection(1, b, cfg.section.mass);
        });
        const ScalarForm d = exterior_derivative(trace_connection_form(s));
        double m = 0.0;
        for (std::size_t p = 0; p < d.size(); ++p) raise(m, std::abs(d[p]));
        return m;
    };
    c.band("d_trace_connection_ratio", closedness(2 * cfg.grid) / closedness(4 * cfg.grid), 3.0, 5.0,
           "max |d Tr(P dP)| decays as h^2, grids 2n and 4n");

    const double two_pi_val = 2.0 * std::numbers::pi;
    auto integrality = [&](const ProjectionSection& s) {
        const Complex k = integrate(curvature_trace_form(s)) / Complex(0.0, -two_pi_val);
        return std::abs(k - std::round(k.real()));
    };
    if (cfg.model == RunConfig::Model::dirac) {
        const SplitProblem problem = make_problem(cfg, BaseGrid::torus(256));
        double worst = 0.0;
        for (const ProjectionSection* s : {&problem.calderon_left, &problem.calderon_right_complement, &problem.boundary})
            raise(worst, integrality(*s));
        c.upper("trace_form_integral_dirac", worst, 1e-3, "Calderon and boundary sections on a 256 x 256 torus, integral / -2 pi i");
    }
    const BaseGrid cyl_grid = BaseGrid::torus(16);
    c.upper("trace_form_integral_cylinder",
            std::max(integrality(aps_section(cfg.cylinder, cyl_grid)),
                     integrality(cylinder_grassmann_section(cfg.cylinder, cyl_grid))),
            1e-3, "APS and Grassmann sections on a 16 x 16 torus");

    std::vector<double> distance;
    for (int n : {8, 16, 32, 64}) {
        CylinderFamily f = cfg.cylinder;
        f.truncation = n;
        const CylinderModel model(f);
        const std::array<double, 2> b{0.3, 0.7};
        distance.push_back(trace_norm((model.grassmann_projection(b).matrix() - model.aps_projection(b).matrix()).eval()));
    }
    const auto [lo, hi] = std::minmax_element(distance.begin(), distance.end());
    c.upper("grassmann_aps_trace_norm_uniform", (*hi - *lo) / *hi, 1e-2,
            "spread of |P - Pi|_tr over N = 8, 16, 32, 64; max " + std::to_string(*hi));
    return std::move(c.out);
}

namespace {

struct RandomFiber {
    Projection p0, p1;
    Fiber fiber;
};

RandomFiber random_fiber(Rng& rng, Eigen::Index dim, Eigen::Index rank) {
    RandomFiber r{rng.projection(dim, rank), rng.projection(dim, rank), {}};
    r.fiber = Fiber::of_toeplitz(r.p0, r.p1);
    return r;
}

/// Random chart of scale 1 that contains the fiber.
Trivialization random_chart(Rng& rng, const Fiber& f) {
    for (;;) {
        const CMatrix m = rng.gaussian(f.source.dim(), f.source.dim());
        Trivialization t{m / m.norm(), 1e3};
        if (in_domain(f, t)) return t;
    }
}

LineElement random_element(Rng& rng, const Fiber& f) {
    const CMatrix r = rng.gaussian(f.source.dim(), f.source.dim());
    return {f, (f.base + 0.5 * f.target.matrix() * r * f.source.matrix()).eval(),
            Complex(rng.uniform(0.5, 2.0), rng.uniform(-1.0, 1.0))};
}

/// Chart of the composite fiber P0 -> P2 under which sewing is multiplicative.
Trivialization composite_chart(const Fiber& f01, const Trivialization& a, const Fiber& f12,
                               const Trivialization& b) {
    const CMatrix prod = chart_operator(f12, b) * chart_operator(f01, a);
    const Fiber f02 = Fiber::of_toeplitz(f01.source, f12.target);
    return {(f12.target.matrix() * prod * f01.source.matrix() - f02.base).eval(), 1e3};
}

}  // namespace

std::vector<InvariantResult> detline_suite(const RunConfig& cfg) {
    Collector c{"detline", {}};
    Rng rng(cfg.seed, 3);

    double cocycle = 0.0, gauge = 0.0;
    for (int k = 0; k < 100; ++k) {
        const int dim = rng.integer(2, 12);
        const RandomFiber rf = random_fiber(rng, dim, rng.integer(1, dim - 1));
        const Trivialization a = random_chart(rng, rf.fiber);
        const Trivialization b = random_chart(rng, rf.fiber);
        const Trivialization d = random_chart(rng, rf.fiber);
        const Complex g = transition(rf.fiber, a, b) * transition(rf.fiber, b, d) * transition(rf.fiber, d, a);
        raise(cocycle, std::abs(g - 1.0));

        const LineElement e = random_element(rng, rf.fiber);
        const Complex za = coordinate(e, a);
        const Complex zb = coordinate(e, b);
        raise(gauge, std::abs(zb - transition(rf.fiber, a, b) * za) / std::max(1.0, std::abs(zb)));
    }
    c.upper("cocycle", cocycle, cfg.tol, "|g_ab g_bc g_ca - 1| over 100 fibers and chart triples");
    c.upper("gauge_law", gauge, 1e-10, "z_b = g_ab z_a");

    double mult = 0.0, correction = 0.0, assoc = 0.0;
    for (int k = 0; k < 100; ++k) {
        const int dim = rng.integer(2, 24);
        const int rank = rng.integer(1, dim - 1);
        const Projection p0 = rng.projection(dim, rank), p1 = rng.projection(dim, rank),
                         p2 = rng.projection(dim, rank), p3 = rng.projection(dim, rank);
        const Fiber f01 = Fiber::of_toeplitz(p0, p1), f12 = Fiber::of_toeplitz(p1, p2),
                    f23 = Fiber::of_toeplitz(p2, p3);
        const LineElement e01 = random_element(rng, f01), e12 = random_element(rng, f12),
                          e23 = random_element(rng, f23);
        const Trivialization a = random_chart(rng, f01), b = random_chart(rng, f12);
        const LineElement e02 = sew(e01, e12);

        const Trivialization comp = composite_chart(f01, a, f12, b);
        const Complex za = coordinate(e01, a), zb = coordinate(e12, b);
        raise(mult, rel(coordinate(e02, comp), za * zb));

        const Trivialization d = random_chart(rng, e02.fiber);
        raise(correction, rel(coordinate(e02, d), za * zb * sew_correction(e01, a, e12, b, d)));

        const LineElement left = sew(e02, e23);
        const LineElement right = sew(e01, sew(e12, e23));
        const Trivialization chart = random_chart(rng, left.fiber);
        raise(assoc, rel(coordinate(left, chart), coordinate(right, chart)));
    }
    c.upper("sewing_multiplicativity", mult, cfg.tol, "z_c(e01 . e12) = z_a(e01) z_b(e12), composite chart");
    c.upper("sewing_correction", correction, cfg.tol, "arbitrary chart of the sewn fiber");
    c.upper("sewing_associativity", assoc, cfg.tol);

    const SplitProblem problem = make_problem(cfg, BaseGrid::torus(cfg.grid));
    double agree = 0.0, direct = 0.0, at_zero = 0.0, coverage = 1.0;
    std::size_t zeros = 0;
    for (BundleKind kind : {BundleKind::full, BundleKind::left, BundleKind::right}) {
        const Cover cover = cfg.cover.build(problem.source(kind), problem.target(kind));
        std::vector<std::array<double, 3>> samples;
        double top = 0.0;
        for (std::size_t v = 0; v < problem.grid().vertex_count(); ++v) {
            const Fiber f = problem.fiber(kind, v);
            std::vector<std::pair<double, std::size_t>> ranked;
            for (std::size_t i = 0; i < cover.charts.size(); ++i)
                if (in_domain(f, cover.charts[i])) ranked.push_back({chart_min_singular(f, cover.charts[i]), i});
            if (ranked.size() < 2) continue;
            std::sort(ranked.rbegin(), ranked.rend());
            samples.push_back({metric_norm_sq_in_chart(f, cover.charts[ranked[0].second]),
                               metric_norm_sq_in_chart(f, cover.charts[ranked[1].second]), metric_norm_sq(f)});
            top = std::max(top, std::abs(samples.back()[2]));
        }
        // Below this floor a value is an exact zero up to rounding.
        const double floor = 1e-12 * top;
        for (const auto& [m1, m2, md] : samples) {
            if (std::max({std::abs(m1), std::abs(m2), std::abs(md)}) <= floor) {
                ++zeros;
                raise(at_zero, std::max({std::abs(m1), std::abs(m2), std::abs(md)}) / top);
                continue;
            }
            raise(agree, rel(m1, m2));
            raise(direct, rel(m1, md));
        }
        coverage = std::min(coverage, static_cast<double>(samples.size()) / problem.grid().vertex_count());
    }
    c.upper("metric_two_charts", agree, 1e-8, "|det|^2 through the two best charts at each vertex");
    c.upper("metric_chart_vs_direct", direct, 1e-8, "chart value against the Toeplitz-Laplacian det_F");
    c.upper("metric_zeros_consistent", at_zero, 1e-12,
            std::to_string(zeros) + " vertices where |det|^2 vanishes; all evaluations agree there");
    c.lower("metric_two_chart_coverage", coverage, 0.95, "fraction of vertices inside two charts");

    double block = 0.0, hermitian = 0.0;
    for (int k = 0; k < 50; ++k) {
        const int d0 = rng.integer(1, 8), d2 = rng.integer(1, 8);
        const CMatrix a0 = CMatrix::Identity(d0, d0) + 0.5 * rng.gaussian(d0, d0);
        const CMatrix a2 = CMatrix::Identity(d2, d2) + 0.5 * rng.gaussian(d2, d2);
        CMatrix m = CMatrix::Zero(d0 + d2, d0 + d2);
        m.topLeftCorner(d0, d0) = a0;
        m.topRightCorner(d0, d2) = rng.gaussian(d0, d2);
        m.bottomRightCorner(d2, d2) = a2;
        const CMatrix s0 = rng.gaussian(d0, d0), s2 = rng.gaussian(d2, d2);
        CMatrix shift = CMatrix::Zero(d0 + d2, d0 + d2);
        shift.topLeftCorner(d0, d0) = s0;
        shift.bottomRightCorner(d2, d2) = s2;
        const Fiber whole = Fiber::of_operator(m), f0 = Fiber::of_operator(a0), f2 = Fiber::of_operator(a2);
        const Complex z = coordinate(canonical_det(whole), {shift, 1e8});
        const Complex z0 = coordinate(canonical_det(f0), {s0, 1e8});
        const Complex z2 = coordinate(canonical_det(f2), {s2, 1e8});
        raise(block, rel(z, z0 * z2));

        const LineElement e1 = random_element(rng, whole), e2 = random_element(rng, whole);
        raise(hermitian, std::abs(inner_product(e1, e2) - std::conj(inner_product(e2, e1))) /
                             std::max(1.0, std::abs(inner_product(e1, e2))));
    }
    c.upper("block_triangular_coordinate", block, cfg.tol, "exact sequence 0 -> A0 -> A -> A2 -> 0");
    c.upper("inner_product_hermitian", hermitian, 1e-12);

    const CMatrix wide = rng.gaussian(3, 5);
    const CMatrix padded = pad_to_index_zero(wide);
    c.upper("padding_kernel_det", std::abs(Fiber::of_operator(padded).base.determinant()), cfg.tol,
            "3 x 5 operator padded by zero rows");
    c.upper("padding_keeps_block", (padded.topRows(3) - wide).norm(), 0.0);
    return std::move(c.out);
}

SplitProblem make_problem(const RunConfig& cfg, const BaseGrid& grid) {
    if (cfg.model != RunConfig::Model::dirac)
        throw ConfigError("split problems need [model] kind = dirac");
    return make_split_problem(cfg.dirac, cfg.section, grid);
}

SweepResult run_sweep(const RunConfig& cfg) {
    if (cfg.model != RunConfig::Model::dirac) throw ConfigError("sweep needs [model] kind = dirac");
    const SweepSpec& s = cfg.sweep;
    auto point = [&](double t) {
        std::array<double, 2> b{s.fixed, s.fixed};
        b[static_cast<std::size_t>(s.axis)] = t;
        return b;
    };
    auto fiber = [&](double t) {
        const std::array<double, 2> b = point(t);
        return Fiber::of_toeplitz(calderon_projection(cfg.dirac, b, Side::left),
                                  calderon_projection(cfg.dirac, b, Side::right).complement());
    };
    constexpr int kCharts = 8;
    std::vector<Trivialization> charts;
    for (int k = 0; k < kCharts; ++k) {
        const Fiber f = fiber(s.lo + (k + 0.5) * (s.hi - s.lo) / kCharts);
        charts.push_back(frame_chart(f.source, f.target, 1e6));
    }

    SweepResult out;
    const double step = (s.hi - s.lo) / (s.samples - 1);
    for (int k = 0; k < s.samples; ++k) {
        const double t = s.lo + k * step;
        const Fiber f = fiber(t);
        out.metric.push_back({t, Complex(metric_norm_sq(f), 0.0)});
        out.monodromy.push_back({t, full_monodromy_det(cfg.dirac, point(t))});
        const Trivialization* best = nullptr;
        double best_sigma = 0.0;
        for (const Trivialization& chart : charts) {
            const double sigma = chart_min_singular(f, chart);
            if (sigma > best_sigma) best_sigma = sigma, best = &chart;
        }
        const Complex z = best && in_domain(f, *best) ? coordinate(canonical_det(f), *best)
                                                      : Complex(std::nan(""), std::nan(""));
        out.coordinate.push_back({t, z});
    }
    return out;
}

std::vector<double> local_zeros(const std::vector<std::pair<double, Complex>>& rows, double floor) {
    double top = 0.0;
    for (const auto& r : rows)
        if (!std::isnan(std::abs(r.second))) top = std::max(top, std::abs(r.second));
    std::vector<double> zeros;
    for (std::size_t k = 0; k < rows.size(); ++k) {
        const double m = std::abs(rows[k].second);
        if (std::isnan(m) || m > floor * top) continue;
        // A tie with the previous sample was already reported.
        const bool left = k == 0 || !(std::abs(rows[k - 1].second) <= m);
        const bool right = k + 1 == rows.size() || !(std::abs(rows[k + 1].second) < m);
        if (left && right) zeros.push_back(rows[k].first);
    }
    return zeros;
}

namespace {

/// Largest distance from an integer in [lo, hi] to the nearest zero, and
/// from a zero to the nearest integer, in units of `step`.
double zero_mismatch(const std::vector<double>& zeros, double lo, double hi, double step) {
    double worst = 0.0;
    for (int m = static_cast<int>(std::ceil(lo)); m <= static_cast<int>(std::floor(hi)); ++m) {
        double d = kInf;
        for (double z : zeros) d = std::min(d, std::abs(z - m));
        worst = std::max(worst, d / step);
    }
    for (double z : zeros) worst = std::max(worst, std::abs(z - std::round(z)) / step);
    return worst;
}

}  // namespace

std::vector<InvariantResult> models_suite(const RunConfig& cfg) {
    Collector c{"models", {}};
    const std::array<double, 2> b{1.0, 2.0};

    Dirac1DFamily zero;
    zero.rank = cfg.dirac.rank;
    c.upper("transfer_zero_potential", (transfer_matrix(zero, b, 0.0, 2.0 * std::numbers::pi) -
                                        CMatrix::Identity(zero.rank, zero.rank)).norm(), 1e-12);

    Dirac1DFamily scalar = Dirac1DFamily::constant_scalar();
    scalar.steps = 4096;
    double closed = 0.0, calderon = 0.0;
    for (double cval : {-0.5, 0.3, 1.0, 1.7, 2.5}) {
        const std::array<double, 2> bc{cval, 0.0};
        const CMatrix t = transfer_matrix(scalar, bc, 0.4, 2.9);
        raise(closed, std::abs(t(0, 0) - std::exp(Complex(0.0, cval * 2.5))));
        CMatrix v(2, 1);
        v << 1.0, std::exp(Complex(0.0, cval * std::numbers::pi));
        raise(calderon, (calderon_projection(scalar, bc, Side::left).matrix() -
                         Projection::onto_columns(v).matrix()).norm());
    }
    c.upper("transfer_scalar_closed_form", closed, 1e-10, "T = exp(i c (x1 - x0))");
    c.upper("calderon_scalar_closed_form", calderon, 1e-10);

    const double pi = std::numbers::pi;
    const CMatrix whole = transfer_matrix(cfg.dirac, b, 0.0, 2.0 * pi);
    const CMatrix split = transfer_matrix(cfg.dirac, b, pi, 2.0 * pi) * transfer_matrix(cfg.dirac, b, 0.0, pi);
    c.upper("transfer_flow_composition", (whole - split).norm() / whole.norm(), 1e-10);

    Dirac1DFamily coarse = cfg.dirac;
    auto at_steps = [&](int steps) {
        coarse.steps = steps;
        return transfer_matrix(coarse, b, 0.0, 2.0 * pi);
    };
    const CMatrix t1 = at_steps(64), t2 = at_steps(128), t3 = at_steps(256);
    c.band("rk4_self_convergence", (t1 - t2).norm() / (t2 - t3).norm(), 12.0, 20.0, "steps 64, 128, 256");

    RunConfig sweep_cfg = cfg;
    sweep_cfg.model = RunConfig::Model::dirac;
    sweep_cfg.dirac = Dirac1DFamily::constant_scalar();
    sweep_cfg.sweep = SweepSpec{};
    const SweepResult sw = run_sweep(sweep_cfg);
    const SweepSpec& ss = sweep_cfg.sweep;
    const double step = (ss.hi - ss.lo) / (ss.samples - 1);
    c.upper("kernel_locus_metric", zero_mismatch(local_zeros(sw.metric), ss.lo, ss.hi, step), 1.0,
            "grid steps between zeros of |det|^2 and c in Z");
    c.upper("kernel_locus_monodromy", zero_mismatch(local_zeros(sw.monodromy), ss.lo, ss.hi, step), 1.0);
    c.upper("kernel_locus_coordinate", zero_mismatch(local_zeros(sw.coordinate), ss.lo, ss.hi, step), 1.0);

    CylinderFamily cyl = cfg.cylinder;
    const BaseGrid small = BaseGrid::torus(8);
    const ProjectionSection aps = aps_section(cyl, small);
    c.upper("aps_rank_constant", 0.0, 0.0, "rank " + std::to_string(aps.base_rank()) + " on every vertex");

    const double s1 = trace_norm(smoothing_perturbation(cyl.seed, cyl.gamma, cyl.truncation));
    const double s2 = trace_norm(smoothing_perturbation(cyl.seed, cyl.gamma, 2 * cyl.truncation));
    c.upper("smoothing_trace_norm_stable", std::abs(s2 - s1) / s2, 1e-2);

    auto scalars = [&](int truncation) {
        CylinderFamily f = cfg.cylinder;
        f.truncation = truncation;
        const ProjectionSection s0 = aps_section(f, small);
        const ProjectionSection s1 = cylinder_grassmann_section(f, small);
        std::vector<Complex> out;
        for (std::size_t v = 0; v < small.vertex_count(); ++v)
            out.emplace_back(metric_norm_sq(Fiber::of_toeplitz(s0[v], s1[v])), 0.0);
        const Cover cover = Cover::generate(s0.dim(), 0, 1.0, 1e3, 1, 1);
        const ChartedConnection conn = connection_one_form(s0, s1, cover);
        for (std::size_t k = 0; k < conn.omega[0].size(); ++k)
            if (conn.omega[0].valid(k)) out.push_back(conn.omega[0][k]);
        out.push_back(integrate(curvature_of(conn)));
        out.push_back(integrate(curvature_families_formula(s0, s1, cover).simplified));
        return out;
    };
    const std::vector<Complex> n1 = scalars(cyl.truncation), n2 = scalars(2 * cyl.truncation);
    double change = 0.0;
    for (std::size_t k = 0; k < n1.size(); ++k) raise(change, std::abs(n1[k] - n2[k]) / std::max(1.0, std::abs(n2[k])));
    c.upper("cylinder_truncation", change, 1e-6,
            "det_F, omega and curvature integrals at N = " + std::to_string(cyl.truncation) + " and " +
                std::to_string(2 * cyl.truncation));
    return std::move(c.out);
}

std::vector<InvariantResult> curvature_suite(const RunConfig& cfg) {
    Collector c{"curvature", {}};
    const CurvatureReport r =
        additivity_residual([&](const BaseGrid& g) { return make_problem(cfg, g); }, cfg.grid, cfg.cover);
    const std::string sizes = std::to_string(r.coarse_size) + " -> " + std::to_string(r.fine_size);
    for (const char* key : {"additivity", "f_consistency", "families_gap", "metric_compatibility",
                            "patching_inverse", "patching_adjoint"})
        c.band(std::string(key) + "_ratio", r.residuals.at(std::string(key) + "_ratio"), 3.0, 5.0,
               "max residual ratio " + sizes);

    c.upper("chern_integrality", r.residuals.at("chern_integer_deviation"), 1e-3,
            "chern = (" + std::to_string(r.chern[0]) + ", " + std::to_string(r.chern[1]) + ", " +
                std::to_string(r.chern[2]) + ")");
    c.upper("chern_additivity", std::abs(r.chern[0] - r.chern[1] - r.chern[2]), 0.0);
    c.upper("families_purely_imaginary", r.residuals.at("families_real_part_max"), cfg.tol);
    c.upper("exclusion", r.max_exclusion(), kMaxExclusion, "fraction of plaquettes outside every chart");

    double winding = 0.0;
    for (std::size_t p = 0; p < r.f_winding.size(); ++p)
        if (r.f_winding.valid(p)) raise(winding, std::abs(r.f_winding[p] - std::round(r.f_winding[p].real())));
    c.upper("f_winding_integral", winding, 1e-6);

    const ProjectionSection qwz = ProjectionSection::sample(BaseGrid::torus(r.fine_size), [&](const std::array<double, 2>& b) {
        return bloch_projection(1, b, cfg.section.mass);
    });
    c.upper("chern_bloch_control", std::abs(std::abs(chern_sum(qwz)) - 1.0), 1e-3);

    Rng rng(cfg.seed, 5);
    double swap = 0.0, comp = 0.0;
    for (int k = 0; k < 100; ++k) {
        const int dim = rng.integer(2, 16);
        const int rank = rng.integer(1, dim - 1);
        const TraceIdentityResiduals t = closing_trace_identities(
            rng.projection(dim, rank), rng.projection(dim, rank), rng.projection(dim, rank), rng.gaussian(dim, dim),
            rng.gaussian(dim, dim), rng.gaussian(dim, dim), 1e8);
        raise(swap, t.conjugation_swap);
        raise(comp, t.composition);
    }
    c.upper("trace_identity_conjugation", swap, cfg.tol);
    c.upper("trace_identity_composition", comp, cfg.tol);
    return std::move(c.out);
}

std::vector<InvariantResult> run_suite(const std::string& name, const RunConfig& cfg) {
    if (name == "opcalc") return opcalc_suite(cfg);
    if (name == "grassmann") return grassmann_suite(cfg);
    if (name == "detline") return detline_suite(cfg);
    if (name == "models") return models_suite(cfg);
    if (name == "curvature") return curvature_suite(cfg);
    if (name == "all") {
        std::vector<InvariantResult> all;
        for (const std::string& s : suite_names()) {
            if (s == "all") continue;
            auto part = run_suite(s, cfg);
            all.insert(all.end(), part.begin(), part.end());
        }
        return all;
    }
    throw ArgumentError("unknown suite '" + name + "'");
}

}  // namespace detsplit
