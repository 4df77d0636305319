// Acceptance run: one PASS/FAIL line per criterion. Optional argument: config path.

#include <cmath>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>

#include "detsplit/config.hpp"
#include "detsplit/suites.hpp"

using namespace detsplit;

namespace {

struct Criterion {
    int id;
    std::string title;
    std::vector<std::string> invariants;
};

double zero_distance(const std::vector<double>& a, const std::vector<double>& b, double step) {
    if (a.empty() != b.empty()) return INFINITY;
    double worst = 0.0;
    for (double z : a) {
        double d = INFINITY;
        for (double w : b) d = std::min(d, std::abs(z - w));
        worst = std::max(worst, d / step);
    }
    return worst;
}

/// Pairwise agreement of the three zero sets of the constant-scalar sweep.
InvariantResult sweep_pairwise(const RunConfig& base) {
    RunConfig cfg = base;
    cfg.model = RunConfig::Model::dirac;
    cfg.dirac = Dirac1DFamily::constant_scalar();
    cfg.sweep = SweepSpec{};
    const SweepResult s = run_sweep(cfg);
    const double step = (cfg.sweep.hi - cfg.sweep.lo) / (cfg.sweep.samples - 1);
    const auto zm = local_zeros(s.metric), zd = local_zeros(s.monodromy), zc = local_zeros(s.coordinate);
    double worst = 0.0;
    for (const auto* a : {&zm, &zd, &zc})
        for (const auto* b : {&zm, &zd, &zc}) worst = std::max(worst, zero_distance(*a, *b, step));
    std::ostringstream note;
    note << zm.size() << " zeros";
    return {"acceptance", "kernel_locus_pairwise", worst, 1.0, -INFINITY, note.str()};
}

}  // namespace

int main(int argc, char** argv) {
    RunConfig cfg;
    try {
        if (argc > 1) cfg = load_config(argv[1]);
        cfg.cover.seed = cfg.seed;
        cfg.validate();
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    }

    std::map<std::string, InvariantResult> results;
    for (const char* suite : {"opcalc", "detline", "models", "curvature"})
        for (InvariantResult& r : run_suite(suite, cfg)) results[r.suite + "/" + r.name] = r;
    const InvariantResult pairwise = sweep_pairwise(cfg);
    results["acceptance/" + pairwise.name] = pairwise;

    const std::vector<Criterion> criteria{
        {1, "Fredholm calculus", {"opcalc/series_vs_dense", "opcalc/multiplicativity", "opcalc/trace_slope_richardson"}},
        {2, "DET cocycle and gauge law", {"detline/cocycle", "detline/gauge_law"}},
        {3, "Sewing", {"detline/sewing_multiplicativity", "detline/sewing_correction", "detline/sewing_associativity"}},
        {4,
         "Kernel locus",
         {"models/kernel_locus_metric", "models/kernel_locus_monodromy", "models/kernel_locus_coordinate",
          "acceptance/kernel_locus_pairwise"}},
        {5,
         "Metric well-definedness",
         {"detline/metric_two_charts", "detline/metric_zeros_consistent", "detline/metric_two_chart_coverage"}},
        {6, "Connection patching", {"curvature/patching_inverse_ratio", "curvature/patching_adjoint_ratio"}},
        {7, "Curvature additivity", {"curvature/additivity_ratio", "curvature/f_consistency_ratio"}},
        {8,
         "Families formulas",
         {"curvature/families_gap_ratio", "curvature/trace_identity_conjugation",
          "curvature/trace_identity_composition"}},
        {9,
         "Chern integrality and additivity",
         {"curvature/chern_integrality", "curvature/chern_additivity", "curvature/chern_bloch_control",
          "curvature/exclusion"}},
        {10, "Truncation convergence", {"models/cylinder_truncation"}},
    };

    int failed = 0;
    std::cout << std::setprecision(4);
    for (const Criterion& c : criteria) {
        bool ok = true;
        std::ostringstream detail;
        for (const std::string& key : c.invariants) {
            const auto it = results.find(key);
            if (it == results.end()) {
                ok = false;
                detail << " " << key << "=missing";
                continue;
            }
            const InvariantResult& r = it->second;
            ok = ok && r.passed();
            detail << " " << r.name << "=" << r.value;
        }
        if (!ok) ++failed;
        std::cout << (ok ? "PASS" : "FAIL") << " [" << c.id << "] " << c.title << ":" << detail.str() << "\n";
    }
    std::cout << (criteria.size() - failed) << "/" << criteria.size() << " criteria passed\n";
    return failed == 0 ? 0 : 1;
}
