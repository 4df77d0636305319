// detsplit: verify invariants, compute curvature reports and parameter sweeps.

#include <cmath>
#include <filesystem>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "detsplit/config.hpp"
#include "detsplit/report.hpp"
#include "detsplit/suites.hpp"

using namespace detsplit;

namespace {

struct Options {
    std::string config;
    std::optional<int> grid;
    std::optional<std::uint64_t> seed;
    std::optional<double> tol;
    std::string out = "detsplit-out";
    std::string suite = "all";
};

RunConfig resolve(const Options& o) {
    RunConfig cfg = o.config.empty() ? RunConfig{} : load_config(o.config);
    if (o.grid) cfg.grid = *o.grid;
    if (o.seed) cfg.seed = *o.seed;
    if (o.tol) cfg.tol = *o.tol;
    cfg.cover.seed = cfg.seed;
    cfg.validate();
    return cfg;
}

std::string path_in(const Options& o, const std::string& name) {
    std::filesystem::create_directories(o.out);
    return (std::filesystem::path(o.out) / name).string();
}

int finish(const std::vector<InvariantResult>& checks, nlohmann::ordered_json& report, const std::string& json_path) {
    std::vector<std::string> failing;
    for (const InvariantResult& r : checks) {
        report["invariants"].push_back(to_json(r));
        if (!r.passed()) failing.push_back(r.suite + "/" + r.name);
    }
    report["passed"] = failing.empty();
    report["failing"] = failing;
    write_json(json_path, report);
    for (const InvariantResult& r : checks)
        std::cout << (r.passed() ? "PASS " : "FAIL ") << r.suite << "/" << r.name << " value=" << r.value
                  << " bound=[" << r.lower << ", " << r.threshold << "]\n";
    if (failing.empty()) return 0;
    std::cerr << "failing invariants:\n";
    for (const std::string& f : failing) std::cerr << "  " << f << "\n";
    return 1;
}

int run_verify(const Options& o) {
    const RunConfig cfg = resolve(o);
    nlohmann::ordered_json report = report_header(cfg, "verify");
    report["suite"] = o.suite;
    return finish(run_suite(o.suite, cfg), report, path_in(o, "verify_report.json"));
}

int run_curvature(const Options& o) {
    const RunConfig cfg = resolve(o);
    const CurvatureReport r =
        additivity_residual([&](const BaseGrid& g) { return make_problem(cfg, g); }, cfg.grid, cfg.cover);
    const char* names[3] = {"full", "left", "right"};
    for (std::size_t i = 0; i < 3; ++i)
        write_form_csv(path_in(o, std::string("curvature_") + names[i] + ".csv"), r.bundle_curvature[i]);
    write_form_csv(path_in(o, "additivity_residual.csv"), r.curvature);
    write_form_csv(path_in(o, "f_winding.csv"), r.f_winding);

    nlohmann::ordered_json report = report_header(cfg, "curvature");
    report["curvature"] = to_json(r);
    const std::string tag = "curvature";
    std::vector<InvariantResult> checks{
        {tag, "exclusion", r.max_exclusion(), kMaxExclusion},
        {tag, "chern_integrality", r.residuals.at("chern_integer_deviation"), 1e-3},
        {tag, "chern_additivity", std::abs(double(r.chern[0] - r.chern[1] - r.chern[2])), 0.0},
        {tag, "families_purely_imaginary", r.residuals.at("families_real_part_max"), cfg.tol},
    };
    return finish(checks, report, path_in(o, "curvature_report.json"));
}

/// Distance in grid steps from each zero of `a` to the nearest zero of `b`.
double zero_distance(const std::vector<double>& a, const std::vector<double>& b, double step) {
    double worst = 0.0;
    for (double z : a) {
        double d = INFINITY;
        for (double w : b) d = std::min(d, std::abs(z - w));
        worst = std::max(worst, d / step);
    }
    return worst;
}

int run_sweep_command(const Options& o) {
    const RunConfig cfg = resolve(o);
    const SweepResult s = run_sweep(cfg);
    write_sweep_csv(path_in(o, "sweep_metric.csv"), s.metric);
    write_sweep_csv(path_in(o, "sweep_monodromy.csv"), s.monodromy);
    write_sweep_csv(path_in(o, "sweep_coordinate.csv"), s.coordinate);

    const auto zm = local_zeros(s.metric), zd = local_zeros(s.monodromy), zc = local_zeros(s.coordinate);
    nlohmann::ordered_json report = report_header(cfg, "sweep");
    report["sweep"] = {{"axis", cfg.sweep.axis}, {"lo", cfg.sweep.lo},           {"hi", cfg.sweep.hi},
                       {"samples", cfg.sweep.samples}, {"fixed", cfg.sweep.fixed}};
    report["zeros"] = {{"metric", zm}, {"monodromy", zd}, {"coordinate", zc}};
    const double step = (cfg.sweep.hi - cfg.sweep.lo) / (cfg.sweep.samples - 1);
    const std::string tag = "sweep";
    std::vector<InvariantResult> checks{
        {tag, "metric_vs_monodromy_zeros", std::max(zero_distance(zm, zd, step), zero_distance(zd, zm, step)), 1.0},
        {tag, "coordinate_zeros_on_locus", zero_distance(zc, zm, step), 1.0},
    };
    return finish(checks, report, path_in(o, "sweep_report.json"));
}

void add_common(CLI::App* cmd, Options& o) {
    cmd->add_option("--config", o.config, "Configuration file")->check(CLI::ExistingFile);
    cmd->add_option("--grid", o.grid, "Torus resolution n (n x n vertices)");
    cmd->add_option("--seed", o.seed, "Random seed");
    cmd->add_option("--out", o.out, "Output directory")->capture_default_str();
    cmd->add_option("--tol", o.tol, "Base algebraic tolerance");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Determinant line bundle lab"};
    app.require_subcommand(1);
    Options o;
    CLI::App* verify = app.add_subcommand("verify", "Run invariant suites");
    verify->add_option("suite", o.suite, "opcalc | grassmann | detline | models | curvature | all")
        ->capture_default_str()
        ->check(CLI::IsMember(suite_names()));
    CLI::App* curvature = app.add_subcommand("curvature", "Curvature, Chern numbers and additivity residuals");
    CLI::App* sweep = app.add_subcommand("sweep", "One-parameter scan of the kernel locus");
    for (CLI::App* cmd : {verify, curvature, sweep}) add_common(cmd, o);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*verify) return run_verify(o);
        if (*curvature) return run_curvature(o);
        return run_sweep_command(o);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
