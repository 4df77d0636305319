#include "detsplit/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

namespace detsplit {

namespace {

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write '" + path + "'");
    return out;
}

/// NaN and infinities become null.
nlohmann::ordered_json number(double x) {
    if (!std::isfinite(x)) return nullptr;
    return x;
}

}  // namespace

nlohmann::ordered_json report_header(const RunConfig& cfg, const std::string& command) {
    nlohmann::ordered_json j;
    j["command"] = command;
    j["library_version"] = kLibraryVersion;
    j["config_hash"] = cfg.hash();
    j["seed"] = cfg.seed;
    j["model"] = to_string(cfg.model);
    j["grid"] = {{"kind", "torus"}, {"size", cfg.grid}, {"period", 2.0 * kPi}};
    j["warnings"] = nlohmann::ordered_json::array();
    if (cfg.model == RunConfig::Model::dirac) {
        const BaseGrid g = BaseGrid::torus(cfg.grid);
        std::size_t coarse = 0;
        for (std::size_t v = 0; v < g.vertex_count(); ++v)
            if (integration_warning(cfg.dirac, g.point(v))) ++coarse;
        if (coarse > 0)
            j["warnings"].push_back("RK4 step times max|a| exceeds 0.5 at " + std::to_string(coarse) + " of " +
                                    std::to_string(g.vertex_count()) + " base points; raise [model] steps");
    }
    return j;
}

nlohmann::ordered_json to_json(const CurvatureReport& r) {
    nlohmann::ordered_json j;
    j["coarse_size"] = r.coarse_size;
    j["fine_size"] = r.fine_size;
    const char* names[3] = {"full", "left", "right"};
    for (std::size_t i = 0; i < 3; ++i) {
        j["bundles"][names[i]] = {{"chern", r.chern[i]},
                                  {"chern_raw", number(r.chern_raw[i])},
                                  {"chern_integrated", number(r.chern_integrated[i])},
                                  {"exclusion_fraction", number(r.exclusion[i])}};
    }
    j["chern_additive"] = r.chern_additive();
    for (const auto& [k, v] : r.residuals) j["residuals"][k] = number(v);
    return j;
}

nlohmann::ordered_json to_json(const InvariantResult& r) {
    nlohmann::ordered_json j;
    j["suite"] = r.suite;
    j["name"] = r.name;
    j["value"] = number(r.value);
    if (std::isfinite(r.lower)) j["lower"] = r.lower;
    j["threshold"] = number(r.threshold);
    j["passed"] = r.passed();
    if (!r.note.empty()) j["note"] = r.note;
    return j;
}

void write_json(const std::string& path, const nlohmann::ordered_json& j) {
    auto out = open_out(path);
    out << j.dump(2) << "\n";
}

void write_form_csv(const std::string& path, const ScalarForm& form) {
    auto out = open_out(path);
    write_csv(out, form);
}

void write_sweep_csv(const std::string& path, const std::vector<std::pair<double, Complex>>& rows) {
    auto out = open_out(path);
    out << "param,value_re,value_im\n";
    char buf[128];
    for (const auto& [p, v] : rows) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", p, v.real(), v.imag());
        out << buf;
    }
}

}  // namespace detsplit
