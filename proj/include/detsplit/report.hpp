#pragma once

#include <complex>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "detsplit/config.hpp"
#include "detsplit/curvature.hpp"

namespace detsplit {

inline constexpr const char* kLibraryVersion = "0.1.0";

/// Fields shared by every report: command, config hash, seed, grid, version.
nlohmann::ordered_json report_header(const RunConfig& cfg, const std::string& command);

nlohmann::ordered_json to_json(const CurvatureReport& r);

/// One measured invariant. It passes when lower <= value <= threshold
/// (a NaN value never passes).
struct InvariantResult {
    std::string suite;
    std::string name;
    double value = 0.0;
    double threshold = 0.0;
    double lower = -std::numeric_limits<double>::infinity();
    std::string note;

    bool passed() const { return value >= lower && value <= threshold; }
};

nlohmann::ordered_json to_json(const InvariantResult& r);

void write_json(const std::string& path, const nlohmann::ordered_json& j);
/// Two-form CSV (i, j, re, im).
void write_form_csv(const std::string& path, const ScalarForm& form);
/// Sweep CSV (param, value_re, value_im).
void write_sweep_csv(const std::string& path, const std::vector<std::pair<double, Complex>>& rows);

}  // namespace detsplit
