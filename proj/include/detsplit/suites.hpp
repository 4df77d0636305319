#pragma once

#include <string>
#include <utility>
#include <vector>

#include "detsplit/config.hpp"
#include "detsplit/report.hpp"

namespace detsplit {

/// Suite names accepted by run_suite: opcalc, grassmann, detline, models,
/// curvature, all.
const std::vector<std::string>& suite_names();

/// Runs one invariant suite. Results are deterministic in (cfg, seed).
/// Throws ArgumentError on an unknown suite name.
std::vector<InvariantResult> run_suite(const std::string& name, const RunConfig& cfg);

std::vector<InvariantResult> opcalc_suite(const RunConfig& cfg);
std::vector<InvariantResult> grassmann_suite(const RunConfig& cfg);
std::vector<InvariantResult> detline_suite(const RunConfig& cfg);
std::vector<InvariantResult> models_suite(const RunConfig& cfg);
std::vector<InvariantResult> curvature_suite(const RunConfig& cfg);

/// One-parameter scan of the configured Dirac family: |det|^2 and the
/// canonical coordinate of the full Toeplitz operator, and det(I - T(0 -> 2pi)).
/// The coordinate is taken in the best of eight frame charts centered along
/// the scan; it is NaN where no chart applies.
struct SweepResult {
    std::vector<std::pair<double, Complex>> metric;
    std::vector<std::pair<double, Complex>> monodromy;
    std::vector<std::pair<double, Complex>> coordinate;
};
SweepResult run_sweep(const RunConfig& cfg);

/// Split problem of the configured model on an n x n torus.
SplitProblem make_problem(const RunConfig& cfg, const BaseGrid& grid);

/// Sample positions where |values| has a local minimum that is also below
/// `floor` times the largest sampled modulus.
std::vector<double> local_zeros(const std::vector<std::pair<double, Complex>>& rows, double floor = 1e-2);

}  // namespace detsplit
