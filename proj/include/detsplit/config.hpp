#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

#include "detsplit/curvature.hpp"
#include "detsplit/models.hpp"

namespace detsplit {

/// One-parameter scan of a Dirac family along a base axis.
struct SweepSpec {
    int axis = 0;
    double lo = -0.5;
    double hi = 2.5;
    /// 600 steps.
    int samples = 601;
    /// Value of the other base coordinate.
    double fixed = 0.0;
};

/// Parsed run configuration.
///
/// Format: `key = value` lines grouped under `[section]` headers; `#` starts a
/// comment. Sections and keys:
///
///   [model]    kind = dirac | cylinder
///              preset = demo | constant_scalar | none, mass, amplitude,
///              rank, steps
///              term = <coeff> <base fn> <position fn> <matrix>   (repeatable)
///   [section]  kind = bloch | reference | constant, mass,
///              reference = zero | demo | constant_scalar
///   [cylinder] truncation, gamma, seed, static_amplitude, drive_amplitude,
///              section_amplitude, gap_tol
///   [grid]     size
///   [cover]    centers, random, scale, cond_tol, atlas_cells
///   [run]      seed, tol
///   [sweep]    axis, lo, hi, samples, fixed
///
/// Terms replace the preset's terms when present.
struct RunConfig {
    enum class Model { dirac, cylinder } model = Model::dirac;
    Dirac1DFamily dirac = Dirac1DFamily::demo();
    SectionSpec section;
    /// Preset of the reference family used by the `reference` section kind.
    std::string reference_preset = "zero";
    /// Mass and amplitude entering the presets.
    double preset_mass = 0.5;
    double preset_amplitude = 0.5;
    CylinderFamily cylinder;
    int grid = 32;
    CoverSpec cover;
    std::uint64_t seed = 1;
    double tol = 1e-9;
    SweepSpec sweep;

    /// Canonical text form; parsing it gives back an equal configuration.
    std::string canonical() const;
    /// FNV-1a hash of canonical(), as 16 hex digits.
    std::string hash() const;
    /// Throws ConfigError when a field is out of range.
    void validate() const;
};

/// Throws ConfigError on malformed input.
RunConfig parse_config(std::istream& in);
RunConfig load_config(const std::string& path);

const char* to_string(RunConfig::Model m);
const char* to_string(SectionSpec::Kind k);

}  // namespace detsplit
