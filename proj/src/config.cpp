#include "detsplit/config.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <vector>

namespace detsplit {

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

struct Reader {
    int line = 0;

    [[noreturn]] void fail(const std::string& msg) const {
        throw ConfigError("line " + std::to_string(line) + ": " + msg);
    }

    double real(const std::string& v) const {
        std::size_t used = 0;
        double x = 0.0;
        try {
            x = std::stod(v, &used);
        } catch (const std::exception&) {
            fail("expected a number, got '" + v + "'");
        }
        if (used != v.size()) fail("expected a number, got '" + v + "'");
        return x;
    }

    long long integer(const std::string& v) const {
        std::size_t used = 0;
        long long x = 0;
        try {
            x = std::stoll(v, &used);
        } catch (const std::exception&) {
            fail("expected an integer, got '" + v + "'");
        }
        if (used != v.size()) fail("expected an integer, got '" + v + "'");
        return x;
    }
};

Dirac1DFamily preset_family(const std::string& name, double mass, double amplitude, int rank) {
    if (name == "demo") return Dirac1DFamily::demo(mass, amplitude);
    if (name == "constant_scalar") return Dirac1DFamily::constant_scalar();
    if (name == "none" || name == "zero") {
        Dirac1DFamily f;
        f.rank = rank;
        return f;
    }
    throw ConfigError("unknown preset '" + name + "'");
}

}  // namespace

const char* to_string(RunConfig::Model m) { return m == RunConfig::Model::dirac ? "dirac" : "cylinder"; }

const char* to_string(SectionSpec::Kind k) {
    switch (k) {
        case SectionSpec::Kind::bloch: return "bloch";
        case SectionSpec::Kind::reference: return "reference";
        case SectionSpec::Kind::constant: return "constant";
    }
    return "?";
}

RunConfig parse_config(std::istream& in) {
    RunConfig cfg;
    Reader r;
    std::string section;
    std::string preset = "demo";
    std::string reference = "zero";
    double mass = 0.5;
    double amplitude = 0.5;
    int rank = -1;
    int steps = -1;
    std::vector<PotentialTerm> terms;
    std::string raw;
    while (std::getline(in, raw)) {
        ++r.line;
        const auto hash = raw.find('#');
        const std::string text = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (text.empty()) continue;
        if (text.front() == '[') {
            if (text.back() != ']') r.fail("unterminated section header");
            section = trim(text.substr(1, text.size() - 2));
            static const std::vector<std::string> known{"model", "section", "cylinder", "grid",
                                                        "cover", "run",     "sweep"};
            if (std::find(known.begin(), known.end(), section) == known.end()) r.fail("unknown section [" + section + "]");
            continue;
        }
        const auto eq = text.find('=');
        if (eq == std::string::npos) r.fail("expected key = value");
        const std::string key = trim(text.substr(0, eq));
        const std::string val = trim(text.substr(eq + 1));
        if (section.empty()) r.fail("key '" + key + "' outside any section");
        const std::string where = "[" + section + "] " + key;

        if (section == "model") {
            if (key == "kind") {
                if (val == "dirac") cfg.model = RunConfig::Model::dirac;
                else if (val == "cylinder") cfg.model = RunConfig::Model::cylinder;
                else r.fail("unknown model kind '" + val + "'");
            } else if (key == "preset") {
                preset = val;
            } else if (key == "mass") {
                mass = r.real(val);
            } else if (key == "amplitude") {
                amplitude = r.real(val);
            } else if (key == "rank") {
                rank = static_cast<int>(r.integer(val));
            } else if (key == "steps") {
                steps = static_cast<int>(r.integer(val));
            } else if (key == "term") {
                std::istringstream ts(val);
                std::string c, bf, pf, m, extra;
                if (!(ts >> c >> bf >> pf >> m) || (ts >> extra)) r.fail("term needs: coeff base position matrix");
                try {
                    terms.push_back({r.real(c), parse_base_fn(bf), parse_position_fn(pf), m});
                } catch (const ConfigError&) {
                    throw;
                } catch (const Error& e) {
                    r.fail(e.what());
                }
            } else {
                r.fail("unknown key " + where);
            }
        } else if (section == "section") {
            if (key == "kind") {
                if (val == "bloch") cfg.section.kind = SectionSpec::Kind::bloch;
                else if (val == "reference") cfg.section.kind = SectionSpec::Kind::reference;
                else if (val == "constant") cfg.section.kind = SectionSpec::Kind::constant;
                else r.fail("unknown section kind '" + val + "'");
            } else if (key == "mass") {
                cfg.section.mass = r.real(val);
            } else if (key == "reference") {
                reference = val;
            } else {
                r.fail("unknown key " + where);
            }
        } else if (section == "cylinder") {
            CylinderFamily& c = cfg.cylinder;
            if (key == "truncation") c.truncation = static_cast<int>(r.integer(val));
            else if (key == "gamma") c.gamma = r.real(val);
            else if (key == "seed") c.seed = static_cast<std::uint64_t>(r.integer(val));
            else if (key == "static_amplitude") c.static_amplitude = r.real(val);
            else if (key == "drive_amplitude") c.drive_amplitude = r.real(val);
            else if (key == "section_amplitude") c.section_amplitude = r.real(val);
            else if (key == "gap_tol") c.gap_tol = r.real(val);
            else r.fail("unknown key " + where);
        } else if (section == "grid") {
            if (key == "size") cfg.grid = static_cast<int>(r.integer(val));
            else r.fail("unknown key " + where);
        } else if (section == "cover") {
            CoverSpec& c = cfg.cover;
            if (key == "centers") c.centers = static_cast<int>(r.integer(val));
            else if (key == "random") c.random = static_cast<int>(r.integer(val));
            else if (key == "scale") c.scale = r.real(val);
            else if (key == "cond_tol") c.cond_tol = r.real(val);
            else if (key == "atlas_cells") c.atlas_cells = static_cast<int>(r.integer(val));
            else r.fail("unknown key " + where);
        } else if (section == "run") {
            if (key == "seed") cfg.seed = static_cast<std::uint64_t>(r.integer(val));
            else if (key == "tol") cfg.tol = r.real(val);
            else r.fail("unknown key " + where);
        } else if (section == "sweep") {
            SweepSpec& s = cfg.sweep;
            if (key == "axis") s.axis = static_cast<int>(r.integer(val));
            else if (key == "lo") s.lo = r.real(val);
            else if (key == "hi") s.hi = r.real(val);
            else if (key == "samples") s.samples = static_cast<int>(r.integer(val));
            else if (key == "fixed") s.fixed = r.real(val);
            else r.fail("unknown key " + where);
        }
    }

    cfg.dirac = preset_family(preset, mass, amplitude, rank > 0 ? rank : 1);
    if (rank > 0) cfg.dirac.rank = rank;
    if (steps > 0) cfg.dirac.steps = steps;
    else if (steps == 0 || steps < -1) throw ConfigError("[model] steps must be positive");
    if (!terms.empty()) cfg.dirac.terms = terms;
    cfg.reference_preset = reference;
    cfg.preset_mass = mass;
    cfg.preset_amplitude = amplitude;
    cfg.section.reference = preset_family(reference, mass, amplitude, cfg.dirac.rank);
    cfg.section.reference.rank = cfg.dirac.rank;
    cfg.cover.seed = cfg.seed;
    cfg.validate();
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    return parse_config(in);
}

void RunConfig::validate() const {
    auto require = [](bool ok, const std::string& msg) {
        if (!ok) throw ConfigError(msg);
    };
    require(dirac.rank >= 1, "[model] rank must be at least 1");
    for (const PotentialTerm& t : dirac.terms) {
        try {
            (void)basis_matrix(t.matrix, dirac.rank);
        } catch (const Error& e) {
            throw ConfigError(std::string("[model] term: ") + e.what());
        }
    }
    require(grid >= 4, "[grid] size must be at least 4");
    require(tol > 0.0, "[run] tol must be positive");
    require(cover.cond_tol > 0.0, "[cover] cond_tol must be positive");
    require(cover.centers >= 0 && cover.random >= 0, "[cover] chart counts must be non-negative");
    require(cover.atlas_cells >= 1, "[cover] atlas_cells must be positive");
    require(cover.scale > 0.0, "[cover] scale must be positive");
    require(cylinder.truncation >= 1, "[cylinder] truncation must be positive");
    require(cylinder.gamma > 0.0, "[cylinder] gamma must be positive");
    require(cylinder.gap_tol > 0.0, "[cylinder] gap_tol must be positive");
    require(sweep.axis == 0 || sweep.axis == 1, "[sweep] axis must be 0 or 1");
    require(sweep.samples >= 2, "[sweep] samples must be at least 2");
    require(sweep.hi > sweep.lo, "[sweep] hi must exceed lo");
}

std::string RunConfig::canonical() const {
    std::ostringstream o;
    o << "[model]\nkind = " << to_string(model) << "\npreset = none\nmass = " << fmt(preset_mass)
      << "\namplitude = " << fmt(preset_amplitude)
      << "\nrank = " << dirac.rank
      << "\nsteps = " << dirac.steps << "\n";
    for (const PotentialTerm& t : dirac.terms)
        o << "term = " << fmt(t.coeff) << ' ' << to_string(t.base) << ' ' << to_string(t.position) << ' '
          << t.matrix << "\n";
    o << "\n[section]\nkind = " << to_string(section.kind) << "\nmass = " << fmt(section.mass)
      << "\nreference = " << reference_preset << "\n";
    o << "\n[cylinder]\ntruncation = " << cylinder.truncation << "\ngamma = " << fmt(cylinder.gamma)
      << "\nseed = " << cylinder.seed << "\nstatic_amplitude = " << fmt(cylinder.static_amplitude)
      << "\ndrive_amplitude = " << fmt(cylinder.drive_amplitude)
      << "\nsection_amplitude = " << fmt(cylinder.section_amplitude) << "\ngap_tol = " << fmt(cylinder.gap_tol)
      << "\n";
    o << "\n[grid]\nsize = " << grid << "\n";
    o << "\n[cover]\ncenters = " << cover.centers << "\nrandom = " << cover.random << "\nscale = " << fmt(cover.scale)
      << "\ncond_tol = " << fmt(cover.cond_tol) << "\natlas_cells = " << cover.atlas_cells << "\n";
    o << "\n[run]\nseed = " << seed << "\ntol = " << fmt(tol) << "\n";
    o << "\n[sweep]\naxis = " << sweep.axis << "\nlo = " << fmt(sweep.lo) << "\nhi = " << fmt(sweep.hi)
      << "\nsamples = " << sweep.samples << "\nfixed = " << fmt(sweep.fixed) << "\n";
    return o.str();
}

std::string RunConfig::hash() const {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : canonical()) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace detsplit
