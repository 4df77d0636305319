#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "detsplit/config.hpp"
#include "detsplit/report.hpp"
#include "detsplit/suites.hpp"

using namespace detsplit;

namespace {

RunConfig parse(const std::string& text) {
    std::istringstream in(text);
    return parse_config(in);
}

std::string error_of(const std::string& text) {
    try {
        (void)parse(text);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

}  // namespace

TEST_CASE("defaults") {
    const RunConfig cfg = parse("");
    CHECK(cfg.model == RunConfig::Model::dirac);
    CHECK(cfg.grid == 32);
    CHECK(cfg.seed == 1);
    CHECK(cfg.tol == 1e-9);
    CHECK(cfg.section.kind == SectionSpec::Kind::bloch);
    CHECK(cfg.sweep.samples == 601);
    CHECK_NOTHROW(cfg.validate());
}

TEST_CASE("sections, comments and overrides") {
    const RunConfig cfg = parse(
        "# comment\n"
        "[model]\n"
        "kind = dirac\n"
        "preset = demo\n"
        "mass = 0.25   # trailing\n"
        "\n"
        "[grid]\nsize = 16\n"
        "[cover]\ncenters = 2\nrandom = 3\ncond_tol = 5\n"
        "[run]\nseed = 42\ntol = 1e-7\n"
        "[sweep]\naxis = 1\nlo = 0\nhi = 1\nsamples = 11\nfixed = 0.5\n");
    CHECK(cfg.preset_mass == 0.25);
    CHECK(cfg.grid == 16);
    CHECK(cfg.cover.centers == 2);
    CHECK(cfg.cover.random == 3);
    CHECK(cfg.cover.cond_tol == 5.0);
    CHECK(cfg.seed == 42);
    CHECK(cfg.cover.seed == 42);
    CHECK(cfg.tol == 1e-7);
    CHECK(cfg.sweep.axis == 1);
    CHECK(cfg.sweep.samples == 11);
    CHECK(cfg.sweep.fixed == 0.5);
}

TEST_CASE("canonical form round-trips") {
    for (const char* text : {"", "[model]\npreset = constant_scalar\n[grid]\nsize = 8\n",
                             "[model]\nrank = 1\nterm = 2.0 cos_b1 one I\n[section]\nkind = constant\n",
                             "[model]\nkind = cylinder\n[cylinder]\ntruncation = 4\n"}) {
        const RunConfig a = parse(text);
        const RunConfig b = parse(a.canonical());
        CHECK(a.canonical() == b.canonical());
        CHECK(a.hash() == b.hash());
    }
}

TEST_CASE("hash is stable and sensitive") {
    const RunConfig a = parse("[run]\nseed = 3\n");
    CHECK(a.hash() == parse("[run]\nseed = 3\n").hash());
    CHECK(a.hash().size() == 16);
    CHECK(a.hash() != parse("[run]\nseed = 4\n").hash());
    CHECK(a.hash() != parse("[run]\nseed = 3\n[grid]\nsize = 16\n").hash());
    CHECK(a.hash() == parse("# only a comment\n[run]\nseed = 3   \n").hash());
}

TEST_CASE("malformed input reports the line") {
    CHECK(error_of("[grid]\nsize = abc\n").find("line 2") != std::string::npos);
    CHECK(error_of("[grid]\n\nwidth = 4\n").find("line 3") != std::string::npos);
    CHECK(error_of("[nosuch]\n").find("line 1") != std::string::npos);
    CHECK(error_of("size = 4\n").find("line 1") != std::string::npos);
    CHECK(error_of("[grid]\nsize\n").find("line 2") != std::string::npos);
    CHECK_FALSE(error_of("[model]\npreset = nosuch\n").empty());
    CHECK_FALSE(error_of("[model]\nterm = 1.0 cos_b1 one Q\n").empty());
    CHECK_THROWS_AS(load_config("/nonexistent/detsplit.cfg"), ConfigError);
}

TEST_CASE("validation") {
    RunConfig cfg;
    cfg.grid = 2;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = RunConfig{};
    cfg.tol = 0.0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = RunConfig{};
    cfg.sweep.hi = cfg.sweep.lo;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = RunConfig{};
    cfg.sweep.axis = 2;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("report header") {
    RunConfig cfg;
    cfg.grid = 16;
    const auto j = report_header(cfg, "verify");
    CHECK(j["command"] == "verify");
    CHECK(j["library_version"] == kLibraryVersion);
    CHECK(j["config_hash"] == cfg.hash());
    CHECK(j["grid"]["size"] == 16);
    CHECK(j["seed"] == 1);
    const std::string dumped = j.dump();
    CHECK(dumped.find("time") == std::string::npos);
    CHECK(dumped.find("date") == std::string::npos);
    CHECK(j["warnings"].empty());
    CHECK(report_header(parse("[model]\nsteps = 2\n[grid]\nsize = 8\n"), "verify")["warnings"].size() == 1);
}

TEST_CASE("csv writers") {
    const auto dir = std::filesystem::temp_directory_path() / "detsplit_test_config";
    std::filesystem::create_directories(dir);

    write_sweep_csv((dir / "s.csv").string(), {{0.5, Complex(1.0, -2.0)}, {1.0, Complex(0.0, 0.25)}});
    CHECK(slurp(dir / "s.csv") == "param,value_re,value_im\n0.5,1,-2\n1,0,0.25\n");

    ScalarForm f(2, BaseGrid::torus(4), Complex(0.0));
    f[1] = Complex(3.0, 4.0);
    f.set_valid(4, false);
    write_form_csv((dir / "f.csv").string(), f);
    const std::string csv = slurp(dir / "f.csv");
    CHECK(csv.rfind("i,j,re,im\n0,0,0,0\n1,0,3,4\n2,0,0,0\n3,0,0,0\n0,1,nan,nan\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 17);

    InvariantResult r{"s", "n", 0.5, 1.0};
    CHECK(r.passed());
    r.value = 2.0;
    CHECK_FALSE(r.passed());
    r.value = std::nan("");
    CHECK_FALSE(r.passed());
    CHECK(to_json(r)["name"] == "n");
    std::filesystem::remove_all(dir);
}

TEST_CASE("suite registry and helpers") {
    const auto& names = suite_names();
    CHECK(std::find(names.begin(), names.end(), "all") != names.end());
    CHECK(std::find(names.begin(), names.end(), "curvature") != names.end());
    CHECK_THROWS_AS(run_suite("nosuch", RunConfig{}), ArgumentError);

    RunConfig cyl;
    cyl.model = RunConfig::Model::cylinder;
    CHECK_THROWS_AS(make_problem(cyl, BaseGrid::torus(8)), ConfigError);

    std::vector<std::pair<double, Complex>> rows;
    for (int k = 0; k <= 20; ++k) {
        const double x = 0.1 * k;
        rows.push_back({x, Complex((x - 0.5) * (x - 1.5), 0.0)});
    }
    const auto z = local_zeros(rows);
    REQUIRE(z.size() == 2);
    CHECK(z[0] == doctest::Approx(0.5));
    CHECK(z[1] == doctest::Approx(1.5));
    rows[5].second = 0.3;
    rows[15].second = 0.3;
    CHECK(local_zeros(rows).empty());
}
