#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "dslab/io.hpp"
#include "dslab/verify.hpp"

using namespace dslab;
namespace fs = std::filesystem;

namespace {

GridSpec square(int n) { return GridSpec(n, n, 2.0 * kPi, 2.0 * kPi); }

fs::path tmpdir() {
    auto p = fs::temp_directory_path() / "dslab_io_test";
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("field CSV round trip is exact") {
    auto g = square(16);
    std::mt19937_64 rng(7);
    auto f = random_band_limited(g, 4, 0.5, rng);
    auto path = (tmpdir() / "field.csv").string();
    write_field_csv(path, f);
    auto f2 = read_field_csv(path);
    CHECK(f2.spec() == g);
    CHECK(max_abs_diff(f, f2) == 0.0);  // %.17g round-trips doubles exactly
}

TEST_CASE("spinor CSV round trip (two blocks, c1 then c2)") {
    auto g = square(16);
    std::mt19937_64 rng(8);
    SpinorField s{random_band_limited(g, 4, 0.5, rng), random_band_limited(g, 4, 0.5, rng)};
    auto path = (tmpdir() / "spinor.csv").string();
    write_spinor_csv(path, s);
    auto s2 = read_spinor_csv(path);
    CHECK(max_abs_diff(s.c1, s2.c1) == 0.0);
    CHECK(max_abs_diff(s.c2, s2.c2) == 0.0);
    // block layout: all component-1 rows precede component-2 rows
    std::ifstream in(path);
    std::string line;
    std::getline(in, line);
    std::getline(in, line);
    int last_comp = 1;
    bool ordered = true;
    while (std::getline(in, line)) {
        const int comp = line[0] - '0';
        if (comp < last_comp) ordered = false;
        last_comp = comp;
    }
    CHECK(ordered);
}

TEST_CASE("surface CSV and OBJ export") {
    auto g = square(16);
    auto e = catalog_solution(CatalogKind::plane, g);
    auto surf = integrate_surface(one_form_coefficients(e.psi, e.phi), {0, 0, 0, 0});
    auto dir = tmpdir();
    write_surface_csv((dir / "surface.csv").string(), surf);
    auto coords = read_surface_csv((dir / "surface.csv").string());
    for (int k = 0; k < 4; ++k)
        CHECK(max_abs_diff(real_part(surf.x[k]), coords.x[k]) == 0.0);

    write_obj((dir / "surface.obj").string(), surf, {1, 2, 3});
    const std::string obj = slurp(dir / "surface.obj");
    size_t vcount = 0, fcount = 0;
    std::istringstream in(obj);
    std::string line;
    while (std::getline(in, line)) {
        if (line.rfind("v ", 0) == 0) ++vcount;
        if (line.rfind("f ", 0) == 0) ++fcount;
    }
    CHECK(vcount == 16 * 16);
    CHECK(fcount == 2 * 15 * 15);

    write_obj((dir / "proj.obj").string(), surf, {1, 2, 4});
    CHECK(slurp(dir / "proj.obj").find("projection X1 X2 X4") != std::string::npos);
    CHECK_THROWS_AS(write_obj((dir / "bad.obj").string(), surf, {0, 2, 3}), ConfigError);
}

TEST_CASE("diagnostics JSONL round trip") {
    std::vector<DiagnosticsRecord> records;
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    for (int n = 0; n < 5; ++n) {
        DiagnosticsRecord r;
        r.t = n * 1e-3;
        r.W = 12.0 + d(rng);
        for (auto& j : r.J) j = Complex(d(rng), d(rng));
        r.dirac_residual_max = std::abs(d(rng)) * 1e-8;
        r.closedness_max = std::abs(d(rng)) * 1e-8;
        records.push_back(r);
    }
    auto path = (tmpdir() / "diag.jsonl").string();
    write_diagnostics_jsonl(path, records);
    auto back = read_diagnostics_jsonl(path);
    REQUIRE(back.size() == records.size());
    for (size_t n = 0; n < records.size(); ++n) {
        CHECK(back[n].t == records[n].t);
        CHECK(back[n].W == records[n].W);
        for (size_t k = 0; k < 4; ++k) CHECK(back[n].J[k] == records[n].J[k]);
    }
}

TEST_CASE("SVG charts are byte-stable") {
    std::vector<DiagnosticsRecord> records;
    for (int n = 0; n <= 10; ++n) {
        DiagnosticsRecord r;
        r.t = n * 1e-3;
        r.W = 10.0 + 1e-9 * n * n;
        for (size_t k = 0; k < 4; ++k) r.J[k] = Complex(1.0 + 1e-10 * n, -2.0);
        records.push_back(r);
    }
    auto dir = tmpdir();
    write_drift_svgs((dir / "w1.svg").string(), (dir / "j1.svg").string(), records);
    write_drift_svgs((dir / "w2.svg").string(), (dir / "j2.svg").string(), records);
    const std::string a = slurp(dir / "w1.svg");
    CHECK(a == slurp(dir / "w2.svg"));
    CHECK(slurp(dir / "j1.svg") == slurp(dir / "j2.svg"));
    CHECK(a.find("<svg xmlns") != std::string::npos);
    CHECK(a.find("</svg>") != std::string::npos);
}

TEST_CASE("config parser") {
    SECTION("sections, comments, whitespace") {
        auto cfg = parse_config_text("# top comment\n[grid]\nnx = 32  # inline\n ny =64\n"
                                     "[flow]\nlevel = 2\ndt = 1e-3\n");
        CHECK(cfg.get_long("grid", "nx", 0) == 32);
        CHECK(cfg.get_long("grid", "ny", 0) == 64);
        CHECK(cfg.get_long("flow", "level", 0) == 2);
        CHECK(cfg.get_double("flow", "dt", 0.0) == Catch::Approx(1e-3));
        CHECK(cfg.get("flow", "missing", "fallback") == "fallback");
        CHECK(cfg.has("grid", "nx"));
        CHECK(!cfg.has("grid", "nz"));
    }
    SECTION("errors") {
        CHECK_THROWS_AS(parse_config_text("[grid\nnx=1\n"), ConfigError);
        CHECK_THROWS_AS(parse_config_text("[g]\njust a line\n"), ConfigError);
        auto cfg = parse_config_text("[g]\nx = abc\n");
        CHECK_THROWS_AS(cfg.get_double("g", "x", 0.0), ConfigError);
        CHECK_THROWS_AS(parse_config_file("/nonexistent/dslab.cfg"), ConfigError);
    }
}

TEST_CASE("verify manifest is deterministic for a fixed seed") {
    VerifyOptions opt;
    opt.flow_checks = false;  // keep the unit test fast; flows are covered in acceptance
    auto r1 = run_verify(opt);
    auto r2 = run_verify(opt);
    const std::string m1 = verify_manifest(opt, r1).dump(2);
    const std::string m2 = verify_manifest(opt, r2).dump(2);
    CHECK(m1 == m2);
    CHECK(r1.all_pass);
    CHECK(r1.a3_variant_resolved == "v1");
    CHECK(r1.gauss_ratio_matched == "psi_phi");
}

TEST_CASE("zero tolerance scale fails the suite") {
    VerifyOptions opt;
    opt.flow_checks = false;
    opt.tolerance_scale = 0.0;
    auto rep = run_verify(opt);
    CHECK(!rep.all_pass);
}
