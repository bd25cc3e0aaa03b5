// dslab command line: scenario runner, verification suite and exporters.
//
//   dslab verify   [--config F] [--out DIR] [--seed N] [--grid NX,NY] ...
//   dslab surface  [--config F] [--out DIR] [--projection i,j,k]
//   dslab evolve   [--config F] [--out DIR] [--level n] [--a3-variant v]
//   dslab export   --from DIR [--out DIR] [--projection i,j,k]
//
// Exit codes: 0 success, 1 check/run failure, 2 configuration error.
// The DSLAB_OUT environment variable overrides --out.

#include <clocale>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "dslab/verify.hpp"

namespace fs = std::filesystem;
using namespace dslab;

namespace {

struct CommonArgs {
    std::string config_path;
    std::string out_dir = "out";
    bool out_dir_set = false;
    std::optional<std::uint64_t> seed;
    std::string grid;        // "NX,NY"
    std::optional<int> level;
    std::string a3_variant;  // "printed" | "v1"
    std::string projection;  // "i,j,k"
};

void add_common(CLI::App* cmd, CommonArgs& a) {
    cmd->add_option("--config", a.config_path, "scenario configuration file");
    cmd->add_option("--out", a.out_dir, "output directory")->each([&](const std::string&) {
        a.out_dir_set = true;
    });
    cmd->add_option("--seed", a.seed, "seed for randomized checks");
    cmd->add_option("--grid", a.grid, "grid override NX,NY");
    cmd->add_option("--level", a.level, "hierarchy level 1|2|3");
    cmd->add_option("--a3-variant", a.a3_variant, "A3 reading: printed | v1");
    cmd->add_option("--projection", a.projection, "OBJ projection, e.g. 1,2,3");
}

std::pair<int, int> parse_grid_arg(const std::string& s) {
    int nx = 0, ny = 0;
    char extra;
    if (std::sscanf(s.c_str(), "%d,%d%c", &nx, &ny, &extra) != 2)
        throw ConfigError("bad --grid value (expected NX,NY): " + s);
    return {nx, ny};
}

std::array<int, 3> parse_projection_arg(const std::string& s) {
    int a = 0, b = 0, c = 0;
    char extra;
    if (std::sscanf(s.c_str(), "%d,%d,%d%c", &a, &b, &c, &extra) != 3)
        throw ConfigError("bad --projection value (expected i,j,k): " + s);
    return {a, b, c};
}

ConfigMap load_config(const CommonArgs& a) {
    if (a.config_path.empty()) return {};
    return parse_config_file(a.config_path);  // throws ConfigError if missing
}

fs::path resolve_out_dir(const CommonArgs& a, const ConfigMap& cfg) {
    std::string dir = cfg.get("output", "dir", a.out_dir);
    if (a.out_dir_set) dir = a.out_dir;
    if (const char* env = std::getenv("DSLAB_OUT")) dir = env;
    fs::create_directories(dir);
    return dir;
}

GridSpec scenario_grid(const CommonArgs& a, const ConfigMap& cfg) {
    int nx = static_cast<int>(cfg.get_long("grid", "nx", 64));
    int ny = static_cast<int>(cfg.get_long("grid", "ny", 64));
    if (!a.grid.empty()) std::tie(nx, ny) = parse_grid_arg(a.grid);
    const double lx = cfg.get_double("grid", "lx", 2.0 * kPi);
    const double ly = cfg.get_double("grid", "ly", 2.0 * kPi);
    return GridSpec(nx, ny, lx, ly);
}

A3Variant parse_a3(const std::string& s) {
    if (s == "printed") return A3Variant::printed;
    if (s == "v1") return A3Variant::v1;
    throw ConfigError("a3 variant must be 'printed' or 'v1', got: " + s);
}

DealiasPolicy parse_dealias(const std::string& s) {
    if (s == "on") return DealiasPolicy::on;
    if (s == "off") return DealiasPolicy::off;
    throw ConfigError("dealias must be 'on' or 'off', got: " + s);
}

/// Initial data per [initial] kind: catalog entries, the built-in sine
/// scenario, or lift angles from CSV files (the second spinor must be
/// supplied; there is no completion procedure for it).
DeformationState build_initial(const GridSpec& g, const ConfigMap& cfg) {
    const std::string kind = cfg.get("initial", "kind", "sine");
    if (kind == "plane" || kind == "wave" || kind == "gauged_wave") {
        WaveParams wp;
        wp.c = cfg.get_double("initial", "c", 1.0);
        wp.k = Complex(cfg.get_double("initial", "k_re", 1.0),
                       cfg.get_double("initial", "k_im", 0.0));
        wp.m = Complex(cfg.get_double("initial", "m_re", 0.0),
                       cfg.get_double("initial", "m_im", 1.0));
        wp.gauge = Complex(cfg.get_double("initial", "gauge_re", 0.25),
                           cfg.get_double("initial", "gauge_im", 0.4));
        const CatalogKind ck = kind == "plane"  ? CatalogKind::plane
                               : kind == "wave" ? CatalogKind::wave
                                                : CatalogKind::gauged_wave;
        auto e = catalog_solution(ck, g, wp);
        return DeformationState{0.0, e.p.p, e.psi, e.phi};
    }
    if (kind == "sine") {
        SineScenario sc;
        sc.amplitude = cfg.get_double("initial", "amplitude", sc.amplitude);
        sc.mode = static_cast<int>(cfg.get_long("initial", "mode", sc.mode));
        sc.eta0 = cfg.get_double("initial", "eta0", sc.eta0);
        sc.delta = cfg.get_double("initial", "delta", sc.delta);
        return make_sine_deformation(g, sc);
    }
    if (kind == "lift") {
        const std::string theta_csv = cfg.get("initial", "theta_csv", "");
        const std::string eta_csv = cfg.get("initial", "eta_csv", "");
        const std::string phi_csv = cfg.get("initial", "phi_csv", "");
        if (theta_csv.empty() || eta_csv.empty())
            throw ConfigError("lift initial data needs theta_csv and eta_csv");
        if (phi_csv.empty())
            throw ConfigError("lift initial data needs phi_csv (the second spinor is "
                              "supplied, not derived)");
        LiftAngles angles{read_field_csv(theta_csv), read_field_csv(eta_csv)};
        auto lift = lift_from_angles(angles);
        SpinorField phi = read_spinor_csv(phi_csv);
        return DeformationState{0.0, lift.p.p, lift.psi, phi};
    }
    throw ConfigError("unknown initial data kind: " + kind);
}

// ---------------------------------------------------------------------------

int cmd_verify(const CommonArgs& args) {
    const ConfigMap cfg = load_config(args);
    VerifyOptions opt;
    opt.grid_n = static_cast<int>(cfg.get_long("verify", "grid", opt.grid_n));
    opt.catalog_n = static_cast<int>(cfg.get_long("verify", "catalog_grid", opt.catalog_n));
    opt.flow_n = static_cast<int>(cfg.get_long("verify", "flow_grid", opt.flow_n));
    opt.flow_dt = cfg.get_double("verify", "flow_dt", opt.flow_dt);
    opt.flow_T = cfg.get_double("verify", "flow_T", opt.flow_T);
    opt.seed = static_cast<std::uint64_t>(cfg.get_long("verify", "seed", 20250810));
    opt.tolerance_scale = cfg.get_double("verify", "tolerance_scale", 1.0);
    opt.flow_checks = cfg.get("verify", "flow_checks", "on") != "off";
    if (args.seed) opt.seed = *args.seed;
    if (!args.grid.empty()) opt.grid_n = parse_grid_arg(args.grid).first;

    const fs::path out = resolve_out_dir(args, cfg);
    const VerifyReport rep = run_verify(opt);

    for (const auto& c : rep.checks) {
        std::printf("%-32s %-4s  value=%-12.3e tol=%-12.3e %s\n", c.name.c_str(),
                    c.pass ? "ok" : "FAIL", c.value, c.tolerance, c.note.c_str());
    }
    const Json manifest = verify_manifest(opt, rep);
    auto outfile = detail::open_out((out / "manifest.json").string());
    outfile << manifest.dump(2) << "\n";
    outfile.close();
    std::printf("%zu checks, findings: a3_variant=%s gauss_ratio=%s\n", rep.checks.size(),
                rep.a3_variant_resolved.c_str(), rep.gauss_ratio_matched.c_str());
    std::printf("%s\n", rep.all_pass ? "all checks passed" : "CHECKS FAILED");
    return rep.all_pass ? 0 : 1;
}

int cmd_surface(const CommonArgs& args) {
    const ConfigMap cfg = load_config(args);
    const fs::path out = resolve_out_dir(args, cfg);
    const GridSpec g = scenario_grid(args, cfg);
    DeformationState state = build_initial(g, cfg);

    auto forms = one_form_coefficients(state.psi, state.phi);
    auto surf = integrate_surface(forms, {0, 0, 0, 0},
                                  cfg.get_double("tolerances", "closedness", 1e-8));
    auto geo = surface_geometry(state.psi, state.phi, surf, SurfacePotential{state.u});
    auto gm = gauss_map_of_surface(surf);
    auto finding = gauss_map_ratio_finding(gm, state.psi, state.phi);

    const std::string proj_str = !args.projection.empty()
                                     ? args.projection
                                     : cfg.get("output", "projection", "1,2,3");
    const std::array<int, 3> projection = parse_projection_arg(proj_str);

    write_surface_csv((out / "surface.csv").string(), surf);
    write_obj((out / "surface.obj").string(), surf, projection);
    write_field_csv((out / "gauss_w1.csv").string(), gm.w1);
    write_field_csv((out / "gauss_w2.csv").string(), gm.w2);

    double e2a_min = std::numeric_limits<double>::infinity(), e2a_max = 0.0;
    for (const Complex& c : geo.conformal_factor.data()) {
        e2a_min = std::min(e2a_min, c.real());
        e2a_max = std::max(e2a_max, c.real());
    }
    Json j;
    j["tool"] = "dslab";
    j["command"] = "surface";
    j["grid"] = {{"nx", g.nx}, {"ny", g.ny}, {"lx", g.lx}, {"ly", g.ly}};
    j["initial_kind"] = cfg.get("initial", "kind", "sine");
    j["conformal_factor_range"] = Json::array({e2a_min, e2a_max});
    j["conformality_residual_max"] = geo.conformality_max;
    j["metric_identity_max"] = geo.metric_identity_max;
    j["curvature_identity_max"] = geo.curvature_identity_max;
    j["path_independence"] = path_independence(forms);
    j["monodromy_x"] = surf.monodromy_x;
    j["monodromy_y"] = surf.monodromy_y;
    j["quadric_residual_max"] = gm.quadric_residual_max;
    j["gauss_ratio"] = finding.matched;
    j["projection"] = projection;
    auto outfile = detail::open_out((out / "geometry.json").string());
    outfile << j.dump(2) << "\n";
    std::printf("surface written to %s (path independence %.3e)\n", out.string().c_str(),
                j["path_independence"].get<double>());
    return 0;
}

int cmd_evolve(const CommonArgs& args) {
    const ConfigMap cfg = load_config(args);
    const fs::path out = resolve_out_dir(args, cfg);
    const GridSpec g = scenario_grid(args, cfg);
    DeformationState state = build_initial(g, cfg);

    FlowOptions fopts;
    fopts.level = static_cast<int>(cfg.get_long("flow", "level", 2));
    if (args.level) fopts.level = *args.level;
    fopts.a3_variant = parse_a3(args.a3_variant.empty()
                                    ? cfg.get("flow", "a3_variant", "v1")
                                    : args.a3_variant);
    fopts.dealias = parse_dealias(cfg.get("flow", "dealias", "on"));
    fopts.initial_residual_tol = cfg.get_double("tolerances", "initial_residual", 1e-6);
    const double dt = cfg.get_double("flow", "dt", 1e-3);
    const long steps = cfg.get_long("flow", "steps", 100);
    const long stride = cfg.get_long("flow", "snapshot_stride", 0);
    if (fopts.level < 1 || fopts.level > 3) throw ConfigError("flow level must be 1, 2 or 3");
    if (dt <= 0.0 || steps < 0) throw ConfigError("flow needs dt > 0 and steps >= 0");

    SnapshotCallback snapshot;
    if (stride > 0) {
        snapshot = [&](long n, const DeformationState& s) {
            auto forms = one_form_coefficients(s.psi, s.phi);
            auto surf = integrate_surface(forms, {0, 0, 0, 0}, 1e-5);
            char name[32];
            std::snprintf(name, sizeof name, "surface_%06ld.csv", n);
            write_surface_csv((out / name).string(), surf);
        };
    }

    RunResult result;
    try {
        result = run(state, dt, steps, fopts, stride, snapshot);
    } catch (const DivergenceError& err) {
        std::fprintf(stderr, "error: %s\n", err.what());
        return 1;
    }

    write_diagnostics_jsonl((out / "diagnostics.jsonl").string(), result.records);
    write_conservation_csv((out / "conservation.csv").string(), result.records);
    if (result.records.size() >= 2)
        write_drift_svgs((out / "drift_w.svg").string(), (out / "drift_j.svg").string(),
                         result.records);

    Json j;
    j["tool"] = "dslab";
    j["command"] = "evolve";
    j["grid"] = {{"nx", g.nx}, {"ny", g.ny}, {"lx", g.lx}, {"ly", g.ly}};
    j["initial_kind"] = cfg.get("initial", "kind", "sine");
    j["level"] = fopts.level;
    j["dt"] = dt;
    j["steps"] = steps;
    j["a3_variant"] = to_string(fopts.a3_variant);
    j["dealias"] = fopts.dealias == DealiasPolicy::on ? "on" : "off";
    j["willmore_measure"] = "dx dy";
    j["j_measure"] = "dz^dzbar = -2i dx dy";
    if (result.records.size() >= 2) {
        auto rep = conservation_report(result.records);
        j["w_drift_rel"] = rep.w_drift_rel;
        j["j_drift_norm_max"] = rep.j_drift_norm_max;
    }
    double res_max = 0.0;
    for (const auto& r : result.records) res_max = std::max(res_max, r.dirac_residual_max);
    j["dirac_residual_max"] = res_max;
    auto outfile = detail::open_out((out / "evolve_manifest.json").string());
    outfile << j.dump(2) << "\n";
    std::printf("evolve: %ld steps to t=%.6g, diagnostics in %s\n", steps,
                result.final_state.t, out.string().c_str());
    return 0;
}

int cmd_export(const CommonArgs& args, const std::string& from) {
    if (!fs::is_directory(from)) throw ConfigError("run directory not found: " + from);
    fs::path out = from;
    if (args.out_dir_set) out = args.out_dir;
    if (const char* env = std::getenv("DSLAB_OUT")) out = env;
    fs::create_directories(out);

    bool did = false;
    const fs::path diag = fs::path(from) / "diagnostics.jsonl";
    if (fs::exists(diag)) {
        auto records = read_diagnostics_jsonl(diag.string());
        write_conservation_csv((out / "conservation.csv").string(), records);
        if (records.size() >= 2)
            write_drift_svgs((out / "drift_w.svg").string(), (out / "drift_j.svg").string(),
                             records);
        did = true;
    }
    const fs::path scsv = fs::path(from) / "surface.csv";
    if (fs::exists(scsv)) {
        auto coords = read_surface_csv(scsv.string());
        const std::array<int, 3> projection =
            parse_projection_arg(args.projection.empty() ? "1,2,3" : args.projection);
        write_obj((out / "surface.obj").string(), coords.x, projection);
        did = true;
    }
    if (!did)
        throw ConfigError("nothing to export in " + from +
                          " (no diagnostics.jsonl or surface.csv)");
    std::printf("export: re-rendered into %s\n", out.string().c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    std::setlocale(LC_ALL, "C");
    CLI::App app{"Dirac-spinor surfaces in R^4 and their integrable deformations"};
    app.require_subcommand(1);

    CommonArgs args;
    std::string export_from;
    auto* verify = app.add_subcommand("verify", "run the verification suite");
    add_common(verify, args);
    auto* surface = app.add_subcommand("surface", "build a surface and export it");
    add_common(surface, args);
    auto* evolve = app.add_subcommand("evolve", "run a deformation and record diagnostics");
    add_common(evolve, args);
    auto* exp = app.add_subcommand("export", "re-render outputs from a stored run");
    add_common(exp, args);
    exp->add_option("--from", export_from, "run directory to export from")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        app.exit(e);
        return 2;
    }

    try {
        if (verify->parsed()) return cmd_verify(args);
        if (surface->parsed()) return cmd_surface(args);
        if (evolve->parsed()) return cmd_evolve(args);
        if (exp->parsed()) return cmd_export(args, export_from);
    } catch (const ConfigError& err) {
        std::fprintf(stderr, "config error: %s\n", err.what());
        return 2;
    } catch (const std::exception& err) {
        std::fprintf(stderr, "error: %s\n", err.what());
        return 1;
    }
    return 2;
}
