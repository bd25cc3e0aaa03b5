#pragma once

// The full verification suite: spectral calculus, Dirac exactness, the
// conservation/closedness lemmas, surface geometry identities, the operator
// identities of the three hierarchy levels (resolving the A3 print variant),
// reduction compatibility, the Novikov-Veselov specialization, gauge
// invariance, deformation coherence and conservation drift, the quadric /
// Gauss-map identities, and the R^3 reduction. One CheckResult per check;
// every tolerance is pinned here. Deterministic given the seed.

#include <string>
#include <vector>

#include "dslab/flow.hpp"
#include "dslab/gaussmap.hpp"
#include "dslab/hierarchy.hpp"
#include "dslab/io.hpp"

namespace dslab {

struct CheckResult {
    std::string name;
    double value = 0.0;      // measured
    double tolerance = 0.0;  // pass iff value <= tolerance
    bool pass = false;
    std::string note;
};

struct VerifyOptions {
    int grid_n = 32;       // identity checks
    int catalog_n = 64;    // catalog / geometry checks
    int flow_n = 64;       // deformation runs
    double flow_dt = 1e-3;
    double flow_T = 0.1;
    std::uint64_t seed = 20250810;
    double tolerance_scale = 1.0;  // multiplies every tolerance
    bool flow_checks = true;       // the expensive part
};

struct VerifyReport {
    std::vector<CheckResult> checks;
    std::string a3_variant_resolved;  // "printed", "v1" or "unresolved"
    std::string gauss_ratio_matched;  // "psi_phi", "swapped" or "none"
    bool all_pass = true;
};

namespace detail {

class CheckRunner {
public:
    explicit CheckRunner(double scale) : scale_(scale) {}

    template <class F>
    void run(VerifyReport& rep, const std::string& name, double tol, F&& body,
             const std::string& note = "") {
        CheckResult r;
        r.name = name;
        r.tolerance = tol * scale_;
        r.note = note;
        try {
            r.value = body();
            r.pass = r.value <= r.tolerance;
        } catch (const std::exception& err) {
            r.value = std::numeric_limits<double>::infinity();
            r.pass = false;
            r.note = err.what();
        }
        rep.all_pass = rep.all_pass && r.pass;
        rep.checks.push_back(std::move(r));
    }

private:
    double scale_;
};

struct IdentityInputs {
    HierarchyState state;
    SpinorField psi;
};

inline IdentityInputs identity_inputs(int n, int N, std::uint64_t seed) {
    const int band = (n == 1) ? 9 : (n == 2) ? 6 : 5;
    GridSpec g(N, N, 2.0 * kPi, 2.0 * kPi);
    std::mt19937_64 rng(seed);
    ComplexField p = random_band_limited(g, band, 0.2, rng);
    ComplexField q = random_band_limited(g, band, 0.2, rng);
    SpinorField psi{random_band_limited(g, band, 0.2, rng),
                    random_band_limited(g, band, 0.2, rng)};
    return {HierarchyState::from_pq(std::move(p), std::move(q)), std::move(psi)};
}

}  // namespace detail

inline VerifyReport run_verify(const VerifyOptions& opt) {
    VerifyReport rep;
    detail::CheckRunner check(opt.tolerance_scale);

    const GridSpec g32(opt.grid_n, opt.grid_n, 2.0 * kPi, 2.0 * kPi);
    const GridSpec g64(opt.catalog_n, opt.catalog_n, 2.0 * kPi, 2.0 * kPi);
    const WaveParams wave{1.0, {1.0, 0.0}, {0.0, 1.0}};

    // -- spectral calculus ---------------------------------------------------
    check.run(rep, "spectral.mode_derivatives", 1e-12, [&] {
        auto fx = ComplexField::sampled(g64, [](double x, double) { return std::exp(kI * x); });
        auto fy = ComplexField::sampled(g64, [](double, double y) { return std::exp(kI * y); });
        double worst = max_abs_diff(apply_d(fx), Complex(0.0, 0.5) * fx);
        worst = std::max(worst, max_abs_diff(apply_dbar(fx), Complex(0.0, 0.5) * fx));
        worst = std::max(worst, max_abs_diff(apply_d(fy), Complex(0.5, 0.0) * fy));
        worst = std::max(worst, max_abs_diff(apply_dbar(fy), Complex(-0.5, 0.0) * fy));
        return worst;
    });
    check.run(rep, "spectral.invert_roundtrip", 1e-12, [&] {
        std::mt19937_64 rng(opt.seed);
        auto f = random_band_limited(g64, 8, 0.5, rng);
        auto centered = f - constant_field(g64, mean(f));
        return std::max(max_abs_diff(invert_dbar(apply_dbar(f)), centered),
                        max_abs_diff(invert_d(apply_d(f)), centered));
    });
    check.run(rep, "spectral.commutation", 1e-12, [&] {
        std::mt19937_64 rng(opt.seed + 1);
        auto f = random_band_limited(g64, 8, 0.5, rng);
        return max_abs_diff(apply_d(apply_dbar(f)), apply_dbar(apply_d(f)));
    });
    check.run(rep, "spectral.laplacian_identity", 1e-11, [&] {
        std::mt19937_64 rng(opt.seed + 2);
        auto f = random_band_limited(g64, 8, 0.5, rng);
        return max_abs_diff(4.0 * apply_d(apply_dbar(f)), laplacian(f));
    });

    // -- Dirac exactness -----------------------------------------------------
    check.run(rep, "dirac.plane_exact", 0.0, [&] {
        auto e = catalog_solution(CatalogKind::plane, g64);
        return std::max(max_abs(dirac_residual(e.p, e.psi, DiracOp::D)),
                        max_abs(dirac_residual(e.p, e.phi, DiracOp::Dtilde)));
    }, "bit-exact zero expected");
    check.run(rep, "dirac.wave_residual", 1e-10, [&] {
        auto e = catalog_solution(CatalogKind::wave, g64, wave);
        return std::max(max_abs(dirac_residual(e.p, e.psi, DiracOp::D)),
                        max_abs(dirac_residual(e.p, e.phi, DiracOp::Dtilde)));
    });

    // -- conservation laws and closedness (Lemma 1), path independence -------
    check.run(rep, "lemma1.conservation", 1e-10, [&] {
        auto e = catalog_solution(CatalogKind::wave, g64, wave);
        auto [r1, r2] = conservation_residual(e.psi, e.phi);
        return std::max(max_abs(r1), max_abs(r2));
    });
    check.run(rep, "lemma1.closedness", 1e-10, [&] {
        auto e = catalog_solution(CatalogKind::wave, g64, wave);
        return closedness_max(one_form_coefficients(e.psi, e.phi));
    });
    check.run(rep, "surface.path_independence", 1e-8, [&] {
        auto e = catalog_solution(CatalogKind::wave, g64, wave);
        return path_independence(one_form_coefficients(e.psi, e.phi));
    });

    // -- geometry --------------------------------------------------------
    check.run(rep, "geometry.conformality", 1e-8, [&] {
        auto e = catalog_solution(CatalogKind::wave, g64, wave);
        auto surf = integrate_surface(one_form_coefficients(e.psi, e.phi), {0, 0, 0, 0});
        return surface_geometry(e.psi, e.phi, surf, e.p).conformality_max;
    });
    check.run(rep, "geometry.metric_identity", 1e-8, [&] {
        auto e = catalog_solution(CatalogKind::wave, g64, wave);
        auto surf = integrate_surface(one_form_coefficients(e.psi, e.phi), {0, 0, 0, 0});
        return surface_geometry(e.psi, e.phi, surf, e.p).metric_identity_max;
    }, "2|X_z|^2 vs conformal factor, relative");
    check.run(rep, "geometry.curvature_identity", 1e-6, [&] {
        auto e = catalog_solution(CatalogKind::wave, g64, wave);
        auto surf = integrate_surface(one_form_coefficients(e.psi, e.phi), {0, 0, 0, 0});
        return surface_geometry(e.psi, e.phi, surf, e.p).curvature_identity_max;
    }, "|p| vs (e^alpha/2)|H|");

    // -- operator identities (Theorems 1-3) ------------------------------
    double id_residual[4] = {0, 0, 0, 0};
    for (int n : {1, 2, 3}) {
        const double tol = (n == 1) ? 1e-8 : 1e-7;
        check.run(rep, "lax.identity_n" + std::to_string(n), tol, [&, n] {
            auto d = detail::identity_inputs(n, opt.grid_n, opt.seed);
            id_residual[n] = max_abs(operator_identity_residual(n, d.state, d.psi));
            return id_residual[n];
        });
    }
    for (int n : {1, 2, 3}) {
        check.run(rep, "lax.refinement_n" + std::to_string(n), 0.1, [&, n] {
            auto fine = detail::identity_inputs(n, 2 * opt.grid_n, opt.seed);
            const double rf = max_abs(operator_identity_residual(n, fine.state, fine.psi));
            return rf / std::max(id_residual[n], 1e-300);
        }, "fine/coarse residual; <= 0.1 means a 10x drop");
    }
    {
        auto d = detail::identity_inputs(3, opt.grid_n, opt.seed);
        const double printed =
            max_abs(operator_identity_residual(3, d.state, d.psi, A3Variant::printed));
        const double v1 = max_abs(operator_identity_residual(3, d.state, d.psi, A3Variant::v1));
        if (v1 <= 1e-7 * opt.tolerance_scale && printed > 1e-2)
            rep.a3_variant_resolved = "v1";
        else if (printed <= 1e-7 * opt.tolerance_scale && v1 > 1e-2)
            rep.a3_variant_resolved = "printed";
        else
            rep.a3_variant_resolved = "unresolved";
        check.run(rep, "lax.a3_discrimination", 1e-3, [&] {
            return v1 / std::max(printed, 1e-300);
        }, "passing/failing variant residual ratio; resolved = " + rep.a3_variant_resolved);
    }

    // -- reduction compatibility and Novikov-Veselov ----------------------
    check.run(rep, "reduction.conjugate_pair", 1e-11, [&] {
        std::mt19937_64 rng(opt.seed + 3);
        auto u = random_band_limited(g32, 5, 0.4, rng);
        double worst = 0.0;
        for (int n : {1, 2}) {
            auto s = HierarchyState::from_u(u, Branch::plus);
            auto [pt, qt] = rhs_pq(n, s, solve_aux(s, n, DealiasPolicy::off));
            worst = std::max(worst, max_abs(qt - conj(-1.0 * pt)));
        }
        return worst;
    });
    check.run(rep, "reduction.rhs_u_map", 1e-10, [&] {
        std::mt19937_64 rng(opt.seed + 4);
        auto u = random_band_limited(g32, 5, 0.4, rng);
        double worst = 0.0;
        for (int n : {1, 2, 3}) {
            auto s = HierarchyState::from_u(u, Branch::plus);
            auto [pt, qt] = rhs_pq(n, s, solve_aux(s, n, DealiasPolicy::off));
            worst = std::max(worst, max_abs(rhs_u(n, u, DealiasPolicy::off) - (-1.0) * pt));
        }
        return worst;
    });
    check.run(rep, "reduction.nv_w_identities", 1e-10, [&] {
        std::mt19937_64 rng(opt.seed + 5);
        const ComplexField u = real_part(random_band_limited(g64, 6, 0.4, rng));
        const ComplexField v = invert_dbar(apply_d(abs2(u)));
        const ComplexField w = invert_dbar(apply_d(conj(u) * apply_d(u)));
        const ComplexField wp = invert_d(apply_dbar(conj(u) * apply_dbar(u)));
        return std::max(max_abs(w - 0.5 * apply_d(v)),
                        max_abs(wp - 0.5 * apply_dbar(conj(v))));
    }, "w = (1/2) dv, w' = (1/2) dbar vbar for real u");
    check.run(rep, "reduction.nv_rhs_match", 1e-9, [&] {
        std::mt19937_64 rng(opt.seed + 5);
        const ComplexField u = real_part(random_band_limited(g64, 6, 0.4, rng));
        return max_abs(rhs_u(3, u, DealiasPolicy::off) - rhs_u_nv(u, DealiasPolicy::off));
    }, "independently coded NV right side");

    // -- gauge invariance -------------------------------------------------
    check.run(rep, "gauge.proposition2", 1e-10, [&] {
        auto e = catalog_solution(CatalogKind::wave, g64, wave);
        const GaugeFunction f{constant_field(g64, Complex(0.0, 0.3))};
        auto P = gauge_potential(e.p, f);
        auto [ps, ph] = apply_gauge(e.psi, e.phi, f);
        return std::max(max_abs(dirac_residual(P, ps, DiracOp::D)),
                        max_abs(dirac_residual(P, ph, DiracOp::Dtilde)));
    }, "constant gauge, transformed system");
    check.run(rep, "gauge.surface_invariance", 1e-12, [&] {
        auto e = catalog_solution(CatalogKind::wave, g64, wave);
        auto forms = one_form_coefficients(e.psi, e.phi);
        const GaugeFunction f{constant_field(g64, Complex(0.4, -1.1))};
        auto [ps, ph] = apply_gauge(e.psi, e.phi, f);
        auto gauged = one_form_coefficients(ps, ph);
        double worst = 0.0;
        for (int k = 0; k < 4; ++k)
            worst = std::max(worst, max_abs_diff(gauged.f[k], forms.f[k]));
        return worst;
    });
    check.run(rep, "gauge.pointwise_alpha_z", 1e-10, [&] {
        // f = alpha z is holomorphic but not periodic; the check runs
        // pointwise on the catalog closed forms, never through the grid.
        auto e = catalog_solution(CatalogKind::wave, g64, wave);
        const Complex alpha(0.3, 0.1);
        double worst = 0.0;
        for (int j = 0; j < g64.ny; ++j)
            for (int i = 0; i < g64.nx; ++i) {
                const double x = g64.x(i), y = g64.y(j);
                const Complex z(x, y);
                const Complex f = alpha * z;
                const Complex fb = std::conj(f);
                const Complex p = e.p_fun.value(x, y);
                const Complex P = p * std::exp(fb - f);
                const Complex k1 = std::exp(f) * e.psi1.value(x, y);
                const Complex k2 = std::exp(fb) * e.psi2.value(x, y);
                // row 1: P k1 + d k2 (d f = alpha, dbar f = 0)
                const Complex row1 =
                    P * k1 + std::exp(fb) * e.psi2.dz(x, y);
                // row 2: -dbar k1 + Pbar k2
                const Complex row2 =
                    -std::exp(f) * e.psi1.dzbar(x, y) + std::conj(P) * k2;
                worst = std::max({worst, std::abs(row1), std::abs(row2)});
                // second lift with the inverse gauge
                const Complex t1 = std::exp(-f) * e.phi1.value(x, y);
                const Complex t2 = std::exp(-fb) * e.phi2.value(x, y);
                const Complex row3 = std::conj(P) * t1 + std::exp(-fb) * e.phi2.dz(x, y);
                const Complex row4 = -std::exp(-f) * e.phi1.dzbar(x, y) + P * t2;
                worst = std::max({worst, std::abs(row3), std::abs(row4)});
                (void)k1;
                (void)t1;
            }
        return worst;
    }, "closed-form check of the gauged system with f = alpha z");

    // -- quadric and Gauss map ---------------------------------------------
    check.run(rep, "gaussmap.sigma_identity", 1e-13, [&] {
        std::mt19937_64 rng(opt.seed + 6);
        std::uniform_real_distribution<double> d(-2.0, 2.0);
        double worst = 0.0;
        for (int trial = 0; trial < 256; ++trial) {
            ProductPoint w{{d(rng), d(rng)}, {d(rng), d(rng)}};
            auto s = sigma(w);
            worst = std::max(worst, std::abs(quadric_residual(s)) / (1.0 + norm(s)));
        }
        return worst;
    });
    check.run(rep, "gaussmap.roundtrip", 1e-12, [&] {
        std::mt19937_64 rng(opt.seed + 7);
        std::uniform_real_distribution<double> d(-2.0, 2.0);
        double worst = 0.0;
        for (int trial = 0; trial < 256; ++trial) {
            auto z = sigma({{d(rng), d(rng)}, {d(rng), d(rng)}});
            const Complex scale(d(rng) + 3.0, d(rng));  // homogeneous rescaling
            for (auto& c : z.z) c *= scale;
            worst = std::max(worst, projective_distance(z.z, sigma(sigma_inverse(z)).z));
        }
        return worst;
    });
    check.run(rep, "gaussmap.coordinate_change", 1e-13, [&] {
        std::mt19937_64 rng(opt.seed + 8);
        std::uniform_real_distribution<double> d(-2.0, 2.0);
        double worst = 0.0;
        for (int trial = 0; trial < 256; ++trial) {
            std::array<Complex, 4> y{Complex(d(rng), d(rng)), Complex(d(rng), d(rng)),
                                     Complex(d(rng), d(rng)), Complex(d(rng), d(rng))};
            auto z = coordinate_change_y_to_z(y);
            Complex s{};
            for (const Complex& c : z) s += c * c;
            const Complex expect = -y[0] * y[1] + y[2] * y[3];
            worst = std::max(worst, std::abs(s - expect) / (1.0 + std::abs(expect)));
        }
        return worst;
    }, "sum z^2 = -y1 y2 + y3 y4");
    check.run(rep, "gaussmap.real_pair", 1e-12, [&] {
        std::mt19937_64 rng(opt.seed + 9);
        std::uniform_real_distribution<double> d(-2.0, 2.0);
        double worst = 0.0;
        for (int trial = 0; trial < 256; ++trial) {
            auto p = sigma({{d(rng), d(rng)}, {d(rng), d(rng)}});
            double a2 = 0, b2 = 0, ab = 0;
            for (const Complex& z : p.z) {
                a2 += z.real() * z.real();
                b2 += z.imag() * z.imag();
                ab += z.real() * z.imag();
            }
            const double scale = std::max(1.0, a2 + b2);
            worst = std::max({worst, std::abs(a2 - b2) / scale, std::abs(ab) / scale});
        }
        return worst;
    }, "|A| = |B|, A.B = 0");
    {
        GaussRatioFinding finding;
        check.run(rep, "gaussmap.surface_parallel", 1e-8, [&] {
            auto e = catalog_solution(CatalogKind::wave, g64, wave);
            auto surf = integrate_surface(one_form_coefficients(e.psi, e.phi), {0, 0, 0, 0});
            auto gm = gauss_map_of_surface(surf);
            finding = gauss_map_ratio_finding(gm, e.psi, e.phi);
            double worst = gm.quadric_residual_max;
            for (int j = 0; j < g64.ny; ++j)
                for (int i = 0; i < g64.nx; ++i) {
                    auto s = sigma({gm.w1.at(i, j), gm.w2.at(i, j)});
                    std::array<Complex, 4> xz;
                    for (int k = 0; k < 4; ++k) xz[k] = surf.x_z(k).at(i, j);
                    worst = std::max(worst, projective_distance(s.z, xz));
                }
            return worst;
        }, "sigma(w) parallel to X_z; quadric residual of X_z");
        rep.gauss_ratio_matched = finding.matched;
    }

    // -- R^3 reduction ------------------------------------------------------
    check.run(rep, "r3.x4_constant", 1e-10, [&] {
        auto e = catalog_solution(CatalogKind::wave, g64, {1.0, {1.0, 0.0}, {1.0, 0.0}});
        return r3_reduction_check(e.p, e.psi).x4_deviation;
    });
    check.run(rep, "r3.rebuild", 1e-8, [&] {
        auto e = catalog_solution(CatalogKind::wave, g64, {1.0, {1.0, 0.0}, {1.0, 0.0}});
        return r3_reduction_check(e.p, e.psi).rebuild_max_diff;
    });

    // -- deformation coherence and conservation ------------------------------
    if (opt.flow_checks) {
        const GridSpec gf(opt.flow_n, opt.flow_n, 2.0 * kPi, 2.0 * kPi);
        FlowOptions fopts;
        fopts.level = 2;
        fopts.dealias = DealiasPolicy::off;  // measured drifts must show the
                                             // integrator order, not the
                                             // truncation floor
        auto init = make_sine_deformation(gf);
        const long steps = static_cast<long>(std::lround(opt.flow_T / opt.flow_dt));
        RunResult full, half;
        bool flow_ok = true;
        std::string flow_err;
        try {
            full = run(init, opt.flow_dt, steps, fopts);
            half = run(init, opt.flow_dt / 2.0, 2 * steps, fopts);
        } catch (const std::exception& err) {
            flow_ok = false;
            flow_err = err.what();
        }
        auto flow_check = [&](const std::string& name, double tol, auto&& body,
                              const std::string& note = std::string()) {
            check.run(rep, name, tol, [&]() -> double {
                if (!flow_ok) throw ConfigError(flow_err);
                return body();
            }, note);
        };
        flow_check("flow.dirac_coherence", 1e-6, [&] {
            double worst = 0.0;
            for (const auto& r : full.records) worst = std::max(worst, r.dirac_residual_max);
            return worst;
        }, "n=2 run keeps solving the Dirac equations");
        flow_check("flow.closedness_coherence", 1e-6, [&] {
            double worst = 0.0;
            for (const auto& r : full.records) worst = std::max(worst, r.closedness_max);
            return worst;
        });
        flow_check("flow.willmore_drift", 1e-5, [&] {
            return conservation_report(full.records).w_drift_rel;
        });
        flow_check("flow.j_drift", 1e-6, [&] {
            return conservation_report(full.records).j_drift_norm_max;
        }, "normalized by 1 + |J(0)|");
        flow_check("flow.willmore_reduction", 1.0, [&] {
            auto reprt = conservation_report(full.records, &half.records);
            return 8.0 / std::max(reprt.w_reduction, 1e-300);
        }, "<= 1 means halving dt cuts the drift by >= 8");
        flow_check("flow.j_reduction", 1.0, [&] {
            auto reprt = conservation_report(full.records, &half.records);
            return 8.0 / std::max(reprt.j_reduction, 1e-300);
        }, "<= 1 means halving dt cuts the drift by >= 8");
    }

    return rep;
}

/// Manifest with the full configuration, measure conventions, resolved
/// findings and per-check rows; byte-identical for identical options.
inline Json verify_manifest(const VerifyOptions& opt, const VerifyReport& rep) {
    Json m;
    m["tool"] = "dslab";
    m["command"] = "verify";
    Json cfg;
    cfg["grid_n"] = opt.grid_n;
    cfg["catalog_n"] = opt.catalog_n;
    cfg["flow_n"] = opt.flow_n;
    cfg["flow_dt"] = opt.flow_dt;
    cfg["flow_T"] = opt.flow_T;
    cfg["seed"] = opt.seed;
    cfg["tolerance_scale"] = opt.tolerance_scale;
    cfg["flow_checks"] = opt.flow_checks;
    m["config"] = std::move(cfg);
    Json conv;
    conv["dz_wedge_dzbar"] = "-2i dx dy";
    conv["willmore_measure"] = "dx dy";
    conv["aux_gauge"] = "zero mean";
    conv["dealias"] = "two-thirds rule on constraint right sides; off in drift runs";
    conv["flow_pairing"] = "psi: plus branch, phi: minus branch (i, -i at level 2)";
    m["conventions"] = std::move(conv);
    Json findings;
    findings["a3_variant"] = rep.a3_variant_resolved;
    findings["gauss_ratio"] = rep.gauss_ratio_matched;
    m["findings"] = std::move(findings);
    Json checks = Json::array();
    for (const auto& c : rep.checks) {
        Json row;
        row["name"] = c.name;
        row["value"] = c.value;
        row["tolerance"] = c.tolerance;
        row["pass"] = c.pass;
        if (!c.note.empty()) row["note"] = c.note;
        checks.push_back(std::move(row));
    }
    m["checks"] = std::move(checks);
    m["all_pass"] = rep.all_pass;
    return m;
}

}  // namespace dslab
