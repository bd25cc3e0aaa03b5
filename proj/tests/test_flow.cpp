#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "dslab/flow.hpp"

using namespace dslab;

namespace {

GridSpec square(int n) { return GridSpec(n, n, 2.0 * kPi, 2.0 * kPi); }

// Gentle scenario fully resolved at 32x32 for the fast unit checks.
DeformationState sine32() {
    return make_sine_deformation(square(32), SineScenario{0.5, 2, 0.7, 0.35});
}

double state_diff(const DeformationState& a, const DeformationState& b) {
    return std::max({max_abs(a.u - b.u), max_abs(a.psi - b.psi), max_abs(a.phi - b.phi)});
}

}  // namespace

TEST_CASE("functional_J on constant spinors") {
    auto g = square(16);
    SpinorField psi{constant_field(g, 1.0), ComplexField(g)};
    SpinorField phi = psi;
    const double area = 4.0 * kPi * kPi;
    CHECK(std::abs(functional_J(JKind::psi1bar_phi1bar, psi, phi) -
                   Complex(0.0, -2.0 * area)) < 1e-10);
    CHECK(std::abs(functional_J(JKind::psi2_phi2, psi, phi)) < 1e-14);
}

TEST_CASE("willmore examples") {
    auto g = square(16);
    CHECK(willmore(constant_field(g, 1.0)) == Catch::Approx(4.0 * kPi * kPi));
    auto ux = ComplexField::sampled(g, [](double x, double) { return std::exp(kI * x); });
    CHECK(willmore(ux) == Catch::Approx(4.0 * kPi * kPi));
    CHECK(willmore(ComplexField(g)) == 0.0);
}

TEST_CASE("step basics") {
    auto s = sine32();
    SECTION("dt = 0 is the identity") {
        auto out = step(s, 0.0);
        CHECK(state_diff(out, s) == 0.0);
        CHECK(out.t == s.t);
    }
    SECTION("negative dt is rejected") {
        CHECK_THROWS_AS(step(s, -1e-3), InvalidParameterError);
    }
    SECTION("t advances by dt") {
        auto out = step(s, 1e-3);
        CHECK(out.t == Catch::Approx(1e-3));
    }
    SECTION("constant real u with constant spinors is a fixed point of n=2") {
        auto g = square(32);
        DeformationState fp{0.0, constant_field(g, 0.7),
                            SpinorField{constant_field(g, 0.3), constant_field(g, -0.2)},
                            SpinorField{constant_field(g, 1.1), constant_field(g, 0.4)}};
        auto out = step(fp, 1e-3);
        CHECK(state_diff(out, fp) < 1e-12);
    }
    SECTION("blow-up guard") {
        auto g = square(32);
        DeformationState bad{0.0, constant_field(g, 1e9),
                             SpinorField{ComplexField(g), ComplexField(g)},
                             SpinorField{ComplexField(g), ComplexField(g)}};
        CHECK_THROWS_AS(step(bad, 1e-3), DivergenceError);
    }
}

TEST_CASE("run orchestration") {
    SECTION("steps = 0 gives a single record of the initial state") {
        auto s = sine32();
        auto r = run(s, 1e-3, 0);
        REQUIRE(r.records.size() == 1);
        CHECK(r.records[0].t == 0.0);
        CHECK(r.records[0].W == Catch::Approx(willmore(s.u)));
    }
    SECTION("fixed-point run: all records identical to tolerance") {
        auto g = square(32);
        auto e = catalog_solution(CatalogKind::plane, g);
        DeformationState s{0.0, e.p.p, e.psi, e.phi};  // u = 0
        auto r = run(s, 1e-3, 5);
        REQUIRE(r.records.size() == 6);
        for (const auto& rec : r.records) {
            CHECK(std::abs(rec.W - r.records[0].W) < 1e-12);
            for (int k = 0; k < 4; ++k)
                CHECK(std::abs(rec.J[k] - r.records[0].J[k]) < 1e-12);
        }
    }
    SECTION("invalid initial data is rejected") {
        auto g = square(32);
        DeformationState s{0.0, constant_field(g, 1.0),
                           SpinorField{constant_field(g, 1.0), ComplexField(g)},
                           SpinorField{constant_field(g, 1.0), ComplexField(g)}};
        CHECK_THROWS_AS(run(s, 1e-3, 1), InvalidParameterError);
    }
    SECTION("snapshot callback fires on the stride") {
        auto s = sine32();
        std::vector<long> seen;
        run(s, 1e-3, 4, FlowOptions{}, 2,
            [&](long n, const DeformationState&) { seen.push_back(n); });
        CHECK(seen == std::vector<long>{0, 2, 4});
    }
}

TEST_CASE("RK4 order: Richardson self-convergence ratio near 16") {
    auto s = sine32();
    FlowOptions opts;
    const double T = 0.032;
    auto a = run(s, 2e-3, static_cast<long>(T / 2e-3), opts).final_state;
    auto b = run(s, 1e-3, static_cast<long>(T / 1e-3), opts).final_state;
    auto c = run(s, 5e-4, static_cast<long>(T / 5e-4), opts).final_state;
    const double e1 = state_diff(a, b);
    const double e2 = state_diff(b, c);
    INFO("e1=" << e1 << " e2=" << e2);
    CHECK(e1 / e2 > 12.0);
    CHECK(e1 / e2 < 22.0);
}

TEST_CASE("linear n=1 flow transports single modes by phase") {
    auto g = square(32);
    auto u0 = ComplexField::sampled(g, [](double x, double) { return std::exp(kI * x); });
    auto init = sine32();
    DeformationState s{0.0, u0, init.psi, init.phi};
    FlowOptions opts;
    opts.level = 1;
    DeformationState cur = s;
    for (int n = 0; n < 100; ++n) cur = step(cur, 1e-3, opts);
    CHECK(max_abs_diff(cur.u, std::exp(kI * 0.1) * u0) < 1e-8);
}

TEST_CASE("conservation_report") {
    SECTION("too few records") {
        std::vector<DiagnosticsRecord> rs(1);
        CHECK_THROWS_AS(conservation_report(rs), InvalidParameterError);
    }
    SECTION("identical records have zero drift") {
        DiagnosticsRecord r;
        r.W = 2.0;
        r.J = {Complex(1, 0), Complex(0, 1), Complex(1, 1), Complex(0, 0)};
        std::vector<DiagnosticsRecord> rs{r, r, r};
        auto rep = conservation_report(rs);
        CHECK(rep.w_drift_rel == 0.0);
        CHECK(rep.j_drift_norm_max == 0.0);
    }
}

TEST_CASE("short n=2 conservation run at 32x32") {
    auto s = sine32();
    FlowOptions opts;
    opts.level = 2;
    opts.dealias = DealiasPolicy::off;
    auto r = run(s, 1e-3, 40, opts);
    double res = 0.0, closed = 0.0;
    for (const auto& rec : r.records) {
        res = std::max(res, rec.dirac_residual_max);
        closed = std::max(closed, rec.closedness_max);
    }
    CHECK(res < 1e-6);
    CHECK(closed < 1e-6);
    auto rep = conservation_report(r.records);
    CHECK(rep.w_drift_rel < 1e-8);
    CHECK(rep.j_drift_norm_max < 1e-8);
}

TEST_CASE("sine scenario construction") {
    auto g = square(64);
    auto s = make_sine_deformation(g, SineScenario{0.8, 3, 0.7, 0.35});
    // u = A sin(kx), real
    auto expect = ComplexField::sampled(g, [](double x, double) { return 0.8 * std::sin(3 * x); });
    CHECK(max_abs_diff(s.u, expect) < 1e-10);
    CHECK(max_abs(imag_part(s.u)) < 1e-12);
    // exact initial data for both Dirac systems
    CHECK(diagnose(s).dirac_residual_max < 1e-9);
    // all four J functionals are nonzero on this data
    for (auto kind : kAllJKinds)
        CHECK(std::abs(functional_J(kind, s.psi, s.phi)) > 1.0);
    CHECK_THROWS_AS(make_sine_deformation(g, SineScenario{0.5, 0}), InvalidParameterError);
}
