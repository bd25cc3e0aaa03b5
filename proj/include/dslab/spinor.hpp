#pragma once

// Two-component spinor fields, the Dirac operators
//
//   D      = [  p     d    ]      Dtilde = [ pbar   d  ]
//            [ -dbar  pbar ]               [ -dbar  p  ]
//
// acting on (s1, s2), an exact-solution catalog with closed-form derivative
// callbacks, gauge transformations, the lift construction from angle fields,
// and the product conservation laws.

#include <cmath>
#include <functional>
#include <string>

#include "dslab/grid.hpp"

namespace dslab {

struct SpinorField {
    ComplexField c1, c2;

    SpinorField() = default;
    SpinorField(ComplexField a, ComplexField b) : c1(std::move(a)), c2(std::move(b)) {
        require_same_grid(c1, c2, "SpinorField");
    }
    const GridSpec& spec() const { return c1.spec(); }
};

inline void require_same_grid(const SpinorField& a, const SpinorField& b, const char* what) {
    require_same_grid(a.c1, b.c1, what);
}

inline void require_same_grid(const ComplexField& a, const SpinorField& b, const char* what) {
    require_same_grid(a, b.c1, what);
}

inline SpinorField operator+(const SpinorField& a, const SpinorField& b) {
    return {a.c1 + b.c1, a.c2 + b.c2};
}
inline SpinorField operator-(const SpinorField& a, const SpinorField& b) {
    return {a.c1 - b.c1, a.c2 - b.c2};
}
inline SpinorField operator*(Complex s, const SpinorField& a) { return {s * a.c1, s * a.c2}; }
inline SpinorField operator*(double s, const SpinorField& a) { return {s * a.c1, s * a.c2}; }

inline double max_abs(const SpinorField& s) { return std::max(max_abs(s.c1), max_abs(s.c2)); }

struct SurfacePotential {
    ComplexField p;
};

struct GaugeFunction {
    ComplexField f;
};

/// Real angle fields (theta, eta) defining the lift (e^{i theta} cos eta, sin eta).
struct LiftAngles {
    ComplexField theta, eta;
};

enum class DiracOp { D, Dtilde };

/// Residual of D psi = 0 (rows: p s1 + d s2, -dbar s1 + pbar s2) or of
/// Dtilde phi = 0 (rows: pbar s1 + d s2, -dbar s1 + p s2).
inline SpinorField dirac_residual(const SurfacePotential& pot, const SpinorField& s,
                                  DiracOp which) {
    require_same_grid(pot.p, s, "dirac_residual");
    const ComplexField& p = pot.p;
    const ComplexField pc = conj(p);
    if (which == DiracOp::D)
        return {p * s.c1 + apply_d(s.c2), -apply_dbar(s.c1) + pc * s.c2};
    return {pc * s.c1 + apply_d(s.c2), -apply_dbar(s.c1) + p * s.c2};
}

// ---------------------------------------------------------------------------
// Exact-solution catalog
// ---------------------------------------------------------------------------

/// Closed-form scalar: value plus both complex derivatives, evaluable at any
/// point. Lets gauge checks with non-periodic gauge functions run pointwise,
/// independent of grid calculus.
struct PointFun {
    std::function<Complex(double, double)> value, dz, dzbar;
};

struct CatalogEntry {
    SurfacePotential p;
    SpinorField psi, phi;
    PointFun p_fun, psi1, psi2, phi1, phi2;
};

enum class CatalogKind { plane, wave, gauged_wave };

struct WaveParams {
    double c = 1.0;          // |k| = |m| = c > 0, the constant potential
    Complex k{1.0, 0.0};     // psi wave vector
    Complex m{0.0, 1.0};     // phi wave vector
    Complex gauge{0.0, 0.0}; // constant gauge for gauged_wave
};

namespace detail {

inline void check_wave_vector(const GridSpec& g, Complex k, double c, const char* name) {
    if (!(c > 0.0)) throw InvalidParameterError("catalog wave: c must be positive");
    if (std::abs(std::abs(k) - c) > 1e-12 * std::max(1.0, c))
        throw InvalidParameterError(std::string("catalog wave: |") + name + "| must equal c");
    // e^{i(kz + kbar zbar)} = e^{2i(Re k x - Im k y)} must be grid-periodic.
    const double rx = 2.0 * k.real() * g.lx / (2.0 * kPi);
    const double ry = 2.0 * k.imag() * g.ly / (2.0 * kPi);
    if (std::abs(rx - std::round(rx)) > 1e-9 || std::abs(ry - std::round(ry)) > 1e-9)
        throw InvalidParameterError(std::string("catalog wave: ") + name +
                                    " is not on the dual lattice");
}

inline PointFun plane_wave(Complex amp, Complex k) {
    auto value = [amp, k](double x, double y) {
        return amp * std::exp(kI * 2.0 * (k.real() * x - k.imag() * y));
    };
    return {value,
            [value, k](double x, double y) { return kI * k * value(x, y); },
            [value, k](double x, double y) { return kI * std::conj(k) * value(x, y); }};
}

inline PointFun constant_fun(Complex v) {
    return {[v](double, double) { return v; },
            [](double, double) { return Complex{}; },
            [](double, double) { return Complex{}; }};
}

inline PointFun scale(Complex s, const PointFun& f) {
    return {[s, f](double x, double y) { return s * f.value(x, y); },
            [s, f](double x, double y) { return s * f.dz(x, y); },
            [s, f](double x, double y) { return s * f.dzbar(x, y); }};
}

inline ComplexField sample(const GridSpec& g, const PointFun& f) {
    return ComplexField::sampled(g, f.value);
}

}  // namespace detail

/// Exact solutions of both Dirac systems with closed-form derivatives.
///
///   plane:       p = 0, psi = phi = (1, 0)
///   wave:        p = c; psi1 = e^{i(kz + kbar zbar)}, psi2 = (i kbar / c) psi1,
///                phi likewise with wave vector m; needs |k| = |m| = c
///   gauged_wave: wave composed with the constant gauge params.gauge
inline CatalogEntry catalog_solution(CatalogKind kind, const GridSpec& g,
                                     const WaveParams& params = {}) {
    CatalogEntry e;
    if (kind == CatalogKind::plane) {
        e.p_fun = detail::constant_fun(0.0);
        e.psi1 = e.phi1 = detail::constant_fun(1.0);
        e.psi2 = e.phi2 = detail::constant_fun(0.0);
    } else {
        detail::check_wave_vector(g, params.k, params.c, "k");
        detail::check_wave_vector(g, params.m, params.c, "m");
        e.p_fun = detail::constant_fun(params.c);
        e.psi1 = detail::plane_wave(1.0, params.k);
        e.psi2 = detail::scale(kI * std::conj(params.k) / params.c, e.psi1);
        e.phi1 = detail::plane_wave(1.0, params.m);
        e.phi2 = detail::scale(kI * std::conj(params.m) / params.c, e.phi1);
        if (kind == CatalogKind::gauged_wave) {
            const Complex f0 = params.gauge;
            const Complex fb = std::conj(f0);
            e.p_fun = detail::scale(std::exp(fb - f0), e.p_fun);
            e.psi1 = detail::scale(std::exp(f0), e.psi1);
            e.psi2 = detail::scale(std::exp(fb), e.psi2);
            e.phi1 = detail::scale(std::exp(-f0), e.phi1);
            e.phi2 = detail::scale(std::exp(-fb), e.phi2);
        }
    }
    e.p = SurfacePotential{detail::sample(g, e.p_fun)};
    e.psi = SpinorField{detail::sample(g, e.psi1), detail::sample(g, e.psi2)};
    e.phi = SpinorField{detail::sample(g, e.phi1), detail::sample(g, e.phi2)};
    return e;
}

// ---------------------------------------------------------------------------
// Gauge transformations
// ---------------------------------------------------------------------------

/// psi -> (e^f psi1, e^{fbar} psi2), phi -> (e^{-f} phi1, e^{-fbar} phi2).
/// The four products phi1 psi1, phibar2 psibar2, phibar2 psi1, phi1 psibar2
/// are invariant, hence so is the induced surface.
inline std::pair<SpinorField, SpinorField> apply_gauge(const SpinorField& psi,
                                                       const SpinorField& phi,
                                                       const GaugeFunction& g) {
    require_same_grid(g.f, psi, "apply_gauge");
    require_same_grid(g.f, phi, "apply_gauge");
    const ComplexField ef = exp(g.f);
    const ComplexField efb = exp(conj(g.f));
    const ComplexField emf = exp(-g.f);
    const ComplexField emfb = exp(-conj(g.f));
    return {SpinorField{ef * psi.c1, efb * psi.c2}, SpinorField{emf * phi.c1, emfb * phi.c2}};
}

/// P = p e^{fbar - f}, valid when dbar f = 0 (constants on the torus).
inline SurfacePotential gauge_potential(const SurfacePotential& pot, const GaugeFunction& g,
                                        double tol = 1e-10) {
    require_same_grid(pot.p, g.f, "gauge_potential");
    if (max_abs(apply_dbar(g.f)) > tol * std::max(1.0, max_abs(g.f)))
        throw GaugeNotHolomorphicError("gauge_potential: dbar f != 0");
    return SurfacePotential{pot.p * exp(conj(g.f) - g.f)};
}

// ---------------------------------------------------------------------------
// Lift construction
// ---------------------------------------------------------------------------

namespace detail {

// Fraction of spectral energy above the two-thirds cutoff; winding angle
// fields (theta = x style sawtooth samples) carry a fat tail, smooth periodic
// ones do not.
inline double spectral_tail_fraction(const ComplexField& f) {
    ComplexField hat = f;
    fft2_inplace(f.spec(), hat.data(), FFTW_FORWARD);
    const GridSpec& g = f.spec();
    double tail = 0.0, total = 0.0;
    for (int j = 0; j < g.ny; ++j) {
        const int kj = (j <= g.ny / 2) ? j : j - g.ny;
        for (int i = 0; i < g.nx; ++i) {
            const int ki = (i <= g.nx / 2) ? i : i - g.nx;
            if (i == 0 && j == 0) continue;
            const double e2 = std::norm(hat.at(i, j));
            total += e2;
            if (std::abs(ki) > g.nx / 3 || std::abs(kj) > g.ny / 3) tail += e2;
        }
    }
    return total > 0.0 ? std::sqrt(tail / total) : 0.0;
}

}  // namespace detail

struct LiftResult {
    GaugeFunction f;
    SurfacePotential p;
    SpinorField psi;
};

/// Builds (f, p, psi) from real angle fields so that psi = (e^{f+i theta} cos eta,
/// e^{fbar} sin eta) solves D psi = 0:
///
///   dbar f = -i (dbar theta) cos^2 eta
///   p      = -e^{fbar - f - i theta} (i (d theta) sin eta cos eta + d eta)
///
/// The dbar right side must have zero mean; theta and eta must be real and
/// smooth periodic (winding fields are rejected, not unwrapped).
inline LiftResult lift_from_angles(const LiftAngles& a, double tol = 1e-10) {
    require_same_grid(a.theta, a.eta, "lift_from_angles");
    require_finite(a.theta, "lift_from_angles");
    require_finite(a.eta, "lift_from_angles");
    const double scale_t = std::max(1.0, max_abs(a.theta));
    const double scale_e = std::max(1.0, max_abs(a.eta));
    if (max_abs(imag_part(a.theta)) > tol * scale_t || max_abs(imag_part(a.eta)) > tol * scale_e)
        throw InvalidParameterError("lift_from_angles: angle fields must be real");
    constexpr double kTailLimit = 1e-6;
    if (detail::spectral_tail_fraction(a.theta) > kTailLimit ||
        detail::spectral_tail_fraction(a.eta) > kTailLimit)
        throw InvalidParameterError(
            "lift_from_angles: angle field is not smooth periodic (winding lift?)");

    const GridSpec& g = a.theta.spec();
    ComplexField theta = real_part(a.theta);
    ComplexField eta = real_part(a.eta);
    ComplexField cos_eta(g), sin_eta(g), exp_itheta(g);
    for (int j = 0; j < g.ny; ++j) {
        for (int i = 0; i < g.nx; ++i) {
            const double e = eta.at(i, j).real();
            cos_eta.at(i, j) = std::cos(e);
            sin_eta.at(i, j) = std::sin(e);
            exp_itheta.at(i, j) = std::exp(kI * theta.at(i, j).real());
        }
    }

    const ComplexField rhs = -kI * (apply_dbar(theta) * cos_eta * cos_eta);
    const ComplexField f = invert_dbar(rhs);  // throws UnsolvableConstraintError
    const ComplexField fb = conj(f);

    ComplexField amp = kI * (apply_d(theta) * sin_eta * cos_eta) + apply_d(eta);
    ComplexField pot = -(exp(fb - f) * conj(exp_itheta) * amp);

    SpinorField psi{exp(f) * exp_itheta * cos_eta, exp(fb) * sin_eta};
    return {GaugeFunction{f}, SurfacePotential{pot}, psi};
}

// ---------------------------------------------------------------------------
// Conservation laws
// ---------------------------------------------------------------------------

/// Residuals of d(phi2 psi2) + dbar(phi1 psi1) and dbar(psi1 phibar2) - d(phibar1 psi2);
/// both vanish for any pair solving the two Dirac systems with a common potential.
inline std::pair<ComplexField, ComplexField> conservation_residual(const SpinorField& psi,
                                                                   const SpinorField& phi) {
    require_same_grid(psi, phi, "conservation_residual");
    ComplexField r1 = apply_d(phi.c2 * psi.c2) + apply_dbar(phi.c1 * psi.c1);
    ComplexField r2 = apply_dbar(psi.c1 * conj(phi.c2)) - apply_d(conj(phi.c1) * psi.c2);
    return {std::move(r1), std::move(r2)};
}

}  // namespace dslab
