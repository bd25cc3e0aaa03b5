#pragma once

// Surfaces in R^4 from spinor pairs: the one-form coefficients
//
//   f1 = (i/2)(phibar2 psibar2 + phi1 psi1)   f2 = (1/2)(phibar2 psibar2 - phi1 psi1)
//   f3 = (1/2)(phibar2 psi1 + phi1 psibar2)   f4 = (i/2)(phibar2 psi1 - phi1 psibar2)
//
// define closed real one-forms eta_k = f_k dz + fbar_k dzbar whose path
// integrals give coordinates X^k. Integration runs along the canonical
// grid-aligned paths (row-major: along x at y=0, then up each column) with
// spectral per-line antiderivatives, so closed band-limited forms integrate
// to machine precision. On the torus eta_k may carry periods around the two
// cycles; those monodromies are reported, not treated as errors, and the
// linear-plus-periodic decomposition they induce is what the geometry
// diagnostics differentiate.

#include <array>
#include <cmath>
#include <limits>
#include <utility>

#include "dslab/spinor.hpp"

namespace dslab {

struct OneFormSet {
    std::array<ComplexField, 4> f;
    const GridSpec& spec() const { return f[0].spec(); }
};

inline OneFormSet one_form_coefficients(const SpinorField& psi, const SpinorField& phi) {
    require_same_grid(psi, phi, "one_form_coefficients");
    const ComplexField a = conj(phi.c2) * conj(psi.c2);  // phibar2 psibar2
    const ComplexField b = phi.c1 * psi.c1;              // phi1 psi1
    const ComplexField c = conj(phi.c2) * psi.c1;        // phibar2 psi1
    const ComplexField d = phi.c1 * conj(psi.c2);        // phi1 psibar2
    OneFormSet out;
    out.f[0] = Complex(0.0, 0.5) * (a + b);
    out.f[1] = Complex(0.5, 0.0) * (a - b);
    out.f[2] = Complex(0.5, 0.0) * (c + d);
    out.f[3] = Complex(0.0, 0.5) * (c - d);
    return out;
}

/// d eta_k coefficient: dbar f_k - d fbar_k, one residual field per form.
inline std::array<ComplexField, 4> closedness_residual(const OneFormSet& forms) {
    std::array<ComplexField, 4> out;
    for (int k = 0; k < 4; ++k)
        out[k] = apply_dbar(forms.f[k]) - apply_d(conj(forms.f[k]));
    return out;
}

inline double closedness_max(const OneFormSet& forms) {
    double m = 0.0;
    for (const ComplexField& r : closedness_residual(forms)) m = std::max(m, max_abs(r));
    return m;
}

// ---------------------------------------------------------------------------
// Path integration
// ---------------------------------------------------------------------------

/// Line integrals of a general complex one-form g dz + h dzbar from the
/// origin sample, along both canonical grid-aligned paths.
struct PathIntegral {
    ComplexField row_major;  // along x at y=0, then up the column
    ComplexField col_major;  // up y at x=0, then along the row
    Complex monodromy_x;     // integral over a full x-period (times lx)
    Complex monodromy_y;
    ComplexField periodic;   // zero-mean potential of the closed part
};

inline PathIntegral path_integral(const ComplexField& g, const ComplexField& h) {
    require_same_grid(g, h, "path_integral");
    const GridSpec& s = g.spec();
    const ComplexField a = g + h;               // component along dx
    const ComplexField b = kI * (g - h);        // component along dy
    const ComplexField ax = antiderivative_x(a);
    const ComplexField by = antiderivative_y(b);

    PathIntegral out;
    out.row_major = ComplexField(s);
    out.col_major = ComplexField(s);
    for (int j = 0; j < s.ny; ++j)
        for (int i = 0; i < s.nx; ++i) {
            out.row_major.at(i, j) = ax.at(i, 0) + by.at(i, j);
            out.col_major.at(i, j) = by.at(0, j) + ax.at(i, j);
        }
    out.monodromy_x = mean(a) * s.lx;
    out.monodromy_y = mean(b) * s.ly;

    // Zero-mean periodic potential P with dP = (a - <a>)dx + (b - <b>)dy,
    // well defined when the form is closed.
    ComplexField ahat = a, bhat = b;
    detail::fft2_inplace(s, ahat.data(), FFTW_FORWARD);
    detail::fft2_inplace(s, bhat.data(), FFTW_FORWARD);
    ComplexField P(s);
    for (int j = 0; j < s.ny; ++j)
        for (int i = 0; i < s.nx; ++i) {
            if ((i == 0 && j == 0) || s.is_nyquist_x(i) || s.is_nyquist_y(j)) {
                P.at(i, j) = 0.0;
            } else if (i != 0) {
                P.at(i, j) = ahat.at(i, j) / Complex(0.0, s.kx(i));
            } else {
                P.at(i, j) = bhat.at(i, j) / Complex(0.0, s.ky(j));
            }
        }
    detail::fft2_inplace(s, P.data(), FFTW_BACKWARD);
    out.periodic = std::move(P);
    return out;
}

/// Max row-major vs column-major discrepancy over all samples and components;
/// a detector for non-closed forms.
inline double path_independence(const OneFormSet& forms) {
    double worst = 0.0;
    for (int k = 0; k < 4; ++k) {
        auto pi = path_integral(forms.f[k], conj(forms.f[k]));
        worst = std::max(worst, max_abs_diff(pi.row_major, pi.col_major));
    }
    return worst;
}

// ---------------------------------------------------------------------------
// Surfaces
// ---------------------------------------------------------------------------

struct SurfaceR4 {
    GridSpec grid;
    std::array<ComplexField, 4> x;         // coordinates, imaginary part ~ 0
    std::array<double, 4> base{};
    std::array<double, 4> monodromy_x{};   // periods around the two torus cycles
    std::array<double, 4> monodromy_y{};
    std::array<ComplexField, 4> periodic;  // X^k minus its linear monodromy part
    std::array<Complex, 4> linear_x{};     // X^k = base + linear_x x + linear_y y + periodic
    std::array<Complex, 4> linear_y{};

    /// dX^k/dz, exact through the linear + periodic decomposition.
    ComplexField x_z(int k) const {
        return apply_d(periodic[k]) +
               constant_field(grid, 0.5 * linear_x[k] - 0.5 * kI * linear_y[k]);
    }
    /// d^2 X^k / dz dzbar (the linear part drops out).
    ComplexField x_zzbar(int k) const { return apply_d(apply_dbar(periodic[k])); }
};

inline constexpr double kDefaultClosednessTol = 1e-8;

/// Integrates the one-forms along the canonical row-major path. Fails if the
/// closedness residual exceeds the tolerance. Imaginary leakage in the
/// coordinates is a bug detector and is checked, not discarded.
inline SurfaceR4 integrate_surface(const OneFormSet& forms, const std::array<double, 4>& base,
                                   double closedness_tol = kDefaultClosednessTol) {
    double scale = 1.0;
    for (const ComplexField& f : forms.f) scale = std::max(scale, max_abs(f));
    if (closedness_max(forms) > closedness_tol * scale)
        throw NonClosedFormError("integrate_surface: one-forms are not closed");

    SurfaceR4 out;
    out.grid = forms.spec();
    out.base = base;
    for (int k = 0; k < 4; ++k) {
        auto pi = path_integral(forms.f[k], conj(forms.f[k]));
        out.x[k] = constant_field(out.grid, base[k]) + pi.row_major;
        if (max_abs(imag_part(out.x[k])) > 1e-10 * std::max(1.0, max_abs(out.x[k])))
            throw InvalidFieldError("integrate_surface: imaginary leakage in coordinates");
        out.monodromy_x[k] = pi.monodromy_x.real();
        out.monodromy_y[k] = pi.monodromy_y.real();
        out.linear_x[k] = pi.monodromy_x / out.grid.lx;
        out.linear_y[k] = pi.monodromy_y / out.grid.ly;
        out.periodic[k] = pi.periodic;
    }
    return out;
}

struct SurfaceGeometry {
    ComplexField conformal_factor;                // e^{2 alpha} = u1 u2, real positive
    std::array<ComplexField, 4> mean_curvature;   // H = 2 e^{-2 alpha} X_{z zbar}
    ComplexField conformality_residual;           // sum_k (dX^k)^2
    double conformality_max = 0.0;
    double metric_identity_max = 0.0;             // rel. error of 2|X_z|^2 = e^{2 alpha}
    double curvature_identity_max = 0.0;          // |p| - (e^alpha/2)|H|
};

inline SurfaceGeometry surface_geometry(const SpinorField& psi, const SpinorField& phi,
                                        const SurfaceR4& surface, const SurfacePotential& pot) {
    require_same_grid(psi, phi, "surface_geometry");
    require_same_grid(pot.p, psi, "surface_geometry");
    const GridSpec& g = surface.grid;

    const ComplexField u1 = abs2(psi.c1) + abs2(psi.c2);
    const ComplexField u2 = abs2(phi.c1) + abs2(phi.c2);
    SurfaceGeometry out;
    out.conformal_factor = u1 * u2;

    double e2a_max = 0.0, e2a_min = std::numeric_limits<double>::infinity();
    for (const Complex& c : out.conformal_factor.data()) {
        e2a_max = std::max(e2a_max, c.real());
        e2a_min = std::min(e2a_min, c.real());
    }
    if (!(e2a_min > 1e-12 * std::max(1.0, e2a_max)))
        throw DegenerateImmersionError("surface_geometry: conformal factor vanishes");

    std::array<ComplexField, 4> xz;
    out.conformality_residual = ComplexField(g);
    ComplexField xz_norm2(g);
    for (int k = 0; k < 4; ++k) {
        xz[k] = surface.x_z(k);
        out.conformality_residual = out.conformality_residual + xz[k] * xz[k];
        xz_norm2 = xz_norm2 + abs2(xz[k]);
    }
    out.conformality_max = max_abs(out.conformality_residual);

    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            const double e2a = out.conformal_factor.at(i, j).real();
            const double m = 2.0 * xz_norm2.at(i, j).real();
            out.metric_identity_max = std::max(out.metric_identity_max,
                                               std::abs(m - e2a) / std::abs(e2a));
        }

    for (int k = 0; k < 4; ++k) {
        ComplexField h = surface.x_zzbar(k);
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i)
                h.at(i, j) = 2.0 * h.at(i, j) / out.conformal_factor.at(i, j).real();
        out.mean_curvature[k] = std::move(h);
    }

    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            double h2 = 0.0;
            for (int k = 0; k < 4; ++k) h2 += std::norm(out.mean_curvature[k].at(i, j));
            const double ea = std::sqrt(out.conformal_factor.at(i, j).real());
            const double lhs = std::abs(pot.p.at(i, j));
            out.curvature_identity_max =
                std::max(out.curvature_identity_max, std::abs(lhs - 0.5 * ea * std::sqrt(h2)));
        }
    return out;
}

// ---------------------------------------------------------------------------
// R^3 reduction
// ---------------------------------------------------------------------------

struct R3ReductionReport {
    SurfaceR4 surface;        // built with phi = psi
    double x4_deviation = 0.0;
    double rebuild_max_diff = 0.0;
};

/// For real p and phi = psi the representation collapses to the classical
/// R^3 one: X^4 is constant, and X^1..X^3 can be rebuilt from the scalar-pair
/// integrals with (psi_sc, phi_sc) = (psi_2, -psi_1). Reports both deviations.
inline R3ReductionReport r3_reduction_check(const SurfacePotential& pot, const SpinorField& psi,
                                            double tol = 1e-10) {
    if (max_abs(imag_part(pot.p)) > tol * std::max(1.0, max_abs(pot.p)))
        throw InvalidReductionError("r3_reduction_check: p must be real");

    R3ReductionReport out;
    auto forms = one_form_coefficients(psi, psi);
    out.surface = integrate_surface(forms, {0.0, 0.0, 0.0, 0.0});
    out.x4_deviation = max_abs(out.surface.x[3]);

    const ComplexField psi_sc = psi.c2;
    const ComplexField phi_sc = -psi.c1;
    // X^1 + i X^2 = i Int (psibar_sc^2 dz - phibar_sc^2 dzbar)
    auto pa = path_integral(kI * (conj(psi_sc) * conj(psi_sc)),
                            -kI * (conj(phi_sc) * conj(phi_sc)));
    // X^1 - i X^2 = i Int (phi_sc^2 dz - psi_sc^2 dzbar)
    auto pb = path_integral(kI * (phi_sc * phi_sc), -kI * (psi_sc * psi_sc));
    // X^3 = -Int (psibar_sc phi_sc dz + psi_sc phibar_sc dzbar)
    auto pc = path_integral(-(conj(psi_sc) * phi_sc), -(psi_sc * conj(phi_sc)));

    const ComplexField x1 = 0.5 * (pa.row_major + pb.row_major);
    const ComplexField x2 = (-0.5 * kI) * (pa.row_major - pb.row_major);
    const ComplexField& x3 = pc.row_major;
    out.rebuild_max_diff = std::max({max_abs_diff(x1, out.surface.x[0]),
                                     max_abs_diff(x2, out.surface.x[1]),
                                     max_abs_diff(x3, out.surface.x[2])});
    return out;
}

}  // namespace dslab
