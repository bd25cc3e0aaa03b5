#pragma once

// The Grassmannian of oriented two-planes in R^4 as the quadric
// Q2 = { sum z_k^2 = 0 } in CP^3, its product model CP^1 x CP^1 through the
// maps
//
//   sigma(w1, w2) = (1 + w1 w2, i(1 - w1 w2), w1 - w2, -i(w1 + w2))
//   sigma^{-1}(z) = ((z3 + i z4)/(z1 - i z2), (-z3 + i z4)/(z1 - i z2))
//
// the coordinate change diagonalizing the quadric, the product metric, and
// the Gauss map of a computed surface (tangent vector X_z pushed through
// sigma^{-1}).

#include <array>
#include <cmath>
#include <string>

#include "dslab/weierstrass.hpp"

namespace dslab {

struct QuadricPoint {
    std::array<Complex, 4> z{};
};

struct ProductPoint {
    Complex w1{}, w2{};
};

inline QuadricPoint sigma(const ProductPoint& w) {
    const Complex prod = w.w1 * w.w2;
    return {{1.0 + prod, kI * (1.0 - prod), w.w1 - w.w2, -kI * (w.w1 + w.w2)}};
}

inline Complex quadric_residual(const QuadricPoint& p) {
    Complex s{};
    for (const Complex& z : p.z) s += z * z;
    return s;
}

inline double norm(const QuadricPoint& p) {
    double s = 0.0;
    for (const Complex& z : p.z) s += std::norm(z);
    return std::sqrt(s);
}

inline ProductPoint sigma_inverse(const QuadricPoint& p, double tol = 1e-12) {
    const Complex chart = p.z[0] - kI * p.z[1];
    if (std::abs(chart) <= tol * std::max(1.0, norm(p)))
        throw DegeneratePointError("sigma_inverse: singular chart z1 - i z2 = 0", -1, -1);
    return {(p.z[2] + kI * p.z[3]) / chart, (-p.z[2] + kI * p.z[3]) / chart};
}

/// z1 = (i/2)(y1+y2), z2 = (1/2)(y1-y2), z3 = (1/2)(y3+y4), z4 = (i/2)(y3-y4);
/// sum z_k^2 = -y1 y2 + y3 y4, so the quadric becomes y1 y2 = y3 y4.
inline std::array<Complex, 4> coordinate_change_y_to_z(const std::array<Complex, 4>& y) {
    return {0.5 * kI * (y[0] + y[1]), 0.5 * (y[0] - y[1]), 0.5 * (y[2] + y[3]),
            0.5 * kI * (y[2] - y[3])};
}

/// Fubini-Study product metric on Q2: ds^2 = 2|dw1|^2/(1+|w1|^2)^2 + (2nd factor).
inline double q2_metric_eval(const ProductPoint& w, Complex dw1, Complex dw2) {
    const double a = 1.0 + std::norm(w.w1);
    const double b = 1.0 + std::norm(w.w2);
    return 2.0 * std::norm(dw1) / (a * a) + 2.0 * std::norm(dw2) / (b * b);
}

/// Chordal Fubini-Study distance between projective points (the sine of the
/// angle between the lines, scale free). Computed through the orthogonal
/// complement, which stays accurate down to machine precision for nearly
/// parallel representatives.
inline double projective_distance(const std::array<Complex, 4>& a,
                                  const std::array<Complex, 4>& b) {
    Complex inner{};
    double na = 0.0, nb = 0.0;
    for (int k = 0; k < 4; ++k) {
        inner += std::conj(a[k]) * b[k];
        na += std::norm(a[k]);
        nb += std::norm(b[k]);
    }
    na = std::sqrt(na);
    nb = std::sqrt(nb);
    const Complex c = inner / (na * nb);  // <ahat, bhat>
    double orth2 = 0.0;
    for (int k = 0; k < 4; ++k) orth2 += std::norm(b[k] / nb - c * (a[k] / na));
    return std::sqrt(orth2);
}

/// Chordal distance on CP^1 in the affine chart.
inline double cp1_distance(Complex a, Complex b) {
    return std::abs(a - b) / std::sqrt((1.0 + std::norm(a)) * (1.0 + std::norm(b)));
}

// ---------------------------------------------------------------------------
// Gauss map of a surface
// ---------------------------------------------------------------------------

struct GaussMapResult {
    ComplexField w1, w2;
    double quadric_residual_max = 0.0;  // conformality of the tangent data
};

/// Pushes tangent data (X^1_z .. X^4_z) through sigma^{-1} sample by sample.
/// Vanishing tangents or singular charts raise a degenerate-point error
/// naming the sample.
inline GaussMapResult gauss_map_from_tangents(const std::array<ComplexField, 4>& xz,
                                              double tol = 1e-12) {
    const GridSpec& g = xz[0].spec();
    GaussMapResult out{ComplexField(g), ComplexField(g), 0.0};
    for (int j = 0; j < g.ny; ++j) {
        for (int i = 0; i < g.nx; ++i) {
            QuadricPoint p;
            for (int k = 0; k < 4; ++k) p.z[k] = xz[k].at(i, j);
            const double scale = norm(p);
            if (scale <= tol) throw DegeneratePointError("gauss map: vanishing tangent", i, j);
            out.quadric_residual_max =
                std::max(out.quadric_residual_max, std::abs(quadric_residual(p)));
            ProductPoint w;
            try {
                w = sigma_inverse(p, tol);
            } catch (const DegeneratePointError&) {
                throw DegeneratePointError("gauss map: singular chart", i, j);
            }
            out.w1.at(i, j) = w.w1;
            out.w2.at(i, j) = w.w2;
        }
    }
    return out;
}

inline GaussMapResult gauss_map_of_surface(const SurfaceR4& surface, double tol = 1e-12) {
    std::array<ComplexField, 4> xz;
    for (int k = 0; k < 4; ++k) xz[k] = surface.x_z(k);
    return gauss_map_from_tangents(xz, tol);
}

// ---------------------------------------------------------------------------
// Spinor-ratio correspondence (determined empirically, never hard-asserted)
// ---------------------------------------------------------------------------

struct GaussRatioFinding {
    // Candidate families for (w1, w2):
    //   psi_phi:  w1 = -i conj(psi2)/psi1,  w2 =  i conj(phi2)/phi1
    //   swapped:  w1 = -i conj(phi2)/phi1,  w2 =  i conj(psi2)/psi1
    double err_psi_phi = 0.0;
    double err_swapped = 0.0;
    std::string matched;  // "psi_phi", "swapped" or "none"
};

/// Compares both candidate spinor-ratio families against the Gauss map
/// computed from the surface tangents and reports which one matches.
inline GaussRatioFinding gauss_map_ratio_finding(const GaussMapResult& gm,
                                                 const SpinorField& psi, const SpinorField& phi,
                                                 double match_tol = 1e-8) {
    const GridSpec& g = gm.w1.spec();
    GaussRatioFinding out;
    for (int j = 0; j < g.ny; ++j) {
        for (int i = 0; i < g.nx; ++i) {
            const Complex rpsi = -kI * std::conj(psi.c2.at(i, j)) / psi.c1.at(i, j);
            const Complex rphi = kI * std::conj(phi.c2.at(i, j)) / phi.c1.at(i, j);
            const Complex w1 = gm.w1.at(i, j), w2 = gm.w2.at(i, j);
            out.err_psi_phi = std::max(out.err_psi_phi, std::max(cp1_distance(w1, rpsi),
                                                                 cp1_distance(w2, rphi)));
            out.err_swapped = std::max(out.err_swapped, std::max(cp1_distance(w1, rphi),
                                                                 cp1_distance(w2, rpsi)));
        }
    }
    if (out.err_psi_phi < match_tol)
        out.matched = "psi_phi";
    else if (out.err_swapped < match_tol)
        out.matched = "swapped";
    else
        out.matched = "none";
    return out;
}

}  // namespace dslab
