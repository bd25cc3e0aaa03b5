#pragma once

// Periodic rectangular grid over the complex plane with spectral complex
// calculus: d = d/dz, dbar = d/dzbar, their zero-mean inverses, quadrature,
// 2/3-rule dealiasing and per-row/column spectral antiderivatives.
//
// Sample (i, j) sits at z = i*lx/nx + I*(j*ly/ny); the domain is the flat
// torus [0,lx) x [0,ly). All operations are pure: inputs are immutable and
// a fresh field is returned, so concurrent calls are safe.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <map>
#include <mutex>
#include <random>
#include <vector>

#include <fftw3.h>

#include "dslab/errors.hpp"

namespace dslab {

using Complex = std::complex<double>;

inline constexpr Complex kI{0.0, 1.0};
inline constexpr double kPi = 3.14159265358979323846;

struct GridSpec {
    int nx = 0, ny = 0;
    double lx = 0.0, ly = 0.0;

    GridSpec() = default;
    GridSpec(int nx_, int ny_, double lx_, double ly_)
        : nx(nx_), ny(ny_), lx(lx_), ly(ly_) {
        if (nx < 8 || ny < 8 || nx % 2 != 0 || ny % 2 != 0)
            throw InvalidParameterError("GridSpec: nx, ny must be even and >= 8");
        if (!(lx > 0.0) || !(ly > 0.0))
            throw InvalidParameterError("GridSpec: lx, ly must be positive");
    }

    bool operator==(const GridSpec&) const = default;

    int size() const { return nx * ny; }
    double dx() const { return lx / nx; }
    double dy() const { return ly / ny; }
    double x(int i) const { return i * dx(); }
    double y(int j) const { return j * dy(); }
    double area() const { return lx * ly; }

    // Physical wavenumber of FFT bin m along a direction with n samples
    // and period l.
    static double wavenumber(int m, int n, double l) {
        const int k = (m <= n / 2) ? m : m - n;
        return 2.0 * kPi * k / l;
    }
    double kx(int i) const { return wavenumber(i, nx, lx); }
    double ky(int j) const { return wavenumber(j, ny, ly); }
    bool is_nyquist_x(int i) const { return i == nx / 2; }
    bool is_nyquist_y(int j) const { return j == ny / 2; }
};

class ComplexField {
public:
    ComplexField() = default;
    explicit ComplexField(const GridSpec& spec, Complex fill = {})
        : spec_(spec), data_(static_cast<size_t>(spec.size()), fill) {}

    const GridSpec& spec() const { return spec_; }
    int nx() const { return spec_.nx; }
    int ny() const { return spec_.ny; }

    Complex& at(int i, int j) { return data_[static_cast<size_t>(j) * spec_.nx + i]; }
    const Complex& at(int i, int j) const { return data_[static_cast<size_t>(j) * spec_.nx + i]; }

    std::vector<Complex>& data() { return data_; }
    const std::vector<Complex>& data() const { return data_; }

    template <class F>
    static ComplexField sampled(const GridSpec& spec, F&& f) {
        ComplexField out(spec);
        for (int j = 0; j < spec.ny; ++j)
            for (int i = 0; i < spec.nx; ++i)
                out.at(i, j) = f(spec.x(i), spec.y(j));
        return out;
    }

    bool finite() const {
        for (const Complex& c : data_)
            if (!std::isfinite(c.real()) || !std::isfinite(c.imag())) return false;
        return true;
    }

private:
    GridSpec spec_;
    std::vector<Complex> data_;
};

namespace detail {

// FFTW plans are cached per (nx, ny, sign). Plan creation is not thread-safe,
// execution with fftw_execute_dft on caller buffers is; FFTW_UNALIGNED makes
// new-array execution legal for arbitrary vectors.
inline void fft2_inplace(const GridSpec& spec, std::vector<Complex>& data, int sign) {
    static std::mutex mtx;
    static std::map<std::tuple<int, int, int>, fftw_plan> plans;
    fftw_plan plan;
    {
        std::lock_guard<std::mutex> lock(mtx);
        auto key = std::make_tuple(spec.nx, spec.ny, sign);
        auto it = plans.find(key);
        if (it == plans.end()) {
            std::vector<Complex> scratch(static_cast<size_t>(spec.size()));
            plan = fftw_plan_dft_2d(spec.ny, spec.nx,
                                    reinterpret_cast<fftw_complex*>(scratch.data()),
                                    reinterpret_cast<fftw_complex*>(scratch.data()),
                                    sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
            plans.emplace(key, plan);
        } else {
            plan = it->second;
        }
    }
    fftw_execute_dft(plan, reinterpret_cast<fftw_complex*>(data.data()),
                     reinterpret_cast<fftw_complex*>(data.data()));
    if (sign == FFTW_BACKWARD) {
        const double norm = 1.0 / spec.size();
        for (Complex& c : data) c *= norm;
    }
}

inline void fft1_inplace(int n, Complex* data, int sign) {
    static std::mutex mtx;
    static std::map<std::pair<int, int>, fftw_plan> plans;
    fftw_plan plan;
    {
        std::lock_guard<std::mutex> lock(mtx);
        auto key = std::make_pair(n, sign);
        auto it = plans.find(key);
        if (it == plans.end()) {
            std::vector<Complex> scratch(static_cast<size_t>(n));
            plan = fftw_plan_dft_1d(n, reinterpret_cast<fftw_complex*>(scratch.data()),
                                    reinterpret_cast<fftw_complex*>(scratch.data()),
                                    sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
            plans.emplace(key, plan);
        } else {
            plan = it->second;
        }
    }
    fftw_execute_dft(plan, reinterpret_cast<fftw_complex*>(data),
                     reinterpret_cast<fftw_complex*>(data));
    if (sign == FFTW_BACKWARD) {
        const double norm = 1.0 / n;
        for (int i = 0; i < n; ++i) data[i] *= norm;
    }
}

}  // namespace detail

inline void require_finite(const ComplexField& f, const char* what) {
    if (!f.finite()) throw InvalidFieldError(std::string(what) + ": non-finite samples");
}

inline void require_same_grid(const ComplexField& a, const ComplexField& b, const char* what) {
    if (!(a.spec() == b.spec())) throw GridMismatchError(std::string(what) + ": grid mismatch");
}

// ---------------------------------------------------------------------------
// Pointwise algebra
// ---------------------------------------------------------------------------

inline ComplexField operator+(const ComplexField& a, const ComplexField& b) {
    require_same_grid(a, b, "operator+");
    ComplexField out = a;
    for (size_t n = 0; n < out.data().size(); ++n) out.data()[n] += b.data()[n];
    return out;
}

inline ComplexField operator-(const ComplexField& a, const ComplexField& b) {
    require_same_grid(a, b, "operator-");
    ComplexField out = a;
    for (size_t n = 0; n < out.data().size(); ++n) out.data()[n] -= b.data()[n];
    return out;
}

inline ComplexField operator*(const ComplexField& a, const ComplexField& b) {
    require_same_grid(a, b, "operator*");
    ComplexField out = a;
    for (size_t n = 0; n < out.data().size(); ++n) out.data()[n] *= b.data()[n];
    return out;
}

inline ComplexField operator*(Complex s, const ComplexField& a) {
    ComplexField out = a;
    for (Complex& c : out.data()) c *= s;
    return out;
}

inline ComplexField operator*(double s, const ComplexField& a) { return Complex(s, 0.0) * a; }
inline ComplexField operator-(const ComplexField& a) { return Complex(-1.0, 0.0) * a; }

inline ComplexField conj(const ComplexField& a) {
    ComplexField out = a;
    for (Complex& c : out.data()) c = std::conj(c);
    return out;
}

inline ComplexField real_part(const ComplexField& a) {
    ComplexField out = a;
    for (Complex& c : out.data()) c = Complex(c.real(), 0.0);
    return out;
}

inline ComplexField imag_part(const ComplexField& a) {
    ComplexField out = a;
    for (Complex& c : out.data()) c = Complex(c.imag(), 0.0);
    return out;
}

inline ComplexField abs2(const ComplexField& a) {
    ComplexField out = a;
    for (Complex& c : out.data()) c = Complex(std::norm(c), 0.0);
    return out;
}

inline ComplexField exp(const ComplexField& a) {
    ComplexField out = a;
    for (Complex& c : out.data()) c = std::exp(c);
    return out;
}

inline Complex mean(const ComplexField& a) {
    Complex s{};
    for (const Complex& c : a.data()) s += c;
    return s / static_cast<double>(a.spec().size());
}

inline double max_abs(const ComplexField& a) {
    double m = 0.0;
    for (const Complex& c : a.data()) m = std::max(m, std::abs(c));
    return m;
}

inline double max_abs_diff(const ComplexField& a, const ComplexField& b) {
    require_same_grid(a, b, "max_abs_diff");
    double m = 0.0;
    for (size_t n = 0; n < a.data().size(); ++n)
        m = std::max(m, std::abs(a.data()[n] - b.data()[n]));
    return m;
}

inline ComplexField constant_field(const GridSpec& spec, Complex c) {
    return ComplexField(spec, c);
}

// ---------------------------------------------------------------------------
// Spectral calculus
// ---------------------------------------------------------------------------

namespace detail {

// Applies a per-mode multiplier in Fourier space. Nyquist rows/columns are
// zeroed: odd-order derivatives are sign-ambiguous there and inverses are
// singular.
template <class Mult>
ComplexField spectral_map(const ComplexField& f, Mult&& m) {
    ComplexField out = f;
    fft2_inplace(f.spec(), out.data(), FFTW_FORWARD);
    const GridSpec& g = f.spec();
    for (int j = 0; j < g.ny; ++j) {
        for (int i = 0; i < g.nx; ++i) {
            Complex& c = out.at(i, j);
            if (g.is_nyquist_x(i) || g.is_nyquist_y(j)) {
                c = 0.0;
            } else {
                c *= m(g.kx(i), g.ky(j));
            }
        }
    }
    fft2_inplace(f.spec(), out.data(), FFTW_BACKWARD);
    return out;
}

inline Complex mult_d(double kx, double ky) { return 0.5 * Complex(ky, kx); }      // (i kx + ky)/2
inline Complex mult_dbar(double kx, double ky) { return 0.5 * Complex(-ky, kx); }  // (i kx - ky)/2

}  // namespace detail

/// d/dz = (d/dx - i d/dy)/2, exact for band-limited fields.
inline ComplexField apply_d(const ComplexField& f) {
    require_finite(f, "apply_d");
    return detail::spectral_map(f, detail::mult_d);
}

/// d/dzbar = (d/dx + i d/dy)/2.
inline ComplexField apply_dbar(const ComplexField& f) {
    require_finite(f, "apply_dbar");
    return detail::spectral_map(f, detail::mult_dbar);
}

/// Flat Laplacian (= 4 d dbar on band-limited fields).
inline ComplexField laplacian(const ComplexField& f) {
    require_finite(f, "laplacian");
    return detail::spectral_map(f, [](double kx, double ky) {
        return Complex(-(kx * kx + ky * ky), 0.0);
    });
}

/// d^a dbar^b f in a single spectral pass.
inline ComplexField spectral_derivative(const ComplexField& f, int a, int b) {
    require_finite(f, "spectral_derivative");
    return detail::spectral_map(f, [a, b](double kx, double ky) {
        Complex m(1.0, 0.0);
        for (int r = 0; r < a; ++r) m *= detail::mult_d(kx, ky);
        for (int r = 0; r < b; ++r) m *= detail::mult_dbar(kx, ky);
        return m;
    });
}

inline constexpr double kDefaultSolveTol = 1e-10;

namespace detail {

template <class Mult>
ComplexField spectral_solve(const ComplexField& rhs, Mult&& m, double tol, const char* what) {
    require_finite(rhs, what);
    const double scale = max_abs(rhs);
    if (std::abs(mean(rhs)) > tol * std::max(scale, 1e-300) + 1e-300)
        throw UnsolvableConstraintError(
            std::string(what) + ": right side has nonzero mean (constants are not in range)");
    ComplexField out = rhs;
    fft2_inplace(rhs.spec(), out.data(), FFTW_FORWARD);
    const GridSpec& g = rhs.spec();
    for (int j = 0; j < g.ny; ++j) {
        for (int i = 0; i < g.nx; ++i) {
            Complex& c = out.at(i, j);
            if ((i == 0 && j == 0) || g.is_nyquist_x(i) || g.is_nyquist_y(j)) {
                c = 0.0;  // zero-mean gauge; Nyquist projected out
            } else {
                c /= m(g.kx(i), g.ky(j));
            }
        }
    }
    fft2_inplace(rhs.spec(), out.data(), FFTW_BACKWARD);
    return out;
}

}  // namespace detail

/// Solves dbar v = rhs with mean(v) = 0. rhs must have (numerically) zero mean.
inline ComplexField invert_dbar(const ComplexField& rhs, double tol = kDefaultSolveTol) {
    return detail::spectral_solve(rhs, detail::mult_dbar, tol, "invert_dbar");
}

/// Solves d w = rhs with mean(w) = 0.
inline ComplexField invert_d(const ComplexField& rhs, double tol = kDefaultSolveTol) {
    return detail::spectral_solve(rhs, detail::mult_d, tol, "invert_d");
}

/// Two-thirds-rule truncation for products that feed further differentiation.
inline ComplexField dealias(const ComplexField& f) {
    ComplexField out = f;
    detail::fft2_inplace(f.spec(), out.data(), FFTW_FORWARD);
    const GridSpec& g = f.spec();
    const int cx = g.nx / 3, cy = g.ny / 3;
    for (int j = 0; j < g.ny; ++j) {
        const int kj = (j <= g.ny / 2) ? j : j - g.ny;
        for (int i = 0; i < g.nx; ++i) {
            const int ki = (i <= g.nx / 2) ? i : i - g.nx;
            if (std::abs(ki) > cx || std::abs(kj) > cy) out.at(i, j) = 0.0;
        }
    }
    detail::fft2_inplace(f.spec(), out.data(), FFTW_BACKWARD);
    return out;
}

enum class DealiasPolicy { off, on };

inline ComplexField maybe_dealias(const ComplexField& f, DealiasPolicy policy) {
    return policy == DealiasPolicy::on ? dealias(f) : f;
}

// ---------------------------------------------------------------------------
// Quadrature
// ---------------------------------------------------------------------------

enum class Measure { dxdy, dz_wedge_dzbar };

/// Trapezoid-on-torus quadrature (mean times area for periodic data).
/// The dz^dzbar convention maps to -2i dx dy.
inline Complex integrate_area(const ComplexField& f, Measure measure = Measure::dxdy) {
    require_finite(f, "integrate_area");
    const Complex v = mean(f) * f.spec().area();
    return measure == Measure::dxdy ? v : Complex(0.0, -2.0) * v;
}

// ---------------------------------------------------------------------------
// Spectral antiderivatives along grid lines (used by the surface integrator)
// ---------------------------------------------------------------------------

namespace detail {

// Per-line antiderivative of a periodic sampled function: returns values of
// F(s) - F(0) at the nodes, where F' = f and the line mean of f contributes
// an exact linear (monodromy) part.
inline void antiderivative_line(int n, double length, const Complex* f, Complex* F) {
    std::vector<Complex> hat(f, f + n);
    fft1_inplace(n, hat.data(), FFTW_FORWARD);
    const Complex mean0 = hat[0] / static_cast<double>(n);
    std::vector<Complex> per(static_cast<size_t>(n));
    for (int m = 0; m < n; ++m) {
        if (m == 0 || m == n / 2) {
            per[m] = 0.0;
        } else {
            const double k = GridSpec::wavenumber(m, n, length);
            per[m] = hat[m] / Complex(0.0, k);
        }
    }
    fft1_inplace(n, per.data(), FFTW_BACKWARD);
    const Complex p0 = per[0];
    const double h = length / n;
    for (int s = 0; s < n; ++s) F[s] = mean0 * (h * s) + (per[s] - p0);
}

}  // namespace detail

/// Antiderivative in x along each row; output row i holds Int_0^{x_i} f dx.
inline ComplexField antiderivative_x(const ComplexField& f) {
    require_finite(f, "antiderivative_x");
    const GridSpec& g = f.spec();
    ComplexField out(g);
    std::vector<Complex> line(static_cast<size_t>(g.nx));
    for (int j = 0; j < g.ny; ++j) {
        detail::antiderivative_line(g.nx, g.lx, &f.at(0, j), line.data());
        for (int i = 0; i < g.nx; ++i) out.at(i, j) = line[i];
    }
    return out;
}

/// Antiderivative in y along each column.
inline ComplexField antiderivative_y(const ComplexField& f) {
    require_finite(f, "antiderivative_y");
    const GridSpec& g = f.spec();
    ComplexField out(g);
    std::vector<Complex> col(static_cast<size_t>(g.ny));
    std::vector<Complex> F(static_cast<size_t>(g.ny));
    for (int i = 0; i < g.nx; ++i) {
        for (int j = 0; j < g.ny; ++j) col[j] = f.at(i, j);
        detail::antiderivative_line(g.ny, g.ly, col.data(), F.data());
        for (int j = 0; j < g.ny; ++j) out.at(i, j) = F[j];
    }
    return out;
}

// ---------------------------------------------------------------------------
// Seeded band-limited random fields (verification inputs)
// ---------------------------------------------------------------------------

/// Random trigonometric polynomial with modes |kx|,|ky| <= band and
/// coefficient magnitudes decaying like decay^(|kx|+|ky|).
inline ComplexField random_band_limited(const GridSpec& spec, int band, double decay,
                                        std::mt19937_64& rng) {
    if (band < 0 || 2 * band >= std::min(spec.nx, spec.ny))
        throw InvalidParameterError("random_band_limited: band exceeds grid");
    std::normal_distribution<double> gauss(0.0, 1.0);
    ComplexField hat(spec);
    for (int kj = -band; kj <= band; ++kj) {
        for (int ki = -band; ki <= band; ++ki) {
            const double amp = std::pow(decay, std::abs(ki) + std::abs(kj));
            const int i = (ki + spec.nx) % spec.nx;
            const int j = (kj + spec.ny) % spec.ny;
            hat.at(i, j) = amp * Complex(gauss(rng), gauss(rng));
        }
    }
    detail::fft2_inplace(spec, hat.data(), FFTW_BACKWARD);
    ComplexField out = hat;
    for (Complex& c : out.data()) c *= static_cast<double>(spec.size());
    return out;
}

}  // namespace dslab
