#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <vector>

#include "nlss/fft.hpp"
#include "nlss/grid.hpp"
#include "nlss/reduce.hpp"

namespace nlss {

using cdouble = std::complex<double>;

// One complex value per grid point, row-major. Also used for Fourier-space
// data (same layout, standard DFT ordering).
class ComplexField {
  public:
    ComplexField() = default;
    explicit ComplexField(GridPtr grid) : grid_(std::move(grid)), v_(grid_->total()) {}
    ComplexField(GridPtr grid, std::vector<cdouble> values)
        : grid_(std::move(grid)), v_(std::move(values)) {
        if (v_.size() != grid_->total()) throw InvalidArgument("field: size mismatch");
    }

    const Grid& grid() const { return *grid_; }
    GridPtr grid_ptr() const { return grid_; }
    std::size_t size() const { return v_.size(); }
    cdouble* data() { return v_.data(); }
    const cdouble* data() const { return v_.data(); }
    cdouble& operator[](std::size_t i) { return v_[i]; }
    const cdouble& operator[](std::size_t i) const { return v_[i]; }

    ComplexField& operator+=(const ComplexField& o) {
        for (std::size_t i = 0; i < v_.size(); ++i) v_[i] += o.v_[i];
        return *this;
    }
    ComplexField& operator-=(const ComplexField& o) {
        for (std::size_t i = 0; i < v_.size(); ++i) v_[i] -= o.v_[i];
        return *this;
    }
    ComplexField& operator*=(cdouble c) {
        for (auto& x : v_) x *= c;
        return *this;
    }
    ComplexField& operator*=(double c) {
        for (auto& x : v_) x *= c;
        return *this;
    }

    friend ComplexField operator+(ComplexField a, const ComplexField& b) { return a += b; }
    friend ComplexField operator-(ComplexField a, const ComplexField& b) { return a -= b; }
    friend ComplexField operator*(ComplexField a, cdouble c) { return a *= c; }
    friend ComplexField operator*(cdouble c, ComplexField a) { return a *= c; }
    friend ComplexField operator*(ComplexField a, double c) { return a *= c; }
    friend ComplexField operator*(double c, ComplexField a) { return a *= c; }

    bool all_finite() const {
        for (const auto& x : v_)
            if (!std::isfinite(x.real()) || !std::isfinite(x.imag())) return false;
        return true;
    }

  private:
    GridPtr grid_;
    std::vector<cdouble> v_;
};

// Two complex values per grid point; holds Z = (R, conj R) style pairs.
struct SpinorField {
    ComplexField upper;
    ComplexField lower;

    SpinorField() = default;
    explicit SpinorField(GridPtr grid) : upper(grid), lower(std::move(grid)) {}
    SpinorField(ComplexField up, ComplexField lo) : upper(std::move(up)), lower(std::move(lo)) {
        if (!upper.grid().same_shape(lower.grid()))
            throw InvalidArgument("spinor: component grids differ");
    }

    const Grid& grid() const { return upper.grid(); }
    GridPtr grid_ptr() const { return upper.grid_ptr(); }

    SpinorField& operator+=(const SpinorField& o) {
        upper += o.upper;
        lower += o.lower;
        return *this;
    }
    SpinorField& operator-=(const SpinorField& o) {
        upper -= o.upper;
        lower -= o.lower;
        return *this;
    }
    SpinorField& operator*=(cdouble c) {
        upper *= c;
        lower *= c;
        return *this;
    }
    friend SpinorField operator+(SpinorField a, const SpinorField& b) { return a += b; }
    friend SpinorField operator-(SpinorField a, const SpinorField& b) { return a -= b; }
    friend SpinorField operator*(cdouble c, SpinorField a) { return a *= c; }
};

inline ComplexField fft(const ComplexField& f) {
    ComplexField out(f.grid_ptr());
    fft_forward(f.grid(), f.data(), out.data());
    return out;
}

inline ComplexField ifft(const ComplexField& fhat) {
    ComplexField out(fhat.grid_ptr());
    fft_inverse(fhat.grid(), fhat.data(), out.data());
    return out;
}

// |k|^2 at a flattened spectral index.
inline double k_squared(const Grid& g, std::size_t idx) {
    const auto ijk = g.unravel(idx);
    double k2 = 0.0;
    for (int a = 0; a < g.dim(); ++a) {
        const double ka = g.wavenumbers(a)[ijk[a]];
        k2 += ka * ka;
    }
    return k2;
}

// Spectral Laplacian: multiply Fourier coefficients by -|k|^2 and invert.
inline ComplexField laplacian(const ComplexField& f) {
    ComplexField fhat = fft(f);
    const Grid& g = f.grid();
    for (std::size_t i = 0; i < g.total(); ++i) fhat[i] *= -k_squared(g, i);
    return ifft(fhat);
}

// Spectral partial derivative along one axis. The Nyquist mode is zeroed so
// derivatives of real fields stay real.
inline ComplexField gradient_axis(const ComplexField& f, int axis) {
    ComplexField fhat = fft(f);
    const Grid& g = f.grid();
    const int nyq = g.n(axis) / 2;
    for (std::size_t i = 0; i < g.total(); ++i) {
        const auto ijk = g.unravel(i);
        if (ijk[axis] == nyq)
            fhat[i] = 0.0;
        else
            fhat[i] *= cdouble(0.0, g.wavenumbers(axis)[ijk[axis]]);
    }
    return ifft(fhat);
}

// f(x - d) via Fourier phase shift; exact for band-limited data, works for
// displacements not aligned with the grid.
inline ComplexField shift(const ComplexField& f, const std::array<double, 3>& d) {
    ComplexField fhat = fft(f);
    const Grid& g = f.grid();
    for (std::size_t i = 0; i < g.total(); ++i) {
        const auto ijk = g.unravel(i);
        double phase = 0.0;
        for (int a = 0; a < g.dim(); ++a) phase -= g.wavenumbers(a)[ijk[a]] * d[a];
        fhat[i] *= std::polar(1.0, phase);
    }
    return ifft(fhat);
}

// Complex L2 pairing  integral of u * conj(v) dx  (conjugate-second).
inline cdouble inner(const ComplexField& u, const ComplexField& v) {
    const double dv = u.grid().cell_volume();
    const double re = pairwise_accumulate(u.size(), [&](std::size_t i) {
        return u[i].real() * v[i].real() + u[i].imag() * v[i].imag();
    });
    const double im = pairwise_accumulate(u.size(), [&](std::size_t i) {
        return u[i].imag() * v[i].real() - u[i].real() * v[i].imag();
    });
    return cdouble(re * dv, im * dv);
}

// Real inner product <u,v> = Re integral u conj(v).
inline double rinner(const ComplexField& u, const ComplexField& v) {
    const double dv = u.grid().cell_volume();
    return dv * pairwise_accumulate(u.size(), [&](std::size_t i) {
        return u[i].real() * v[i].real() + u[i].imag() * v[i].imag();
    });
}

// Symplectic form omega(u,v) = Im integral u conj(v).
inline double omega(const ComplexField& u, const ComplexField& v) {
    const double dv = u.grid().cell_volume();
    return dv * pairwise_accumulate(u.size(), [&](std::size_t i) {
        return u[i].imag() * v[i].real() - u[i].real() * v[i].imag();
    });
}

inline cdouble inner(const SpinorField& u, const SpinorField& v) {
    return inner(u.upper, v.upper) + inner(u.lower, v.lower);
}

inline double norm_l2(const ComplexField& f) {
    const double dv = f.grid().cell_volume();
    return std::sqrt(dv * pairwise_accumulate(f.size(), [&](std::size_t i) {
        return std::norm(f[i]);
    }));
}

inline double norm_l2(const SpinorField& f) {
    const double a = norm_l2(f.upper), b = norm_l2(f.lower);
    return std::sqrt(a * a + b * b);
}

// ||f||_Lq^q = h^dim * sum |f|^q, Riemann-sum quadrature.
inline double norm_lq(const ComplexField& f, double q) {
    if (!(q >= 1.0) || !std::isfinite(q)) throw InvalidArgument("norms: q must be in [1, inf)");
    const double dv = f.grid().cell_volume();
    return std::pow(dv * pairwise_accumulate(f.size(), [&](std::size_t i) {
                        return std::pow(std::abs(f[i]), q);
                    }),
                    1.0 / q);
}

inline double norm_lq(const SpinorField& f, double q) {
    if (!(q >= 1.0) || !std::isfinite(q)) throw InvalidArgument("norms: q must be in [1, inf)");
    const double dv = f.grid().cell_volume();
    auto term = [&](const ComplexField& c) {
        return pairwise_accumulate(c.size(), [&](std::size_t i) {
            return std::pow(std::abs(c[i]), q);
        });
    };
    return std::pow(dv * (term(f.upper) + term(f.lower)), 1.0 / q);
}

inline double norm_linf(const ComplexField& f) {
    double m = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) m = std::max(m, std::abs(f[i]));
    return m;
}

// ||f||_H1^2 = ||f||_L2^2 + ||grad f||_L2^2 with the spectral gradient,
// evaluated by Parseval in Fourier space.
inline double norm_h1(const ComplexField& f) {
    ComplexField fhat = fft(f);
    const Grid& g = f.grid();
    const double scale = g.volume() / static_cast<double>(g.total() * g.total());
    const double s = pairwise_accumulate(g.total(), [&](std::size_t i) {
        return (1.0 + k_squared(g, i)) * std::norm(fhat[i]);
    });
    return std::sqrt(scale * s);
}

inline double norm_h1(const SpinorField& f) {
    const double a = norm_h1(f.upper), b = norm_h1(f.lower);
    return std::sqrt(a * a + b * b);
}

struct NormSet {
    double l2;
    double h1;
    double linf;
};

inline NormSet norms(const ComplexField& f) {
    return NormSet{norm_l2(f), norm_h1(f), norm_linf(f)};
}

} // namespace nlss
