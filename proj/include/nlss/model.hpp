#pragma once

#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "nlss/detail/pchip.hpp"
#include "nlss/detail/quadrature.hpp"
#include "nlss/errors.hpp"

namespace nlss {

// Nonlinearity exponents, saturation constant, potential scale and height.
// The saturated nonlinearity takes the modulus-squared argument m = |s|^2:
//
//   F_eps(m) = m^{p/2} * g(m) / (theta * eps^{-2r/p} + g(m)),   g(m) = m^{r/2},
//
// and F denotes F_1 (eps = 1), the nonlinearity of the rescaled equation.
struct ModelParams {
    double p = 1.2;
    double r = 1.6;
    double theta = 0.1;
    double eps = 1.0;
    double v0 = 1.0;

    // Throws InvalidArgument naming the violated constraint.
    void validate() const {
        if (!(p > 1.0 && p < 4.0 / 3.0))
            throw InvalidArgument("model: requires 1 < p < 4/3, got p = " + std::to_string(p));
        if (!(r + p > 7.0 / 3.0 && r + p <= 4.0))
            throw InvalidArgument("model: requires 7/3 < r + p <= 4, got r + p = " +
                                  std::to_string(r + p));
        if (!(theta > 0.0)) throw InvalidArgument("model: requires theta > 0");
        if (!(eps > 0.0 && eps <= 1.0)) throw InvalidArgument("model: requires 0 < eps <= 1");
        if (!(v0 > 0.0)) throw InvalidArgument("model: requires v0 > 0");
    }

    // Saturation denominator constant theta * eps^{-2r/p}.
    double sat_den() const { return theta * std::pow(eps, -2.0 * r / p); }
};

namespace detail {

inline double f_sat(double m, double p, double r, double den) {
    if (m < 0.0) throw InvalidArgument("nonlinearity: negative modulus-squared");
    if (m == 0.0) return 0.0;
    const double g = std::pow(m, 0.5 * r);
    return std::pow(m, 0.5 * p) * g / (den + g);
}

inline double f_sat_prime(double m, double p, double r, double den) {
    if (m < 0.0) throw InvalidArgument("nonlinearity: negative modulus-squared");
    if (m == 0.0) return 0.0; // one-sided limit, valid for p + r > 2
    const double g = std::pow(m, 0.5 * r);
    const double h = g / (den + g);
    const double hp = den * (0.5 * r) * std::pow(m, 0.5 * r - 1.0) / ((den + g) * (den + g));
    return 0.5 * p * std::pow(m, 0.5 * p - 1.0) * h + std::pow(m, 0.5 * p) * hp;
}

} // namespace detail

// F_eps(|s|^2) with the params' own eps.
inline double f_eps(double m, const ModelParams& prm) {
    return detail::f_sat(m, prm.p, prm.r, prm.sat_den());
}

// d/dm F_eps(m).
inline double f_eps_prime(double m, const ModelParams& prm) {
    return detail::f_sat_prime(m, prm.p, prm.r, prm.sat_den());
}

// The F of the rescaled equation (eps = 1), used by the evolver, energies
// and linearized operators regardless of the scenario eps.
inline double f1(double m, const ModelParams& prm) {
    return detail::f_sat(m, prm.p, prm.r, prm.theta);
}

inline double f1_prime(double m, const ModelParams& prm) {
    return detail::f_sat_prime(m, prm.p, prm.r, prm.theta);
}

// Smooth bump supported in the unit ball, V(0) = v0.
inline double bump_v(const std::array<double, 3>& x, const ModelParams& prm) {
    const double m2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
    if (m2 >= 1.0) return 0.0;
    return prm.v0 * std::exp(1.0 - 1.0 / (1.0 - m2));
}

inline std::array<double, 3> bump_v_grad(const std::array<double, 3>& x, const ModelParams& prm) {
    const double m2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
    std::array<double, 3> g{0.0, 0.0, 0.0};
    if (m2 >= 1.0) return g;
    const double v = prm.v0 * std::exp(1.0 - 1.0 / (1.0 - m2));
    const double c = -2.0 / ((1.0 - m2) * (1.0 - m2));
    for (int a = 0; a < 3; ++a) g[a] = v * c * x[a];
    return g;
}

// V_eps(x) = eps^2 V(eps x): sup eps^2 v0, support radius 1/eps, invariant
// L^{3/2} norm.
inline double v_eps(const std::array<double, 3>& x, const ModelParams& prm) {
    const double e = prm.eps;
    return e * e * bump_v({e * x[0], e * x[1], e * x[2]}, prm);
}

inline std::array<double, 3> v_eps_grad(const std::array<double, 3>& x, const ModelParams& prm) {
    const double e = prm.eps;
    auto g = bump_v_grad({e * x[0], e * x[1], e * x[2]}, prm);
    for (auto& gi : g) gi *= e * e * e;
    return g;
}

// Antiderivative G(m) = 1/2 int_0^m F(s) ds (eps = 1 nonlinearity), so the
// field functional is int G(|u|^2) dx. The saturated F has no elementary
// antiderivative for generic p, r; G is tabulated once by cumulative
// adaptive quadrature on log-spaced nodes with monotone interpolation, with
// a pure-power asymptote below the table and direct quadrature above it.
class GAntiderivative {
  public:
    explicit GAntiderivative(const ModelParams& prm) : prm_(prm) {
        prm_.validate();
        // below m_switch the geometric series in m^{r/2}/theta converges to
        // machine precision in a few terms
        m_switch_ = std::pow(0.01 * prm_.theta, 2.0 / prm_.r);
        if (m_switch_ >= m_hi_) return; // series covers the whole working range
        const double t_lo = std::log(m_switch_), t_hi = std::log(m_hi_);
        // pchip is third order; ~550 nodes per ln-unit keeps interpolation
        // error comfortably under the 1e-8 probe tolerance
        const int n_nodes = std::min(30000, std::max(4000, static_cast<int>((t_hi - t_lo) * 550.0)));
        std::vector<double> t(n_nodes), g(n_nodes);
        double acc = small_m_series(m_switch_);
        t[0] = t_lo;
        g[0] = acc;
        double prev = m_switch_;
        for (int i = 1; i < n_nodes; ++i) {
            t[i] = t_lo + (t_hi - t_lo) * i / (n_nodes - 1);
            const double m = std::exp(t[i]);
            const double seg = detail::adaptive_simpson(
                [&](double s) { return f1(s, prm_); }, prev, m,
                1e-13 * std::max(1e-6, acc) + 1e-300);
            acc += 0.5 * seg;
            g[i] = acc;
            prev = m;
        }
        table_ = detail::Pchip(std::move(t), std::move(g));
    }

    double operator()(double m) const {
        if (m < 0.0) throw InvalidArgument("nonlinearity: negative modulus-squared");
        if (m == 0.0) return 0.0;
        if (m < m_switch_) return small_m_series(m);
        if (m > m_hi_) {
            // beyond any physical amplitude; integrate the tail directly
            const double tail = detail::adaptive_simpson(
                [&](double s) { return f1(s, prm_); }, m_hi_, m, 1e-12 * m);
            return table_(std::log(m_hi_)) + 0.5 * tail;
        }
        return table_(std::log(m));
    }

    // Direct quadrature, bypassing the table; used to probe cache accuracy.
    double direct(double m) const {
        if (m <= 0.0) return 0.0;
        if (m < m_switch_) return small_m_series(m);
        return small_m_series(m_switch_) +
               0.5 * detail::adaptive_simpson([&](double s) { return f1(s, prm_); }, m_switch_,
                                              m, 1e-14 * std::max(1e-6, m));
    }

  private:
    // Expansion of 1/2 int_0^m s^{(p+r)/2}/theta * (1 + s^{r/2}/theta)^{-1} ds.
    double small_m_series(double m) const {
        if (m <= 0.0) return 0.0;
        const double x = std::pow(m, 0.5 * prm_.r) / prm_.theta;
        double sum = 0.0, sign = 1.0;
        for (int j = 0; j < 8; ++j) {
            const double expo = 0.5 * (prm_.p + prm_.r) + 0.5 * prm_.r * j + 1.0;
            sum += sign * std::pow(x, j) / expo;
            sign = -sign;
        }
        return 0.5 * std::pow(m, 0.5 * (prm_.p + prm_.r) + 1.0) / prm_.theta * sum;
    }

    ModelParams prm_;
    double m_switch_ = 0.0;
    double m_hi_ = 1e6;
    detail::Pchip table_;
};

} // namespace nlss
