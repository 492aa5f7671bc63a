#pragma once

#include <cmath>
#include <vector>

#include "nlss/detail/pchip.hpp"
#include "nlss/errors.hpp"
#include "nlss/model.hpp"

namespace nlss::detail {

// Radial profile R(rho) of the ground state in dimension d, from shooting on
//   -1/2 (R'' + (d-1)/rho R') - F(R^2) R = -mu R,  R'(0) = 0,
// bisecting the center amplitude between decay and zero-crossing.
struct RadialProfile {
    double mu = 0.0;
    double amplitude = 0.0;
    double mass = 0.0;       // d-dimensional L2 mass of the profile
    double half_max_radius = 0.0;
    Pchip table;             // R as a function of rho on [0, rho_max]
    double rho_max = 0.0;

    double operator()(double rho) const {
        if (rho >= rho_max) return 0.0;
        return table(rho);
    }
};

inline RadialProfile radial_ground_state(double mu, const ModelParams& prm, int dim) {
    if (!(mu > 0.0)) throw InvalidArgument("radial: mu must be positive");
    const double kappa = std::sqrt(2.0 * mu);
    const double h = 2e-4 / std::max(1.0, kappa);
    const double rho_max = 30.0 / kappa + 5.0;
    const double surf = dim == 3 ? 4.0 * std::numbers::pi
                       : dim == 2 ? 2.0 * std::numbers::pi
                                  : 2.0;

    auto accel = [&](double rho, double R, double dR) {
        return 2.0 * (mu * R - f1(R * R, prm) * R) - (dim - 1) / rho * dR;
    };

    // outcome: -1 undershoot (turns back up), +1 overshoot (crosses zero),
    // 0 decayed cleanly
    auto shoot = [&](double A, std::vector<double>* rr, std::vector<double>* rv) {
        double R = A, dR = 0.0;
        int status = 0;
        if (rr) {
            rr->clear();
            rv->clear();
            rr->push_back(0.0);
            rv->push_back(A);
        }
        int step = 0;
        for (double rho = h; rho < rho_max; rho += h, ++step) {
            const double k1R = dR, k1D = accel(rho, R, dR);
            const double k2R = dR + 0.5 * h * k1D,
                         k2D = accel(rho + 0.5 * h, R + 0.5 * h * k1R, dR + 0.5 * h * k1D);
            const double k3R = dR + 0.5 * h * k2D,
                         k3D = accel(rho + 0.5 * h, R + 0.5 * h * k2R, dR + 0.5 * h * k2D);
            const double k4R = dR + h * k3D, k4D = accel(rho + h, R + h * k3R, dR + h * k3D);
            R += h / 6.0 * (k1R + 2 * k2R + 2 * k3R + k4R);
            dR += h / 6.0 * (k1D + 2 * k2D + 2 * k3D + k4D);
            if (rr && step % 16 == 0) {
                rr->push_back(rho + h);
                rv->push_back(R);
            }
            if (R < 0.0) {
                status = +1;
                break;
            }
            if (dR > 0.0 && rho > 0.3 / kappa) {
                status = -1;
                break;
            }
            if (R < 1e-15 * A) break;
        }
        return status;
    };

    double lo = 1e-3, hi = 400.0;
    if (shoot(hi, nullptr, nullptr) != +1)
        throw NonConvergence("radial: no overshoot bracket; pathological parameters");
    for (int it = 0; it < 80; ++it) {
        const double mid = 0.5 * (lo + hi);
        (shoot(mid, nullptr, nullptr) == -1 ? lo : hi) = mid;
    }

    RadialProfile out;
    out.mu = mu;
    out.amplitude = lo;
    std::vector<double> rr, rv;
    shoot(lo, &rr, &rv);
    // clip the noisy end of the undershoot branch and append a clean zero tail
    std::size_t keep = rv.size();
    for (std::size_t i = 1; i < rv.size(); ++i) {
        if (rv[i] > rv[i - 1] || rv[i] < 1e-13 * lo) {
            keep = i;
            break;
        }
    }
    rr.resize(keep);
    rv.resize(keep);
    const double decay = std::exp(-kappa * (rr.back() - rr[keep - 2]));
    double rho_tail = rr.back(), val_tail = rv.back();
    while (val_tail > 1e-250 && rho_tail < rho_max + 10.0) {
        rho_tail += rr.back() - rr[keep - 2];
        val_tail *= decay;
        rr.push_back(rho_tail);
        rv.push_back(val_tail);
    }
    rr.push_back(rho_tail + 1.0);
    rv.push_back(0.0);
    out.rho_max = rho_tail + 1.0;

    double mass = 0.0;
    for (std::size_t i = 1; i < rr.size(); ++i) {
        const double rm = 0.5 * (rr[i] + rr[i - 1]);
        const double vm = 0.5 * (rv[i] + rv[i - 1]);
        mass += surf * std::pow(rm, dim - 1) * vm * vm * (rr[i] - rr[i - 1]);
    }
    out.mass = mass;
    for (std::size_t i = 0; i < rv.size(); ++i) {
        if (rv[i] < 0.5 * lo) {
            out.half_max_radius = rr[i];
            break;
        }
    }
    out.table = Pchip(std::move(rr), std::move(rv));
    return out;
}

} // namespace nlss::detail
