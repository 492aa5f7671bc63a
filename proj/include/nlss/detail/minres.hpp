#pragma once

#include <cmath>
#include <functional>

#include "nlss/field.hpp"

namespace nlss::detail {

// Preconditioned MINRES for a symmetric (possibly indefinite) operator with
// an SPD preconditioner. Operates on ComplexField storage carrying real data.
// Returns the relative residual estimate reached.
inline double minres(const std::function<void(const ComplexField&, ComplexField&)>& apply_a,
                     const std::function<void(const ComplexField&, ComplexField&)>& apply_minv,
                     const ComplexField& b, ComplexField& x, double rtol, int maxit) {
    const GridPtr gp = b.grid_ptr();
    x = ComplexField(gp);
    ComplexField r1 = b, r2 = b, y(gp), v(gp), w(gp), w1(gp), w2(gp), tmp(gp);

    apply_minv(r1, y);
    double beta1 = rinner(r1, y);
    if (beta1 <= 0.0) return 0.0; // b == 0 (or indefinite preconditioner)
    beta1 = std::sqrt(beta1);

    double oldb = 0.0, beta = beta1, dbar = 0.0, epsln = 0.0;
    double phibar = beta1, cs = -1.0, sn = 0.0;

    for (int itn = 1; itn <= maxit; ++itn) {
        const double s = 1.0 / beta;
        for (std::size_t i = 0; i < v.size(); ++i) v[i] = s * y[i];
        apply_a(v, tmp);
        if (itn >= 2) {
            const double c = beta / oldb;
            for (std::size_t i = 0; i < tmp.size(); ++i) tmp[i] -= c * r1[i];
        }
        const double alfa = rinner(v, tmp);
        {
            const double c = alfa / beta;
            for (std::size_t i = 0; i < tmp.size(); ++i) tmp[i] -= c * r2[i];
        }
        r1 = r2;
        r2 = tmp;
        apply_minv(r2, y);
        oldb = beta;
        const double betasq = rinner(r2, y);
        if (betasq < 0.0) break; // preconditioner lost positivity; bail with current x
        beta = std::sqrt(betasq);

        const double oldeps = epsln;
        const double delta = cs * dbar + sn * alfa;
        const double gbar = sn * dbar - cs * alfa;
        epsln = sn * beta;
        dbar = -cs * beta;
        double gamma = std::sqrt(gbar * gbar + beta * beta);
        gamma = std::max(gamma, 1e-300);
        cs = gbar / gamma;
        sn = beta / gamma;
        const double phi = cs * phibar;
        phibar = sn * phibar;

        w1 = w2;
        w2 = w;
        const double denom = 1.0 / gamma;
        for (std::size_t i = 0; i < w.size(); ++i)
            w[i] = denom * (v[i] - oldeps * w1[i] - delta * w2[i]);
        for (std::size_t i = 0; i < x.size(); ++i) x[i] += phi * w[i];

        if (phibar <= rtol * beta1) return phibar / beta1;
    }
    return phibar / beta1;
}

} // namespace nlss::detail
