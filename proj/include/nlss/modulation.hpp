#pragma once

#include <array>
#include <cmath>
#include <vector>

#include "nlss/model.hpp"
#include "nlss/soliton.hpp"

namespace nlss {

struct ModulationRates {
    std::array<double, 3> a_dot{0, 0, 0};
    std::array<double, 3> v_dot{0, 0, 0};
    double gamma_dot = 0.0;
    double mu_dot = 0.0;
    std::array<double, 8> alpha{}; // 2*dim+2 entries used
};

// Leading-order modulation vector field: the soliton center follows the
// classical particle in the rescaled bump.
inline ModulationRates modulation_rhs_leading(const SolitonParams& s, const ModelParams& prm,
                                              int dim) {
    ModulationRates out;
    const auto gv = v_eps_grad(s.a, prm);
    double v2 = 0.0;
    for (int k = 0; k < dim; ++k) {
        out.a_dot[k] = s.v[k];
        out.v_dot[k] = -gv[k];
        v2 += s.v[k] * s.v[k];
    }
    out.gamma_dot = s.mu - 0.5 * v2 - v_eps(s.a, prm);
    out.mu_dot = 0.0;
    return out;
}

namespace detail {

// N_mu(r) = F(|r+phi|^2)(r+phi) - F(phi^2)phi - dF[phi] r, the quadratic-and-
// higher remainder of the nonlinearity around the real profile phi.
inline ComplexField nonlinear_remainder(const ComplexField& r, const ComplexField& phi,
                                        const NlsModel& model) {
    ComplexField out(r.grid_ptr());
    for (std::size_t i = 0; i < out.size(); ++i) {
        const double ph = phi[i].real();
        const cdouble full = r[i] + ph;
        const double fp = model.F(ph * ph);
        out[i] = model.F(std::norm(full)) * full - fp * ph - fp * r[i] -
                 model.Fprime(ph * ph) * ph * ph * (r[i] + std::conj(r[i]));
    }
    return out;
}

// R_V(x) = V_eps(x + a) - V_eps(a) - grad V_eps(a) . x on the soliton frame.
inline ComplexField rv_field(const GridPtr& gp, const std::array<double, 3>& a,
                             const ModelParams& prm) {
    const Grid& g = *gp;
    ComplexField out(gp);
    const double va = v_eps(a, prm);
    const auto gva = v_eps_grad(a, prm);
    for (std::size_t i = 0; i < out.size(); ++i) {
        const auto ijk = g.unravel(i);
        std::array<double, 3> lab{0, 0, 0};
        double lin = 0.0;
        for (int ax = 0; ax < g.dim(); ++ax) {
            const double x = g.coord(ax, ijk[ax]);
            lab[ax] = wrap_disp(a[ax] + x, g.box(ax));
            lin += gva[ax] * x;
        }
        out[i] = v_eps(lab, prm) - va - lin;
    }
    return out;
}

} // namespace detail

// Full modulation system: every correction inner product evaluated by
// quadrature in the soliton frame; the alpha coefficients are refreshed by
// one fixed-point pass from the supplied guess.
inline ModulationRates modulation_rhs_full(const SolitonFamily& fam, const SolitonParams& s,
                                           const ComplexField& r,
                                           const std::array<double, 8>& alpha_guess) {
    const Grid& g = fam.grid();
    const GridPtr gp = fam.grid_ptr();
    const int d = g.dim();
    const NlsModel& model = fam.model();
    const ModelParams& prm = model.prm;

    const double m = fam.mass(s.mu);
    const double mp = fam.mass_prime(s.mu);
    if (std::abs(mp) < 1e-12)
        throw Error("modulation: vanishing m'(mu), convexity violated at this discretization");

    ComplexField phi = fam.phi(s.mu);
    ComplexField dmu = fam.dmu_phi(s.mu);
    ComplexField nr = detail::nonlinear_remainder(r, phi, model);
    ComplexField rv = detail::rv_field(gp, s.a, prm);
    ComplexField nrv(gp); // N + R_V r
    for (std::size_t i = 0; i < nrv.size(); ++i) nrv[i] = nr[i] + rv[i].real() * r[i];
    ComplexField jnrv = cdouble(0.0, -1.0) * nrv; // J = -i
    ComplexField jr = cdouble(0.0, -1.0) * r;
    ComplexField rvphi(gp);
    for (std::size_t i = 0; i < rvphi.size(); ++i) rvphi[i] = rv[i].real() * phi[i];

    // sum_j alpha_j K_j psi for a real base field psi
    auto k_sum = [&](const ComplexField& psi, const ComplexField& dmu_psi) {
        ComplexField out(gp);
        for (int ax = 0; ax < d; ++ax) {
            if (alpha_guess[ax] != 0.0) {
                ComplexField dpsi = gradient_axis(psi, ax);
                for (std::size_t i = 0; i < out.size(); ++i)
                    out[i] += alpha_guess[ax] * dpsi[i];
            }
        }
        for (std::size_t i = 0; i < out.size(); ++i) {
            const auto ijk = g.unravel(i);
            cdouble acc = out[i];
            for (int ax = 0; ax < d; ++ax)
                acc += alpha_guess[d + ax] * cdouble(0.0, 1.0) * g.coord(ax, ijk[ax]) * psi[i];
            acc += alpha_guess[2 * d] * cdouble(0.0, 1.0) * psi[i];
            acc += alpha_guess[2 * d + 1] * dmu_psi[i];
            out[i] = acc;
        }
        return out;
    };

    ModulationRates out;
    const auto gva = v_eps_grad(s.a, prm);
    double v2 = 0.0;
    for (int k = 0; k < d; ++k) v2 += s.v[k] * s.v[k];

    ComplexField d2mu = fam.d2mu_phi(s.mu);
    for (int k = 0; k < d; ++k) {
        // x_k phi and d_k phi with their mu-derivatives
        ComplexField xphi(gp), dmu_xphi(gp);
        for (std::size_t i = 0; i < xphi.size(); ++i) {
            const auto ijk = g.unravel(i);
            const double xk = g.coord(k, ijk[k]);
            xphi[i] = xk * phi[i];
            dmu_xphi[i] = xk * dmu[i];
        }
        ComplexField dkphi = fam.dphi(s.mu, k);
        ComplexField dmu_dkphi = fam.dmu_dphi(s.mu, k);

        out.a_dot[k] = s.v[k] +
                       (rinner(xphi, jnrv) + rinner(k_sum(xphi, dmu_xphi), r)) / m;
        out.v_dot[k] = -gva[k] + rinner(dkphi, nrv) / m -
                       rinner(k_sum(dkphi, dmu_dkphi), jr) + rinner(dkphi, rvphi);
    }
    double adotv = 0.0;
    for (int k = 0; k < d; ++k) adotv += out.a_dot[k] * s.v[k];
    out.gamma_dot = s.mu - 0.5 * v2 + adotv - v_eps(s.a, prm) -
                    rinner(dmu, nrv) / mp - rinner(k_sum(dmu, d2mu), jr) +
                    rinner(dmu, rvphi);
    out.mu_dot = rinner(phi, jnrv) / mp - rinner(k_sum(phi, dmu), r);

    for (int k = 0; k < d; ++k) {
        out.alpha[k] = out.a_dot[k] - s.v[k];
        out.alpha[d + k] = -out.v_dot[k] - gva[k];
    }
    out.alpha[2 * d] = s.mu - 0.5 * v2 + adotv - v_eps(s.a, prm) - out.gamma_dot;
    out.alpha[2 * d + 1] = -out.mu_dot;
    return out;
}

struct ModulationSample {
    double t = 0.0;
    SolitonParams sigma;
    std::array<double, 3> y{0, 0, 0}; // integral of v plus the initial center
    double theta_accum = 0.0;         // integral of (v_dot.y + |v|^2/2 - mu)
};

// Leapfrog (kick-drift-kick) on (a, v), midpoint rule for the phase; exactly
// conserves |v|^2/2 + V_eps(a) up to the integrator order.
inline std::vector<ModulationSample> integrate_modulation(const SolitonParams& s0, double t_end,
                                                          double dt, const ModelParams& prm,
                                                          int dim, int sample_stride = 1) {
    if (!(dt > 0.0) || !(t_end >= 0.0)) throw InvalidArgument("modulation: bad time step");
    if (sample_stride < 1) throw InvalidArgument("modulation: sample stride must be >= 1");
    std::vector<ModulationSample> path;
    SolitonParams s = s0;
    ModulationSample cur;
    cur.sigma = s;
    for (int k = 0; k < dim; ++k) cur.y[k] = s.a[k];
    path.push_back(cur);

    const long nsteps = static_cast<long>(std::ceil(t_end / dt - 1e-12));
    auto force = [&](const std::array<double, 3>& a) {
        auto f = v_eps_grad(a, prm);
        for (auto& fi : f) fi = -fi;
        return f;
    };

    for (long n = 0; n < nsteps; ++n) {
        const double h = std::min(dt, t_end - n * dt);
        auto f0 = force(s.a);
        std::array<double, 3> vh = s.v, amid = s.a;
        double vh2 = 0.0;
        for (int k = 0; k < dim; ++k) {
            vh[k] += 0.5 * h * f0[k];
            amid[k] = s.a[k] + 0.5 * h * vh[k];
            vh2 += vh[k] * vh[k];
        }
        std::array<double, 3> anew = s.a;
        for (int k = 0; k < dim; ++k) anew[k] = s.a[k] + h * vh[k];
        auto f1 = force(anew);
        for (int k = 0; k < dim; ++k) s.v[k] = vh[k] + 0.5 * h * f1[k];

        cur.t += h;
        s.a = anew;
        s.gamma += h * (s.mu - 0.5 * vh2 - v_eps(amid, prm));
        // theta integrand of the ansatz phase, midpoint values
        const auto fmid = force(amid);
        double vdoty = 0.0;
        for (int k = 0; k < dim; ++k) {
            cur.y[k] += h * vh[k];
            vdoty += fmid[k] * cur.y[k];
        }
        cur.theta_accum += h * (vdoty + 0.5 * vh2 - s.mu);
        cur.sigma = s;
        cur.sigma.gamma = SolitonParams::wrap_angle(s.gamma);
        if ((n + 1) % sample_stride == 0 || n + 1 == nsteps) path.push_back(cur);
    }
    return path;
}

} // namespace nlss
