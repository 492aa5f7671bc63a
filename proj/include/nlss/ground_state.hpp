#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "nlss/detail/minres.hpp"
#include "nlss/detail/radial.hpp"
#include "nlss/field.hpp"
#include "nlss/grid.hpp"
#include "nlss/model.hpp"

namespace nlss {

struct CollapseToZero : Error {
    using Error::Error;
};
struct UnderResolved : Error {
    using Error::Error;
};

// Model parameters bundled with the (lazily expensive) antiderivative table.
struct NlsModel {
    ModelParams prm;
    std::shared_ptr<const GAntiderivative> G;

    explicit NlsModel(const ModelParams& p)
        : prm(p), G(std::make_shared<const GAntiderivative>(p)) {
        prm.validate();
    }

    double F(double m) const { return f1(m, prm); }
    double Fprime(double m) const { return f1_prime(m, prm); }
    double g(double m) const { return (*G)(m); }
};

enum class GsMethod {
    automatic, // flow when the grid resolves the profile, else radial-seeded Newton
    flow,      // normalized gradient flow with mass continuation only
    newton,    // radial-ODE seed plus Newton polish at fixed mu
};

struct GroundStateOpts {
    double tol = 1e-8;          // relative PDE residual target
    int max_iters = 40000;
    double dtau = 0.8;          // descent step
    int max_secant = 60;
    double mu_match_rel = 1e-9; // relative accuracy of the frequency match
    double h_mu_rel = 1e-3;     // centered-difference step for d/dmu
    GsMethod method = GsMethod::automatic;
    bool strict_resolution = false;
    bool track_energy = false;  // record per-iteration energy (slower)
    bool with_dmu = true;
};

struct GroundState {
    double mu = 0.0;
    ComplexField phi;
    ComplexField dmu_phi;
    double residual = 0.0;   // relative, see pde_residual
    double mass = 0.0;       // ||phi||_L2^2
    double mass_prime = 0.0; // d/dmu ||phi_mu||^2 by centered difference
    std::string method;      // "flow" or "newton-radial"
    std::vector<std::vector<double>> energy_traces; // one per gradient-flow run
    std::vector<std::string> warnings;
};

// ||-1/2 lap phi - F(|phi|^2) phi + mu phi|| / ||mu phi||, all spectral.
inline double pde_residual(const ComplexField& phi, double mu, const NlsModel& model) {
    ComplexField res = laplacian(phi);
    for (std::size_t i = 0; i < phi.size(); ++i) {
        res[i] = -0.5 * res[i] - model.F(std::norm(phi[i])) * phi[i] + mu * phi[i];
    }
    const double den = std::abs(mu) * norm_l2(phi);
    return norm_l2(res) / (den > 0 ? den : 1.0);
}

// E(u) = 1/4 int |grad u|^2 + mu/2 |u|^2 - int G(|u|^2); the ground state is
// its critical point at fixed mu.
inline double energy_at_mu(const ComplexField& u, double mu, const NlsModel& model) {
    ComplexField uhat = fft(u);
    const Grid& g = u.grid();
    const double scale = g.volume() / static_cast<double>(g.total() * g.total());
    const double kin = 0.25 * scale * pairwise_accumulate(g.total(), [&](std::size_t i) {
        return k_squared(g, i) * std::norm(uhat[i]);
    });
    const double dv = g.cell_volume();
    const double massq = pairwise_accumulate(u.size(), [&](std::size_t i) { return std::norm(u[i]); });
    const double gint = pairwise_accumulate(u.size(), [&](std::size_t i) {
        return model.g(std::norm(u[i]));
    });
    return kin + 0.5 * mu * dv * massq - dv * gint;
}

namespace detail {

// Mean |phi| over thin radial shells about the box center.
inline std::vector<double> shell_averages(const ComplexField& phi) {
    const Grid& g = phi.grid();
    const double dr = g.spacing(0);
    const int nbins = g.n(0) / 2 + 1;
    std::vector<double> sum(nbins, 0.0);
    std::vector<std::size_t> cnt(nbins, 0);
    for (std::size_t i = 0; i < phi.size(); ++i) {
        const auto ijk = g.unravel(i);
        double r2 = 0.0;
        for (int a = 0; a < g.dim(); ++a) {
            const double c = g.coord(a, ijk[a]);
            r2 += c * c;
        }
        const int b = std::min(nbins - 1, static_cast<int>(std::sqrt(r2) / dr));
        sum[b] += std::abs(phi[i]);
        cnt[b]++;
    }
    std::vector<double> avg(nbins, 0.0);
    for (int b = 0; b < nbins; ++b)
        if (cnt[b]) avg[b] = sum[b] / static_cast<double>(cnt[b]);
    return avg;
}

// Radius where the shell profile first drops below half of the peak.
inline double half_max_radius(const ComplexField& phi) {
    const auto avg = shell_averages(phi);
    const double peak = avg.empty() ? 0.0 : avg[0];
    const double dr = phi.grid().spacing(0);
    for (std::size_t b = 1; b < avg.size(); ++b) {
        if (avg[b] < 0.5 * peak) return dr * static_cast<double>(b);
    }
    return dr * static_cast<double>(avg.size());
}

struct FlowState {
    ComplexField phi;
    double mu_hat = 0.0;
    double residual = 1.0;
    int iters = 0;
};

// Mass-constrained descent on the energy: residual direction R = A phi +
// mu_hat phi with the Rayleigh-quotient frequency, preconditioned by the
// shifted kinetic solve, then positivity by modulus and renormalization.
// The fixed point solves the discrete ground-state equation exactly, so the
// residual can be driven to solver tolerance independent of the step size.
inline FlowState normalized_flow(ComplexField phi, double mass_target, const NlsModel& model,
                                 const GroundStateOpts& opts, double tol,
                                 std::vector<std::vector<double>>* energy_traces) {
    const Grid& g = phi.grid();
    const std::size_t n = g.total();
    double dtau = opts.dtau;

    auto renorm = [&](ComplexField& f) {
        const double m = norm_l2(f);
        if (!(m > 0.0) || !std::isfinite(m))
            throw CollapseToZero("ground state: flow collapsed to zero mass");
        f *= std::sqrt(mass_target) / m;
    };
    renorm(phi);

    ComplexField res_field(phi.grid_ptr()), work(phi.grid_ptr()), prev(phi.grid_ptr());
    FlowState st;
    std::vector<double>* energy_trace = nullptr;
    if (energy_traces) {
        energy_traces->emplace_back();
        energy_trace = &energy_traces->back();
    }
    double prev_energy = 0.0;
    bool have_prev_energy = false;

    for (int it = 0; it < opts.max_iters; ++it) {
        // R = -1/2 lap phi - F phi + mu_hat phi at the current iterate
        fft_forward(g, phi.data(), work.data());
        for (std::size_t i = 0; i < n; ++i) work[i] *= -k_squared(g, i);
        fft_inverse(g, work.data(), res_field.data());
        for (std::size_t i = 0; i < n; ++i)
            res_field[i] = -0.5 * res_field[i] - model.F(std::norm(phi[i])) * phi[i];
        const double mu_hat = -rinner(res_field, phi) / mass_target;
        for (std::size_t i = 0; i < n; ++i) res_field[i] += mu_hat * phi[i];
        const double res = norm_l2(res_field) /
                           (std::max(std::abs(mu_hat), 1e-3) * std::sqrt(mass_target));

        st.mu_hat = mu_hat;
        st.residual = res;
        st.iters = it;
        if (res <= tol) {
            if (!(mu_hat > 0.0))
                throw CollapseToZero("ground state: converged to non-positive frequency");
            break;
        }

        // preconditioned step: phi <- phi - dtau (1 + dtau(-1/2 lap + s))^{-1} R
        const double s = std::max(mu_hat, 0.1);
        fft_forward(g, res_field.data(), work.data());
        for (std::size_t i = 0; i < n; ++i)
            work[i] *= dtau / (1.0 + dtau * (0.5 * k_squared(g, i) + s));
        fft_inverse(g, work.data(), res_field.data());
        if (energy_trace) prev = phi;
        // modulus projection guards the early transient against sign
        // oscillation; released afterwards, since the converged tails
        // legitimately ring slightly negative at finite resolution
        const bool clamp_positive = it < 30;
        for (std::size_t i = 0; i < n; ++i) {
            const cdouble next = phi[i] - res_field[i];
            phi[i] = clamp_positive ? cdouble(std::abs(next), 0.0) : next;
        }
        renorm(phi);

        if (energy_trace) {
            const double e = energy_at_mu(phi, 0.0, model); // mu term constant at fixed mass
            if (have_prev_energy &&
                e > prev_energy + 1e-12 * std::abs(prev_energy) + 1e-15 * mass_target) {
                phi = prev;
                dtau *= 0.5;
                if (dtau < 1e-6) throw NonConvergence("ground state: step collapsed");
                continue;
            }
            energy_trace->push_back(e);
            prev_energy = e;
            have_prev_energy = true;
        }
    }
    st.phi = std::move(phi);
    if (st.residual > tol)
        throw NonConvergence("ground state: flow did not reach tolerance (residual " +
                             std::to_string(st.residual) + ")");
    return st;
}

inline ComplexField sample_radial(const RadialProfile& rp, const GridPtr& g) {
    ComplexField f(g);
    for (std::size_t i = 0; i < g->total(); ++i) {
        const auto ijk = g->unravel(i);
        double r2 = 0.0;
        for (int a = 0; a < g->dim(); ++a) {
            const double c = g->coord(a, ijk[a]);
            r2 += c * c;
        }
        f[i] = rp(std::sqrt(r2));
    }
    return f;
}

// Newton iteration on the fixed-mu equation, seeded close enough that the
// single unstable direction of L+ never matters. MINRES handles the
// indefinite Jacobian; the shifted kinetic inverse preconditions it.
inline FlowState newton_polish(ComplexField phi, double mu, const NlsModel& model,
                               const GroundStateOpts& opts) {
    const GridPtr gp = phi.grid_ptr();
    const Grid& g = *gp;
    const std::size_t n = g.total();
    ComplexField res_field(gp), delta(gp), work(gp);

    auto residual_at = [&](const ComplexField& f, ComplexField& out) {
        fft_forward(g, f.data(), work.data());
        for (std::size_t i = 0; i < n; ++i) work[i] *= -k_squared(g, i);
        fft_inverse(g, work.data(), out.data());
        for (std::size_t i = 0; i < n; ++i)
            out[i] = -0.5 * out[i] - model.F(std::norm(f[i])) * f[i] + mu * f[i];
    };
    auto apply_minv = [&](const ComplexField& f, ComplexField& out) {
        fft_forward(g, f.data(), work.data());
        for (std::size_t i = 0; i < n; ++i) work[i] /= 0.5 * k_squared(g, i) + mu;
        fft_inverse(g, work.data(), out.data());
    };

    FlowState st;
    double rnorm = 0.0;
    for (int nit = 0; nit < 40; ++nit) {
        for (std::size_t i = 0; i < n; ++i) phi[i] = phi[i].real(); // scrub fft dust
        residual_at(phi, res_field);
        const double den = mu * norm_l2(phi);
        rnorm = norm_l2(res_field) / den;
        st.residual = rnorm;
        st.mu_hat = mu;
        st.iters = nit;
        if (rnorm <= opts.tol) break;

        auto apply_lplus = [&](const ComplexField& f, ComplexField& out) {
            fft_forward(g, f.data(), work.data());
            for (std::size_t i = 0; i < n; ++i) work[i] *= -k_squared(g, i);
            fft_inverse(g, work.data(), out.data());
            for (std::size_t i = 0; i < n; ++i) {
                const double m = std::norm(phi[i]);
                out[i] = -0.5 * out[i] +
                         (mu - model.F(m) - 2.0 * model.Fprime(m) * m) * f[i];
            }
        };
        minres(apply_lplus, apply_minv, res_field, delta, 0.05, 600);

        double t = 1.0;
        ComplexField trial(gp), trial_res(gp);
        for (int bt = 0; bt < 8; ++bt) {
            for (std::size_t i = 0; i < n; ++i) trial[i] = phi[i] - t * delta[i];
            residual_at(trial, trial_res);
            if (norm_l2(trial_res) / den < rnorm || t < 1e-3) break;
            t *= 0.5;
        }
        for (std::size_t i = 0; i < n; ++i) phi[i] = phi[i] - t * delta[i];
    }
    st.phi = std::move(phi);
    if (st.residual > opts.tol)
        throw NonConvergence("ground state: Newton polish stalled at residual " +
                             std::to_string(st.residual));
    return st;
}

// Seed width from the pure-power scaling: length scale ~ 1/sqrt(2 mu).
inline ComplexField gaussian_seed(const GridPtr& g, double mu, double mass) {
    ComplexField f(g);
    const double w = 1.5 / std::sqrt(2.0 * mu);
    for (std::size_t i = 0; i < g->total(); ++i) {
        const auto ijk = g->unravel(i);
        double r2 = 0.0;
        for (int a = 0; a < g->dim(); ++a) {
            const double c = g->coord(a, ijk[a]);
            r2 += c * c;
        }
        f[i] = std::exp(-r2 / (2.0 * w * w));
    }
    const double m = norm_l2(f);
    f *= std::sqrt(mass) / m;
    return f;
}

} // namespace detail

// Fourier zero-pad / truncation between grids with the same box.
inline ComplexField spectral_resample(const ComplexField& f, const GridPtr& target) {
    const Grid& gs = f.grid();
    const Grid& gt = *target;
    if (gs.dim() != gt.dim()) throw InvalidArgument("resample: dimension mismatch");
    ComplexField fhat = fft(f);
    ComplexField out_hat(target);
    const double scale = static_cast<double>(gt.total()) / static_cast<double>(gs.total());
    for (std::size_t i = 0; i < gs.total(); ++i) {
        const auto ijk = gs.unravel(i);
        bool keep = true;
        std::array<int, 3> tgt{0, 0, 0};
        for (int a = 0; a < gs.dim(); ++a) {
            int m = ijk[a] <= gs.n(a) / 2 - 1 ? ijk[a] : ijk[a] - gs.n(a);
            if (m <= -gs.n(a) / 2 || std::abs(m) >= gt.n(a) / 2) {
                keep = false; // drop source Nyquist and anything the target cannot hold
                break;
            }
            tgt[a] = m >= 0 ? m : m + gt.n(a);
        }
        if (keep) out_hat[gt.index(tgt[0], tgt[1], tgt[2])] = fhat[i] * scale;
    }
    return ifft(out_hat);
}

// Ground state of -1/2 lap phi - F(|phi|^2) phi = -mu phi. The primary path
// is the normalized gradient flow with the L2 mass tuned by secant iteration
// until the emergent frequency matches the requested mu, solving coarse grids
// first and refining spectrally. When the grid cannot resolve the profile
// (the flow then collapses onto the flat torus state or lattice-pinned
// spikes), the solver falls back to sampling the radial ODE solution and
// Newton-polishing it into an exact solution of the discrete equation.
inline GroundState solve_ground_state(double mu, GridPtr grid, const NlsModel& model,
                                      GroundStateOpts opts = {}) {
    if (!(mu > 0.0)) throw InvalidArgument("ground state: mu must be positive");

    std::vector<GridPtr> levels{grid};
    while (true) {
        const Grid& g = *levels.back();
        const int half = g.n(0) / 2;
        if (half < 16 || !Grid::fft_friendly(half)) break;
        levels.push_back(make_grid(g.dim(), half, g.box(0)));
    }

    // secant solve for mass on a given level
    auto solve_level = [&](ComplexField seed, double mass0, double tol,
                           std::vector<std::vector<double>>* trace) -> detail::FlowState {
        double m0 = mass0;
        detail::FlowState s0 = detail::normalized_flow(seed, m0, model, opts, tol, trace);
        if (std::abs(s0.mu_hat - mu) <= opts.mu_match_rel * mu) return s0;
        double m1 = m0 * (s0.mu_hat < mu ? 1.3 : 1.0 / 1.3);
        detail::FlowState s1 = detail::normalized_flow(s0.phi, m1, model, opts, tol, trace);
        for (int k = 0; k < opts.max_secant; ++k) {
            if (std::abs(s1.mu_hat - mu) <= opts.mu_match_rel * mu) return s1;
            const double l0 = std::log(m0), l1 = std::log(m1);
            const double f0 = std::log(s0.mu_hat / mu), f1 = std::log(s1.mu_hat / mu);
            double l2 = l1 - f1 * (l1 - l0) / (f1 - f0);
            l2 = std::clamp(l2, l1 - 1.2, l1 + 1.2);
            const double m2 = std::exp(l2);
            detail::FlowState s2 = detail::normalized_flow(s1.phi, m2, model, opts, tol, trace);
            m0 = m1;
            s0 = std::move(s1);
            m1 = m2;
            s1 = std::move(s2);
        }
        throw NonConvergence("ground state: secant iteration on the mass failed");
    };

    // the radial ODE profile supplies the mass estimate, the resolvability
    // heuristic, and (on the Newton path) the seed
    const detail::RadialProfile radial = detail::radial_ground_state(mu, model.prm, grid->dim());

    auto localized = [](const ComplexField& f) {
        return std::abs(f[0]) <= 1e-2 * norm_linf(f); // f[0] is the box corner
    };
    std::vector<std::vector<double>> trace;
    auto* trace_ptr = opts.track_energy ? &trace : nullptr;

    // coarse-to-fine cascade; a coarse level too crude to hold the soliton
    // converges to the flat torus state and is discarded as a seed
    auto run_flow_cascade = [&]() -> detail::FlowState {
        detail::FlowState fst;
        bool have_seed = false;
        for (int li = static_cast<int>(levels.size()) - 1; li >= 0; --li) {
            ComplexField seed;
            double m0 = radial.mass;
            if (have_seed) {
                seed = spectral_resample(fst.phi, levels[li]);
                for (std::size_t i = 0; i < seed.size(); ++i) seed[i] = std::abs(seed[i]);
                const double m = norm_l2(fst.phi);
                m0 = m * m;
            } else {
                seed = detail::gaussian_seed(levels[li], mu, radial.mass);
            }
            const double tol = li == 0 ? opts.tol : std::max(opts.tol, li == 1 ? 1e-7 : 1e-6);
            fst = solve_level(std::move(seed), m0, tol, li == 0 ? trace_ptr : nullptr);
            have_seed = localized(fst.phi);
        }
        if (!have_seed)
            throw CollapseToZero(
                "ground state: profile not localized at this mu (edge/peak = " +
                std::to_string(std::abs(fst.phi[0]) / norm_linf(fst.phi)) + ")");
        return fst;
    };

    GroundState out;
    const bool marginal = radial.half_max_radius / grid->spacing(0) < 3.0;
    detail::FlowState st;
    if (opts.method == GsMethod::newton || (opts.method == GsMethod::automatic && marginal)) {
        st = detail::newton_polish(detail::sample_radial(radial, grid), mu, model, opts);
        out.method = "newton-radial";
        if (!localized(st.phi))
            throw CollapseToZero("ground state: Newton result not localized at this mu");
    } else {
        try {
            st = run_flow_cascade();
            out.method = "flow";
        } catch (const Error&) {
            if (opts.method == GsMethod::flow) throw;
            st = detail::newton_polish(detail::sample_radial(radial, grid), mu, model, opts);
            out.method = "newton-radial";
            out.warnings.push_back("ground state: gradient flow failed; used radial-Newton path");
            if (!localized(st.phi))
                throw CollapseToZero("ground state: Newton result not localized at this mu");
        }
    }

    out.mu = mu;
    out.phi = std::move(st.phi);
    out.mass = norm_l2(out.phi);
    out.mass = out.mass * out.mass;
    out.residual = pde_residual(out.phi, mu, model);
    out.energy_traces = std::move(trace);

    // resolution check: at least 8 points across the half-max radius
    const double rhm = detail::half_max_radius(out.phi);
    if (rhm / grid->spacing(0) < 8.0) {
        const std::string msg = "ground state: half-max radius spans " +
                                std::to_string(rhm / grid->spacing(0)) +
                                " grid points (< 8); profile is marginally resolved";
        if (opts.strict_resolution) throw UnderResolved(msg);
        out.warnings.push_back(msg);
    }
    // localization check: boundary value relative to peak
    const double peak = norm_linf(out.phi);
    const double edge = std::abs(out.phi[0]); // corner of the box, farthest from center
    if (edge > 1e-2 * peak)
        throw CollapseToZero("ground state: profile not localized at this mu (edge/peak = " +
                             std::to_string(edge / peak) + ")");
    if (edge > 1e-10 * peak)
        out.warnings.push_back("ground state: boundary tail above 1e-10 of peak; enlarge box");

    if (opts.with_dmu) {
        const double h = opts.h_mu_rel * mu;
        GroundStateOpts sub = opts;
        sub.with_dmu = false;
        sub.track_energy = false;
        GroundState lo = solve_ground_state(mu - h, grid, model, sub);
        GroundState hi = solve_ground_state(mu + h, grid, model, sub);
        out.dmu_phi = ComplexField(grid);
        for (std::size_t i = 0; i < out.dmu_phi.size(); ++i)
            out.dmu_phi[i] = (hi.phi[i] - lo.phi[i]) / (2.0 * h);
        out.mass_prime = (hi.mass - lo.mass) / (2.0 * h);
    }
    return out;
}

} // namespace nlss
