#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

#include "nlss/field.hpp"
#include "nlss/ground_state.hpp"
#include "nlss/grid.hpp"
#include "nlss/model.hpp"

namespace nlss {

struct NewtonDivergence : Error {
    using Error::Error;
};
struct SingularJacobian : Error {
    using Error::Error;
};

// sigma = (a, v, gamma, mu): center, velocity, phase, frequency. Unused
// components beyond the grid dimension stay zero.
struct SolitonParams {
    std::array<double, 3> a{0.0, 0.0, 0.0};
    std::array<double, 3> v{0.0, 0.0, 0.0};
    double gamma = 0.0;
    double mu = 1.0;

    static double wrap_angle(double g) {
        const double tau = 2.0 * std::numbers::pi;
        g = std::fmod(g, tau);
        return g < 0 ? g + tau : g;
    }
};

// Ground-state family phi(., mu) on one grid, sampled at mu nodes and
// interpolated with a local cubic; d/dmu comes from the same interpolant so
// the decomposition Jacobian is exact for the interpolated manifold.
class SolitonFamily {
  public:
    SolitonFamily(GridPtr grid, const NlsModel& model, double mu_lo, double mu_hi, int n_nodes,
                  GroundStateOpts gs_opts = {})
        : grid_(std::move(grid)), model_(model) {
        if (!(mu_lo > 0.0) || !(mu_hi > mu_lo)) throw InvalidArgument("family: bad mu range");
        if (n_nodes < 4) n_nodes = 4;
        mu_lo_ = mu_lo;
        mu_hi_ = mu_hi;
        dmu_ = (mu_hi - mu_lo) / (n_nodes - 1);
        gs_opts.with_dmu = false;
        gs_opts.track_energy = false;
        nodes_.reserve(n_nodes);
        for (int i = 0; i < n_nodes; ++i) {
            const double mu = mu_lo + dmu_ * i;
            GroundState gs = solve_ground_state(mu, grid_, model, gs_opts);
            Node nd;
            nd.mu = mu;
            nd.mass = gs.mass;
            for (int a = 0; a < grid_->dim(); ++a) nd.dphi[a] = gradient_axis(gs.phi, a);
            nd.phi = std::move(gs.phi);
            nodes_.push_back(std::move(nd));
        }
    }

    // Single-mu convenience family (frozen-mu decompositions, tests).
    SolitonFamily(GridPtr grid, const NlsModel& model, double mu, GroundStateOpts gs_opts = {})
        : SolitonFamily(std::move(grid), model, 0.97 * mu, 1.03 * mu, 7, gs_opts) {}

    const GridPtr& grid_ptr() const { return grid_; }
    const Grid& grid() const { return *grid_; }
    const NlsModel& model() const { return model_; }
    double mu_min() const { return mu_lo_; }
    double mu_max() const { return mu_hi_; }

    bool contains(double mu) const { return mu >= mu_lo_ && mu <= mu_hi_; }

    ComplexField phi(double mu) const { return blend(mu, 0, -1); }
    ComplexField dmu_phi(double mu) const { return blend(mu, 1, -1); }
    ComplexField d2mu_phi(double mu) const { return blend(mu, 2, -1); }
    ComplexField dphi(double mu, int axis) const { return blend(mu, 0, axis); }
    ComplexField dmu_dphi(double mu, int axis) const { return blend(mu, 1, axis); }

    double mass(double mu) const {
        double w[4];
        int i0 = weights(mu, 0, w);
        double s = 0.0;
        for (int j = 0; j < 4; ++j) s += w[j] * nodes_[i0 + j].mass;
        return s;
    }
    double mass_prime(double mu) const {
        double w[4];
        int i0 = weights(mu, 1, w);
        double s = 0.0;
        for (int j = 0; j < 4; ++j) s += w[j] * nodes_[i0 + j].mass;
        return s;
    }

  private:
    struct Node {
        double mu = 0.0;
        double mass = 0.0;
        ComplexField phi;
        std::array<ComplexField, 3> dphi;
    };

    // cubic Lagrange weights (or their mu-derivatives) on 4 nodes around mu
    int weights(double mu, int deriv, double w[4]) const {
        if (!contains(mu)) throw NewtonDivergence("family: mu outside the tabulated window");
        int ic = static_cast<int>(std::floor((mu - mu_lo_) / dmu_));
        int i0 = std::clamp(ic - 1, 0, static_cast<int>(nodes_.size()) - 4);
        const double x[4] = {nodes_[i0].mu, nodes_[i0 + 1].mu, nodes_[i0 + 2].mu,
                             nodes_[i0 + 3].mu};
        for (int j = 0; j < 4; ++j) {
            if (deriv == 0) {
                double p = 1.0;
                for (int k = 0; k < 4; ++k)
                    if (k != j) p *= (mu - x[k]) / (x[j] - x[k]);
                w[j] = p;
            } else if (deriv == 1) {
                double s = 0.0;
                for (int m = 0; m < 4; ++m) {
                    if (m == j) continue;
                    double p = 1.0 / (x[j] - x[m]);
                    for (int k = 0; k < 4; ++k)
                        if (k != j && k != m) p *= (mu - x[k]) / (x[j] - x[k]);
                    s += p;
                }
                w[j] = s;
            } else {
                double s = 0.0;
                for (int m = 0; m < 4; ++m) {
                    if (m == j) continue;
                    for (int n = 0; n < 4; ++n) {
                        if (n == j || n == m) continue;
                        double p = 1.0 / ((x[j] - x[m]) * (x[j] - x[n]));
                        for (int k = 0; k < 4; ++k)
                            if (k != j && k != m && k != n) p *= (mu - x[k]) / (x[j] - x[k]);
                        s += p;
                    }
                }
                w[j] = s;
            }
        }
        return i0;
    }

    ComplexField blend(double mu, int deriv, int axis) const {
        double w[4];
        const int i0 = weights(mu, deriv, w);
        ComplexField out(grid_);
        for (int j = 0; j < 4; ++j) {
            const ComplexField& src = axis < 0 ? nodes_[i0 + j].phi : nodes_[i0 + j].dphi[axis];
            const double c = w[j];
            for (std::size_t i = 0; i < out.size(); ++i) out[i] += c * src[i];
        }
        return out;
    }

    GridPtr grid_;
    NlsModel model_;
    double mu_lo_ = 0.0, mu_hi_ = 0.0, dmu_ = 0.0;
    std::vector<Node> nodes_;
};

namespace detail {

// componentwise minimum-image displacement on the torus
inline double wrap_disp(double d, double L) {
    d = std::fmod(d, L);
    if (d < -0.5 * L) d += L;
    if (d >= 0.5 * L) d -= L;
    return d;
}

} // namespace detail

// S_{a v gamma} f = e^{i v.(x-a) + i gamma} f(x - a); the shift is spectral,
// the boost phase uses the minimum-image displacement from the center a.
inline ComplexField group_action(const SolitonParams& sigma, const ComplexField& f) {
    const Grid& g = f.grid();
    ComplexField shifted = shift(f, sigma.a);
    for (std::size_t i = 0; i < shifted.size(); ++i) {
        const auto ijk = g.unravel(i);
        double phase = sigma.gamma;
        for (int ax = 0; ax < g.dim(); ++ax) {
            const double d = detail::wrap_disp(g.coord(ax, ijk[ax]) - sigma.a[ax], g.box(ax));
            phase += sigma.v[ax] * d;
        }
        shifted[i] *= std::polar(1.0, phase);
    }
    return shifted;
}

// phi_sigma = S_{a v gamma} phi_mu.
inline ComplexField make_soliton(const SolitonFamily& fam, const SolitonParams& sigma) {
    return group_action(sigma, fam.phi(sigma.mu));
}

// Tangent fields of the solitary manifold at sigma, transported by the group
// action: z_a = -grad, z_v = i x, z_gamma = i, z_mu = d/dmu (times phi).
struct TangentFrame {
    std::array<ComplexField, 3> z_a;
    std::array<ComplexField, 3> z_v;
    ComplexField z_gamma;
    ComplexField z_mu;
};

// Base-frame tangent fields (before the group action).
inline TangentFrame tangent_frame_base(const SolitonFamily& fam, double mu) {
    const Grid& g = fam.grid();
    TangentFrame tf;
    ComplexField phi = fam.phi(mu);
    for (int ax = 0; ax < g.dim(); ++ax) {
        tf.z_a[ax] = fam.dphi(mu, ax);
        tf.z_a[ax] *= -1.0;
        tf.z_v[ax] = ComplexField(fam.grid_ptr());
        for (std::size_t i = 0; i < phi.size(); ++i) {
            const auto ijk = g.unravel(i);
            tf.z_v[ax][i] = cdouble(0.0, 1.0) * g.coord(ax, ijk[ax]) * phi[i];
        }
    }
    tf.z_gamma = cdouble(0.0, 1.0) * phi;
    tf.z_mu = fam.dmu_phi(mu);
    return tf;
}

inline TangentFrame tangent_frame(const SolitonFamily& fam, const SolitonParams& sigma) {
    TangentFrame tf = tangent_frame_base(fam, sigma.mu);
    for (int ax = 0; ax < fam.grid().dim(); ++ax) {
        tf.z_a[ax] = group_action(sigma, tf.z_a[ax]);
        tf.z_v[ax] = group_action(sigma, tf.z_v[ax]);
    }
    tf.z_gamma = group_action(sigma, tf.z_gamma);
    tf.z_mu = group_action(sigma, tf.z_mu);
    return tf;
}

struct Decomposition {
    SolitonParams sigma;
    ComplexField r;            // fluctuation in the moving frame: S^{-1}u - phi_mu
    double orth_residual = 0.0; // max normalized pairing magnitude
    int newton_iters = 0;
};

struct DecomposeOpts {
    double tol = 1e-11;   // on the normalized pairings
    int max_iters = 60;
    double step_tol = 1e-13;
};

// Skew-orthogonal decomposition: find sigma with omega(u - phi_sigma, z) = 0
// for every tangent z. Solved in the soliton frame, where the pairing
// conditions read omega(S^{-1}u - phi_mu, zeta_j) = 0 against fixed base
// fields and the Jacobian in (a, v, gamma, mu) is analytic.
inline Decomposition decompose(const SolitonFamily& fam, const ComplexField& u,
                               const SolitonParams& guess, DecomposeOpts opts = {}) {
    const Grid& g = fam.grid();
    const GridPtr gp = fam.grid_ptr();
    const int d = g.dim();
    const int m = 2 * d + 2;
    const double unorm = norm_l2(u);
    if (!(unorm > 0.0)) throw InvalidArgument("decompose: zero field");

    // spectra of u and du/dx_k, shifted per iteration
    ComplexField uhat = fft(u);
    std::array<ComplexField, 3> duhat;
    for (int ax = 0; ax < d; ++ax) {
        duhat[ax] = ComplexField(gp);
        const int nyq = g.n(ax) / 2;
        for (std::size_t i = 0; i < uhat.size(); ++i) {
            const auto ijk = g.unravel(i);
            duhat[ax][i] = ijk[ax] == nyq
                               ? cdouble(0.0)
                               : uhat[i] * cdouble(0.0, g.wavenumbers(ax)[ijk[ax]]);
        }
    }

    SolitonParams sigma = guess;
    ComplexField frame_u(gp), work(gp), rfield(gp);
    std::array<ComplexField, 3> frame_du;
    for (int ax = 0; ax < d; ++ax) frame_du[ax] = ComplexField(gp);

    auto pull_back = [&](const ComplexField& src_hat, ComplexField& dst) {
        // dst(y) = e^{-i v.y - i gamma} src(y + a)
        for (std::size_t i = 0; i < work.size(); ++i) {
            const auto ijk = g.unravel(i);
            double ph = 0.0;
            for (int ax = 0; ax < d; ++ax) ph += g.wavenumbers(ax)[ijk[ax]] * sigma.a[ax];
            work[i] = src_hat[i] * std::polar(1.0, ph);
        }
        fft_inverse(g, work.data(), dst.data());
        for (std::size_t i = 0; i < dst.size(); ++i) {
            const auto ijk = g.unravel(i);
            double ph = -sigma.gamma;
            for (int ax = 0; ax < d; ++ax) ph -= sigma.v[ax] * g.coord(ax, ijk[ax]);
            dst[i] *= std::polar(1.0, ph);
        }
    };

    double res = 0.0;
    int it = 0;
    Eigen::VectorXd f_vec(m);
    Eigen::MatrixXd jac(m, m);
    double prev_res = std::numeric_limits<double>::max();

    for (; it < opts.max_iters; ++it) {
        if (!fam.contains(sigma.mu))
            throw NewtonDivergence("decompose: mu left the tabulated family window");
        pull_back(uhat, frame_u);
        for (int ax = 0; ax < d; ++ax) pull_back(duhat[ax], frame_du[ax]);

        ComplexField phi = fam.phi(sigma.mu);
        ComplexField dmu = fam.dmu_phi(sigma.mu);
        rfield = frame_u;
        rfield -= phi;

        // base tangent fields zeta_j; their norms normalize the residual
        std::vector<const ComplexField*> zeta(m, nullptr);
        std::array<ComplexField, 3> za, zv;
        for (int ax = 0; ax < d; ++ax) {
            za[ax] = fam.dphi(sigma.mu, ax);
            za[ax] *= -1.0;
            zv[ax] = ComplexField(gp);
            for (std::size_t i = 0; i < phi.size(); ++i) {
                const auto ijk = g.unravel(i);
                zv[ax][i] = cdouble(0.0, 1.0) * g.coord(ax, ijk[ax]) * phi[i];
            }
        }
        ComplexField zg = cdouble(0.0, 1.0) * phi;
        for (int ax = 0; ax < d; ++ax) {
            zeta[ax] = &za[ax];
            zeta[d + ax] = &zv[ax];
        }
        zeta[2 * d] = &zg;
        zeta[2 * d + 1] = &dmu;

        res = 0.0;
        for (int j = 0; j < m; ++j) {
            f_vec(j) = omega(rfield, *zeta[j]);
            res = std::max(res, std::abs(f_vec(j)) / (unorm * norm_l2(*zeta[j])));
        }
        if (res <= opts.tol) break;

        // columns: d/da_k (frame derivative of u), d/dv_k, d/dgamma, d/dmu
        for (int l = 0; l < m; ++l) {
            ComplexField col(gp);
            if (l < d) {
                col = frame_du[l];
            } else if (l < 2 * d) {
                const int ax = l - d;
                for (std::size_t i = 0; i < col.size(); ++i) {
                    const auto ijk = g.unravel(i);
                    col[i] = cdouble(0.0, -1.0) * g.coord(ax, ijk[ax]) * frame_u[i];
                }
            } else if (l == 2 * d) {
                col = cdouble(0.0, -1.0) * frame_u;
            } else {
                col = dmu;
                col *= -1.0;
            }
            for (int j = 0; j < m; ++j) jac(j, l) = omega(col, *zeta[j]);
        }

        Eigen::PartialPivLU<Eigen::MatrixXd> lu(jac);
        const double rcond_proxy = std::abs(lu.determinant());
        if (!(rcond_proxy > 1e-300) || !std::isfinite(rcond_proxy))
            throw SingularJacobian("decompose: singular pairing Jacobian");
        Eigen::VectorXd step = lu.solve(f_vec);
        if (!step.allFinite()) throw SingularJacobian("decompose: non-finite Newton step");

        // damped update; halve while the (cheap) predicted state leaves the
        // family or the residual grows badly
        double t = 1.0;
        if (res > 0.5 * prev_res && it > 3) t = 0.5;
        prev_res = res;
        double step_max = 0.0;
        for (int l = 0; l < d; ++l) {
            sigma.a[l] -= t * step(l);
            step_max = std::max(step_max, std::abs(step(l)));
        }
        for (int l = 0; l < d; ++l) {
            sigma.v[l] -= t * step(d + l);
            step_max = std::max(step_max, std::abs(step(d + l)));
        }
        sigma.gamma -= t * step(2 * d);
        sigma.mu -= t * step(2 * d + 1);
        step_max = std::max(step_max, std::abs(step(2 * d)));
        step_max = std::max(step_max, std::abs(step(2 * d + 1)));
        if (step_max < opts.step_tol) {
            ++it;
            break;
        }
    }
    // final state and pairing residual at the accepted sigma
    pull_back(uhat, frame_u);
    ComplexField phi = fam.phi(sigma.mu);
    ComplexField dmu = fam.dmu_phi(sigma.mu);
    Decomposition out;
    out.r = frame_u;
    out.r -= phi;
    res = 0.0;
    for (int ax = 0; ax < d; ++ax) {
        ComplexField za = fam.dphi(sigma.mu, ax);
        za *= -1.0;
        res = std::max(res, std::abs(omega(out.r, za)) / (unorm * norm_l2(za)));
        ComplexField zv(gp);
        for (std::size_t i = 0; i < phi.size(); ++i) {
            const auto ijk = g.unravel(i);
            zv[i] = cdouble(0.0, 1.0) * g.coord(ax, ijk[ax]) * phi[i];
        }
        res = std::max(res, std::abs(omega(out.r, zv)) / (unorm * norm_l2(zv)));
    }
    {
        ComplexField zg = cdouble(0.0, 1.0) * phi;
        res = std::max(res, std::abs(omega(out.r, zg)) / (unorm * norm_l2(zg)));
        res = std::max(res, std::abs(omega(out.r, dmu)) / (unorm * norm_l2(dmu)));
    }
    if (res > opts.tol * 100.0)
        throw NewtonDivergence("decompose: pairing residual " + std::to_string(res) +
                               " after " + std::to_string(it) + " iterations");
    sigma.gamma = SolitonParams::wrap_angle(sigma.gamma);
    out.sigma = sigma;
    out.orth_residual = res;
    out.newton_iters = it;
    return out;
}

} // namespace nlss
