#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "nlss/field.hpp"
#include "nlss/ground_state.hpp"
#include "nlss/grid.hpp"
#include "nlss/model.hpp"

namespace nlss {

// V_eps sampled on the grid (real values).
inline ComplexField potential_field(const GridPtr& gp, const ModelParams& prm) {
    const Grid& g = *gp;
    ComplexField v(gp);
    for (std::size_t i = 0; i < v.size(); ++i) {
        const auto ijk = g.unravel(i);
        std::array<double, 3> x{0, 0, 0};
        for (int ax = 0; ax < g.dim(); ++ax) x[ax] = g.coord(ax, ijk[ax]);
        v[i] = v_eps(x, prm);
    }
    return v;
}

struct EvolverState {
    double t = 0.0;
    ComplexField u;
    double dt = 0.0;
    long step_count = 0;
    double mass0 = 0.0;
    double energy0 = 0.0;
};

struct Conserved {
    double mass = 0.0;
    double energy = 0.0;
};

// Strang split-step integrator for i u_t = -1/2 lap u + V_eps u - F(|u|^2) u:
// half-step pointwise phase (exact, |u| frozen), exact kinetic multiplier,
// half-step phase. Both phase substeps preserve |u| pointwise and the
// kinetic substep preserves the L2 norm.
class NlsEvolver {
  public:
    NlsEvolver(GridPtr grid, NlsModel model, bool with_potential = true)
        : grid_(std::move(grid)), model_(std::move(model)) {
        if (with_potential)
            vfield_ = potential_field(grid_, model_.prm);
        else
            vfield_ = ComplexField(grid_);
    }

    const Grid& grid() const { return *grid_; }
    const NlsModel& model() const { return model_; }
    const ComplexField& veps() const { return vfield_; }

    EvolverState init(ComplexField u0, double dt) const {
        if (!(dt != 0.0) || !std::isfinite(dt)) throw InvalidArgument("evolver: bad dt");
        if (!u0.all_finite()) throw NonFinite("evolver: non-finite initial data");
        EvolverState st;
        st.u = std::move(u0);
        st.dt = dt;
        const Conserved c = conserved(st.u);
        st.mass0 = c.mass;
        st.energy0 = c.energy;
        peak0_ = norm_linf(st.u);
        double kmax2 = 0.0;
        for (int ax = 0; ax < grid_->dim(); ++ax) {
            const double knyq = std::abs(grid_->wavenumbers(ax)[grid_->n(ax) / 2]);
            kmax2 += knyq * knyq;
        }
        cfl_warning_ = std::abs(dt) * kmax2 / 2.0 > std::numbers::pi;
        return st;
    }

    bool cfl_warning() const { return cfl_warning_; }

    void step(EvolverState& st) const {
        const Grid& g = *grid_;
        const std::size_t n = g.total();
        const double hdt = 0.5 * st.dt;
        ComplexField& u = st.u;
        ComplexField work(grid_);

        auto phase_half = [&]() {
            for (std::size_t i = 0; i < n; ++i) {
                const double w = vfield_[i].real() - model_.F(std::norm(u[i]));
                u[i] *= std::polar(1.0, -hdt * w);
            }
        };
        phase_half();
        fft_forward(g, u.data(), work.data());
        for (std::size_t i = 0; i < n; ++i)
            work[i] *= std::polar(1.0, -st.dt * 0.5 * k_squared(g, i));
        fft_inverse(g, work.data(), u.data());
        phase_half();

        st.t += st.dt;
        st.step_count += 1;

        const double peak = norm_linf(u);
        if (!std::isfinite(peak) || peak > 1e3 * peak0_)
            throw NonFinite("evolver: blowup detected (|u|_inf grew by " +
                            std::to_string(peak / peak0_) + "); check the configuration");
    }

    Conserved conserved(const ComplexField& u) const {
        Conserved c;
        const Grid& g = *grid_;
        const double dv = g.cell_volume();
        c.mass = dv * pairwise_accumulate(u.size(), [&](std::size_t i) { return std::norm(u[i]); });
        ComplexField uhat = fft(u);
        const double scale = g.volume() / static_cast<double>(g.total() * g.total());
        const double kin = 0.25 * scale * pairwise_accumulate(g.total(), [&](std::size_t i) {
            return k_squared(g, i) * std::norm(uhat[i]);
        });
        const double pot = 0.5 * dv * pairwise_accumulate(u.size(), [&](std::size_t i) {
            return vfield_[i].real() * std::norm(u[i]);
        });
        const double gterm = dv * pairwise_accumulate(u.size(), [&](std::size_t i) {
            return model_.g(std::norm(u[i]));
        });
        c.energy = kin + pot - gterm;
        return c;
    }

    struct Observer {
        long stride = 1;
        std::function<void(const EvolverState&)> fn;
    };

    // Evolve to t_end; observers fire on the initial state, every stride
    // steps, and on the final state.
    EvolverState run(ComplexField u0, double t_end, double dt,
                     std::vector<Observer> observers = {}) const {
        for (const auto& ob : observers)
            if (ob.stride <= 0) throw InvalidArgument("evolver: observer stride must be >= 1");
        EvolverState st = init(std::move(u0), dt);
        for (const auto& ob : observers) ob.fn(st);
        const long nsteps = static_cast<long>(std::llround(t_end / dt));
        for (long k = 0; k < nsteps; ++k) {
            step(st);
            for (const auto& ob : observers)
                if (st.step_count % ob.stride == 0 || k + 1 == nsteps) ob.fn(st);
        }
        return st;
    }

  private:
    GridPtr grid_;
    NlsModel model_;
    ComplexField vfield_;
    mutable double peak0_ = 1.0;
    mutable bool cfl_warning_ = false;
};

} // namespace nlss
