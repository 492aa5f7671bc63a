#include <catch2/catch_amalgamated.hpp>

#include "nlss/evolver.hpp"
#include "nlss/soliton.hpp"
#include "test_support.hpp"

using namespace nlss;
using namespace nlss::testing;
using Catch::Approx;

namespace {

NlsModel free_model() {
    ModelParams prm;
    prm.theta = 1e15; // suppresses the nonlinearity entirely at O(1) amplitude
    return NlsModel{prm};
}

} // namespace

TEST_CASE("plane wave evolution", "[evolver]") {
    auto g = make_grid(1, 64, 8.0);

    SECTION("free flow is exact at machine precision") {
        NlsEvolver ev(g, free_model(), false);
        ComplexField u0 = plane_wave(g, {3, 0, 0});
        const double k = 2.0 * std::numbers::pi * 3 / g->box(0);
        const double T = 1.7;
        EvolverState st = ev.run(u0, T, 1e-2);
        double worst = 0.0;
        for (std::size_t i = 0; i < u0.size(); ++i) {
            const cdouble expect = u0[i] * std::polar(1.0, -0.5 * k * k * T);
            worst = std::max(worst, std::abs(st.u[i] - expect));
        }
        CHECK(worst < 1e-12);
    }

    SECTION("with the nonlinearity the constant-modulus phase is exact") {
        NlsModel model{ModelParams{}};
        NlsEvolver ev(g, model, false);
        ComplexField u0 = plane_wave(g, {2, 0, 0});
        const double k = 2.0 * std::numbers::pi * 2 / g->box(0);
        const double T = 0.9;
        EvolverState st = ev.run(u0, T, 1e-2);
        const double fshift = model.F(1.0);
        double worst = 0.0;
        for (std::size_t i = 0; i < u0.size(); ++i) {
            const cdouble expect = u0[i] * std::polar(1.0, (-0.5 * k * k + fshift) * T);
            worst = std::max(worst, std::abs(st.u[i] - expect));
        }
        CHECK(worst < 1e-12);
    }
}

TEST_CASE("conservation per step", "[evolver]") {
    auto g = make_grid(2, 48, 12.0);
    NlsModel model{ModelParams{}};
    ModelParams withv = model.prm;
    withv.eps = 0.5;
    NlsEvolver ev(g, NlsModel{withv}, true);
    ComplexField u0 = random_smooth_field(g, 5, 0.8, 2.0);
    EvolverState st = ev.init(u0, 5e-3);
    const double m0 = st.mass0;
    for (int k = 0; k < 200; ++k) {
        ev.step(st);
        const double m = ev.conserved(st.u).mass;
        CHECK(std::abs(m - m0) / m0 < 1e-13);
    }
}

TEST_CASE("stationary soliton", "[evolver]") {
    auto g = make_grid(1, 384, 40.0);
    NlsModel model{ModelParams{}};
    GroundStateOpts go;
    go.with_dmu = false;
    GroundState gs = solve_ground_state(1.0, g, model, go);
    NlsEvolver ev(g, model, false);
    EvolverState st = ev.run(gs.phi, 10.0, 1e-3);
    ComplexField diff(g);
    for (std::size_t i = 0; i < diff.size(); ++i)
        diff[i] = std::abs(st.u[i]) - std::abs(gs.phi[i]);
    CHECK(norm_l2(diff) < 1e-6);
}

TEST_CASE("conserved functionals", "[evolver]") {
    auto g = make_grid(1, 256, 30.0);
    NlsModel model{ModelParams{}};
    NlsEvolver ev(g, model, false);

    SECTION("zero field") {
        ComplexField z(g);
        auto c = ev.conserved(z);
        CHECK(c.mass == 0.0);
        CHECK(c.energy == 0.0);
    }

    SECTION("ground-state energy consistency between the two functionals") {
        GroundStateOpts go;
        go.with_dmu = false;
        GroundState gs = solve_ground_state(1.0, g, model, go);
        auto c = ev.conserved(gs.phi);
        const double e_mu = energy_at_mu(gs.phi, 1.0, model);
        CHECK(rel_err(c.energy, e_mu - 0.5 * 1.0 * gs.mass) < 1e-8);
    }

    SECTION("energy drift over many steps") {
        GroundStateOpts go;
        go.with_dmu = false;
        GroundState gs = solve_ground_state(1.0, g, model, go);
        SolitonParams s;
        s.mu = 1.0;
        s.v[0] = 0.3;
        ComplexField u0 = gs.phi;
        const Grid& gr = *g;
        for (std::size_t i = 0; i < u0.size(); ++i) {
            const auto ijk = gr.unravel(i);
            u0[i] *= std::polar(1.0, 0.3 * gr.coord(0, ijk[0]));
        }
        EvolverState st = ev.init(u0, 1e-3);
        const double e0 = st.energy0;
        for (int k = 0; k < 10000; ++k) ev.step(st);
        const double e1 = ev.conserved(st.u).energy;
        CHECK(std::abs(e1 - e0) / std::abs(e0) < 1e-7);
    }
}

TEST_CASE("self convergence is second order", "[evolver]") {
    auto g = make_grid(1, 128, 16.0);
    ModelParams prm;
    prm.eps = 0.8;
    NlsEvolver ev(g, NlsModel{prm}, true);
    ComplexField u0 = gaussian(g, 1.2, 0.9);
    const double T = 0.5;
    auto final_at = [&](double dt) { return ev.run(u0, T, dt).u; };
    ComplexField ref = final_at(T / 2048.0);
    auto err = [&](const ComplexField& u) {
        ComplexField d = u;
        d -= ref;
        return norm_l2(d);
    };
    const double e1 = err(final_at(T / 128.0));
    const double e2 = err(final_at(T / 256.0));
    const double ratio = e1 / e2;
    CHECK(ratio > 3.3);
    CHECK(ratio < 4.7);
}

TEST_CASE("time reversal", "[evolver]") {
    auto g = make_grid(1, 192, 24.0);
    ModelParams prm;
    prm.eps = 0.6;
    NlsEvolver ev(g, NlsModel{prm}, true);
    ComplexField u0 = gaussian(g, 1.5, 0.7, {1.0, 0, 0});
    EvolverState fwd = ev.run(u0, 2.0, 1e-3);
    EvolverState back = ev.run(fwd.u, 2.0, -1e-3);
    ComplexField d = back.u;
    d -= u0;
    CHECK(norm_l2(d) < 1e-8);
}

TEST_CASE("galilean covariance", "[evolver]") {
    auto g = make_grid(1, 256, 32.0);
    NlsModel model{ModelParams{}};
    NlsEvolver ev(g, model, false);
    const double v = 2.0 * std::numbers::pi / g->box(0) * 8; // lattice boost
    const double T = 1.25;
    ComplexField u0 = gaussian(g, 1.0, 0.8);

    ComplexField u1 = ev.run(u0, T, 1e-3).u;
    ComplexField w0 = u0;
    for (std::size_t i = 0; i < w0.size(); ++i) {
        const auto ijk = g->unravel(i);
        w0[i] *= std::polar(1.0, v * g->coord(0, ijk[0]));
    }
    ComplexField w1 = ev.run(w0, T, 1e-3).u;

    ComplexField expect = shift(u1, {v * T, 0, 0});
    for (std::size_t i = 0; i < expect.size(); ++i) {
        const auto ijk = g->unravel(i);
        expect[i] *= std::polar(1.0, v * g->coord(0, ijk[0]) - 0.5 * v * v * T);
    }
    ComplexField d = w1;
    d -= expect;
    CHECK(norm_l2(d) / norm_l2(w1) < 1e-8);
}

TEST_CASE("evolver error paths", "[evolver]") {
    auto g = make_grid(1, 64, 8.0);
    NlsModel model{ModelParams{}};
    NlsEvolver ev(g, model, false);

    SECTION("observer stride zero rejected") {
        ComplexField u0 = gaussian(g, 1.0);
        std::vector<NlsEvolver::Observer> obs;
        obs.push_back({0, [](const EvolverState&) {}});
        CHECK_THROWS_AS(ev.run(u0, 0.1, 1e-2, obs), InvalidArgument);
    }

    SECTION("non-finite initial data rejected") {
        ComplexField bad(g);
        bad[3] = cdouble(std::numeric_limits<double>::quiet_NaN(), 0.0);
        CHECK_THROWS_AS(ev.init(bad, 1e-2), NonFinite);
    }

    SECTION("zero observers equals plain stepping") {
        ComplexField u0 = gaussian(g, 1.0, 0.5);
        EvolverState a = ev.run(u0, 0.2, 1e-2);
        EvolverState b = ev.init(u0, 1e-2);
        for (int k = 0; k < 20; ++k) ev.step(b);
        double worst = 0.0;
        for (std::size_t i = 0; i < a.u.size(); ++i)
            worst = std::max(worst, std::abs(a.u[i] - b.u[i]));
        CHECK(worst == 0.0);
    }
}
