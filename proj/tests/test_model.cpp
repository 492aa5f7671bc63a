#include <catch2/catch_amalgamated.hpp>

#include "nlss/field.hpp"
#include "nlss/model.hpp"
#include "test_support.hpp"

using namespace nlss;
using namespace nlss::testing;
using Catch::Approx;

TEST_CASE("params validation", "[model]") {
    ModelParams ok;
    CHECK_NOTHROW(ok.validate());
    ModelParams bad = ok;
    bad.p = 1.5;
    CHECK_THROWS_WITH(bad.validate(), Catch::Matchers::ContainsSubstring("1 < p < 4/3"));
    bad = ok;
    bad.r = 4.0;
    CHECK_THROWS_WITH(bad.validate(), Catch::Matchers::ContainsSubstring("7/3 < r + p <= 4"));
    bad = ok;
    bad.theta = 0.0;
    CHECK_THROWS_AS(bad.validate(), InvalidArgument);
    bad = ok;
    bad.eps = 1.5;
    CHECK_THROWS_AS(bad.validate(), InvalidArgument);
}

TEST_CASE("saturated nonlinearity", "[model]") {
    ModelParams prm; // p=1.2 r=1.6 theta=0.1 eps=1

    SECTION("F(0) = 0 and negative input rejected") {
        CHECK(f_eps(0.0, prm) == 0.0);
        CHECK_THROWS_AS(f_eps(-1.0, prm), InvalidArgument);
    }

    SECTION("theta -> 0 recovers the pure power") {
        ModelParams tiny = prm;
        tiny.theta = 1e-12;
        for (double m : {0.5, 1.0, 3.0}) {
            CHECK(rel_err(f_eps(m, tiny), std::pow(m, 0.5 * prm.p)) < 1e-9);
        }
    }

    SECTION("small-m regime is the higher power divided by theta") {
        // F(m) ~ m^{(p+r)/2} / theta; the relative correction is
        // m^{r/2}/theta, so the 1% window is m <= (0.01 theta)^{2/r}
        const double m1pc = std::pow(0.01 * prm.theta, 2.0 / prm.r);
        for (double m = m1pc; m > 1e-12; m *= 0.1) {
            const double asym = std::pow(m, 0.5 * (prm.p + prm.r)) / prm.theta;
            CHECK(rel_err(f_eps(m, prm), asym) < 0.01);
        }
        // and it degrades no worse than the correction-term estimate
        const double m2 = prm.theta * prm.theta;
        const double asym2 = std::pow(m2, 0.5 * (prm.p + prm.r)) / prm.theta;
        CHECK(rel_err(f_eps(m2, prm), asym2) <
              1.5 * std::pow(m2, 0.5 * prm.r) / prm.theta);
    }

    SECTION("saturation bound F(m) <= m^{p/2}") {
        for (double m = 1e-10; m < 1e6; m *= 3.7) {
            CHECK(f_eps(m, prm) <= std::pow(m, 0.5 * prm.p) * (1.0 + 1e-15));
        }
    }

    SECTION("nondecreasing on a dense scan") {
        double prev = 0.0;
        for (double m = 1e-8; m < 1e4; m *= 1.05) {
            const double v = f_eps(m, prm);
            CHECK(v >= prev);
            prev = v;
        }
    }
}

TEST_CASE("nonlinearity derivative", "[model]") {
    ModelParams prm;

    SECTION("matches centered finite differences") {
        for (double m = 1e-6; m < 1e3; m *= 10.0) {
            const double h = 1e-5 * m;
            const double fd = (f_eps(m + h, prm) - f_eps(m - h, prm)) / (2.0 * h);
            CHECK(rel_err(f_eps_prime(m, prm), fd) < 1e-6);
        }
    }

    SECTION("zero limit at m = 0 for p + r > 2") {
        CHECK(f_eps_prime(0.0, prm) == 0.0);
    }

    SECTION("positive on (0, M]") {
        for (double m = 1e-9; m < 1e5; m *= 1.3) {
            CHECK(f_eps_prime(m, prm) > 0.0);
        }
    }
}

TEST_CASE("antiderivative cache", "[model]") {
    ModelParams prm;
    GAntiderivative G(prm);

    SECTION("G(0) = 0") {
        CHECK(G(0.0) == 0.0);
    }

    SECTION("derivative recovers F/2") {
        // differentiation oracle on the quadrature path; the table path is
        // held to the 1e-8 interpolation-error probe below
        for (double m : {1e-4, 1e-2, 0.5, 1.0, 4.0, 50.0}) {
            const double h = 1e-4 * m;
            const double fd = (G.direct(m + h) - G.direct(m - h)) / (2.0 * h);
            CHECK(rel_err(fd, 0.5 * f1(m, prm)) < 1e-6);
        }
    }

    SECTION("theta -> 0 closed form") {
        ModelParams tiny = prm;
        tiny.theta = 1e-10;
        GAntiderivative Gt(tiny);
        for (double m : {0.3, 1.0, 2.5}) {
            const double closed = std::pow(m, 0.5 * prm.p + 1.0) / (prm.p + 2.0);
            CHECK(rel_err(Gt(m), closed) < 1e-8);
        }
    }

    SECTION("table agrees with direct quadrature at random probes") {
        std::mt19937_64 rng(5);
        std::uniform_real_distribution<double> u(-9.0, 3.0);
        for (int i = 0; i < 25; ++i) {
            const double m = std::pow(10.0, u(rng));
            CHECK(rel_err(G(m), G.direct(m)) < 1e-8);
        }
    }
}

TEST_CASE("bump potential", "[model]") {
    ModelParams prm;
    prm.v0 = 2.0;

    SECTION("value at origin is v0") {
        CHECK(bump_v({0, 0, 0}, prm) == Approx(2.0).epsilon(1e-15));
    }

    SECTION("vanishes outside the unit ball") {
        CHECK(bump_v({1.0, 0, 0}, prm) == 0.0);
        CHECK(bump_v({0.8, 0.7, 0}, prm) == 0.0);
        CHECK(bump_v({0, 0, 5.0}, prm) == 0.0);
    }

    SECTION("gradient matches finite differences") {
        const std::array<double, 3> x{0.3, -0.2, 0.4};
        const auto g = bump_v_grad(x, prm);
        for (int a = 0; a < 3; ++a) {
            auto xp = x, xm = x;
            xp[a] += 1e-6;
            xm[a] -= 1e-6;
            const double fd = (bump_v(xp, prm) - bump_v(xm, prm)) / 2e-6;
            CHECK(rel_err(g[a], fd) < 1e-7);
        }
    }

    SECTION("v_eps sup and support radius") {
        ModelParams pe = prm;
        pe.eps = 0.25;
        CHECK(v_eps({0, 0, 0}, pe) == Approx(pe.eps * pe.eps * prm.v0).epsilon(1e-15));
        CHECK(v_eps({4.0, 0, 0}, pe) == 0.0);      // |eps x| = 1
        CHECK(v_eps({3.99, 0, 0}, pe) > 0.0);      // just inside
        CHECK(v_eps({4.01, 0, 0}, pe) == 0.0);     // just outside
    }

    SECTION("L^{3/2} norm invariant under the eps scaling") {
        // quadrature of |V_eps|^{3/2} on a grid sized to the support
        auto l32 = [&](double eps) {
            ModelParams pe = prm;
            pe.eps = eps;
            auto g = make_grid(3, 48, 2.6 / eps);
            ComplexField f(g);
            for (std::size_t i = 0; i < g->total(); ++i) {
                const auto ijk = g->unravel(i);
                f[i] = v_eps({g->coord(0, ijk[0]), g->coord(1, ijk[1]), g->coord(2, ijk[2])}, pe);
            }
            return norm_lq(f, 1.5);
        };
        const double ref = l32(1.0);
        CHECK(rel_err(l32(0.5), ref) < 2e-3);
        CHECK(rel_err(l32(0.25), ref) < 2e-3);
    }
}
