#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "ctbp/dynamics.hpp"
#include "ctbp/integrate.hpp"

using namespace ctbp;

namespace {

// Deterministic random states on the energy surface, away from the walls.
std::vector<McGeheeState> random_states(const Dynamics& dyn, int n, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> upsi(0.15, M_PI - 0.15);
    std::uniform_real_distribution<double> ur(0.0, 2.0);
    std::uniform_real_distribution<double> uv(-1.5, 1.5);
    std::uniform_real_distribution<double> usgn(0.0, 1.0);
    std::vector<McGeheeState> out;
    while ((int)out.size() < n) {
        double psi = upsi(rng), r = ur(rng), v = uv(rng);
        double phit = dyn.chart().phit(psi);
        double e2 = 2.0 * dyn.chart().Pt(psi) - phit * (v * v - 2.0 * r * dyn.energy());
        if (e2 <= 1e-6) continue;
        double eta = std::sqrt(e2) * (usgn(rng) < 0.5 ? -1 : 1);
        out.emplace_back(r, v, psi, eta);
    }
    return out;
}

// Finite-difference directional derivative of the energy residual along the
// field: independent oracle for dE/dsigma = phi v E (zero on E = 0).
double residual_drift_fd(const Dynamics& dyn, const McGeheeState& x) {
    McGeheeState f = dyn.field(x);
    double eps = 1e-7;
    auto shift = [&](double s) {
        McGeheeState y = x;
        y.r += s * f.r;
        y.v += s * f.v;
        y.psi += s * f.psi;
        y.eta += s * f.eta;
        return dyn.energy_residual(y);
    };
    return (shift(eps) - shift(-eps)) / (2 * eps);
}

}  // namespace

TEST_CASE("potential: P = phi*W agrees with direct W away from walls") {
    Chart ch(MassTriple::equal());
    for (double th = ch.a() + 0.05; th < ch.b() - 0.05; th += 0.01) {
        CHECK(ch.P(th) == doctest::Approx(ch.phi(th) * ch.W(th)).epsilon(1e-12));
    }
    // P extends positively to the walls
    CHECK(ch.P(ch.a()) > 0);
    CHECK(ch.P(ch.b()) > 0);
}

TEST_CASE("potential derivatives match central differences") {
    Chart ch(MassTriple::normalized(1.0, 2.0, 3.0));
    double eps = 1e-6;
    for (double th = ch.a() + 0.03; th < ch.b() - 0.03; th += 0.017) {
        double fd1 = (ch.P(th + eps) - ch.P(th - eps)) / (2 * eps);
        double fd2 = (ch.P(th + eps) - 2 * ch.P(th) + ch.P(th - eps)) / (eps * eps);
        CHECK(ch.Pp(th) == doctest::Approx(fd1).epsilon(1e-7));
        CHECK(ch.Ppp(th) == doctest::Approx(fd2).epsilon(1e-3));
        double wd = (ch.W(th + eps) - ch.W(th - eps)) / (2 * eps);
        CHECK(ch.Wp(th) == doctest::Approx(wd).epsilon(1e-6));
    }
}

TEST_CASE("energy residual drift along the field vanishes on the surface") {
    Dynamics dyn(MassTriple::normalized(0.3, 0.5, 0.2));
    for (const auto& x : random_states(dyn, 100, 42)) {
        REQUIRE(std::abs(dyn.energy_residual(x)) < 1e-10);
        CHECK(std::abs(residual_drift_fd(dyn, x)) < 1e-6);
    }
}

TEST_CASE("field is equivariant under time reversal") {
    Dynamics dyn(MassTriple::normalized(2.0, 1.0, 4.0));
    for (const auto& x : random_states(dyn, 50, 7)) {
        McGeheeState f = dyn.field(x);
        McGeheeState fr = dyn.field(time_reversal(x));
        // T F(x) = -F(T x): (r,v,psi,eta) -> (r,-v,psi,-eta)
        CHECK(fr.r == doctest::Approx(-f.r).epsilon(1e-12));
        CHECK(fr.v == doctest::Approx(f.v).epsilon(1e-12));
        CHECK(fr.psi == doctest::Approx(-f.psi).epsilon(1e-12));
        CHECK(fr.eta == doctest::Approx(f.eta).epsilon(1e-12));
    }
}

TEST_CASE("field is equivariant under the deck transformation") {
    Dynamics dyn(MassTriple::normalized(1.0, 3.0, 2.0));
    for (const auto& x : random_states(dyn, 50, 11)) {
        McGeheeState f = dyn.field(x);
        McGeheeState fd = dyn.field(deck(x));
        CHECK(fd.r == doctest::Approx(f.r).epsilon(1e-12));
        CHECK(fd.v == doctest::Approx(f.v).epsilon(1e-12));
        CHECK(fd.psi == doctest::Approx(-f.psi).epsilon(1e-12));
        CHECK(fd.eta == doctest::Approx(-f.eta).epsilon(1e-12));
    }
}

TEST_CASE("equal masses: reflection swaps the binaries equivariantly") {
    Dynamics dyn(MassTriple::equal());
    for (const auto& x : random_states(dyn, 50, 13)) {
        // d/dsigma of (r, v, pi - psi, -eta) along the reflected orbit
        McGeheeState f = dyn.field(x);
        McGeheeState fr = dyn.field(reflect(x));
        CHECK(fr.r == doctest::Approx(f.r).epsilon(1e-11));
        CHECK(fr.v == doctest::Approx(f.v).epsilon(1e-11));
        CHECK(fr.psi == doctest::Approx(-f.psi).epsilon(1e-11));
        CHECK(fr.eta == doctest::Approx(-f.eta).epsilon(1e-11));
    }
}

TEST_CASE("jacobian matches finite differences") {
    Dynamics dyn(MassTriple::normalized(0.2, 0.3, 0.5));
    auto states = random_states(dyn, 10, 3);
    double eps = 1e-6;
    for (const auto& x : states) {
        auto J = dyn.jacobian(x);
        for (int j = 0; j < 4; ++j) {
            auto yp = x.as_array(), ym = x.as_array();
            yp[j] += eps;
            ym[j] -= eps;
            McGeheeState fp = dyn.field(McGeheeState::from_array(yp));
            McGeheeState fm = dyn.field(McGeheeState::from_array(ym));
            auto dp = fp.as_array(), dm = fm.as_array();
            for (int i = 0; i < 4; ++i) {
                double fd = (dp[i] - dm[i]) / (2 * eps);
                CHECK(J[i][j] == doctest::Approx(fd).epsilon(5e-4).scale(1.0));
            }
        }
    }
}

TEST_CASE("equilibria: located, hyperbolic, symmetric under time reversal") {
    for (auto m : {MassTriple::equal(), MassTriple::normalized(1, 2, 3),
                   MassTriple::normalized(5, 1, 1)}) {
        Dynamics dyn(m);
        Equilibria eq = find_equilibria(dyn);
        CHECK(eq.c.state.v < 0);
        CHECK(eq.d.state.v > 0);
        CHECK(eq.c.state.v == doctest::Approx(-eq.d.state.v).epsilon(1e-12));
        // the field vanishes there
        McGeheeState fc = dyn.field(eq.c.state);
        McGeheeState fd = dyn.field(eq.d.state);
        CHECK(norm(fc.as_array()) < 1e-10);
        CHECK(norm(fd.as_array()) < 1e-10);
        CHECK(eq.c.lambda_stable < 0);
        CHECK(eq.c.lambda_unstable > 0);
        // eigen-directions satisfy (J - lambda) e = 0
        auto check_dir = [&](const EquilibriumInfo& e, const std::array<double, 4>& dir,
                             double lam) {
            auto J = dyn.jacobian(e.state);
            for (int i = 0; i < 4; ++i) {
                double Je = 0;
                for (int j = 0; j < 4; ++j) Je += J[i][j] * dir[j];
                CHECK(Je == doctest::Approx(lam * dir[i]).epsilon(1e-8).scale(1.0));
            }
        };
        check_dir(eq.c, eq.c.dir_stable_m, eq.c.lambda_stable);
        check_dir(eq.c, eq.c.dir_unstable_m, eq.c.lambda_unstable);
        check_dir(eq.c, eq.c.dir_homothetic, eq.c.lambda_r);
        check_dir(eq.d, eq.d.dir_stable_m, eq.d.lambda_stable);
    }
}

TEST_CASE("equal masses: central configuration at the symmetric shape") {
    Dynamics dyn(MassTriple::equal());
    Equilibria eq = find_equilibria(dyn);
    const Chart& ch = dyn.chart();
    CHECK(eq.theta_star == doctest::Approx(0.5 * (ch.a() + ch.b())).epsilon(1e-10));
}

TEST_CASE("integrated orbit conserves the energy residual") {
    Dynamics dyn(MassTriple::normalized(1.0, 1.5, 0.7));
    auto states = random_states(dyn, 5, 99);
    StepControl ctl;
    ctl.rtol = 1e-11;
    ctl.atol = 1e-13;
    for (const auto& x0 : states) {
        auto rhs = [&](const Vec4& y) {
            return dyn.field(McGeheeState::from_array(y)).as_array();
        };
        Dopri5 stepper(rhs, x0.as_array(), 0.0, ctl);
        double worst = 0;
        for (int i = 0; i < 1000 && stepper.time() < 20.0; ++i) {
            stepper.step();
            auto y = stepper.state();
            if (y[0] > 50) break;
            worst = std::max(worst, std::abs(dyn.energy_residual(McGeheeState::from_array(y))));
        }
        CHECK(worst < 1e-9);
    }
}

TEST_CASE("forward then backward integration returns to the start") {
    Dynamics dyn(MassTriple::normalized(0.4, 0.25, 0.35));
    StepControl ctl;
    ctl.rtol = 1e-12;
    ctl.atol = 1e-14;
    auto rhs_fwd = [&](const Vec4& y) {
        return dyn.field(McGeheeState::from_array(y)).as_array();
    };
    for (const auto& x0 : random_states(dyn, 5, 5)) {
        Dopri5 f(rhs_fwd, x0.as_array(), 0.0, ctl, +1);
        while (f.time() < 2.0) f.step();
        double t1 = f.time();
        // run backward past sigma = 0 and read the dense output there
        Dopri5 b(rhs_fwd, f.state(), t1, ctl, -1);
        Vec4 y0{};
        while (true) {
            DenseSegment seg = b.step();
            if (seg.s1 <= 0.0) {
                y0 = seg.eval(0.0);
                break;
            }
        }
        for (int i = 0; i < 4; ++i)
            CHECK(y0[i] == doctest::Approx(x0.as_array()[i]).epsilon(1e-8).scale(1.0));
    }
}

TEST_CASE("on M the v coordinate is non-decreasing along the flow") {
    Dynamics dyn(MassTriple::normalized(2, 3, 1));
    Equilibria eq = find_equilibria(dyn);
    StepControl ctl;
    auto rhs = [&](const Vec4& y) {
        return dyn.field_on_m(McGeheeState::from_array(y)).as_array();
    };
    // leave c along its unstable direction on M and run forward: v climbs
    // from v(c) through wall crossings toward the upper legs
    for (double s : {+1.0, -1.0}) {
        McGeheeState x = eq.c.state;
        x.psi += s * 1e-6 * eq.c.dir_unstable_m[2];
        x.eta += s * 1e-6 * eq.c.dir_unstable_m[3];
        x = dyn.project_energy(x);
        x.r = 0;
        Dopri5 st(rhs, x.as_array(), 0.0, ctl, +1);
        double vprev = x.v;
        bool mono = true;
        for (int i = 0; i < 6000 && st.time() < 80.0; ++i) {
            st.step();
            double v = st.state()[1];
            if (v < vprev - 1e-10) mono = false;
            vprev = v;
            if (std::abs(v) > 2 * eq.v_star) break;
        }
        CHECK(mono);
        CHECK(vprev > eq.v_star);  // climbed past v(d)
        // r stays exactly zero under the restricted field
        CHECK(st.state()[0] == 0.0);
    }
}
