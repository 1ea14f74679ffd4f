#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "ctbp/section.hpp"

using namespace ctbp;

namespace {

std::vector<SectionPoint> sample_box(int n, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> ur(0.02, 1.5);
    std::uniform_real_distribution<double> uv(-1.2, 1.2);
    std::uniform_real_distribution<double> us(0.0, 1.0);
    std::vector<SectionPoint> out;
    for (int i = 0; i < n; ++i)
        out.push_back({us(rng) < 0.5 ? Side::L : Side::R, ur(rng), uv(rng)});
    return out;
}

}  // namespace

TEST_CASE("P and P^{-1} are mutually inverse on their domains") {
    Dynamics dyn(MassTriple::normalized(1.0, 2.0, 1.5));
    int tested = 0;
    for (const auto& p : sample_box(140, 2024)) {
        auto fwd = poincare_forward(dyn, p);
        if (fwd.outcome != FlowOutcome::crossed) continue;
        SectionPoint q = project_to_section(fwd.state);
        auto back = poincare_backward(dyn, q);
        REQUIRE(back.outcome == FlowOutcome::crossed);
        SectionPoint pp = project_to_section(back.state);
        CHECK(pp.side == p.side);
        CHECK(pp.r == doctest::Approx(p.r).epsilon(1e-8).scale(1.0));
        CHECK(pp.v == doctest::Approx(p.v).epsilon(1e-8).scale(1.0));
        ++tested;
        if (tested >= 100) break;
    }
    CHECK(tested >= 60);  // most box points should return
}

TEST_CASE("time reversal conjugates P to P^{-1}") {
    Dynamics dyn(MassTriple::normalized(0.5, 0.2, 0.3));
    int tested = 0;
    for (const auto& p : sample_box(60, 7)) {
        auto fwd = poincare_forward(dyn, p);
        auto bwd = poincare_backward(dyn, time_reversal(p));
        if (fwd.outcome != FlowOutcome::crossed) continue;
        REQUIRE(bwd.outcome == FlowOutcome::crossed);
        SectionPoint a = project_to_section(fwd.state);
        SectionPoint b = time_reversal(project_to_section(bwd.state));
        CHECK(a.side == b.side);
        CHECK(a.r == doctest::Approx(b.r).epsilon(1e-8).scale(1.0));
        CHECK(a.v == doctest::Approx(b.v).epsilon(1e-8).scale(1.0));
        if (++tested >= 40) break;
    }
    CHECK(tested >= 20);
}

TEST_CASE("equal masses: reflection conjugacy with swapped sides") {
    Dynamics dyn(MassTriple::equal());
    int tested = 0;
    for (const auto& p : sample_box(60, 77)) {
        auto f1 = poincare_forward(dyn, p);
        auto f2 = poincare_forward(dyn, reflect(p));
        if (f1.outcome != FlowOutcome::crossed) continue;
        REQUIRE(f2.outcome == FlowOutcome::crossed);
        SectionPoint a = reflect(project_to_section(f1.state));
        SectionPoint b = project_to_section(f2.state);
        CHECK(a.side == b.side);
        CHECK(a.r == doctest::Approx(b.r).epsilon(1e-8).scale(1.0));
        CHECK(a.v == doctest::Approx(b.v).epsilon(1e-8).scale(1.0));
        if (++tested >= 40) break;
    }
    CHECK(tested >= 20);
}

TEST_CASE("successive crossings on M have non-decreasing v") {
    Dynamics dyn(MassTriple::normalized(1, 1, 2));
    Equilibria eq = find_equilibria(dyn);
    FlowOptions opts;
    opts.restrict_to_m = true;
    // start on M just off c's unstable branch
    McGeheeState x = eq.c.state;
    x.psi += 1e-6 * eq.c.dir_unstable_m[2];
    x.eta += 1e-6 * eq.c.dir_unstable_m[3];
    x = dyn.project_energy(x);
    x.r = 0;
    double vprev = -1e9;
    for (int i = 0; i < 8; ++i) {
        auto hit = next_crossing(dyn, x, +1, opts);
        if (hit.outcome != FlowOutcome::crossed) break;
        CHECK(hit.state.v >= vprev - 1e-10);
        CHECK(hit.state.r == 0.0);
        vprev = hit.state.v;
        x = hit.state;
    }
    CHECK(vprev > 0);  // climbed past the middle
}

TEST_CASE("crossings are transverse, far above the tangency floor") {
    Dynamics dyn(MassTriple::normalized(3, 1, 2));
    for (const auto& p : sample_box(40, 5)) {
        auto fwd = poincare_forward(dyn, p);
        if (fwd.outcome != FlowOutcome::crossed) continue;
        CHECK(!fwd.tangency_warning);
        CHECK(std::abs(fwd.state.eta) > 1e-2);
        CHECK(std::abs(std::remainder(fwd.state.psi, M_PI)) == 0.0);  // exact projection
    }
}

TEST_CASE("section residual before projection is tiny (root polish works)") {
    Dynamics dyn(MassTriple::equal());
    for (const auto& p : sample_box(30, 9)) {
        auto fwd = poincare_forward(dyn, p);
        if (fwd.outcome != FlowOutcome::crossed) continue;
        CHECK(fwd.section_residual < 1e-10);
    }
}

TEST_CASE("escape is detected for hyperbolic departures") {
    Dynamics dyn(MassTriple::equal());
    FlowOptions opts;
    opts.escape_r = 50.0;
    opts.sigma_budget = 1e5;
    // large positive v at large r: the system is expanding fast
    SectionPoint p{Side::L, 40.0, 3.0};
    auto fwd = poincare_forward(dyn, p, opts);
    CHECK((fwd.outcome == FlowOutcome::escaped || fwd.outcome == FlowOutcome::crossed));
    if (fwd.outcome == FlowOutcome::escaped) CHECK(fwd.state.r > 50.0);
}

TEST_CASE("tighter tolerance improves the return-map accuracy") {
    Dynamics dyn(MassTriple::normalized(1.0, 2.0, 1.2));
    SectionPoint p{Side::L, 0.4, 0.25};
    FlowOptions loose, tight, ref;
    loose.rtol = 1e-7;  loose.atol = 1e-9;
    tight.rtol = 1e-10; tight.atol = 1e-12;
    ref.rtol = 1e-13;   ref.atol = 1e-15;
    auto rl = poincare_forward(dyn, p, loose);
    auto rt = poincare_forward(dyn, p, tight);
    auto rr = poincare_forward(dyn, p, ref);
    REQUIRE(rl.outcome == FlowOutcome::crossed);
    REQUIRE(rt.outcome == FlowOutcome::crossed);
    REQUIRE(rr.outcome == FlowOutcome::crossed);
    double el = std::hypot(rl.state.r - rr.state.r, rl.state.v - rr.state.v);
    double et = std::hypot(rt.state.r - rr.state.r, rt.state.v - rr.state.v);
    CHECK(et < el);
    CHECK(et < 1e-8);
}

TEST_CASE("energy residual stays below 1e-9 across a long orbit") {
    Dynamics dyn(MassTriple::normalized(2, 1, 1));
    SectionPoint p{Side::R, 0.3, -0.1};
    double worst = 0;
    SectionPoint cur = p;
    for (int i = 0; i < 25; ++i) {
        auto fwd = poincare_forward(dyn, cur);
        if (fwd.outcome != FlowOutcome::crossed) break;
        worst = std::max(worst, std::abs(dyn.energy_residual(fwd.state)));
        cur = project_to_section(fwd.state);
    }
    CHECK(worst < 1e-9);
}
