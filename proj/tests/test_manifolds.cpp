#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "ctbp/manifolds.hpp"

using namespace ctbp;

namespace {

// independent re-count of the maximal strictly-alternating prefix
int alt_prefix(const std::vector<Side>& w) {
    for (std::size_t i = 1; i < w.size(); ++i)
        if (w[i] == w[i - 1]) return (int)i;
    return (int)w.size();
}

bool arc_is_simple(const Arc& a) {
    for (std::size_t i = 0; i + 1 < a.pts.size(); ++i)
        for (std::size_t j = i + 2; j + 1 < a.pts.size(); ++j) {
            const auto &p0 = a.pts[i].p, &p1 = a.pts[i + 1].p;
            const auto &q0 = a.pts[j].p, &q1 = a.pts[j + 1].p;
            double rx = p1.r - p0.r, ry = p1.v - p0.v;
            double qx = q1.r - q0.r, qy = q1.v - q0.v;
            double den = rx * qy - ry * qx;
            if (std::abs(den) < 1e-300) continue;
            double dx = q0.r - p0.r, dy = q0.v - p0.v;
            double s = (dx * qy - dy * qx) / den;
            double t = (dx * ry - dy * rx) / den;
            double eps = (j == i + 2) ? 1e-9 : -1e-12;  // shared vertex allowance
            if (s > eps && s < 1 - eps && t > -1e-12 && t < 1 + 1e-12) return false;
        }
    return true;
}

}  // namespace

TEST_CASE("branch itineraries: alternating length and bounds") {
    for (auto m : {MassTriple::equal(), MassTriple::normalized(1.0, 2.0, 1.4),
                   MassTriple::normalized(0.9, 1.1, 1.3)}) {
        Dynamics dyn(m);
        MPointTable pts = compute_m_points(dyn);
        LcRcResult q = compute_lc_rc(dyn, pts);
        CHECK(q.lc >= 2);
        CHECK(q.rc >= 2);
        CHECK(std::abs(q.lc - q.rc) <= 1);
        CHECK(q.lc == alt_prefix(q.branch_lc.word));
        CHECK(q.rc == alt_prefix(q.branch_rc.word));
        CHECK(q.branch_lc.word[0] == Side::L);
        CHECK(q.branch_rc.word[0] == Side::R);
        // crossing v-values decrease along backward runs (v non-decreasing forward)
        for (std::size_t i = 1; i < q.branch_lc.crossings.size(); ++i)
            CHECK(q.branch_lc.crossings[i].v < q.branch_lc.crossings[i - 1].v + 1e-12);
    }
}

TEST_CASE("equal masses: the two W^s(d) branches are reflections") {
    Dynamics dyn(MassTriple::equal());
    MPointTable pts = compute_m_points(dyn);
    LcRcResult q = compute_lc_rc(dyn, pts);
    CHECK(q.lc == q.rc);
    std::size_t n = std::min(q.branch_lc.crossings.size(), q.branch_rc.crossings.size());
    for (std::size_t i = 0; i < std::min<std::size_t>(n, 10); ++i) {
        CHECK(q.branch_lc.word[i] == other(q.branch_rc.word[i]));
        CHECK(q.branch_lc.crossings[i].v ==
              doctest::Approx(q.branch_rc.crossings[i].v).epsilon(1e-8).scale(1.0));
    }
}

TEST_CASE("anchor points satisfy the v-inequality chain") {
    for (auto m : {MassTriple::equal(), MassTriple::normalized(1.0, 0.8, 1.5)}) {
        Dynamics dyn(m);
        MPointTable pts = compute_m_points(dyn);
        double vc = pts.eq.c.state.v, vd = pts.eq.d.state.v;
        double tol = 1e-9;
        // v(L*C) <= v(c) <= v(cL*) <= 0 <= v(L*d) <= v(d) <= v(dL*)
        CHECK(pts.anchor(Anchor::Lc).v <= vc + tol);
        CHECK(vc <= pts.anchor(Anchor::cL).v + tol);
        CHECK(pts.anchor(Anchor::cL).v <= 0 + tol);
        CHECK(0 <= pts.anchor(Anchor::Ld).v + tol);
        CHECK(pts.anchor(Anchor::Ld).v <= vd + tol);
        CHECK(vd <= pts.anchor(Anchor::dL).v + tol);
        // mirror chain on R
        CHECK(pts.anchor(Anchor::Rc).v <= vc + tol);
        CHECK(vc <= pts.anchor(Anchor::cR).v + tol);
        CHECK(pts.anchor(Anchor::cR).v <= 0 + tol);
        CHECK(0 <= pts.anchor(Anchor::Rd).v + tol);
        CHECK(pts.anchor(Anchor::Rd).v <= vd + tol);
        CHECK(vd <= pts.anchor(Anchor::dR).v + tol);
        // time-reversal pairing v(cL*) + v(L*d) = 0
        CHECK(pts.anchor(Anchor::cL).v + pts.anchor(Anchor::Ld).v ==
              doctest::Approx(0.0).epsilon(1e-8).scale(1.0));
        CHECK(pts.anchor(Anchor::cR).v + pts.anchor(Anchor::Rd).v ==
              doctest::Approx(0.0).epsilon(1e-8).scale(1.0));
        CHECK(pts.anchor(Anchor::dL).v + pts.anchor(Anchor::Lc).v ==
              doctest::Approx(0.0).epsilon(1e-8).scale(1.0));
    }
}

TEST_CASE("seed arcs: endpoints, simplicity, time-reversal pairing") {
    Dynamics dyn(MassTriple::normalized(1.0, 1.2, 0.9));
    MPointTable pts = compute_m_points(dyn);
    SeedArcOptions so;
    so.gap_budget = 5e-3;
    Arc lc = seed_arc(dyn, pts, SeedArcKind::LC, so);
    Arc el = seed_arc(dyn, pts, SeedArcKind::EL, so);

    REQUIRE(lc.size() >= 10);
    REQUIRE(el.size() >= 10);
    CHECK(lc.side == Side::L);
    CHECK(el.side == Side::L);

    // endpoints sit at the labeled anchors
    CHECK(lc.pts.front().p.r == doctest::Approx(0.0).scale(1.0).epsilon(1e-9));
    CHECK(lc.pts.front().p.v ==
          doctest::Approx(pts.anchor(Anchor::Lc).v).epsilon(1e-8).scale(1.0));
    CHECK(lc.pts.back().p.v ==
          doctest::Approx(pts.anchor(Anchor::Ld).v).epsilon(1e-8).scale(1.0));
    CHECK(lc.start_label.str() == "L*c");
    CHECK(lc.end_label.str() == "L*d");
    CHECK(el.start_label.str() == "dL*");
    CHECK(el.end_label.str() == "cL*");

    CHECK(arc_is_simple(lc));
    CHECK(arc_is_simple(el));

    // EL* is the time-reversal image of L*C: same r, negated v, set-wise
    for (std::size_t i = 0; i < lc.size(); i += std::max<std::size_t>(1, lc.size() / 15)) {
        SectionPoint probe{Side::L, lc.pts[i].p.r, -lc.pts[i].p.v};
        double best = 1e9;
        for (std::size_t j = 0; j + 1 < el.size(); ++j) {
            // distance to segment j
            const auto &q0 = el.pts[j].p, &q1 = el.pts[j + 1].p;
            double wx = q1.r - q0.r, wy = q1.v - q0.v;
            double len2 = wx * wx + wy * wy;
            double t = len2 == 0 ? 0 : ((probe.r - q0.r) * wx + (probe.v - q0.v) * wy) / len2;
            t = std::clamp(t, 0.0, 1.0);
            best = std::min(best, std::hypot(probe.r - (q0.r + t * wx),
                                             probe.v - (q0.v + t * wy)));
        }
        CHECK(best < 2e-3);  // within the sampling budget
    }
}

TEST_CASE("seed arcs: halving the seed distance moves endpoints below budget") {
    Dynamics dyn(MassTriple::equal());
    MPointTable pts = compute_m_points(dyn);
    SeedArcOptions a, b;
    a.gap_budget = b.gap_budget = 5e-3;
    a.seed_eps = 1e-6;
    b.seed_eps = 5e-7;
    Arc arc_a = seed_arc(dyn, pts, SeedArcKind::LC, a);
    Arc arc_b = seed_arc(dyn, pts, SeedArcKind::LC, b);
    // interior points: compare a mid-arc point by nearest distance
    const auto& mid = arc_a.pts[arc_a.size() / 2].p;
    double best = 1e9;
    for (auto& q : arc_b.pts) best = std::min(best, std::hypot(mid.r - q.p.r, mid.v - q.p.v));
    CHECK(best < 2e-3);
}

TEST_CASE("equal masses: reflection maps L*C to R*C pointwise") {
    Dynamics dyn(MassTriple::equal());
    MPointTable pts = compute_m_points(dyn);
    SeedArcOptions so;
    so.gap_budget = 5e-3;
    Arc lc = seed_arc(dyn, pts, SeedArcKind::LC, so);
    Arc rc = seed_arc(dyn, pts, SeedArcKind::RC, so);
    for (std::size_t i = 0; i < lc.size(); i += std::max<std::size_t>(1, lc.size() / 12)) {
        SectionPoint probe{Side::R, lc.pts[i].p.r, lc.pts[i].p.v};
        double best = 1e9;
        for (std::size_t j = 0; j + 1 < rc.size(); ++j) {
            const auto &q0 = rc.pts[j].p, &q1 = rc.pts[j + 1].p;
            double wx = q1.r - q0.r, wy = q1.v - q0.v;
            double len2 = wx * wx + wy * wy;
            double t = len2 == 0 ? 0 : ((probe.r - q0.r) * wx + (probe.v - q0.v) * wy) / len2;
            t = std::clamp(t, 0.0, 1.0);
            best = std::min(best,
                            std::hypot(probe.r - (q0.r + t * wx), probe.v - (q0.v + t * wy)));
        }
        CHECK(best < 1e-6);
    }
}

TEST_CASE("L*C and EL* intersect on L (transversely)") {
    for (auto m : {MassTriple::equal(), MassTriple::normalized(1.0, 1.5, 0.8)}) {
        Dynamics dyn(m);
        MPointTable pts = compute_m_points(dyn);
        SeedArcOptions so;
        so.gap_budget = 5e-3;
        Arc lc = seed_arc(dyn, pts, SeedArcKind::LC, so);
        Arc el = seed_arc(dyn, pts, SeedArcKind::EL, so);
        auto hits = arcs_intersect(lc, el);
        REQUIRE(hits.size() >= 1);
        for (auto& h : hits) {
            CHECK(!h.tangency_warning);
            CHECK(h.point.r > 0);
        }
    }
}

TEST_CASE("synthetic polylines: known crossing, self test rejected") {
    Arc a, b;
    a.side = b.side = Side::L;
    a.pts = {{0.0, {Side::L, 0.0, -1.0}}, {1.0, {Side::L, 1.0, 1.0}}};
    b.pts = {{0.0, {Side::L, 0.0, 1.0}}, {1.0, {Side::L, 1.0, -1.0}}};
    auto hits = arcs_intersect(a, b);
    REQUIRE(hits.size() == 1);
    CHECK(hits[0].point.r == doctest::Approx(0.5));
    CHECK(hits[0].point.v == doctest::Approx(0.0));
    CHECK_THROWS_AS((void)arcs_intersect(a, a), std::invalid_argument);
}
