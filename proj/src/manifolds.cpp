#include "ctbp/manifolds.hpp"

#include <algorithm>
#include <cmath>

namespace ctbp {

std::string to_string(Anchor a) {
    switch (a) {
        case Anchor::Lc: return "L*c";
        case Anchor::Ld: return "L*d";
        case Anchor::Rc: return "R*c";
        case Anchor::Rd: return "R*d";
        case Anchor::cL: return "cL*";
        case Anchor::cR: return "cR*";
        case Anchor::dL: return "dL*";
        case Anchor::dR: return "dR*";
    }
    return "?";
}

std::string EndpointLabel::str() const {
    switch (kind) {
        case Kind::anchor: return to_string(anchor);
        case Kind::pullback:
            return "P^{-" + std::to_string(depth) + "}(" + to_string(anchor) + ")";
        case Kind::free_end: return "free";
    }
    return "?";
}

double Arc::length() const {
    double s = 0;
    for (std::size_t i = 1; i < pts.size(); ++i)
        s += std::hypot(pts[i].p.r - pts[i - 1].p.r, pts[i].p.v - pts[i - 1].p.v);
    return s;
}

namespace {

McGeheeState seeded_state(const Dynamics& dyn, const EquilibriumInfo& at,
                          const std::array<double, 4>& dir, double eps) {
    McGeheeState x = at.state;
    x.r += eps * dir[0];
    x.v += eps * dir[1];
    x.psi += eps * dir[2];
    x.eta += eps * dir[3];
    x = dyn.project_energy(x);
    if (x.r < 0) x.r = 0;
    return x;
}

double dist_state(const McGeheeState& a, const McGeheeState& b) {
    return std::sqrt((a.r - b.r) * (a.r - b.r) + (a.v - b.v) * (a.v - b.v) +
                     (a.psi - b.psi) * (a.psi - b.psi) + (a.eta - b.eta) * (a.eta - b.eta));
}

}  // namespace

BranchItinerary branch_on_m(const Dynamics& dyn, const Equilibria& eq,
                            const EquilibriumInfo& at, std::array<double, 4> dir,
                            int time_dir, const BranchOptions& opts) {
    BranchItinerary out;
    FlowOptions fo = opts.flow;
    fo.restrict_to_m = true;
    fo.sigma_budget = std::max(fo.sigma_budget, 4e3);

    McGeheeState x = seeded_state(dyn, at, dir, opts.seed_eps);
    x.r = 0;
    const McGeheeState& other =
        (at.state.v < 0) ? eq.d.state : eq.c.state;  // potential heteroclinic target

    bool broke = false;
    for (int k = 0; k < opts.max_crossings; ++k) {
        auto hit = next_crossing(dyn, x, time_dir, fo);
        if (hit.outcome != FlowOutcome::crossed) {
            if (dist_state(hit.state, other) < std::max(opts.heteroclinic_tol, 1e-4))
                out.terminal = BranchItinerary::Terminal::heteroclinic;
            else
                out.terminal = BranchItinerary::Terminal::budget;
            return out;
        }
        Side s = side_of_wall(hit.state.psi);
        out.word.push_back(s);
        out.crossings.push_back(SectionPoint{s, 0.0, hit.state.v});
        if (!broke && out.word.size() >= 2 &&
            out.word[out.word.size() - 1] == out.word[out.word.size() - 2]) {
            broke = true;
            out.terminal = BranchItinerary::Terminal::down_leg;
            out.leg = s;
            out.alternating_length = (int)out.word.size() - 1;
        }
        x = hit.state;
        if (std::abs(x.v) > opts.v_abort_factor * eq.v_star) break;
    }
    if (!broke) {
        out.terminal = BranchItinerary::Terminal::budget;
        out.alternating_length = (int)out.word.size();
    }
    return out;
}

MPointTable compute_m_points(const Dynamics& dyn, const BranchOptions& opts) {
    MPointTable t;
    t.eq = find_equilibria(dyn);

    auto run = [&](const EquilibriumInfo& at, std::array<double, 4> dir, double sgn,
                   int time_dir) {
        std::array<double, 4> d = dir;
        for (auto& c : d) c *= sgn;
        return branch_on_m(dyn, t.eq, at, d, time_dir, opts);
    };

    BranchItinerary sd_plus = run(t.eq.d, t.eq.d.dir_stable_m, +1, -1);
    BranchItinerary sd_minus = run(t.eq.d, t.eq.d.dir_stable_m, -1, -1);
    if (sd_plus.terminal == BranchItinerary::Terminal::heteroclinic ||
        sd_minus.terminal == BranchItinerary::Terminal::heteroclinic)
        throw HeteroclinicError("W^s(d) branch limits to c on M");
    if (sd_plus.word.empty() || sd_minus.word.empty() || sd_plus.word[0] == sd_minus.word[0])
        throw NumericsInconsistency("W^s(d) branches do not split L/R at the first crossing");
    t.ws_d_branch_L = (sd_plus.word[0] == Side::L) ? sd_plus : sd_minus;
    t.ws_d_branch_R = (sd_plus.word[0] == Side::L) ? sd_minus : sd_plus;

    t.wu_c_plus = run(t.eq.c, t.eq.c.dir_unstable_m, +1, +1);
    t.wu_c_minus = run(t.eq.c, t.eq.c.dir_unstable_m, -1, +1);
    t.wu_d_plus = run(t.eq.d, t.eq.d.dir_unstable_m, +1, +1);
    t.wu_d_minus = run(t.eq.d, t.eq.d.dir_unstable_m, -1, +1);
    t.ws_c_plus = run(t.eq.c, t.eq.c.dir_stable_m, +1, -1);
    t.ws_c_minus = run(t.eq.c, t.eq.c.dir_stable_m, -1, -1);

    auto split = [](const BranchItinerary& a, const BranchItinerary& b) {
        return !a.word.empty() && !b.word.empty() && a.word[0] != b.word[0];
    };
    if (!split(t.wu_c_plus, t.wu_c_minus) || !split(t.wu_d_plus, t.wu_d_minus) ||
        !split(t.ws_c_plus, t.ws_c_minus))
        throw NumericsInconsistency("manifold branches on M do not split L/R");
    return t;
}

SectionPoint MPointTable::anchor(Anchor a) const {
    auto pick = [](const BranchItinerary& p, const BranchItinerary& m, Side want) {
        return (p.word[0] == want) ? p.crossings[0] : m.crossings[0];
    };
    switch (a) {
        case Anchor::Ld: return ws_d_branch_L.crossings[0];
        case Anchor::Rd: return ws_d_branch_R.crossings[0];
        case Anchor::Lc: return pick(ws_c_plus, ws_c_minus, Side::L);
        case Anchor::Rc: return pick(ws_c_plus, ws_c_minus, Side::R);
        case Anchor::cL: return pick(wu_c_plus, wu_c_minus, Side::L);
        case Anchor::cR: return pick(wu_c_plus, wu_c_minus, Side::R);
        case Anchor::dL: return pick(wu_d_plus, wu_d_minus, Side::L);
        case Anchor::dR: return pick(wu_d_plus, wu_d_minus, Side::R);
    }
    throw std::logic_error("bad anchor");
}

SectionPoint MPointTable::pullback_of_d_anchor(Anchor a, int k) const {
    const BranchItinerary* br = nullptr;
    if (a == Anchor::Ld) br = &ws_d_branch_L;
    else if (a == Anchor::Rd) br = &ws_d_branch_R;
    else throw std::logic_error("pullbacks tracked only for L*d and R*d");
    if (k < 0 || (std::size_t)k >= br->crossings.size())
        throw NumericsInconsistency("branch run too short for pullback depth " +
                                    std::to_string(k));
    return br->crossings[(std::size_t)k];
}

LcRcResult compute_lc_rc(const Dynamics& dyn, const MPointTable& pts) {
    (void)dyn;
    LcRcResult res;
    res.branch_lc = pts.ws_d_branch_L;
    res.branch_rc = pts.ws_d_branch_R;
    if (res.branch_lc.terminal == BranchItinerary::Terminal::heteroclinic ||
        res.branch_rc.terminal == BranchItinerary::Terminal::heteroclinic) {
        res.heteroclinic = true;
        throw HeteroclinicError("W^s(d) = W^u(c) on M within tolerance");
    }
    if (res.branch_lc.terminal == BranchItinerary::Terminal::budget ||
        res.branch_rc.terminal == BranchItinerary::Terminal::budget)
        throw NumericsInconsistency("branch itinerary did not terminate");
    res.lc = res.branch_lc.alternating_length;
    res.rc = res.branch_rc.alternating_length;
    if (res.lc < 2 || res.rc < 2)
        throw NumericsInconsistency("computed ell_C or r_C below 2: lc=" +
                                    std::to_string(res.lc) + " rc=" + std::to_string(res.rc));
    if (std::abs(res.lc - res.rc) > 1)
        throw NumericsInconsistency("|ell_C - r_C| > 1: lc=" + std::to_string(res.lc) +
                                    " rc=" + std::to_string(res.rc));
    if (res.lc != res.rc && res.branch_lc.leg != res.branch_rc.leg)
        throw NumericsInconsistency("unequal alternating lengths but branches on different legs");
    return res;
}

// ---------------------------------------------------------------------------

namespace {

struct SeedFamily {
    EquilibriumInfo at;
    std::array<double, 4> dir_m;
    std::array<double, 4> dir_h;
    int time_dir;
};

std::optional<SectionPoint> eval_seed(const Dynamics& dyn, const SeedFamily& fam, double alpha,
                                      double eps, const FlowOptions& fo, Side want) {
    std::array<double, 4> dir;
    for (int i = 0; i < 4; ++i)
        dir[i] = std::cos(alpha) * fam.dir_m[i] + std::sin(alpha) * fam.dir_h[i];
    McGeheeState x = seeded_state(dyn, fam.at, dir, eps);
    auto hit = next_crossing(dyn, x, fam.time_dir, fo);
    if (hit.outcome != FlowOutcome::crossed) return std::nullopt;
    SectionPoint p = project_to_section(hit.state);
    if (p.side != want) return std::nullopt;
    return p;
}

double gap(const SectionPoint& a, const SectionPoint& b) {
    return std::hypot(a.r - b.r, a.v - b.v);
}

double turn_deg(const SectionPoint& a, const SectionPoint& b, const SectionPoint& c) {
    double ux = b.r - a.r, uy = b.v - a.v, vx = c.r - b.r, vy = c.v - b.v;
    double nu = std::hypot(ux, uy), nv = std::hypot(vx, vy);
    if (nu == 0 || nv == 0) return 0;
    double dot = std::clamp((ux * vx + uy * vy) / (nu * nv), -1.0, 1.0);
    return std::acos(dot) * 180.0 / M_PI;
}

}  // namespace

Arc seed_arc(const Dynamics& dyn, const MPointTable& pts, SeedArcKind kind,
             const SeedArcOptions& opts) {
    const bool stable_of_c = (kind == SeedArcKind::LC || kind == SeedArcKind::RC);
    const Side want = (kind == SeedArcKind::LC || kind == SeedArcKind::EL) ? Side::L : Side::R;

    SeedFamily fam;
    if (stable_of_c) {
        fam.at = pts.eq.c;
        fam.dir_m = pts.eq.c.dir_stable_m;
        fam.dir_h = pts.eq.c.dir_homothetic;
        fam.time_dir = -1;
    } else {
        fam.at = pts.eq.d;
        fam.dir_m = pts.eq.d.dir_unstable_m;
        fam.dir_h = pts.eq.d.dir_homothetic;
        fam.time_dir = +1;
    }

    // endpoint anchors: the seed circle's on-M ends give L*c/R*c (resp.
    // dL*/dR*); the interior transition angle limits to L*d/R*d (resp.
    // cL*/cR*) through the near-heteroclinic passage
    Anchor near_anchor = stable_of_c ? (want == Side::L ? Anchor::Lc : Anchor::Rc)
                                     : (want == Side::L ? Anchor::dL : Anchor::dR);
    Anchor far_anchor = stable_of_c ? (want == Side::L ? Anchor::Ld : Anchor::Rd)
                                    : (want == Side::L ? Anchor::cL : Anchor::cR);

    const BranchItinerary& br_plus = stable_of_c ? pts.ws_c_plus : pts.wu_d_plus;
    const BranchItinerary& br_minus = stable_of_c ? pts.ws_c_minus : pts.wu_d_minus;
    bool plus_end = (br_plus.word[0] == want);
    if (!plus_end && br_minus.word[0] != want)
        throw NumericsInconsistency("neither on-M branch lands on the requested side");

    struct Sample {
        double alpha;
        std::optional<SectionPoint> p;
    };
    auto ev = [&](double alpha) { return eval_seed(dyn, fam, alpha, opts.seed_eps, opts.flow, want); };

    double a_good = plus_end ? 0.0 : M_PI;
    double a_far = plus_end ? M_PI : 0.0;
    int n0 = std::max(9, opts.initial_samples);
    std::vector<Sample> samples;
    samples.push_back({a_good, pts.anchor(near_anchor)});
    for (int i = 1; i < n0; ++i) {
        double al = a_good + (a_far - a_good) * i / n0;
        samples.push_back({al, ev(al)});
    }

    std::size_t last_good = 0;
    for (std::size_t i = 1; i < samples.size(); ++i) {
        if (samples[i].p) last_good = i;
        else break;
    }
    samples.resize(last_good + 1);
    if (samples.size() < 2)
        throw NumericsInconsistency("seed arc collapsed: no samples on the requested side");

    SectionPoint far_pt = pts.anchor(far_anchor);
    {
        double lo = samples.back().alpha;
        double hi = a_far;
        SectionPoint lo_pt = *samples.back().p;
        for (int d = 0; d < opts.max_depth + 24 && gap(lo_pt, far_pt) > opts.gap_budget; ++d) {
            double mid = 0.5 * (lo + hi);
            if (std::abs(hi - lo) < 1e-15) break;
            auto pm = ev(mid);
            if (pm) {
                lo = mid;
                lo_pt = *pm;
                samples.push_back({mid, pm});
            } else {
                hi = mid;
            }
        }
        samples.push_back({hi, far_pt});
    }

    std::sort(samples.begin(), samples.end(),
              [](const Sample& x, const Sample& y) { return x.alpha < y.alpha; });
    if (!plus_end) std::reverse(samples.begin(), samples.end());

    // adaptive interior refinement on gap and turning angle
    for (int round = 0; round < opts.max_depth; ++round) {
        bool changed = false;
        std::vector<Sample> next;
        next.reserve(samples.size() * 2);
        for (std::size_t i = 0; i < samples.size(); ++i) {
            next.push_back(samples[i]);
            if (i + 1 >= samples.size()) break;
            const Sample& A = samples[i];
            const Sample& B = samples[i + 1];
            if (!A.p || !B.p) continue;
            bool too_far = gap(*A.p, *B.p) > opts.gap_budget;
            bool kink = false;
            if (!too_far && i + 2 < samples.size() && samples[i + 2].p)
                kink = turn_deg(*A.p, *B.p, *samples[i + 2].p) > opts.turn_budget_deg &&
                       gap(*A.p, *B.p) > 0.05 * opts.gap_budget;
            if ((too_far || kink) && std::abs(B.alpha - A.alpha) > 1e-14) {
                auto pm = ev(0.5 * (A.alpha + B.alpha));
                if (pm) {
                    next.push_back({0.5 * (A.alpha + B.alpha), pm});
                    changed = true;
                }
            }
        }
        samples.swap(next);
        if (!changed) break;
    }

    Arc arc;
    arc.side = want;
    arc.gap_budget = opts.gap_budget;
    arc.start_label = EndpointLabel::at(near_anchor);
    arc.end_label = EndpointLabel::at(far_anchor);
    arc.pts.reserve(samples.size());
    for (auto& s : samples)
        if (s.p) arc.pts.push_back({s.alpha, *s.p});
    arc.eval = [dyn, fam, eps = opts.seed_eps, fo = opts.flow, want](double alpha) {
        return eval_seed(dyn, fam, alpha, eps, fo, want);
    };
    return arc;
}

// ---------------------------------------------------------------------------

namespace {

bool seg_intersect(const SectionPoint& a0, const SectionPoint& a1, const SectionPoint& b0,
                   const SectionPoint& b1, double& s, double& t) {
    double rx = a1.r - a0.r, ry = a1.v - a0.v;
    double qx = b1.r - b0.r, qy = b1.v - b0.v;
    double den = rx * qy - ry * qx;
    if (std::abs(den) < 1e-300) return false;
    double dx = b0.r - a0.r, dy = b0.v - a0.v;
    s = (dx * qy - dy * qx) / den;
    t = (dx * ry - dy * rx) / den;
    return s >= -1e-12 && s <= 1.0 + 1e-12 && t >= -1e-12 && t <= 1.0 + 1e-12;
}

}  // namespace

std::vector<ArcIntersection> arcs_intersect(const Arc& a, const Arc& b,
                                            const IntersectOptions& opts) {
    if (&a == &b) throw std::invalid_argument("arcs_intersect: arcs must be distinct");
    if (a.side != b.side) throw std::invalid_argument("arcs_intersect: different half-planes");
    std::vector<ArcIntersection> out;
    for (std::size_t i = 0; i + 1 < a.pts.size(); ++i) {
        const auto &a0 = a.pts[i].p, &a1 = a.pts[i + 1].p;
        double rlo = std::min(a0.r, a1.r), rhi = std::max(a0.r, a1.r);
        double vlo = std::min(a0.v, a1.v), vhi = std::max(a0.v, a1.v);
        for (std::size_t j = 0; j + 1 < b.pts.size(); ++j) {
            const auto &b0 = b.pts[j].p, &b1 = b.pts[j + 1].p;
            if (std::max(b0.r, b1.r) < rlo - 1e-12 || std::min(b0.r, b1.r) > rhi + 1e-12 ||
                std::max(b0.v, b1.v) < vlo - 1e-12 || std::min(b0.v, b1.v) > vhi + 1e-12)
                continue;
            double s, t;
            if (!seg_intersect(a0, a1, b0, b1, s, t)) continue;
            ArcIntersection x;
            x.seg_a = i;
            x.seg_b = j;
            x.param_a = a.pts[i].param + s * (a.pts[i + 1].param - a.pts[i].param);
            x.param_b = b.pts[j].param + t * (b.pts[j + 1].param - b.pts[j].param);
            x.point = SectionPoint{a.side, a0.r + s * (a1.r - a0.r), a0.v + s * (a1.v - a0.v)};
            double ux = a1.r - a0.r, uy = a1.v - a0.v, wx = b1.r - b0.r, wy = b1.v - b0.v;
            double cosang = (ux * wx + uy * wy) / (std::hypot(ux, uy) * std::hypot(wx, wy));
            double ang = std::acos(std::abs(std::clamp(cosang, -1.0, 1.0))) * 180.0 / M_PI;
            x.angle_deg = ang;
            x.tangency_warning = ang < opts.tangency_angle_deg;
            out.push_back(x);
        }
    }
    std::vector<ArcIntersection> merged;
    for (auto& x : out) {
        bool dup = false;
        for (auto& y : merged)
            if (gap(x.point, y.point) < 1e-9) { dup = true; break; }
        if (!dup) merged.push_back(x);
    }

    if (a.eval && b.eval) {
        for (auto& x : merged) {
            double pa0 = a.pts[x.seg_a].param, pa1 = a.pts[x.seg_a + 1].param;
            double pb0 = b.pts[x.seg_b].param, pb1 = b.pts[x.seg_b + 1].param;
            SectionPoint A0 = a.pts[x.seg_a].p, A1 = a.pts[x.seg_a + 1].p;
            SectionPoint B0 = b.pts[x.seg_b].p, B1 = b.pts[x.seg_b + 1].p;
            SectionPoint cur = x.point;
            for (int it = 0; it < opts.refine_rounds; ++it) {
                if (gap(A0, A1) < opts.refine_tol && gap(B0, B1) < opts.refine_tol) break;
                auto Am = a.eval(0.5 * (pa0 + pa1));
                auto Bm = b.eval(0.5 * (pb0 + pb1));
                if (!Am || !Bm) break;
                double am = 0.5 * (pa0 + pa1), bm = 0.5 * (pb0 + pb1);
                struct Cand {
                    SectionPoint s0, s1, t0, t1;
                    double a0, a1, b0, b1;
                };
                Cand cands[4] = {{A0, *Am, B0, *Bm, pa0, am, pb0, bm},
                                 {A0, *Am, *Bm, B1, pa0, am, bm, pb1},
                                 {*Am, A1, B0, *Bm, am, pa1, pb0, bm},
                                 {*Am, A1, *Bm, B1, am, pa1, bm, pb1}};
                double s, t;
                bool found = false;
                for (auto& c : cands) {
                    if (seg_intersect(c.s0, c.s1, c.t0, c.t1, s, t)) {
                        A0 = c.s0; A1 = c.s1; B0 = c.t0; B1 = c.t1;
                        pa0 = c.a0; pa1 = c.a1; pb0 = c.b0; pb1 = c.b1;
                        cur = SectionPoint{a.side, A0.r + s * (A1.r - A0.r),
                                           A0.v + s * (A1.v - A0.v)};
                        x.param_a = pa0 + s * (pa1 - pa0);
                        x.param_b = pb0 + t * (pb1 - pb0);
                        found = true;
                        break;
                    }
                }
                if (!found) break;
            }
            x.point = cur;
        }
    }
    return merged;
}

}  // namespace ctbp
