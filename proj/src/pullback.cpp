#include "ctbp/pullback.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

namespace ctbp {

void Quantities::check() const {
    if (lc < 2 || rc < 2)
        throw NumericsInconsistency("ell_C, r_C >= 2 violated");
    if (std::abs(lc - rc) > 1)
        throw NumericsInconsistency("|ell_C - r_C| <= 1 violated");
    if (l_cap < 1 || r_cap < 1)
        throw NumericsInconsistency("ell_cap, r_cap >= 1 violated");
}

namespace {

double gap2(const SectionPoint& a, const SectionPoint& b) {
    return std::hypot(a.r - b.r, a.v - b.v);
}

double arclen_to(const Arc& a, std::size_t seg, const SectionPoint& pt) {
    double s = 0;
    for (std::size_t i = 0; i + 1 < a.pts.size() && i < seg; ++i)
        s += gap2(a.pts[i].p, a.pts[i + 1].p);
    if (seg < a.pts.size()) s += gap2(a.pts[seg].p, pt);
    return s;
}

}  // namespace

SegmentedArc segment_arc(const Arc& arc, const Arc& ejection_same_side,
                         const IntersectOptions& iopts) {
    SegmentedArc out;
    out.side = arc.side;
    out.splits = arcs_intersect(arc, ejection_same_side, iopts);
    std::sort(out.splits.begin(), out.splits.end(),
              [&](const ArcIntersection& x, const ArcIntersection& y) {
                  return arclen_to(arc, x.seg_a, x.point) < arclen_to(arc, y.seg_a, y.point);
              });

    auto endpoint_on_m = [](const EndpointLabel& l) {
        return l.kind != EndpointLabel::Kind::free_end;
    };

    std::size_t from_idx = 0;
    EndpointLabel from_label = arc.start_label;
    bool from_m = endpoint_on_m(arc.start_label);
    double from_param = arc.pts.empty() ? 0.0 : arc.pts.front().param;
    std::optional<SectionPoint> from_pt;
    if (!arc.pts.empty()) from_pt = arc.pts.front().p;

    auto flush = [&](std::size_t upto_idx, const std::optional<ArcIntersection>& split,
                     const EndpointLabel& end_label, bool end_m) {
        ArcSegment seg;
        seg.arc.side = arc.side;
        seg.arc.gap_budget = arc.gap_budget;
        seg.arc.eval = arc.eval;
        seg.arc.start_label = from_label;
        seg.arc.end_label = end_label;
        if (from_pt) seg.arc.pts.push_back({from_param, *from_pt});
        for (std::size_t i = from_idx; i <= upto_idx && i < arc.pts.size(); ++i) {
            if (from_pt && gap2(arc.pts[i].p, *from_pt) < 1e-13) continue;
            seg.arc.pts.push_back(arc.pts[i]);
        }
        if (split) seg.arc.pts.push_back({split->param_a, split->point});
        seg.start_on_m = from_m;
        seg.end_on_m = end_m;
        if (from_m && end_m) seg.cls = SegmentCase::both_on_m;
        else if (from_m || end_m) seg.cls = SegmentCase::one_crossing;
        else seg.cls = SegmentCase::between_crossings;
        if (seg.arc.pts.size() >= 2) out.segments.push_back(std::move(seg));
    };

    for (const auto& sp : out.splits) {
        flush(sp.seg_a, sp, EndpointLabel::free(), false);
        from_idx = sp.seg_a + 1;
        from_label = EndpointLabel::free();
        from_m = false;
        from_param = sp.param_a;
        from_pt = sp.point;
    }
    if (arc.pts.size() >= 2)
        flush(arc.pts.size() - 1, std::nullopt, arc.end_label, endpoint_on_m(arc.end_label));
    return out;
}

namespace {

EndpointLabel deepen(const EndpointLabel& l) {
    if (l.kind == EndpointLabel::Kind::free_end)
        throw std::logic_error("cannot deepen a free endpoint");
    Anchor root = l.anchor;
    int depth = (l.kind == EndpointLabel::Kind::anchor) ? 0 : l.depth;
    if (root != Anchor::Ld && root != Anchor::Rd)
        throw NumericsInconsistency("pullback endpoint rooted at " + to_string(root) +
                                    " is not on a tracked W^s(d) branch");
    return EndpointLabel::pulled(root, depth + 1);
}

SectionPoint label_point(const MPointTable& pts, const EndpointLabel& l) {
    if (l.kind == EndpointLabel::Kind::anchor) return pts.anchor(l.anchor);
    if (l.kind == EndpointLabel::Kind::pullback)
        return pts.pullback_of_d_anchor(l.anchor, l.depth);
    throw std::logic_error("free endpoint has no labeled point");
}

}  // namespace

Arc pull_back_segment(const Dynamics& dyn, const MPointTable& pts, const ArcSegment& seg,
                      const PullbackOptions& opts) {
    const Arc& src = seg.arc;
    if (src.pts.size() < 2)
        throw std::invalid_argument("segment too short to pull back");

    // Densify toward any ejection-crossing endpoint: images stretch toward
    // the d-branch there and uniform sampling under-resolves.
    std::vector<ArcPoint> source = src.pts;
    auto densify_toward = [&](bool at_end) {
        if (!src.eval) return;
        std::vector<ArcPoint> extra;
        const ArcPoint& edge = at_end ? source.back() : source[0];
        const ArcPoint& inner = at_end ? source[source.size() - 2] : source[1];
        for (int lev = 1; lev <= opts.refill_levels; ++lev) {
            double pm = edge.param + (inner.param - edge.param) * std::pow(0.5, lev);
            auto e = src.eval(pm);
            if (e && gap2(*e, edge.p) < opts.refill_distance) extra.push_back({pm, *e});
        }
        if (at_end) source.insert(source.end() - 1, extra.begin(), extra.end());
        else source.insert(source.begin() + 1, extra.begin(), extra.end());
        bool inc = src.pts.front().param < src.pts.back().param;
        std::sort(source.begin(), source.end(), [inc](const ArcPoint& x, const ArcPoint& y) {
            return inc ? x.param < y.param : x.param > y.param;
        });
    };
    if (!seg.end_on_m) densify_toward(true);
    if (!seg.start_on_m) densify_toward(false);

    auto backward = [&dyn, &opts](const SectionPoint& p) -> std::optional<SectionPoint> {
        if (opts.map_override) return opts.map_override(p);
        auto res = poincare_backward(dyn, p, opts.flow);
        if (res.outcome == FlowOutcome::ejection_obstruction)
            throw NumericsInconsistency(
                "pullback hit the ejection obstruction at an interior point; "
                "segmentation too coarse");
        if (res.outcome != FlowOutcome::crossed) return std::nullopt;
        return project_to_section(res.state);
    };

    std::vector<ArcPoint> img;
    std::vector<Side> sides;
    // endpoints are attached from labels; only map the open interior
    for (std::size_t i = 1; i + 1 < source.size(); ++i) {
        const SectionPoint& p = source[i].p;
        if (p.r <= 0) continue;
        auto q = backward(p);
        if (!q) continue;
        img.push_back({source[i].param, *q});
        sides.push_back(q->side);
    }
    if (img.size() < 2)
        throw NumericsInconsistency("segment pullback produced too few points");
    // Points sampled marginally past a declared ejection crossing pull back
    // to the other half-plane; such flips may only form a short run adjacent
    // to that crossing end. A flip in the interior means a missed crossing.
    std::size_t nL = 0;
    for (auto s : sides) nL += (s == Side::L);
    Side major = (2 * nL >= sides.size()) ? Side::L : Side::R;
    std::size_t window = std::max<std::size_t>(12, img.size() / 6);
    std::size_t head = 0, tail = 0;
    if (!seg.end_on_m) {
        // truncate at the first off-side point inside the crossing layer
        std::size_t lo = sides.size() > window ? sides.size() - window : 0;
        for (std::size_t i = lo; i < sides.size(); ++i)
            if (sides[i] != major) { tail = sides.size() - i; break; }
    }
    if (!seg.start_on_m) {
        std::size_t hi = std::min(window, sides.size());
        for (std::size_t i = hi; i-- > 0;)
            if (sides[i] != major) { head = i + 1; break; }
    }
    for (std::size_t i = head; i + tail < sides.size(); ++i)
        if (sides[i] != major) {
            std::string pat;
            for (auto s : sides) pat += side_char(s);
            throw NumericsInconsistency("segment pullback split across half-planes: " + pat);
        }
    img.erase(img.end() - tail, img.end());
    img.erase(img.begin(), img.begin() + head);
    if (img.size() < 2)
        throw NumericsInconsistency("segment pullback produced too few points");
    std::optional<Side> landing = major;

    Arc out;
    out.side = *landing;
    out.gap_budget = opts.gap_budget;

    Anchor d_anchor = (*landing == Side::L) ? Anchor::Ld : Anchor::Rd;
    SectionPoint start_pt, end_pt;
    if (seg.start_on_m) {
        out.start_label = deepen(src.start_label);
        start_pt = label_point(pts, out.start_label);
    } else {
        out.start_label = EndpointLabel::at(d_anchor);
        start_pt = pts.anchor(d_anchor);
    }
    if (seg.end_on_m) {
        out.end_label = deepen(src.end_label);
        end_pt = label_point(pts, out.end_label);
    } else {
        out.end_label = EndpointLabel::at(d_anchor);
        end_pt = pts.anchor(d_anchor);
    }

    out.pts.push_back({img.front().param, start_pt});
    for (auto& m : img) out.pts.push_back(m);
    out.pts.push_back({img.back().param, end_pt});

    if (src.eval) {
        auto src_eval = src.eval;
        FlowOptions fo = opts.flow;
        Side want = *landing;
        Dynamics dcopy = dyn;
        auto override = opts.map_override;
        out.eval = [src_eval, fo, want, dcopy, override](double t) -> std::optional<SectionPoint> {
            auto p = src_eval(t);
            if (!p || p->r <= 0) return std::nullopt;
            std::optional<SectionPoint> q;
            if (override) {
                q = override(*p);
            } else {
                auto res = poincare_backward(dcopy, *p, fo);
                if (res.outcome == FlowOutcome::crossed) q = project_to_section(res.state);
            }
            if (!q || q->side != want) return std::nullopt;
            return q;
        };
    }

    if (out.eval) {
        for (int round = 0; round < opts.refine_rounds; ++round) {
            bool changed = false;
            std::vector<ArcPoint> next;
            next.reserve(out.pts.size() * 2);
            for (std::size_t i = 0; i < out.pts.size(); ++i) {
                next.push_back(out.pts[i]);
                if (i + 1 >= out.pts.size()) break;
                const ArcPoint& A = out.pts[i];
                const ArcPoint& B = out.pts[i + 1];
                if (gap2(A.p, B.p) > opts.gap_budget && std::abs(B.param - A.param) > 1e-13) {
                    auto pm = out.eval(0.5 * (A.param + B.param));
                    if (pm) {
                        next.push_back({0.5 * (A.param + B.param), *pm});
                        changed = true;
                    }
                }
            }
            out.pts.swap(next);
            if (!changed) break;
        }
    }
    return out;
}

std::vector<Arc> pull_back_arc(const Dynamics& dyn, const MPointTable& pts,
                               const SegmentedArc& seg, const PullbackOptions& opts) {
    std::vector<Arc> out;
    out.reserve(seg.segments.size());
    for (const auto& s : seg.segments) out.push_back(pull_back_segment(dyn, pts, s, opts));
    return out;
}

PullbackFamily iterate_from_segment(const Dynamics& dyn, const MPointTable& pts,
                                    const ArcSegment& seg0, const Arc& el, const Arc& er,
                                    const PullbackOptions& opts) {
    PullbackFamily fam;
    fam.arcs.push_back(seg0.arc);
    fam.trace.push_back("gen 0: segment on " + std::string(1, side_char(seg0.arc.side)) +
                        " from " + seg0.arc.start_label.str() + " to " +
                        seg0.arc.end_label.str());

    ArcSegment current = seg0;
    for (int k = 1; k <= opts.budget; ++k) {
        Arc img = pull_back_segment(dyn, pts, current, opts);
        fam.arcs.push_back(img);
        const Arc& e_here = (img.side == Side::L) ? el : er;
        auto hits = arcs_intersect(img, e_here);
        fam.trace.push_back("gen " + std::to_string(k) + ": on " +
                            std::string(1, side_char(img.side)) + ", " + img.start_label.str() +
                            " -> " + img.end_label.str() + ", " + std::to_string(hits.size()) +
                            " ejection-arc hits");
        if (!hits.empty()) {
            fam.first_crossing = k;
            fam.hits = hits;
            return fam;
        }
        ArcSegment nxt;
        nxt.arc = img;
        nxt.cls = SegmentCase::both_on_m;
        nxt.start_on_m = true;
        nxt.end_on_m = true;
        current = nxt;
    }
    fam.budget_exceeded = true;
    fam.first_crossing = opts.budget;
    return fam;
}

PullbackFamily iterate_pullbacks(const Dynamics& dyn, const MPointTable& pts, const Arc& lcrc,
                                 const Arc& el, const Arc& er, const PullbackOptions& opts) {
    const Arc& own_e = (lcrc.side == Side::L) ? el : er;

    SegmentedArc sa = segment_arc(lcrc, own_e);
    if (sa.splits.empty())
        throw NumericsInconsistency("collision arc does not meet the ejection arc");
    const ArcSegment* primary = nullptr;
    for (auto& s : sa.segments)
        if (s.end_on_m && s.cls == SegmentCase::one_crossing &&
            s.arc.end_label.kind == EndpointLabel::Kind::anchor &&
            (s.arc.end_label.anchor == Anchor::Ld || s.arc.end_label.anchor == Anchor::Rd))
            primary = &s;
    if (!primary)
        throw NumericsInconsistency("no primary segment between L*d/R*d and the ejection arc");

    // orient from the d-anchor to the crossing
    ArcSegment seg = *primary;
    std::reverse(seg.arc.pts.begin(), seg.arc.pts.end());
    std::swap(seg.arc.start_label, seg.arc.end_label);
    std::swap(seg.start_on_m, seg.end_on_m);
    return iterate_from_segment(dyn, pts, seg, el, er, opts);
}

GeometryResult compute_geometry(const Dynamics& dyn, const GeometryOptions& opts) {
    GeometryResult g;
    g.points = compute_m_points(dyn, opts.branch);
    LcRcResult lr = compute_lc_rc(dyn, g.points);

    g.lc_arc = seed_arc(dyn, g.points, SeedArcKind::LC, opts.seed);
    g.rc_arc = seed_arc(dyn, g.points, SeedArcKind::RC, opts.seed);
    g.el_arc = seed_arc(dyn, g.points, SeedArcKind::EL, opts.seed);
    g.er_arc = seed_arc(dyn, g.points, SeedArcKind::ER, opts.seed);

    g.family_l = iterate_pullbacks(dyn, g.points, g.lc_arc, g.el_arc, g.er_arc, opts.pull);
    g.family_r = iterate_pullbacks(dyn, g.points, g.rc_arc, g.el_arc, g.er_arc, opts.pull);

    g.q.lc = lr.lc;
    g.q.rc = lr.rc;
    g.q.word_lc = lr.branch_lc.word;
    g.q.word_rc = lr.branch_rc.word;
    g.q.l_cap = g.family_l.first_crossing;
    g.q.r_cap = g.family_r.first_crossing;
    g.q.l_cap_is_lower_bound = g.family_l.budget_exceeded;
    g.q.r_cap_is_lower_bound = g.family_r.budget_exceeded;
    g.q.trace_l = g.family_l.trace;
    g.q.trace_r = g.family_r.trace;
    for (auto& h : g.family_l.hits) g.q.ambiguous_first_crossing |= h.tangency_warning;
    for (auto& h : g.family_r.hits) g.q.ambiguous_first_crossing |= h.tangency_warning;
    g.q.check();
    return g;
}

Quantities compute_intersection_counts(const Dynamics& dyn, const GeometryOptions& opts) {
    return compute_geometry(dyn, opts).q;
}

}  // namespace ctbp
