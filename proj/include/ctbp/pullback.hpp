#pragma once
#include <optional>
#include <string>
#include <vector>

#include "ctbp/manifolds.hpp"

namespace ctbp {

/// The four geometric quantities plus provenance.
struct Quantities {
    int lc = 0, rc = 0;
    int l_cap = 0, r_cap = 0;
    bool l_cap_is_lower_bound = false;  ///< pullback budget exceeded
    bool r_cap_is_lower_bound = false;
    bool ambiguous_first_crossing = false;
    std::vector<Side> word_lc, word_rc;           ///< branch words (backward order)
    std::vector<std::string> trace_l, trace_r;    ///< per-generation pullback log

    void check() const;  ///< throws NumericsInconsistency on violated bounds
};

/// Segment of an arc between consecutive crossings with the ejection arcs,
/// classified per the pullback case analysis.
enum class SegmentCase {
    both_on_m,          ///< case 1: both endpoints on M, no ejection-arc crossing
    one_crossing,       ///< case 2: one endpoint on M, the other on EL*/ER*
    between_crossings,  ///< case 3: both endpoints on EL*/ER*
};

struct ArcSegment {
    Arc arc;  ///< the segment as its own arc (labels on both ends)
    SegmentCase cls;
    bool start_on_m, end_on_m;
};

struct SegmentedArc {
    Side side;
    std::vector<ArcSegment> segments;
    std::vector<ArcIntersection> splits;
};

struct PullbackOptions {
    double refill_distance = 1e-2;  ///< densify this close to an ejection crossing
    int refill_levels = 20;
    double gap_budget = 2e-3;
    int refine_rounds = 24;
    int budget = 64;  ///< max pullbacks before lower-bound mode
    FlowOptions flow;
    /// test hook: replaces P^{-1}; nullopt = point does not come back
    std::function<std::optional<SectionPoint>(const SectionPoint&)> map_override;
};

/// Split an arc at its crossings with the same-side ejection arc and
/// classify the pieces.
SegmentedArc segment_arc(const Arc& arc, const Arc& ejection_same_side,
                         const IntersectOptions& iopts = {});

/// Pull one segment back through P^{-1} (the case-1/2/3 rules). M-endpoint
/// labels are deepened along the W^s(d) branch runs; an ejection-crossing
/// endpoint becomes L*d or R*d on the landing half-plane.
Arc pull_back_segment(const Dynamics& dyn, const MPointTable& pts, const ArcSegment& seg,
                      const PullbackOptions& opts = {});

/// Full arc pullback: every segment mapped by the case rules.
std::vector<Arc> pull_back_arc(const Dynamics& dyn, const MPointTable& pts,
                               const SegmentedArc& seg, const PullbackOptions& opts = {});

/// One primary-segment pullback family (PLS or PRS side).
struct PullbackFamily {
    std::vector<Arc> arcs;   ///< arcs[0] = primary segment, arcs[k] = k-th pullback
    int first_crossing = -1; ///< generation whose arc meets an ejection arc
    bool budget_exceeded = false;
    std::vector<ArcIntersection> hits;  ///< intersections at the crossing generation
    std::vector<std::string> trace;
};

PullbackFamily iterate_pullbacks(const Dynamics& dyn, const MPointTable& pts, const Arc& lcrc,
                                 const Arc& el, const Arc& er, const PullbackOptions& opts = {});

/// Counting loop on an explicit starting segment (generation 0).
PullbackFamily iterate_from_segment(const Dynamics& dyn, const MPointTable& pts,
                                    const ArcSegment& seg0, const Arc& el, const Arc& er,
                                    const PullbackOptions& opts = {});

/// All arcs and quantities for one mass triple.
struct GeometryResult {
    MPointTable points;
    Arc lc_arc, rc_arc, el_arc, er_arc;
    PullbackFamily family_l, family_r;
    Quantities q;
};

struct GeometryOptions {
    BranchOptions branch;
    SeedArcOptions seed;
    PullbackOptions pull;
    IntersectOptions intersect;
};

/// End-to-end: equilibria, branches, seed arcs, pullback iteration.
GeometryResult compute_geometry(const Dynamics& dyn, const GeometryOptions& opts = {});

/// Convenience wrapper returning only the quantities.
Quantities compute_intersection_counts(const Dynamics& dyn, const GeometryOptions& opts = {});

}  // namespace ctbp
