#pragma once
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ctbp/section.hpp"

namespace ctbp {

/// Named points of M /\ Gamma. Reading convention: "Lc" is the point on L
/// whose forward orbit on M limits to c (the paper's L*c); "dL" is the first
/// crossing on L of d's unstable branch on M (the paper's dL*).
enum class Anchor { Lc, Ld, Rc, Rd, cL, cR, dL, dR };

std::string to_string(Anchor a);

struct EndpointLabel {
    enum class Kind { anchor, pullback, free_end };
    Kind kind = Kind::free_end;
    Anchor anchor = Anchor::Lc;
    int depth = 0;  ///< k in P^{-k}(anchor); 0 for the anchor itself

    static EndpointLabel at(Anchor a) { return {Kind::anchor, a, 0}; }
    static EndpointLabel pulled(Anchor a, int k) { return {Kind::pullback, a, k}; }
    static EndpointLabel free() { return {}; }
    std::string str() const;
};

/// Itinerary of one manifold branch on M.
struct BranchItinerary {
    enum class Terminal { down_leg, heteroclinic, budget };
    std::vector<Side> word;              ///< letters in integration order
    std::vector<SectionPoint> crossings; ///< r = 0 points, same order
    Terminal terminal = Terminal::budget;
    Side leg = Side::L;                  ///< valid for down_leg
    int alternating_length = 0;
};

struct BranchOptions {
    double seed_eps = 1e-8;
    int max_crossings = 96;
    double v_abort_factor = 14.0;   ///< stop once |v| exceeds this times v*
    double heteroclinic_tol = 1e-6;
    FlowOptions flow;
};

/// Follow one 1-dimensional manifold branch inside M, recording its wall
/// crossings. `eq` is the restpoint, `dir` the on-M eigenvector branch
/// (+/- dir_stable_m or dir_unstable_m), `time_dir` +1 for unstable
/// (forward) and -1 for stable (backward) globalization.
BranchItinerary branch_on_m(const Dynamics& dyn, const Equilibria& eq,
                            const EquilibriumInfo& at, std::array<double, 4> dir,
                            int time_dir, const BranchOptions& opts = {});

/// The eight labeled points of M /\ Gamma plus the two W^s(d) backward
/// branch runs (whose crossings are the pullback anchors P^{-k}(L*d) etc.).
struct MPointTable {
    Equilibria eq;
    BranchItinerary ws_d_branch_L;  ///< W^s(d) branch ending ...Ld (backward run)
    BranchItinerary ws_d_branch_R;  ///< W^s(d) branch ending ...Rd
    BranchItinerary wu_c_plus, wu_c_minus;   ///< W^u(c) forward runs
    BranchItinerary wu_d_plus, wu_d_minus;   ///< W^u(d) forward runs (on M)
    BranchItinerary ws_c_plus, ws_c_minus;   ///< W^s(c) backward runs (on M)

    SectionPoint anchor(Anchor a) const;
    /// P^{-k}(L*d) / P^{-k}(R*d) from the stored branch runs.
    SectionPoint pullback_of_d_anchor(Anchor a, int k) const;
};

MPointTable compute_m_points(const Dynamics& dyn, const BranchOptions& opts = {});

struct LcRcResult {
    int lc = 0, rc = 0;
    BranchItinerary branch_lc, branch_rc;
    bool heteroclinic = false;
};

/// Degenerate configuration W^u(c) = W^s(d) on M; the quantities are
/// undefined there and callers map this to a distinct exit status.
struct HeteroclinicError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct NumericsInconsistency : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// ell_C and r_C from the two W^s(d) branches. Throws HeteroclinicError in
/// the degenerate case and NumericsInconsistency if the paper bounds
/// (ell_C, r_C >= 2, |ell_C - r_C| <= 1) fail numerically.
LcRcResult compute_lc_rc(const Dynamics& dyn, const MPointTable& pts);

// ---------------------------------------------------------------------------

struct ArcPoint {
    double param;  ///< seed angle (seed arcs) or source param (pullbacks)
    SectionPoint p;
};

/// Oriented polyline trace of a manifold on one half-plane, with exact
/// re-evaluation for refinement near intersections.
struct Arc {
    Side side = Side::L;
    std::vector<ArcPoint> pts;
    EndpointLabel start_label, end_label;
    double gap_budget = 1e-3;
    /// exact parametric re-evaluation; empty result = point unavailable
    /// (crossed to the other side / obstruction)
    std::function<std::optional<SectionPoint>(double)> eval;

    std::size_t size() const { return pts.size(); }
    double length() const;
};

enum class SeedArcKind { LC, RC, EL, ER };

struct SeedArcOptions {
    double seed_eps = 1e-6;
    double gap_budget = 1e-3;
    double turn_budget_deg = 15.0;
    int max_depth = 28;
    int initial_samples = 65;
    FlowOptions flow;
};

/// First Gamma-trace of the triple-collision stable manifold (LC/RC,
/// backward from c) or of the ejection manifold (EL/ER, forward from d).
Arc seed_arc(const Dynamics& dyn, const MPointTable& pts, SeedArcKind kind,
             const SeedArcOptions& opts = {});

struct ArcIntersection {
    SectionPoint point;
    double param_a, param_b;
    std::size_t seg_a, seg_b;
    double angle_deg;       ///< crossing angle
    bool tangency_warning;  ///< angle below threshold
};

struct IntersectOptions {
    double refine_tol = 1e-10;
    int refine_rounds = 60;
    double tangency_angle_deg = 0.5;
};

/// All transverse polyline intersections of two arcs on the same half-plane,
/// refined by bisection through the arcs' exact evaluators when available.
std::vector<ArcIntersection> arcs_intersect(const Arc& a, const Arc& b,
                                            const IntersectOptions& opts = {});

}  // namespace ctbp
