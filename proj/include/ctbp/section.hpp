#pragma once
#include <cmath>
#include <optional>
#include <string>

#include "ctbp/dynamics.hpp"
#include "ctbp/integrate.hpp"

namespace ctbp {

/// Half-plane of the Poincare slice: L = left binary collision (theta = b),
/// R = right binary collision (theta = a).
enum class Side { L, R };

inline char side_char(Side s) { return s == Side::L ? 'L' : 'R'; }
inline Side other(Side s) { return s == Side::L ? Side::R : Side::L; }

/// Point on the slice Gamma, intrinsic coordinates (u1, u2) = (r, v).
struct SectionPoint {
    Side side;
    double r;
    double v;

    double u1() const { return r; }
    double u2() const { return v; }
    double v_value() const { return v; }

    bool on_m(double tol = 0.0) const { return r <= tol; }
};

inline SectionPoint reflect(const SectionPoint& p) { return {other(p.side), p.r, p.v}; }
inline SectionPoint time_reversal(const SectionPoint& p) { return {p.side, p.r, -p.v}; }

struct CrossingRecord {
    SectionPoint point;
    double crossing_time = 0;  ///< rescaled sigma-time relative to orbit start
    int crossing_index = 0;    ///< count along the orbit (negative backward)
};

enum class FlowOutcome {
    crossed,              ///< reached the next transverse section crossing
    escaped,              ///< configuration size exceeded the escape radius
    absorbed,             ///< forward orbit converging to triple collision (W^s(c))
    ejection_obstruction, ///< backward orbit converging to triple ejection (W^u(d))
    budget_exceeded,      ///< no event within the time/step budget
};

inline std::string to_string(FlowOutcome o) {
    switch (o) {
        case FlowOutcome::crossed: return "crossed";
        case FlowOutcome::escaped: return "escaped";
        case FlowOutcome::absorbed: return "absorbed";
        case FlowOutcome::ejection_obstruction: return "ejection-obstruction";
        case FlowOutcome::budget_exceeded: return "budget-exceeded";
    }
    return "?";
}

struct FlowOptions {
    double rtol = 1e-11;
    double atol = 1e-13;
    double escape_r = 1e3;      ///< escape radius in rescaled units
    double collapse_r = 1e-8;   ///< triple-collision approach threshold
    double sigma_budget = 4e3;  ///< per-crossing rescaled-time budget
    long step_budget = 400000;
    double tangency_floor = 1e-6;
    bool restrict_to_m = false;  ///< integrate the restricted field on M
};

struct CrossingResult {
    FlowOutcome outcome;
    McGeheeState state;   ///< state at the crossing (valid iff crossed)
    double sigma = 0;     ///< signed integration time used
    Side side = Side::L;
    bool tangency_warning = false;
    double section_residual = 0;  ///< |psi - k*pi| before exact projection
};

/// Embed a section point into the chart: psi at the wall, eta > 0 from the
/// energy relation (eta^2 = 2 P at a wall, independent of r and v).
inline McGeheeState lift(const Dynamics& dyn, const SectionPoint& p) {
    double psi = (p.side == Side::L) ? M_PI : 0.0;
    double eta = std::sqrt(2.0 * dyn.chart().Pt(psi));
    return McGeheeState(p.r, p.v, psi, eta);
}

inline Side side_of_wall(double psi) {
    long k = std::lround(psi / M_PI);
    return (k % 2 != 0) ? Side::L : Side::R;
}

inline SectionPoint project_to_section(const McGeheeState& x) {
    return SectionPoint{side_of_wall(x.psi), x.r, x.v};
}

/// Integrate from `start` until the next transverse wall crossing
/// (psi in pi*Z), in the given time direction (+1 forward, -1 backward).
///
/// The event function sin(psi) is sampled on each accepted step's dense
/// output so that double crossings inside one step are not missed. The
/// located crossing is polished with Newton on the interpolant and then
/// projected exactly onto the wall (psi = k*pi, eta from the energy level).
CrossingResult next_crossing(const Dynamics& dyn, const McGeheeState& start, int direction,
                             const FlowOptions& opts = {});

/// First return map P on Gamma. Precondition: p on Gamma.
CrossingResult poincare_forward(const Dynamics& dyn, const SectionPoint& p,
                                const FlowOptions& opts = {});

/// Backward first return P^{-1}; signals the ejection obstruction distinctly.
CrossingResult poincare_backward(const Dynamics& dyn, const SectionPoint& p,
                                 const FlowOptions& opts = {});

}  // namespace ctbp
