#include "ctbp/section.hpp"

#include <cmath>

namespace ctbp {

namespace {

// Event function for wall crossings: vanishes exactly on psi in pi*Z.
inline double gfun(const Vec4& y) { return std::sin(y[2]); }

struct EventHit {
    double sigma;
    Vec4 y;
};

// Scan one dense segment for a sign change of sin(psi); refine by bisection
// plus Newton on the interpolant. `armed` suppresses the departure wall.
std::optional<EventHit> scan_segment(const DenseSegment& seg, bool& armed, double arm_eps) {
    const int N = 16;
    double h = seg.s1 - seg.s0;
    double sa = seg.s0;
    double ga = gfun(seg.eval(sa));
    for (int i = 1; i <= N; ++i) {
        double sb = seg.s0 + h * i / N;
        double gb = gfun(seg.eval(sb));
        if (!armed) {
            if (std::abs(gb) > arm_eps) armed = true;
            sa = sb; ga = gb;
            continue;
        }
        bool crossed = (ga * gb < 0.0) || (gb == 0.0 && ga != 0.0);
        if (crossed) {
            double lo = sa, hi = sb, glo = ga;
            for (int it = 0; it < 80; ++it) {
                double mid = 0.5 * (lo + hi);
                double gm = gfun(seg.eval(mid));
                if (gm == 0.0) { lo = hi = mid; break; }
                if ((glo < 0) == (gm < 0)) { lo = mid; glo = gm; }
                else hi = mid;
                if (std::abs(hi - lo) < 1e-14 * (std::abs(h) + 1.0)) break;
            }
            double s = 0.5 * (lo + hi);
            // Newton polish: d(sin psi)/ds = eta cos psi on the interpolant.
            for (int it = 0; it < 3; ++it) {
                Vec4 y = seg.eval(s);
                double g = std::sin(y[2]);
                double gp = y[3] * std::cos(y[2]);
                if (std::abs(gp) < 1e-14) break;
                double sn = s - g / gp;
                if ((sn - lo) * (sn - hi) > 0) break;  // keep inside bracket
                s = sn;
            }
            return EventHit{s, seg.eval(s)};
        }
        sa = sb; ga = gb;
    }
    return std::nullopt;
}

}  // namespace

CrossingResult next_crossing(const Dynamics& dyn, const McGeheeState& start, int direction,
                             const FlowOptions& opts) {
    CrossingResult res;
    res.outcome = FlowOutcome::budget_exceeded;

    StepControl ctl;
    ctl.rtol = opts.rtol;
    ctl.atol = opts.atol;
    ctl.h_max = 0.25;

    const bool on_m = opts.restrict_to_m;
    auto rhs = [&dyn, on_m](const Vec4& y) -> Vec4 {
        McGeheeState x = McGeheeState::from_array(y);
        McGeheeState d = on_m ? dyn.field_on_m(x) : dyn.field(x);
        return d.as_array();
    };

    Dopri5 stepper(rhs, start.as_array(), 0.0, ctl, direction);
    bool armed = std::abs(std::sin(start.psi)) > 1e-9;
    const double arm_eps = 1e-9;

    for (long nstep = 0; nstep < opts.step_budget; ++nstep) {
        DenseSegment seg = stepper.step();
        auto hit = scan_segment(seg, armed, arm_eps);
        if (hit) {
            McGeheeState x = McGeheeState::from_array(hit->y);
            res.section_residual = std::abs(std::remainder(x.psi, M_PI));
            long k = std::lround(x.psi / M_PI);
            res.side = (k % 2 != 0) ? Side::L : Side::R;
            // Exact projection: psi on the wall, |eta| from the energy level.
            x.psi = k * M_PI;
            double eta_mag = std::sqrt(2.0 * dyn.chart().Pt(x.psi));
            x.eta = (x.eta >= 0 ? eta_mag : -eta_mag);
            if (on_m) x.r = 0.0;
            res.state = x;
            res.sigma = hit->sigma;
            res.outcome = FlowOutcome::crossed;
            res.tangency_warning = std::abs(x.eta) < opts.tangency_floor;
            return res;
        }
        const Vec4& y = stepper.state();
        if (y[0] > opts.escape_r) {
            res.outcome = FlowOutcome::escaped;
            res.sigma = stepper.time();
            res.state = McGeheeState::from_array(y);
            return res;
        }
        if (!on_m && y[0] < opts.collapse_r) {
            // Near M and nearly stationary: the orbit is funneling into a
            // restpoint. Forward this is absorption into triple collision,
            // backward the ejection obstruction. A small field magnitude
            // distinguishes the funnel from wall-shadowing orbits at tiny r.
            Vec4 f = rhs(y);
            if (norm(f) < 1e-4) {
                bool toward = (direction > 0 && y[1] < 0) || (direction < 0 && y[1] > 0);
                if (toward) {
                    res.outcome = direction > 0 ? FlowOutcome::absorbed
                                                : FlowOutcome::ejection_obstruction;
                    res.sigma = stepper.time();
                    res.state = McGeheeState::from_array(y);
                    return res;
                }
            }
        }
        if (std::abs(stepper.time()) > opts.sigma_budget) {
            res.sigma = stepper.time();
            res.state = McGeheeState::from_array(stepper.state());
            return res;
        }
    }
    res.sigma = stepper.time();
    res.state = McGeheeState::from_array(stepper.state());
    return res;
}

CrossingResult poincare_forward(const Dynamics& dyn, const SectionPoint& p,
                                const FlowOptions& opts) {
    return next_crossing(dyn, lift(dyn, p), +1, opts);
}

CrossingResult poincare_backward(const Dynamics& dyn, const SectionPoint& p,
                                 const FlowOptions& opts) {
    return next_crossing(dyn, lift(dyn, p), -1, opts);
}

}  // namespace ctbp
