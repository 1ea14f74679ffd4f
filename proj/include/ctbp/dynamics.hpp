#pragma once
#include <array>
#include <cmath>
#include <stdexcept>

#include "ctbp/chart.hpp"

namespace ctbp {

/// Point of the regularized flow. r >= 0 is the configuration scale
/// (r = 0 on the triple-collision manifold M), v the scaled radial
/// velocity, psi the unfolded shape angle, eta = theta_psi * w the
/// regularized shape velocity.
struct McGeheeState {
    double r, v, psi, eta;

    McGeheeState() : r(0), v(0), psi(0), eta(0) {}
    McGeheeState(double r_, double v_, double psi_, double eta_)
        : r(r_), v(v_), psi(psi_), eta(eta_) {}

    std::array<double, 4> as_array() const { return {r, v, psi, eta}; }
    static McGeheeState from_array(const std::array<double, 4>& y) {
        return McGeheeState(y[0], y[1], y[2], y[3]);
    }
};

/// Time-reversal involution: conjugates the flow to its inverse.
inline McGeheeState time_reversal(const McGeheeState& x) {
    return McGeheeState(x.r, -x.v, x.psi, -x.eta);
}

/// Deck transformation of the double cover (same physical point).
inline McGeheeState deck(const McGeheeState& x) {
    return McGeheeState(x.r, x.v, -x.psi, -x.eta);
}

/// Reflection swapping the left and right binaries (psi -> pi - psi); an
/// exact symmetry of the field only when m1 == m3.
inline McGeheeState reflect(const McGeheeState& x) {
    return McGeheeState(x.r, x.v, M_PI - x.psi, -x.eta);
}

/// The regularized vector field and its invariants at a fixed energy level.
class Dynamics {
  public:
    Dynamics(const MassTriple& m, double energy = -1.0) : chart_(m), h_(energy) {
        if (!(energy < 0)) throw std::invalid_argument("energy level must be negative");
    }

    const Chart& chart() const { return chart_; }
    const MassTriple& masses() const { return chart_.masses(); }
    double energy() const { return h_; }

    /// d/dsigma (r, v, psi, eta). Domain error for r < 0.
    McGeheeState field(const McGeheeState& x) const {
        if (x.r < 0) throw std::domain_error("state outside chart: r < 0");
        double tp = chart_.theta_psi(x.psi);
        double tpp = chart_.theta_psipsi(x.psi);
        double phit = tp * tp;
        double th = chart_.theta(x.psi);
        McGeheeState d;
        d.r = phit * x.r * x.v;
        d.v = 0.5 * phit * x.v * x.v + x.eta * x.eta - chart_.P(th);
        d.psi = x.eta;
        d.eta = -tpp * tp * (x.v * x.v - 2.0 * x.r * h_) + tp * chart_.Pp(th)
              - 0.5 * phit * x.v * x.eta;
        return d;
    }

    /// Field restricted to M (r identically 0); keeps orbits exactly on M.
    McGeheeState field_on_m(const McGeheeState& x) const {
        McGeheeState y = x;
        y.r = 0.0;
        McGeheeState d = field(y);
        d.r = 0.0;
        return d;
    }

    /// E = eta^2 + phi (v^2 - 2 r h) - 2 P; zero on the energy-h manifold,
    /// and dE/dsigma = phi v E so E = 0 is invariant.
    double energy_residual(const McGeheeState& x) const {
        double phit = chart_.phit(x.psi);
        return x.eta * x.eta + phit * (x.v * x.v - 2.0 * x.r * h_) - 2.0 * chart_.Pt(x.psi);
    }

    /// Project onto E = 0 by adjusting v (Newton); used for seeding only.
    McGeheeState project_energy(McGeheeState x, int iters = 4) const {
        for (int i = 0; i < iters; ++i) {
            double phit = chart_.phit(x.psi);
            double dEdv = 2.0 * phit * x.v;
            if (std::abs(dEdv) < 1e-14) break;
            x.v -= energy_residual(x) / dEdv;
        }
        return x;
    }

    /// Jacobian of the field, rows d(field)/d(r,v,psi,eta).
    std::array<std::array<double, 4>, 4> jacobian(const McGeheeState& x) const {
        double tp = chart_.theta_psi(x.psi);
        double tpp = chart_.theta_psipsi(x.psi);
        double phit = tp * tp;
        double phitp = 2.0 * tp * tpp;  // d(phit)/dpsi
        double th = chart_.theta(x.psi);
        double Pp = chart_.Pp(th), Ppp = chart_.Ppp(th);
        std::array<std::array<double, 4>, 4> J{};
        // r' = phit r v
        J[0] = {phit * x.v, phit * x.r, phitp * x.r * x.v, 0.0};
        // v' = 1/2 phit v^2 + eta^2 - P
        J[1] = {0.0, phit * x.v, 0.5 * phitp * x.v * x.v - Pp * tp, 2.0 * x.eta};
        // psi' = eta
        J[2] = {0.0, 0.0, 0.0, 1.0};
        // eta' = -tpp tp (v^2 - 2 r h) + tp Pp - 1/2 phit v eta
        // d(tpp tp)/dpsi = tpp^2 - tp^2   (since theta_psipsipsi = -theta_psi)
        double q = x.v * x.v - 2.0 * x.r * h_;
        J[3] = {2.0 * h_ * tpp * tp,
                -2.0 * x.v * tpp * tp - 0.5 * phit * x.eta,
                -(tpp * tpp - tp * tp) * q + tpp * Pp + tp * tp * Ppp - 0.5 * phitp * x.v * x.eta,
                -0.5 * phit * x.v};
        return J;
    }

  private:
    Chart chart_;
    double h_;
};

/// Linearization data at one restpoint on M.
struct EquilibriumInfo {
    McGeheeState state;
    double lambda_r;        ///< eigenvalue of the off-M (homothetic) direction
    double lambda_stable;   ///< on-M, tangent to {E=0}
    double lambda_unstable; ///< on-M, tangent to {E=0}
    std::array<double, 4> dir_homothetic;  ///< (r,v,psi,eta); tangent to {E=0}
    std::array<double, 4> dir_stable_m;    ///< on-M stable eigenvector
    std::array<double, 4> dir_unstable_m;  ///< on-M unstable eigenvector
};

struct Equilibria {
    EquilibriumInfo c;  ///< v(c) < 0 (triple-collision side)
    EquilibriumInfo d;  ///< v(d) > 0 (ejection side); time-reversal image of c
    double theta_star;  ///< central configuration shape angle
    double psi_star;
    double v_star;      ///< v(d) = -v(c)
};

/// Central configuration and the two restpoints on M with eigen-data.
///
/// W' runs from -inf to +inf across (a,b), so the root is bracketed; plain
/// bisection from the symmetric seed converges to machine precision.
inline Equilibria find_equilibria(const Dynamics& dyn) {
    const Chart& ch = dyn.chart();
    double lo = ch.a() + 1e-9 * ch.span(), hi = ch.b() - 1e-9 * ch.span();
    if (!(ch.Wp(lo) < 0 && ch.Wp(hi) > 0))
        throw std::runtime_error("equilibrium bracket failed: W' endpoint signs unexpected");
    for (int it = 0; it < 200 && hi - lo > 2e-16; ++it) {
        double mid = 0.5 * (lo + hi);
        (ch.Wp(mid) < 0 ? lo : hi) = mid;
    }
    double th = 0.5 * (lo + hi);
    double residual = ch.Wp(th);
    if (std::abs(residual) > 1e-6 * ch.W(th))
        throw std::runtime_error("equilibrium root-finder did not converge, last W' = " +
                                 std::to_string(residual));

    Equilibria eq;
    eq.theta_star = th;
    eq.psi_star = ch.psi_of_theta(th);
    eq.v_star = std::sqrt(2.0 * ch.W(th));

    double psis = eq.psi_star;
    double tp = ch.theta_psi(psis), tpp = ch.theta_psipsi(psis);
    double phis = tp * tp;
    double Pps = ch.Pp(th), Ppps = ch.Ppp(th);
    double h = dyn.energy();
    // On-M block eigenvalues solve lam^2 + (phi v/2) lam - K = 0 with
    // K = -(tpp^2 - tp^2) v^2 + tpp P' + tp^2 P''.
    auto fill = [&](double vq) {
        EquilibriumInfo e;
        e.state = McGeheeState(0.0, vq, psis, 0.0);
        e.lambda_r = phis * vq;
        double K = -(tpp * tpp - tp * tp) * vq * vq + tpp * Pps + tp * tp * Ppps;
        double disc = 0.25 * phis * phis * vq * vq + 4.0 * K;
        if (disc <= 0)
            throw std::runtime_error("restpoint not hyperbolic on M");
        double s = std::sqrt(disc);
        e.lambda_unstable = 0.5 * (-0.5 * phis * vq + s);
        e.lambda_stable = 0.5 * (-0.5 * phis * vq - s);
        double nm = std::hypot(1.0, e.lambda_stable);
        e.dir_stable_m = {0.0, 0.0, 1.0 / nm, e.lambda_stable / nm};
        double np = std::hypot(1.0, e.lambda_unstable);
        e.dir_unstable_m = {0.0, 0.0, 1.0 / np, e.lambda_unstable / np};
        // Homothetic direction (1, h/v, 0, 0): tangent to {E=0}, eigenvalue phi*v.
        double hv = h / vq;
        double nh = std::hypot(1.0, hv);
        e.dir_homothetic = {1.0 / nh, hv / nh, 0.0, 0.0};
        return e;
    };
    eq.c = fill(-eq.v_star);
    eq.d = fill(eq.v_star);
    return eq;
}

}  // namespace ctbp
