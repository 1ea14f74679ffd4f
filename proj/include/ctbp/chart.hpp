#pragma once
#include <cmath>

#include "ctbp/masses.hpp"

namespace ctbp {

namespace detail {
// g(x) = x / sin(x) and derivatives, stable at x = 0.
inline double sinc_inv(double x) {
    if (std::abs(x) < 1e-2) {
        double x2 = x * x;
        return 1.0 + x2 / 6.0 + 7.0 * x2 * x2 / 360.0 + 31.0 * x2 * x2 * x2 / 15120.0;
    }
    return x / std::sin(x);
}
inline double sinc_inv_d(double x) {
    if (std::abs(x) < 1e-2) {
        double x2 = x * x;
        return x / 3.0 + 7.0 * x2 * x / 90.0 + 31.0 * x2 * x2 * x / 2520.0;
    }
    double s = std::sin(x);
    return (s - x * std::cos(x)) / (s * s);
}
inline double sinc_inv_dd(double x) {
    if (std::abs(x) < 1e-2) {
        double x2 = x * x;
        return 1.0 / 3.0 + 7.0 * x2 / 30.0 + 31.0 * x2 * x2 / 504.0;
    }
    double s = std::sin(x), c = std::cos(x);
    return (x * s * s - 2.0 * c * (s - x * c)) / (s * s * s);
}
}  // namespace detail

/// Geometry of the shape circle for a given mass triple.
///
/// Configurations with the center of mass fixed form a plane; rescaling by
/// r = sqrt(x^T M x) leaves the unit circle of the mass metric, and the
/// collinear order x1 < x2 < x3 cuts out the arc theta in (a, b).
///   theta = b  <=>  x1 = x2  (left binary collision, symbol L)
///   theta = a  <=>  x2 = x3  (right binary collision, symbol R)
/// W(theta) is the potential on the arc; it has simple poles at both ends,
/// so P(theta) = (theta-a)(b-theta) W(theta) extends analytically with P > 0
/// on [a, b].
///
/// The chart used for integration unfolds the arc through the double cover
///   theta(psi) = a + (b-a) sin^2(psi/2),
/// which turns both collision walls into transverse crossings (psi in pi*Z).
class Chart {
  public:
    explicit Chart(const MassTriple& m) : masses_(m) {
        mu1_ = m.m1 * m.m2 / (m.m1 + m.m2);
        mu2_ = m.m3 * (m.m1 + m.m2);  // total mass = 1
        alpha_ = m.m1 / (m.m1 + m.m2);
        // x3 - x2 = sin(theta)/sqrt(mu2) - alpha cos(theta)/sqrt(mu1)
        //         = KR * sin(theta - a)
        double A = 1.0 / std::sqrt(mu2_), B = -alpha_ / std::sqrt(mu1_);
        KR_ = std::hypot(A, B);
        a_ = std::atan2(-B, A);
        b_ = 0.5 * M_PI;
        // x3 - x1 = (1-alpha) cos(theta)/sqrt(mu1) + sin(theta)/sqrt(mu2)
        double Ag = 1.0 / std::sqrt(mu2_), Bg = (1.0 - alpha_) / std::sqrt(mu1_);
        KG_ = std::hypot(Ag, Bg);
        aG_ = std::atan2(-Bg, Ag);
        c12_ = m.m1 * m.m2 * std::sqrt(mu1_);
        c23_ = m.m2 * m.m3 / KR_;
        c13_ = m.m1 * m.m3;
    }

    const MassTriple& masses() const { return masses_; }
    double a() const { return a_; }
    double b() const { return b_; }
    double span() const { return b_ - a_; }

    /// Pair separations on the unit shape circle (positive inside (a,b)).
    double sep12(double th) const { return std::cos(th) / std::sqrt(mu1_); }
    double sep23(double th) const { return KR_ * std::sin(th - a_); }
    double sep13(double th) const { return KG_ * std::sin(th - aG_); }

    /// Potential on the shape circle. (c23 already carries the 1/KR factor.)
    double W(double th) const {
        return c12_ / std::cos(th) + c23_ / std::sin(th - a_) + c13_ / sep13(th);
    }
    double Wp(double th) const {
        double s1 = std::cos(th);  // = sin(b - th)
        double s2 = std::sin(th - a_);
        double s3 = sep13(th);
        return c12_ * std::sin(th) / (s1 * s1)
             - c23_ * std::cos(th - a_) / (s2 * s2)
             - c13_ * KG_ * std::cos(th - aG_) / (s3 * s3);
    }

    /// P = phi * W with phi = (theta-a)(b-theta); analytic and positive on [a,b].
    double P(double th) const {
        using detail::sinc_inv;
        double ta = th - a_, tb = b_ - th;
        return c12_ * ta * sinc_inv(tb) + c23_ * tb * sinc_inv(ta) + c13_ * phi(th) / sep13(th);
    }
    double Pp(double th) const {
        using namespace detail;
        double ta = th - a_, tb = b_ - th;
        double G = sep13(th), Gp = KG_ * std::cos(th - aG_);
        return c12_ * (sinc_inv(tb) - ta * sinc_inv_d(tb))
             + c23_ * (-sinc_inv(ta) + tb * sinc_inv_d(ta))
             + c13_ * (phip(th) * G - phi(th) * Gp) / (G * G);
    }
    double Ppp(double th) const {
        using namespace detail;
        double ta = th - a_, tb = b_ - th;
        double G = sep13(th), Gp = KG_ * std::cos(th - aG_), Gpp = -G;
        double num = (phipp() * G - phi(th) * Gpp) / (G * G)
                   - 2.0 * Gp * (phip(th) * G - phi(th) * Gp) / (G * G * G);
        return c12_ * (-2.0 * sinc_inv_d(tb) + ta * sinc_inv_dd(tb))
             + c23_ * (-2.0 * sinc_inv_d(ta) + tb * sinc_inv_dd(ta))
             + c13_ * num;
    }

    double phi(double th) const { return (th - a_) * (b_ - th); }
    double phip(double th) const { return (b_ - th) - (th - a_); }
    static double phipp() { return -2.0; }

    // --- psi lift -----------------------------------------------------

    double theta(double psi) const {
        double s = std::sin(0.5 * psi);
        return a_ + (b_ - a_) * s * s;
    }
    double theta_psi(double psi) const { return 0.5 * (b_ - a_) * std::sin(psi); }
    double theta_psipsi(double psi) const { return 0.5 * (b_ - a_) * std::cos(psi); }
    /// phi(theta(psi)) = theta_psi^2
    double phit(double psi) const {
        double t = theta_psi(psi);
        return t * t;
    }
    double Pt(double psi) const { return P(theta(psi)); }

    /// Principal psi in [0, pi] with theta(psi) = th.
    double psi_of_theta(double th) const {
        double u = (th - a_) / (b_ - a_);
        u = std::min(1.0, std::max(0.0, u));
        return 2.0 * std::asin(std::sqrt(u));
    }

    /// Reflection swapping the two binary pairs; an exact symmetry only for
    /// m1 == m3. In theta it is th -> a + b - th, i.e. psi -> pi - psi.
    double reflect_theta(double th) const { return a_ + b_ - th; }

  private:
    MassTriple masses_;
    double mu1_, mu2_, alpha_;
    double a_, b_;
    double KR_, KG_, aG_;
    double c12_, c23_, c13_;
};

}  // namespace ctbp
