#pragma once
#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

namespace ctbp {

using Vec4 = std::array<double, 4>;

inline Vec4 operator+(const Vec4& a, const Vec4& b) {
    return {a[0] + b[0], a[1] + b[1], a[2] + b[2], a[3] + b[3]};
}
inline Vec4 operator-(const Vec4& a, const Vec4& b) {
    return {a[0] - b[0], a[1] - b[1], a[2] - b[2], a[3] - b[3]};
}
inline Vec4 operator*(double s, const Vec4& a) {
    return {s * a[0], s * a[1], s * a[2], s * a[3]};
}
inline double norm(const Vec4& a) {
    return std::sqrt(a[0] * a[0] + a[1] * a[1] + a[2] * a[2] + a[3] * a[3]);
}

/// One accepted Dormand-Prince step with its quartic interpolant.
struct DenseSegment {
    double s0 = 0, s1 = 0;  ///< step endpoints in integration time
    Vec4 r1, r2, r3, r4, r5;

    Vec4 eval(double s) const {
        double h = s1 - s0;
        double t = h == 0 ? 0.0 : (s - s0) / h;
        double t1 = 1.0 - t;
        Vec4 out;
        for (int i = 0; i < 4; ++i)
            out[i] = r1[i] + t * (r2[i] + t1 * (r3[i] + t * (r4[i] + t1 * r5[i])));
        return out;
    }
};

struct StepControl {
    double rtol = 1e-11;
    double atol = 1e-13;
    double h_init = 1e-4;
    double h_min = 1e-14;
    double h_max = 1.0;
};

/// Dormand-Prince 5(4) with FSAL and the standard order-4 continuous output.
class Dopri5 {
  public:
    using Rhs = std::function<Vec4(const Vec4&)>;

    Dopri5(Rhs f, const Vec4& y0, double s0, const StepControl& ctl, int direction = +1)
        : f_(std::move(f)), y_(y0), s_(s0), ctl_(ctl), dir_(direction >= 0 ? 1 : -1) {
        k1_ = f_(y_);
        h_ = ctl_.h_init;
    }

    double time() const { return s_; }
    const Vec4& state() const { return y_; }

    /// Advance one accepted step; returns the dense segment covering it.
    /// Throws on step-size underflow.
    DenseSegment step() {
        for (int attempt = 0; attempt < 64; ++attempt) {
            double h = dir_ * h_;
            Vec4 k2 = f_(y_ + (h * 0.2) * k1_);
            Vec4 k3 = f_(y_ + (h * 3.0 / 40) * k1_ + (h * 9.0 / 40) * k2);
            Vec4 k4 = f_(y_ + (h * 44.0 / 45) * k1_ + (h * -56.0 / 15) * k2 + (h * 32.0 / 9) * k3);
            Vec4 k5 = f_(y_ + (h * 19372.0 / 6561) * k1_ + (h * -25360.0 / 2187) * k2 +
                         (h * 64448.0 / 6561) * k3 + (h * -212.0 / 729) * k4);
            Vec4 k6 = f_(y_ + (h * 9017.0 / 3168) * k1_ + (h * -355.0 / 33) * k2 +
                         (h * 46732.0 / 5247) * k3 + (h * 49.0 / 176) * k4 +
                         (h * -5103.0 / 18656) * k5);
            Vec4 y1 = y_ + (h * 35.0 / 384) * k1_ + (h * 500.0 / 1113) * k3 +
                      (h * 125.0 / 192) * k4 + (h * -2187.0 / 6784) * k5 + (h * 11.0 / 84) * k6;
            Vec4 k7 = f_(y1);
            Vec4 err = (h * 71.0 / 57600) * k1_ + (h * -71.0 / 16695) * k3 +
                       (h * 71.0 / 1920) * k4 + (h * -17253.0 / 339200) * k5 +
                       (h * 22.0 / 525) * k6 + (h * -1.0 / 40) * k7;
            double e = 0;
            for (int i = 0; i < 4; ++i) {
                double sc = ctl_.atol + ctl_.rtol * std::max(std::abs(y_[i]), std::abs(y1[i]));
                double q = err[i] / sc;
                e += q * q;
            }
            e = std::sqrt(e / 4.0);
            if (e <= 1.0) {
                DenseSegment seg;
                seg.s0 = s_;
                seg.s1 = s_ + h;
                Vec4 ydiff = y1 - y_;
                seg.r1 = y_;
                seg.r2 = ydiff;
                seg.r3 = h * k1_ - ydiff;
                seg.r4 = ydiff - h * k7 - seg.r3;
                static const double d1 = -12715105075.0 / 11282082432.0;
                static const double d3 = 87487479700.0 / 32700410799.0;
                static const double d4 = -10690763975.0 / 1880347072.0;
                static const double d5 = 701980252875.0 / 199316789632.0;
                static const double d6 = -1453857185.0 / 822651844.0;
                static const double d7 = 69997945.0 / 29380423.0;
                seg.r5 = h * (d1 * k1_ + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6 + d7 * k7);
                s_ += h;
                y_ = y1;
                k1_ = k7;  // FSAL
                double fac = 0.9 * std::pow(std::max(e, 1e-10), -0.2);
                h_ = std::min(ctl_.h_max, h_ * std::min(5.0, std::max(0.2, fac)));
                return seg;
            }
            double fac = 0.9 * std::pow(e, -0.2);
            h_ *= std::min(1.0, std::max(0.1, fac));
            if (h_ < ctl_.h_min)
                throw std::runtime_error("integrator step-size underflow near sigma=" +
                                         std::to_string(s_));
        }
        throw std::runtime_error("integrator failed to find an acceptable step");
    }

  private:
    Rhs f_;
    Vec4 y_;
    Vec4 k1_;
    double s_;
    double h_;
    StepControl ctl_;
    int dir_;
};

/// Dense trajectory: accepted segments plus interpolation across them.
struct Trajectory {
    std::vector<DenseSegment> segments;
    double s_begin() const { return segments.empty() ? 0 : segments.front().s0; }
    double s_end() const { return segments.empty() ? 0 : segments.back().s1; }

    Vec4 eval(double s) const {
        if (segments.empty()) throw std::runtime_error("empty trajectory");
        // segments are time-ordered in integration direction
        bool fwd = segments.front().s1 >= segments.front().s0;
        std::size_t lo = 0, hi = segments.size();
        while (hi - lo > 1) {
            std::size_t mid = (lo + hi) / 2;
            bool before = fwd ? (s < segments[mid].s0) : (s > segments[mid].s0);
            if (before) hi = mid; else lo = mid;
        }
        return segments[lo].eval(s);
    }
};

}  // namespace ctbp
