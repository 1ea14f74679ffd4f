#pragma once
#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

namespace ctbp {

/// Normalized mass triple for the collinear problem, bodies ordered
/// x1 < x2 < x3 on the line. m1+m2+m3 must equal 1.
struct MassTriple {
    double m1, m2, m3;

    MassTriple(double a, double b, double c) : m1(a), m2(b), m3(c) { validate(); }

    static MassTriple equal() { return MassTriple(1.0 / 3, 1.0 / 3, 1.0 / 3); }

    /// Build from arbitrary positive masses, rescaling to unit total.
    static MassTriple normalized(double a, double b, double c) {
        double s = a + b + c;
        if (!(s > 0)) throw std::invalid_argument("masses must be positive");
        return MassTriple(a / s, b / s, c / s);
    }

    void validate() const {
        if (!(m1 > 0) || !(m2 > 0) || !(m3 > 0))
            throw std::invalid_argument("masses must be strictly positive");
        if (std::abs(m1 + m2 + m3 - 1.0) > 1e-12)
            throw std::invalid_argument("masses must sum to 1 (got " +
                                        std::to_string(m1 + m2 + m3) + ")");
    }

    bool symmetric() const { return std::abs(m1 - m3) < 1e-14; }

    std::array<double, 3> as_array() const { return {m1, m2, m3}; }
};

}  // namespace ctbp
