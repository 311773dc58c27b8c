#pragma once

#include <cmath>
#include <sstream>
#include <utility>

#include "conjlab/errors.hpp"

namespace conjlab {

inline constexpr double kTripleGapFloor = 1e-13;

// Signed logarithmic ratio distortion of a monotone h on an ordered triple:
// log of (h-gap ratio) / (gap ratio).  Affine h gives exactly zero, and the
// quantity is additive under composition.
template <class Real>
Real signed_log_ratio_distortion(Real x, Real y, Real z, Real hx, Real hy, Real hz) {
    Real g1 = y - x, g2 = z - y;
    if (!(g1 > Real(kTripleGapFloor)) || !(g2 > Real(kTripleGapFloor))) {
        std::ostringstream os;
        os << "triple gaps " << static_cast<double>(g1) << ", " << static_cast<double>(g2)
           << " below resolution";
        throw DegenerateTriple(os.str());
    }
    Real h1 = hy - hx, h2 = hz - hy;
    if (h1 == Real(0) || h2 == Real(0) || (h1 > Real(0)) != (h2 > Real(0))) {
        std::ostringstream os;
        os << "image gaps " << static_cast<double>(h1) << ", " << static_cast<double>(h2)
           << " not strictly monotone";
        throw DegenerateTriple(os.str());
    }
    return std::log(std::abs(h2) / std::abs(h1)) - std::log(g2 / g1);
}

template <class Real>
Real log_ratio_distortion(Real x, Real y, Real z, Real hx, Real hy, Real hz) {
    return std::abs(signed_log_ratio_distortion(x, y, z, hx, hy, hz));
}

// Ratio distortion measured against gap ratios raised to alpha; alpha = 1
// recovers the plain version.
template <class Real>
Real alpha_ratio_distortion(Real x, Real y, Real z, Real Fx, Real Fy, Real Fz, Real alpha) {
    Real g1 = y - x, g2 = z - y;
    if (!(g1 > Real(kTripleGapFloor)) || !(g2 > Real(kTripleGapFloor)))
        throw DegenerateTriple("triple gaps below resolution");
    Real h1 = Fy - Fx, h2 = Fz - Fy;
    if (h1 == Real(0) || h2 == Real(0) || (h1 > Real(0)) != (h2 > Real(0)))
        throw DegenerateTriple("image gaps not strictly monotone");
    return std::abs(std::log(std::abs(h2) / std::abs(h1)) - alpha * std::log(g2 / g1));
}

// Distortion of the composition h2 after h1 on one triple.  The signed
// distortions add exactly, so the absolute distortion is subadditive; the
// second component is the subadditivity slack, nonnegative up to rounding.
template <class Real, class H1, class H2>
std::pair<Real, Real> lrd_chain(H1&& h1, H2&& h2, Real x, Real y, Real z) {
    Real hx = h1(x), hy = h1(y), hz = h1(z);
    Real kx = h2(hx), ky = h2(hy), kz = h2(hz);
    Real a = signed_log_ratio_distortion(x, y, z, hx, hy, hz);
    Real b = signed_log_ratio_distortion(hx, hy, hz, kx, ky, kz);
    Real c = signed_log_ratio_distortion(x, y, z, kx, ky, kz);
    return {std::abs(c), std::abs(a) + std::abs(b) - std::abs(c)};
}

} // namespace conjlab
