#pragma once

#include <algorithm>
#include <cmath>

namespace conjlab {

template <class Real>
struct Interval {
    Real lo{};
    Real hi{};

    Real width() const { return hi - lo; }
    Real mid() const { return (lo + hi) / Real(2); }

    bool contains(Real x, Real tol = Real(0)) const {
        return x >= lo - tol && x <= hi + tol;
    }
    bool strictly_contains(Real x, Real margin = Real(0)) const {
        return x > lo + margin && x < hi - margin;
    }
    bool contains(const Interval& other, Real tol = Real(0)) const {
        return other.lo >= lo - tol && other.hi <= hi + tol;
    }

    Real clamp(Real x) const { return std::min(hi, std::max(lo, x)); }

    Interval intersect(const Interval& other) const {
        return Interval{std::max(lo, other.lo), std::min(hi, other.hi)};
    }
    bool empty() const { return hi < lo; }

    Interval hull(const Interval& other) const {
        return Interval{std::min(lo, other.lo), std::max(hi, other.hi)};
    }
};

// Ball of radius delta around x, taken relative to the ambient interval.  At
// the boundary this is the one-sided neighbourhood; distance-to-boundary
// conventions elsewhere rely on this.
template <class Real>
Interval<Real> relative_ball(Real x, Real delta, const Interval<Real>& ambient) {
    return Interval<Real>{std::max(ambient.lo, x - delta),
                          std::min(ambient.hi, x + delta)};
}

} // namespace conjlab
