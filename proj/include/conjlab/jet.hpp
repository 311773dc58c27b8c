#pragma once

#include <cmath>

namespace conjlab {

// Value and first three derivatives of a scalar function at a point.  Map
// families carry closed-form jets per branch; compositions (iterates, smooth
// conjugations) combine them with the chain rule, so no finite differencing
// enters derivative or Schwarzian computations.
template <class Real>
struct Jet3 {
    Real f{};
    Real d1{};
    Real d2{};
    Real d3{};
};

// Jet of outer∘inner, where `outer` is the jet of the outer function taken at
// inner.f and `inner` is the jet of the inner function at the base point.
template <class Real>
Jet3<Real> compose(const Jet3<Real>& outer, const Jet3<Real>& inner) {
    Jet3<Real> r;
    r.f = outer.f;
    r.d1 = outer.d1 * inner.d1;
    r.d2 = outer.d2 * inner.d1 * inner.d1 + outer.d1 * inner.d2;
    r.d3 = outer.d3 * inner.d1 * inner.d1 * inner.d1
         + Real(3) * outer.d2 * inner.d1 * inner.d2
         + outer.d1 * inner.d3;
    return r;
}

// Given the jet of phi at u, the jet of phi^{-1} at phi(u).
template <class Real>
Jet3<Real> invert(const Jet3<Real>& j, Real u) {
    Jet3<Real> r;
    const Real p1 = j.d1;
    const Real p2 = j.d2;
    const Real p3 = j.d3;
    r.f = u;
    r.d1 = Real(1) / p1;
    r.d2 = -p2 / (p1 * p1 * p1);
    r.d3 = (Real(3) * p2 * p2 - p1 * p3) / (p1 * p1 * p1 * p1 * p1);
    return r;
}

} // namespace conjlab
