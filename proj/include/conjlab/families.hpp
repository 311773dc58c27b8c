#pragma once

#include <cmath>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "conjlab/errors.hpp"
#include "conjlab/map.hpp"

namespace conjlab {

template <class Real>
Real pi_v() { return static_cast<Real>(3.14159265358979323846264338327950288L); }

// ---------------------------------------------------------------------------
// quadratic family  x -> lambda x (1 - x)  on [0, 1]
// ---------------------------------------------------------------------------
template <class Real>
MultimodalMap<Real> make_quadratic(Real lambda) {
    if (!(lambda > Real(0) && lambda <= Real(4)))
        throw ConfigError("quadratic: lambda must lie in (0, 4]");
    auto jet = [lambda](Real x) {
        return Jet3<Real>{lambda * x * (Real(1) - x),
                          lambda * (Real(1) - Real(2) * x),
                          Real(-2) * lambda,
                          Real(0)};
    };
    std::ostringstream label;
    label << "quadratic(lambda=" << static_cast<double>(lambda) << ")";
    std::vector<Branch<Real>> branches{
        {Real(0), Real(0.5), true, jet},
        {Real(0.5), Real(1), false, jet}};
    return MultimodalMap<Real>({Real(0), Real(1)}, std::move(branches),
                               {{Real(0.5), Real(2)}}, label.str());
}

// ---------------------------------------------------------------------------
// tent family: slope s up to the corner at 1/2, slope -s after.  The corner
// is not differentiable, so the turning point carries order 1; validation
// reports the non-flatness failure but the map remains usable for topological
// experiments.
// ---------------------------------------------------------------------------
template <class Real>
MultimodalMap<Real> make_tent(Real s = Real(2)) {
    if (!(s > Real(0) && s <= Real(2)))
        throw ConfigError("tent: slope must lie in (0, 2]");
    auto left = [s](Real x) { return Jet3<Real>{s * x, s, Real(0), Real(0)}; };
    auto right = [s](Real x) {
        return Jet3<Real>{s * (Real(1) - x), -s, Real(0), Real(0)};
    };
    std::ostringstream label;
    label << "tent(slope=" << static_cast<double>(s) << ")";
    std::vector<Branch<Real>> branches{
        {Real(0), Real(0.5), true, left},
        {Real(0.5), Real(1), false, right}};
    return MultimodalMap<Real>({Real(0), Real(1)}, std::move(branches),
                               {{Real(0.5), Real(1)}}, label.str());
}

// ---------------------------------------------------------------------------
// cubic family  x -> x^3 - a x  restricted to its invariant interval
// [-sqrt(a+1), sqrt(a+1)], where the endpoints are fixed.  Bimodal with
// turning points at +-sqrt(a/3).
// ---------------------------------------------------------------------------
template <class Real>
MultimodalMap<Real> make_cubic(Real a = Real(1.5)) {
    if (!(a > Real(0)))
        throw ConfigError("cubic: coefficient must be positive");
    const Real L = std::sqrt(a + Real(1));
    const Real c = std::sqrt(a / Real(3));
    auto jet = [a](Real x) {
        return Jet3<Real>{x * x * x - a * x,
                          Real(3) * x * x - a,
                          Real(6) * x,
                          Real(6)};
    };
    std::ostringstream label;
    label << "cubic(a=" << static_cast<double>(a) << ")";
    std::vector<Branch<Real>> branches{
        {-L, -c, true, jet},
        {-c, c, false, jet},
        {c, L, true, jet}};
    return MultimodalMap<Real>({-L, L}, std::move(branches),
                               {{-c, Real(2)}, {c, Real(2)}}, label.str());
}

// ---------------------------------------------------------------------------
// power-vertex family  x -> 1 - |2x - 1|^beta  on [0, 1]; unimodal with a
// turning point of order beta at 1/2.  beta = 2 coincides with the full
// quadratic.
// ---------------------------------------------------------------------------
template <class Real>
MultimodalMap<Real> make_power_vertex(Real beta) {
    if (!(beta > Real(1)))
        throw ConfigError("power_vertex: exponent must exceed 1");
    // Each derivative order takes its own power of |2x-1| so the values are
    // IEEE-correct at the vertex itself (0, finite, or inf as beta dictates).
    auto side = [beta](Real u, Real sign) {
        auto term = [u](Real coeff, Real power) {
            return coeff == Real(0) ? Real(0) : coeff * std::pow(u, power);
        };
        Real b1 = Real(2) * beta;
        Real b2 = Real(4) * beta * (beta - Real(1));
        Real b3 = Real(8) * beta * (beta - Real(1)) * (beta - Real(2));
        return Jet3<Real>{Real(1) - std::pow(u, beta),
                          term(-sign * b1, beta - Real(1)),
                          term(-b2, beta - Real(2)),
                          term(-sign * b3, beta - Real(3))};
    };
    auto left = [side](Real x) { return side(Real(1) - Real(2) * x, Real(-1)); };
    auto right = [side](Real x) { return side(Real(2) * x - Real(1), Real(1)); };
    std::ostringstream label;
    label << "power_vertex(beta=" << static_cast<double>(beta) << ")";
    std::vector<Branch<Real>> branches{
        {Real(0), Real(0.5), true, left},
        {Real(0.5), Real(1), false, right}};
    return MultimodalMap<Real>({Real(0), Real(1)}, std::move(branches),
                               {{Real(0.5), beta}}, label.str());
}

// ---------------------------------------------------------------------------
// monotone fixture  x -> x^2  on [0, 1]: boundary-preserving with no turning
// points.  Used for capture-time and validation edge cases.
// ---------------------------------------------------------------------------
template <class Real>
MultimodalMap<Real> make_monotone_square() {
    auto jet = [](Real x) {
        return Jet3<Real>{x * x, Real(2) * x, Real(2), Real(0)};
    };
    std::vector<Branch<Real>> branches{{Real(0), Real(1), true, jet}};
    return MultimodalMap<Real>({Real(0), Real(1)}, std::move(branches), {},
                               "monotone_square");
}

// ---------------------------------------------------------------------------
// piecewise quintic Hermite family.  Each node fixes value, first and second
// derivative; interior nodes with zero first derivative are turning points of
// order 2 (matching one-sided second derivatives by construction).
// ---------------------------------------------------------------------------
template <class Real>
struct HermiteNode {
    Real x, value, d1, d2;
};

template <class Real>
MultimodalMap<Real> make_hermite(const std::vector<HermiteNode<Real>>& nodes,
                                 const std::string& label) {
    if (nodes.size() < 2) throw ConfigError("hermite: need at least two nodes");
    std::vector<Branch<Real>> branches;
    std::vector<TurningPoint<Real>> turning;
    for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
        const auto& n0 = nodes[i];
        const auto& n1 = nodes[i + 1];
        const Real L = n1.x - n0.x;
        if (!(L > Real(0))) throw ConfigError("hermite: nodes must be ordered");
        const Real p0 = n0.value, m0 = n0.d1 * L, s0 = n0.d2 * L * L;
        const Real p1 = n1.value, m1 = n1.d1 * L, s1 = n1.d2 * L * L;
        // power-basis coefficients in t = (x - x0)/L of the unique quintic
        // matching (value, d1, d2) at both ends
        const Real c0 = p0;
        const Real c1 = m0;
        const Real c2 = s0 / Real(2);
        const Real c3 = Real(-10) * p0 - Real(6) * m0 - Real(1.5) * s0
                      + Real(10) * p1 - Real(4) * m1 + Real(0.5) * s1;
        const Real c4 = Real(15) * p0 + Real(8) * m0 + Real(1.5) * s0
                      - Real(15) * p1 + Real(7) * m1 - s1;
        const Real c5 = Real(-6) * p0 - Real(3) * m0 - Real(0.5) * s0
                      + Real(6) * p1 - Real(3) * m1 + Real(0.5) * s1;
        const Real x0 = n0.x;
        auto jet = [=](Real x) {
            Real t = (x - x0) / L;
            Real f = ((((c5 * t + c4) * t + c3) * t + c2) * t + c1) * t + c0;
            Real d1 = (((Real(5) * c5 * t + Real(4) * c4) * t + Real(3) * c3) * t
                       + Real(2) * c2) * t + c1;
            Real d2 = ((Real(20) * c5 * t + Real(12) * c4) * t + Real(6) * c3) * t
                      + Real(2) * c2;
            Real d3 = (Real(60) * c5 * t + Real(24) * c4) * t + Real(6) * c3;
            return Jet3<Real>{f, d1 / L, d2 / (L * L), d3 / (L * L * L)};
        };
        branches.push_back({n0.x, n1.x, n1.value > n0.value, jet});
        if (i > 0 && n0.d1 == Real(0)) {
            if (n0.d2 == Real(0))
                throw ConfigError("hermite: turning node needs nonzero d2");
            turning.push_back({n0.x, Real(2)});
        }
    }
    return MultimodalMap<Real>({nodes.front().x, nodes.back().x},
                               std::move(branches), std::move(turning), label);
}

// Bimodal fixture with a low first hump and a valley whose critical value is
// the fixed boundary point 0.  The valley point 1/2 sits above the first
// hump's maximum, so its only preimages lie on the third branch, which has no
// interior fixed point: the noncritical backward orbit of 1/2 is a single
// chain accumulating at the repelling endpoint 1.
template <class Real>
MultimodalMap<Real> make_hill_valley() {
    std::vector<HermiteNode<Real>> nodes{
        {Real(0), Real(0), Real(4), Real(0)},
        {Real(0.2), Real(0.45), Real(0), Real(-30)},
        {Real(0.5), Real(0), Real(0), Real(40)},
        {Real(1), Real(1), Real(3), Real(0)}};
    return make_hermite<Real>(nodes, "hill_valley");
}

// ---------------------------------------------------------------------------
// smooth conjugation machinery
// ---------------------------------------------------------------------------

// Circle-free diffeomorphism of [0,1]:  phi(x) = x + a sin(pi x), |a| < 1/pi.
template <class Real>
struct SineDiffeo {
    Real amplitude{};

    Jet3<Real> jet(Real x) const {
        const Real P = pi_v<Real>();
        return Jet3<Real>{x + amplitude * std::sin(P * x),
                          Real(1) + amplitude * P * std::cos(P * x),
                          -amplitude * P * P * std::sin(P * x),
                          -amplitude * P * P * P * std::cos(P * x)};
    }
    Real operator()(Real x) const { return jet(x).f; }
    Real derivative(Real x) const { return jet(x).d1; }

    Real inverse(Real y) const {
        Real lo = Real(0), hi = Real(1);
        for (int i = 0; i < 30; ++i) {
            Real mid = (lo + hi) / Real(2);
            (jet(mid).f < y ? lo : hi) = mid;
        }
        Real x = (lo + hi) / Real(2);
        for (int i = 0; i < 8; ++i) {
            Jet3<Real> j = jet(x);
            Real step = (j.f - y) / j.d1;
            x -= step;
            if (x < Real(0)) x = Real(0);
            if (x > Real(1)) x = Real(1);
            if (std::abs(step) < Real(1e-17)) break;
        }
        return x;
    }
};

// g = phi o f o phi^{-1}.  Branch structure transports through phi; jets are
// exact compositions, so g has closed-form derivatives wherever f does.
template <class Real>
MultimodalMap<Real> make_sine_conjugate(const MultimodalMap<Real>& f, Real amplitude) {
    const auto& dom = f.domain();
    if (std::abs(dom.lo) > Real(1e-15) || std::abs(dom.hi - Real(1)) > Real(1e-15))
        throw ConfigError("sine conjugation requires domain [0, 1]");
    if (!(std::abs(amplitude) * pi_v<Real>() < Real(1)))
        throw ConfigError("sine conjugation: |amplitude| must be < 1/pi");
    SineDiffeo<Real> phi{amplitude};
    std::vector<Branch<Real>> branches;
    for (const auto& b : f.branches()) {
        auto base = b.jet;
        auto jet = [phi, base](Real y) {
            Real u = phi.inverse(y);
            Jet3<Real> inv = invert(phi.jet(u), u);   // phi^{-1} at y
            Jet3<Real> fu = base(u);
            Jet3<Real> mid = compose(fu, inv);        // f o phi^{-1}
            return compose(phi.jet(mid.f), mid);      // phi o f o phi^{-1}
        };
        branches.push_back({phi(b.lo), phi(b.hi), b.increasing, jet});
    }
    std::vector<TurningPoint<Real>> turning;
    for (const auto& c : f.turning_points())
        turning.push_back({phi(c.location), c.order});
    std::ostringstream label;
    label << "conjugate(" << f.label() << ", amplitude=" << static_cast<double>(amplitude) << ")";
    return MultimodalMap<Real>({Real(0), Real(1)}, std::move(branches),
                               std::move(turning), label.str());
}

// g = psi o f o psi with psi the reflection of the domain; conjugate to f by
// an orientation-reversing affine map.
template <class Real>
MultimodalMap<Real> make_flip_conjugate(const MultimodalMap<Real>& f) {
    const Real a = f.domain().lo, b = f.domain().hi;
    auto psi = [a, b](Real x) { return a + b - x; };
    std::vector<Branch<Real>> branches;
    for (auto it = f.branches().rbegin(); it != f.branches().rend(); ++it) {
        auto base = it->jet;
        auto jet = [psi, base](Real y) {
            Jet3<Real> inner{psi(y), Real(-1), Real(0), Real(0)};
            Jet3<Real> mid = compose(base(inner.f), inner);
            return compose(Jet3<Real>{psi(mid.f), Real(-1), Real(0), Real(0)}, mid);
        };
        branches.push_back({psi(it->hi), psi(it->lo), it->increasing, jet});
    }
    std::vector<TurningPoint<Real>> turning;
    for (auto it = f.turning_points().rbegin(); it != f.turning_points().rend(); ++it)
        turning.push_back({psi(it->location), it->order});
    return MultimodalMap<Real>(f.domain(), std::move(branches), std::move(turning),
                               "flip(" + f.label() + ")");
}

// ---------------------------------------------------------------------------
// config-driven construction
// ---------------------------------------------------------------------------
struct MapFamilyConfig {
    std::string family;
    std::map<std::string, double> params;
    std::shared_ptr<MapFamilyConfig> base;  // for conjugate / flip

    double param(const std::string& key, double fallback) const {
        auto it = params.find(key);
        return it == params.end() ? fallback : it->second;
    }
    bool has(const std::string& key) const { return params.count(key) > 0; }
};

template <class Real>
MultimodalMap<Real> make_map(const MapFamilyConfig& cfg) {
    const std::string& fam = cfg.family;
    if (fam == "quadratic")
        return make_quadratic<Real>(static_cast<Real>(cfg.param("lambda", 4.0)));
    if (fam == "tent")
        return make_tent<Real>(static_cast<Real>(cfg.param("slope", 2.0)));
    if (fam == "cubic")
        return make_cubic<Real>(static_cast<Real>(cfg.param("a", 1.5)));
    if (fam == "power_vertex")
        return make_power_vertex<Real>(static_cast<Real>(cfg.param("beta", 4.0)));
    if (fam == "monotone_square")
        return make_monotone_square<Real>();
    if (fam == "hill_valley")
        return make_hill_valley<Real>();
    if (fam == "conjugate") {
        if (!cfg.base) throw ConfigError("conjugate family requires a base map");
        return make_sine_conjugate<Real>(make_map<Real>(*cfg.base),
                                         static_cast<Real>(cfg.param("amplitude", 0.1)));
    }
    if (fam == "flip") {
        if (!cfg.base) throw ConfigError("flip family requires a base map");
        return make_flip_conjugate<Real>(make_map<Real>(*cfg.base));
    }
    throw ConfigError("unknown map family: " + fam);
}

} // namespace conjlab
