#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "conjlab/errors.hpp"
#include "conjlab/interval.hpp"
#include "conjlab/jet.hpp"

namespace conjlab {

// One monotone piece of a map.  The jet closure must be valid on the closed
// interval [lo, hi], including the endpoints shared with neighbouring
// branches; at a shared turning point adjacent closures describe one-sided
// limits of the same function.
template <class Real>
struct Branch {
    Real lo{};
    Real hi{};
    bool increasing{};
    std::function<Jet3<Real>(Real)> jet;
};

template <class Real>
struct TurningPoint {
    Real location{};
    Real order{};   // declared local order alpha > 1 for non-flat points
};

// Points closer to a turning point than this (relative to the domain width)
// are treated as the turning point itself.
inline constexpr double kTurningSnap = 1e-14;

template <class Real>
class MultimodalMap {
  public:
    MultimodalMap() = default;
    MultimodalMap(Interval<Real> domain,
                  std::vector<Branch<Real>> branches,
                  std::vector<TurningPoint<Real>> turning,
                  std::string label)
        : domain_(domain),
          branches_(std::move(branches)),
          turning_(std::move(turning)),
          label_(std::move(label)) {}

    const Interval<Real>& domain() const { return domain_; }
    const std::vector<Branch<Real>>& branches() const { return branches_; }
    const std::vector<TurningPoint<Real>>& turning_points() const { return turning_; }
    const std::string& label() const { return label_; }

    Real snap_tol() const { return Real(kTurningSnap) * std::max(Real(1), domain_.width()); }

    // Snaps x onto a turning point or domain endpoint when within tolerance.
    Real snap(Real x) const {
        const Real tol = snap_tol();
        if (std::abs(x - domain_.lo) <= tol) return domain_.lo;
        if (std::abs(x - domain_.hi) <= tol) return domain_.hi;
        for (const auto& c : turning_)
            if (std::abs(x - c.location) <= tol) return c.location;
        return x;
    }

    bool is_turning(Real x) const {
        const Real tol = snap_tol();
        for (const auto& c : turning_)
            if (std::abs(x - c.location) <= tol) return true;
        return false;
    }

    // Index of the branch whose closed interval contains x.  Turning points
    // belong to both adjacent branches; this returns the left one, except at
    // the left domain endpoint.
    int branch_index(Real x) const {
        check_domain(x);
        x = domain_.clamp(snap(x));
        int lo = 0, hi = static_cast<int>(branches_.size()) - 1;
        while (lo < hi) {
            int mid = (lo + hi) / 2;
            if (x <= branches_[static_cast<std::size_t>(mid)].hi)
                hi = mid;
            else
                lo = mid + 1;
        }
        return lo;
    }

    Jet3<Real> jet(Real x) const {
        const auto& b = branches_[static_cast<std::size_t>(branch_index(x))];
        return b.jet(domain_.clamp(snap(x)));
    }

    Real operator()(Real x) const { return eval(x); }

    Real eval(Real x) const {
        const auto& b = branches_[static_cast<std::size_t>(branch_index(x))];
        // Images may overshoot the domain by roundoff; clamp so orbits stay
        // iterable.
        return domain_.clamp(b.jet(domain_.clamp(snap(x))).f);
    }

    // Derivative of the requested order (1..3).  At a turning point the
    // one-sided limits must agree; a corner raises TurningPointError.
    Real derivative(Real x, int order = 1) const {
        check_domain(x);
        x = domain_.clamp(snap(x));
        if (order < 1 || order > 3)
            throw DomainError("derivative order must be 1, 2 or 3");
        const Real tol = snap_tol();
        // Interior turning point: the one-sided limits of every order up to
        // the requested one must agree, else the map is not differentiable to
        // that order there.
        for (std::size_t i = 0; i < turning_.size(); ++i) {
            if (std::abs(x - turning_[i].location) <= tol) {
                const auto& left = branch_ending_at(turning_[i].location);
                const auto& right = branch_starting_at(turning_[i].location);
                Jet3<Real> jl = left.jet(turning_[i].location);
                Jet3<Real> jr = right.jet(turning_[i].location);
                for (int k = 1; k <= order; ++k) {
                    Real a = pick(jl, k), b = pick(jr, k);
                    Real scale = std::max({Real(1), std::abs(a), std::abs(b)});
                    if (!(std::abs(a - b) <= Real(1e-9) * scale)) {
                        std::ostringstream os;
                        os << label_ << ": one-sided derivatives of order " << k
                           << " disagree at turning point "
                           << static_cast<double>(turning_[i].location)
                           << " (" << static_cast<double>(a) << " vs "
                           << static_cast<double>(b) << ")";
                        throw TurningPointError(os.str());
                    }
                }
                return (pick(jl, order) + pick(jr, order)) / Real(2);
            }
        }
        return pick(jet(x), order);
    }

    // Schwarzian derivative f'''/f' - (3/2)(f''/f')^2 away from critical
    // points.
    Real schwarzian(Real x) const {
        Jet3<Real> j = jet(x);
        if (std::abs(j.d1) < Real(1e-12) * std::max(Real(1), domain_.width())) {
            std::ostringstream os;
            os << label_ << ": schwarzian undefined where f' vanishes (x = "
               << static_cast<double>(x) << ")";
            throw SingularityError(os.str());
        }
        Real a = j.d2 / j.d1;
        Real b = j.d3 / j.d1;
        return b - Real(3) / Real(2) * a * a;
    }

    // Exact image of an interval: the hull of endpoint images and the values
    // at interior turning points.  Continuity makes this the full image.
    Interval<Real> image_interval(const Interval<Real>& J) const {
        Real a = eval(J.lo);
        Real b = eval(J.hi);
        Real lo = std::min(a, b), hi = std::max(a, b);
        for (const auto& c : turning_) {
            if (J.strictly_contains(c.location)) {
                Real v = eval(c.location);
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
        }
        return Interval<Real>{lo, hi};
    }

    // Monotone inverse within branch b.  Returns the x in [lo, hi] with
    // f(x) = y; y must be inside the branch image (tolerance: a few ulps of
    // the value range).
    Real invert_branch(int b, Real y) const {
        const auto& br = branches_[static_cast<std::size_t>(b)];
        Real flo = br.jet(br.lo).f;
        Real fhi = br.jet(br.hi).f;
        Real vlo = std::min(flo, fhi), vhi = std::max(flo, fhi);
        const Real vtol = Real(1e-11) * std::max(Real(1), vhi - vlo);
        if (y < vlo - vtol || y > vhi + vtol) {
            std::ostringstream os;
            os << label_ << ": value " << static_cast<double>(y)
               << " outside image of branch " << b;
            throw DomainError(os.str());
        }
        y = std::min(vhi, std::max(vlo, y));
        Real lo = br.lo, hi = br.hi;
        // bisection to a coarse bracket, then Newton polish
        for (int i = 0; i < 40; ++i) {
            Real mid = (lo + hi) / Real(2);
            Real v = br.jet(mid).f;
            bool goRight = br.increasing ? (v < y) : (v > y);
            if (goRight) lo = mid; else hi = mid;
        }
        Real x = (lo + hi) / Real(2);
        for (int i = 0; i < 6; ++i) {
            Jet3<Real> j = br.jet(x);
            if (std::abs(j.d1) < Real(1e-14)) break;
            Real step = (j.f - y) / j.d1;
            Real nx = x - step;
            if (nx < br.lo) nx = br.lo;
            if (nx > br.hi) nx = br.hi;
            x = nx;
            if (std::abs(step) < Real(1e-17) * std::max(Real(1), std::abs(x))) break;
        }
        return std::min(br.hi, std::max(br.lo, x));
    }

  private:
    static Real pick(const Jet3<Real>& j, int order) {
        return order == 1 ? j.d1 : order == 2 ? j.d2 : j.d3;
    }

    const Branch<Real>& branch_ending_at(Real c) const {
        for (const auto& b : branches_)
            if (std::abs(b.hi - c) <= snap_tol()) return b;
        throw DomainError(label_ + ": no branch ends at requested turning point");
    }
    const Branch<Real>& branch_starting_at(Real c) const {
        for (const auto& b : branches_)
            if (std::abs(b.lo - c) <= snap_tol()) return b;
        throw DomainError(label_ + ": no branch starts at requested turning point");
    }

    void check_domain(Real x) const {
        const Real tol = Real(1e-12) * std::max(Real(1), domain_.width());
        if (x < domain_.lo - tol || x > domain_.hi + tol) {
            std::ostringstream os;
            os << label_ << ": point " << static_cast<double>(x)
               << " outside domain [" << static_cast<double>(domain_.lo) << ", "
               << static_cast<double>(domain_.hi) << "]";
            throw DomainError(os.str());
        }
    }

    Interval<Real> domain_{};
    std::vector<Branch<Real>> branches_;
    std::vector<TurningPoint<Real>> turning_;
    std::string label_;
};

} // namespace conjlab
