#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "conjlab/errors.hpp"
#include "conjlab/interval.hpp"
#include "conjlab/map.hpp"

namespace conjlab {

// Interval on which f^depth is a homeomorphism, with its exact image and the
// branch word realising it.  chain[j] is the branch containing f^j(cell).
template <class Real>
struct MonotoneCell {
    Interval<Real> cell;
    Interval<Real> image;
    bool increasing{true};
    int depth{0};
    std::vector<int> chain;
};

template <class Real>
MonotoneCell<Real> root_cell(const MultimodalMap<Real>& map) {
    return {map.domain(), map.domain(), true, 0, {}};
}

// Pull y back through the cell's branch word.  Backward branch inversion is
// contraction-dominated, so the result is accurate even for deep words.
template <class Real>
Real pullback_through_chain(const MultimodalMap<Real>& map,
                            const std::vector<int>& chain, Real y) {
    Real t = y;
    for (auto it = chain.rbegin(); it != chain.rend(); ++it)
        t = map.invert_branch(*it, t);
    return t;
}

// Forward orbit of the chain pullback of y, each point recovered by partial
// backward inversion rather than forward iteration.
template <class Real>
std::vector<Real> chain_orbit(const MultimodalMap<Real>& map,
                              const std::vector<int>& chain, Real y) {
    std::vector<Real> pts(chain.size() + 1);
    pts.back() = y;
    for (std::size_t j = chain.size(); j-- > 0;)
        pts[j] = map.invert_branch(chain[j], pts[j + 1]);
    return pts;
}

// Children of a monotone cell: split the image at interior branch endpoints
// of the map and advance each piece by one step.
template <class Real>
std::vector<MonotoneCell<Real>> refine_cell(const MultimodalMap<Real>& map,
                                            const MonotoneCell<Real>& c) {
    const Real W = map.domain().width();
    const Real m = Real(1e-13) * std::max(Real(1), W);

    std::vector<Real> cuts;  // in image coordinates
    for (const auto& b : map.branches())
        for (Real e : {b.lo, b.hi})
            if (e > c.image.lo + m && e < c.image.hi - m) cuts.push_back(e);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end(),
                           [&](Real a, Real b) { return std::abs(a - b) <= m; }),
               cuts.end());

    std::vector<Real> image_pts{c.image.lo};
    image_pts.insert(image_pts.end(), cuts.begin(), cuts.end());
    image_pts.push_back(c.image.hi);

    std::vector<MonotoneCell<Real>> kids;
    for (std::size_t i = 0; i + 1 < image_pts.size(); ++i) {
        Real ylo = image_pts[i], yhi = image_pts[i + 1];
        Real xa = pullback_through_chain(map, c.chain, ylo);
        Real xb = pullback_through_chain(map, c.chain, yhi);
        if (xa > xb) std::swap(xa, xb);
        Real ymid = (ylo + yhi) / Real(2);
        int b = map.branch_index(ymid);
        Real flo = map.eval(ylo), fhi = map.eval(yhi);
        bool inc = map.branches()[static_cast<std::size_t>(b)].increasing;
        MonotoneCell<Real> kid;
        kid.cell = {xa, xb};
        kid.image = {std::min(flo, fhi), std::max(flo, fhi)};
        kid.increasing = (c.increasing == inc);
        kid.depth = c.depth + 1;
        kid.chain = c.chain;
        kid.chain.push_back(b);
        kids.push_back(std::move(kid));
    }
    return kids;
}

// Point whose orbit lands on a periodic cycle after finitely many steps.
// chain_points holds x, f(x), ..., f^steps(x); the last entry is the cycle
// point, and every entry is backward-accurate.
template <class Real>
struct PreperiodicPoint {
    Real point{};
    int steps{};
    int cycle_index{};             // index into the cycle orbit supplied
    std::vector<Real> chain_points;
    std::vector<int> branches;     // branch of f at chain_points[j], j < steps
};

// Preperiodic points inside `window` landing on one of `cycle_orbit`'s
// points, found by descending the monotone-cell tree restricted to the
// window.  Results come back shallowest first.
template <class Real>
std::vector<PreperiodicPoint<Real>> find_preperiodic_in_window(
    const MultimodalMap<Real>& map, const std::vector<Real>& cycle_orbit,
    const Interval<Real>& window, int max_depth, std::size_t want = 4,
    std::size_t cell_cap = 200000) {
    const Real W = map.domain().width();
    const Real m = Real(1e-13) * std::max(Real(1), W);

    std::vector<PreperiodicPoint<Real>> found;
    auto consider = [&](const MonotoneCell<Real>& c) {
        for (std::size_t ci = 0; ci < cycle_orbit.size(); ++ci) {
            Real q = cycle_orbit[ci];
            if (!(q > c.image.lo + m && q < c.image.hi - m)) continue;
            auto pts = chain_orbit(map, c.chain, q);
            Real x = pts.front();
            if (!(x >= window.lo && x <= window.hi)) continue;
            bool clean = true;
            for (std::size_t j = 0; j + 1 < pts.size(); ++j)
                if (map.is_turning(pts[j])) clean = false;
            if (!clean) continue;
            bool dup = false;
            for (const auto& f : found)
                if (std::abs(f.point - x) <= m) dup = true;
            if (dup) continue;
            PreperiodicPoint<Real> pp;
            pp.point = x;
            pp.steps = c.depth;
            pp.cycle_index = static_cast<int>(ci);
            pp.chain_points = pts;
            for (std::size_t j = 0; j + 1 < pts.size(); ++j)
                pp.branches.push_back(map.branch_index(pts[j]));
            found.push_back(std::move(pp));
        }
    };

    std::vector<MonotoneCell<Real>> level{root_cell(map)};
    consider(level.front());
    std::size_t cells_seen = 1;
    for (int d = 0; d < max_depth && found.size() < want; ++d) {
        std::vector<MonotoneCell<Real>> next;
        for (const auto& c : level) {
            for (auto& kid : refine_cell(map, c)) {
                if (kid.cell.hi < window.lo - m || kid.cell.lo > window.hi + m)
                    continue;
                if (++cells_seen > cell_cap) throw DepthExplosion("cell budget exceeded while searching for preperiodic points");
                consider(kid);
                next.push_back(std::move(kid));
            }
        }
        if (next.empty()) break;
        level = std::move(next);
    }
    std::sort(found.begin(), found.end(), [](const auto& a, const auto& b) {
        return a.steps < b.steps;
    });
    if (found.size() > want) found.resize(want);
    return found;
}

} // namespace conjlab
