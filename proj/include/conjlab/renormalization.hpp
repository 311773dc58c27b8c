#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "conjlab/errors.hpp"
#include "conjlab/interval.hpp"
#include "conjlab/map.hpp"
#include "conjlab/nice_set.hpp"
#include "conjlab/orbit.hpp"
#include "conjlab/rng.hpp"

namespace conjlab {

template <class Real>
struct RenormalizationInterval {
    Real center{};               // turning point inside J
    Interval<Real> J;            // proper subinterval of the domain
    int n{};                     // return time: f^n maps closure(J) into itself
    long long verified_depth{};  // iterates certified by the random-orbit recheck
};

// Absorbing hull of the critical values: the smallest interval containing all
// turning values that forward images do not enlarge.  Almost every orbit
// falls into it.
template <class Real>
Interval<Real> dynamical_core(const MultimodalMap<Real>& map, int max_iter = 256) {
    const auto& turnings = map.turning_points();
    if (turnings.empty())
        throw DomainError(map.label() + ": dynamical core needs a turning point");
    const Real tol = Real(1e-13) * std::max(Real(1), map.domain().width());
    Real lo = map.eval(turnings.front().location);
    Real hi = lo;
    for (const auto& t : turnings) {
        Real v = map.eval(t.location);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    Interval<Real> S{lo, hi};
    for (int it = 0; it < max_iter; ++it) {
        Interval<Real> img = map.image_interval(S);
        Interval<Real> next{std::min(S.lo, img.lo), std::max(S.hi, img.hi)};
        if (next.lo >= S.lo - tol && next.hi <= S.hi + tol) return next;
        S = next;
    }
    return S;
}

namespace detail {

// Periodic points with the period bound degraded on grid collisions: large
// periods can pack roots closer than any fixed grid resolves, so the caller
// gets whatever bound still separates.  `achieved` reports that bound.
template <class Real>
std::vector<PeriodicPoint<Real>> periodic_points_degraded(const MultimodalMap<Real>& map,
                                                          int period_bound, int grid,
                                                          int* achieved = nullptr) {
    for (int pb = period_bound; pb >= 1; --pb) {
        try {
            auto pts = find_periodic_points(map, pb, grid);
            if (achieved) *achieved = pb;
            return pts;
        } catch (const GridTooCoarse&) {
        }
    }
    if (achieved) *achieved = 0;
    return {};
}

} // namespace detail

// Candidate boundary points are periodic points up to the period bound plus
// their backward closure to depth 2.  For each turning point the search pairs
// candidates across it, takes the minimal return time at which both the
// boundary condition f^n(boundary) within boundary and the containment
// f^n(closure J) within closure J hold, and keeps the widest interval per
// (turning, return time).  Each accepted interval is rechecked on random
// interior orbits before being returned.
template <class Real>
std::vector<RenormalizationInterval<Real>> find_renormalization_intervals(
    const MultimodalMap<Real>& map, int n_max, int grid = 1 << 16) {
    std::vector<RenormalizationInterval<Real>> out;
    const auto& dom = map.domain();
    const Real W = dom.width();
    const Real scale = std::max(Real(1), W);
    const Real btol = Real(1e-9) * scale;   // boundary-into-boundary slack
    const Real ctol = Real(1e-9) * scale;   // containment slack for the interval image
    const Real dedup = Real(1e-11) * scale;

    auto periodic = detail::periodic_points_degraded(map, n_max, grid);

    std::vector<Real> cand;
    for (const auto& p : periodic) cand.push_back(p.location);
    std::vector<Real> frontier = cand;
    for (int d = 0; d < 2; ++d) {
        std::vector<Real> next;
        for (Real q : frontier)
            for (const auto& pre : preimages(map, q)) next.push_back(pre.point);
        cand.insert(cand.end(), next.begin(), next.end());
        frontier = std::move(next);
    }
    std::sort(cand.begin(), cand.end());
    cand.erase(std::unique(cand.begin(), cand.end(),
                           [dedup](Real a, Real b) { return std::abs(a - b) <= dedup; }),
               cand.end());
    if (cand.empty()) return out;

    // forward orbits of every candidate up to n_max steps
    std::vector<std::vector<Real>> orbit(cand.size());
    for (std::size_t i = 0; i < cand.size(); ++i) orbit[i] = iterate(map, cand[i], n_max);

    auto contained_after = [&](Real a, Real b, int n) {
        Interval<Real> img{a, b};
        for (int s = 0; s < n; ++s) img = map.image_interval(img);
        return img.lo >= a - ctol && img.hi <= b + ctol;
    };

    const auto& turnings = map.turning_points();
    std::map<std::pair<std::size_t, int>, Interval<Real>> best;
    for (std::size_t ti = 0; ti < turnings.size(); ++ti) {
        const Real c = turnings[ti].location;
        for (std::size_t ia = 0; ia < cand.size(); ++ia) {
            Real a = cand[ia];
            if (!(a < c - btol)) continue;
            for (std::size_t ib = 0; ib < cand.size(); ++ib) {
                Real b = cand[ib];
                if (!(b > c + btol)) continue;
                // proper subinterval
                if (a <= dom.lo + btol && b >= dom.hi - btol) continue;
                for (int n = 1; n <= n_max; ++n) {
                    Real fa = orbit[ia][static_cast<std::size_t>(n)];
                    Real fb = orbit[ib][static_cast<std::size_t>(n)];
                    bool boundary = (std::abs(fa - a) <= btol || std::abs(fa - b) <= btol) &&
                                    (std::abs(fb - a) <= btol || std::abs(fb - b) <= btol);
                    if (!boundary) continue;
                    if (!contained_after(a, b, n)) continue;
                    auto key = std::make_pair(ti, n);
                    auto it = best.find(key);
                    if (it == best.end() || b - a > it->second.width())
                        best[key] = Interval<Real>{a, b};
                    break;  // minimal return time for this pair
                }
            }
        }
    }

    const CounterRng rng(2026, "renorm-verify");
    std::uint64_t counter = 0;
    const int returns = 25;
    const Real rtol = Real(1e-12) * scale;
    for (const auto& [key, J] : best) {
        bool ok = true;
        const int n = key.second;
        for (int s = 0; s < 1000 && ok; ++s) {
            Real x = Real(rng.uniform(counter++, static_cast<double>(J.lo),
                                      static_cast<double>(J.hi)));
            for (int r = 0; r < returns && ok; ++r) {
                for (int q = 0; q < n; ++q) x = map.eval(x);
                if (x < J.lo - rtol || x > J.hi + rtol) ok = false;
            }
        }
        if (!ok) continue;
        out.push_back({turnings[key.first].location, J, n,
                       static_cast<long long>(returns) * n});
    }
    std::sort(out.begin(), out.end(), [](const auto& x, const auto& y) {
        return x.n != y.n ? x.n < y.n : x.center < y.center;
    });
    return out;
}

// First-return map f^n on closure(J) as a multimodal map in its own right.
// Its turning points are the points of J whose orbit hits a turning point of
// f within n steps; branch jets are chain-rule compositions of f's jets, so
// derivatives and Schwarzian need no finite differencing.
template <class Real>
MultimodalMap<Real> restrict_return_map(const MultimodalMap<Real>& map,
                                        const RenormalizationInterval<Real>& R) {
    const Interval<Real> J = R.J;
    const int n = R.n;
    const Real m = Real(1e-12) * std::max(Real(1), map.domain().width());
    const auto& T = map.turning_points();

    struct Hit {
        Real x;
        int step;
        std::size_t turning;
    };
    std::vector<Hit> hits;
    for (std::size_t i = 0; i < T.size(); ++i)
        if (T[i].location > J.lo + m && T[i].location < J.hi - m)
            hits.push_back({T[i].location, 0, i});

    for (int j = 1; j < n; ++j) {
        std::vector<Real> bp{J.lo, J.hi};
        for (const auto& h : hits) bp.push_back(h.x);
        std::sort(bp.begin(), bp.end());

        std::vector<Hit> found;
        for (std::size_t k = 0; k + 1 < bp.size(); ++k) {
            Real u = bp[k], v = bp[k + 1];
            if (!(v - u > Real(4) * m)) continue;
            // f^j is monotone on [u, v]: every earlier turning-hit is a
            // breakpoint already
            Real yu = u, yv = v;
            for (int s = 0; s < j; ++s) {
                yu = map.eval(yu);
                yv = map.eval(yv);
            }
            const bool inc = yv > yu;
            const Real ylo = std::min(yu, yv), yhi = std::max(yu, yv);
            for (std::size_t ci = 0; ci < T.size(); ++ci) {
                const Real c = T[ci].location;
                if (!(c > ylo + m && c < yhi - m)) continue;
                Real a = u, b = v;
                for (int it = 0; it < 100; ++it) {
                    Real mid = (a + b) / Real(2);
                    Real z = mid;
                    for (int s = 0; s < j; ++s) z = map.eval(z);
                    ((inc ? z < c : z > c) ? a : b) = mid;
                }
                found.push_back({(a + b) / Real(2), j, ci});
            }
        }
        for (const auto& h : found) {
            bool dup = false;
            for (const auto& e : hits)
                if (std::abs(e.x - h.x) <= m) dup = true;
            if (!dup) hits.push_back(h);
        }
    }
    std::sort(hits.begin(), hits.end(), [](const Hit& a, const Hit& b) { return a.x < b.x; });

    // order of a return-map turning point: product of f-orders along its orbit
    std::vector<TurningPoint<Real>> new_turnings;
    for (const auto& h : hits) {
        Real order = T[h.turning].order;
        Real z = T[h.turning].location;
        for (int s = h.step + 1; s < n; ++s) {
            z = map.snap(map.eval(z));
            if (map.is_turning(z))
                for (const auto& t : T)
                    if (std::abs(t.location - z) <= map.snap_tol()) order *= t.order;
        }
        new_turnings.push_back({h.x, order});
    }

    MultimodalMap<Real> base = map;
    auto return_jet = [base, n](Real x) {
        Jet3<Real> acc = base.jet(x);
        for (int s = 1; s < n; ++s) acc = compose(base.jet(acc.f), acc);
        return acc;
    };

    std::vector<Real> bp{J.lo};
    for (const auto& h : hits) bp.push_back(h.x);
    bp.push_back(J.hi);
    std::vector<Branch<Real>> branches;
    for (std::size_t k = 0; k + 1 < bp.size(); ++k) {
        Real mid = (bp[k] + bp[k + 1]) / Real(2);
        bool inc = return_jet(mid).d1 > Real(0);
        branches.push_back({bp[k], bp[k + 1], inc, return_jet});
    }

    std::ostringstream label;
    label << map.label() << "-return" << n;
    return MultimodalMap<Real>(J, std::move(branches), std::move(new_turnings), label.str());
}

template <class Real>
struct Gap {
    Interval<Real> span;
    int entry_time{};        // first m with f^m(span) inside the target
    int landing_component{}; // which target component the gap enters
    bool diffeo{};           // f^entry_time is turning-free on the open gap
};

template <class Real>
struct GapDecomposition {
    std::vector<Interval<Real>> target;
    std::vector<Gap<Real>> gaps;
    Real measure{};            // total width of certified gaps
    Real reference_measure{};  // width of the scanned reference interval

    Real fraction() const {
        return reference_measure > Real(0) ? measure / reference_measure : Real(0);
    }
};

// Entry-time decomposition of a reference interval: maximal runs of equal
// first-entry code on a uniform grid, with run boundaries refined by
// bisection and each run certified as a diffeomorphic gap (no turning point
// inside any intermediate image, final image inside the landing component).
template <class Real>
GapDecomposition<Real> compute_basin(const MultimodalMap<Real>& map,
                                     const std::vector<Interval<Real>>& targets,
                                     const Interval<Real>& reference, int n_max,
                                     int grid = 1 << 16) {
    GapDecomposition<Real> out;
    out.target = targets;
    out.reference_measure = reference.width();
    if (targets.empty() || !(reference.width() > Real(0))) return out;

    const Real scale = std::max(Real(1), map.domain().width());
    const Real edge = Real(1e-12) * scale;   // membership slack at target edges
    const Real marg = Real(1e-10) * scale;   // turning-free margin for images
    const Real ctol = Real(1e-9) * scale;    // landing containment slack

    // first-entry code: step * K + component, -1 when no entry within n_max
    const long long K = static_cast<long long>(targets.size());
    auto code = [&](Real x) -> long long {
        Real z = x;
        for (int step = 0; step <= n_max; ++step) {
            for (long long t = 0; t < K; ++t)
                if (z >= targets[static_cast<std::size_t>(t)].lo - edge &&
                    z <= targets[static_cast<std::size_t>(t)].hi + edge)
                    return static_cast<long long>(step) * K + t;
            if (step < n_max) z = map.eval(z);
        }
        return -1;
    };

    auto node = [&](long long i) {
        return reference.lo + reference.width() * Real(i) / Real(grid);
    };
    std::vector<long long> codes(static_cast<std::size_t>(grid) + 1);
    for (long long i = 0; i <= grid; ++i) codes[static_cast<std::size_t>(i)] = code(node(i));

    // boundary between adjacent nodes of different code, refined by bisection
    auto boundary_between = [&](long long i) {
        Real lo = node(i), hi = node(i + 1);
        long long cl = codes[static_cast<std::size_t>(i)];
        for (int it = 0; it < 80 && hi - lo > Real(1e-12) * scale; ++it) {
            Real mid = (lo + hi) / Real(2);
            (code(mid) == cl ? lo : hi) = mid;
        }
        return (lo + hi) / Real(2);
    };

    long long run_start = 0;
    Real left_edge = reference.lo;
    for (long long i = 0; i <= grid; ++i) {
        bool last = i == grid;
        if (!last && codes[static_cast<std::size_t>(i + 1)] ==
                         codes[static_cast<std::size_t>(run_start)])
            continue;
        Real right_edge = last ? reference.hi : boundary_between(i);
        long long c = codes[static_cast<std::size_t>(run_start)];
        if (c >= 0 && right_edge > left_edge) {
            Gap<Real> gap;
            gap.span = {left_edge, right_edge};
            gap.entry_time = static_cast<int>(c / K);
            gap.landing_component = static_cast<int>(c % K);
            gap.diffeo = true;
            Real u = gap.span.lo, v = gap.span.hi;
            for (int j = 0; j < gap.entry_time && gap.diffeo; ++j) {
                Real lo = std::min(u, v), hi = std::max(u, v);
                for (const auto& t : map.turning_points())
                    if (t.location > lo + marg && t.location < hi - marg) gap.diffeo = false;
                u = map.eval(u);
                v = map.eval(v);
            }
            const auto& land = targets[static_cast<std::size_t>(gap.landing_component)];
            Real lo = std::min(u, v), hi = std::max(u, v);
            if (lo < land.lo - ctol || hi > land.hi + ctol) gap.diffeo = false;
            if (gap.diffeo) out.measure += gap.span.width();
            out.gaps.push_back(gap);
        }
        run_start = i + 1;
        left_edge = right_edge;
    }
    return out;
}

template <class Real>
GapDecomposition<Real> compute_basin(const MultimodalMap<Real>& map,
                                     const RenormalizationInterval<Real>& R, int n_max,
                                     int grid = 1 << 16) {
    Interval<Real> core = dynamical_core(map);
    Interval<Real> ref{std::min(core.lo, R.J.lo), std::max(core.hi, R.J.hi)};
    return compute_basin(map, std::vector<Interval<Real>>{R.J}, ref, n_max, grid);
}

template <class Real>
GapDecomposition<Real> compute_basin(const MultimodalMap<Real>& map,
                                     const NiceSet<Real>& ns, int n_max,
                                     int grid = 1 << 16) {
    std::vector<Interval<Real>> targets;
    for (const auto& comp : ns.components) targets.push_back(comp.span);
    Interval<Real> ref = dynamical_core(map);
    for (const auto& t : targets) {
        ref.lo = std::min(ref.lo, t.lo);
        ref.hi = std::max(ref.hi, t.hi);
    }
    return compute_basin(map, targets, ref, n_max, grid);
}

template <class Real>
GapDecomposition<Real> compute_basin(const MultimodalMap<Real>& map,
                                     const Interval<Real>& J, int n_max,
                                     int grid = 1 << 16) {
    Interval<Real> core = dynamical_core(map);
    Interval<Real> ref{std::min(core.lo, J.lo), std::max(core.hi, J.hi)};
    return compute_basin(map, std::vector<Interval<Real>>{J}, ref, n_max, grid);
}

struct PunctureOptions {
    double interior_margin = 0.02;  // relative distance to the boundary of J
    std::size_t node_cap = std::size_t(1) << 21;
    int fringe_levels = 3;
};

template <class Real>
struct PunctureSet {
    Interval<Real> J;
    int depth{};
    std::vector<Real> turnings;  // turning points whose deep backward orbit hugs the boundary
    std::vector<Real> points;    // sorted union of their noncritical backward orbits in J
};

// Noncritical backward orbits of turning points, kept only for turning points
// whose deep preimage levels (the alpha-limit surrogate) stay within the
// margin of the boundary of J.  A turning point whose backward tree outgrows
// the node cap is treated as dense and excluded, which is the same verdict
// the fringe probe would reach.
template <class Real>
PunctureSet<Real> compute_puncture_set(const MultimodalMap<Real>& map,
                                       const Interval<Real>& J, int depth = 18,
                                       PunctureOptions opts = {}) {
    PunctureSet<Real> out;
    out.J = J;
    out.depth = depth;
    const Real margin = Real(opts.interior_margin) * J.width();
    const Real m = Real(1e-12) * std::max(Real(1), map.domain().width());

    for (const auto& t : map.turning_points()) {
        const Real c = t.location;
        if (c < J.lo - m || c > J.hi + m) continue;

        std::vector<std::vector<Real>> levels{{c}};
        std::size_t total = 1;
        bool dense = false;
        for (int d = 1; d <= depth && !levels.back().empty(); ++d) {
            std::vector<Real> next;
            for (Real x : levels.back()) {
                for (const auto& pre : preimages(map, x)) {
                    if (!pre.noncritical) continue;
                    if (pre.point < J.lo - m || pre.point > J.hi + m) continue;
                    next.push_back(pre.point);
                }
            }
            total += next.size();
            if (total > opts.node_cap) {
                dense = true;
                break;
            }
            levels.push_back(std::move(next));
        }
        if (dense) continue;

        const int fringe_lo = std::max(depth - (opts.fringe_levels - 1), 0);
        bool qualifies = true;
        for (int d = fringe_lo; d < static_cast<int>(levels.size()); ++d)
            for (Real x : levels[static_cast<std::size_t>(d)])
                if (std::min(x - J.lo, J.hi - x) > margin) qualifies = false;
        if (!qualifies) continue;

        out.turnings.push_back(c);
        for (const auto& lv : levels)
            for (Real x : lv) out.points.push_back(x);
    }
    std::sort(out.points.begin(), out.points.end());
    out.points.erase(std::unique(out.points.begin(), out.points.end(),
                                 [m](Real a, Real b) { return std::abs(a - b) <= m; }),
                     out.points.end());
    return out;
}

} // namespace conjlab
