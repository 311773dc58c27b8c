#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <sstream>
#include <string>
#include <vector>

#include "conjlab/errors.hpp"
#include "conjlab/interval.hpp"
#include "conjlab/map.hpp"
#include "conjlab/orbit.hpp"
#include "conjlab/partition.hpp"

namespace conjlab {

// Finite certificate that a boundary point's forward orbit never re-enters an
// open set: the orbit is an explicit chain landing on a repelling cycle, so
// avoidance reduces to a check over finitely many points, and a replay at any
// horizon walks chain-then-cycle instead of a float orbit.  Float orbits lose
// the true orbit after a few dozen steps under expansion, so they cannot
// honestly certify avoidance at large horizons; certificates can.
template <class Real>
struct BoundaryCertificate {
    Real point{};
    std::vector<Real> chain_points;  // point, f(point), ..., landing cycle point
    std::vector<int> branches;       // branch at chain_points[j], j + 1 < size
    std::vector<Real> cycle;         // forward orbit of the landing cycle
    std::size_t cycle_entry{};       // chain_points.back() == cycle[cycle_entry]
};

template <class Real>
struct NiceComponent {
    Interval<Real> span;  // the open component (span.lo, span.hi)
    Real turning{};
    BoundaryCertificate<Real> left, right;
};

template <class Real>
struct NiceSet {
    std::vector<NiceComponent<Real>> components;
    long long horizon{};  // avoidance horizon verified at build time
    int probe_depth{};    // float-orbit depth used for the grid bracket
};

struct NiceOptions {
    int grid = 1 << 16;
    int probe_cap = 24;
    int cycle_period_bound = 3;
    int cycle_grid = 1 << 14;
    int preperiodic_depth = 40;
    std::size_t candidates_per_side = 6;
    int snap_rounds = 4;           // snap-window ladder length
    double snap_window0 = 2e-4;    // first snap-window half-width, relative
    std::size_t combo_cap = 256;
};

template <class Real>
struct MartensCheck {
    bool ok{true};
    long long steps{};
    Real max_residual{};
    std::string why;
};

// Replays every boundary certificate for `horizon` steps: each step checks
// forward consistency |f(x_n) - x_{n+1}| and that x_n is not strictly inside
// any component.  The chain part is backward-accurate and the tail is a
// refined periodic orbit, so the residual bound is meaningful at any horizon.
template <class Real>
MartensCheck<Real> verify_martens(const MultimodalMap<Real>& map,
                                  const NiceSet<Real>& ns, long long horizon,
                                  Real tol = Real(1e-9)) {
    MartensCheck<Real> out;
    const Real W = std::max(Real(1), map.domain().width());
    const Real m = Real(1e-12) * W;

    auto inside_any = [&](Real q) {
        for (const auto& comp : ns.components)
            if (q > comp.span.lo + m && q < comp.span.hi - m) return true;
        return false;
    };

    auto fail = [&](const std::string& why) {
        out.ok = false;
        if (out.why.empty()) out.why = why;
    };

    auto replay = [&](const BoundaryCertificate<Real>& c, const char* side) {
        const long long len = static_cast<long long>(c.chain_points.size());
        const std::size_t per = c.cycle.size();
        if (len == 0 || per == 0) {
            fail(std::string(side) + ": empty certificate");
            return;
        }
        auto at = [&](long long n) -> Real {
            if (n < len) return c.chain_points[static_cast<std::size_t>(n)];
            return c.cycle[(c.cycle_entry + static_cast<std::size_t>(n - (len - 1))) % per];
        };
        for (long long n = 0; n <= horizon && out.ok; ++n) {
            Real x = at(n);
            if (inside_any(x)) {
                std::ostringstream os;
                os << side << ": boundary orbit re-enters the set at step " << n;
                fail(os.str());
                break;
            }
            if (n == horizon) break;
            Real r = std::abs(map.eval(x) - at(n + 1));
            out.max_residual = std::max(out.max_residual, r);
            if (r > tol * W) {
                std::ostringstream os;
                os << side << ": certificate replay residual " << static_cast<double>(r)
                   << " at step " << n;
                fail(os.str());
                break;
            }
            ++out.steps;
        }
    };

    for (const auto& comp : ns.components) {
        replay(comp.left, "left boundary");
        replay(comp.right, "right boundary");
        if (!out.ok) break;
    }
    return out;
}

namespace detail {

// Forward float probe: does the orbit of x stay out of every open ball for
// `steps` iterates?  Only trustworthy up to the decorrelation depth; callers
// cap `steps` accordingly.
template <class Real>
bool avoids_balls(const MultimodalMap<Real>& map,
                  const std::vector<Interval<Real>>& balls, Real x, int steps) {
    Real z = x;
    for (int j = 0; j <= steps; ++j) {
        for (const auto& b : balls)
            if (z > b.lo && z < b.hi) return false;
        if (j < steps) z = map.eval(z);
    }
    return true;
}

} // namespace detail

// Constructs one open component per turning point: the component of the
// "enters some epsilon-ball within the probe horizon" set that contains the
// ball, with endpoints snapped onto nearby preperiodic points whose full
// orbits provably avoid the resulting union.  The returned set is verified by
// replaying the certificates to horizon N before returning.
template <class Real>
NiceSet<Real> build_nice_set(const MultimodalMap<Real>& map, Real epsilon,
                             long long N, NiceOptions opts = {}) {
    const auto& dom = map.domain();
    const Real W = dom.width();
    const Real scale = std::max(Real(1), W);

    const auto& turnings = map.turning_points();
    if (turnings.empty())
        throw DomainError(map.label() + ": nice set needs at least one turning point");
    if (!(epsilon > Real(0)))
        throw DomainError("nice set radius must be positive");

    std::vector<Interval<Real>> balls;
    for (const auto& t : turnings)
        balls.push_back({t.location - epsilon, t.location + epsilon});
    for (std::size_t i = 0; i < balls.size(); ++i) {
        if (balls[i].lo < dom.lo - Real(1e-12) * scale ||
            balls[i].hi > dom.hi + Real(1e-12) * scale)
            throw DomainError(map.label() + ": epsilon-ball leaves the domain");
        if (i + 1 < balls.size() && balls[i].hi >= balls[i + 1].lo)
            throw DomainError(map.label() + ": epsilon-balls overlap");
    }

    auto cycles_found = find_periodic_points(map, opts.cycle_period_bound, opts.cycle_grid);
    if (has_non_repelling_cycle(cycles_found))
        throw HypothesisError(map.label() +
                              ": non-repelling cycle detected; nice-set boundaries need "
                              "repelling anchors");

    // distinct repelling cycles and their flattened orbits
    std::vector<std::vector<Real>> cycles;
    std::vector<Real> flat;
    std::vector<std::size_t> flat_cycle, flat_pos;
    {
        const Real ctol = Real(1e-7) * scale;
        std::vector<char> used(cycles_found.size(), 0);
        for (std::size_t i = 0; i < cycles_found.size(); ++i) {
            if (used[i]) continue;
            auto orbit = iterate(map, cycles_found[i].location, cycles_found[i].period - 1);
            for (std::size_t j = i + 1; j < cycles_found.size(); ++j)
                for (Real q : orbit)
                    if (std::abs(cycles_found[j].location - q) <= ctol) used[j] = 1;
            for (std::size_t pos = 0; pos < orbit.size(); ++pos) {
                flat.push_back(orbit[pos]);
                flat_cycle.push_back(cycles.size());
                flat_pos.push_back(pos);
            }
            cycles.push_back(std::move(orbit));
        }
    }
    if (flat.empty())
        throw HypothesisError(map.label() + ": no repelling cycles found up to period " +
                              std::to_string(opts.cycle_period_bound));

    const int probe = static_cast<int>(std::min<long long>(N, opts.probe_cap));
    const Real cell = W / Real(opts.grid);
    auto node = [&](long long i) { return dom.lo + W * Real(i) / Real(opts.grid); };
    auto avoids = [&](Real x) { return detail::avoids_balls(map, balls, x, probe); };

    // Bisect the avoid/enter switchover between an avoiding outer point and an
    // entering inner point.
    auto refine_boundary = [&](Real avoid_side, Real enter_side) {
        for (int it = 0; it < 80 && std::abs(avoid_side - enter_side) > Real(1e-10) * scale;
             ++it) {
            Real mid = (avoid_side + enter_side) / Real(2);
            (avoids(mid) ? avoid_side : enter_side) = mid;
        }
        return (avoid_side + enter_side) / Real(2);
    };

    struct RawComponent {
        Real lo, hi;
        Real turning;
    };
    std::vector<RawComponent> raw;
    for (std::size_t bi = 0; bi < balls.size(); ++bi) {
        const auto& ball = balls[bi];
        long long ilo = static_cast<long long>(std::floor(
            static_cast<double>((ball.lo - dom.lo) / cell)));
        long long ihi = static_cast<long long>(std::ceil(
            static_cast<double>((ball.hi - dom.lo) / cell)));

        long long i = std::min<long long>(ilo, opts.grid);
        Real enter_lo = ball.lo;
        while (i >= 0 && !avoids(node(i))) {
            enter_lo = node(i);
            --i;
        }
        if (i < 2) {
            std::ostringstream os;
            os << map.label() << ": avoidance component around "
               << static_cast<double>(turnings[bi].location)
               << " reaches the domain scale (epsilon too large for this probe)";
            throw ResolutionError(os.str());
        }
        Real a_raw = refine_boundary(node(i), enter_lo);

        long long j = std::max<long long>(ihi, 0);
        Real enter_hi = ball.hi;
        while (j <= opts.grid && !avoids(node(j))) {
            enter_hi = node(j);
            ++j;
        }
        if (j > opts.grid - 2) {
            std::ostringstream os;
            os << map.label() << ": avoidance component around "
               << static_cast<double>(turnings[bi].location)
               << " reaches the domain scale (epsilon too large for this probe)";
            throw ResolutionError(os.str());
        }
        Real b_raw = refine_boundary(node(j), enter_hi);
        raw.push_back({a_raw, b_raw, turnings[bi].location});
    }
    for (std::size_t i = 0; i + 1 < raw.size(); ++i)
        if (raw[i].hi >= raw[i + 1].lo - Real(2) * cell)
            throw ResolutionError(map.label() +
                                  ": neighbouring avoidance components merge; the grid "
                                  "cannot separate them at this epsilon");

    auto make_certificate = [&](const PreperiodicPoint<Real>& pp) {
        BoundaryCertificate<Real> cert;
        cert.point = pp.point;
        cert.chain_points = pp.chain_points;
        cert.branches = pp.branches;
        cert.cycle = cycles[flat_cycle[static_cast<std::size_t>(pp.cycle_index)]];
        cert.cycle_entry = flat_pos[static_cast<std::size_t>(pp.cycle_index)];
        return cert;
    };

    // Exact joint avoidance: no orbit point of any certificate may fall
    // strictly inside any chosen component.
    const Real m = Real(1e-12) * scale;
    auto admissible = [&](const std::vector<BoundaryCertificate<Real>>& certs,
                          const std::vector<Interval<Real>>& spans) {
        for (const auto& c : certs) {
            for (Real q : c.chain_points)
                for (const auto& s : spans)
                    if (q > s.lo + m && q < s.hi - m) return false;
            for (Real q : c.cycle)
                for (const auto& s : spans)
                    if (q > s.lo + m && q < s.hi - m) return false;
        }
        return true;
    };

    for (int round = 0; round < opts.snap_rounds; ++round) {
        const Real w = scale * Real(opts.snap_window0) * std::pow(Real(4), Real(round));

        // candidate boundary points per side, nearest to the raw boundary first
        std::vector<std::vector<BoundaryCertificate<Real>>> cand(2 * raw.size());
        bool all_sides = true;
        for (std::size_t ci = 0; ci < raw.size(); ++ci) {
            const auto& ball = balls[ci];
            Interval<Real> wl{std::max(dom.lo, raw[ci].lo - w),
                              std::min(raw[ci].lo + w, ball.lo)};
            Interval<Real> wr{std::max(raw[ci].hi - w, ball.hi),
                              std::min(dom.hi, raw[ci].hi + w)};
            for (int side = 0; side < 2; ++side) {
                const Interval<Real>& win = side == 0 ? wl : wr;
                const Real anchor = side == 0 ? raw[ci].lo : raw[ci].hi;
                if (!(win.hi > win.lo)) {
                    all_sides = false;
                    continue;
                }
                auto pps = find_preperiodic_in_window(map, flat, win,
                                                      opts.preperiodic_depth,
                                                      opts.candidates_per_side);
                std::sort(pps.begin(), pps.end(), [&](const auto& a, const auto& b) {
                    return std::abs(a.point - anchor) < std::abs(b.point - anchor);
                });
                auto& list = cand[2 * ci + static_cast<std::size_t>(side)];
                for (const auto& pp : pps) list.push_back(make_certificate(pp));
                if (list.empty()) all_sides = false;
            }
        }
        if (!all_sides) continue;

        // odometer over the candidate lists, nearest combinations first
        std::vector<std::size_t> idx(cand.size(), 0);
        std::size_t combos = 0;
        while (combos++ < opts.combo_cap) {
            std::vector<BoundaryCertificate<Real>> certs;
            std::vector<Interval<Real>> spans;
            for (std::size_t s = 0; s < cand.size(); ++s) certs.push_back(cand[s][idx[s]]);
            for (std::size_t ci = 0; ci < raw.size(); ++ci)
                spans.push_back({certs[2 * ci].point, certs[2 * ci + 1].point});

            bool ordered = true;
            for (const auto& s : spans)
                if (!(s.hi > s.lo)) ordered = false;

            if (ordered && admissible(certs, spans)) {
                NiceSet<Real> out;
                out.horizon = N;
                out.probe_depth = probe;
                for (std::size_t ci = 0; ci < raw.size(); ++ci) {
                    NiceComponent<Real> comp;
                    comp.span = spans[ci];
                    comp.turning = raw[ci].turning;
                    comp.left = certs[2 * ci];
                    comp.right = certs[2 * ci + 1];
                    out.components.push_back(std::move(comp));
                }
                auto check = verify_martens(map, out, N);
                if (check.ok) return out;
            }

            // advance the odometer
            std::size_t s = 0;
            for (; s < idx.size(); ++s) {
                if (++idx[s] < cand[s].size()) break;
                idx[s] = 0;
            }
            if (s == idx.size()) break;
        }
    }

    throw ResolutionError(map.label() +
                          ": no certified boundary pair found near the avoidance "
                          "component; widen the snap window or lower the horizon");
}

} // namespace conjlab
