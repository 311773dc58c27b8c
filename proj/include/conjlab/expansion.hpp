#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "conjlab/errors.hpp"
#include "conjlab/interval.hpp"
#include "conjlab/map.hpp"
#include "conjlab/orbit.hpp"
#include "conjlab/partition.hpp"
#include "conjlab/rng.hpp"

namespace conjlab {

// One certified scale: f^k maps V homeomorphically onto the relative
// delta-ball around target, and base lies in V.
template <class Real>
struct ExpansionScale {
    Real base{};
    Interval<Real> V{};
    int k{};
    Real target{};
};

template <class Real>
struct ExpansionWitness {
    Real p{};
    Real delta{};
    bool nearby{false};  // base points approximate p instead of equalling it
    std::vector<ExpansionScale<Real>> scales;
};

struct ExpansionOptions {
    int k_max = 48;
    int scales_wanted = 6;
    int scales_needed = 3;
    double window0 = 0.05;        // first window half-width for nearby search
    int window_halvings = 24;
    int preperiodic_depth = 44;
    int cycle_period_bound = 3;
    int cycle_grid = 1 << 14;
};

namespace detail {

// Pull the relative delta-ball at orbit[k] back through the recorded
// branches.  Fails when an intermediate point is a turning point or the ball
// escapes a branch image on the way back.
template <class Real>
std::optional<Interval<Real>> pull_ball_back(const MultimodalMap<Real>& map,
                                             const std::vector<Real>& orbit,
                                             const std::vector<int>& branches,
                                             int k, Real delta) {
    const Real W = map.domain().width();
    const Real tol = Real(1e-11) * std::max(Real(1), W);
    for (int j = 0; j < k; ++j)
        if (map.is_turning(orbit[static_cast<std::size_t>(j)])) return std::nullopt;

    Interval<Real> T = relative_ball(orbit[static_cast<std::size_t>(k)], delta, map.domain());
    for (int j = k - 1; j >= 0; --j) {
        const auto& b = map.branches()[static_cast<std::size_t>(branches[static_cast<std::size_t>(j)])];
        Real flo = b.jet(b.lo).f, fhi = b.jet(b.hi).f;
        Real vlo = std::min(flo, fhi), vhi = std::max(flo, fhi);
        if (T.lo < vlo - tol || T.hi > vhi + tol) return std::nullopt;
        Real a = map.invert_branch(branches[static_cast<std::size_t>(j)], std::clamp(T.lo, vlo, vhi));
        Real c = map.invert_branch(branches[static_cast<std::size_t>(j)], std::clamp(T.hi, vlo, vhi));
        if (a > c) std::swap(a, c);
        T = {a, c};
        Real z = orbit[static_cast<std::size_t>(j)];
        if (z < T.lo - tol || z > T.hi + tol) return std::nullopt;
    }
    return T;
}

} // namespace detail

// Witness intervals V_n around p with f^{k_n} a homeomorphism from V_n onto
// the relative delta-ball at f^{k_n}(p), k_n strictly increasing.  With
// nearby=true the base points may instead converge to p along preperiodic
// orbits, which rescues points whose own orbit runs through a turning point.
template <class Real>
std::optional<ExpansionWitness<Real>> certify_expanding(const MultimodalMap<Real>& map,
                                                        Real p, Real delta,
                                                        bool nearby = false,
                                                        ExpansionOptions opts = {}) {
    ExpansionWitness<Real> w;
    w.p = p;
    w.delta = delta;
    w.nearby = false;

    // direct attempt at p itself
    {
        std::vector<Real> orbit = iterate(map, p, opts.k_max);
        std::vector<int> branches(orbit.size());
        for (std::size_t j = 0; j < orbit.size(); ++j)
            branches[j] = map.branch_index(orbit[j]);
        const Real ntol = Real(1e-11) * std::max(Real(1), map.domain().width());
        for (int k = 1; k <= opts.k_max; ++k) {
            auto V = detail::pull_ball_back(map, orbit, branches, k, delta);
            if (!V) continue;
            if (!w.scales.empty()) {
                const auto& prev = w.scales.back().V;
                if (!(V->lo >= prev.lo - ntol && V->hi <= prev.hi + ntol &&
                      V->width() < prev.width()))
                    continue;
            }
            w.scales.push_back({p, *V, k, orbit[static_cast<std::size_t>(k)]});
            if (static_cast<int>(w.scales.size()) >= opts.scales_wanted) break;
        }
        if (static_cast<int>(w.scales.size()) >= opts.scales_needed) return w;
    }
    if (!nearby) return std::nullopt;

    // preperiodic approximants: shrinking windows around p, each contributing
    // one scale whose base point lies in the window
    auto cycles = find_periodic_points(map, opts.cycle_period_bound, opts.cycle_grid);
    std::vector<std::vector<Real>> cycle_orbits;
    std::vector<Real> landing;  // flattened cycle points
    std::vector<std::size_t> landing_cycle, landing_pos;
    for (const auto& c : cycles) {
        if (c.kind != CycleKind::repellor) continue;
        bool seen = false;
        for (const auto& orb : cycle_orbits)
            for (Real q : orb)
                if (std::abs(q - c.location) <= Real(1e-9)) seen = true;
        if (seen) continue;
        auto orb = iterate(map, c.location, c.period - 1);
        for (std::size_t i = 0; i < orb.size(); ++i) {
            landing.push_back(orb[i]);
            landing_cycle.push_back(cycle_orbits.size());
            landing_pos.push_back(i);
        }
        cycle_orbits.push_back(std::move(orb));
    }
    if (landing.empty()) return std::nullopt;

    w.scales.clear();
    w.nearby = true;
    int last_k = 0;
    for (int m = 0; m < opts.window_halvings; ++m) {
        Real u = Real(opts.window0) * std::pow(Real(2), -Real(m));
        Interval<Real> window{p - u, p + u};
        window = window.intersect(map.domain());
        if (window.width() <= Real(0)) break;
        std::vector<PreperiodicPoint<Real>> cands;
        try {
            cands = find_preperiodic_in_window(map, landing, window,
                                               opts.preperiodic_depth, std::size_t(6));
        } catch (const DepthExplosion&) {
            break;
        }
        bool took = false;
        for (const auto& cand : cands) {
            const auto& cyc = cycle_orbits[landing_cycle[static_cast<std::size_t>(cand.cycle_index)]];
            std::size_t pos = landing_pos[static_cast<std::size_t>(cand.cycle_index)];
            int per = static_cast<int>(cyc.size());
            // extend the certified chain around the cycle a few times
            std::vector<Real> orbit = cand.chain_points;
            std::vector<int> branches = cand.branches;
            for (int i = 0; i < 3 * per; ++i) {
                Real z = cyc[(pos + static_cast<std::size_t>(i)) % static_cast<std::size_t>(per)];
                branches.push_back(map.branch_index(z));
                orbit.push_back(cyc[(pos + static_cast<std::size_t>(i) + 1) % static_cast<std::size_t>(per)]);
            }
            int k_hi = static_cast<int>(orbit.size()) - 1;
            for (int k = std::max(last_k + 1, cand.steps); k <= k_hi; ++k) {
                auto V = detail::pull_ball_back(map, orbit, branches, k, delta);
                if (!V) continue;
                w.scales.push_back({cand.point, *V, k, orbit[static_cast<std::size_t>(k)]});
                last_k = k;
                took = true;
                break;
            }
            if (took) break;
        }
        if (static_cast<int>(w.scales.size()) >= opts.scales_wanted) break;
    }
    if (static_cast<int>(w.scales.size()) >= opts.scales_needed) return w;
    return std::nullopt;
}

// Independent forward check of a witness: push each V through the map by
// exact interval images, demanding branch purity at every step, and compare
// the final interval with the claimed relative ball.
template <class Real>
bool verify_expansion_witness(const MultimodalMap<Real>& map,
                              const ExpansionWitness<Real>& w,
                              Real tol = Real(1e-9), std::string* why = nullptr) {
    auto fail = [&](const std::string& msg) {
        if (why) *why = msg;
        return false;
    };
    if (static_cast<int>(w.scales.size()) < 3) return fail("fewer than three scales");
    const Real W = map.domain().width();
    int prev_k = 0;
    Interval<Real> prev_V = map.domain();
    for (std::size_t s = 0; s < w.scales.size(); ++s) {
        const auto& sc = w.scales[s];
        if (sc.k <= prev_k) return fail("iteration counts not strictly increasing");
        if (!w.nearby) {
            if (std::abs(sc.base - w.p) > tol) return fail("scale base drifted off the point");
            if (s > 0 && !(sc.V.lo >= prev_V.lo - tol * W && sc.V.hi <= prev_V.hi + tol * W))
                return fail("witness intervals fail to nest");
        }
        if (!(sc.base >= sc.V.lo - tol && sc.base <= sc.V.hi + tol))
            return fail("base point outside its witness interval");

        Interval<Real> I = sc.V;
        for (int j = 0; j < sc.k; ++j) {
            for (const auto& t : map.turning_points())
                if (t.location > I.lo + Real(1e-12) * W && t.location < I.hi - Real(1e-12) * W) {
                    std::ostringstream os;
                    os << "turning point inside image at step " << j << " of scale " << s;
                    return fail(os.str());
                }
            I = map.image_interval(I);
        }
        // Endpoint roundoff is amplified by the full expansion factor of the
        // scale, so the comparison tolerance carries that factor.  A wrong
        // witness misses by order delta, far above this allowance.
        Real amp = Real(2) * w.delta / std::max(sc.V.width(), Real(1e-300));
        Real tol_eff = tol + Real(8) * std::numeric_limits<Real>::epsilon() * amp * W;
        if (tol_eff > w.delta / Real(4))
            return fail("scale too deep to verify in this precision");
        Interval<Real> B = relative_ball(sc.target, w.delta, map.domain());
        if (std::abs(I.lo - B.lo) > tol_eff || std::abs(I.hi - B.hi) > tol_eff) {
            std::ostringstream os;
            os << "final image misses the delta-ball at scale " << s << " (lo err "
               << std::abs(I.lo - B.lo) << ", hi err " << std::abs(I.hi - B.hi) << ")";
            return fail(os.str());
        }
        prev_k = sc.k;
        prev_V = sc.V;
    }
    if (w.nearby) {
        // approximants must actually converge to p
        Real last = std::abs(w.scales.back().base - w.p);
        Real first = std::abs(w.scales.front().base - w.p);
        if (!(last <= first + tol)) return fail("approximant bases fail to approach the point");
    }
    return true;
}

// ---------------------------------------------------------------------------
// derivative growth away from the turning points
// ---------------------------------------------------------------------------

template <class Real>
struct ManeSegment {
    Real start{};
    int length{};
    Real slope{};  // least-squares slope of log |Df^j| in j
};

template <class Real>
struct ManeEstimate {
    Real gamma{};
    Real lambda_hat{};
    Real c_hat{};
    int samples{};
    std::vector<ManeSegment<Real>> segments;
};

// Empirical constants C, lambda with |Df^j(x)| >= C lambda^j over sampled
// orbit segments that keep distance gamma from every turning point.  The
// estimate is an infimum fit: every sampled segment satisfies the bound.
template <class Real>
ManeEstimate<Real> estimate_mane_constants(const MultimodalMap<Real>& map, Real gamma,
                                           const CounterRng& rng, int n_samples = 200,
                                           int n_max = 60, int min_len = 8) {
    const auto& dom = map.domain();
    ManeEstimate<Real> est;
    est.gamma = gamma;
    est.samples = n_samples;

    auto clear_of_turnings = [&](Real x) {
        for (const auto& t : map.turning_points())
            if (std::abs(x - t.location) <= gamma) return false;
        return true;
    };

    std::vector<std::vector<Real>> logs;  // per segment: s_0 = 0, s_1, ...
    for (int i = 0; i < n_samples; ++i) {
        Real x = Real(rng.uniform(static_cast<std::uint64_t>(i),
                                  static_cast<double>(dom.lo), static_cast<double>(dom.hi)));
        std::vector<Real> s{Real(0)};
        Real start = x;
        for (int j = 0; j < n_max && clear_of_turnings(x); ++j) {
            Real d = map.derivative(x, 1);
            if (std::abs(d) < Real(1e-300)) break;
            s.push_back(s.back() + std::log(std::abs(d)));
            x = map.eval(x);
        }
        int len = static_cast<int>(s.size()) - 1;
        if (len < min_len) continue;
        // least squares through (j, s_j), j = 0..len
        Real n = Real(len + 1), sj = 0, sjj = 0, sv = 0, sjv = 0;
        for (int j = 0; j <= len; ++j) {
            sj += Real(j);
            sjj += Real(j) * Real(j);
            sv += s[static_cast<std::size_t>(j)];
            sjv += Real(j) * s[static_cast<std::size_t>(j)];
        }
        Real slope = (n * sjv - sj * sv) / (n * sjj - sj * sj);
        est.segments.push_back({start, len, slope});
        logs.push_back(std::move(s));
    }
    if (est.segments.empty()) {
        std::ostringstream os;
        os << map.label() << ": no orbit segment of length >= " << min_len
           << " stays " << static_cast<double>(gamma) << " away from the turning points";
        throw NoAdmissibleSegments(os.str());
    }
    Real log_lambda = est.segments.front().slope;
    for (const auto& seg : est.segments) log_lambda = std::min(log_lambda, seg.slope);
    est.lambda_hat = std::exp(log_lambda);
    Real log_c = Real(0);
    for (const auto& s : logs)
        for (std::size_t j = 0; j < s.size(); ++j)
            log_c = std::min(log_c, s[j] - Real(j) * log_lambda);
    est.c_hat = std::exp(log_c);
    return est;
}

// First n with a turning point interior to f^n(J), tracking exact interval
// images.  Maps without turning points never capture.
template <class Real>
std::optional<int> forward_capture_time(const MultimodalMap<Real>& map,
                                        Interval<Real> J, int n_max = 200) {
    Interval<Real> I = J;
    for (int n = 0; n <= n_max; ++n) {
        for (const auto& t : map.turning_points())
            if (t.location > I.lo && t.location < I.hi) return n;
        I = map.image_interval(I);
    }
    return std::nullopt;
}

} // namespace conjlab
