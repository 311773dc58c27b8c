#pragma once

#include <cmath>
#include <functional>
#include <sstream>
#include <utility>
#include <vector>

#include "conjlab/conjugacy.hpp"
#include "conjlab/errors.hpp"
#include "conjlab/interval.hpp"
#include "conjlab/lrd.hpp"
#include "conjlab/rng.hpp"

namespace conjlab {

// All regularity probes consume h through a batch interface so that a
// table-backed conjugacy can share one branch chain per point cluster.
template <class Real>
using BatchEval = std::function<std::vector<Real>(const std::vector<Real>&)>;

template <class Real>
BatchEval<Real> pointwise_eval(std::function<Real(Real)> h) {
    return [h = std::move(h)](const std::vector<Real>& xs) {
        std::vector<Real> ys(xs.size());
        for (std::size_t i = 0; i < xs.size(); ++i) ys[i] = h(xs[i]);
        return ys;
    };
}

template <class Real>
BatchEval<Real> conjugacy_batch_eval(MultimodalMap<Real> f, MultimodalMap<Real> g,
                                     ConjugacyTable<Real> table,
                                     RefineOptions<Real> opts = {}) {
    return [f = std::move(f), g = std::move(g), table = std::move(table),
            opts](const std::vector<Real>& xs) {
        return eval_conjugacy_refined(f, g, table, xs, opts);
    };
}

// ---------------------------------------------------------------------------
// asymptotically affine behaviour across scales
// ---------------------------------------------------------------------------

template <class Real>
struct UaaOptions {
    std::vector<Real> gap_ratio_bounds{Real(1.5), Real(2), Real(4)};
    int triples_per_scale = 64;
    int scale_count = 14;
    Real scale0 = Real(0.1);
    Real scale_factor = Real(0.5);
    Real scale_floor = Real(1e-12);
    int max_draw_attempts = 200;
};

template <class Real>
struct UaaScaleRow {
    Real scale{};
    Real bound_C{};
    Real modulus{};  // sup of log ratio distortion over sampled triples
    int triples{};
};

template <class Real>
struct UaaReport {
    Real p{};
    std::vector<UaaScaleRow<Real>> rows;

    // worst modulus over the finest `count` scales, all ratio bounds
    Real tail_modulus(int count = 3) const {
        Real smallest = rows.empty() ? Real(0) : rows.back().scale;
        for (const auto& r : rows) smallest = std::min(smallest, r.scale);
        Real out = 0;
        Real cutoff = smallest * std::pow(Real(2), Real(count));
        for (const auto& r : rows)
            if (r.scale < cutoff) out = std::max(out, r.modulus);
        return out;
    }
    Real max_modulus() const {
        Real out = 0;
        for (const auto& r : rows) out = std::max(out, r.modulus);
        return out;
    }
};

// Modulus of asymptotic affinity: per scale s and gap-ratio bound C, the sup
// of the log ratio distortion over random monotone triples inside the
// relative s-ball at p whose gap ratio lies in [1/C, C].
template <class Real>
UaaReport<Real> uaa_test(const BatchEval<Real>& h, Real p, const Interval<Real>& domain,
                         UaaOptions<Real> opts = {},
                         const CounterRng& rng = CounterRng(1, "uaa")) {
    UaaReport<Real> report;
    report.p = p;
    std::uint64_t counter = 0;
    for (int si = 0; si < opts.scale_count; ++si) {
        Real s = opts.scale0 * std::pow(opts.scale_factor, Real(si));
        if (s < opts.scale_floor) {
            std::ostringstream os;
            os << "scale " << static_cast<double>(s) << " below floor "
               << static_cast<double>(opts.scale_floor);
            throw ScaleUnderflow(os.str());
        }
        Interval<Real> B = relative_ball(p, s, domain);
        for (Real C : opts.gap_ratio_bounds) {
            UaaScaleRow<Real> row{s, C, Real(0), 0};
            for (int t = 0; t < opts.triples_per_scale; ++t) {
                Real x = 0, y = 0, z = 0;
                bool got = false;
                for (int a = 0; a < opts.max_draw_attempts && !got; ++a) {
                    Real u[3];
                    for (auto& v : u)
                        v = Real(rng.uniform(counter++, static_cast<double>(B.lo),
                                             static_cast<double>(B.hi)));
                    std::sort(u, u + 3);
                    Real g1 = u[1] - u[0], g2 = u[2] - u[1];
                    if (g1 <= Real(kTripleGapFloor) || g2 <= Real(kTripleGapFloor)) continue;
                    Real r = g2 / g1;
                    if (r < Real(1) / C || r > C) continue;
                    x = u[0];
                    y = u[1];
                    z = u[2];
                    got = true;
                }
                if (!got) continue;
                auto hv = h({x, y, z});
                try {
                    row.modulus = std::max(row.modulus,
                                           log_ratio_distortion(x, y, z, hv[0], hv[1], hv[2]));
                    ++row.triples;
                } catch (const DegenerateTriple&) {
                    // image collapsed below resolution; skip the draw
                }
            }
            report.rows.push_back(row);
        }
    }
    return report;
}

// ---------------------------------------------------------------------------
// pointwise differentiability probe
// ---------------------------------------------------------------------------

enum class C1Verdict { c1_nonzero, derivative_zero, divergent, inconclusive };

inline const char* to_string(C1Verdict v) {
    switch (v) {
        case C1Verdict::c1_nonzero: return "c1_nonzero";
        case C1Verdict::derivative_zero: return "derivative_zero";
        case C1Verdict::divergent: return "divergent";
        case C1Verdict::inconclusive: return "inconclusive";
    }
    return "inconclusive";
}

enum class ProbeSide { automatic, below, above };

template <class Real>
struct C1Options {
    Real scale0 = Real(0.1);
    int scale_count = 20;
    ProbeSide side = ProbeSide::automatic;
    Real spread_tol = Real(1e-2);     // relative spread of the last estimates
    Real nonzero_floor = Real(1e-3);  // smallest derivative accepted as nonzero
};

template <class Real>
struct C1Report {
    C1Verdict verdict{C1Verdict::inconclusive};
    Real derivative{};
    std::vector<std::pair<Real, Real>> estimates;  // (scale, quotient)
};

// Difference quotients at geometric scales: symmetric in the interior,
// one-sided at the boundary.  Stable nonzero limits certify C1 behaviour at
// the point; geometric decay certifies a vanishing derivative; geometric
// growth certifies divergence.
template <class Real>
C1Report<Real> c1_at_point(const BatchEval<Real>& h, Real p, const Interval<Real>& domain,
                           C1Options<Real> opts = {}) {
    C1Report<Real> rep;
    ProbeSide side = opts.side;
    bool symmetric = false;
    if (side == ProbeSide::automatic) {
        bool room_below = p - opts.scale0 / Real(2) >= domain.lo;
        bool room_above = p + opts.scale0 / Real(2) <= domain.hi;
        symmetric = room_below && room_above;
        if (!symmetric) side = room_above ? ProbeSide::above : ProbeSide::below;
    }
    for (int j = 0; j < opts.scale_count; ++j) {
        Real s = opts.scale0 * std::pow(Real(2), -Real(j));
        Real est;
        if (symmetric) {
            if (p - s < domain.lo || p + s > domain.hi) continue;
            auto v = h({p - s, p + s});
            est = (v[1] - v[0]) / (Real(2) * s);
        } else if (side == ProbeSide::above) {
            if (p + s > domain.hi) continue;
            auto v = h({p, p + s});
            est = (v[1] - v[0]) / s;
        } else {
            if (p - s < domain.lo) continue;
            auto v = h({p - s, p});
            est = (v[1] - v[0]) / s;
        }
        rep.estimates.push_back({s, est});
    }

    const auto& e = rep.estimates;
    const std::size_t n = e.size();

    // stable nonzero limit
    if (n >= 3) {
        Real a = e[n - 3].second, b = e[n - 2].second, c = e[n - 1].second;
        Real m = std::max({std::abs(a), std::abs(b), std::abs(c)});
        Real spread = std::max({std::abs(a - b), std::abs(b - c), std::abs(a - c)});
        if (m >= opts.nonzero_floor && spread <= opts.spread_tol * m) {
            rep.verdict = C1Verdict::c1_nonzero;
            rep.derivative = c;
            return rep;
        }
    }

    // geometric decay or growth of the quotients over at least 4 scales
    int decay_run = 0, growth_run = 0, best_decay = 0, best_growth = 0;
    for (std::size_t j = 0; j + 1 < n; ++j) {
        Real a = std::abs(e[j].second), b = std::abs(e[j + 1].second);
        if (a > Real(0)) {
            Real r = b / a;
            decay_run = (r > Real(0.3) && r < Real(0.7)) ? decay_run + 1 : 0;
            growth_run = r > Real(1.3) ? growth_run + 1 : 0;
            best_decay = std::max(best_decay, decay_run);
            best_growth = std::max(best_growth, growth_run);
        } else {
            decay_run = growth_run = 0;
        }
    }
    if (best_decay >= 4 && std::abs(e.back().second) < opts.nonzero_floor) {
        rep.verdict = C1Verdict::derivative_zero;
        rep.derivative = Real(0);
        return rep;
    }
    if (best_growth >= 4) {
        rep.verdict = C1Verdict::divergent;
        return rep;
    }
    rep.verdict = C1Verdict::inconclusive;
    return rep;
}

// ---------------------------------------------------------------------------
// local scaling exponent
// ---------------------------------------------------------------------------

template <class Real>
struct HolderOptions {
    Real r0 = Real(0.05);
    int scale_count = 12;
    ProbeSide side = ProbeSide::automatic;
};

template <class Real>
struct HolderFit {
    Real exponent{};
    std::vector<std::pair<Real, Real>> data;  // (log r, log osc)
};

// Log-log slope of the oscillation |h(p +- r) - h(p)| across dyadic scales.
template <class Real>
HolderFit<Real> holder_exponent(const BatchEval<Real>& h, Real p,
                                const Interval<Real>& domain, HolderOptions<Real> opts = {}) {
    HolderFit<Real> fit;
    bool use_below = opts.side != ProbeSide::above && p - opts.r0 >= domain.lo;
    bool use_above = opts.side != ProbeSide::below && p + opts.r0 <= domain.hi;
    if (!use_below && !use_above) {
        use_below = opts.side != ProbeSide::above && p > domain.lo;
        use_above = opts.side != ProbeSide::below && p < domain.hi;
    }
    Real hp = h({p})[0];
    for (int j = 0; j < opts.scale_count; ++j) {
        Real r = opts.r0 * std::pow(Real(2), -Real(j));
        Real osc = 0;
        if (use_below && p - r >= domain.lo) osc = std::max(osc, std::abs(h({p - r})[0] - hp));
        if (use_above && p + r <= domain.hi) osc = std::max(osc, std::abs(h({p + r})[0] - hp));
        if (osc > Real(0)) fit.data.push_back({std::log(r), std::log(osc)});
    }
    Real n = Real(fit.data.size()), sx = 0, sxx = 0, sy = 0, sxy = 0;
    for (const auto& [lx, ly] : fit.data) {
        sx += lx;
        sxx += lx * lx;
        sy += ly;
        sxy += lx * ly;
    }
    fit.exponent = n >= 2 ? (n * sxy - sx * sy) / (n * sxx - sx * sx) : Real(0);
    return fit;
}

} // namespace conjlab
