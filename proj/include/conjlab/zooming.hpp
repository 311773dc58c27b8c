#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "conjlab/conjugacy.hpp"
#include "conjlab/errors.hpp"
#include "conjlab/interval.hpp"
#include "conjlab/lrd.hpp"
#include "conjlab/map.hpp"
#include "conjlab/orbit.hpp"
#include "conjlab/partition.hpp"
#include "conjlab/rng.hpp"

namespace conjlab {

// A zooming pair: f^k carries J homeomorphically onto the fixed target V.
template <class Real>
struct ZoomingPair {
    Interval<Real> J;
    int k{};
    std::vector<int> chain;  // branch word of f along J
};

// All zooms of V up to depth k_max: monotone cells whose image covers V,
// restricted by pulling V back through the cell's branch word.  Sharing one
// target makes distortion constants across depths directly comparable.
template <class Real>
std::vector<ZoomingPair<Real>> find_zooming_pairs(const MultimodalMap<Real>& map,
                                                  const Interval<Real>& V, int k_max,
                                                  std::size_t max_pairs = 64,
                                                  std::size_t cell_cap = 100000) {
    const Real m = Real(1e-12) * std::max(Real(1), map.domain().width());
    std::vector<ZoomingPair<Real>> out;
    std::vector<MonotoneCell<Real>> level{root_cell(map)};
    std::size_t cells = 1;
    for (int d = 1; d <= k_max && out.size() < max_pairs; ++d) {
        std::vector<MonotoneCell<Real>> next;
        for (const auto& c : level) {
            for (auto& kid : refine_cell(map, c)) {
                if (++cells > cell_cap) return out;
                if (kid.image.lo <= V.lo - m && kid.image.hi >= V.hi + m &&
                    out.size() < max_pairs) {
                    Real a = pullback_through_chain(map, kid.chain, V.lo);
                    Real b = pullback_through_chain(map, kid.chain, V.hi);
                    if (a > b) std::swap(a, b);
                    out.push_back({{a, b}, d, kid.chain});
                }
                next.push_back(std::move(kid));
            }
        }
        level = std::move(next);
    }
    return out;
}

template <class Real>
struct ZoomingDistortion {
    Real alpha{};
    Real sup{};
    Real mean{};
    int triples{};
};

// Distortion of f^k on a zooming pair at exponent alpha, sampled over random
// monotone triples.  Triples are drawn in the target and pulled back through
// the branch word, so each domain/image pair is exact to backward accuracy.
template <class Real>
ZoomingDistortion<Real> zooming_distortion(const MultimodalMap<Real>& map,
                                           const ZoomingPair<Real>& pair, Real alpha,
                                           int n_triples = 64,
                                           const CounterRng& rng = CounterRng(1, "zoom")) {
    ZoomingDistortion<Real> out;
    out.alpha = alpha;
    std::uint64_t counter = 0;
    Real acc = 0;
    Real va = pair.J.lo, vb = pair.J.hi;
    for (std::size_t j = 0; j < pair.chain.size(); ++j) {
        va = map.eval(va);
        vb = map.eval(vb);
    }
    if (va > vb) std::swap(va, vb);
    Interval<Real> V{va, vb};

    for (int t = 0; t < n_triples; ++t) {
        Real u[3];
        bool ok = false;
        for (int a = 0; a < 200 && !ok; ++a) {
            for (auto& v : u)
                v = Real(rng.uniform(counter++, static_cast<double>(V.lo),
                                     static_cast<double>(V.hi)));
            std::sort(u, u + 3);
            if (u[1] - u[0] > Real(1e-12) && u[2] - u[1] > Real(1e-12)) ok = true;
        }
        if (!ok) continue;
        Real x = pullback_through_chain(map, pair.chain, u[0]);
        Real y = pullback_through_chain(map, pair.chain, u[1]);
        Real z = pullback_through_chain(map, pair.chain, u[2]);
        if (x > z) {
            std::swap(x, z);
            std::swap(u[0], u[2]);
        }
        try {
            Real d = alpha_ratio_distortion(x, y, z, u[0], u[1], u[2], alpha);
            out.sup = std::max(out.sup, d);
            acc += d;
            ++out.triples;
        } catch (const DegenerateTriple&) {
        }
    }
    out.mean = out.triples > 0 ? acc / Real(out.triples) : Real(0);
    return out;
}

template <class Real>
struct ZoomingScale {
    Interval<Real> V_n;  // pullback neighbourhood of p
    int k{};             // return count: f^k maps V_n onto V
};

// Matched zooming structure at a periodic point p: nested neighbourhoods
// V_n of p carried onto the fixed target V by f^{k_n}, their conjugate
// images carried onto h(V) by g^{k_n}, and distortion constants bounding
// log-ratio distortion by C * |image span|^alpha on both sides.
template <class Real>
struct ZoomingWitnessPair {
    Real p{};
    Interval<Real> V;
    std::vector<ZoomingScale<Real>> scales;
    Real alpha{};
    Real C_f{};
    Real C_g{};
};

template <class Real>
struct ZoomingWitnessOptions {
    Real radius0 = Real(0.05);
    int period_bound = 8;
    int scale_count = 4;
    int triples = 64;
    Real match_tol = Real(1e-4);
};

namespace detail {

// Newton refinement of a fixed point of map^q.  Boundary fixed points have
// no sign change inside the domain, so bracketing is not an option here.
template <class Real>
Real polish_cycle_point(const MultimodalMap<Real>& map, Real x, int q) {
    const auto& dom = map.domain();
    for (int it = 0; it < 12; ++it) {
        Real v = x, d = Real(1);
        for (int s = 0; s < q; ++s) {
            d *= map.derivative(v);
            v = map.eval(v);
        }
        Real denom = d - Real(1);
        if (std::abs(denom) < Real(1e-9)) break;
        x = dom.clamp(x - (v - x) / denom);
    }
    return x;
}

template <class Real>
Real cycle_residual(const MultimodalMap<Real>& map, Real x, int q) {
    Real v = x;
    for (int s = 0; s < q; ++s) v = map.eval(v);
    return std::abs(v - x);
}

} // namespace detail

// Zooming witness at a repelling periodic point of f, mirrored through the
// conjugacy.  The target V is pulled back through the cycle's branch word on
// each side independently; the two pullback towers must agree through the
// table at every scale, otherwise no witness is certified.
template <class Real>
ZoomingWitnessPair<Real> find_zooming_pair(const MultimodalMap<Real>& f,
                                           const MultimodalMap<Real>& g,
                                           const ConjugacyTable<Real>& table, Real p,
                                           Real alpha, int k_max,
                                           ZoomingWitnessOptions<Real> opts = {}) {
    const Real scale_f = std::max(Real(1), f.domain().width());
    const Real scale_g = std::max(Real(1), g.domain().width());
    if (!(alpha > Real(0)) || alpha > Real(1))
        throw DomainError("zooming exponent must lie in (0, 1]");
    if (p < f.domain().lo - Real(1e-12) * scale_f || p > f.domain().hi + Real(1e-12) * scale_f)
        throw DomainError("zooming base point outside the domain");

    // minimal period of p under f
    int q = 0;
    {
        Real z = p;
        for (int s = 1; s <= opts.period_bound; ++s) {
            z = f.eval(z);
            if (std::abs(z - p) <= Real(1e-7) * scale_f) {
                q = s;
                break;
            }
        }
    }
    if (q == 0) throw DomainError("zooming base point is not periodic within the bound");
    const Real pf = detail::polish_cycle_point(f, p, q);

    Real mult = Real(1);
    {
        Real z = pf;
        for (int s = 0; s < q; ++s) {
            mult *= f.derivative(z);
            z = f.eval(z);
        }
    }
    if (std::abs(mult) <= Real(1) + Real(1e-6))
        throw HypothesisError("zooming base cycle is not repelling");

    // branch words of the cycle on both sides
    std::vector<int> word_f;
    {
        Real z = pf;
        for (int s = 0; s < q; ++s) {
            word_f.push_back(f.branch_index(z));
            z = f.eval(z);
        }
    }
    Real pg = detail::polish_cycle_point(g, eval_conjugacy(table, pf), q);
    if (detail::cycle_residual(g, pg, q) > Real(1e-8) * scale_g)
        throw WitnessNotFound("conjugate base point is not periodic on the other side");
    std::vector<int> word_g;
    {
        Real z = pg;
        for (int s = 0; s < q; ++s) {
            word_g.push_back(g.branch_index(z));
            z = g.eval(z);
        }
    }

    auto pull_point = [](const MultimodalMap<Real>& map, const std::vector<int>& word,
                         int rounds, Real y) {
        Real z = y;
        for (int r = 0; r < rounds; ++r)
            for (auto it = word.rbegin(); it != word.rend(); ++it)
                z = map.invert_branch(*it, z);
        return z;
    };
    auto pull_interval = [&](const MultimodalMap<Real>& map, const std::vector<int>& word,
                             int rounds, Interval<Real> V) {
        Real a = pull_point(map, word, rounds, V.lo);
        Real b = pull_point(map, word, rounds, V.hi);
        if (a > b) std::swap(a, b);
        return Interval<Real>{a, b};
    };

    const int n_scales = std::min(opts.scale_count, k_max / q);
    if (n_scales < 1) throw WitnessNotFound("depth bound below the cycle period");

    ZoomingWitnessPair<Real> out;
    out.p = pf;
    out.alpha = alpha;

    Real r = opts.radius0;
    bool built = false;
    for (int attempt = 0; attempt < 40 && !built; ++attempt, r /= Real(2)) {
        Interval<Real> V{std::max(f.domain().lo, pf - r), std::min(f.domain().hi, pf + r)};
        if (!(V.width() > Real(1e-10) * scale_f)) break;
        try {
            std::vector<ZoomingScale<Real>> scales;
            Interval<Real> prev = V;
            const Interval<Real> Vg0{std::min(eval_conjugacy(table, V.lo),
                                              eval_conjugacy(table, V.hi)),
                                     std::max(eval_conjugacy(table, V.lo),
                                              eval_conjugacy(table, V.hi))};
            bool ok = true;
            for (int n = 1; n <= n_scales && ok; ++n) {
                Interval<Real> Vn = pull_interval(f, word_f, n, V);
                // strictly nested around the base point
                if (!(Vn.lo >= prev.lo - Real(1e-12) * scale_f &&
                      Vn.hi <= prev.hi + Real(1e-12) * scale_f) ||
                    !(Vn.width() < prev.width()) || pf < Vn.lo - Real(1e-10) ||
                    pf > Vn.hi + Real(1e-10)) {
                    ok = false;
                    break;
                }
                // the g-side pullback must be the conjugate image of the f-side one
                Real ha = eval_conjugacy(table, Vn.lo);
                Real hb = eval_conjugacy(table, Vn.hi);
                if (ha > hb) std::swap(ha, hb);
                Interval<Real> Wn = pull_interval(g, word_g, n, Vg0);
                if (std::abs(Wn.lo - ha) > opts.match_tol * scale_g ||
                    std::abs(Wn.hi - hb) > opts.match_tol * scale_g) {
                    ok = false;
                    break;
                }
                scales.push_back({Vn, n * q});
                prev = Vn;
            }
            if (ok && static_cast<int>(scales.size()) == n_scales) {
                out.V = V;
                out.scales = std::move(scales);
                built = true;
            }
        } catch (const DomainError&) {
            // pullback left a branch image: shrink the target and retry
        }
    }
    if (!built) throw WitnessNotFound("no matched pullback tower at the base point");

    // distortion constants over sampled triples, both sides, all scales
    const Interval<Real> Vg{std::min(eval_conjugacy(table, out.V.lo),
                                     eval_conjugacy(table, out.V.hi)),
                            std::max(eval_conjugacy(table, out.V.lo),
                                     eval_conjugacy(table, out.V.hi))};
    const CounterRng rng(1, "zoom-witness");
    std::uint64_t counter = 0;
    int used = 0;
    for (int n = 1; n <= n_scales; ++n) {
        for (int t = 0; t < opts.triples; ++t) {
            Real u[3];
            bool sep = false;
            for (int a = 0; a < 200 && !sep; ++a) {
                for (auto& v : u)
                    v = Real(rng.uniform(counter++, static_cast<double>(out.V.lo),
                                         static_cast<double>(out.V.hi)));
                std::sort(u, u + 3);
                if (u[1] - u[0] > Real(1e-10) && u[2] - u[1] > Real(1e-10)) sep = true;
            }
            if (!sep) continue;
            try {
                Real x0 = pull_point(f, word_f, n, u[0]);
                Real x1 = pull_point(f, word_f, n, u[1]);
                Real x2 = pull_point(f, word_f, n, u[2]);
                if (x0 > x2) std::swap(x0, x2);
                if ((x0 < x1) != (x1 < x2)) continue;
                Real span = u[2] - u[0];
                Real lrd = log_ratio_distortion(std::min(x0, x2), x1, std::max(x0, x2),
                                                u[0], u[1], u[2]);
                out.C_f = std::max(out.C_f, lrd / std::pow(span, alpha));

                Real w0 = Vg.lo + (Vg.hi - Vg.lo) * (u[0] - out.V.lo) / out.V.width();
                Real w1 = Vg.lo + (Vg.hi - Vg.lo) * (u[1] - out.V.lo) / out.V.width();
                Real w2 = Vg.lo + (Vg.hi - Vg.lo) * (u[2] - out.V.lo) / out.V.width();
                Real y0 = pull_point(g, word_g, n, w0);
                Real y1 = pull_point(g, word_g, n, w1);
                Real y2 = pull_point(g, word_g, n, w2);
                if (y0 > y2) std::swap(y0, y2);
                Real gspan = w2 - w0;
                Real lrd_g = log_ratio_distortion(std::min(y0, y2), y1, std::max(y0, y2),
                                                  w0, w1, w2);
                out.C_g = std::max(out.C_g, lrd_g / std::pow(gspan, alpha));
                ++used;
            } catch (const DegenerateTriple&) {
            } catch (const DomainError&) {
            }
        }
    }
    if (used == 0) throw WitnessNotFound("no admissible distortion triples survived");
    return out;
}

} // namespace conjlab
