#pragma once

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>
#include <vector>

#include "conjlab/errors.hpp"
#include "conjlab/itinerary.hpp"
#include "conjlab/map.hpp"
#include "conjlab/orbit.hpp"
#include "conjlab/rng.hpp"

namespace conjlab {

template <class Real>
struct Breakpoint {
    Real x{};
    Real y{};
    int level{};  // refinement level that produced the pair
};

template <class Real>
struct ConjugacyTable {
    std::vector<Breakpoint<Real>> points;  // sorted by x
    bool orientation_preserving{true};
    int depth{0};
    std::string f_label, g_label;
};

struct ConjugacyOptions {
    int kneading_horizon = 48;
    int attractor_gate_period = 0;  // 0 disables the cycle-type gate
};

// Topological conjugacy by matched breakpoint refinement: level 0 pairs the
// turning partitions, level j+1 pulls every current breakpoint back through
// the corresponding branches on both sides.  Kneading data must agree to the
// horizon before any refinement is attempted.
template <class Real>
ConjugacyTable<Real> build_conjugacy(const MultimodalMap<Real>& f,
                                     const MultimodalMap<Real>& g, int depth,
                                     ConjugacyOptions opts = {}) {
    if (f.branches().size() != g.branches().size() ||
        f.turning_points().size() != g.turning_points().size()) {
        std::ostringstream os;
        os << f.label() << " vs " << g.label() << ": branch structure differs ("
           << f.branches().size() << " vs " << g.branches().size() << " branches)";
        throw KneadingMismatch(os.str());
    }
    if (opts.attractor_gate_period > 0) {
        bool af = has_non_repelling_cycle(find_periodic_points(f, opts.attractor_gate_period));
        bool ag = has_non_repelling_cycle(find_periodic_points(g, opts.attractor_gate_period));
        if (af != ag) {
            std::ostringstream os;
            os << f.label() << " vs " << g.label()
               << ": only one side has a non-repelling cycle of period <= "
               << opts.attractor_gate_period;
            throw KneadingMismatch(os.str());
        }
    }

    auto km = match_kneading(f, g, opts.kneading_horizon);
    if (!km.any()) {
        std::ostringstream os;
        os << f.label() << " vs " << g.label() << ": kneading data disagree to horizon "
           << opts.kneading_horizon;
        if (km.first_mismatch_preserving >= 0)
            os << " (preserving: turning " << (km.first_mismatch_preserving >> 16)
               << ", step " << (km.first_mismatch_preserving & 0xffff) << ")";
        throw KneadingMismatch(os.str());
    }
    const bool preserving = km.preserving;

    ConjugacyTable<Real> table;
    table.orientation_preserving = preserving;
    table.depth = depth;
    table.f_label = f.label();
    table.g_label = g.label();

    // level 0: endpoints and turning points, matched in partition order
    std::vector<Real> xs{f.domain().lo};
    for (const auto& t : f.turning_points()) xs.push_back(t.location);
    xs.push_back(f.domain().hi);
    std::vector<Real> ys{g.domain().lo};
    for (const auto& t : g.turning_points()) ys.push_back(t.location);
    ys.push_back(g.domain().hi);
    if (!preserving) std::reverse(ys.begin(), ys.end());
    for (std::size_t i = 0; i < xs.size(); ++i)
        table.points.push_back({xs[i], ys[i], 0});

    const Real mx = Real(1e-13) * std::max(Real(1), f.domain().width());
    const Real my = Real(1e-13) * std::max(Real(1), g.domain().width());
    const Real my_loose = Real(1e-9) * std::max(Real(1), g.domain().width());

    auto& pts = table.points;
    for (int level = 1; level <= depth; ++level) {
        std::vector<Breakpoint<Real>> fresh;
        for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
            Real xa = pts[i].x, xb = pts[i + 1].x;
            Real ya = pts[i].y, yb = pts[i + 1].y;
            int bf = f.branch_index((xa + xb) / Real(2));
            int bg = g.branch_index((ya + yb) / Real(2));
            Real fa = f.eval(xa), fb = f.eval(xb);
            Real ga = g.eval(ya), gb = g.eval(yb);
            Interval<Real> If{std::min(fa, fb), std::max(fa, fb)};
            Interval<Real> Ig{std::min(ga, gb), std::max(ga, gb)};

            auto lo = std::lower_bound(pts.begin(), pts.end(), If.lo + mx,
                                       [](const Breakpoint<Real>& b, Real v) { return b.x < v; });
            for (auto it = lo; it != pts.end() && it->x < If.hi - mx; ++it) {
                // the matched breakpoint must fall in the matched cell image
                if (it->y <= Ig.lo + my || it->y >= Ig.hi - my) {
                    if (it->y < Ig.lo - my_loose || it->y > Ig.hi + my_loose) {
                        std::ostringstream os;
                        os << f.label() << " vs " << g.label() << ": level " << level
                           << " breakpoint (" << static_cast<double>(it->x) << ", "
                           << static_cast<double>(it->y)
                           << ") falls inside a cell image on one side only";
                        throw AmbiguousCorrespondence(os.str());
                    }
                    continue;  // grazing contact below resolution
                }
                Real nx = f.invert_branch(bf, it->x);
                Real ny = g.invert_branch(bg, it->y);
                fresh.push_back({nx, ny, level});
            }
        }
        std::size_t old = pts.size();
        pts.insert(pts.end(), fresh.begin(), fresh.end());
        std::inplace_merge(pts.begin(), pts.begin() + static_cast<std::ptrdiff_t>(old), pts.end(),
                           [](const Breakpoint<Real>& a, const Breakpoint<Real>& b) {
                               return a.x < b.x;
                           });
        pts.erase(std::unique(pts.begin(), pts.end(),
                              [&](const Breakpoint<Real>& a, const Breakpoint<Real>& b) {
                                  return std::abs(a.x - b.x) <= mx;
                              }),
                  pts.end());
    }
    return table;
}

// Piecewise-linear evaluation, exact at breakpoints.
template <class Real>
Real eval_conjugacy(const ConjugacyTable<Real>& table, Real x) {
    const auto& p = table.points;
    if (x <= p.front().x) return p.front().y;
    if (x >= p.back().x) return p.back().y;
    auto it = std::upper_bound(p.begin(), p.end(), x,
                               [](Real v, const Breakpoint<Real>& b) { return v < b.x; });
    const auto& b = *it;
    const auto& a = *(it - 1);
    if (x == a.x) return a.y;
    Real t = (x - a.x) / (b.x - a.x);
    return a.y + t * (b.y - a.y);
}

template <class Real>
struct RefineOptions {
    int max_steps = 64;
    Real min_width = Real(0.02);
};

// Evaluation of the conjugacy on a tight cluster of points at scales far
// below the table resolution: push the whole cluster forward through one
// branch at a time until it reaches table scale, evaluate there, and pull
// back through the matched branches.  The pullback contracts the table error
// by the same factor as the values, so relative accuracy is scale-free.
template <class Real>
std::vector<Real> eval_conjugacy_refined(const MultimodalMap<Real>& f,
                                         const MultimodalMap<Real>& g,
                                         const ConjugacyTable<Real>& table,
                                         std::vector<Real> xs,
                                         RefineOptions<Real> opts = {}) {
    if (xs.empty()) return {};
    const int B = static_cast<int>(f.branches().size());
    auto sigma = [&](int b) { return table.orientation_preserving ? b : B - 1 - b; };

    auto hull = [&]() {
        auto [mn, mx] = std::minmax_element(xs.begin(), xs.end());
        return Interval<Real>{*mn, *mx};
    };

    std::vector<int> chain;
    for (int step = 0; step < opts.max_steps; ++step) {
        Interval<Real> H = hull();
        if (H.width() >= opts.min_width) break;
        bool straddle = false;
        for (const auto& t : f.turning_points())
            if (t.location > H.lo && t.location < H.hi) straddle = true;
        if (straddle || f.is_turning(H.lo) || f.is_turning(H.hi)) break;
        chain.push_back(f.branch_index(H.mid()));
        for (auto& x : xs) x = f.eval(x);
    }

    std::vector<Real> ys(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) ys[i] = eval_conjugacy(table, xs[i]);
    for (auto it = chain.rbegin(); it != chain.rend(); ++it) {
        // table values interpolated near a critical value can overshoot the
        // branch image; clamping absorbs that coarse error before inverting
        const auto& br = g.branches()[static_cast<std::size_t>(sigma(*it))];
        Real v0 = br.jet(br.lo).f, v1 = br.jet(br.hi).f;
        Real vlo = std::min(v0, v1), vhi = std::max(v0, v1);
        for (auto& y : ys) y = g.invert_branch(sigma(*it), std::min(vhi, std::max(vlo, y)));
    }
    return ys;
}

template <class Real>
struct ConjugacyCheck {
    Real sup_residual{};
    bool monotone{true};
    bool endpoints_fixed{true};
    int samples{};

    bool ok(Real tol) const { return monotone && endpoints_fixed && sup_residual <= tol; }
};

// Equivariance and order checks for a built table.
template <class Real>
ConjugacyCheck<Real> verify_conjugacy(const MultimodalMap<Real>& f,
                                      const MultimodalMap<Real>& g,
                                      const ConjugacyTable<Real>& table,
                                      int n_samples = 500,
                                      const CounterRng& rng = CounterRng(1, "conjugacy-check")) {
    ConjugacyCheck<Real> out;
    const auto& pts = table.points;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        bool inc = pts[i + 1].y > pts[i].y;
        if (inc != table.orientation_preserving) out.monotone = false;
    }
    Real glo = g.domain().lo, ghi = g.domain().hi;
    Real want_front = table.orientation_preserving ? glo : ghi;
    Real want_back = table.orientation_preserving ? ghi : glo;
    if (std::abs(pts.front().y - want_front) > Real(1e-12) ||
        std::abs(pts.back().y - want_back) > Real(1e-12))
        out.endpoints_fixed = false;

    auto residual_at = [&](Real x) {
        Real lhs = g.eval(eval_conjugacy(table, x));
        Real rhs = eval_conjugacy(table, f.eval(x));
        return std::abs(lhs - rhs);
    };
    for (const auto& b : pts) out.sup_residual = std::max(out.sup_residual, residual_at(b.x));
    const auto& dom = f.domain();
    for (int i = 0; i < n_samples; ++i) {
        Real x = Real(rng.uniform(static_cast<std::uint64_t>(i),
                                  static_cast<double>(dom.lo), static_cast<double>(dom.hi)));
        out.sup_residual = std::max(out.sup_residual, residual_at(x));
    }
    out.samples = n_samples + static_cast<int>(pts.size());
    return out;
}

// Local exponent of the conjugacy at each matched critical value.  Equal
// turning orders force exponent 1; a fitted exponent far from 1 certifies
// that no differentiable conjugacy can exist through that critical value.
template <class Real>
struct CriticalOrderPair {
    Real turning_f{};
    Real turning_g{};
    Real order_f{};
    Real order_g{};
    Real value_exponent{};  // fitted exponent of h at the critical value
    bool compatible{};
};

template <class Real>
std::vector<CriticalOrderPair<Real>> check_critical_order(const MultimodalMap<Real>& f,
                                                          const MultimodalMap<Real>& g,
                                                          const ConjugacyTable<Real>& table) {
    std::vector<CriticalOrderPair<Real>> out;
    const auto& tf = f.turning_points();
    const auto& tg = g.turning_points();
    const int T = static_cast<int>(tf.size());
    for (int i = 0; i < T; ++i) {
        int j = table.orientation_preserving ? i : T - 1 - i;
        CriticalOrderPair<Real> pair;
        pair.turning_f = tf[static_cast<std::size_t>(i)].location;
        pair.turning_g = tg[static_cast<std::size_t>(j)].location;
        pair.order_f = tf[static_cast<std::size_t>(i)].order;
        pair.order_g = tg[static_cast<std::size_t>(j)].order;

        Real v = f.eval(pair.turning_f);
        Real hv = eval_conjugacy(table, v);
        const auto& dom = f.domain();
        Real room_below = v - dom.lo, room_above = dom.hi - v;
        Real side = room_below >= room_above ? Real(-1) : Real(1);
        Real r0 = std::max(room_below, room_above) / Real(8);

        // log-log slope of |h(v + s r) - h(v)| across dyadic scales
        std::vector<Real> lr, ld;
        for (int k = 0; k < 8; ++k) {
            Real r = r0 * std::pow(Real(2), -Real(k));
            Real d = std::abs(eval_conjugacy(table, v + side * r) - hv);
            if (d <= Real(0)) continue;
            lr.push_back(std::log(r));
            ld.push_back(std::log(d));
        }
        Real n = Real(lr.size()), sx = 0, sxx = 0, sy = 0, sxy = 0;
        for (std::size_t k = 0; k < lr.size(); ++k) {
            sx += lr[k];
            sxx += lr[k] * lr[k];
            sy += ld[k];
            sxy += lr[k] * ld[k];
        }
        pair.value_exponent = n >= 2 ? (n * sxy - sx * sy) / (n * sxx - sx * sx) : Real(0);
        pair.compatible = std::abs(pair.order_f - pair.order_g) <= Real(1e-9) &&
                          std::abs(pair.value_exponent - Real(1)) <= Real(0.15);
        out.push_back(pair);
    }
    return out;
}

template <class Real>
void write_conjugacy_csv(std::ostream& os, const ConjugacyTable<Real>& table) {
    os << "x,y,depth\n";
    os.precision(17);
    for (const auto& b : table.points)
        os << static_cast<double>(b.x) << ',' << static_cast<double>(b.y) << ',' << b.level
           << '\n';
}

} // namespace conjlab
