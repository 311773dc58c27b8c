#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <sstream>
#include <vector>

#include "conjlab/errors.hpp"
#include "conjlab/map.hpp"

namespace conjlab {

template <class Real>
std::vector<Real> iterate(const MultimodalMap<Real>& map, Real x, int n) {
    std::vector<Real> orbit;
    orbit.reserve(static_cast<std::size_t>(n) + 1);
    orbit.push_back(x);
    for (int i = 0; i < n; ++i) orbit.push_back(map.eval(orbit.back()));
    return orbit;
}

enum class CycleKind { repellor, neutral, attractor };

template <class Real>
struct PeriodicPoint {
    Real location{};
    int period{};        // minimal period
    Real multiplier{};   // product of f' along the cycle
    CycleKind kind{};
};

// Multiplier band treated as neutral; attracting or neutral cycles violate
// the standing hypotheses and gate the theorem-level diagnostics.
inline constexpr double kNeutralBand = 1e-6;

template <class Real>
CycleKind classify_multiplier(Real mu) {
    Real a = std::abs(mu);
    if (a > Real(1) + Real(kNeutralBand)) return CycleKind::repellor;
    if (a < Real(1) - Real(kNeutralBand)) return CycleKind::attractor;
    return CycleKind::neutral;
}

// All periodic points of minimal period <= period_max: sign changes of
// f^p(x) - x on a uniform grid, refined by bisection.  Throws GridTooCoarse
// when two distinct refined roots share a grid cell, since further roots may
// then be hiding between nodes.
template <class Real>
std::vector<PeriodicPoint<Real>> find_periodic_points(const MultimodalMap<Real>& map,
                                                      int period_max,
                                                      int grid = 1 << 16) {
    const auto& dom = map.domain();
    const Real W = dom.width();
    const Real match_tol = Real(1e-7) * std::max(Real(1), W);

    // orbit displacement tables: disp[p][i] = f^{p+1}(node_i) - node_i
    std::vector<std::vector<Real>> disp(static_cast<std::size_t>(period_max));
    for (auto& d : disp) d.resize(static_cast<std::size_t>(grid) + 1);
    for (int i = 0; i <= grid; ++i) {
        Real x = dom.lo + W * Real(i) / Real(grid);
        Real z = x;
        for (int p = 0; p < period_max; ++p) {
            z = map.eval(z);
            disp[static_cast<std::size_t>(p)][static_cast<std::size_t>(i)] = z - x;
        }
    }

    std::vector<PeriodicPoint<Real>> out;
    auto already_found = [&](Real r, int upto_period) {
        for (const auto& q : out)
            if (q.period <= upto_period && std::abs(q.location - r) <= match_tol)
                return true;
        return false;
    };

    for (int p = 1; p <= period_max; ++p) {
        const auto& v = disp[static_cast<std::size_t>(p - 1)];
        std::vector<Real> roots;
        auto push_root = [&](Real r) {
            for (Real q : roots)
                if (std::abs(q - r) <= match_tol) return;
            roots.push_back(r);
        };
        auto fp = [&](Real x) {
            Real z = x;
            for (int j = 0; j < p; ++j) z = map.eval(z);
            return z - x;
        };
        for (int i = 0; i <= grid; ++i) {
            if (v[static_cast<std::size_t>(i)] == Real(0)) {
                push_root(dom.lo + W * Real(i) / Real(grid));
            } else if (i < grid) {
                Real a = v[static_cast<std::size_t>(i)];
                Real b = v[static_cast<std::size_t>(i + 1)];
                if ((a < Real(0)) == (b < Real(0)) || b == Real(0)) continue;
                Real lo = dom.lo + W * Real(i) / Real(grid);
                Real hi = dom.lo + W * Real(i + 1) / Real(grid);
                Real flo = a;
                for (int it = 0; it < 80 && hi - lo > Real(1e-13) * std::max(Real(1), W); ++it) {
                    Real mid = (lo + hi) / Real(2);
                    Real fm = fp(mid);
                    if ((fm < Real(0)) == (flo < Real(0))) {
                        lo = mid;
                        flo = fm;
                    } else {
                        hi = mid;
                    }
                }
                push_root((lo + hi) / Real(2));
            }
        }

        // grid adequacy: distinct roots must be separated by at least a cell
        std::sort(roots.begin(), roots.end());
        const Real cell = W / Real(grid);
        for (std::size_t i = 0; i + 1 < roots.size(); ++i) {
            if (roots[i + 1] - roots[i] > match_tol && roots[i + 1] - roots[i] < cell) {
                std::ostringstream os;
                os << map.label() << ": two period-" << p
                   << " roots inside one grid cell; raise the grid resolution";
                throw GridTooCoarse(os.str());
            }
        }

        for (Real r : roots) {
            // minimal period: does a proper divisor already fix r?
            bool minimal = true;
            for (int d = 1; d < p; ++d) {
                if (p % d != 0) continue;
                Real z = r;
                for (int j = 0; j < d; ++j) z = map.eval(z);
                if (std::abs(z - r) <= match_tol) {
                    minimal = false;
                    break;
                }
            }
            if (!minimal || already_found(r, p)) continue;
            Real mu = Real(1);
            Real z = r;
            for (int j = 0; j < p; ++j) {
                mu *= map.derivative(z, 1);
                z = map.eval(z);
            }
            out.push_back({r, p, mu, classify_multiplier(mu)});
        }
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
        return a.location < b.location;
    });
    return out;
}

template <class Real>
bool has_non_repelling_cycle(const std::vector<PeriodicPoint<Real>>& pts) {
    for (const auto& p : pts)
        if (p.kind != CycleKind::repellor) return true;
    return false;
}

// ---------------------------------------------------------------------------
// backward orbits
// ---------------------------------------------------------------------------

template <class Real>
struct BackwardOrbitNode {
    Real point{};
    int depth{};
    int parent{-1};    // index into the tree arena, -1 for the root
    int branch{-1};    // branch of the map containing this node
    bool noncritical{true};
};

template <class Real>
struct BackwardOrbitTree {
    std::vector<BackwardOrbitNode<Real>> nodes;

    // branch word applied forward from nodes[idx] back to the root
    std::vector<int> branch_chain(int idx) const {
        std::vector<int> chain;
        for (int i = idx; i >= 0 && nodes[static_cast<std::size_t>(i)].parent >= 0;
             i = nodes[static_cast<std::size_t>(i)].parent)
            chain.push_back(nodes[static_cast<std::size_t>(i)].branch);
        return chain;
    }

    std::vector<Real> noncritical_points(int min_depth = 0) const {
        std::vector<Real> pts;
        for (const auto& n : nodes)
            if (n.noncritical && n.depth >= min_depth) pts.push_back(n.point);
        std::sort(pts.begin(), pts.end());
        return pts;
    }
};

// Depth-1 preimages of y.  A preimage landing exactly on a turning point is
// reported once and flagged critical.
template <class Real>
std::vector<BackwardOrbitNode<Real>> preimages(const MultimodalMap<Real>& map, Real y) {
    std::vector<BackwardOrbitNode<Real>> out;
    const Real tol = Real(1e-12) * std::max(Real(1), map.domain().width());
    int bi = 0;
    for (const auto& b : map.branches()) {
        Real flo = b.jet(b.lo).f, fhi = b.jet(b.hi).f;
        Real vlo = std::min(flo, fhi), vhi = std::max(flo, fhi);
        if (y >= vlo - tol && y <= vhi + tol) {
            // at a turning value the root is tangent and the solver cannot
            // localise it better than the square root of the tolerance, so
            // snap onto the turning point explicitly
            Real x;
            if (map.is_turning(b.lo) && std::abs(y - flo) <= tol)
                x = b.lo;
            else if (map.is_turning(b.hi) && std::abs(y - fhi) <= tol)
                x = b.hi;
            else
                x = map.snap(map.invert_branch(bi, y));
            bool dup = false;
            for (auto& n : out)
                if (std::abs(n.point - x) <= tol) dup = true;
            if (!dup)
                out.push_back({x, 1, -1, bi, !map.is_turning(x)});
        }
        ++bi;
    }
    std::sort(out.begin(), out.end(),
              [](const auto& a, const auto& b) { return a.point < b.point; });
    return out;
}

enum class OrbitDirection { backward, forward };

// Bounded enumeration of the noncritical (pre-)orbit of p.  Backward: BFS of
// the preimage tree, deduplicated by point; nodes on a chain through a
// turning point are kept but flagged and never expanded, since the chain
// derivative vanishes.  Forward: the orbit until it hits a turning point.
template <class Real>
BackwardOrbitTree<Real> noncritical_orbit(const MultimodalMap<Real>& map, Real p,
                                          int depth, OrbitDirection dir,
                                          std::size_t node_cap = 1000000) {
    BackwardOrbitTree<Real> tree;
    if (dir == OrbitDirection::forward) {
        Real x = map.snap(p);
        tree.nodes.push_back({x, 0, -1, map.branch_index(x), !map.is_turning(x)});
        for (int d = 1; d <= depth; ++d) {
            if (!tree.nodes.back().noncritical) break;
            x = map.eval(x);
            tree.nodes.push_back({x, d, static_cast<int>(tree.nodes.size()) - 1,
                                  map.branch_index(x), !map.is_turning(x)});
        }
        return tree;
    }

    const Real tol = Real(1e-12) * std::max(Real(1), map.domain().width());
    std::map<Real, int> seen;
    auto visit = [&](Real x) {
        auto it = seen.lower_bound(x - tol);
        if (it != seen.end() && std::abs(it->first - x) <= tol) return false;
        seen.emplace(x, 1);
        return true;
    };

    Real root = map.snap(p);
    visit(root);
    tree.nodes.push_back({root, 0, -1, -1, !map.is_turning(root)});
    std::size_t head = 0;
    while (head < tree.nodes.size()) {
        auto node = tree.nodes[head];  // copy: the arena may reallocate
        int parent_idx = static_cast<int>(head);
        ++head;
        // A critical root is still expandable: the chain-derivative obstruction
        // concerns turning points strictly between a node and the root.
        bool expandable = node.parent < 0 || node.noncritical;
        if (node.depth >= depth || !expandable) continue;
        bool inherited = node.parent < 0 ? true : node.noncritical;
        for (const auto& pre : preimages(map, node.point)) {
            if (!visit(pre.point)) continue;
            if (tree.nodes.size() >= node_cap) {
                std::ostringstream os;
                os << map.label() << ": backward orbit exceeded " << node_cap
                   << " nodes at depth " << node.depth + 1;
                throw DepthExplosion(os.str());
            }
            tree.nodes.push_back({pre.point, node.depth + 1, parent_idx, pre.branch,
                                  inherited && pre.noncritical});
        }
    }
    return tree;
}

} // namespace conjlab
