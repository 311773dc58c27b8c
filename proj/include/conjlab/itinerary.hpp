#pragma once

#include <cstddef>
#include <sstream>
#include <string>
#include <vector>

#include "conjlab/map.hpp"

namespace conjlab {

// Address of an orbit point in the turning partition: either the index of
// the open branch it falls in, or the index of the turning point it hits.
struct ItinerarySymbol {
    int index{};
    bool turning{false};

    friend bool operator==(const ItinerarySymbol& a, const ItinerarySymbol& b) {
        return a.index == b.index && a.turning == b.turning;
    }
    friend bool operator!=(const ItinerarySymbol& a, const ItinerarySymbol& b) {
        return !(a == b);
    }
};

template <class Real>
ItinerarySymbol address_of(const MultimodalMap<Real>& map, Real x) {
    const auto& tps = map.turning_points();
    for (std::size_t i = 0; i < tps.size(); ++i)
        if (std::abs(x - tps[i].location) <= map.snap_tol())
            return {static_cast<int>(i), true};
    return {map.branch_index(x), false};
}

template <class Real>
std::vector<ItinerarySymbol> itinerary(const MultimodalMap<Real>& map, Real x, int n) {
    std::vector<ItinerarySymbol> syms;
    syms.reserve(static_cast<std::size_t>(n));
    Real z = map.snap(x);
    for (int i = 0; i < n; ++i) {
        syms.push_back(address_of(map, z));
        z = map.eval(z);
    }
    return syms;
}

// Kneading data: the itinerary of each critical value.
template <class Real>
std::vector<std::vector<ItinerarySymbol>> kneading_sequences(const MultimodalMap<Real>& map,
                                                             int n) {
    std::vector<std::vector<ItinerarySymbol>> out;
    for (const auto& t : map.turning_points())
        out.push_back(itinerary(map, map.eval(t.location), n));
    return out;
}

inline std::string symbols_to_string(const std::vector<ItinerarySymbol>& syms) {
    std::ostringstream os;
    for (const auto& s : syms) {
        if (s.turning)
            os << 'C' << s.index;
        else
            os << s.index;
    }
    return os.str();
}

// Relabeling induced by an order-reversing conjugacy: branch b of a map with
// B branches corresponds to branch B-1-b, and likewise for turning points.
inline ItinerarySymbol reverse_symbol(ItinerarySymbol s, int branch_count,
                                      int turning_count) {
    if (s.turning) return {turning_count - 1 - s.index, true};
    return {branch_count - 1 - s.index, false};
}

struct KneadingMatch {
    bool preserving{false};
    bool reversing{false};
    int first_mismatch_preserving{-1};  // (turning index << 16) | position
    int first_mismatch_reversing{-1};

    bool any() const { return preserving || reversing; }
};

// Compares kneading data of two maps under both candidate orientations.
// A conjugacy carries the turning partition of one map onto the other, so
// matching kneading data to a deep horizon is the admission test for the
// breakpoint refinement.
template <class Real>
KneadingMatch match_kneading(const MultimodalMap<Real>& f, const MultimodalMap<Real>& g,
                             int horizon = 48) {
    KneadingMatch m;
    const int Bf = static_cast<int>(f.branches().size());
    const int Tf = static_cast<int>(f.turning_points().size());
    if (Bf != static_cast<int>(g.branches().size()) ||
        Tf != static_cast<int>(g.turning_points().size()))
        return m;

    auto kf = kneading_sequences(f, horizon);
    auto kg = kneading_sequences(g, horizon);

    m.preserving = true;
    for (int t = 0; t < Tf && m.preserving; ++t)
        for (int j = 0; j < horizon; ++j)
            if (kf[static_cast<std::size_t>(t)][static_cast<std::size_t>(j)] !=
                kg[static_cast<std::size_t>(t)][static_cast<std::size_t>(j)]) {
                m.preserving = false;
                m.first_mismatch_preserving = (t << 16) | j;
                break;
            }

    m.reversing = true;
    for (int t = 0; t < Tf && m.reversing; ++t) {
        const auto& seq_g = kg[static_cast<std::size_t>(Tf - 1 - t)];
        for (int j = 0; j < horizon; ++j) {
            ItinerarySymbol mapped =
                reverse_symbol(kf[static_cast<std::size_t>(t)][static_cast<std::size_t>(j)], Bf, Tf);
            if (mapped != seq_g[static_cast<std::size_t>(j)]) {
                m.reversing = false;
                m.first_mismatch_reversing = (t << 16) | j;
                break;
            }
        }
    }
    return m;
}

} // namespace conjlab
