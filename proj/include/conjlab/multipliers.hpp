#pragma once

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include "conjlab/conjugacy.hpp"
#include "conjlab/errors.hpp"
#include "conjlab/orbit.hpp"

namespace conjlab {

template <class Real>
struct MultiplierPair {
    Real point_f{};
    Real point_g{};
    int period{};
    Real mult_f{};
    Real mult_g{};
    bool match{};
};

template <class Real>
struct MultiplierReport {
    std::vector<MultiplierPair<Real>> pairs;  // one representative per cycle
    bool all_match{true};
    Real max_log_ratio{};
};

// Matches every cycle of f to its partner in g through the conjugacy table
// and compares multipliers.  Equal multipliers on all matched cycles is a
// necessary condition for any differentiable conjugacy; a single mismatch is
// a certificate of non-smoothness along that cycle.
template <class Real>
MultiplierReport<Real> multiplier_obstruction(const MultimodalMap<Real>& f,
                                              const MultimodalMap<Real>& g,
                                              const ConjugacyTable<Real>& table,
                                              int period_max, Real rel_tol = Real(1e-6)) {
    auto pf = find_periodic_points(f, period_max);
    auto pg = find_periodic_points(g, period_max);
    if (pf.size() != pg.size()) {
        std::ostringstream os;
        os << f.label() << " has " << pf.size() << " periodic points up to period "
           << period_max << ", " << g.label() << " has " << pg.size();
        throw CycleMismatch(os.str());
    }
    const Real locate_tol = Real(1e-4) * std::max(Real(1), g.domain().width());

    MultiplierReport<Real> rep;
    std::vector<bool> represented(pf.size(), false);
    for (std::size_t i = 0; i < pf.size(); ++i) {
        if (represented[i]) continue;
        const auto& c = pf[i];
        // mark the whole cycle of c as represented
        Real z = c.location;
        for (int j = 0; j < c.period; ++j) {
            z = f.eval(z);
            for (std::size_t k = 0; k < pf.size(); ++k)
                if (std::abs(pf[k].location - z) <= Real(1e-7)) represented[k] = true;
        }

        Real y = eval_conjugacy(table, c.location);
        const PeriodicPoint<Real>* partner = nullptr;
        for (const auto& q : pg)
            if (std::abs(q.location - y) <= locate_tol &&
                (!partner || std::abs(q.location - y) < std::abs(partner->location - y)))
                partner = &q;
        if (!partner) {
            std::ostringstream os;
            os << "cycle of " << f.label() << " through " << static_cast<double>(c.location)
               << " has no partner in " << g.label() << " near " << static_cast<double>(y);
            throw CycleMismatch(os.str());
        }
        if (partner->period != c.period) {
            std::ostringstream os;
            os << "matched cycles have periods " << c.period << " and " << partner->period;
            throw CycleMismatch(os.str());
        }

        MultiplierPair<Real> pair;
        pair.point_f = c.location;
        pair.point_g = partner->location;
        pair.period = c.period;
        pair.mult_f = c.multiplier;
        pair.mult_g = partner->multiplier;
        Real scale = std::max({Real(1), std::abs(pair.mult_f), std::abs(pair.mult_g)});
        pair.match = std::abs(pair.mult_f - pair.mult_g) <= rel_tol * scale;
        if (!pair.match) {
            rep.all_match = false;
            Real lr = std::abs(std::log(std::abs(pair.mult_f) / std::abs(pair.mult_g)));
            rep.max_log_ratio = std::max(rep.max_log_ratio, lr);
        }
        rep.pairs.push_back(pair);
    }
    return rep;
}

} // namespace conjlab
