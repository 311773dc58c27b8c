#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

#include "conjlab/conjugacy.hpp"
#include "conjlab/errors.hpp"
#include "conjlab/interval.hpp"
#include "conjlab/map.hpp"
#include "conjlab/multipliers.hpp"
#include "conjlab/orbit.hpp"
#include "conjlab/regularity.hpp"
#include "conjlab/renormalization.hpp"
#include "conjlab/rng.hpp"
#include "conjlab/validate.hpp"

namespace conjlab {

enum class DichotomyVerdict {
    smooth_everywhere,
    renormalization_locked,
    hypothesis_violation,
};

inline const char* to_string(DichotomyVerdict v) {
    switch (v) {
        case DichotomyVerdict::smooth_everywhere: return "smooth-everywhere-consistent";
        case DichotomyVerdict::renormalization_locked: return "renormalization-locked";
        case DichotomyVerdict::hypothesis_violation: return "hypothesis-violation";
    }
    return "unknown";
}

struct GateCheck {
    std::string name;
    bool pass{};
    std::string detail;
};

struct DichotomyEvidence {
    bool gates_ok{};
    bool orders_compatible{};
    bool multipliers_match{};
    bool c1_consistent{};
    bool uaa_small_tails{};
    bool renorm_structures_match{};
    bool renorm_at_search_bound{};
};

// Decision rule, separated from the evidence gathering.  A failed structural
// gate or a hard obstruction (incompatible turning orders, mismatched cycle
// multipliers) refutes the hypotheses outright.  With the hypotheses intact,
// consistent pointwise regularity propagates to a global smoothness verdict;
// the only escape without an obstruction is a pair of matching return-time
// towers still growing at the search bound on both sides.
inline DichotomyVerdict resolve_verdict(const DichotomyEvidence& e) {
    if (!e.gates_ok || !e.orders_compatible || !e.multipliers_match)
        return DichotomyVerdict::hypothesis_violation;
    if (e.c1_consistent && e.uaa_small_tails) return DichotomyVerdict::smooth_everywhere;
    if (e.renorm_structures_match && e.renorm_at_search_bound)
        return DichotomyVerdict::renormalization_locked;
    return DichotomyVerdict::hypothesis_violation;
}

template <class Real>
struct DichotomyOptions {
    int c1_probe_count = 5;
    int uaa_probe_count = 2;
    int gate_period_bound = 6;
    int gate_grid = 1 << 16;
    int renorm_n_max = 4;
    int renorm_grid = 1 << 16;
    int puncture_depth = 12;
    Real uaa_tail_tol = Real(0.02);
    Real conj_tol = Real(1e-4);  // equivariance gate, limited by table interpolation
    std::uint64_t seed = 7;
};

template <class Real>
struct DichotomyReport {
    DichotomyVerdict verdict{DichotomyVerdict::hypothesis_violation};
    std::vector<GateCheck> gates;
    DichotomyEvidence evidence;
    std::vector<CriticalOrderPair<Real>> critical_orders;
    MultiplierReport<Real> multipliers;
    bool multipliers_computed{};
    std::vector<RenormalizationInterval<Real>> renorm_f;
    std::vector<RenormalizationInterval<Real>> renorm_g;
    std::vector<Real> c1_points;
    std::vector<C1Report<Real>> c1_probes;
    std::vector<Real> uaa_points;
    std::vector<UaaReport<Real>> uaa_probes;
    PunctureSet<Real> puncture_f;
    PunctureSet<Real> puncture_g;

    std::string summary() const {
        std::ostringstream os;
        os << "verdict: " << to_string(verdict) << "\n";
        for (const auto& gk : gates)
            os << "  gate " << gk.name << ": " << (gk.pass ? "pass" : "FAIL")
               << (gk.detail.empty() ? "" : "  [" + gk.detail + "]") << "\n";
        os << "  turning orders compatible: " << (evidence.orders_compatible ? "yes" : "no")
           << "\n";
        if (multipliers_computed) {
            os << "  cycle multipliers " << (evidence.multipliers_match ? "match" : "MISMATCH")
               << ":\n";
            for (const auto& pr : multipliers.pairs)
                os << "    period " << pr.period << " at x=" << static_cast<double>(pr.point_f)
                   << ": " << static_cast<double>(pr.mult_f) << " vs "
                   << static_cast<double>(pr.mult_g) << (pr.match ? "" : "  <-- obstruction")
                   << "\n";
        } else {
            os << "  cycle multipliers: not comparable\n";
        }
        os << "  pointwise derivative consistent: " << (evidence.c1_consistent ? "yes" : "no")
           << "\n";
        os << "  affine tails small: " << (evidence.uaa_small_tails ? "yes" : "no") << "\n";
        os << "  return structures: " << renorm_f.size() << " vs " << renorm_g.size()
           << (evidence.renorm_structures_match ? " (matching)" : " (different)") << "\n";
        return os.str();
    }
};

// Full diagnostic pass.  Never throws: every gate failure and every
// obstruction is recorded in the report and absorbed into the verdict, so a
// structurally broken input still yields a readable account of what failed.
template <class Real>
DichotomyReport<Real> smoothness_report(const MultimodalMap<Real>& f,
                                        const MultimodalMap<Real>& g,
                                        const ConjugacyTable<Real>& table,
                                        DichotomyOptions<Real> opts = {}) {
    DichotomyReport<Real> rep;

    auto gate = [&rep](const std::string& name, auto&& body) {
        GateCheck gk;
        gk.name = name;
        try {
            gk.pass = body(gk);
        } catch (const Error& e) {
            gk.pass = false;
            gk.detail = e.what();
        }
        rep.gates.push_back(gk);
        return gk.pass;
    };

    bool gates_ok = true;
    gates_ok &= gate("first-map-structure",
                     [&](GateCheck&) { return validate_multimodal(f).ok(); });
    gates_ok &= gate("second-map-structure",
                     [&](GateCheck&) { return validate_multimodal(g).ok(); });
    gates_ok &= gate("conjugacy-equivariance", [&](GateCheck& gk) {
        auto chk = verify_conjugacy(f, g, table);
        std::ostringstream os;
        os << "sup residual " << static_cast<double>(chk.sup_residual);
        gk.detail = os.str();
        return chk.ok(opts.conj_tol * std::max(Real(1), g.domain().width()));
    });
    auto expansive = [&](const MultimodalMap<Real>& map, const char* name) {
        return gate(name, [&](GateCheck& gk) {
            int achieved = 0;
            auto pts = detail::periodic_points_degraded(map, opts.gate_period_bound,
                                                        opts.gate_grid, &achieved);
            std::ostringstream os;
            os << pts.size() << " periodic points up to period " << achieved;
            gk.detail = os.str();
            return !has_non_repelling_cycle(pts);
        });
    };
    gates_ok &= expansive(f, "expanding-cycles-first");
    gates_ok &= expansive(g, "expanding-cycles-second");
    rep.evidence.gates_ok = gates_ok;

    try {
        rep.critical_orders = check_critical_order(f, g, table);
        rep.evidence.orders_compatible = !rep.critical_orders.empty();
        for (const auto& pr : rep.critical_orders)
            if (!pr.compatible) rep.evidence.orders_compatible = false;
    } catch (const Error& e) {
        rep.gates.push_back({"turning-order-correspondence", false, e.what()});
        rep.evidence.orders_compatible = false;
    }

    try {
        rep.multipliers = multiplier_obstruction(f, g, table, opts.gate_period_bound);
        rep.multipliers_computed = true;
        rep.evidence.multipliers_match = rep.multipliers.all_match;
    } catch (const Error& e) {
        rep.gates.push_back({"cycle-correspondence", false, e.what()});
        rep.multipliers_computed = false;
        rep.evidence.multipliers_match = false;
    }

    BatchEval<Real> h = conjugacy_batch_eval(f, g, table);
    const Interval<Real> dom = f.domain();
    const Real pad = dom.width() / Real(10);

    rep.evidence.c1_consistent = true;
    {
        const CounterRng rng(opts.seed, "dichotomy-c1");
        for (int i = 0; i < opts.c1_probe_count; ++i) {
            Real p = Real(rng.uniform(static_cast<std::uint64_t>(i),
                                      static_cast<double>(dom.lo + pad),
                                      static_cast<double>(dom.hi - pad)));
            try {
                auto probe = c1_at_point(h, p, dom);
                if (probe.verdict != C1Verdict::c1_nonzero) rep.evidence.c1_consistent = false;
                rep.c1_points.push_back(p);
                rep.c1_probes.push_back(std::move(probe));
            } catch (const Error&) {
                // orbit through a turning point: skip the probe, note nothing
                rep.evidence.c1_consistent = false;
            }
        }
        if (rep.c1_probes.empty()) rep.evidence.c1_consistent = false;
    }

    rep.evidence.uaa_small_tails = true;
    {
        const CounterRng rng(opts.seed, "dichotomy-uaa");
        for (int i = 0; i < opts.uaa_probe_count; ++i) {
            Real p = Real(rng.uniform(static_cast<std::uint64_t>(i),
                                      static_cast<double>(dom.lo + pad),
                                      static_cast<double>(dom.hi - pad)));
            try {
                auto probe = uaa_test(h, p, dom);
                if (probe.tail_modulus(3) > opts.uaa_tail_tol)
                    rep.evidence.uaa_small_tails = false;
                rep.uaa_points.push_back(p);
                rep.uaa_probes.push_back(std::move(probe));
            } catch (const Error&) {
                rep.evidence.uaa_small_tails = false;
            }
        }
        if (rep.uaa_probes.empty()) rep.evidence.uaa_small_tails = false;
    }

    try {
        rep.renorm_f = find_renormalization_intervals(f, opts.renorm_n_max, opts.renorm_grid);
        rep.renorm_g = find_renormalization_intervals(g, opts.renorm_n_max, opts.renorm_grid);
        std::vector<int> nf, ng;
        for (const auto& r : rep.renorm_f) nf.push_back(r.n);
        for (const auto& r : rep.renorm_g) ng.push_back(r.n);
        std::sort(nf.begin(), nf.end());
        std::sort(ng.begin(), ng.end());
        rep.evidence.renorm_structures_match = nf == ng;
        rep.evidence.renorm_at_search_bound =
            !nf.empty() && nf.back() == opts.renorm_n_max && !ng.empty() &&
            ng.back() == opts.renorm_n_max;
    } catch (const Error& e) {
        rep.gates.push_back({"return-structure-search", false, e.what()});
        rep.evidence.renorm_structures_match = false;
        rep.evidence.renorm_at_search_bound = false;
    }

    auto punctures = [&](const MultimodalMap<Real>& map,
                         const std::vector<RenormalizationInterval<Real>>& towers) {
        Interval<Real> J = towers.empty() ? dynamical_core(map) : towers.front().J;
        return compute_puncture_set(map, J, opts.puncture_depth);
    };
    try {
        rep.puncture_f = punctures(f, rep.renorm_f);
        rep.puncture_g = punctures(g, rep.renorm_g);
    } catch (const Error&) {
        // puncture sets are informational; a blow-up leaves them empty
    }

    rep.verdict = resolve_verdict(rep.evidence);
    return rep;
}

} // namespace conjlab
