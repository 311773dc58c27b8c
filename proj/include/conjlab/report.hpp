#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "conjlab/dichotomy.hpp"
#include "conjlab/expansion.hpp"
#include "conjlab/lrd.hpp"
#include "conjlab/multipliers.hpp"
#include "conjlab/nice_set.hpp"
#include "conjlab/regularity.hpp"
#include "conjlab/renormalization.hpp"
#include "conjlab/scenario.hpp"
#include "conjlab/validate.hpp"
#include "conjlab/zooming.hpp"

namespace conjlab {

using ordered_json = nlohmann::ordered_json;

inline constexpr const char* kBundleFormat = "conjlab-bundle/1";
inline constexpr const char* kLibraryVersion = "conjlab 1.0.0";

// Raised when the scenario pair fails the standing hypotheses.  The bundle
// written so far rides along so callers can still archive the evidence.
struct HypothesisViolation : HypothesisError {
    ordered_json bundle;
    HypothesisViolation(const std::string& msg, ordered_json b)
        : HypothesisError(msg), bundle(std::move(b)) {}
};

namespace detail {

inline std::string hexf(double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%a", v);
    return buf;
}
inline std::string hexf(long double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%La", v);
    return buf;
}

// Endpoints carry a hex-float transcript next to the rounded display value
// so a bundle can be replayed bit for bit.
template <class Real>
ordered_json interval_json(const Interval<Real>& I) {
    ordered_json j;
    j["lo"] = static_cast<double>(I.lo);
    j["hi"] = static_cast<double>(I.hi);
    j["lo_hex"] = hexf(I.lo);
    j["hi_hex"] = hexf(I.hi);
    return j;
}

template <class Real>
ordered_json validation_json(const MultimodalMap<Real>& map) {
    ordered_json j;
    j["label"] = map.label();
    j["domain"] = interval_json(map.domain());
    ordered_json turns = ordered_json::array();
    for (const auto& t : map.turning_points()) {
        ordered_json tj;
        tj["location"] = static_cast<double>(t.location);
        tj["order"] = static_cast<double>(t.order);
        turns.push_back(tj);
    }
    j["turning_points"] = turns;
    ValidationReport rep = validate_multimodal(map);
    j["ok"] = rep.ok();
    ordered_json checks = ordered_json::array();
    for (const auto& c : rep.checks) {
        ordered_json cj;
        cj["name"] = c.name;
        cj["pass"] = c.pass;
        cj["residual"] = c.residual;
        if (!c.detail.empty()) cj["detail"] = c.detail;
        if (c.informational) cj["informational"] = true;
        checks.push_back(cj);
    }
    j["checks"] = checks;
    return j;
}

template <class Real>
ordered_json multiplier_report_json(const MultiplierReport<Real>& rep) {
    ordered_json j;
    j["all_match"] = rep.all_match;
    j["max_log_ratio"] = static_cast<double>(rep.max_log_ratio);
    ordered_json pairs = ordered_json::array();
    for (const auto& p : rep.pairs) {
        ordered_json pj;
        pj["period"] = p.period;
        pj["point_f"] = static_cast<double>(p.point_f);
        pj["point_g"] = static_cast<double>(p.point_g);
        pj["mult_f"] = static_cast<double>(p.mult_f);
        pj["mult_g"] = static_cast<double>(p.mult_g);
        pj["match"] = p.match;
        pairs.push_back(pj);
    }
    j["pairs"] = pairs;
    return j;
}

template <class Real>
ordered_json uaa_report_json(const UaaReport<Real>& rep) {
    ordered_json j;
    j["p"] = static_cast<double>(rep.p);
    j["tail_modulus"] = static_cast<double>(rep.tail_modulus());
    j["max_modulus"] = static_cast<double>(rep.max_modulus());
    ordered_json rows = ordered_json::array();
    for (const auto& r : rep.rows) {
        ordered_json rj;
        rj["scale"] = static_cast<double>(r.scale);
        rj["C"] = static_cast<double>(r.bound_C);
        rj["modulus"] = static_cast<double>(r.modulus);
        rj["triples"] = r.triples;
        rows.push_back(rj);
    }
    j["rows"] = rows;
    return j;
}

template <class Real>
ordered_json c1_report_json(Real p, const C1Report<Real>& rep) {
    ordered_json j;
    j["p"] = static_cast<double>(p);
    j["verdict"] = to_string(rep.verdict);
    j["derivative"] = static_cast<double>(rep.derivative);
    ordered_json est = ordered_json::array();
    for (const auto& [scale, quotient] : rep.estimates)
        est.push_back({static_cast<double>(scale), static_cast<double>(quotient)});
    j["estimates"] = est;
    return j;
}

template <class Real>
ordered_json renorm_interval_json(const MultimodalMap<Real>& map,
                                  const RenormalizationInterval<Real>& R) {
    ordered_json j;
    j["n"] = R.n;
    j["center"] = static_cast<double>(R.center);
    j["J"] = interval_json(R.J);
    j["verified_depth"] = R.verified_depth;
    bool restriction_ok = false;
    std::string restriction_note;
    try {
        auto rmap = restrict_return_map(map, R);
        restriction_ok = validate_multimodal(rmap).ok();
    } catch (const Error& e) {
        restriction_note = e.what();
    }
    j["restriction_multimodal"] = restriction_ok;
    if (!restriction_note.empty()) j["restriction_error"] = restriction_note;
    return j;
}

template <class Real>
ordered_json gap_decomposition_json(const GapDecomposition<Real>& dec) {
    ordered_json j;
    ordered_json targets = ordered_json::array();
    for (const auto& t : dec.target) targets.push_back(interval_json(t));
    j["target"] = targets;
    j["measure"] = static_cast<double>(dec.measure);
    j["reference_measure"] = static_cast<double>(dec.reference_measure);
    j["fraction"] = static_cast<double>(dec.fraction());
    j["gap_count"] = dec.gaps.size();
    ordered_json gaps = ordered_json::array();
    for (const auto& g : dec.gaps) {
        ordered_json gj;
        gj["span"] = interval_json(g.span);
        gj["entry_time"] = g.entry_time;
        gj["landing_component"] = g.landing_component;
        gj["diffeo"] = g.diffeo;
        gaps.push_back(gj);
    }
    j["gaps"] = gaps;
    return j;
}

template <class Real>
ordered_json nice_set_json(const NiceSet<Real>& ns) {
    ordered_json j;
    j["horizon"] = ns.horizon;
    j["probe_depth"] = ns.probe_depth;
    ordered_json comps = ordered_json::array();
    for (const auto& c : ns.components) {
        ordered_json cj;
        cj["span"] = interval_json(c.span);
        cj["turning"] = static_cast<double>(c.turning);
        comps.push_back(cj);
    }
    j["components"] = comps;
    return j;
}

template <class Real>
ordered_json dichotomy_json(const DichotomyReport<Real>& rep) {
    ordered_json j;
    j["verdict"] = to_string(rep.verdict);
    ordered_json gates = ordered_json::array();
    for (const auto& g : rep.gates) {
        ordered_json gj;
        gj["name"] = g.name;
        gj["pass"] = g.pass;
        if (!g.detail.empty()) gj["detail"] = g.detail;
        gates.push_back(gj);
    }
    j["gates"] = gates;
    ordered_json ev;
    ev["gates_ok"] = rep.evidence.gates_ok;
    ev["orders_compatible"] = rep.evidence.orders_compatible;
    ev["multipliers_match"] = rep.evidence.multipliers_match;
    ev["c1_consistent"] = rep.evidence.c1_consistent;
    ev["uaa_small_tails"] = rep.evidence.uaa_small_tails;
    ev["renorm_structures_match"] = rep.evidence.renorm_structures_match;
    ev["renorm_at_search_bound"] = rep.evidence.renorm_at_search_bound;
    j["evidence"] = ev;
    ordered_json orders = ordered_json::array();
    for (const auto& co : rep.critical_orders) {
        ordered_json oj;
        oj["turning_f"] = static_cast<double>(co.turning_f);
        oj["turning_g"] = static_cast<double>(co.turning_g);
        oj["order_f"] = static_cast<double>(co.order_f);
        oj["order_g"] = static_cast<double>(co.order_g);
        oj["value_exponent"] = static_cast<double>(co.value_exponent);
        oj["compatible"] = co.compatible;
        orders.push_back(oj);
    }
    j["critical_orders"] = orders;
    if (rep.multipliers_computed) j["multipliers"] = multiplier_report_json(rep.multipliers);
    ordered_json uaa = ordered_json::array();
    for (std::size_t i = 0; i < rep.uaa_probes.size(); ++i)
        uaa.push_back(uaa_report_json(rep.uaa_probes[i]));
    j["uaa_probes"] = uaa;
    ordered_json c1 = ordered_json::array();
    for (std::size_t i = 0; i < rep.c1_probes.size(); ++i)
        c1.push_back(c1_report_json(rep.c1_points[i], rep.c1_probes[i]));
    j["c1_probes"] = c1;
    j["renorm_towers_f"] = rep.renorm_f.size();
    j["renorm_towers_g"] = rep.renorm_g.size();
    j["puncture_points_f"] = rep.puncture_f.points.size();
    j["puncture_points_g"] = rep.puncture_g.points.size();
    j["summary"] = rep.summary();
    return j;
}

inline ordered_json map_config_json(const MapFamilyConfig& cfg) {
    ordered_json j;
    j["family"] = cfg.family;
    for (const auto& [key, value] : cfg.params) j[key] = value;
    if (cfg.base) j["base"] = map_config_json(*cfg.base);
    return j;
}

} // namespace detail

// ---------------------------------------------------------------------------
// scenario orchestration
// ---------------------------------------------------------------------------

template <class Real>
ordered_json run_scenario(const ScenarioConfig& cfg, const std::string& precision_label,
                          bool write_to_disk = true) {
    validate_scenario(cfg);

    ordered_json bundle;
    bundle["format"] = kBundleFormat;
    {
        ordered_json prov;
        prov["config_hash"] = config_hash(cfg);
        ordered_json versions;
        versions["library"] = kLibraryVersion;
        versions["bundle_format"] = 1;
        prov["versions"] = versions;
        prov["seed"] = cfg.seed;
        prov["precision"] = precision_label;
        prov["depth"] = cfg.depth;
        bundle["provenance"] = prov;
    }
    {
        ordered_json sc;
        sc["map_f"] = detail::map_config_json(cfg.map_f);
        sc["map_g"] = detail::map_config_json(cfg.map_g);
        sc["depth"] = cfg.depth;
        sc["seed"] = cfg.seed;
        sc["diagnostics"] = cfg.diagnostics;
        ordered_json pj;
        for (const auto& [diag, body] : cfg.params) {
            ordered_json bj;
            for (const auto& [key, value] : body) bj[key] = value;
            pj[diag] = bj;
        }
        sc["params"] = pj;
        bundle["scenario"] = sc;
    }

    const auto finish = [&](const std::string& verdict_label) {
        bundle["manifest"] = ordered_json::array({"bundle.json"});
        if (write_to_disk) {
            std::filesystem::create_directories(cfg.outdir);
            std::ofstream out(std::filesystem::path(cfg.outdir) / "bundle.json",
                              std::ios::binary);
            if (!out) throw Error("cannot write bundle under '" + cfg.outdir + "'");
            out << bundle.dump(2) << '\n';
        }
        (void)verdict_label;
    };

    MultimodalMap<Real> f = make_map<Real>(cfg.map_f);
    MultimodalMap<Real> g = make_map<Real>(cfg.map_g);

    ordered_json diags;
    ordered_json validation;
    validation["map_f"] = detail::validation_json(f);
    validation["map_g"] = detail::validation_json(g);
    diags["validation"] = validation;
    bundle["diagnostics"] = diags;

    const bool f_ok = validation["map_f"]["ok"].get<bool>();
    const bool g_ok = validation["map_g"]["ok"].get<bool>();
    const bool structure_ok = f_ok && g_ok;

    if (cfg.diagnostics.empty()) {
        ordered_json verdict;
        if (structure_ok) {
            verdict["verdict"] = "validation-only";
            verdict["reason"] = "no diagnostics requested";
            bundle["verdict"] = verdict;
            finish("validation-only");
            return bundle;
        }
        std::string reason = std::string(!f_ok ? "map_f" : "map_g") +
                             " fails multimodal structure validation";
        verdict["verdict"] = "hypothesis-violation";
        verdict["reason"] = reason;
        bundle["verdict"] = verdict;
        finish("hypothesis-violation");
        throw HypothesisViolation(reason, bundle);
    }

    // A structure failure (a corner turning point, say) is a standing-hypothesis
    // violation, not an obstruction to the topological diagnostics.  The run
    // continues and the dichotomy gate records the failure in the verdict.

    const Interval<Real> dom = f.domain();
    const Real W = dom.width();
    const Real pad = W / Real(10);

    // probe points: explicit `point` wins, otherwise `points` seeded draws
    const auto probe_points = [&](const std::string& diag, int fallback_count) {
        std::vector<Real> pts;
        if (cfg.has_param(diag, "point")) {
            pts.push_back(static_cast<Real>(cfg.param(diag, "point", 0)));
            return pts;
        }
        int count = static_cast<int>(cfg.param(diag, "points", fallback_count));
        CounterRng rng(cfg.seed, "scenario-" + diag);
        for (int i = 0; i < count; ++i)
            pts.push_back(static_cast<Real>(
                rng.uniform(static_cast<std::uint64_t>(i), static_cast<double>(dom.lo + pad),
                            static_cast<double>(dom.hi - pad))));
        return pts;
    };

    // conjugacy table first; without it only the single-map scans survive
    ConjugacyTable<Real> table;
    bool table_ok = false;
    std::string table_error;
    try {
        table = build_conjugacy(f, g, cfg.depth);
        table_ok = true;
    } catch (const Error& e) {
        table_error = e.what();
    }

    BatchEval<Real> h;
    if (table_ok) h = conjugacy_batch_eval(f, g, table);

    const auto run_one = [&](const std::string& diag) -> ordered_json {
        ordered_json rec;
        if (diag == "conjugacy") {
            rec["depth"] = table.depth;
            rec["orientation_preserving"] = table.orientation_preserving;
            rec["table_size"] = table.points.size();
            Real max_cell = 0;
            for (std::size_t i = 1; i < table.points.size(); ++i)
                max_cell = std::max(max_cell, table.points[i].x - table.points[i - 1].x);
            rec["max_cell_width"] = static_cast<double>(max_cell);
            int samples = static_cast<int>(cfg.param("conjugacy", "samples", 500));
            auto check = verify_conjugacy(f, g, table, samples,
                                          CounterRng(cfg.seed, "scenario-conjugacy-check"));
            ordered_json cj;
            cj["sup_residual"] = static_cast<double>(check.sup_residual);
            cj["monotone"] = check.monotone;
            cj["endpoints_fixed"] = check.endpoints_fixed;
            cj["samples"] = check.samples;
            rec["check"] = cj;
            ordered_json pts = ordered_json::array();
            for (const auto& bp : table.points)
                pts.push_back({static_cast<double>(bp.x), static_cast<double>(bp.y), bp.level});
            rec["points"] = pts;
        } else if (diag == "multipliers") {
            int period_max = static_cast<int>(cfg.param("multipliers", "period_max", 6));
            Real rel_tol = static_cast<Real>(cfg.param("multipliers", "rel_tol", 1e-6));
            auto rep = multiplier_obstruction(f, g, table, period_max, rel_tol);
            rec = detail::multiplier_report_json(rep);
            rec["period_max"] = period_max;
        } else if (diag == "lrd") {
            int count = static_cast<int>(cfg.param("lrd", "triples", 200));
            CounterRng rng(cfg.seed, "scenario-lrd");
            std::vector<Real> xs;
            ordered_json rows = ordered_json::array();
            Real max_lrd = 0, sum = 0;
            int kept = 0;
            for (int i = 0; i < count; ++i) {
                Real a = static_cast<Real>(rng.uniform(3 * static_cast<std::uint64_t>(i),
                                                       static_cast<double>(dom.lo),
                                                       static_cast<double>(dom.hi)));
                Real b = static_cast<Real>(rng.uniform(3 * static_cast<std::uint64_t>(i) + 1,
                                                       static_cast<double>(dom.lo),
                                                       static_cast<double>(dom.hi)));
                Real c = static_cast<Real>(rng.uniform(3 * static_cast<std::uint64_t>(i) + 2,
                                                       static_cast<double>(dom.lo),
                                                       static_cast<double>(dom.hi)));
                Real x = std::min({a, b, c}), z = std::max({a, b, c});
                Real y = a + b + c - x - z;
                if (y - x < Real(1e-6) * W || z - y < Real(1e-6) * W) continue;
                std::vector<Real> batch = h({x, y, z});
                Real v = log_ratio_distortion(x, y, z, batch[0], batch[1], batch[2]);
                max_lrd = std::max(max_lrd, v);
                sum += v;
                ++kept;
                rows.push_back({static_cast<double>(x), static_cast<double>(y),
                                static_cast<double>(z), static_cast<double>(v)});
            }
            rec["triples"] = kept;
            rec["max"] = static_cast<double>(max_lrd);
            rec["mean"] = static_cast<double>(kept ? sum / Real(kept) : Real(0));
            rec["rows"] = rows;
        } else if (diag == "uaa") {
            ordered_json probes = ordered_json::array();
            for (Real p : probe_points("uaa", 2))
                probes.push_back(detail::uaa_report_json(
                    uaa_test(h, p, dom, UaaOptions<Real>{},
                             CounterRng(cfg.seed, "scenario-uaa-triples"))));
            rec["probes"] = probes;
        } else if (diag == "c1") {
            ordered_json probes = ordered_json::array();
            for (Real p : probe_points("c1", 5))
                probes.push_back(detail::c1_report_json(p, c1_at_point(h, p, dom)));
            rec["probes"] = probes;
        } else if (diag == "holder") {
            ordered_json probes = ordered_json::array();
            for (Real p : probe_points("holder", 3)) {
                auto fit = holder_exponent(h, p, dom);
                ordered_json pj;
                pj["p"] = static_cast<double>(p);
                pj["exponent"] = static_cast<double>(fit.exponent);
                ordered_json data = ordered_json::array();
                for (const auto& [lr, lo] : fit.data)
                    data.push_back({static_cast<double>(lr), static_cast<double>(lo)});
                pj["data"] = data;
                probes.push_back(pj);
            }
            rec["probes"] = probes;
        } else if (diag == "zooming") {
            Real p = static_cast<Real>(cfg.param("zooming", "point", 0));
            Real alpha = static_cast<Real>(cfg.param("zooming", "alpha", 1));
            int k_max = static_cast<int>(cfg.param("zooming", "k_max", 10));
            auto pair = find_zooming_pair(f, g, table, p, alpha, k_max);
            rec["p"] = static_cast<double>(pair.p);
            rec["alpha"] = static_cast<double>(pair.alpha);
            rec["k_max"] = k_max;
            rec["V"] = detail::interval_json(pair.V);
            rec["C_f"] = static_cast<double>(pair.C_f);
            rec["C_g"] = static_cast<double>(pair.C_g);
            ordered_json scales = ordered_json::array();
            for (const auto& s : pair.scales) {
                ordered_json sj;
                sj["k"] = s.k;
                sj["V_n"] = detail::interval_json(s.V_n);
                scales.push_back(sj);
            }
            rec["scales"] = scales;
        } else if (diag == "mane") {
            Real gamma = static_cast<Real>(cfg.param("mane", "gamma", 0.1));
            int samples = static_cast<int>(cfg.param("mane", "samples", 200));
            int n_max = static_cast<int>(cfg.param("mane", "n_max", 60));
            CounterRng rng(cfg.seed, "scenario-mane");
            auto est = estimate_mane_constants(f, gamma, rng, samples, n_max);
            rec["gamma"] = static_cast<double>(est.gamma);
            rec["lambda_hat"] = static_cast<double>(est.lambda_hat);
            rec["c_hat"] = static_cast<double>(est.c_hat);
            rec["samples"] = est.samples;
            rec["segments"] = est.segments.size();
        } else if (diag == "nice_set") {
            Real epsilon = static_cast<Real>(cfg.param("nice_set", "epsilon", 0.05));
            long long horizon = static_cast<long long>(cfg.param("nice_set", "horizon", 10000));
            auto ns = build_nice_set(f, epsilon, horizon);
            rec = detail::nice_set_json(ns);
            rec["epsilon"] = static_cast<double>(epsilon);
            auto recheck = verify_martens(f, ns, 2 * horizon);
            ordered_json rj;
            rj["horizon"] = 2 * horizon;
            rj["ok"] = recheck.ok;
            rj["steps"] = recheck.steps;
            rj["max_residual"] = static_cast<double>(recheck.max_residual);
            if (!recheck.why.empty()) rj["why"] = recheck.why;
            rec["recheck"] = rj;
        } else if (diag == "renormalization") {
            int n_max = static_cast<int>(cfg.param("renormalization", "n_max", 8));
            int grid = static_cast<int>(cfg.param("renormalization", "grid", 1 << 16));
            auto towers = find_renormalization_intervals(f, n_max, grid);
            rec["n_max"] = n_max;
            rec["grid"] = grid;
            rec["core"] = detail::interval_json(dynamical_core(f));
            ordered_json ivs = ordered_json::array();
            for (const auto& R : towers) ivs.push_back(detail::renorm_interval_json(f, R));
            rec["intervals"] = ivs;
            if (!towers.empty())
                rec["basin"] = detail::gap_decomposition_json(compute_basin(f, towers.front(), n_max));
        }
        return rec;
    };

    // table-independent scans still run when the table cannot be built
    static const std::vector<std::string> single_map = {"mane", "nice_set", "renormalization"};
    const auto is_single_map = [&](const std::string& d) {
        return std::find(single_map.begin(), single_map.end(), d) != single_map.end();
    };

    std::string verdict_label;
    ordered_json verdict;
    if (table_ok) {
        DichotomyOptions<Real> opts;
        opts.seed = cfg.seed;
        auto rep = smoothness_report(f, g, table, opts);
        verdict = detail::dichotomy_json(rep);
        verdict_label = to_string(rep.verdict);
    } else {
        verdict["verdict"] = "hypothesis-violation";
        verdict["reason"] = "conjugacy table construction failed: " + table_error;
        verdict_label = "hypothesis-violation";
    }
    bundle["verdict"] = verdict;

    for (const auto& diag : cfg.diagnostics) {
        ordered_json rec;
        if (!table_ok && !is_single_map(diag)) {
            rec["skipped"] = "requires the conjugacy table: " + table_error;
        } else {
            try {
                rec = run_one(diag);
            } catch (const Error& e) {
                rec["error"] = e.what();
            }
        }
        bundle["diagnostics"][diag] = rec;
    }

    finish(verdict_label);
    if (verdict_label == "hypothesis-violation")
        throw HypothesisViolation("scenario verdict: hypothesis-violation", bundle);
    return bundle;
}

// ---------------------------------------------------------------------------
// bundle IO and plot-data export
// ---------------------------------------------------------------------------

inline ordered_json load_bundle(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open bundle '" + path + "'");
    try {
        return ordered_json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw Error("cannot parse bundle '" + path + "': " + e.what());
    }
}

namespace detail {

inline std::string csv_num(double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline void write_csv(const std::filesystem::path& path, const std::string& header,
                      const std::vector<std::vector<std::string>>& rows,
                      std::vector<std::string>& written) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write '" + path.string() + "'");
    out << header << '\n';
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i];
        out << '\n';
    }
    written.push_back(path.filename().string());
}

} // namespace detail

// Flat CSV emission for one diagnostic of a loaded bundle.  Returns the file
// names written into `outdir`.
inline std::vector<std::string> export_plot_data(const ordered_json& bundle,
                                                 const std::string& which,
                                                 const std::string& outdir) {
    if (!bundle.contains("diagnostics") || !bundle["diagnostics"].contains(which))
        throw MissingDiagnostic("diagnostic '" + which + "' not present in bundle");
    const ordered_json& rec = bundle["diagnostics"][which];
    if (rec.contains("skipped") || rec.contains("error"))
        throw MissingDiagnostic("diagnostic '" + which + "' has no data: " +
                                rec.value("skipped", rec.value("error", std::string())));

    std::filesystem::create_directories(outdir);
    const std::filesystem::path out(outdir);
    std::vector<std::string> written;
    using detail::csv_num;

    if (which == "conjugacy") {
        std::vector<std::vector<std::string>> rows;
        for (const auto& p : rec["points"])
            rows.push_back({csv_num(p[0].get<double>()), csv_num(p[1].get<double>()),
                            std::to_string(p[2].get<int>())});
        detail::write_csv(out / "conjugacy.csv", "x,y,depth", rows, written);
    } else if (which == "uaa") {
        int idx = 0;
        for (const auto& probe : rec["probes"]) {
            std::vector<std::vector<std::string>> rows;
            for (const auto& r : probe["rows"])
                rows.push_back({csv_num(r["scale"].get<double>()), csv_num(r["C"].get<double>()),
                                csv_num(r["modulus"].get<double>())});
            detail::write_csv(out / ("uaa-probe" + std::to_string(idx) + ".csv"),
                              "scale,C,modulus", rows, written);
            ++idx;
        }
    } else if (which == "multipliers") {
        std::vector<std::vector<std::string>> rows;
        for (const auto& p : rec["pairs"])
            rows.push_back({std::to_string(p["period"].get<int>()),
                            csv_num(p["point_f"].get<double>()),
                            csv_num(p["mult_f"].get<double>()),
                            csv_num(p["point_g"].get<double>()),
                            csv_num(p["mult_g"].get<double>()),
                            p["match"].get<bool>() ? "1" : "0"});
        detail::write_csv(out / "multipliers.csv", "period,point_f,mult_f,point_g,mult_g,match",
                          rows, written);
    } else if (which == "lrd") {
        std::vector<std::vector<std::string>> rows;
        for (const auto& r : rec["rows"])
            rows.push_back({csv_num(r[0].get<double>()), csv_num(r[1].get<double>()),
                            csv_num(r[2].get<double>()), csv_num(r[3].get<double>())});
        detail::write_csv(out / "lrd.csv", "x,y,z,value", rows, written);
    } else if (which == "c1") {
        int idx = 0;
        for (const auto& probe : rec["probes"]) {
            std::vector<std::vector<std::string>> rows;
            for (const auto& e : probe["estimates"])
                rows.push_back({csv_num(e[0].get<double>()), csv_num(e[1].get<double>())});
            detail::write_csv(out / ("c1-probe" + std::to_string(idx) + ".csv"),
                              "scale,quotient", rows, written);
            ++idx;
        }
    } else if (which == "holder") {
        int idx = 0;
        for (const auto& probe : rec["probes"]) {
            std::vector<std::vector<std::string>> rows;
            for (const auto& d : probe["data"])
                rows.push_back({csv_num(d[0].get<double>()), csv_num(d[1].get<double>())});
            detail::write_csv(out / ("holder-probe" + std::to_string(idx) + ".csv"),
                              "log_r,log_osc", rows, written);
            ++idx;
        }
    } else if (which == "zooming") {
        std::vector<std::vector<std::string>> rows;
        for (const auto& s : rec["scales"])
            rows.push_back({std::to_string(s["k"].get<int>()),
                            csv_num(s["V_n"]["lo"].get<double>()),
                            csv_num(s["V_n"]["hi"].get<double>())});
        detail::write_csv(out / "zooming.csv", "k,lo,hi", rows, written);
    } else if (which == "nice_set") {
        std::vector<std::vector<std::string>> rows;
        for (const auto& c : rec["components"])
            rows.push_back({csv_num(c["span"]["lo"].get<double>()),
                            csv_num(c["span"]["hi"].get<double>()),
                            csv_num(c["turning"].get<double>())});
        detail::write_csv(out / "nice_set.csv", "lo,hi,turning", rows, written);
    } else if (which == "renormalization") {
        std::vector<std::vector<std::string>> rows;
        for (const auto& iv : rec["intervals"])
            rows.push_back({std::to_string(iv["n"].get<int>()),
                            csv_num(iv["J"]["lo"].get<double>()),
                            csv_num(iv["J"]["hi"].get<double>()),
                            csv_num(iv["center"].get<double>()),
                            std::to_string(iv["verified_depth"].get<long long>())});
        detail::write_csv(out / "renormalization.csv", "n,lo,hi,center,verified_depth", rows,
                          written);
    } else if (which == "mane") {
        std::vector<std::vector<std::string>> rows;
        rows.push_back({csv_num(rec["gamma"].get<double>()),
                        csv_num(rec["lambda_hat"].get<double>()),
                        csv_num(rec["c_hat"].get<double>())});
        detail::write_csv(out / "mane.csv", "gamma,lambda_hat,c_hat", rows, written);
    } else {
        throw MissingDiagnostic("no exporter for diagnostic '" + which + "'");
    }
    return written;
}

} // namespace conjlab
