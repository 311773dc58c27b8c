// Release acceptance battery: thirteen independent end-to-end checks with
// hard-coded tolerances, one printed line each, nonzero exit on any failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "conjlab/conjugacy.hpp"
#include "conjlab/expansion.hpp"
#include "conjlab/families.hpp"
#include "conjlab/lrd.hpp"
#include "conjlab/multipliers.hpp"
#include "conjlab/nice_set.hpp"
#include "conjlab/orbit.hpp"
#include "conjlab/regularity.hpp"
#include "conjlab/renormalization.hpp"
#include "conjlab/report.hpp"
#include "conjlab/rng.hpp"
#include "conjlab/validate.hpp"

using namespace conjlab;

namespace {

int failures = 0;

void report(int idx, const char* name, bool ok, const std::string& detail = "") {
    std::printf("%2d  %-46s %s%s%s\n", idx, name, ok ? "pass" : "FAIL",
                detail.empty() ? "" : "   ", detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
}

std::string num(double v) {
    char b[40];
    std::snprintf(b, sizeof b, "%.3g", v);
    return b;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

const PeriodicPoint<double>* find_cycle_point(const std::vector<PeriodicPoint<double>>& pts,
                                              double location, int period) {
    for (const auto& p : pts)
        if (p.period == period && std::abs(p.location - location) < 1e-6) return &p;
    return nullptr;
}

} // namespace

int main() {
    const auto wall0 = std::chrono::steady_clock::now();
    auto elapsed = [&] {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - wall0).count();
    };

    auto quad = make_quadratic<double>(4.0);
    auto gsin = make_sine_conjugate<double>(make_quadratic<double>(4.0), 0.1);
    auto tent = make_tent<double>(2.0);
    const SineDiffeo<double> phi{0.1};
    const Interval<double> unit{0.0, 1.0};

    ConjugacyTable<double> table1, table2;
    bool have1 = false, have2 = false;
    BatchEval<double> h1, h2;

    // 1: matched refinement against a known smooth coordinate change
    {
        const char* name = "smooth-pair-conjugacy-oracle";
        const double tic = elapsed();
        try {
            table1 = build_conjugacy(quad, gsin, 12);
            have1 = true;
            h1 = conjugacy_batch_eval(quad, gsin, table1);
            double sup = 0, max_cell = 0;
            for (std::size_t i = 0; i < table1.points.size(); ++i) {
                sup = std::max(sup, std::abs(table1.points[i].y - phi(table1.points[i].x)));
                if (i) max_cell = std::max(max_cell, table1.points[i].x - table1.points[i - 1].x);
            }
            auto check = verify_conjugacy(quad, gsin, table1);
            const double secs = elapsed() - tic;
            bool ok = sup <= 1e-3 && check.sup_residual <= 2 * max_cell && secs < 60;
            report(1, name, ok,
                   "sup|h-phi| " + num(sup) + ", residual " + num(check.sup_residual) +
                       " vs cell " + num(max_cell) + ", " + num(secs) + " s");
        } catch (const std::exception& e) {
            report(1, name, false, e.what());
        }
    }

    // 2: corner pair against the closed-form conjugacy sin^2(pi x / 2)
    {
        const char* name = "closed-form-conjugacy-oracle";
        try {
            table2 = build_conjugacy(tent, quad, 12);
            have2 = true;
            h2 = conjugacy_batch_eval(tent, quad, table2);
            double sup = 0;
            for (const auto& bp : table2.points) {
                double s = std::sin(3.14159265358979323846 * bp.x / 2.0);
                sup = std::max(sup, std::abs(bp.y - s * s));
            }
            report(2, name, sup <= 1e-3, "sup err " + num(sup));
        } catch (const std::exception& e) {
            report(2, name, false, e.what());
        }
    }

    // 3: pointwise C1 detector on both pairs
    {
        const char* name = "c1-detector";
        try {
            bool ok = have1 && have2;
            std::string detail;
            if (ok) {
                auto zero = c1_at_point(h2, 0.0, unit);
                int run = 0, best_run = 0;
                for (std::size_t i = 1; i < zero.estimates.size(); ++i) {
                    double r = zero.estimates[i].second / zero.estimates[i - 1].second;
                    if (r > 0.35 && r < 0.65)
                        best_run = std::max(best_run, ++run);
                    else
                        run = 0;
                }
                ok = zero.verdict == C1Verdict::derivative_zero && best_run >= 3;
                detail += "zero-run " + std::to_string(best_run + 1);

                auto half = c1_at_point(h2, 0.5, unit);
                double target = 3.14159265358979323846 / 2.0;
                ok = ok && half.verdict == C1Verdict::c1_nonzero &&
                     std::abs(half.derivative - target) <= 1e-3;
                detail += ", mid err " + num(std::abs(half.derivative - target));

                CounterRng rng(2026, "acceptance-c1");
                double worst = 0;
                for (int i = 0; i < 100; ++i) {
                    double p = rng.uniform(static_cast<std::uint64_t>(i), 0.05, 0.95);
                    auto rep = c1_at_point(h1, p, unit);
                    worst = std::max(worst, std::abs(rep.derivative - phi.derivative(p)));
                    if (rep.verdict != C1Verdict::c1_nonzero) ok = false;
                }
                ok = ok && worst <= 1e-4;
                detail += ", smooth worst " + num(worst);
            }
            report(3, name, ok, detail);
        } catch (const std::exception& e) {
            report(3, name, false, e.what());
        }
    }

    // 4: asymptotic-affinity modulus decays for the smooth pair, not at the corner
    {
        const char* name = "affinity-modulus-contrast";
        try {
            bool ok = have1 && have2;
            double worst_tail = 0, min_corner = 1e300;
            if (ok) {
                CounterRng rng(2026, "acceptance-uaa");
                for (int i = 0; i < 20; ++i) {
                    double p = rng.uniform(static_cast<std::uint64_t>(i), 0.05, 0.95);
                    auto rep = uaa_test(h1, p, unit);
                    worst_tail = std::max(worst_tail, rep.tail_modulus(3));
                }
                ok = worst_tail < 1e-3;
                auto corner = uaa_test(h2, 0.0, unit);
                for (const auto& row : corner.rows) min_corner = std::min(min_corner, row.modulus);
                ok = ok && min_corner > 0.1;
            }
            report(4, name, ok,
                   "smooth tail " + num(worst_tail) + ", corner floor " + num(min_corner));
        } catch (const std::exception& e) {
            report(4, name, false, e.what());
        }
    }

    // 5: cycle multipliers match through the smooth pair, obstruct at the corner
    {
        const char* name = "multiplier-rigidity";
        try {
            bool ok = have1 && have2;
            std::string detail;
            if (ok) {
                auto smooth = multiplier_obstruction(quad, gsin, table1, 6, 1e-6);
                ok = smooth.all_match;
                detail = "smooth max log-ratio " + num(smooth.max_log_ratio);

                auto corner = multiplier_obstruction(tent, quad, table2, 1, 1e-6);
                bool boundary_flagged = false, interior_matched = false;
                for (const auto& p : corner.pairs) {
                    if (p.period != 1) continue;
                    if (std::abs(p.point_f) < 1e-9)
                        boundary_flagged = !p.match && std::abs(p.mult_f - 2) < 1e-6 &&
                                           std::abs(p.mult_g - 4) < 1e-6;
                    if (std::abs(p.point_f - 2.0 / 3.0) < 1e-6)
                        interior_matched = p.match && std::abs(p.mult_f + 2) < 1e-6 &&
                                           std::abs(p.mult_g + 2) < 1e-6;
                }
                ok = ok && boundary_flagged && interior_matched;
                detail += boundary_flagged ? ", boundary flagged" : ", boundary NOT flagged";
                detail += interior_matched ? ", interior matched" : ", interior NOT matched";
            }
            report(5, name, ok, detail);
        } catch (const std::exception& e) {
            report(5, name, false, e.what());
        }
    }

    // 6: exact periodic data of the full-height quadratic map
    {
        const char* name = "periodic-point-oracle";
        try {
            auto pts = find_periodic_points(quad, 2);
            const double r5 = std::sqrt(5.0);
            struct Want {
                double loc, mult;
                int period;
            } wants[] = {{0.0, 4.0, 1},
                         {0.75, -2.0, 1},
                         {(5.0 - r5) / 8.0, -4.0, 2},
                         {(5.0 + r5) / 8.0, -4.0, 2}};
            bool ok = pts.size() == 4;
            double worst = 0;
            for (const auto& w : wants) {
                const auto* p = find_cycle_point(pts, w.loc, w.period);
                if (!p) {
                    ok = false;
                    continue;
                }
                worst = std::max({worst, std::abs(p->location - w.loc),
                                  std::abs(p->multiplier - w.mult)});
            }
            ok = ok && worst <= 1e-8;
            report(6, name, ok, "count " + std::to_string(pts.size()) + ", worst err " + num(worst));
        } catch (const std::exception& e) {
            report(6, name, false, e.what());
        }
    }

    // 7: Schwarzian of the full-height quadratic map in closed form
    {
        const char* name = "schwarzian-closed-form";
        try {
            bool ok = true;
            double worst = 0;
            for (int i = 0; i < 100; ++i) {
                double x = (i + 0.5) / 100.0;
                double got = quad.schwarzian(x);
                double want = -6.0 / ((1 - 2 * x) * (1 - 2 * x));
                worst = std::max(worst, std::abs(got - want) / std::abs(want));
                if (!(got < 0)) ok = false;
            }
            ok = ok && worst <= 1e-8;
            report(7, name, ok, "worst rel err " + num(worst));
        } catch (const std::exception& e) {
            report(7, name, false, e.what());
        }
    }

    // 8: ratio-distortion laws: affine maps vanish, composition is subadditive
    {
        const char* name = "distortion-laws";
        try {
            CounterRng rng(2026, "acceptance-lrd");
            bool ok = true;
            double worst_affine = 0, worst_slack = 0;
            std::uint64_t draw = 0;
            // a 0.05 gap floor keeps the h(y)-h(x) cancellation below the bound
            for (int kept = 0; kept < 1000;) {
                double b = rng.uniform(draw++, 0.5, 2.0);
                double a = rng.uniform(draw++, -0.5, 0.5);
                double u[3] = {rng.uniform(draw++, 0.0, 1.0), rng.uniform(draw++, 0.0, 1.0),
                               rng.uniform(draw++, 0.0, 1.0)};
                std::sort(u, u + 3);
                if (u[1] - u[0] < 0.05 || u[2] - u[1] < 0.05) continue;
                auto aff = [&](double t) { return a + b * t; };
                worst_affine = std::max(
                    worst_affine,
                    log_ratio_distortion(u[0], u[1], u[2], aff(u[0]), aff(u[1]), aff(u[2])));
                ++kept;
            }
            ok = worst_affine <= 1e-12;

            CounterRng crng(2026, "acceptance-chain");
            for (std::uint64_t i = 0; i < 1000; ++i) {
                double a1 = crng.uniform(6 * i, 0.5, 3.0), s1 = crng.uniform(6 * i + 1, 0.1, 2.0);
                double a2 = crng.uniform(6 * i + 2, 0.5, 3.0);
                auto g1 = [&](double t) { return s1 * std::pow(t, a1); };
                auto g2 = [&](double t) { return std::pow(t, a2) + 0.2 * t; };
                double u[3] = {crng.uniform(6 * i + 3, 0.1, 0.9),
                               crng.uniform(6 * i + 4, 0.1, 0.9),
                               crng.uniform(6 * i + 5, 0.1, 0.9)};
                std::sort(u, u + 3);
                if (u[1] - u[0] < 1e-6 || u[2] - u[1] < 1e-6) continue;
                auto [composed, slack] = lrd_chain(g1, g2, u[0], u[1], u[2]);
                (void)composed;
                worst_slack = std::min(worst_slack, slack);
            }
            ok = ok && worst_slack >= -1e-9;
            report(8, name, ok,
                   "affine worst " + num(worst_affine) + ", min slack " + num(worst_slack));
        } catch (const std::exception& e) {
            report(8, name, false, e.what());
        }
    }

    // 9: derivative growth constants away from the turning points
    {
        const char* name = "growth-constants";
        try {
            auto est_q = estimate_mane_constants(quad, 0.1, CounterRng(2026, "acceptance-mane-q"));
            auto est_t = estimate_mane_constants(tent, 0.1, CounterRng(2026, "acceptance-mane-t"));
            bool ok = est_q.lambda_hat > 1.0 && std::abs(est_t.lambda_hat - 2.0) <= 1e-6;
            report(9, name, ok,
                   "quadratic " + num(est_q.lambda_hat) + ", affine-slope-2 " +
                       num(est_t.lambda_hat));
        } catch (const std::exception& e) {
            report(9, name, false, e.what());
        }
    }

    // 10: renormalization interval detection and its basin
    {
        const char* name = "renormalization-detection";
        try {
            auto quad36 = make_quadratic<double>(3.6);
            auto towers36 = find_renormalization_intervals(quad36, 4);
            auto towers4 = find_renormalization_intervals(quad, 8);
            bool ok = towers36.size() == 1 && towers36[0].n == 2 && towers4.empty();
            std::string detail = "count(3.6) " + std::to_string(towers36.size()) +
                                 ", count(4.0) " + std::to_string(towers4.size());
            if (ok) {
                auto restriction = restrict_return_map(quad36, towers36[0]);
                ok = validate_multimodal(restriction).ok();
                auto basin = compute_basin(quad36, towers36[0], 4);
                ok = ok && basin.fraction() >= 0.99;
                detail += ", basin " + num(basin.fraction());
            }
            report(10, name, ok, detail);
        } catch (const std::exception& e) {
            report(10, name, false, e.what());
        }
    }

    // 11: nice-set construction survives a deeper avoidance recheck
    {
        const char* name = "nice-set-recheck";
        try {
            auto ns = build_nice_set(quad, 0.05, 10000);
            auto check = verify_martens(quad, ns, 20000);
            report(11, name, check.ok,
                   "components " + std::to_string(ns.components.size()) + ", residual " +
                       num(check.max_residual) + (check.ok ? "" : ", " + check.why));
        } catch (const std::exception& e) {
            report(11, name, false, e.what());
        }
    }

    // 12: expanding certification at both boundary points
    {
        const char* name = "expanding-certification";
        try {
            bool ok = true;
            std::string detail;
            for (double p : {0.0, 1.0}) {
                auto w = certify_expanding(quad, p, 0.05);
                std::string why;
                bool good = w && static_cast<int>(w->scales.size()) >= 3 &&
                            verify_expansion_witness(quad, *w, 1e-9, &why);
                if (!good) ok = false;
                if (!detail.empty()) detail += ", ";
                detail += "p=" + num(p) + " " +
                          (good ? std::to_string(w->scales.size()) + " scales" : "FAIL " + why);
            }
            report(12, name, ok, detail);
        } catch (const std::exception& e) {
            report(12, name, false, e.what());
        }
    }

    // 13: rerunning a scenario with a fixed seed reproduces the bundle byte for byte
    {
        const char* name = "bundle-determinism";
        try {
            ScenarioConfig cfg = parse_scenario_text(R"(
depth = 10
seed = 20260823
[map_f]
family = tent
slope = 2.0
[map_g]
family = quadratic
lambda = 4.0
[diagnostics]
conjugacy = on
multipliers = on
uaa = on
[uaa]
point = 0.0
)");
            const std::filesystem::path work = "acceptance_tmp";
            std::filesystem::remove_all(work);
            for (const char* sub : {"a", "b"}) {
                cfg.outdir = (work / sub).string();
                try {
                    run_scenario<double>(cfg, "double");
                } catch (const HypothesisViolation&) {
                    // expected for this pair; the bundle is already on disk
                }
            }
            std::string a = slurp(work / "a" / "bundle.json");
            std::string b = slurp(work / "b" / "bundle.json");
            bool ok = !a.empty() && a == b;
            report(13, name, ok, num(static_cast<double>(a.size())) + " bytes");
        } catch (const std::exception& e) {
            report(13, name, false, e.what());
        }
    }

    std::printf("%s: %d/13 passed in %.1f s\n", failures ? "FAILURES" : "all",
                13 - failures, elapsed());
    return failures ? 1 : 0;
}
