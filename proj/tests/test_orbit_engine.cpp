#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <set>

#include "conjlab/expansion.hpp"
#include "conjlab/families.hpp"
#include "conjlab/orbit.hpp"
#include "conjlab/partition.hpp"
#include "conjlab/rng.hpp"

#include "oracles.hpp"

using namespace conjlab;

namespace {

template <class Real>
const PeriodicPoint<Real>* find_at(const std::vector<PeriodicPoint<Real>>& pts,
                                   Real x, Real tol = Real(1e-8)) {
    for (const auto& p : pts)
        if (std::abs(p.location - x) <= tol) return &p;
    return nullptr;
}

} // namespace

TEST_CASE("orbit iteration composes map evaluation") {
    auto f = make_quadratic<double>(3.7);
    auto orbit = iterate(f, 0.2, 5);
    REQUIRE(orbit.size() == 6);
    CHECK(orbit[0] == 0.2);
    for (int i = 0; i < 5; ++i)
        CHECK(orbit[static_cast<std::size_t>(i + 1)] == f(orbit[static_cast<std::size_t>(i)]));
}

TEST_CASE("full quadratic: exact low-period data") {
    auto f = make_quadratic<double>(4.0);
    auto pts = find_periodic_points(f, 2);

    // fixed points 0 and 3/4, multipliers 4 and -2
    auto* p0 = find_at(pts, 0.0);
    REQUIRE(p0);
    CHECK(p0->period == 1);
    CHECK(p0->multiplier == Catch::Approx(4.0).margin(1e-9));
    CHECK(p0->kind == CycleKind::repellor);

    auto* pf = find_at(pts, 0.75);
    REQUIRE(pf);
    CHECK(pf->period == 1);
    CHECK(pf->multiplier == Catch::Approx(-2.0).margin(1e-9));
    CHECK(pf->kind == CycleKind::repellor);

    // the 2-cycle (5 - sqrt 5)/8, (5 + sqrt 5)/8 with multiplier exactly -4
    const double s5 = std::sqrt(5.0);
    auto* a = find_at(pts, (5.0 - s5) / 8.0);
    auto* b = find_at(pts, (5.0 + s5) / 8.0);
    REQUIRE(a);
    REQUIRE(b);
    CHECK(a->period == 2);
    CHECK(b->period == 2);
    CHECK(a->multiplier == Catch::Approx(-4.0).margin(1e-8));
    CHECK(b->multiplier == Catch::Approx(-4.0).margin(1e-8));

    int count1 = 0, count2 = 0;
    for (const auto& p : pts) (p.period == 1 ? count1 : count2)++;
    CHECK(count1 == 2);
    CHECK(count2 == 2);
}

TEST_CASE("full quadratic: period-3 cycle count and multipliers") {
    auto f = make_quadratic<double>(4.0);
    auto pts = find_periodic_points(f, 3);
    int count3 = 0;
    std::set<int> signs;
    for (const auto& p : pts)
        if (p.period == 3) {
            ++count3;
            CHECK(std::abs(p.multiplier) == Catch::Approx(8.0).epsilon(1e-6));
            signs.insert(p.multiplier > 0 ? 1 : -1);
        }
    CHECK(count3 == 6);      // two genuine 3-cycles
    CHECK(signs.size() == 2);  // one with multiplier +8, one with -8
}

TEST_CASE("tent fixed points") {
    auto f = make_tent<double>();
    auto pts = find_periodic_points(f, 1);
    REQUIRE(pts.size() == 2);
    CHECK(pts[0].location == Catch::Approx(0.0).margin(1e-10));
    CHECK(pts[0].multiplier == Catch::Approx(2.0).margin(1e-8));
    CHECK(pts[1].location == Catch::Approx(2.0 / 3.0).margin(1e-10));
    CHECK(pts[1].multiplier == Catch::Approx(-2.0).margin(1e-8));
}

TEST_CASE("attracting and neutral cycles are classified") {
    // lambda = 3.2 has an attracting 2-cycle with multiplier 0.16
    auto f = make_quadratic<double>(3.2);
    auto pts = find_periodic_points(f, 2);
    const double lam = 3.2;
    const double disc = std::sqrt((lam + 1.0) * (lam - 3.0));
    const double x1 = (lam + 1.0 - disc) / (2.0 * lam);
    auto* c = find_at(pts, x1);
    REQUIRE(c);
    CHECK(c->period == 2);
    CHECK(c->multiplier == Catch::Approx(0.16).margin(1e-6));
    CHECK(c->kind == CycleKind::attractor);
    CHECK(has_non_repelling_cycle(pts));

    // lambda = 3: interior fixed point has multiplier exactly -1
    auto g = make_quadratic<double>(3.0);
    auto qts = find_periodic_points(g, 1);
    auto* n = find_at(qts, 2.0 / 3.0);
    REQUIRE(n);
    CHECK(n->kind == CycleKind::neutral);
}

TEST_CASE("repelling-only check on the full quadratic") {
    auto f = make_quadratic<double>(4.0);
    CHECK_FALSE(has_non_repelling_cycle(find_periodic_points(f, 4)));
}

TEST_CASE("grid coarseness is reported, not papered over") {
    auto f = make_tent<double>();
    CHECK_THROWS_AS(find_periodic_points(f, 8, 64), GridTooCoarse);
}

TEST_CASE("depth-1 preimages") {
    auto f = make_quadratic<double>(4.0);

    auto at_one = preimages(f, 1.0);
    REQUIRE(at_one.size() == 1);
    CHECK(at_one[0].point == Catch::Approx(0.5).margin(1e-12));
    CHECK_FALSE(at_one[0].noncritical);

    auto at_zero = preimages(f, 0.0);
    REQUIRE(at_zero.size() == 2);
    CHECK(at_zero[0].point == Catch::Approx(0.0).margin(1e-12));
    CHECK(at_zero[1].point == Catch::Approx(1.0).margin(1e-12));
    CHECK(at_zero[0].noncritical);
    CHECK(at_zero[1].noncritical);

    auto at = preimages(f, 0.3);
    REQUIRE(at.size() == 2);
    for (const auto& n : at) CHECK(f(n.point) == Catch::Approx(0.3).margin(1e-11));
}

TEST_CASE("backward orbit tree of the origin") {
    auto f = make_quadratic<double>(4.0);
    auto tree = noncritical_orbit(f, 0.0, 2, OrbitDirection::backward);

    // depth <= 2 backward orbit: {0, 1} then the critical preimage 1/2 of 1
    std::vector<double> all;
    for (const auto& n : tree.nodes) all.push_back(n.point);
    std::sort(all.begin(), all.end());
    REQUIRE(all.size() == 3);
    CHECK(all[0] == Catch::Approx(0.0).margin(1e-12));
    CHECK(all[1] == Catch::Approx(0.5).margin(1e-12));
    CHECK(all[2] == Catch::Approx(1.0).margin(1e-12));

    auto clean = tree.noncritical_points();
    REQUIRE(clean.size() == 2);

    for (const auto& n : tree.nodes)
        if (std::abs(n.point - 0.5) < 1e-9) CHECK_FALSE(n.noncritical);

    // forward push of any node along its branch chain returns to the root
    for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
        auto chain = tree.nodes[i].depth == 0 ? std::vector<int>{} :
                     tree.branch_chain(static_cast<int>(i));
        double x = tree.nodes[i].point;
        for (std::size_t s = 0; s < chain.size(); ++s) x = f(x);
        CHECK(x == Catch::Approx(0.0).margin(1e-9));
    }
}

TEST_CASE("backward orbit respects the node budget") {
    auto f = make_quadratic<double>(4.0);
    CHECK_THROWS_AS(noncritical_orbit(f, 0.3, 12, OrbitDirection::backward, 50),
                    DepthExplosion);
}

TEST_CASE("forward orbit stops at a turning point") {
    auto f = make_quadratic<double>(4.0);
    const double pre = (1.0 - std::sqrt(0.5)) / 2.0;  // maps onto 1/2
    auto tree = noncritical_orbit(f, pre, 8, OrbitDirection::forward);
    REQUIRE(tree.nodes.size() == 2);
    CHECK(tree.nodes[1].point == Catch::Approx(0.5).margin(1e-12));
    CHECK_FALSE(tree.nodes[1].noncritical);

    auto plain = noncritical_orbit(f, 0.3, 5, OrbitDirection::forward);
    REQUIRE(plain.nodes.size() == 6);
    CHECK(plain.nodes[1].point == Catch::Approx(0.84).margin(1e-12));
    CHECK(plain.nodes[2].point == Catch::Approx(0.5376).margin(1e-12));
}

TEST_CASE("monotone cells refine consistently") {
    auto f = make_quadratic<double>(4.0);
    std::vector<MonotoneCell<double>> level{root_cell(f)};
    for (int d = 0; d < 6; ++d) {
        std::vector<MonotoneCell<double>> next;
        for (const auto& c : level)
            for (auto& kid : refine_cell(f, c)) next.push_back(kid);
        // cells tile the domain
        double covered = 0;
        for (const auto& c : next) covered += c.cell.width();
        CHECK(covered == Catch::Approx(1.0).margin(1e-9));
        CHECK(next.size() == static_cast<std::size_t>(1) << (d + 1));
        level = std::move(next);
    }
    // forward iteration of cell interiors respects the recorded chain
    for (const auto& c : level) {
        double x = c.cell.mid();
        for (int j = 0; j < c.depth; ++j) {
            CHECK(f.branch_index(x) == c.chain[static_cast<std::size_t>(j)]);
            x = f(x);
        }
        CHECK(x >= c.image.lo - 1e-9);
        CHECK(x <= c.image.hi + 1e-9);
    }
}

TEST_CASE("preperiodic search lands on the cycle") {
    auto f = make_quadratic<double>(4.0);
    std::vector<double> cycle{0.75};
    Interval<double> window{0.48, 0.52};
    auto cands = find_preperiodic_in_window(f, cycle, window, 30, 3);
    REQUIRE_FALSE(cands.empty());
    for (const auto& c : cands) {
        CHECK(c.point >= window.lo);
        CHECK(c.point <= window.hi);
        // replayed forward orbit must shadow the certified chain
        double x = c.point;
        for (int j = 0; j < c.steps; ++j) {
            CHECK(x == Catch::Approx(c.chain_points[static_cast<std::size_t>(j)]).margin(1e-7));
            x = f(x);
        }
        CHECK(c.chain_points.back() == Catch::Approx(0.75).margin(1e-10));
    }
}

TEST_CASE("expansion witnesses at the boundary fixed points") {
    auto f = make_quadratic<double>(4.0);
    for (double p : {0.0, 1.0, 0.75}) {
        auto w = certify_expanding(f, p, 0.05);
        REQUIRE(w.has_value());
        CHECK(w->scales.size() >= 3);
        int last = 0;
        for (const auto& s : w->scales) {
            CHECK(s.k > last);
            last = s.k;
            CHECK(s.V.contains(p, 1e-12));
        }
        std::string why;
        CHECK(verify_expansion_witness(f, *w, 1e-9, &why));
        INFO(why);
    }
}

TEST_CASE("turning point has no direct witness but a nearby one") {
    auto f = make_quadratic<double>(4.0);
    CHECK_FALSE(certify_expanding(f, 0.5, 0.05, false).has_value());

    auto w = certify_expanding(f, 0.5, 0.05, true);
    REQUIRE(w.has_value());
    CHECK(w->nearby);
    CHECK(w->scales.size() >= 3);
    double prev_gap = 1.0;
    for (const auto& s : w->scales) {
        double gap = std::abs(s.base - 0.5);
        CHECK(gap <= prev_gap + 1e-12);
        prev_gap = gap;
    }
    std::string why;
    bool ok = verify_expansion_witness(f, *w, 1e-9, &why);
    INFO(why);
    CHECK(ok);
}

TEST_CASE("tampered witness fails verification") {
    auto f = make_quadratic<double>(4.0);
    auto w = certify_expanding(f, 0.75, 0.05);
    REQUIRE(w.has_value());
    auto bad = *w;
    bad.scales[1].V.hi += 0.01;
    CHECK_FALSE(verify_expansion_witness(f, bad, 1e-9));
    auto shuffled = *w;
    std::swap(shuffled.scales[0], shuffled.scales[1]);
    CHECK_FALSE(verify_expansion_witness(f, shuffled, 1e-9));
}

TEST_CASE("derivative growth constants on the tent map") {
    auto f = make_tent<double>();
    CounterRng rng(7, "mane");
    auto est = estimate_mane_constants(f, 0.05, rng);
    CHECK(est.lambda_hat == Catch::Approx(2.0).margin(1e-6));
    CHECK(est.c_hat == Catch::Approx(1.0).margin(1e-6));
    CHECK_FALSE(est.segments.empty());
}

TEST_CASE("derivative growth constants on the full quadratic") {
    auto f = make_quadratic<double>(4.0);
    CounterRng rng(11, "mane");
    auto est = estimate_mane_constants(f, 0.1, rng);
    CHECK(est.lambda_hat > 1.0);
    CHECK(est.c_hat > 0.0);
    CHECK(est.c_hat <= 1.0);
    // every recorded segment obeys the fitted bound by construction
    for (const auto& seg : est.segments)
        CHECK(seg.slope >= std::log(est.lambda_hat) - 1e-12);
}

TEST_CASE("no admissible segments when the exclusion zone swallows the orbit") {
    auto f = make_quadratic<double>(4.0);
    CounterRng rng(1, "mane");
    CHECK_THROWS_AS(estimate_mane_constants(f, 0.45, rng), NoAdmissibleSegments);
}

TEST_CASE("forward capture time of small intervals") {
    auto f = make_quadratic<double>(4.0);

    CHECK(forward_capture_time(f, {0.49, 0.51}) == 0);
    auto n = forward_capture_time(f, {0.10, 0.11});
    REQUIRE(n.has_value());
    CHECK(*n == 6);

    // cross-check against brute-force dense images
    Interval<double> J{0.10, 0.11};
    auto holds_turning = [&](const Interval<double>& I) {
        return I.lo < 0.5 && 0.5 < I.hi;
    };
    Interval<double> I = J;
    int oracle = -1;
    for (int k = 0; k <= 20; ++k) {
        if (holds_turning(I)) { oracle = k; break; }
        auto [lo, hi] = oracle::image_by_sampling([&](double x) { return f(x); }, I.lo, I.hi);
        I = {lo, hi};
    }
    CHECK(oracle == *n);

    // maps with no turning point never capture
    auto m = make_monotone_square<double>();
    CHECK_FALSE(forward_capture_time(m, {0.2, 0.3}).has_value());
}

TEST_CASE("capture time is monotone under inclusion") {
    auto f = make_quadratic<double>(3.8);
    CounterRng rng(23, "capture");
    for (std::uint64_t i = 0; i < 40; ++i) {
        double a = rng.uniform(4 * i, 0.05, 0.9);
        double w = rng.uniform(4 * i + 1, 1e-4, 0.02);
        Interval<double> J{a, a + w};
        Interval<double> K{a - 0.25 * w, a + 1.25 * w};
        auto nj = forward_capture_time(f, J, 300);
        auto nk = forward_capture_time(f, K, 300);
        if (nj) {
            REQUIRE(nk.has_value());
            CHECK(*nk <= *nj);
        }
    }
}

TEST_CASE("cycle multipliers survive smooth coordinate changes") {
    auto f = make_quadratic<double>(4.0);
    auto g = make_sine_conjugate(f, 0.1);
    auto pf = find_periodic_points(f, 3);
    auto pg = find_periodic_points(g, 3);
    REQUIRE(pf.size() == pg.size());
    SineDiffeo<double> phi{0.1};
    for (const auto& p : pf) {
        bool matched = false;
        double y = phi(p.location);
        for (const auto& q : pg)
            if (std::abs(q.location - y) < 1e-7) {
                matched = true;
                CHECK(q.period == p.period);
                CHECK(q.multiplier == Catch::Approx(p.multiplier).epsilon(1e-6));
            }
        CHECK(matched);
    }
}

TEST_CASE("orbit engine works in extended precision") {
    auto f = make_quadratic<long double>(4.0L);
    auto pts = find_periodic_points(f, 2, 1 << 12);
    auto* pf = find_at<long double>(pts, 0.75L, 1e-8L);
    REQUIRE(pf);
    CHECK(static_cast<double>(pf->multiplier) == Catch::Approx(-2.0).margin(1e-9));
    auto w = certify_expanding<long double>(f, 0.0L, 0.05L);
    REQUIRE(w.has_value());
}
