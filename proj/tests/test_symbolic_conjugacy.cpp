#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <sstream>
#include <string>

#include "conjlab/conjugacy.hpp"
#include "conjlab/families.hpp"
#include "conjlab/itinerary.hpp"

#include "oracles.hpp"

using namespace conjlab;

TEST_CASE("itineraries follow branch membership") {
    auto f = make_quadratic<double>(4.0);
    auto syms = itinerary(f, 0.3, 6);
    double z = 0.3;
    for (const auto& s : syms) {
        CHECK_FALSE(s.turning);
        CHECK(s.index == f.branch_index(z));
        z = f(z);
    }
}

TEST_CASE("exact critical hits are marked") {
    auto f = make_quadratic<double>(4.0);
    auto syms = itinerary(f, 0.5, 4);
    CHECK(syms[0].turning);
    CHECK(syms[0].index == 0);
    CHECK_FALSE(syms[1].turning);

    const double pre = (1.0 - std::sqrt(0.5)) / 2.0;
    auto s2 = itinerary(f, pre, 4);
    CHECK_FALSE(s2[0].turning);
    CHECK(s2[1].turning);
    CHECK(symbols_to_string(s2).substr(0, 3) == "0C0");
}

TEST_CASE("kneading sequence of the full quadratic") {
    auto f = make_quadratic<double>(4.0);
    auto kn = kneading_sequences(f, 6);
    REQUIRE(kn.size() == 1);
    CHECK(symbols_to_string(kn[0]) == "100000");
}

TEST_CASE("kneading match picks the right orientation") {
    auto q = make_quadratic<double>(4.0);
    auto t = make_tent<double>();
    auto m = match_kneading(t, q);
    CHECK(m.preserving);

    auto flipped = make_flip_conjugate(q);
    auto mf = match_kneading(t, flipped);
    CHECK_FALSE(mf.preserving);
    CHECK(mf.reversing);

    auto bad = match_kneading(t, make_quadratic<double>(3.6));
    CHECK_FALSE(bad.any());
}

TEST_CASE("tent to quadratic conjugacy against the closed form") {
    auto t = make_tent<double>();
    auto q = make_quadratic<double>(4.0);
    auto table = build_conjugacy(t, q, 12);
    CHECK(table.orientation_preserving);

    CounterRng rng(3, "tq");
    for (std::uint64_t i = 0; i < 800; ++i) {
        double x = rng.uniform(i);
        double want = oracle::tent_to_quadratic(x);
        CHECK(eval_conjugacy(table, x) == Catch::Approx(want).margin(2e-7));
    }
    // breakpoints are exact preimage pairs
    for (const auto& b : table.points)
        CHECK(b.y == Catch::Approx(oracle::tent_to_quadratic(b.x)).margin(1e-10));

    // the tent fixed point 2/3 maps to 3/4
    CHECK(eval_conjugacy(table, 2.0 / 3.0) == Catch::Approx(0.75).margin(1e-6));
}

TEST_CASE("equivariance residual and order") {
    auto t = make_tent<double>();
    auto q = make_quadratic<double>(4.0);
    auto table = build_conjugacy(t, q, 12);
    auto chk = verify_conjugacy(t, q, table, 600);
    CHECK(chk.monotone);
    CHECK(chk.endpoints_fixed);
    CHECK(chk.sup_residual <= 1e-6);
    CHECK(chk.ok(1e-6));
}

TEST_CASE("identity pair gives the identity table") {
    auto f = make_quadratic<double>(4.0);
    auto table = build_conjugacy(f, f, 8);
    for (const auto& b : table.points) CHECK(b.y == Catch::Approx(b.x).margin(1e-11));
    auto chk = verify_conjugacy(f, f, table, 200);
    CHECK(chk.sup_residual <= 1e-10);
}

TEST_CASE("smooth coordinate change is recovered") {
    auto f = make_quadratic<double>(4.0);
    auto g = make_sine_conjugate(f, 0.1);
    auto table = build_conjugacy(f, g, 10);
    SineDiffeo<double> phi{0.1};
    CounterRng rng(5, "phi");
    for (std::uint64_t i = 0; i < 300; ++i) {
        double x = rng.uniform(i);
        CHECK(eval_conjugacy(table, x) == Catch::Approx(phi(x)).margin(5e-6));
    }
    auto chk = verify_conjugacy(f, g, table, 300);
    CHECK(chk.ok(1e-4));
}

TEST_CASE("order-reversing conjugacy") {
    auto t = make_tent<double>();
    auto q = make_quadratic<double>(4.0);
    auto flipped = make_flip_conjugate(q);
    auto table = build_conjugacy(t, flipped, 12);
    CHECK_FALSE(table.orientation_preserving);
    CounterRng rng(9, "rev");
    for (std::uint64_t i = 0; i < 300; ++i) {
        double x = rng.uniform(i);
        double want = 1.0 - oracle::tent_to_quadratic(x);
        CHECK(eval_conjugacy(table, x) == Catch::Approx(want).margin(2e-7));
    }
    auto chk = verify_conjugacy(t, flipped, table, 400);
    CHECK(chk.monotone);
    CHECK(chk.ok(1e-6));
}

TEST_CASE("tables refine consistently across depth") {
    auto t = make_tent<double>();
    auto q = make_quadratic<double>(4.0);
    auto shallow = build_conjugacy(t, q, 6);
    auto deep = build_conjugacy(t, q, 9);
    for (const auto& b : shallow.points) {
        bool matched = false;
        for (const auto& d : deep.points)
            if (std::abs(d.x - b.x) <= 1e-12) {
                matched = true;
                CHECK(d.y == Catch::Approx(b.y).margin(1e-12));
                CHECK(d.level == b.level);
            }
        CHECK(matched);
    }
    CHECK(deep.points.size() > shallow.points.size());
}

TEST_CASE("refined evaluation is accurate far below table scale") {
    auto t = make_tent<double>();
    auto q = make_quadratic<double>(4.0);
    auto table = build_conjugacy(t, q, 12);

    std::vector<double> xs;
    for (int k = 0; k < 4; ++k) xs.push_back(0.3 + 1e-8 * k);
    auto ys = eval_conjugacy_refined(t, q, table, xs);
    REQUIRE(ys.size() == xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i)
        CHECK(ys[i] == Catch::Approx(oracle::tent_to_quadratic(xs[i])).margin(1e-10));

    // difference quotients at scale 1e-8 reproduce the derivative
    double quot = (ys[1] - ys[0]) / 1e-8;
    double deriv = 0.5 * std::acos(-1.0) * std::sin(std::acos(-1.0) * 0.3);
    CHECK(quot == Catch::Approx(deriv).epsilon(1e-3));

    // clusters pinned at a turning point fall back to the coarse table
    std::vector<double> straddle{0.4999, 0.5001};
    auto fallback = eval_conjugacy_refined(t, q, table, straddle);
    CHECK(fallback[0] == Catch::Approx(eval_conjugacy(table, 0.4999)).margin(1e-15));
}

TEST_CASE("refined evaluation under orientation reversal") {
    auto t = make_tent<double>();
    auto flipped = make_flip_conjugate(make_quadratic<double>(4.0));
    auto table = build_conjugacy(t, flipped, 12);
    std::vector<double> xs{0.27, 0.27 + 2e-8, 0.27 + 4e-8};
    auto ys = eval_conjugacy_refined(t, flipped, table, xs);
    for (std::size_t i = 0; i < xs.size(); ++i)
        CHECK(ys[i] == Catch::Approx(1.0 - oracle::tent_to_quadratic(xs[i])).margin(1e-10));
}

TEST_CASE("mismatched kneading is rejected") {
    auto q4 = make_quadratic<double>(4.0);
    auto q36 = make_quadratic<double>(3.6);
    CHECK_THROWS_AS(build_conjugacy(q4, q36, 8), KneadingMismatch);

    auto cubic = make_cubic<double>();
    CHECK_THROWS_AS(build_conjugacy(q4, cubic, 8), KneadingMismatch);
}

TEST_CASE("cycle-type gate blocks one-sided attractors") {
    auto q4 = make_quadratic<double>(4.0);
    auto q32 = make_quadratic<double>(3.2);
    ConjugacyOptions opts;
    opts.attractor_gate_period = 4;
    CHECK_THROWS_AS(build_conjugacy(q4, q32, 6, opts), KneadingMismatch);
}

TEST_CASE("deep structural drift surfaces during refinement") {
    auto q4 = make_quadratic<double>(4.0);
    auto q399 = make_quadratic<double>(3.99);
    ConjugacyOptions opts;
    opts.kneading_horizon = 3;  // too short to see the divergence up front
    CHECK_THROWS_AS(build_conjugacy(q4, q399, 10, opts), AmbiguousCorrespondence);
}

TEST_CASE("critical order diagnostic") {
    auto t = make_tent<double>();
    auto q = make_quadratic<double>(4.0);
    auto table = build_conjugacy(t, q, 12);
    auto pairs = check_critical_order(t, q, table);
    REQUIRE(pairs.size() == 1);
    CHECK(pairs[0].order_f == Catch::Approx(1.0));
    CHECK(pairs[0].order_g == Catch::Approx(2.0));
    CHECK(pairs[0].value_exponent == Catch::Approx(2.0).margin(0.1));
    CHECK_FALSE(pairs[0].compatible);

    auto f = make_quadratic<double>(4.0);
    auto g = make_sine_conjugate(f, 0.1);
    auto smooth = build_conjugacy(f, g, 10);
    auto sp = check_critical_order(f, g, smooth);
    REQUIRE(sp.size() == 1);
    CHECK(sp[0].value_exponent == Catch::Approx(1.0).margin(0.1));
    CHECK(sp[0].compatible);
}

TEST_CASE("conjugacy table round-trips through csv") {
    auto t = make_tent<double>();
    auto q = make_quadratic<double>(4.0);
    auto table = build_conjugacy(t, q, 5);
    std::ostringstream os;
    write_conjugacy_csv(os, table);
    std::istringstream is(os.str());
    std::string header;
    std::getline(is, header);
    CHECK(header == "x,y,depth");
    std::size_t rows = 0;
    std::string line;
    while (std::getline(is, line))
        if (!line.empty()) ++rows;
    CHECK(rows == table.points.size());
}

TEST_CASE("conjugacy construction in extended precision") {
    auto t = make_tent<long double>();
    auto q = make_quadratic<long double>(4.0L);
    auto table = build_conjugacy(t, q, 8);
    long double x = 0.37L;
    long double want = oracle::tent_to_quadratic(static_cast<double>(x));
    CHECK(static_cast<double>(eval_conjugacy(table, x)) ==
          Catch::Approx(static_cast<double>(want)).margin(1e-5));
}
