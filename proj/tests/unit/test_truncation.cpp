#include <catch2/catch_amalgamated.hpp>

#include "wfpt/truncation.hpp"

#include "support.hpp"

using namespace wfpt;
using testsupport::Draw;

// k spot values frozen from independent high-precision evaluation of the
// three truncation bounds.
TEST_CASE("k_large_nav spot values") {
    CHECK(k_large_nav(1.0, 1.0) == 1); // sqrt candidate vanishes
    CHECK(k_large_nav(1.0, 1e-6) == 2);
    CHECK(k_large_nav(0.01, 1e-6) == 19);
    CHECK(k_large_nav(10.0, 1e-6) == 1);
}

TEST_CASE("k_small_nav spot values") {
    CHECK(k_small_nav(1.0, 1.0) == 2); // fallback branch: ceil(1 + sqrt(1))
    CHECK(k_small_nav(1.0, 1e-6) == 7);
    CHECK(k_small_nav(0.1, 1e-6) == 4);
}

TEST_CASE("k_small_gon spot values and clamping") {
    CHECK(k_small_gon(1.0, 0.5, 1e-6) == 7);
    CHECK(k_small_gon(0.01, 0.9, 0.5) == 1); // both candidates negative
}

TEST_CASE("k values are always >= 1 and k_small_gon is odd") {
    Draw draw(424242);
    for (int i = 0; i < 2000; ++i) {
        const double th = draw.log_uniform(1e-5, 1e4);
        const double w = draw.uniform(0.01, 0.99);
        const double ep = draw.log_uniform(1e-12, 10.0);
        REQUIRE(k_large_nav(th, ep) >= 1);
        REQUIRE(k_small_nav(th, ep) >= 1);
        const int kg = k_small_gon(th, w, ep);
        REQUIRE(kg >= 1);
        REQUIRE(kg % 2 == 1);
    }
}

TEST_CASE("k is non-increasing as the tolerance loosens") {
    const double ths[] = {0.01, 0.1, 0.5, 1.0, 5.0, 30.0};
    const double ws[] = {0.2, 0.5, 0.8};
    for (double th : ths) {
        for (double w : ws) {
            int prev_l = std::numeric_limits<int>::max();
            int prev_s = prev_l, prev_g = prev_l;
            for (double lep = std::log(1e-12); lep <= std::log(1e-1) + 1e-12;
                 lep += 0.25) {
                const int kl = k_large_nav_log(th, lep);
                const int ks = k_small_nav_log(th, lep);
                const int kg = k_small_gon_log(th, w, lep);
                REQUIRE(kl <= prev_l);
                REQUIRE(ks <= prev_s);
                REQUIRE(kg <= prev_g);
                prev_l = kl;
                prev_s = ks;
                prev_g = kg;
            }
        }
    }
}

TEST_CASE("k formulas survive extreme tolerances") {
    // log eps_prime at the scale produced by huge variable-drift prefactors
    CHECK(k_large_nav_log(1e-6, -5000.0) >= 1);
    CHECK(k_small_nav_log(1e-6, -5000.0) >= 1);
    CHECK(k_small_gon_log(1e-6, 0.5, -5000.0) >= 1);
    CHECK(k_large_nav_log(1.0, 5000.0) == 1);
    CHECK(k_small_gon_log(1e300, 0.5, -1e6) >= 1); // stays clamped, no overflow
}

TEST_CASE("combined choosers pick the cheaper timescale, ties to small") {
    const TimescaleChoice c1 = choose_combined_nav(1.0, 1e-6);
    CHECK(c1.kind == TimescaleChoice::Kind::LargeTime);
    CHECK(c1.k == 2); // k_large = 2 < k_small = 7

    const TimescaleChoice c2 = choose_combined_nav(0.01, 1e-6);
    CHECK(c2.kind == TimescaleChoice::Kind::SmallTimeFixed);
    CHECK(c2.k == k_small_nav(0.01, 1e-6));

    const TimescaleChoice g1 = choose_combined_gon(1.0, 0.5, 1e-6);
    CHECK(g1.kind == TimescaleChoice::Kind::LargeTime);
    CHECK(g1.k == 2);

    const TimescaleChoice g2 = choose_combined_gon(0.05, 0.5, 1e-6);
    CHECK(g2.kind == TimescaleChoice::Kind::SmallTimeFixed);

    // scan for exact ties and confirm the tie-break
    bool found_tie = false;
    for (double th = 0.05; th < 5.0 && !found_tie; th += 0.01) {
        for (double ep : {1e-8, 1e-6, 1e-4, 1e-2}) {
            if (k_large_nav(th, ep) == k_small_nav(th, ep)) {
                const TimescaleChoice c = choose_combined_nav(th, ep);
                CHECK(c.kind == TimescaleChoice::Kind::SmallTimeFixed);
                found_tie = true;
                break;
            }
        }
    }
    CHECK(found_tie);
}

TEST_CASE("the delta rule uses large time only when it is very cheap") {
    const TimescaleChoice c1 = choose_swse_combined(1.0, 1e-6, 1);
    CHECK(c1.kind == TimescaleChoice::Kind::SmallTimeAdaptive); // k_large = 2 > 1

    const TimescaleChoice c2 = choose_swse_combined(10.0, 1e-6, 1);
    CHECK(c2.kind == TimescaleChoice::Kind::LargeTime);
    CHECK(c2.k == 1);

    // delta = 0 always sums adaptively
    for (double th : {0.01, 0.1, 1.0, 10.0, 100.0, 1000.0}) {
        const TimescaleChoice c = choose_swse_combined(th, 1e-6, 0);
        CHECK(c.kind == TimescaleChoice::Kind::SmallTimeAdaptive);
    }
}
