#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <numeric>

#include "wfpt/fit.hpp"
#include "wfpt/oracle.hpp"

#include "support.hpp"

using namespace wfpt;
using Catch::Matchers::WithinAbs;
using testsupport::Draw;

namespace {
Dataset one_row_dataset() {
    return {{"p1", StimulusClass::C1, Choice::Lower, 1.0}};
}
} // namespace

TEST_CASE("nll of a single canonical row is minus the log density") {
    const FitEstimates theta{1.0, 0.0, 0.0, 0.5, 0.0, 0.0};
    const double obj = nll(theta, one_row_dataset(), default_method(), {});
    CHECK_THAT(obj, WithinAbs(3.7900723146952791567, 1e-4));
}

TEST_CASE("nll is +infinity when every row is degenerate") {
    const FitEstimates theta{1.0, 0.0, 0.0, 0.5, 2.0, 0.0};
    CHECK(nll(theta, one_row_dataset(), default_method(), {}) ==
          std::numeric_limits<double>::infinity());
}

TEST_CASE("duplicating a row doubles the objective exactly") {
    const FitEstimates theta{1.0, 0.5, -0.5, 0.5, 0.1, 0.3};
    Dataset d = one_row_dataset();
    const double single = nll(theta, d, default_method(), {});
    d.push_back(d.front());
    CHECK(nll(theta, d, default_method(), {}) == 2.0 * single);
}

TEST_CASE("nll is invariant to row order") {
    Draw draw(99);
    Dataset d;
    for (int i = 0; i < 200; ++i)
        d.push_back({"p1",
                     draw.integer(0, 1) ? StimulusClass::C2 : StimulusClass::C1,
                     draw.integer(0, 1) ? Choice::Upper : Choice::Lower,
                     draw.log_uniform(0.3, 4.0)});
    const FitEstimates theta{1.2, 0.8, -0.3, 0.45, 0.05, 0.4};
    const double base = nll(theta, d, default_method(), {});
    for (int trial = 0; trial < 20; ++trial) {
        std::shuffle(d.begin(), d.end(), draw.rng);
        REQUIRE(nll(theta, d, default_method(), {}) == base);
    }
}

TEST_CASE("nll uses the per-class drift rate") {
    Dataset d = {{"p1", StimulusClass::C1, Choice::Lower, 1.0},
                 {"p1", StimulusClass::C2, Choice::Lower, 1.0}};
    const FitEstimates theta{1.0, 2.0, -1.0, 0.5, 0.0, 0.0};
    DdmParams p1{2.0, 0.0, 1.0, 0.5, 0.0, 1.0};
    DdmParams p2{-1.0, 0.0, 1.0, 0.5, 0.0, 1.0};
    const double expected =
        -log_density(default_method(), p1, {Choice::Lower, 1.0}, {}) -
        log_density(default_method(), p2, {Choice::Lower, 1.0}, {});
    CHECK_THAT(nll(theta, d, default_method(), {}), WithinAbs(expected, 1e-12));
}

TEST_CASE("simulate is deterministic and respects its preconditions") {
    const FitEstimates truth{1.0, 1.0, -0.5, 0.5, 0.3, 0.5};
    const Dataset d1 = simulate(truth, 100, 7, 1e-3);
    const Dataset d2 = simulate(truth, 100, 7, 1e-3);
    REQUIRE(d1.size() == d2.size());
    for (std::size_t i = 0; i < d1.size(); ++i) {
        REQUIRE(d1[i].rt == d2[i].rt);
        REQUIRE(d1[i].choice == d2[i].choice);
        REQUIRE(d1[i].stimulus_class == d2[i].stimulus_class);
    }
    const Dataset d3 = simulate(truth, 100, 8, 1e-3);
    bool any_diff = d3.size() != d1.size();
    for (std::size_t i = 0; !any_diff && i < d1.size(); ++i)
        any_diff = d1[i].rt != d3[i].rt;
    CHECK(any_diff);

    CHECK_THROWS_AS(simulate(truth, 10, 1, 0.01), DomainError); // dt too big
    for (const DatasetRow& r : d1) REQUIRE(r.rt > truth.t0);
}

TEST_CASE("simulated choice fractions match the model symmetries") {
    // zero drift, centered start: half the trials absorb at each boundary
    const FitEstimates sym{1.0, 0.0, 0.0, 0.5, 0.0, 0.0};
    const Dataset d = simulate(sym, 50000, 11, 1e-3);
    long lower = 0, n1 = 0;
    for (const DatasetRow& r : d)
        if (r.stimulus_class == StimulusClass::C1) {
            ++n1;
            lower += r.choice == Choice::Lower;
        }
    const double frac = static_cast<double>(lower) / static_cast<double>(n1);
    CHECK_THAT(frac, WithinAbs(0.5, 0.01));

    // +v and -v mirror upper/lower fractions
    const FitEstimates pos{1.0, 2.0, 0.0, 0.5, 0.0, 0.0};
    const FitEstimates neg{1.0, -2.0, 0.0, 0.5, 0.0, 0.0};
    const Dataset dp = simulate(pos, 20000, 21, 1e-3);
    const Dataset dn = simulate(neg, 20000, 22, 1e-3);
    const auto upper_frac_c1 = [](const Dataset& d) {
        long upper = 0, n = 0;
        for (const DatasetRow& r : d)
            if (r.stimulus_class == StimulusClass::C1) {
                ++n;
                upper += r.choice == Choice::Upper;
            }
        return static_cast<double>(upper) / static_cast<double>(n);
    };
    CHECK_THAT(upper_frac_c1(dp), WithinAbs(1.0 - upper_frac_c1(dn), 0.01));
}

TEST_CASE("simulated response times follow the reference density") {
    // Histogram of simulated decision times against the oracle curve.
    const FitEstimates truth{1.0, 1.0, 1.0, 0.5, 0.3, 0.0};
    const int n = 100000;
    const Dataset d = simulate(truth, n / 2, 33, 1e-4);

    DdmParams p{1.0, 0.0, 1.0, 0.5, 0.3, 1.0};
    constexpr int bins = 40;
    const double t_lo = 0.3, t_hi = 2.3;
    const double width = (t_hi - t_lo) / bins;
    std::vector<double> hist(bins, 0.0);
    long used = 0;
    for (const DatasetRow& r : d) {
        if (r.choice != Choice::Upper) continue; // compare the upper boundary
        if (r.rt < t_lo || r.rt >= t_hi) continue;
        ++hist[static_cast<std::size_t>((r.rt - t_lo) / width)];
        ++used;
    }
    REQUIRE(used > 10000);
    double peak = 0.0, worst = 0.0;
    const double total = static_cast<double>(d.size());
    for (int b = 0; b < bins; ++b) {
        // bin-averaged reference by Simpson's rule
        const double l = t_lo + b * width;
        const double ref =
            (reference_density(p, {Choice::Upper, l}) +
             4.0 * reference_density(p, {Choice::Upper, l + 0.5 * width}) +
             reference_density(p, {Choice::Upper, l + width})) /
            6.0;
        const double est = hist[b] / (total * width);
        peak = std::max(peak, ref);
        worst = std::max(worst, std::fabs(est - ref));
    }
    CHECK(worst < 0.03 * peak);
}

TEST_CASE("fit recovers parameters from a small simulated dataset") {
    const FitEstimates truth{1.0, 1.5, -1.0, 0.5, 0.25, 0.0};
    const Dataset d = simulate(truth, 400, 5, 1e-3);
    FitConfig cfg;
    // a focused subset of the default starts keeps this test quick
    cfg.starts = {default_fit_starts()[2], default_fit_starts()[4],
                  default_fit_starts()[8]};
    const std::vector<FitResult> results = fit(d, cfg);
    REQUIRE(results.size() == 3);

    const double t0_hi = min_rt(d) - cfg.t0_margin;
    for (const FitResult& r : results) {
        REQUIRE(r.estimates.a >= cfg.a_lo);
        REQUIRE(r.estimates.a <= cfg.a_hi);
        REQUIRE(r.estimates.w >= cfg.w_lo);
        REQUIRE(r.estimates.w <= cfg.w_hi);
        REQUIRE(r.estimates.t0 >= 0.0);
        REQUIRE(r.estimates.t0 <= t0_hi);
        REQUIRE(r.estimates.eta >= cfg.eta_lo);
        REQUIRE(r.n_obj_evals > 0);
        REQUIRE(r.n_obj_evals <= cfg.max_obj_evals);
    }
    const FitResult* best = best_result(results);
    REQUIRE(best != nullptr);
    CHECK_THAT(best->estimates.a, WithinAbs(truth.a, 0.15));
    CHECK_THAT(best->estimates.v_c1, WithinAbs(truth.v_c1, 0.5));
    CHECK_THAT(best->estimates.v_c2, WithinAbs(truth.v_c2, 0.5));
    CHECK_THAT(best->estimates.w, WithinAbs(truth.w, 0.08));
    CHECK_THAT(best->estimates.t0, WithinAbs(truth.t0, 0.05));
}

TEST_CASE("identical starts give identical results") {
    const FitEstimates truth{1.0, 1.0, -0.5, 0.5, 0.2, 0.0};
    const Dataset d = simulate(truth, 150, 17, 1e-3);
    FitConfig cfg;
    cfg.starts = {default_fit_starts()[0], default_fit_starts()[0]};
    const std::vector<FitResult> results = fit(d, cfg);
    REQUIRE(results.size() == 2);
    CHECK(results[0].objective == results[1].objective);
    CHECK(results[0].estimates.a == results[1].estimates.a);
    CHECK(results[0].estimates.t0 == results[1].estimates.t0);
    CHECK(results[0].n_obj_evals == results[1].n_obj_evals);
    CHECK(results[0].convergence == results[1].convergence);
}

TEST_CASE("fit survives a single-observation dataset") {
    FitConfig cfg;
    cfg.starts = {default_fit_starts()[0], default_fit_starts()[5]};
    const Dataset d = one_row_dataset();
    const std::vector<FitResult> results = fit(d, cfg);
    REQUIRE(results.size() == 2); // either status is fine; no crash, in bounds
    for (const FitResult& r : results) {
        REQUIRE(r.estimates.w >= cfg.w_lo);
        REQUIRE(r.estimates.w <= cfg.w_hi);
    }
}

TEST_CASE("config validation") {
    FitConfig cfg;
    cfg.a_lo = 0.0;
    CHECK_THROWS_AS(fit(one_row_dataset(), cfg), DomainError);
    cfg = {};
    cfg.starts.clear();
    CHECK_THROWS_AS(fit(one_row_dataset(), cfg), DomainError);
    CHECK_THROWS_AS(fit(Dataset{}, FitConfig{}), DomainError);
}
