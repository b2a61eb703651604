#pragma once

// Grid-level validation: oracle self-consistency across a parameter grid,
// production methods checked against the oracle, and the normalization
// check (lower + upper mass integrating to 1). Used by the `validate` CLI
// subcommand and the acceptance suite.

#include <string>
#include <vector>

#include "wfpt/bench.hpp"
#include "wfpt/oracle.hpp"

namespace wfpt {

struct GridCheckResult {
    long points = 0;
    long failures = 0;
    double max_abs_err = 0.0;
    std::string worst; // description of the worst/first failing point
};

// Runs the oracle at every grid point (lower boundary, t > t0); failures are
// timescale disagreements beyond the oracle tolerance.
inline GridCheckResult oracle_selfcheck_grid(const ParamGrid& grid,
                                             const OracleConfig& cfg = {}) {
    GridCheckResult res;
    for (double t : grid.t) {
        if (!(t > grid.t0)) continue;
        for (double a : grid.a)
            for (double v : grid.v)
                for (double w : grid.w)
                    for (double eta : grid.eta) {
                        const DdmParams p{v, eta, a, w, grid.t0, 1.0};
                        ++res.points;
                        try {
                            reference_density(p, {Choice::Lower, t}, cfg);
                        } catch (const OracleDisagreement& e) {
                            ++res.failures;
                            if (res.failures == 1) res.worst = e.what();
                        }
                    }
    }
    return res;
}

// Max |method - oracle| over the grid; a point fails when the error reaches
// opts.eps.
inline GridCheckResult method_vs_oracle_grid(const ParamGrid& grid,
                                             const MethodSpec& method,
                                             const EvalOptions& opts,
                                             const OracleConfig& cfg = {}) {
    GridCheckResult res;
    char buf[160];
    for (double t : grid.t) {
        if (!(t > grid.t0)) continue;
        for (double a : grid.a)
            for (double v : grid.v)
                for (double w : grid.w)
                    for (double eta : grid.eta) {
                        const DdmParams p{v, eta, a, w, grid.t0, 1.0};
                        const Observation o{Choice::Lower, t};
                        ++res.points;
                        const double ref = reference_density(p, o, cfg);
                        const double got = density(method, p, o, opts).value;
                        const double err = std::fabs(got - ref);
                        if (err > res.max_abs_err) {
                            res.max_abs_err = err;
                            std::snprintf(buf, sizeof buf,
                                          "t=%g a=%g v=%g w=%g eta=%g: "
                                          "|%.17g - %.17g| = %.3g",
                                          t, a, v, w, eta, got, ref, err);
                            res.worst = buf;
                        }
                        if (err >= opts.eps) ++res.failures;
                    }
    }
    return res;
}

// Twelve parameter sets spanning the wide benchmark grid (a <= 2.5) used for
// the normalization check.
inline std::vector<DdmParams> normalization_check_sets() {
    // {v, eta, a, w, t0, sigma2}
    return {
        {0.0, 0.0, 0.25, 0.5, 0.0001, 1.0},
        {2.0, 0.5, 0.25, 0.2, 0.0001, 1.0},
        {-2.0, 1.0, 0.25, 0.8, 0.0001, 1.0},
        {-2.0, 0.0, 0.5, 0.5, 0.0001, 1.0},
        {0.0, 0.0, 1.0, 0.5, 0.0001, 1.0},
        {2.0, 1.5, 1.0, 0.2, 0.0001, 1.0},
        {-5.0, 0.5, 1.0, 0.8, 0.0001, 1.0},
        {5.0, 1.0, 1.0, 0.5, 0.0001, 1.0},
        {0.0, 0.5, 2.5, 0.5, 0.0001, 1.0},
        {2.0, 0.0, 2.5, 0.8, 0.0001, 1.0},
        {-2.0, 1.0, 2.5, 0.2, 0.0001, 1.0},
        {5.0, 1.5, 2.5, 0.5, 0.0001, 1.0},
    };
}

struct NormalizationCheck {
    DdmParams params;
    double mass = 0.0;
    bool ok = false;
};

// Integrates the production density (lower + upper) over (t0, t0 + 60] by
// adaptive Gauss-Kronrod quadrature and checks the total mass against 1.
inline NormalizationCheck check_method_normalization(const DdmParams& params,
                                                     const MethodSpec& method,
                                                     const EvalOptions& opts,
                                                     double tol = 1e-4) {
    const auto f = [&](double t) {
        const Observation lo{Choice::Lower, t};
        const Observation hi{Choice::Upper, t};
        return density(method, params, lo, opts).value +
               density(method, params, hi, opts).value;
    };
    NormalizationCheck res;
    res.params = params;
    res.mass = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
        f, params.t0, params.t0 + 60.0, 15, 1e-9);
    res.ok = std::fabs(res.mass - 1.0) <= tol;
    return res;
}

} // namespace wfpt
