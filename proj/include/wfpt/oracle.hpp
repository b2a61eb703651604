#pragma once

// Slow, high-confidence reference density used by tests and the `validate`
// CLI command. Evaluates BOTH series forms with a huge fixed term count in
// 128-bit floats with compensated accumulation, asserts that the two
// timescales agree, and returns the small-time value. The two forms share no
// summation code path with each other, so their agreement checks the whole
// formula set, not one implementation against itself.

#include <cmath>
#include <stdexcept>
#include <string>

#include <quadmath.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "wfpt/density.hpp"
#include "wfpt/params.hpp"

namespace wfpt {

struct OracleConfig {
    int n_terms = 10000;         // terms per series form
    double agreement_tol = 1e-10; // |f_large - f_small| <= tol * max(1, f)
};

class OracleDisagreement : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace oracle_detail {

using quad = __float128;

// Neumaier-compensated accumulator (error-free TwoSum transform).
struct CompensatedSum {
    quad s = 0;
    quad c = 0;
    void add(quad x) {
        const quad t = s + x;
        if (fabsq(s) >= fabsq(x))
            c += (s - t) + x;
        else
            c += (x - t) + s;
        s = t;
    }
    quad value() const { return s + c; }
};

// expq underflows to exact zero near -11356; beyond this cutoff every
// remaining term is zero and the loop can stop.
constexpr double exp_cutoff = -11420.0;

inline quad pi_quad() {
    static const quad pi = acosq(quad(-1));
    return pi;
}

inline quad sum_small_quad(quad t_hat, quad w, int n_terms) {
    const quad inv_2th = quad(0.5) / t_hat;
    const long n = 2L * (n_terms / 2) + 1;
    CompensatedSum acc;
    for (long m = 0; m < n; ++m) {
        // Interleaved window order {0, -1, 1, -2, 2, ...}; |w + 2j| is
        // nondecreasing along it, so the underflow cutoff is monotone.
        const long j = (m & 1L) ? -((m + 1) / 2) : m / 2;
        const quad x = w + quad(2) * quad(j);
        const quad arg = -x * x * inv_2th;
        if (arg < quad(exp_cutoff)) break;
        acc.add(x * expq(arg));
    }
    return acc.value();
}

inline quad sum_large_quad(quad t_hat, quad w, int n_terms) {
    const quad pi = pi_quad();
    const quad c = quad(0.5) * pi * pi * t_hat;
    const quad wpi = w * pi;
    CompensatedSum acc;
    for (long j = 1; j <= n_terms; ++j) {
        const quad qj = quad(j);
        const quad arg = -qj * qj * c;
        if (arg < quad(exp_cutoff)) break;
        acc.add(qj * sinq(qj * wpi) * expq(arg));
    }
    return acc.value();
}

inline quad log_prefactor_quad(bool large, quad v, quad eta, quad a, quad w,
                               quad t) {
    const quad base = large ? logq(pi_quad()) - quad(2) * logq(a)
                            : logq(a) - quad(0.5) * logq(quad(2) * pi_quad()) -
                                  quad(1.5) * logq(t);
    if (eta == 0)
        return base + (-v * a * w - quad(0.5) * v * v * t);
    const quad eta2t = eta * eta * t;
    const quad expo =
        (eta * eta * a * a * w * w - quad(2) * v * a * w - v * v * t) /
        (quad(2) * (quad(1) + eta2t));
    return base - quad(0.5) * logq(quad(1) + eta2t) + expo;
}

} // namespace oracle_detail

// Full small-time / large-time sums at 128-bit precision, rounded to double.
// Exposed for tests that need a trusted sum value without the prefactor.
inline double oracle_sum_small(double t_hat, double w, int n_terms = 10000) {
    return static_cast<double>(oracle_detail::sum_small_quad(
        oracle_detail::quad(t_hat), oracle_detail::quad(w), n_terms));
}

inline double oracle_sum_large(double t_hat, double w, int n_terms = 10000) {
    return static_cast<double>(oracle_detail::sum_large_quad(
        oracle_detail::quad(t_hat), oracle_detail::quad(w), n_terms));
}

// Reference density. Throws OracleDisagreement if the two timescale forms
// differ beyond cfg.agreement_tol * max(1, value) -- a signal of either an
// implementation bug or parameters outside the trustworthy regime.
inline double reference_density(const DdmParams& params, const Observation& obs,
                                const OracleConfig& cfg = {}) {
    using oracle_detail::quad;
    if (cfg.n_terms < 100)
        throw DomainError("n_terms", "oracle n_terms must be >= 100");
    validate(params);
    const NormalizedInput in = prepare(params, obs);
    if (in.degenerate) return 0.0;

    const quad t = quad(in.t_shifted);
    const quad a = quad(in.params.a);
    const quad th = t / (a * a);
    const quad v = quad(in.params.v);
    const quad eta = quad(in.params.eta);
    const quad w = quad(in.params.w);

    const quad sum_s = oracle_detail::sum_small_quad(th, w, cfg.n_terms);
    const quad sum_l = oracle_detail::sum_large_quad(th, w, cfg.n_terms);
    const quad f_s =
        expq(oracle_detail::log_prefactor_quad(false, v, eta, a, w, t)) * sum_s;
    const quad f_l =
        expq(oracle_detail::log_prefactor_quad(true, v, eta, a, w, t)) * sum_l;

    const quad diff = fabsq(f_l - f_s);
    quad scale = fabsq(f_s);
    if (scale < quad(1)) scale = 1;
    if (diff > quad(cfg.agreement_tol) * scale) {
        char buf[256];
        snprintf(buf, sizeof buf,
                 "timescale disagreement: small=%.17g large=%.17g (t=%.17g)",
                 static_cast<double>(f_s), static_cast<double>(f_l), obs.rt);
        throw OracleDisagreement(buf);
    }
    double out = static_cast<double>(f_s);
    return out > 0.0 ? out : 0.0;
}

// Total probability mass of the two boundaries over (t0, t0 + 60] by adaptive
// Gauss-Kronrod quadrature of the reference density. The survival mass beyond
// 60 s is far below the tolerances this is checked against for the parameter
// ranges in use.
inline double check_normalization(const DdmParams& params,
                                  const OracleConfig& cfg = {}) {
    validate(params);
    const auto f = [&](double t) {
        return reference_density(params, {Choice::Lower, t}, cfg) +
               reference_density(params, {Choice::Upper, t}, cfg);
    };
    return boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
        f, params.t0, params.t0 + 60.0, 15, 1e-9);
}

} // namespace wfpt
