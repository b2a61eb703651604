#pragma once

// Precalculated term counts k for the truncated series and the rules that
// choose between timescales. All rules take the effective response time
// t_hat = t/a^2 and a rescaled tolerance eps_prime.
//
// eps_prime is the allowed truncation error of the *normalized* density --
// the density at a = 1, sigma = 1, zero drift, evaluated at t_hat, i.e.
// pi * (large-time sum) or (2 pi t_hat^3)^(-1/2) * (small-time sum). That is
// the scale on which these bounds were derived; callers divide the final
// tolerance by the scalar that multiplies the normalized density (see
// density.hpp). Rescaling by the full prefactor instead would overshoot the
// error by up to sqrt(2 pi t_hat^3) at large t_hat.
//
// The *_log entry points take log(eps_prime) directly so that callers can
// rescale in log space without underflow.

#include <cmath>
#include <limits>

#include "wfpt/sum_kernels.hpp"

namespace wfpt {

// User tolerance on the density and its sum-level rescale.
struct Tolerance {
    double eps = 1e-6;
    double eps_prime = 1e-6;
};

struct TimescaleChoice {
    enum class Kind { LargeTime, SmallTimeFixed, SmallTimeAdaptive };
    Kind kind = Kind::SmallTimeAdaptive;
    int k = 0; // term count; meaningful for the fixed kinds only

    static TimescaleChoice large(int k) {
        return {Kind::LargeTime, k};
    }
    static TimescaleChoice small_fixed(int k) {
        return {Kind::SmallTimeFixed, k};
    }
    static TimescaleChoice small_adaptive() {
        return {Kind::SmallTimeAdaptive, 0};
    }
};

namespace detail {

// Ceiling clamped to [1, huge]; guards against non-finite candidates produced
// by extreme tolerances so the cast below is always defined.
inline int ceil_to_k(double x) {
    constexpr double k_max = 2147000000.0;
    if (!(x < k_max)) return 2147000000;
    if (!(x > 1.0)) return 1;
    return static_cast<int>(std::ceil(x));
}

} // namespace detail

// Large-time term count:
//   k = ceil(max{ sqrt(-2 log(pi t eps') / (pi^2 t)), 1/(pi sqrt(t)) }).
// When log(pi t eps') >= 0 the error bound is trivially met and only the
// second candidate applies.
inline int k_large_nav_log(double t_hat, double log_eps_prime) {
    const double pi = std::numbers::pi;
    const double log_arg = std::log(pi * t_hat) + log_eps_prime;
    const double c2 = 1.0 / (pi * std::sqrt(t_hat));
    double val = c2;
    if (log_arg < 0.0) {
        const double c1 = std::sqrt(-2.0 * log_arg / (pi * pi * t_hat));
        if (c1 > val) val = c1;
    }
    return detail::ceil_to_k(val);
}

inline int k_large_nav(double t_hat, double eps_prime) {
    return k_large_nav_log(t_hat, std::log(eps_prime));
}

// Small-time term count (two-sided bound):
//   k = ceil(max{ 2 + sqrt(-2 t log(2 eps' sqrt(2 pi t))), 1 + sqrt(t) }),
// falling back to 1 + sqrt(t) when the inner log is non-negative.
inline int k_small_nav_log(double t_hat, double log_eps_prime) {
    const double inner_log = std::numbers::ln2 +
                             0.5 * std::log(2.0 * std::numbers::pi * t_hat) +
                             log_eps_prime;
    double val = 1.0 + std::sqrt(t_hat);
    if (inner_log < 0.0) {
        const double c1 = 2.0 + std::sqrt(-2.0 * t_hat * inner_log);
        if (c1 > val) val = c1;
    }
    return detail::ceil_to_k(val);
}

inline int k_small_nav(double t_hat, double eps_prime) {
    return k_small_nav_log(t_hat, std::log(eps_prime));
}

// Small-time term count from the paired-terms bound, always odd:
//   k = 1 + 2 ceil(max{ (sqrt(2t) - w)/2,
//                       (sqrt(-t (u - sqrt(-2u - 2))) - w)/2 }),
//   u = min{-1, log(2 pi t^2 eps'^2)},
// with the inner ceiling floored at 0 so k >= 1.
inline int k_small_gon_log(double t_hat, double w, double log_eps_prime) {
    const double u =
        std::min(-1.0, std::log(2.0 * std::numbers::pi) +
                           2.0 * std::log(t_hat) + 2.0 * log_eps_prime);
    const double c1 = 0.5 * (std::sqrt(2.0 * t_hat) - w);
    const double c2 =
        0.5 * (std::sqrt(-t_hat * (u - std::sqrt(-2.0 * u - 2.0))) - w);
    const double hi = std::max(c1, c2);
    constexpr double pairs_max = 1073000000.0;
    double n = std::ceil(hi);
    if (!(n < pairs_max)) n = pairs_max;
    if (!(n > 0.0)) n = 0.0;
    return 1 + 2 * static_cast<int>(n);
}

inline int k_small_gon(double t_hat, double w, double eps_prime) {
    return k_small_gon_log(t_hat, w, std::log(eps_prime));
}

// Combined-time rules: precalculate both k's and use whichever timescale
// needs fewer terms. Both formulas interpret eps_prime on the same
// (normalized-density) scale, so the comparison is like for like. Ties
// resolve to the small timescale, which avoids the sine evaluation.
inline TimescaleChoice choose_combined_nav_log(double t_hat,
                                               double log_eps_prime) {
    const int kl = k_large_nav_log(t_hat, log_eps_prime);
    const int ks = k_small_nav_log(t_hat, log_eps_prime);
    return kl < ks ? TimescaleChoice::large(kl)
                   : TimescaleChoice::small_fixed(ks);
}

inline TimescaleChoice choose_combined_nav(double t_hat, double eps_prime) {
    return choose_combined_nav_log(t_hat, std::log(eps_prime));
}

inline TimescaleChoice choose_combined_gon_log(double t_hat, double w,
                                               double log_eps_prime) {
    const int kl = k_large_nav_log(t_hat, log_eps_prime);
    const int ks = k_small_gon_log(t_hat, w, log_eps_prime);
    return kl < ks ? TimescaleChoice::large(kl)
                   : TimescaleChoice::small_fixed(ks);
}

inline TimescaleChoice choose_combined_gon(double t_hat, double w,
                                           double eps_prime) {
    return choose_combined_gon_log(t_hat, w, std::log(eps_prime));
}

// Heuristic rule for the adaptive small-time summation, which has no
// precalculated k to compare: use the large-time approximation only when it
// is exceptionally cheap (k_large <= delta), otherwise sum adaptively.
inline TimescaleChoice choose_swse_combined_log(double t_hat,
                                                double log_eps_prime_large,
                                                int delta) {
    const int kl = k_large_nav_log(t_hat, log_eps_prime_large);
    return kl <= delta ? TimescaleChoice::large(kl)
                       : TimescaleChoice::small_adaptive();
}

inline TimescaleChoice choose_swse_combined(double t_hat, double eps_prime,
                                            int delta) {
    return choose_swse_combined_log(t_hat, std::log(eps_prime), delta);
}

} // namespace wfpt
