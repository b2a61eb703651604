#pragma once

// Shared helpers for the unit suite: ulp distances, seeded draw helpers, and
// brute-force reference sums kept independent of the library's summation
// code paths.

#include <cmath>
#include <cstdint>
#include <cstring>
#include <random>

namespace testsupport {

// Distance in units of the last place of b (0 for bitwise-equal values).
inline double ulp_diff(double a, double b) {
    if (a == b) return 0.0;
    if (!std::isfinite(a) || !std::isfinite(b))
        return std::numeric_limits<double>::infinity();
    const double u = std::nextafter(std::fabs(b), HUGE_VAL) - std::fabs(b);
    return std::fabs(a - b) / u;
}

inline bool same_bits(double a, double b) {
    std::uint64_t x, y;
    std::memcpy(&x, &a, 8);
    std::memcpy(&y, &b, 8);
    return x == y;
}

struct Draw {
    explicit Draw(std::uint64_t seed) : rng(seed) {}
    double uniform(double lo, double hi) {
        return std::uniform_real_distribution<double>(lo, hi)(rng);
    }
    double log_uniform(double lo, double hi) {
        return std::exp(uniform(std::log(lo), std::log(hi)));
    }
    int integer(int lo, int hi) {
        return std::uniform_int_distribution<int>(lo, hi)(rng);
    }
    std::mt19937_64 rng;
};

// Full small-time sum by brute force in long double, iterated over the
// symmetric window in ascending index order (a different order and precision
// than any library path), with Neumaier compensation.
inline double brute_small_sum(double t_hat, double w, long half_window) {
    long double s = 0.0L, c = 0.0L;
    const long double inv2t = 0.5L / static_cast<long double>(t_hat);
    for (long j = -half_window; j <= half_window; ++j) {
        const long double x =
            static_cast<long double>(w) + 2.0L * static_cast<long double>(j);
        const long double term = x * std::exp(-x * x * inv2t);
        const long double t = s + term;
        if (std::fabs(s) >= std::fabs(term))
            c += (s - t) + term;
        else
            c += (term - t) + s;
        s = t;
    }
    return static_cast<double>(s + c);
}

inline double brute_large_sum(double t_hat, double w, long k) {
    long double s = 0.0L, c = 0.0L;
    const long double h =
        0.5L * static_cast<long double>(t_hat) * 9.869604401089358618834491L;
    const long double wpi =
        static_cast<long double>(w) * 3.141592653589793238462643L;
    for (long j = 1; j <= k; ++j) {
        const long double lj = static_cast<long double>(j);
        const long double term = lj * std::sin(lj * wpi) * std::exp(-lj * lj * h);
        const long double t = s + term;
        if (std::fabs(s) >= std::fabs(term))
            c += (s - t) + term;
        else
            c += (term - t) + s;
        s = t;
    }
    return static_cast<double>(s + c);
}

} // namespace testsupport
