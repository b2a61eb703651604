#pragma once

// Truncated evaluation of the two infinite series inside the DDM density.
//
// Large-time series:   sum_{j=1..k} j sin(j w pi) exp(-j^2 pi^2 t_hat / 2)
// Small-time series:   S14 over the symmetric window j in {-floor(k/2) ..
//                      floor(k/2)} with terms (w+2j) exp(-(w+2j)^2 / (2
//                      t_hat)), or the equivalent one-sided alternating S17
//                      ordering with k leading terms.
//
// Both small-time styles walk the same term sequence: the S14 window is
// iterated in the interleaved order {0, -1, 1, -2, 2, ...}, which is exactly
// the S17 ordering under the index bijection (even S17 index 2n <-> S14 index
// +n, odd S17 index 2m-1 <-> S14 index -m). The interleave lets the adaptive
// stop-when-small-enough (SWSE) rule share one stopping guard across styles
// and makes matched partial sums of the two styles bit-identical.
//
// The fast path accumulates plain left-to-right in double; guaranteed-error
// use relies on the truncation rules, not on the accumulation order.

#include <cmath>
#include <numbers>

namespace wfpt {

enum class SumStyle { S14, S17 };

// Stopping certificate of one adaptive small-time summation.
struct SwseResult {
    double sum = 0.0;
    long terms_used = 0;
    double last_omitted_abs = 0.0; // |first excluded term|
    bool converged = false;        // true iff stopped by |term| < eps_prime
};

namespace detail {

// m-th term of the small-time series in the shared interleaved/S17 ordering.
// Same value either way; styles differ only in how the term is expressed.
inline double small_term_s14(long m, double w, double inv_2th) {
    const long j = (m & 1L) ? -((m + 1) / 2) : m / 2;
    const double x = w + 2.0 * static_cast<double>(j);
    return x * std::exp(-x * x * inv_2th);
}

inline double small_term_s17(long m, double w, double inv_2th) {
    const double r = (m & 1L) ? static_cast<double>(m + 1) - w
                              : static_cast<double>(m) + w;
    const double b = r * std::exp(-r * r * inv_2th);
    return (m & 1L) ? -b : b;
}

inline double small_term(SumStyle style, long m, double w, double inv_2th) {
    return style == SumStyle::S14 ? small_term_s14(m, w, inv_2th)
                                  : small_term_s17(m, w, inv_2th);
}

// Incremental generator of the interleaved small-time terms. Consecutive
// squared magnitudes differ by arithmetic progressions, so each Gaussian
// factor follows from the previous one with two multiplications:
//   E_{m+1} = E_m * step_even^(m+1)   (m even, step_even = e^(-2(1-w)/t_hat))
//   E_{m+1} = E_m * step_odd^(m+1)    (m odd,  step_odd  = e^(-2 w / t_hat))
// A direct exponential every 16 terms caps the multiplicative rounding
// drift at a few ulps. Both summation styles walk this same sequence, so
// they stay bit-identical over matched windows.
class SmallTermSequence {
public:
    SmallTermSequence(double t_hat, double w)
        : inv_2th_(0.5 / t_hat), w_(w) {
        const double step_e = std::exp(-2.0 * (1.0 - w) / t_hat);
        const double step_o = std::exp(-2.0 * w / t_hat);
        step_e2_ = step_e * step_e;
        step_o2_ = step_o * step_o;
        pow_e_ = step_e;           // first even->odd hop uses step_e^1
        pow_o_ = step_o * step_o;  // first odd->even hop uses step_o^2
        gauss_ = std::exp(-w * w * inv_2th_);
        r_ = w;
    }

    double term() const {
        const double b = r_ * gauss_;
        return neg_ ? -b : b;
    }
    double magnitude() const { return r_ * gauss_; }
    // true once the magnitude r has reached the peak of r e^(-r^2/(2 t_hat))
    bool past_peak(double t_hat) const { return r_ * r_ >= t_hat; }

    void advance() {
        if ((m_ & 1L) == 0) {
            gauss_ *= pow_e_;
            pow_e_ *= step_e2_;
            r_ = static_cast<double>(m_ + 2) - w_;
            neg_ = true;
        } else {
            gauss_ *= pow_o_;
            pow_o_ *= step_o2_;
            r_ = static_cast<double>(m_ + 1) + w_;
            neg_ = false;
        }
        ++m_;
        if ((m_ & 15L) == 0) gauss_ = std::exp(-r_ * r_ * inv_2th_);
    }

private:
    double inv_2th_, w_;
    double step_e2_, step_o2_;
    double pow_e_, pow_o_;
    double gauss_, r_;
    long m_ = 0;
    bool neg_ = false;
};

} // namespace detail

// k-term partial sum of the large-time series.
inline double sum_large(double t_hat, double w, int k) {
    const double c = 0.5 * std::numbers::pi * std::numbers::pi * t_hat;
    const double wpi = w * std::numbers::pi;
    double s = 0.0;
    for (int j = 1; j <= k; ++j) {
        const double dj = static_cast<double>(j);
        s += dj * std::sin(dj * wpi) * std::exp(-dj * dj * c);
    }
    return s;
}

namespace detail {

inline double sum_small_n(double t_hat, double w, long n_terms) {
    SmallTermSequence seq(t_hat, w);
    double s = 0.0;
    for (long m = 0; m < n_terms; ++m, seq.advance()) s += seq.term();
    return s;
}

} // namespace detail

// Small-time partial sum, S14 window {-floor(k/2) .. floor(k/2)}, iterated
// in the interleaved order.
inline double sum_small_s14(double t_hat, double w, int k) {
    return detail::sum_small_n(t_hat, w, 2L * (k / 2) + 1);
}

// Small-time partial sum, first k terms of the S17 ordering.
inline double sum_small_s17(double t_hat, double w, int k) {
    return detail::sum_small_n(t_hat, w, k);
}

namespace detail {

// First ordinal position m whose term magnitude r_m = |w + 2j| has passed the
// peak of g(r) = r exp(-r^2 / (2 t_hat)) at r = sqrt(t_hat). The interleaved
// r sequence (w, 2-w, 2+w, 4-w, 4+w, ...) is strictly increasing and g is
// strictly decreasing beyond its peak, so every term from this position on is
// strictly smaller in absolute value than its predecessor. Floored at 1 so at
// least one term is always summed.
//
// Taking the first r >= sqrt(t_hat) on each parity separately matters: the
// negative-index terms peak up to one index later than the positive ones
// (r = 2n - w vs 2n + w), so a single cutoff in index space would certify
// stopping while the off-parity side is still growing.
inline long first_decreasing_ordinal(double t_hat, double w) {
    const double c = std::sqrt(t_hat);
    // even ordinals: r = m + w;  odd ordinals: r = m + 1 - w
    double m_even = 2.0 * std::ceil(0.5 * (c - w));
    if (m_even < 0.0) m_even = 0.0;
    double m_odd = 2.0 * std::ceil(0.5 * (c + w - 1.0) - 0.5) + 1.0;
    if (m_odd < 1.0) m_odd = 1.0;
    const double m = std::min(m_even, m_odd);
    return m > 1.0 ? static_cast<long>(m) : 1L;
}

} // namespace detail

// Smallest index (in the style's own indexing) past which the small-time
// terms decrease monotonically in absolute value. The alternating-series
// error bound is valid only for the tail beyond this point. S14 indices count
// window offsets (index n covers interleave positions up to 2n), S17 indices
// are ordinal positions.
inline int j_threshold(SumStyle style, double t_hat, double w) {
    const long m = detail::first_decreasing_ordinal(t_hat, w);
    // S14 window index n certifies stopping from interleave position 2n + 1,
    // so round up to keep 2*j + 1 >= m.
    const long j = style == SumStyle::S14 ? m / 2 : m - 1;
    return j > 0 ? static_cast<int>(j) : 0;
}

// Adaptive small-time summation: adds terms in the shared ordering and stops
// at the first term past the monotone threshold whose absolute value is below
// eps_prime. That term is excluded; by the alternating series test the
// truncation error is at most its absolute value. Stopping is never allowed
// before the threshold, where terms may still be growing. Exhausting
// max_terms reports converged = false instead of aborting.
inline SwseResult sum_swse(SumStyle style, double t_hat, double w,
                           double eps_prime, long max_terms) {
    // Stopping is allowed once the term magnitude r has passed the peak of
    // r exp(-r^2 / (2 t_hat)), i.e. r^2 >= t_hat: from there the tail
    // alternates and strictly decreases, which is the same guard j_threshold
    // expresses in index form. At least one term is always emitted.
    (void)style; // both styles walk the identical term sequence
    SwseResult r;
    detail::SmallTermSequence seq(t_hat, w);
    for (long m = 0; m < max_terms; ++m, seq.advance()) {
        const double b = seq.term();
        if (m >= 1 && seq.past_peak(t_hat) && std::fabs(b) < eps_prime) {
            r.terms_used = m;
            r.last_omitted_abs = std::fabs(b);
            r.converged = true;
            return r;
        }
        r.sum += b;
    }
    r.terms_used = max_terms;
    r.last_omitted_abs = seq.magnitude();
    r.converged = false;
    return r;
}

} // namespace wfpt
