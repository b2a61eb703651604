#pragma once

// Assembles prefactors and truncated sums into the full two-boundary DDM
// first-passage density. The guarantee for every method is
// |value - true density| < opts.eps whenever the result reports convergence.
//
// Evaluation pipeline: sigma-normalize, flip upper-boundary inputs onto the
// lower-boundary formula, shift by t0, form t_hat = t/a^2, rescale the
// tolerance in log space onto the scale each truncation rule expects, run the
// method's rule, and multiply the sum back by the prefactor.
// eta > 0 selects the variable-drift prefactors; eta == 0 the constant-drift
// ones. Inputs with t <= t0 yield density 0 (log scale: -infinity).

#include <cmath>
#include <limits>
#include <vector>

#include "wfpt/method.hpp"
#include "wfpt/params.hpp"
#include "wfpt/sum_kernels.hpp"
#include "wfpt/truncation.hpp"

namespace wfpt {

enum class Timescale { Large, Small };
enum class DriftKind { Const, Var };
enum class OutputScale { Linear, Log };

struct EvalOptions {
    double eps = 1e-6;          // absolute tolerance on the density value
    int delta = 1;              // combined-SWSE switching threshold
    long max_terms = 1000000;   // term cap; exceeding it flags non-convergence
    OutputScale scale = OutputScale::Linear;
};

struct DensityResult {
    double value = 0.0;   // density, or log-density when scale == Log
    long terms_used = 0;  // series terms actually evaluated (0 if degenerate)
    Timescale timescale_used = Timescale::Small;
    bool converged = true;
};

inline void validate(const EvalOptions& o) {
    if (!std::isfinite(o.eps) || o.eps <= 0.0)
        throw DomainError("eps", "eps must be finite and > 0");
    if (o.delta < 0) throw DomainError("delta", "delta must be >= 0");
    if (o.max_terms < 1) throw DomainError("max_terms", "max_terms must be >= 1");
}

// Natural log of the multiplicative term outside the sum, with sigma^2 = 1
// and t already shifted by t0:
//   large/const: pi/a^2 exp(-vaw - v^2 t / 2)
//   small/const: a / sqrt(2 pi t^3) exp(-vaw - v^2 t / 2)
//   large/var:   pi/(a^2 sqrt(1 + eta^2 t)) exp((eta^2 a^2 w^2 - 2vaw - v^2 t)
//                                                / (2 (1 + eta^2 t)))
//   small/var:   a / sqrt(2 pi t^3 (1 + eta^2 t)) exp(same)
// Computed fully in log space so the result stays finite even where the
// linear prefactor would overflow or underflow. eta == 0 always takes the
// constant-drift branch, so the variable-drift forms reduce to it bitwise.
inline double log_prefactor(Timescale ts, DriftKind dk, double v, double eta,
                            double a, double w, double t_shifted) {
    static const double log_pi = std::log(std::numbers::pi);
    static const double log_2pi = std::log(2.0 * std::numbers::pi);
    const double base = ts == Timescale::Large
                            ? log_pi - 2.0 * std::log(a)
                            : std::log(a) - 0.5 * log_2pi -
                                  1.5 * std::log(t_shifted);
    if (dk == DriftKind::Const || eta == 0.0)
        return base + (-v * a * w - 0.5 * v * v * t_shifted);
    const double eta2t = eta * eta * t_shifted;
    const double expo = (eta * eta * a * a * w * w - 2.0 * v * a * w -
                         v * v * t_shifted) /
                        (2.0 * (1.0 + eta2t));
    return base - 0.5 * std::log1p(eta2t) + expo;
}

// Log of the multiplier M with M * f(t|v,a,w) = f(t|v,eta,a,w), valid for
// both timescales. Computed as the difference of the two log prefactors so
// that M * density(eta = 0) reproduces the variable-drift density to within a
// few ulps. Exactly 0 when eta == 0.
inline double log_m_conversion(double v, double eta, double a, double w,
                               double t_shifted) {
    if (eta == 0.0) return 0.0;
    return log_prefactor(Timescale::Small, DriftKind::Var, v, eta, a, w,
                         t_shifted) -
           log_prefactor(Timescale::Small, DriftKind::Const, v, eta, a, w,
                         t_shifted);
}

inline double m_conversion(double v, double eta, double a, double w,
                           double t_shifted) {
    if (eta == 0.0) return 1.0;
    const double lv = log_prefactor(Timescale::Small, DriftKind::Var, v, eta,
                                    a, w, t_shifted);
    const double lc = log_prefactor(Timescale::Small, DriftKind::Const, v, eta,
                                    a, w, t_shifted);
    // TwoSum residual of the subtraction; folding it back in keeps
    // M * f_const within a few ulps of f_var even for large exponents.
    const double s = lv - lc;
    const double z = s - lv;
    const double e = (lv - (s - z)) - (lc + z);
    return std::exp(s) * (1.0 + e);
}

namespace detail {

// Shared evaluation core; value assembly differs between the linear and log
// entry points.
struct EvalCore {
    double log_pref = 0.0;
    double sum = 0.0;
    long terms_used = 0;
    Timescale timescale_used = Timescale::Small;
    bool converged = true;
    bool degenerate = false;
};

inline long small_fixed_terms(SumStyle style, int k) {
    return style == SumStyle::S14 ? 2L * (k / 2) + 1 : k;
}

inline EvalCore evaluate(const MethodSpec& method, const DdmParams& params,
                         const Observation& obs, const EvalOptions& opts) {
    if (!method.valid())
        throw DomainError("method", "invalid timescale/style combination");
    validate(opts);
    validate(params);

    EvalCore out;
    const NormalizedInput in = prepare(params, obs);
    if (in.degenerate) {
        out.degenerate = true;
        return out;
    }

    const double t = in.t_shifted;
    const double th = in.t_hat;
    const double v = in.params.v;
    const double eta = in.params.eta;
    const double a = in.params.a;
    const double w = in.params.w;
    const DriftKind dk = eta > 0.0 ? DriftKind::Var : DriftKind::Const;
    const double log_eps = std::log(opts.eps);
    static const double log_pi = std::log(std::numbers::pi);

    const double lp_small =
        log_prefactor(Timescale::Small, dk, v, eta, a, w, t);
    const double lp_large =
        log_prefactor(Timescale::Large, dk, v, eta, a, w, t);
    // The k-precalculation formulas bound the truncation error of the
    // normalized density (a = 1, sigma = 1, zero drift, at t_hat). The full
    // density is C times that, with log C = lp_large - log(pi) =
    // lp_small + 0.5 log(2 pi t_hat^3), so the formulas receive eps / C.
    const double lep_norm = log_eps - (lp_large - log_pi);
    // The adaptive rule instead compares raw term magnitudes, so its
    // tolerance lives on the bare-sum scale: eps over the full prefactor.
    const double lep_sum = log_eps - lp_small;

    const SumStyle style = method.style.value_or(SumStyle::S17);

    TimescaleChoice choice = TimescaleChoice::small_adaptive();
    switch (method.timescale) {
    case MethodTimescale::Large:
        choice = TimescaleChoice::large(k_large_nav_log(th, lep_norm));
        break;
    case MethodTimescale::SmallNav:
        choice = TimescaleChoice::small_fixed(k_small_nav_log(th, lep_norm));
        break;
    case MethodTimescale::SmallGon:
        choice = TimescaleChoice::small_fixed(k_small_gon_log(th, w, lep_norm));
        break;
    case MethodTimescale::SmallSwse:
        choice = TimescaleChoice::small_adaptive();
        break;
    case MethodTimescale::CombinedNav:
        choice = choose_combined_nav_log(th, lep_norm);
        break;
    case MethodTimescale::CombinedGon:
        choice = choose_combined_gon_log(th, w, lep_norm);
        break;
    case MethodTimescale::CombinedSwse:
        choice = choose_swse_combined_log(th, lep_norm, opts.delta);
        break;
    }

    switch (choice.kind) {
    case TimescaleChoice::Kind::LargeTime: {
        int k = choice.k;
        if (k > opts.max_terms) {
            k = static_cast<int>(opts.max_terms);
            out.converged = false;
        }
        out.timescale_used = Timescale::Large;
        out.log_pref = lp_large;
        out.sum = sum_large(th, w, k);
        out.terms_used = k;
        break;
    }
    case TimescaleChoice::Kind::SmallTimeFixed: {
        int k = choice.k;
        if (small_fixed_terms(style, k) > opts.max_terms) {
            k = static_cast<int>(opts.max_terms);
            out.converged = false;
        }
        out.timescale_used = Timescale::Small;
        out.log_pref = lp_small;
        out.sum = style == SumStyle::S14 ? sum_small_s14(th, w, k)
                                         : sum_small_s17(th, w, k);
        out.terms_used = small_fixed_terms(style, k);
        break;
    }
    case TimescaleChoice::Kind::SmallTimeAdaptive: {
        // The adaptive rule compares term magnitudes against eps_prime on the
        // linear scale; floor an underflowed rescale at the smallest positive
        // double so the comparison stays meaningful.
        double eps_prime = std::exp(lep_sum);
        if (eps_prime < std::numeric_limits<double>::min())
            eps_prime = std::numeric_limits<double>::min();
        const SwseResult r = sum_swse(style, th, w, eps_prime, opts.max_terms);
        out.timescale_used = Timescale::Small;
        out.log_pref = lp_small;
        out.sum = r.sum;
        out.terms_used = r.terms_used;
        out.converged = r.converged;
        break;
    }
    }
    return out;
}

} // namespace detail

// Density of one observation. Truncated sums can come out slightly negative
// where the true density is near zero; the linear value clamps at 0 and the
// log value maps to -infinity.
inline DensityResult density(const MethodSpec& method, const DdmParams& params,
                             const Observation& obs, const EvalOptions& opts) {
    const detail::EvalCore core = detail::evaluate(method, params, obs, opts);
    DensityResult r;
    r.terms_used = core.terms_used;
    r.timescale_used = core.timescale_used;
    r.converged = core.converged;
    if (core.degenerate) {
        r.value = opts.scale == OutputScale::Log
                      ? -std::numeric_limits<double>::infinity()
                      : 0.0;
        return r;
    }
    if (opts.scale == OutputScale::Log)
        r.value = core.sum > 0.0
                      ? core.log_pref + std::log(core.sum)
                      : -std::numeric_limits<double>::infinity();
    else
        r.value = core.sum > 0.0 ? std::exp(core.log_pref) * core.sum : 0.0;
    return r;
}

// Batch evaluation is a pure iteration convenience: element i is bitwise
// identical to the corresponding single-observation call, whatever else is in
// the batch. Truncation is per observation, never the max over the batch.
inline std::vector<DensityResult> density_batch(const MethodSpec& method,
                                                const DdmParams& params,
                                                const std::vector<Observation>& obs,
                                                const EvalOptions& opts) {
    std::vector<DensityResult> out;
    out.reserve(obs.size());
    for (const Observation& o : obs)
        out.push_back(density(method, params, o, opts));
    return out;
}

inline double log_density(const MethodSpec& method, const DdmParams& params,
                          const Observation& obs, const EvalOptions& opts) {
    const detail::EvalCore core = detail::evaluate(method, params, obs, opts);
    if (core.degenerate || !(core.sum > 0.0))
        return -std::numeric_limits<double>::infinity();
    return core.log_pref + std::log(core.sum);
}

} // namespace wfpt
