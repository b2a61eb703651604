#pragma once

// Domain types for the diffusion decision model (DDM) and the input
// normalization applied before any density evaluation: parameter
// validation, sigma^2 scaling, the upper/lower boundary flip, the
// non-decision-time shift, and the effective response time t/a^2.

#include <cmath>
#include <stdexcept>
#include <string>

namespace wfpt {

enum class Choice { Lower, Upper };

// The six model parameters. All evaluation assumes sigma2 == 1; inputs with
// sigma2 != 1 are rescaled by normalize() before use.
struct DdmParams {
    double v = 0.0;      // drift rate
    double eta = 0.0;    // inter-trial drift SD, >= 0
    double a = 1.0;      // threshold separation, > 0
    double w = 0.5;      // relative start point, in (0,1)
    double t0 = 0.0;     // non-decision time [s], >= 0
    double sigma2 = 1.0; // diffusion coefficient, > 0
};

// A single (choice, response time) data point.
struct Observation {
    Choice choice = Choice::Lower;
    double rt = 0.0; // seconds, > 0
};

class DomainError : public std::invalid_argument {
public:
    DomainError(std::string field, const std::string& what)
        : std::invalid_argument(what), field_(std::move(field)) {}
    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

// Throws DomainError naming the offending field. The open-interval bounds
// (a > 0, 0 < w < 1) matter in practice: optimizers probe a = 0 and w = 1.
inline void validate(const DdmParams& p) {
    if (!std::isfinite(p.v)) throw DomainError("v", "v must be finite");
    if (!std::isfinite(p.eta) || p.eta < 0.0)
        throw DomainError("eta", "eta must be finite and >= 0");
    if (!std::isfinite(p.a) || p.a <= 0.0)
        throw DomainError("a", "a must be finite and > 0");
    if (!std::isfinite(p.w) || p.w <= 0.0 || p.w >= 1.0)
        throw DomainError("w", "w must lie strictly inside (0,1)");
    if (!std::isfinite(p.t0) || p.t0 < 0.0)
        throw DomainError("t0", "t0 must be finite and >= 0");
    if (!std::isfinite(p.sigma2) || p.sigma2 <= 0.0)
        throw DomainError("sigma2", "sigma2 must be finite and > 0");
}

inline void validate(const Observation& o) {
    if (!std::isfinite(o.rt) || o.rt <= 0.0)
        throw DomainError("rt", "rt must be finite and > 0");
}

// Rescales v, eta, a by 1/sigma and fixes sigma2 = 1; densities are invariant
// under this scaling. Inputs already at sigma2 == 1 are returned unchanged.
inline DdmParams normalize(const DdmParams& p) {
    validate(p);
    if (p.sigma2 == 1.0) return p;
    const double sigma = std::sqrt(p.sigma2);
    DdmParams q = p;
    q.v = p.v / sigma;
    q.eta = p.eta / sigma;
    q.a = p.a / sigma;
    q.sigma2 = 1.0;
    return q;
}

// Maps an upper-boundary evaluation onto the lower-boundary density:
// f_upper(t | v, eta, a, w) == f_lower(t | -v, eta, a, 1-w).
// Involution on (v, w); identity for Choice::Lower.
inline DdmParams flip_for_boundary(const DdmParams& p, Choice choice) {
    if (choice == Choice::Lower) return p;
    DdmParams q = p;
    q.v = -p.v;
    q.w = 1.0 - p.w;
    return q;
}

// Result of preparing one observation for evaluation. params is
// sigma-normalized and boundary-flipped; t_hat = t_shifted / a^2 is the
// effective response time that governs both series. t_shifted <= 0 marks a
// degenerate input (density 0), not an error.
struct NormalizedInput {
    double t_shifted = 0.0;
    double t_hat = 0.0;
    DdmParams params;
    bool degenerate = false;
};

inline NormalizedInput prepare(const DdmParams& p, const Observation& obs) {
    validate(obs);
    NormalizedInput in;
    in.params = flip_for_boundary(normalize(p), obs.choice);
    in.t_shifted = obs.rt - in.params.t0;
    in.t_hat = in.t_shifted / (in.params.a * in.params.a);
    in.degenerate = !(in.t_shifted > 0.0);
    return in;
}

} // namespace wfpt
