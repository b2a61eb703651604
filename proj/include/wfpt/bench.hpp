#pragma once

// Micro-benchmark harness: grid sweeps with vectorized or individual response
// time input, the delta-tuning experiment for the combined adaptive method,
// and timing of full multi-start fits. Timing is single-threaded on a
// monotonic clock; at each grid point the repetitions of all candidate
// methods are interleaved in a seeded random order to spread environment
// noise evenly. Summary statistics are exact order statistics of the
// recorded samples. Absolute times are machine-relative; consumers should
// compare ratios and orderings only.

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "wfpt/density.hpp"
#include "wfpt/fit.hpp"
#include "wfpt/method.hpp"

namespace wfpt {

struct ParamGrid {
    std::vector<double> t, a, v, w, eta;
    double t0 = 0.0;
};

// Response times 0.001-30 s; the wide sweep used for delta tuning and
// effective-time profiling.
inline ParamGrid table1_grid() {
    return {{0.001, 0.1, 1.0, 2.0, 3.0, 4.0, 5.0, 10.0, 30.0},
            {0.25, 0.5, 1.0, 2.5, 5.0},
            {-5.0, -2.0, 0.0, 2.0, 5.0},
            {0.2, 0.5, 0.8},
            {0.0, 0.5, 1.0, 1.5},
            0.0001};
}

// Response times 0.1-2 s; the practical-range benchmark grid.
inline ParamGrid table2_grid() {
    return {{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0,
             1.1, 1.2, 1.3, 1.4, 1.5, 1.6, 1.7, 1.8, 1.9, 2.0},
            {0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5},
            {-5.0, -2.0, 0.0, 2.0, 5.0},
            {0.3, 0.4, 0.5, 0.6, 0.7},
            {0.0, 1.0, 2.0, 3.5},
            0.0001};
}

struct BenchRecord {
    std::string method;  // method name, e.g. "combined-swse-17"
    std::string style;   // "14", "17", or "" for the styleless large-time
    int delta = 1;
    // Grid coordinates; t and t_hat are NaN for vectorized records, which
    // time a whole response-time vector per call.
    double t = 0.0, a = 0.0, v = 0.0, w = 0.0, eta = 0.0, t_hat = 0.0;
    double median_ns = 0.0;
    double p10_ns = 0.0, p90_ns = 0.0, min_ns = 0.0, max_ns = 0.0;
    int reps = 0;
    long terms_used = 0; // per call: summed over the vector for vectorized
    bool converged = true;
};

namespace bench_detail {

// Keeps timed results observable so the calls cannot be optimized away.
inline volatile double sink = 0.0;

inline double order_stat(const std::vector<double>& sorted, double q) {
    const std::size_t n = sorted.size();
    const std::size_t i =
        static_cast<std::size_t>(q * static_cast<double>(n - 1) + 1e-9);
    return sorted[i];
}

inline void fill_stats(std::vector<double>& samples, BenchRecord& rec) {
    std::sort(samples.begin(), samples.end());
    rec.reps = static_cast<int>(samples.size());
    rec.median_ns = order_stat(samples, 0.5);
    rec.p10_ns = order_stat(samples, 0.1);
    rec.p90_ns = order_stat(samples, 0.9);
    rec.min_ns = samples.front();
    rec.max_ns = samples.back();
}

struct Candidate {
    MethodSpec method;
    EvalOptions opts;
};

inline std::string style_tag(const MethodSpec& m) {
    if (!m.style) return "";
    return *m.style == SumStyle::S14 ? "14" : "17";
}

// Times one call per (candidate, repetition) in interleaved random order and
// returns one record per candidate.
template <typename Call>
std::vector<BenchRecord> time_candidates(const std::vector<Candidate>& cands,
                                         int reps, std::uint64_t seed,
                                         Call&& call) {
    constexpr int warmup = 10;
    for (std::size_t c = 0; c < cands.size(); ++c)
        for (int i = 0; i < warmup; ++i) call(cands[c]);

    std::vector<std::size_t> schedule;
    schedule.reserve(cands.size() * static_cast<std::size_t>(reps));
    for (std::size_t c = 0; c < cands.size(); ++c)
        for (int r = 0; r < reps; ++r) schedule.push_back(c);
    std::mt19937_64 rng(seed);
    std::shuffle(schedule.begin(), schedule.end(), rng);

    std::vector<std::vector<double>> samples(cands.size());
    for (auto& s : samples) s.reserve(static_cast<std::size_t>(reps));
    for (std::size_t c : schedule) {
        const auto t1 = std::chrono::steady_clock::now();
        call(cands[c]);
        const auto t2 = std::chrono::steady_clock::now();
        samples[c].push_back(static_cast<double>(
            std::chrono::duration_cast<std::chrono::nanoseconds>(t2 - t1)
                .count()));
    }

    std::vector<BenchRecord> out(cands.size());
    for (std::size_t c = 0; c < cands.size(); ++c) {
        out[c].method = method_name(cands[c].method);
        out[c].style = style_tag(cands[c].method);
        out[c].delta = cands[c].opts.delta;
        fill_stats(samples[c], out[c]);
    }
    return out;
}

inline std::vector<Candidate> as_candidates(const std::vector<MethodSpec>& ms,
                                            const EvalOptions& opts) {
    std::vector<Candidate> cands;
    cands.reserve(ms.size());
    for (const MethodSpec& m : ms) cands.push_back({m, opts});
    return cands;
}

} // namespace bench_detail

// One timed call passes the full response-time vector; one record per
// (method, non-t grid point).
inline std::vector<BenchRecord> sweep_vectorized(
    const ParamGrid& grid, const std::vector<MethodSpec>& methods,
    const EvalOptions& opts, int reps) {
    std::vector<Observation> obs;
    obs.reserve(grid.t.size());
    for (double t : grid.t) obs.push_back({Choice::Lower, t});

    const auto cands = bench_detail::as_candidates(methods, opts);
    std::vector<BenchRecord> records;
    std::uint64_t point_index = 0;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (double a : grid.a)
        for (double v : grid.v)
            for (double w : grid.w)
                for (double eta : grid.eta) {
                    DdmParams p{v, eta, a, w, grid.t0, 1.0};
                    long terms = 0;
                    bool conv = true;
                    const auto call = [&](const bench_detail::Candidate& c) {
                        terms = 0;
                        conv = true;
                        for (const Observation& o : obs) {
                            const DensityResult r =
                                density(c.method, p, o, c.opts);
                            bench_detail::sink = bench_detail::sink + r.value;
                            terms += r.terms_used;
                            conv = conv && r.converged;
                        }
                    };
                    // terms/conv end up reflecting each candidate's last call;
                    // capture them per candidate via a second untimed pass.
                    auto recs = bench_detail::time_candidates(
                        cands, reps, 0x9e3779b9u + point_index, call);
                    for (std::size_t c = 0; c < cands.size(); ++c) {
                        call(cands[c]);
                        recs[c].t = nan;
                        recs[c].t_hat = nan;
                        recs[c].a = a;
                        recs[c].v = v;
                        recs[c].w = w;
                        recs[c].eta = eta;
                        recs[c].terms_used = terms;
                        recs[c].converged = conv;
                        records.push_back(recs[c]);
                    }
                    ++point_index;
                }
    return records;
}

// One timed call per single response time; records carry t and the effective
// response time t_hat = (t - t0)/a^2.
inline std::vector<BenchRecord> sweep_individual(
    const ParamGrid& grid, const std::vector<MethodSpec>& methods,
    const EvalOptions& opts, int reps) {
    const auto cands = bench_detail::as_candidates(methods, opts);
    std::vector<BenchRecord> records;
    std::uint64_t point_index = 0;
    for (double t : grid.t)
        for (double a : grid.a)
            for (double v : grid.v)
                for (double w : grid.w)
                    for (double eta : grid.eta) {
                        DdmParams p{v, eta, a, w, grid.t0, 1.0};
                        const Observation o{Choice::Lower, t};
                        long terms = 0;
                        bool conv = true;
                        const auto call =
                            [&](const bench_detail::Candidate& c) {
                                const DensityResult r =
                                    density(c.method, p, o, c.opts);
                                bench_detail::sink =
                                    bench_detail::sink + r.value;
                                terms = r.terms_used;
                                conv = r.converged;
                            };
                        auto recs = bench_detail::time_candidates(
                            cands, reps, 0x7f4a7c15u + point_index, call);
                        for (std::size_t c = 0; c < cands.size(); ++c) {
                            call(cands[c]);
                            recs[c].t = t;
                            recs[c].t_hat = (t - grid.t0) / (a * a);
                            recs[c].a = a;
                            recs[c].v = v;
                            recs[c].w = w;
                            recs[c].eta = eta;
                            recs[c].terms_used = terms;
                            recs[c].converged = conv;
                            records.push_back(recs[c]);
                        }
                        ++point_index;
                    }
    return records;
}

// Sweeps the (delta, style) candidates of the combined adaptive method over a
// grid with vectorized input; one record per candidate per non-t grid point.
inline std::vector<BenchRecord> delta_experiment(
    const ParamGrid& grid, const std::vector<int>& deltas,
    const std::vector<SumStyle>& styles, const EvalOptions& opts, int reps) {
    std::vector<Observation> obs;
    obs.reserve(grid.t.size());
    for (double t : grid.t) obs.push_back({Choice::Lower, t});

    std::vector<bench_detail::Candidate> cands;
    for (SumStyle style : styles)
        for (int d : deltas) {
            if (d < 0) throw DomainError("delta", "delta must be >= 0");
            bench_detail::Candidate c{{MethodTimescale::CombinedSwse, style},
                                      opts};
            c.opts.delta = d;
            cands.push_back(c);
        }

    std::vector<BenchRecord> records;
    std::uint64_t point_index = 0;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (double a : grid.a)
        for (double v : grid.v)
            for (double w : grid.w)
                for (double eta : grid.eta) {
                    DdmParams p{v, eta, a, w, grid.t0, 1.0};
                    long terms = 0;
                    bool conv = true;
                    const auto call = [&](const bench_detail::Candidate& c) {
                        terms = 0;
                        conv = true;
                        for (const Observation& o : obs) {
                            const DensityResult r =
                                density(c.method, p, o, c.opts);
                            bench_detail::sink = bench_detail::sink + r.value;
                            terms += r.terms_used;
                            conv = conv && r.converged;
                        }
                    };
                    auto recs = bench_detail::time_candidates(
                        cands, reps, 0x2545f491u + point_index, call);
                    for (std::size_t c = 0; c < cands.size(); ++c) {
                        call(cands[c]);
                        recs[c].t = nan;
                        recs[c].t_hat = nan;
                        recs[c].a = a;
                        recs[c].v = v;
                        recs[c].w = w;
                        recs[c].eta = eta;
                        recs[c].terms_used = terms;
                        recs[c].converged = conv;
                        records.push_back(recs[c]);
                    }
                    ++point_index;
                }
    return records;
}

// Timing and stability of the full multi-start fitting routine.
struct FitBenchRecord {
    std::string method;
    std::string dataset_id;
    double median_ns = 0.0;
    double p10_ns = 0.0, p90_ns = 0.0, min_ns = 0.0, max_ns = 0.0;
    int reps = 0;
    int n_failures = 0;      // starts with convergence == Failure
    int n_objective_gaps = 0; // starts with objective > best + 1e-4
    double best_objective = 0.0;
};

inline std::vector<FitBenchRecord> bench_fit(
    const std::vector<Dataset>& datasets, const std::vector<MethodSpec>& methods,
    const FitConfig& base_cfg, int reps = 5) {
    constexpr double objective_gap = 1e-4;
    std::vector<FitBenchRecord> out;
    for (std::size_t d = 0; d < datasets.size(); ++d) {
        for (const MethodSpec& m : methods) {
            FitConfig cfg = base_cfg;
            cfg.method = m;
            std::vector<FitResult> results;
            std::vector<double> samples;
            samples.reserve(static_cast<std::size_t>(reps));
            for (int r = 0; r < reps; ++r) {
                const auto t1 = std::chrono::steady_clock::now();
                results = fit(datasets[d], cfg);
                const auto t2 = std::chrono::steady_clock::now();
                samples.push_back(static_cast<double>(
                    std::chrono::duration_cast<std::chrono::nanoseconds>(t2 -
                                                                         t1)
                        .count()));
            }
            FitBenchRecord rec;
            rec.method = method_name(m);
            rec.dataset_id = datasets[d].empty()
                                 ? std::to_string(d)
                                 : datasets[d].front().participant;
            std::sort(samples.begin(), samples.end());
            rec.reps = reps;
            rec.median_ns = bench_detail::order_stat(samples, 0.5);
            rec.p10_ns = bench_detail::order_stat(samples, 0.1);
            rec.p90_ns = bench_detail::order_stat(samples, 0.9);
            rec.min_ns = samples.front();
            rec.max_ns = samples.back();

            double best = std::numeric_limits<double>::infinity();
            for (const FitResult& r : results)
                best = std::min(best, r.objective);
            rec.best_objective = best;
            for (const FitResult& r : results) {
                if (r.convergence == FitStatus::Failure) ++rec.n_failures;
                if (!(r.objective <= best + objective_gap))
                    ++rec.n_objective_gaps;
            }
            out.push_back(rec);
        }
    }
    return out;
}

} // namespace wfpt
