#pragma once

// File formats: dataset and observation CSV, the fit-starts and grid JSON
// config files, fit-result JSON, and the benchmark CSV/summary outputs.
// Numbers are serialized with 17 significant digits so 64-bit values
// round-trip exactly.

#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "wfpt/bench.hpp"
#include "wfpt/fit.hpp"

namespace wfpt {

class ParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace io_detail {

inline std::string fmt17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) out.push_back(field);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

inline double parse_double(const std::string& s, int line_no,
                           const char* what) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ParseError("line " + std::to_string(line_no) + ": bad " + what +
                         " value '" + s + "'");
    }
}

inline std::string strip_cr(std::string s) {
    if (!s.empty() && s.back() == '\r') s.pop_back();
    return s;
}

} // namespace io_detail

inline const char* to_string(Choice c) {
    return c == Choice::Lower ? "lower" : "upper";
}

inline const char* to_string(StimulusClass s) {
    return s == StimulusClass::C1 ? "c1" : "c2";
}

inline Choice parse_choice(const std::string& s, int line_no) {
    if (s == "lower") return Choice::Lower;
    if (s == "upper") return Choice::Upper;
    throw ParseError("line " + std::to_string(line_no) +
                     ": choice must be 'lower' or 'upper', got '" + s + "'");
}

inline StimulusClass parse_stimulus_class(const std::string& s, int line_no) {
    if (s == "c1") return StimulusClass::C1;
    if (s == "c2") return StimulusClass::C2;
    throw ParseError("line " + std::to_string(line_no) +
                     ": stimulus_class must be 'c1' or 'c2', got '" + s + "'");
}

// Dataset CSV: header `participant,stimulus_class,choice,rt`.
inline Dataset read_dataset_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line))
        throw ParseError("empty dataset file");
    if (io_detail::strip_cr(line) != "participant,stimulus_class,choice,rt")
        throw ParseError("expected header participant,stimulus_class,choice,rt");
    Dataset data;
    int line_no = 1;
    while (std::getline(is, line)) {
        ++line_no;
        line = io_detail::strip_cr(line);
        if (line.empty()) continue;
        const auto f = io_detail::split_csv_line(line);
        if (f.size() != 4)
            throw ParseError("line " + std::to_string(line_no) +
                             ": expected 4 fields, got " +
                             std::to_string(f.size()));
        DatasetRow row;
        row.participant = f[0];
        row.stimulus_class = parse_stimulus_class(f[1], line_no);
        row.choice = parse_choice(f[2], line_no);
        row.rt = io_detail::parse_double(f[3], line_no, "rt");
        if (!(row.rt > 0.0))
            throw ParseError("line " + std::to_string(line_no) +
                             ": rt must be > 0");
        data.push_back(row);
    }
    return data;
}

inline void write_dataset_csv(std::ostream& os, const Dataset& data) {
    os << "participant,stimulus_class,choice,rt\n";
    for (const DatasetRow& r : data)
        os << r.participant << ',' << to_string(r.stimulus_class) << ','
           << to_string(r.choice) << ',' << io_detail::fmt17(r.rt) << '\n';
}

// Observation CSV: header `choice,rt`.
inline std::vector<Observation> read_observations_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) throw ParseError("empty observations file");
    if (io_detail::strip_cr(line) != "choice,rt")
        throw ParseError("expected header choice,rt");
    std::vector<Observation> obs;
    int line_no = 1;
    while (std::getline(is, line)) {
        ++line_no;
        line = io_detail::strip_cr(line);
        if (line.empty()) continue;
        const auto f = io_detail::split_csv_line(line);
        if (f.size() != 2)
            throw ParseError("line " + std::to_string(line_no) +
                             ": expected 2 fields, got " +
                             std::to_string(f.size()));
        Observation o;
        o.choice = parse_choice(f[0], line_no);
        o.rt = io_detail::parse_double(f[1], line_no, "rt");
        obs.push_back(o);
    }
    return obs;
}

// Fit starts JSON: {"starts": [{"a":..., "v_c1":..., "v_c2":..., "w":...,
// "t0_frac":..., "eta":...}, ...]}.
inline std::vector<FitStart> read_fit_starts_json(std::istream& is) {
    nlohmann::json j;
    try {
        is >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("bad starts JSON: ") + e.what());
    }
    if (!j.contains("starts") || !j["starts"].is_array())
        throw ParseError("starts JSON must contain an array 'starts'");
    std::vector<FitStart> starts;
    for (const auto& s : j["starts"]) {
        try {
            starts.push_back({s.at("a").get<double>(),
                              s.at("v_c1").get<double>(),
                              s.at("v_c2").get<double>(),
                              s.at("w").get<double>(),
                              s.at("t0_frac").get<double>(),
                              s.at("eta").get<double>()});
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(std::string("bad start entry: ") + e.what());
        }
    }
    if (starts.empty()) throw ParseError("starts JSON contains no starts");
    return starts;
}

// Grid JSON for `--grid file`: {"t": [...], "a": [...], "v": [...],
// "w": [...], "eta": [...], "t0": ...}.
inline ParamGrid read_grid_json(std::istream& is) {
    nlohmann::json j;
    try {
        is >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("bad grid JSON: ") + e.what());
    }
    ParamGrid g;
    try {
        g.t = j.at("t").get<std::vector<double>>();
        g.a = j.at("a").get<std::vector<double>>();
        g.v = j.at("v").get<std::vector<double>>();
        g.w = j.at("w").get<std::vector<double>>();
        g.eta = j.at("eta").get<std::vector<double>>();
        g.t0 = j.at("t0").get<double>();
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("bad grid JSON: ") + e.what());
    }
    if (g.t.empty() || g.a.empty() || g.v.empty() || g.w.empty() ||
        g.eta.empty())
        throw ParseError("grid JSON arrays must be non-empty");
    return g;
}

// One JSON record per (participant, start).
inline nlohmann::json fit_results_json(const std::string& participant,
                                       const std::vector<FitResult>& results) {
    nlohmann::json arr = nlohmann::json::array();
    for (const FitResult& r : results) {
        arr.push_back({
            {"participant", participant},
            {"start_index", r.start_index},
            {"estimates",
             {{"a", r.estimates.a},
              {"v_class1", r.estimates.v_c1},
              {"v_class2", r.estimates.v_c2},
              {"w", r.estimates.w},
              {"t0", r.estimates.t0},
              {"eta", r.estimates.eta}}},
            {"objective", r.objective},
            {"convergence",
             r.convergence == FitStatus::Success ? "success" : "failure"},
            {"n_obj_evals", r.n_obj_evals},
        });
    }
    return arr;
}

// Benchmark CSV, one row per record:
// method,style,delta,t,a,v,w,eta,t_hat,median_ns,p10_ns,p90_ns,min_ns,max_ns,
// reps,terms_used,converged
inline void write_bench_csv(std::ostream& os,
                            const std::vector<BenchRecord>& records) {
    os << "method,style,delta,t,a,v,w,eta,t_hat,median_ns,p10_ns,p90_ns,"
          "min_ns,max_ns,reps,terms_used,converged\n";
    for (const BenchRecord& r : records) {
        os << r.method << ',' << r.style << ',' << r.delta << ','
           << io_detail::fmt17(r.t) << ',' << io_detail::fmt17(r.a) << ','
           << io_detail::fmt17(r.v) << ',' << io_detail::fmt17(r.w) << ','
           << io_detail::fmt17(r.eta) << ',' << io_detail::fmt17(r.t_hat)
           << ',' << io_detail::fmt17(r.median_ns) << ','
           << io_detail::fmt17(r.p10_ns) << ',' << io_detail::fmt17(r.p90_ns)
           << ',' << io_detail::fmt17(r.min_ns) << ','
           << io_detail::fmt17(r.max_ns) << ',' << r.reps << ','
           << r.terms_used << ',' << (r.converged ? 1 : 0) << '\n';
    }
}

inline void write_fit_bench_csv(std::ostream& os,
                                const std::vector<FitBenchRecord>& records) {
    os << "method,dataset,median_ns,p10_ns,p90_ns,min_ns,max_ns,reps,"
          "n_failures,n_objective_gaps,best_objective\n";
    for (const FitBenchRecord& r : records) {
        os << r.method << ',' << r.dataset_id << ','
           << io_detail::fmt17(r.median_ns) << ','
           << io_detail::fmt17(r.p10_ns) << ',' << io_detail::fmt17(r.p90_ns)
           << ',' << io_detail::fmt17(r.min_ns) << ','
           << io_detail::fmt17(r.max_ns) << ',' << r.reps << ','
           << r.n_failures << ',' << r.n_objective_gaps << ','
           << io_detail::fmt17(r.best_objective) << '\n';
    }
}

// Per-method aggregates over the per-record medians.
inline nlohmann::json bench_summary(const std::vector<BenchRecord>& records) {
    struct Agg {
        std::vector<double> medians;
        long terms = 0;
        int non_converged = 0;
    };
    std::vector<std::pair<std::string, Agg>> groups;
    for (const BenchRecord& r : records) {
        const std::string key =
            r.method + "/delta=" + std::to_string(r.delta);
        auto it = std::find_if(groups.begin(), groups.end(),
                               [&](const auto& g) { return g.first == key; });
        if (it == groups.end()) {
            groups.push_back({key, {}});
            it = groups.end() - 1;
        }
        it->second.medians.push_back(r.median_ns);
        it->second.terms += r.terms_used;
        if (!r.converged) ++it->second.non_converged;
    }
    nlohmann::json out = nlohmann::json::object();
    for (auto& [key, agg] : groups) {
        std::sort(agg.medians.begin(), agg.medians.end());
        out[key] = {
            {"records", agg.medians.size()},
            {"median_of_median_ns",
             bench_detail::order_stat(agg.medians, 0.5)},
            {"p10_of_median_ns", bench_detail::order_stat(agg.medians, 0.1)},
            {"p90_of_median_ns", bench_detail::order_stat(agg.medians, 0.9)},
            {"min_ns", agg.medians.front()},
            {"max_ns", agg.medians.back()},
            {"total_terms", agg.terms},
            {"non_converged_records", agg.non_converged},
        };
    }
    return out;
}

} // namespace wfpt
