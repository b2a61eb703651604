// Command-line interface: density evaluation, maximum-likelihood fitting,
// data simulation, benchmarking, and oracle-based validation over files.
//
// Exit codes: 0 success, 2 input/parse/domain error, 3 validation failure.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "wfpt/density.hpp"
#include "wfpt/fit.hpp"
#include "wfpt/io.hpp"
#include "wfpt/method.hpp"
#include "wfpt/oracle.hpp"
#include "wfpt/validation.hpp"

namespace {

constexpr int exit_ok = 0;
constexpr int exit_input_error = 2;
constexpr int exit_validation_failure = 3;

std::string method_list() {
    std::string s;
    for (const wfpt::MethodSpec& m : wfpt::all_methods()) {
        if (!s.empty()) s += ", ";
        s += wfpt::method_name(m);
    }
    return s;
}

wfpt::MethodSpec parse_method_or_throw(const std::string& name) {
    const auto m = wfpt::parse_method(name);
    if (!m)
        throw wfpt::ParseError("unknown method '" + name +
                               "'; valid methods: " + method_list());
    return *m;
}

std::ostream& open_output(std::ofstream& file, const std::string& path) {
    if (path.empty() || path == "-") return std::cout;
    file.open(path);
    if (!file) throw wfpt::ParseError("cannot open output file " + path);
    return file;
}

std::ifstream open_input(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw wfpt::ParseError("cannot open input file " + path);
    return in;
}

wfpt::ParamGrid resolve_grid(const std::string& spec) {
    if (spec == "table1") return wfpt::table1_grid();
    if (spec == "table2") return wfpt::table2_grid();
    std::ifstream in = open_input(spec);
    return wfpt::read_grid_json(in);
}

// Shared numeric flags mirroring EvalOptions plus the model parameters.
struct CommonFlags {
    std::string method = wfpt::method_name(wfpt::default_method());
    double eps = 1e-6;
    int delta = 1;
    long max_terms = 1000000;
    bool log_scale = false;

    wfpt::EvalOptions options() const {
        wfpt::EvalOptions o;
        o.eps = eps;
        o.delta = delta;
        o.max_terms = max_terms;
        o.scale = log_scale ? wfpt::OutputScale::Log : wfpt::OutputScale::Linear;
        return o;
    }
};

void add_eval_option_flags(CLI::App* cmd, CommonFlags& f) {
    cmd->add_option("--method", f.method,
                    "approximation method (see --help-methods)");
    cmd->add_option("--eps", f.eps, "absolute error tolerance on the density");
    cmd->add_option("--delta", f.delta,
                    "combined-swse switching threshold (k_large <= delta)");
    cmd->add_option("--max-terms", f.max_terms, "series term cap");
    cmd->add_flag("--log", f.log_scale, "report densities on the log scale");
}

struct ParamFlags {
    double v = 0.0, eta = 0.0, a = 1.0, w = 0.5, t0 = 0.0, sigma2 = 1.0;
    double z = -1.0; // absolute start point; converted via w = z/a when set

    wfpt::DdmParams params() const {
        wfpt::DdmParams p{v, eta, a, w, t0, sigma2};
        if (z >= 0.0) p.w = z / a;
        return p;
    }
};

void add_param_flags(CLI::App* cmd, ParamFlags& f) {
    cmd->add_option("--v", f.v, "drift rate");
    cmd->add_option("--eta", f.eta, "inter-trial drift SD");
    cmd->add_option("--a", f.a, "threshold separation");
    cmd->add_option("--w", f.w, "relative start point in (0,1)");
    cmd->add_option("--z", f.z, "absolute start point (sets w = z/a)");
    cmd->add_option("--t0", f.t0, "non-decision time [s]");
    cmd->add_option("--sigma2", f.sigma2, "diffusion coefficient");
}

int cmd_eval(const CommonFlags& common, const ParamFlags& pf,
             const std::string& input, const std::string& output,
             const std::string& choice_str, double rt) {
    const wfpt::MethodSpec method = parse_method_or_throw(common.method);
    const wfpt::EvalOptions opts = common.options();
    const wfpt::DdmParams params = pf.params();

    std::vector<wfpt::Observation> obs;
    if (!input.empty()) {
        std::ifstream in = open_input(input);
        obs = wfpt::read_observations_csv(in);
    } else {
        if (rt <= 0.0)
            throw wfpt::ParseError("provide --input or --rt/--choice");
        obs.push_back({wfpt::parse_choice(choice_str, 0), rt});
    }

    std::ofstream file;
    std::ostream& os = open_output(file, output);
    os << "choice,rt,density,log_density,terms_used,timescale_used,converged\n";
    for (const wfpt::Observation& o : obs) {
        const wfpt::DensityResult r = wfpt::density(method, params, o, opts);
        const double ld = wfpt::log_density(method, params, o, opts);
        os << wfpt::to_string(o.choice) << ',' << wfpt::io_detail::fmt17(o.rt)
           << ',' << wfpt::io_detail::fmt17(r.value) << ','
           << wfpt::io_detail::fmt17(ld) << ',' << r.terms_used << ','
           << (r.timescale_used == wfpt::Timescale::Large ? "large" : "small")
           << ',' << (r.converged ? 1 : 0) << '\n';
    }
    return exit_ok;
}

int cmd_simulate(double a, double v_c1, double v_c2, double w, double t0,
                 double eta, int n_per_class, std::uint64_t seed, double dt,
                 const std::string& participant, const std::string& output) {
    const wfpt::FitEstimates truth{a, v_c1, v_c2, w, t0, eta};
    int timeouts = 0;
    const wfpt::Dataset data =
        wfpt::simulate(truth, n_per_class, seed, dt, &timeouts, participant);
    std::ofstream file;
    std::ostream& os = open_output(file, output);
    wfpt::write_dataset_csv(os, data);
    if (timeouts > 0)
        std::cerr << "note: " << timeouts
                  << " trial(s) timed out and were resampled\n";
    return exit_ok;
}

int cmd_fit(const CommonFlags& common, const std::string& input,
            const std::string& output, const std::string& starts_path) {
    wfpt::FitConfig cfg;
    cfg.method = parse_method_or_throw(common.method);
    cfg.opts = common.options();
    cfg.opts.scale = wfpt::OutputScale::Linear; // fitting works in log space anyway
    if (!starts_path.empty()) {
        std::ifstream in = open_input(starts_path);
        cfg.starts = wfpt::read_fit_starts_json(in);
    }

    std::ifstream in = open_input(input);
    const wfpt::Dataset all = wfpt::read_dataset_csv(in);
    if (all.empty()) throw wfpt::ParseError("dataset has no rows");

    // Group rows by participant, preserving first-appearance order.
    std::vector<std::string> ids;
    for (const wfpt::DatasetRow& r : all)
        if (std::find(ids.begin(), ids.end(), r.participant) == ids.end())
            ids.push_back(r.participant);

    nlohmann::json records = nlohmann::json::array();
    for (const std::string& id : ids) {
        wfpt::Dataset sub;
        for (const wfpt::DatasetRow& r : all)
            if (r.participant == id) sub.push_back(r);
        const std::vector<wfpt::FitResult> results = wfpt::fit(sub, cfg);
        for (const auto& rec : wfpt::fit_results_json(id, results))
            records.push_back(rec);
        const wfpt::FitResult* best = wfpt::best_result(results);
        if (best)
            std::cerr << id << ": best objective "
                      << wfpt::io_detail::fmt17(best->objective) << " (start "
                      << best->start_index << ")\n";
        else
            std::cerr << id << ": all starts failed\n";
    }
    std::ofstream file;
    std::ostream& os = open_output(file, output);
    os << records.dump(2) << '\n';
    return exit_ok;
}

int cmd_bench(const CommonFlags& common, const std::string& mode,
              const std::string& grid_spec,
              std::vector<std::string> method_names, bool method_flag_set,
              int reps, const std::vector<std::string>& inputs,
              const std::string& output) {
    const wfpt::EvalOptions opts = common.options();
    if (method_names.empty() && method_flag_set)
        method_names.push_back(common.method);
    std::vector<wfpt::MethodSpec> methods;
    if (method_names.empty())
        methods.assign(wfpt::all_methods().begin(), wfpt::all_methods().end());
    else
        for (const std::string& n : method_names)
            methods.push_back(parse_method_or_throw(n));

    std::ofstream file;
    std::ostream& os = open_output(file, output);
    nlohmann::json summary;

    if (mode == "vectorized" || mode == "individual" || mode == "delta") {
        const wfpt::ParamGrid grid = resolve_grid(grid_spec);
        std::vector<wfpt::BenchRecord> records;
        if (mode == "vectorized") {
            if (reps <= 0) reps = 1000;
            records = wfpt::sweep_vectorized(grid, methods, opts, reps);
        } else if (mode == "individual") {
            if (reps <= 0) reps = 200;
            records = wfpt::sweep_individual(grid, methods, opts, reps);
        } else {
            if (reps <= 0) reps = 1000;
            records = wfpt::delta_experiment(grid, {0, 1, 2, 3, 4, 5, 6, 7},
                                             {wfpt::SumStyle::S14,
                                              wfpt::SumStyle::S17},
                                             opts, reps);
        }
        wfpt::write_bench_csv(os, records);
        summary = wfpt::bench_summary(records);
    } else if (mode == "fit") {
        if (inputs.empty())
            throw wfpt::ParseError("bench --mode fit needs --input datasets");
        if (reps <= 0) reps = 5;
        std::vector<wfpt::Dataset> datasets;
        for (const std::string& path : inputs) {
            std::ifstream in = open_input(path);
            datasets.push_back(wfpt::read_dataset_csv(in));
        }
        wfpt::FitConfig cfg;
        cfg.opts = opts;
        const auto records = wfpt::bench_fit(datasets, methods, cfg, reps);
        wfpt::write_fit_bench_csv(os, records);
        for (const wfpt::FitBenchRecord& r : records)
            summary[r.method][r.dataset_id] = {
                {"median_ns", r.median_ns},
                {"n_failures", r.n_failures},
                {"n_objective_gaps", r.n_objective_gaps}};
    } else {
        throw wfpt::ParseError(
            "unknown bench mode '" + mode +
            "' (expected vectorized, individual, delta, or fit)");
    }

    if (!output.empty() && output != "-") {
        std::ofstream sf(output + ".summary.json");
        sf << summary.dump(2) << '\n';
    }
    return exit_ok;
}

int cmd_validate(const CommonFlags& common, const std::string& grid_spec,
                 const std::string& check_method) {
    bool ok = true;
    std::vector<std::pair<std::string, wfpt::ParamGrid>> grids;
    if (grid_spec == "both") {
        grids.emplace_back("table1", wfpt::table1_grid());
        grids.emplace_back("table2", wfpt::table2_grid());
    } else {
        grids.emplace_back(grid_spec, resolve_grid(grid_spec));
    }

    for (const auto& [name, grid] : grids) {
        const wfpt::GridCheckResult r = wfpt::oracle_selfcheck_grid(grid);
        std::cout << "oracle self-consistency on " << name << ": " << r.points
                  << " points, " << r.failures << " disagreement(s)\n";
        if (r.failures > 0) {
            std::cout << "  first: " << r.worst << '\n';
            ok = false;
        }
        if (!check_method.empty()) {
            const wfpt::MethodSpec m = parse_method_or_throw(check_method);
            const wfpt::GridCheckResult mc = wfpt::method_vs_oracle_grid(
                grid, m, common.options());
            std::cout << "  " << check_method << " vs oracle: max |err| = "
                      << mc.max_abs_err << " over " << mc.points
                      << " points, " << mc.failures << " above eps\n";
            if (mc.failures > 0) {
                std::cout << "  worst: " << mc.worst << '\n';
                ok = false;
            }
        }
    }

    const wfpt::MethodSpec method = parse_method_or_throw(common.method);
    int norm_failures = 0;
    for (const wfpt::DdmParams& p : wfpt::normalization_check_sets()) {
        const wfpt::NormalizationCheck c =
            wfpt::check_method_normalization(p, method, common.options());
        if (!c.ok) {
            ++norm_failures;
            std::printf("normalization miss: a=%g v=%g w=%g eta=%g -> %.8f\n",
                        p.a, p.v, p.w, p.eta, c.mass);
        }
    }
    std::cout << "normalization: " << wfpt::normalization_check_sets().size()
              << " parameter sets, " << norm_failures << " miss(es)\n";
    if (norm_failures > 0) ok = false;

    std::cout << (ok ? "validate: OK\n" : "validate: FAILED\n");
    return ok ? exit_ok : exit_validation_failure;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Wiener first-passage-time densities of the diffusion "
                 "decision model: evaluation, fitting, simulation, "
                 "benchmarking, validation"};
    app.require_subcommand(1);

    CommonFlags common;
    ParamFlags pf;

    // eval
    auto* eval = app.add_subcommand("eval", "evaluate densities");
    add_eval_option_flags(eval, common);
    add_param_flags(eval, pf);
    std::string eval_input, eval_output, eval_choice = "lower";
    double eval_rt = -1.0;
    eval->add_option("--input", eval_input, "observations CSV (choice,rt)");
    eval->add_option("--output", eval_output, "output CSV path (default stdout)");
    eval->add_option("--choice", eval_choice, "inline observation: lower|upper");
    eval->add_option("--rt", eval_rt, "inline observation: response time [s]");

    // simulate
    auto* sim = app.add_subcommand("simulate", "simulate a dataset");
    double sim_a = 1.0, sim_vc1 = 0.0, sim_vc2 = 0.0, sim_w = 0.5,
           sim_t0 = 0.0, sim_eta = 0.0, sim_dt = 1e-4;
    int sim_n = 1000;
    std::uint64_t sim_seed = 1;
    std::string sim_participant = "p1", sim_output;
    sim->add_option("--a", sim_a, "threshold separation");
    sim->add_option("--v-c1", sim_vc1, "drift rate, stimulus class c1");
    sim->add_option("--v-c2", sim_vc2, "drift rate, stimulus class c2");
    sim->add_option("--w", sim_w, "relative start point");
    sim->add_option("--t0", sim_t0, "non-decision time [s]");
    sim->add_option("--eta", sim_eta, "inter-trial drift SD");
    sim->add_option("--n-per-class", sim_n, "trials per stimulus class");
    sim->add_option("--seed", sim_seed, "RNG seed");
    sim->add_option("--dt", sim_dt, "Euler step [s], <= 1e-3");
    sim->add_option("--participant", sim_participant, "participant label");
    sim->add_option("--output", sim_output, "output CSV path (default stdout)");

    // fit
    auto* fit = app.add_subcommand("fit", "maximum-likelihood fitting");
    add_eval_option_flags(fit, common);
    std::string fit_input, fit_output, fit_starts;
    fit->add_option("--input", fit_input,
                    "dataset CSV (participant,stimulus_class,choice,rt)")
        ->required();
    fit->add_option("--output", fit_output, "output JSON path (default stdout)");
    fit->add_option("--starts", fit_starts,
                    "starts JSON (default: built-in 11 starts)");

    // bench
    auto* bench = app.add_subcommand("bench", "benchmark harness");
    add_eval_option_flags(bench, common);
    std::string bench_mode = "vectorized", bench_grid = "table2", bench_output;
    std::vector<std::string> bench_methods, bench_inputs;
    int bench_reps = 0;
    bench->add_option("--mode", bench_mode,
                      "vectorized|individual|delta|fit");
    bench->add_option("--grid", bench_grid, "table1|table2|<grid.json>");
    bench->add_option("--reps", bench_reps, "timed repetitions per record");
    bench->add_option("--bench-method", bench_methods,
                      "methods to benchmark, repeatable (default: all 13, or "
                      "--method when given)");
    bench->add_option("--input", bench_inputs,
                      "dataset CSV(s) for --mode fit");
    bench->add_option("--output", bench_output,
                      "output CSV path (default stdout); a .summary.json is "
                      "written next to it");

    // validate
    auto* val = app.add_subcommand("validate",
                                   "oracle self-consistency and normalization");
    add_eval_option_flags(val, common);
    std::string val_grid = "table2", val_check_method;
    val->add_option("--grid", val_grid, "table1|table2|both|<grid.json>");
    val->add_option("--check-method", val_check_method,
                    "also check this method against the oracle over the grid");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? exit_ok : exit_input_error;
    }

    try {
        if (eval->parsed())
            return cmd_eval(common, pf, eval_input, eval_output, eval_choice,
                            eval_rt);
        if (sim->parsed())
            return cmd_simulate(sim_a, sim_vc1, sim_vc2, sim_w, sim_t0,
                                sim_eta, sim_n, sim_seed, sim_dt,
                                sim_participant, sim_output);
        if (fit->parsed())
            return cmd_fit(common, fit_input, fit_output, fit_starts);
        if (bench->parsed())
            return cmd_bench(common, bench_mode, bench_grid, bench_methods,
                             bench->get_option("--method")->count() > 0,
                             bench_reps, bench_inputs, bench_output);
        if (val->parsed()) return cmd_validate(common, val_grid, val_check_method);
    } catch (const wfpt::ParseError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_input_error;
    } catch (const wfpt::DomainError& e) {
        std::cerr << "error: invalid " << e.field() << ": " << e.what() << '\n';
        return exit_input_error;
    } catch (const wfpt::OracleDisagreement& e) {
        std::cerr << "validation failure: " << e.what() << '\n';
        return exit_validation_failure;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_input_error;
    }
    return exit_ok;
}
