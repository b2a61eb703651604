#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include "wfpt/io.hpp"

namespace {

struct CliRun {
    int exit_code;
    std::string out;
    std::string err;
};

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

CliRun run_cli(const std::string& args) {
    const std::string out_path = "cli_test_stdout.txt";
    const std::string err_path = "cli_test_stderr.txt";
    const std::string cmd = std::string(WFPT_CLI_PATH) + " " + args + " >" +
                            out_path + " 2>" + err_path;
    const int status = std::system(cmd.c_str());
    CliRun r;
    r.exit_code = WEXITSTATUS(status);
    r.out = slurp(out_path);
    r.err = slurp(err_path);
    std::remove(out_path.c_str());
    std::remove(err_path.c_str());
    return r;
}

// density from the second CSV line of an eval run
double eval_density(const std::string& args) {
    const CliRun r = run_cli("eval " + args);
    REQUIRE(r.exit_code == 0);
    std::stringstream ss(r.out);
    std::string header, row;
    std::getline(ss, header);
    REQUIRE(header ==
            "choice,rt,density,log_density,terms_used,timescale_used,converged");
    REQUIRE(std::getline(ss, row));
    std::stringstream rs(row);
    std::string field;
    std::getline(rs, field, ','); // choice
    std::getline(rs, field, ','); // rt
    std::getline(rs, field, ','); // density
    return std::stod(field);
}

} // namespace

TEST_CASE("eval computes the canonical density inline") {
    const double d =
        eval_density("--v 0 --a 1 --w 0.5 --t0 0 --rt 1 --choice lower");
    CHECK(std::fabs(d - 0.022593967916138819) < 1e-6);
}

TEST_CASE("eval maps t <= t0 to zero density") {
    const double d =
        eval_density("--v 0 --a 1 --w 0.5 --t0 0.3 --rt 0.2 --choice lower");
    CHECK(d == 0.0);
}

TEST_CASE("eval accepts the absolute start point via --z") {
    const double via_w =
        eval_density("--v 1 --a 2 --w 0.25 --t0 0 --rt 1 --choice lower");
    const double via_z =
        eval_density("--v 1 --a 2 --z 0.5 --t0 0 --rt 1 --choice lower");
    CHECK(via_w == via_z);
}

TEST_CASE("unknown methods exit 2 and list the valid names") {
    const CliRun r =
        run_cli("eval --method bogus --v 0 --a 1 --w 0.5 --rt 1 --choice lower");
    CHECK(r.exit_code == 2);
    CHECK(r.err.find("combined-swse-17") != std::string::npos);
    CHECK(r.err.find("large-nav") != std::string::npos);
}

TEST_CASE("domain errors exit 2 and name the field") {
    const CliRun r = run_cli("eval --v 0 --a 0 --w 0.5 --rt 1 --choice lower");
    CHECK(r.exit_code == 2);
    CHECK(r.err.find("a") != std::string::npos);
}

TEST_CASE("simulate is byte-identical for a fixed seed") {
    const std::string f1 = "cli_sim_1.csv", f2 = "cli_sim_2.csv";
    const std::string args =
        "simulate --seed 7 --a 1 --v-c1 1 --v-c2 -0.5 --w 0.5 --t0 0.3 "
        "--eta 0.5 --n-per-class 200 --dt 0.001 --output ";
    REQUIRE(run_cli(args + f1).exit_code == 0);
    REQUIRE(run_cli(args + f2).exit_code == 0);
    const std::string a = slurp(f1), b = slurp(f2);
    CHECK(!a.empty());
    CHECK(a == b);
    std::remove(f2.c_str());

    SECTION("fit consumes the simulated dataset") {
        const CliRun r = run_cli("fit --input " + f1 + " --output cli_fit.json");
        REQUIRE(r.exit_code == 0);
        std::ifstream in("cli_fit.json");
        nlohmann::json j;
        in >> j;
        REQUIRE(j.is_array());
        CHECK(j.size() == 11); // one record per start
        CHECK(j[0]["participant"] == "p1");
        std::remove("cli_fit.json");
    }
    std::remove(f1.c_str());
}

TEST_CASE("eval reads observation files and writes output files") {
    {
        std::ofstream f("cli_obs.csv");
        f << "choice,rt\nlower,1\nupper,1\nlower,0.25\n";
    }
    const CliRun r = run_cli(
        "eval --v 0 --a 1 --w 0.5 --input cli_obs.csv --output cli_eval.csv");
    REQUIRE(r.exit_code == 0);
    std::ifstream in("cli_eval.csv");
    std::string line;
    int rows = 0;
    std::getline(in, line); // header
    double first = -1, second = -2;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string field;
        std::getline(ss, field, ',');
        std::getline(ss, field, ',');
        std::getline(ss, field, ',');
        if (rows == 0) first = std::stod(field);
        if (rows == 1) second = std::stod(field);
        ++rows;
    }
    CHECK(rows == 3);
    CHECK(first == second); // v=0, w=0.5 symmetry across boundaries
    std::remove("cli_obs.csv");
    std::remove("cli_eval.csv");
}

TEST_CASE("bench writes the documented CSV plus a summary") {
    {
        std::ofstream g("cli_grid.json");
        g << R"({"t":[0.5,1.0],"a":[1.0],"v":[0.0],"w":[0.5],"eta":[0.0],"t0":0.0001})";
    }
    const CliRun r = run_cli(
        "bench --mode vectorized --grid cli_grid.json --reps 3 "
        "--bench-method combined-swse-17 --bench-method large-nav "
        "--output cli_bench.csv");
    REQUIRE(r.exit_code == 0);
    std::ifstream in("cli_bench.csv");
    std::string header;
    std::getline(in, header);
    CHECK(header ==
          "method,style,delta,t,a,v,w,eta,t_hat,median_ns,p10_ns,p90_ns,"
          "min_ns,max_ns,reps,terms_used,converged");
    int rows = 0;
    std::string line;
    while (std::getline(in, line))
        if (!line.empty()) ++rows;
    CHECK(rows == 2); // 1 non-t grid point x 2 methods
    std::ifstream sf("cli_bench.csv.summary.json");
    CHECK(sf.good());
    std::remove("cli_grid.json");
    std::remove("cli_bench.csv");
    std::remove("cli_bench.csv.summary.json");
}

TEST_CASE("validate passes on a small grid") {
    {
        std::ofstream g("cli_vgrid.json");
        g << R"({"t":[0.5,2.0],"a":[1.0,2.0],"v":[0.0,2.0],"w":[0.5],"eta":[0.0,1.0],"t0":0.0001})";
    }
    const CliRun r = run_cli("validate --grid cli_vgrid.json");
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("validate: OK") != std::string::npos);
    std::remove("cli_vgrid.json");
}
