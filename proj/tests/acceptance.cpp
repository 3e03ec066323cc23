/*
   Copyright 2026 The degsde Authors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
*/

// Prints one PASS/FAIL line per acceptance criterion; exits nonzero if any fails.

#include "degsde/experiments.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

using namespace degsde;

namespace {

struct Run {
    ExperimentConfig config;
    ExperimentResult result;
    double seconds = 0.0;
};

std::vector<Run> g_runs;

Run run(const std::string& experiment, ParamMap params) {
    ExperimentConfig c;
    c.experiment = experiment;
    c.params = std::move(params);
    const auto t0 = std::chrono::steady_clock::now();
    Run r{c, run_experiment(c), 0.0};
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    for (const auto& row : r.result.rows)
        std::cerr << "  " << summary_line(row) << "\n";
    g_runs.push_back(r);
    return r;
}

// Tested rows whose params contain `needle`; empty selection counts as failure.
bool rows_pass(const ExperimentResult& r, const std::string& needle = "") {
    std::size_t tested = 0;
    for (const auto& row : r.rows) {
        if (row.verdict == "info" || row.params.find(needle) == std::string::npos) continue;
        ++tested;
        if (row.verdict != "pass") return false;
    }
    return tested > 0;
}

int g_failed = 0;

void report(int id, bool ok, const std::string& what) {
    std::printf("criterion %d: %s  %s\n", id, ok ? "PASS" : "FAIL", what.c_str());
    std::fflush(stdout);
    if (!ok) ++g_failed;
}

std::string fmt_seconds(double s) {
    std::ostringstream o;
    o.precision(3);
    o << s << " s";
    return o.str();
}

} // namespace

int main() {
    {
        bool ok = true;
        double worst = 0.0;
        for (const char* a : {"0.1", "0.25", "0.4"}) {
            for (const char* x : {"0.1", "0.25", "0.5"}) {
                const auto r = run("oracle-hitting", {{"alpha", a}, {"x", x}, {"n", "20000"}});
                ok = ok && rows_pass(r.result) && r.seconds <= 300.0;
                worst = std::max(worst, r.seconds);
            }
        }
        report(1, ok, "P(T1 < T0) = x within 3 stderr on the 3x3 grid, N = 2e4; slowest combination " + fmt_seconds(worst));
    }
    report(2, rows_pass(run("conditioned-additive", {}).result),
           "Q1 additive functional within 5% of -2 log x; rejection cross-check agrees");
    const auto green = run("oracle-green", {{"quad_tol", "1e-6"}, {"scale_tol", "1e-8"}, {"n_exit", "10000"}});
    report(3, rows_pass(green.result, "stat=green-additive"), "Green quadrature equals -2 log x to 1e-6");
    report(4, rows_pass(green.result, "stat=exit-mc") && rows_pass(green.result, "stat=exit-scaling") &&
                  rows_pass(green.result, "stat=exit-quadrature"),
           "mean exit time 8/3 by Monte Carlo; s^(2-2a) scaling to 1e-8");
    report(5, rows_pass(run("q0-hitprob", {{"n", "10000"}}).result), "Q0 P(T_0.5 < T_0 | 0.1) = 1/9 within 3 stderr");
    report(6, rows_pass(run("r-identity", {}).result), "R identity residual < 1e-2 and decreasing under dt -> dt/4");
    report(7, rows_pass(run("envelope", {{"n", "1000"}}).result),
           "no ordering or envelope violations over 1000 runs; sum series decreasing");
    {
        const auto top = run("chasing", {{"x0", "2^-3,2^-5,2^-7"}, {"y0_ratio", "-1"}, {"min_branch", "2000"}});
        const auto bottom = run("chasing", {{"x0", "0.1,0.05,0.025"}, {"y0_ratio", "0"}, {"min_branch", "2000"}});
        report(8, rows_pass(top.result, "trend:P(") && rows_pass(top.result, "min-branch-count") &&
                      rows_pass(bottom.result, "trend:E[-Y_T") && rows_pass(bottom.result, "min-branch-count"),
               "chasing trends with >= 2000 samples per branch");
    }
    report(9, rows_pass(run("uniqueness-refine", {}).result),
           "two-scheme divergence strictly decreasing and < 1e-2 at 2^-16; excursion max Z within the finest entry");
    report(10, rows_pass(run("bessel-correspond", {{"n", "10000"}}).result, "stat=P(T_level<T1)"),
           "Bessel-3 P(T_0.25 < T_1 | 0.5) = 1/3 within 3 stderr");
    {
        const bool sim = rows_pass(run("reflected-sim", {{"n", "20000"}}).result);
        const bool scale = rows_pass(run("scale-fn", {{"b0", "0"}}).result) &&
                           rows_pass(run("scale-fn", {{"b0", "1"}, {"x", "1"}, {"check_tol", "1e-6"}}).result);
        const bool unique = rows_pass(run("reflected-unique", {{"dts", "2^-8,2^-10,2^-12,2^-14"}}).result);
        const bool fold = rows_pass(run("fold", {}).result);
        report(11, sim && scale && unique && fold,
               std::string("reflected suite: skorokhod+mean ") + (sim ? "ok" : "bad") + ", scale " + (scale ? "ok" : "bad") +
                   ", max-coupling " + (unique ? "ok" : "bad") + ", fold " + (fold ? "ok" : "bad"));
    }
    {
        bool same = true;
        const std::size_t first = g_runs.size();
        for (std::size_t i = 0; i < first; ++i) {
            const Run& r = g_runs[i];
            same = same && to_csv(run_experiment(r.config)) == to_csv(r.result);
        }
#ifdef DEGSDE_CLI_PATH
        namespace fs = std::filesystem;
        const fs::path dir = fs::temp_directory_path() / "degsde_acceptance";
        fs::create_directories(dir);
        auto cli_csv = [&](const std::string& name) {
            const fs::path out = dir / name;
            const std::string cmd = std::string(DEGSDE_CLI_PATH) + " q0-hitprob --n 2000 --seed 17 --out " + out.string() + " > /dev/null";
            if (std::system(cmd.c_str()) != 0) return std::string("error");
            std::ifstream in(out);
            std::stringstream ss;
            ss << in.rdbuf();
            return ss.str();
        };
        const std::string a = cli_csv("a.csv");
        same = same && a != "error" && a == cli_csv("b.csv");
        fs::remove_all(dir);
#endif
        report(12, same, "every criterion's CSV is bit-identical on a rerun with the same seed; CLI reruns agree");
    }
    return g_failed == 0 ? 0 : 1;
}
