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

#include "degsde/error.hpp"
#include "degsde/experiments.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

using namespace degsde;

namespace {

ExperimentConfig config(const std::string& text) {
    std::istringstream in(text);
    return parse_config(in);
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out(1);
    bool quoted = false;
    for (char c : line) {
        if (c == '"') quoted = !quoted;
        else if (c == ',' && !quoted) out.emplace_back();
        else out.back() += c;
    }
    return out;
}

} // namespace

TEST_CASE("registry") {
    const auto& list = list_experiments();
    const std::vector<std::string> expected{
        "oracle-hitting", "oracle-green", "conditioned-additive", "q0-hitprob", "bessel-correspond",
        "chasing", "envelope", "r-identity", "transform-residuals", "uniqueness-refine",
        "excursion-agree", "occupation", "reflected-sim", "reflected-unique", "fold", "scale-fn"};
    REQUIRE(list.size() == expected.size());
    std::set<std::string> names;
    for (const auto& e : list) {
        names.insert(e.name);
        CHECK_FALSE(e.anchor.empty());
        CHECK_FALSE(e.summary.empty());
        for (const auto& p : e.params) CHECK_FALSE(p.default_value.empty());
    }
    for (const auto& n : expected) CHECK(names.count(n) == 1);
    CHECK(&list_experiments() == &list);
    CHECK(find_experiment("fold").name == "fold");
    CHECK_THROWS_AS(find_experiment("nope"), ConfigError);
}

TEST_CASE("config parsing") {
    const auto c = config("# comment\nexperiment = scale-fn\nseed=7\nx = 0.5, 1  # trailing\n\nout=a.csv\n");
    CHECK(c.experiment == "scale-fn");
    CHECK(c.seed == 7);
    CHECK(c.out == "a.csv");
    CHECK(c.params.at("x") == "0.5, 1");
    CHECK_THROWS_AS(config("x 1\n"), ConfigError);
    CHECK_THROWS_AS(config("=1\n"), ConfigError);
    CHECK_THROWS_AS(config("seed=-3\n"), ConfigError);
    CHECK_THROWS_AS(config("x=1\nx=2\n"), ConfigError);
    CHECK_THROWS_AS(config("seed=1\nseed=2\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_file("/nonexistent/file.cfg"), ConfigError);
}

TEST_CASE("parameter validation happens before simulation") {
    auto c = config("experiment=oracle-hitting\nn=abc\n");
    CHECK_THROWS_AS(run_experiment(c), ConfigError);
    c = config("experiment=oracle-hitting\nunknown=1\n");
    CHECK_THROWS_AS(run_experiment(c), ConfigError);
    c = config("experiment=oracle-hitting\nn=-5\n");
    CHECK_THROWS_AS(run_experiment(c), ConfigError);
    c = config("experiment=oracle-hitting\nalpha=0.7\n");
    CHECK_THROWS_AS(run_experiment(c), Error);
    c = config("experiment=missing\n");
    CHECK_THROWS_AS(run_experiment(c), ConfigError);
}

TEST_CASE("numbers are written with 17 significant digits") {
    CHECK(format_number(0.1) == "0.10000000000000001");
    CHECK(format_number(1.0) == "1");
    CHECK(format_number(std::nan("")) == "nan");
    CHECK(std::stod(format_number(1.0 / 3.0)) == 1.0 / 3.0);
}

TEST_CASE("small oracle run") {
    const auto c = config("experiment=oracle-hitting\nalpha=0.25\nx=0.5\nn=400\nseed=3\n");
    const auto r = run_experiment(c);
    REQUIRE(r.rows.size() >= 1);
    const auto& row = r.rows[0];
    CHECK(row.experiment == "oracle-hitting");
    REQUIRE(row.oracle);
    CHECK(*row.oracle == 0.5);
    CHECK(row.n == 400);
    CHECK(row.verdict == "pass");
    CHECK(r.pass());
}

TEST_CASE("CSV layout and determinism") {
    const auto c = config("experiment=scale-fn\n");
    const std::string a = to_csv(run_experiment(c));
    const std::string b = to_csv(run_experiment(c));
    CHECK(a == b);
    std::istringstream in(a);
    std::string line;
    std::getline(in, line);
    CHECK(line == "experiment,params,n,mean,stderr,oracle,z,verdict");
    std::size_t rows = 0;
    while (std::getline(in, line)) {
        const auto f = split_csv_line(line);
        REQUIRE(f.size() == 8);
        CHECK(f[0] == "scale-fn");
        CHECK((f[7] == "pass" || f[7] == "fail" || f[7] == "info"));
        ++rows;
    }
    CHECK(rows >= 1);

    const auto m = config("experiment=oracle-hitting\nalpha=0.1,0.25\nx=0.25\nn=200\nseed=11\n");
    CHECK(to_csv(run_experiment(m)) == to_csv(run_experiment(m)));
}

#ifdef DEGSDE_CLI_PATH
TEST_CASE("command line") {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "degsde_cli_test";
    fs::create_directories(dir);
    const std::string cli = DEGSDE_CLI_PATH;
    auto sh = [](const std::string& cmd) {
        const int rc = std::system(cmd.c_str());
        return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
    };
    auto slurp = [](const fs::path& p) {
        std::ifstream in(p);
        std::stringstream ss;
        ss << in.rdbuf();
        return ss.str();
    };

    CHECK(sh(cli + " list > " + (dir / "list.txt").string()) == 0);
    const std::string listing = slurp(dir / "list.txt");
    for (const auto& e : list_experiments()) {
        CHECK(listing.find(e.name) != std::string::npos);
        CHECK(listing.find(e.anchor) != std::string::npos);
    }

    {
        std::ofstream bad(dir / "bad.cfg");
        bad << "experiment=scale-fn\nx=not-a-number\n";
    }
    fs::remove(dir / "bad.csv");
    const int rc = sh(cli + " run --config " + (dir / "bad.cfg").string() + " --out " + (dir / "bad.csv").string() +
                      " 2> " + (dir / "bad.err").string());
    CHECK(rc != 0);
    CHECK_FALSE(fs::exists(dir / "bad.csv"));
    CHECK(slurp(dir / "bad.err").find("{\"error\":\"config\"") != std::string::npos);

    {
        std::ofstream good(dir / "good.cfg");
        good << "experiment=scale-fn\nseed=5\n";
    }
    CHECK(sh(cli + " run --config " + (dir / "good.cfg").string() + " --out " + (dir / "a.csv").string() + " > /dev/null") == 0);
    CHECK(sh(cli + " scale-fn --seed 5 --out " + (dir / "b.csv").string() + " > /dev/null") == 0);
    CHECK(slurp(dir / "a.csv") == slurp(dir / "b.csv"));
    CHECK(sh(cli + " scale-fn --bogus 1 2> /dev/null") != 0);
    fs::remove_all(dir);
}
#endif
