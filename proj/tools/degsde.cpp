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

// degsde command line runner.

#include "degsde/error.hpp"
#include "degsde/experiments.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>

namespace {

void emit_error(const std::string& code, const std::string& message) {
    nlohmann::json j{{"error", code}, {"message", message}};
    std::cerr << j.dump() << std::endl;
}

void print_listing() {
    for (const auto& e : degsde::list_experiments()) {
        fmt::print("{}\t[{}]\t{}\n", e.name, e.anchor, e.summary);
        for (const auto& p : e.params) fmt::print("    --{} (default {})  {}\n", p.name, p.default_value, p.help);
    }
}

int run(degsde::ExperimentConfig cfg) {
    const auto result = degsde::run_experiment(cfg);
    const std::string csv = degsde::to_csv(result);
    if (cfg.out.empty() || cfg.out == "-") {
        std::fwrite(csv.data(), 1, csv.size(), stdout);
        for (const auto& r : result.rows) std::cerr << degsde::summary_line(r) << '\n';
    } else {
        std::ofstream f(cfg.out, std::ios::binary);
        if (!f) throw degsde::ConfigError("cannot open output file '" + cfg.out + "'");
        f << csv;
        for (const auto& r : result.rows) std::cout << degsde::summary_line(r) << '\n';
    }
    return result.pass() ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Monte Carlo experiments for degenerate one-dimensional SDEs"};
    app.require_subcommand(1);

    struct Sub {
        CLI::App* app;
        std::string name;
        std::map<std::string, std::string> values;
    };
    std::vector<std::unique_ptr<Sub>> subs;
    std::string config_path, out_path, seed_text;

    auto add_common = [&](CLI::App* s) {
        s->add_option("--config", config_path, "flat key=value config file");
        s->add_option("--seed", seed_text, "master seed");
        s->add_option("--out", out_path, "CSV output path (stdout if omitted)");
    };

    app.add_subcommand("list", "list experiments with anchors and parameters");
    auto* generic = app.add_subcommand("run", "run the experiment named in --config");
    add_common(generic);

    for (const auto& info : degsde::list_experiments()) {
        auto sub = std::make_unique<Sub>();
        sub->name = info.name;
        sub->app = app.add_subcommand(info.name, info.summary);
        add_common(sub->app);
        for (const auto& p : info.params)
            sub->app->add_option("--" + p.name, sub->values[p.name], p.help + " (default " + p.default_value + ")");
        subs.push_back(std::move(sub));
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        emit_error("usage", e.what());
        return 2;
    }

    try {
        if (app.got_subcommand("list")) {
            print_listing();
            return 0;
        }
        degsde::ExperimentConfig cfg;
        if (!config_path.empty()) cfg = degsde::parse_config_file(config_path);
        const Sub* chosen = nullptr;
        for (const auto& s : subs)
            if (s->app->parsed()) chosen = s.get();
        if (chosen) {
            if (!cfg.experiment.empty() && cfg.experiment != chosen->name)
                throw degsde::ConfigError("config names experiment '" + cfg.experiment + "' but subcommand is '" +
                                          chosen->name + "'");
            cfg.experiment = chosen->name;
            for (const auto& [k, v] : chosen->values)
                if (chosen->app->count("--" + k) > 0) cfg.params[k] = v;
        } else if (cfg.experiment.empty()) {
            throw degsde::ConfigError("no experiment given");
        }
        if (!seed_text.empty()) {
            std::istringstream in("seed=" + seed_text);
            cfg.seed = degsde::parse_config(in).seed;
        }
        if (!out_path.empty()) cfg.out = out_path;
        return run(cfg);
    } catch (const degsde::Error& e) {
        emit_error(e.code(), e.what());
        return 2;
    } catch (const std::exception& e) {
        emit_error("internal", e.what());
        return 3;
    }
}
