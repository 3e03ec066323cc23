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

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace degsde {

struct ParamSpec {
    std::string name;
    std::string default_value;
    std::string help;
};

struct ExperimentInfo {
    std::string name;
    std::string anchor;
    std::string summary;
    std::vector<ParamSpec> params;
};

using ParamMap = std::map<std::string, std::string>;

struct ExperimentConfig {
    std::string experiment;
    ParamMap params;
    std::uint64_t seed = 20260101;
    std::string out;
};

/// One CSV row. verdict is "pass", "fail", "error" or "info"; info rows carry
/// no test.
struct ResultRow {
    std::string experiment;
    std::string params;
    std::size_t n = 0;
    double mean = 0.0;
    double stderr_ = 0.0;
    std::optional<double> oracle;
    std::optional<double> z;
    std::string verdict = "info";
};

struct ExperimentResult {
    std::vector<ResultRow> rows;
    bool pass() const;
};

/// Registry in a fixed order.
const std::vector<ExperimentInfo>& list_experiments();
const ExperimentInfo& find_experiment(const std::string& name);

/// Flat key=value text: one pair per line, '#' starts a comment. The keys
/// `experiment`, `seed` and `out` fill the corresponding config fields.
ExperimentConfig parse_config(std::istream& in);
ExperimentConfig parse_config_file(const std::string& path);

/// Validates every parameter before running; throws ConfigError or
/// ParameterError without simulating anything on bad input.
ExperimentResult run_experiment(const ExperimentConfig& config);

std::string csv_header();
std::string to_csv(const ExperimentResult& result);
std::string format_number(double v);
std::string summary_line(const ResultRow& row);

} // namespace degsde
