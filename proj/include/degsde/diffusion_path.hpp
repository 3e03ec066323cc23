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

#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace degsde {

enum class Origin { time_change, euler, transformed_euler, conditioned };

std::string_view to_string(Origin origin) noexcept;

struct HitRecord {
    double level = 0.0;
    double time = 0.0;
};

/// A simulated solution path on a strictly increasing time grid starting at 0.
struct DiffusionPath {
    std::vector<double> times;
    std::vector<double> values;
    double alpha = 0.0;
    std::vector<HitRecord> hits;
    Origin origin = Origin::euler;

    std::size_t size() const noexcept { return times.size(); }
    double end_time() const noexcept { return times.empty() ? 0.0 : times.back(); }
    /// First recorded hit time of `level`, if any.
    std::optional<double> first_hit(double level) const;
};

/// Trapezoid integral of |X_t|^power over the path grid.
double path_power_integral(const DiffusionPath& path, double power);

/// Trapezoid integral of |values|^power over an arbitrary grid.
double power_integral(std::span<const double> times, std::span<const double> values,
                      double power);

} // namespace degsde
