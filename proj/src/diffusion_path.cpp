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

#include "degsde/diffusion_path.hpp"

#include "degsde/error.hpp"

#include <cmath>

namespace degsde {

std::string_view to_string(Origin origin) noexcept {
    switch (origin) {
    case Origin::time_change: return "time-change";
    case Origin::euler: return "euler";
    case Origin::transformed_euler: return "transformed-euler";
    case Origin::conditioned: return "conditioned";
    }
    return "unknown";
}

std::optional<double> DiffusionPath::first_hit(double level) const {
    std::optional<double> best;
    for (const auto& h : hits)
        if (h.level == level && (!best || h.time < *best)) best = h.time;
    return best;
}

double power_integral(std::span<const double> times, std::span<const double> values,
                      double power) {
    if (times.size() != values.size()) throw ParameterError("power_integral: size mismatch");
    double total = 0.0;
    for (std::size_t k = 0; k + 1 < times.size(); ++k) {
        const double f0 = std::pow(std::abs(values[k]), power);
        const double f1 = std::pow(std::abs(values[k + 1]), power);
        total += 0.5 * (f0 + f1) * (times[k + 1] - times[k]);
    }
    return total;
}

double path_power_integral(const DiffusionPath& path, double power) {
    return power_integral(path.times, path.values, power);
}

} // namespace degsde
