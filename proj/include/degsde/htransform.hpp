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

#include "degsde/diffusion_path.hpp"
#include "degsde/rng_paths.hpp"

#include <cstddef>
#include <limits>
#include <optional>
#include <string_view>
#include <vector>

namespace degsde {

/// Doob conditioning of dX = |X|^alpha dW:
///   q1   - hit 1 before 0, h(x) = x on (0, 1)
///   q0   - hit 0 before 1, h(x) = 1 - x on (0, 1)
///   qinf - h(x) = x on (0, inf)
enum class ConditioningMode { q1, q0, qinf };

std::string_view to_string(ConditioningMode mode) noexcept;

/// Drift of the conditioned equation; the diffusion coefficient stays |x|^alpha.
double drift(ConditioningMode mode, double x, double alpha);

struct ConditionedOptions {
    /// Largest step. With rel_step > 0 the step is clamp(rel_step * s^2, dt_min, dt)
    /// where s is the distance of V = X^(1-alpha) from its singular boundary.
    double dt = 1e-4;
    double rel_step = 0.0;
    double dt_min = 1e-10;
    /// X-levels whose first hits are recorded.
    std::vector<double> levels;
    /// Optional extra absorbing X-level (needed for qinf).
    std::optional<double> stop_level;
    double horizon = std::numeric_limits<double>::infinity();
    std::size_t max_steps = 100'000'000;
    int max_halvings = 40;
    bool store_path = true;
};

/// Euler scheme in V = X^(1-alpha) with constant diffusion (1 - alpha). Overshoots
/// past the entrance boundary are refined by Brownian-bridge halving; absorption
/// uses the bridge hit test. The path ends at the absorbing boundary, the stop
/// level or the horizon, whichever comes first.
DiffusionPath simulate_conditioned(ConditioningMode mode, double x0, double alpha,
                                   const ConditionedOptions& options, SeedId seed);

/// Green function of the 3-dimensional Bessel process killed at 1.
double green_bessel3(double x, double y);

/// Green function of dY = |Y|^alpha dW killed on leaving (-eta, eta).
double green_interval(double y, double z, double eta, double alpha);

/// int_0^1 y^(2 alpha - 2) G(x, y) y^(-2 alpha) dy by quadrature; equals -2 log x.
double green_additive_integral(double x, double alpha, double tol = 1e-12);

/// Expected exit time of (-eta, eta) from y: quadrature of green_interval in z
/// with the |z|^(-2 alpha) cell around 0 done in closed form.
double mean_exit_time(double y, double eta, double alpha, double tol = 1e-13);

/// Bessel-3 gambler's ruin: P(hit a before 1 | start x), 0 < a < x < 1.
double bessel3_hit_prob(double x, double a);

/// Mean time for Bessel-3 started at x to reach 1.
double bessel3_mean_exit(double x);

struct Bessel3Report {
    /// Clock C_t = int_0^t |X_r|^(2 alpha) dr on the path grid.
    std::vector<double> clock;
    /// Path value against the clock (the Bessel-3 reparametrization).
    std::vector<double> values;
    double exit_clock = 0.0;
    /// For each requested level, the clock time of its first hit (if any).
    std::vector<std::optional<double>> level_hits;
};

Bessel3Report bessel3_correspondence_check(const DiffusionPath& path, double alpha,
                                           const std::vector<double>& levels);

} // namespace degsde
