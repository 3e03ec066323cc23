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
#include <vector>

namespace degsde {

/// Cumulative values of A_t = int_0^t |B_s|^(-2 alpha) ds on the grid of B.
struct AdditiveFunctional {
    std::vector<double> base_times;
    std::vector<double> values;
};

/// Exact integral of |b|^(-2 alpha) along the straight segment from b0 to b1
/// traversed in time h. Finite whenever 2 alpha < 1 and (b0, b1) != (0, 0).
double segment_speed_integral(double b0, double b1, double h, double alpha);

AdditiveFunctional additive_functional(const BrownianPath& b, double alpha);

struct TimeChangeOptions {
    /// Spacing of the uniform process-time output grid.
    double out_dt = 1e-3;
    /// Levels whose first hit times are recorded (bridge-corrected on B).
    std::vector<double> levels;
    /// Hard cap on the driving path length when extending it.
    std::size_t max_base_steps = std::size_t{1} << 27;
};

/// X_t = B(gamma_t), gamma the piecewise-linear inverse of A. B starts at x.
/// B is extended from its own seed stream when A does not reach `horizon`.
DiffusionPath time_change_solution(const BrownianPath& b, double alpha, double horizon,
                                   const TimeChangeOptions& options = {});

/// Driving path from x up to its first exit from (lower, upper), found with
/// the bridge test. The exit lies in step `step` at `fraction` of it.
struct BaseExit {
    BrownianPath base;
    std::size_t step = 0;
    double fraction = 0.0;
    double level = 0.0;
};

BaseExit locate_exit(SeedId seed, double x, double lower, double upper, double base_dt);

/// Runs the time-change construction from x until the solution leaves
/// (lower, upper); the hit record holds the exit level and time.
DiffusionPath solve_until_exit(SeedId seed, double x, double alpha, double lower, double upper,
                               double base_dt, double out_dt);

/// Fraction of [0, horizon] spent in |X| < eps (trapezoid weights on the grid).
double occupation_fraction(const DiffusionPath& x, double eps, double horizon);

} // namespace degsde
