# Copyright 2026 The degsde Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Simulation of degenerate one-dimensional SDEs."""

from ._core import (
    ConfigError,
    DomainError,
    Error,
    HorizonUnreachable,
    ParameterError,
    PreconditionError,
    StepFailure,
    bessel3_hit_prob,
    bridge_crossing_prob,
    chasing,
    drift,
    estimate,
    euler_coupled,
    gen_path,
    green_additive_integral,
    green_bessel3,
    green_interval,
    list_experiments,
    mean_exit_time,
    run_experiment,
    scale_function,
    scale_inverse,
    segment_speed_integral,
    simulate_conditioned,
    simulate_reflected,
    skorokhod_map,
    solve_until_exit,
    time_change_solution,
)

__all__ = [name for name in dir() if not name.startswith("_")]
