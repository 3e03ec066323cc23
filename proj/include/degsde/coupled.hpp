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

#include "degsde/htransform.hpp"
#include "degsde/mc_stats.hpp"
#include "degsde/rng_paths.hpp"

#include <cstddef>
#include <limits>
#include <optional>
#include <string_view>
#include <vector>

namespace degsde {

/// Law under which a coupled pair is simulated. In q1/q0 the stored noise is
/// the driving motion of the conditioned law; the plain motion is recovered
/// from it by the Girsanov shift.
enum class CoupledMode { plain, q1, q0 };

std::string_view to_string(CoupledMode mode) noexcept;

enum class StopRule { x_exits_unit, m_hits_level, fixed_horizon };

struct StopCondition {
    StopRule rule = StopRule::x_exits_unit;
    double level = 1.0;
    /// Applies to every rule as an upper bound.
    double horizon = std::numeric_limits<double>::infinity();
};

enum class StopReason { x_hit_zero, x_hit_one, m_level, horizon, step_budget };

std::string_view to_string(StopReason reason) noexcept;

/// Series whose first level hits are recorded.
enum class Series { x, y, abs_y, m, z };

struct SeriesHit {
    Series series;
    double level;
    double time;
};

struct CoupledOptions {
    double dt = 1e-4;
    /// Adaptive step clamp(rel_step * scale, dt_min, dt) where scale is
    /// M^(2 - 2 alpha), capped by X^(2 - 2 alpha) under q1 and by (1 - X)^2
    /// under q0. Zero means fixed dt.
    double rel_step = 0.0;
    double dt_min = 1e-10;
    /// Fixed-step runs draw each increment as the sum of this many normals of
    /// variance dt / factor, so runs at dt and dt / factor share one skeleton.
    std::size_t skeleton_factor = 1;
    /// Pieces longer than refine_rel * min(|X|, |Y|)^(2 - 2 alpha) are split by
    /// Brownian bridge down to dt_min. Zero disables the refinement.
    double refine_rel = 0.0;
    StopCondition stop;
    std::vector<double> levels;
    std::size_t max_steps = 100'000'000;
    int max_halvings = 40;
};

struct CoupledSample {
    std::vector<double> times;
    std::vector<double> x;
    std::vector<double> y;
    /// Noise increment over [times[k], times[k+1]].
    std::vector<double> dw;
    double alpha = 0.0;
    CoupledMode mode = CoupledMode::plain;
    std::vector<SeriesHit> hits;
    StopReason reason = StopReason::horizon;
    /// Set when the last point was placed on a boundary by interpolation.
    bool terminal_interpolated = false;
    std::size_t zero_perturbations = 0;

    std::size_t size() const noexcept { return times.size(); }
    double m(std::size_t k) const;
    double z(std::size_t k) const;
    /// X^(1-alpha) - Y^(1-alpha); empty unless both are positive.
    std::optional<double> r(std::size_t k) const;
    std::optional<double> first_hit(Series series, double level) const;
};

/// Euler-Maruyama for the pair on shared increments. Diffusion |.|^alpha for
/// both; under q1 the drifts are X^(2a-1) and X^(a-1)|Y|^a, under q0
/// -X^(2a)/(1-X) and -|Y|^a X^a/(1-X).
CoupledSample euler_coupled(double x0, double y0, double alpha, CoupledMode mode,
                            const CoupledOptions& options, SeedId seed);

/// Largest |R_t - R_0 exp(a(1-a)/2 int X^(a-1) Y^(a-1))| / |R_0| over the
/// initial window on which X and Y stay positive.
double r_identity_residual(const CoupledSample& sample);

struct TransformResiduals {
    /// X^(1-a) against the plain noise.
    std::optional<double> x_power;
    /// X^(1-a) against the q1 noise (q1 samples only).
    std::optional<double> x_power_tilde;
    /// |Y|^(1-a) on windows with Y != 0.
    std::optional<double> abs_y_power;
    /// X^(1-a) + |Y|^(1-a) on windows with Y < 0 < X (no noise term).
    std::optional<double> sum_power;
    std::size_t sum_windows = 0;
    /// Drift-reconstructed sum series strictly decreasing on every window.
    bool sum_decreasing = true;
};

/// Each residual is the largest |cumulative (LHS - RHS)| within a window,
/// maximized over windows. Domain windows are maximal runs of grid steps
/// whose endpoints satisfy the equation's sign conditions.
/// Residual windows skip steps where X or |Y| falls below `floor`; the
/// monotonicity of the sum series is checked on every Y < 0 < X step.
TransformResiduals transform_residuals(const CoupledSample& sample, double alpha, double floor = 0.0);

struct ChasingOptions {
    std::size_t runs = 1000;
    CoupledOptions coupled;
    /// Plain-law runs classified by the exit side instead of q1/q0 runs.
    bool rejection = false;
    double ci_level = 0.99;
};

struct ChasingReport {
    double x0 = 0.0;
    double y0 = 0.0;
    double alpha = 0.0;
    double delta = 0.0;
    Estimate p_close;       // P(Y_T > 1 - delta | X_T = 1)
    Estimate mean_y_top;    // E[Y_T | X_T = 1]
    Estimate mean_neg_y_bottom;  // E[-Y_T | X_T = 0]
    std::size_t n_top = 0;
    std::size_t n_bottom = 0;
    std::size_t excluded = 0;
    /// Rejection mode only: P(X_T = 1).
    std::optional<Estimate> p_top;
};

ChasingReport chasing_experiment(double x0, double y0, double alpha, double delta,
                                 const ChasingOptions& options, std::uint64_t master_seed);

struct EnvelopeReport {
    bool vacuous = false;
    bool ordered = true;         // Y < X up to T_lambda
    bool before_crossing = true; // max(X, |Y|) <= 2^(1/(1-a)) x0 before Y turns nonnegative
    bool lower_bound = true;     // Y >= -(lambda^(1-a) - X^(1-a))^(1/(1-a)) afterwards
    bool within_lambda = true;   // |Y| < lambda up to T_lambda
    bool crossing_first = true;  // Y turns nonnegative before X reaches lambda
    std::size_t violations = 0;
    /// Smallest slack (bound minus value, tolerance included) seen.
    double worst_margin = std::numeric_limits<double>::infinity();
    bool pass() const {
        return vacuous || (ordered && before_crossing && lower_bound && within_lambda && crossing_first);
    }
};

/// Checks the q1 envelope bounds up to the first time X reaches lambda, with
/// additive tolerance 3 max(|X|^a, |Y|^a) sqrt(h) per grid point.
EnvelopeReport envelope_check(const CoupledSample& sample, double lambda);

enum class SchemeKind { direct_euler, transformed };

struct DivergenceTable {
    std::vector<double> dt;
    std::vector<double> divergence;
};

/// Direct Euler on X and drift-implicit Euler on U = sgn(X)|X|^(1-a), driven by
/// increments summed from one path at the finest step.
CoupledSample two_scheme_sample(double x0, double alpha, double dt, double fine_dt, double horizon,
                                SeedId seed, SchemeKind first = SchemeKind::direct_euler,
                                SchemeKind second = SchemeKind::transformed);

/// sup_t |X1 - X2| for every dt in a strictly decreasing sequence of dyadic
/// multiples of its last entry.
DivergenceTable uniqueness_refinement(double x0, double alpha, const std::vector<double>& dts,
                                      double horizon, SeedId seed,
                                      SchemeKind first = SchemeKind::direct_euler,
                                      SchemeKind second = SchemeKind::transformed);

struct Excursion {
    double start = 0.0;
    double end = 0.0;
    double max_m = 0.0;
    double max_z = 0.0;
    bool complete = false;
};

/// Excursions of M above `threshold` that reach `level_b`.
std::vector<Excursion> excursion_agreement(const CoupledSample& sample, double level_b,
                                           double threshold = 1e-4);

} // namespace degsde
