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

#include "degsde/rng_paths.hpp"

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace degsde {

/// Coefficients of dX = a(X) dW + b(X) dt + dL on [0, inf). The handles must
/// be stateless so batches can evaluate them concurrently.
struct CoefficientPair {
    std::string name;
    std::function<double(double)> a;
    std::function<double(double)> b;
    bool drift_free = false;
};

enum class CoefficientKind { power, constant, affine, sin_osc };

/// Built-in families selectable by name:
///   power    a = |x|^alpha,          b = b0
///   constant a = a0,                 b = b0
///   affine   a = a0 + a1 x,          b = b0 + b1 x
///   sin-osc  a = 2 + sin(x^-4), a(0) = 2, b = b0
struct CoefficientSpec {
    CoefficientKind kind = CoefficientKind::constant;
    double alpha = 0.25;
    double a0 = 1.0;
    double a1 = 0.0;
    double b0 = 0.0;
    double b1 = 0.0;
};

CoefficientKind parse_coefficient_kind(std::string_view name);
std::string_view to_string(CoefficientKind kind) noexcept;
CoefficientPair make_coefficients(const CoefficientSpec& spec);

/// sgn(x) f(|x|) for both coefficients.
CoefficientPair odd_extension(const CoefficientPair& pair);

/// s(x) = int_0^x exp(-int_0^y 2b/a^2 dr) dy by nested adaptive quadrature.
double scale_function(const CoefficientPair& pair, double x, double tol = 1e-10);

/// s'(x) = exp(-int_0^x 2b/a^2 dr).
double scale_derivative(const CoefficientPair& pair, double x, double tol = 1e-10);

double scale_inverse(const CoefficientPair& pair, double s_value, double tol = 1e-10);

struct SkorokhodResult {
    std::vector<double> reflected;
    std::vector<double> local_time;
};

/// L_t = max(0, max_{s <= t} -psi_s), reflected = psi + L.
SkorokhodResult skorokhod_map(std::span<const double> psi);

struct ReflectedPath {
    std::vector<double> times;
    std::vector<double> x;
    std::vector<double> local_time;
    std::vector<double> dw;
    /// pushed[k]: the free value of step k went negative.
    std::vector<bool> pushed;
    SeedId seed;

    std::size_t size() const noexcept { return times.size(); }
};

/// Projected Euler: free step a(X) dW + b(X) dt, clipped at 0 with the
/// clipped amount added to L.
ReflectedPath simulate_reflected(const CoefficientPair& pair, double x0, double dt, double horizon,
                                 SeedId seed);

/// Same scheme on given increments.
ReflectedPath simulate_reflected(const CoefficientPair& pair, double x0, double dt,
                                 std::span<const double> increments, SeedId seed);

/// Skorokhod map of x0 + W on the fine grid, sampled every `factor` steps:
/// reflected Brownian motion up to the fine-grid error.
ReflectedPath reflected_bm_reference(double x0, const BrownianPath& fine, std::size_t factor);

struct MaxCouplingReport {
    double sup_difference = 0.0;
    /// max |Z - Gamma(Z_0 + sum a(Z) dW + b(Z) h)| with Z = max(sol1, sol2).
    double z_residual = 0.0;
    bool z_dominates = true;
    std::vector<double> z;
};

MaxCouplingReport max_coupling_check(const ReflectedPath& sol1, const ReflectedPath& sol2,
                                     const CoefficientPair& pair);

struct SignedPath {
    std::vector<double> times;
    std::vector<double> x;
    std::vector<double> dw;
    double dt = 0.0;
};

/// Plain Euler for dX = a(X) dW + b(X) dt on the whole line.
SignedPath simulate_signed(const CoefficientPair& pair, double x0, double dt, double horizon, SeedId seed);

struct FoldReport {
    /// Largest |d|X| - a(|X|) dW - b(|X|) dt| over steps staying at |X| >= near_zero.
    double max_residual = 0.0;
    double bound = 0.0;
    bool residual_ok = true;
    /// Cumulative mismatch over the remaining steps (the local time of |X|).
    std::vector<double> accumulation;
    bool accumulation_ok = true;
    std::vector<double> folded;
};

FoldReport fold_check(const SignedPath& path, const CoefficientPair& odd_pair, double near_zero = 1e-3);

} // namespace degsde
