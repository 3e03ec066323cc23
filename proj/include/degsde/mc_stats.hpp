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
#include <span>
#include <vector>

namespace degsde {

/// Confidence level whose two-sided normal quantile is exactly 3.
inline constexpr double kThreeSigmaLevel = 0.99730020393673981;

/// Two-sided standard normal quantile z with P(|N| <= z) = level.
double normal_quantile(double level);

/// Monte Carlo point estimate. An empty branch is represented with n = 0 and
/// NaN mean/stderr.
struct Estimate {
    double mean = 0.0;
    double stderr_ = 0.0;
    std::size_t n = 0;
    double ci_level = 0.99;

    double half_width() const;
    double lower() const { return mean - half_width(); }
    double upper() const { return mean + half_width(); }
    bool empty() const { return n == 0; }

    static Estimate empty_branch(double ci_level = 0.99);
};

/// Permutation-invariant (bit-exact) mean and standard error: the samples are
/// sorted and reduced by pairwise summation.
Estimate estimate(std::span<const double> samples, double ci_level = 0.99);

/// Estimate of a probability from a 0/1 count.
Estimate proportion(std::size_t hits, std::size_t n, double ci_level = 0.99);

/// Pairwise (cascade) sum in the given order.
double pairwise_sum(std::span<const double> values);

struct OracleTest {
    Estimate estimate;
    double oracle = 0.0;
    double z_score = 0.0;
    bool pass = false;
};

OracleTest oracle_test(const Estimate& est, double oracle_value);

/// Agreement of two independent estimates: |m1 - m2| <= z(level) * sqrt(se1^2 + se2^2).
OracleTest agreement_test(const Estimate& a, const Estimate& b);

enum class Trend { increasing, decreasing };

/// Monotone-up-to-noise: each consecutive pair is ordered in the claimed
/// direction or their 2-stderr bands overlap.
bool trend_test(std::span<const Estimate> estimates, Trend direction);

} // namespace degsde
