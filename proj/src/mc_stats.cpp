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

#include "degsde/mc_stats.hpp"

#include "degsde/error.hpp"

#include <boost/math/special_functions/erf.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

namespace degsde {

double normal_quantile(double level) {
    if (!(level > 0.0 && level < 1.0)) throw ParameterError("ci_level must lie in (0, 1)");
    return std::sqrt(2.0) * boost::math::erf_inv(level);
}

double Estimate::half_width() const {
    if (n == 0) return std::numeric_limits<double>::quiet_NaN();
    return normal_quantile(ci_level) * stderr_;
}

Estimate Estimate::empty_branch(double ci_level) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    return Estimate{nan, nan, 0, ci_level};
}

double pairwise_sum(std::span<const double> values) {
    constexpr std::size_t kLeaf = 8;
    if (values.size() <= kLeaf) {
        double s = 0.0;
        for (double v : values) s += v;
        return s;
    }
    const std::size_t half = values.size() / 2;
    return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

Estimate estimate(std::span<const double> samples, double ci_level) {
    if (samples.empty()) throw EmptySampleError("estimate: no samples");
    normal_quantile(ci_level);
    std::vector<double> sorted(samples.begin(), samples.end());
    std::sort(sorted.begin(), sorted.end());
    const double n = static_cast<double>(sorted.size());
    const double mean = pairwise_sum(sorted) / n;
    double se = 0.0;
    if (sorted.size() >= 2) {
        std::vector<double> sq(sorted.size());
        for (std::size_t i = 0; i < sorted.size(); ++i) {
            const double d = sorted[i] - mean;
            sq[i] = d * d;
        }
        const double var = pairwise_sum(sq) / (n - 1.0);
        se = std::sqrt(var / n);
    }
    return Estimate{mean, se, sorted.size(), ci_level};
}

Estimate proportion(std::size_t hits, std::size_t n, double ci_level) {
    if (n == 0) throw EmptySampleError("proportion: no samples");
    if (hits > n) throw ParameterError("proportion: hits exceed sample count");
    const double p = static_cast<double>(hits) / static_cast<double>(n);
    // Sample variance of the 0/1 sequence with the n - 1 divisor.
    const double var = n > 1 ? p * (1.0 - p) * static_cast<double>(n) / static_cast<double>(n - 1)
                             : 0.0;
    return Estimate{p, std::sqrt(var / static_cast<double>(n)), n, ci_level};
}

OracleTest oracle_test(const Estimate& est, double oracle_value) {
    OracleTest t{est, oracle_value, 0.0, false};
    if (est.empty()) {
        t.z_score = std::numeric_limits<double>::quiet_NaN();
        return t;
    }
    const double diff = est.mean - oracle_value;
    if (est.stderr_ > 0.0) {
        t.z_score = diff / est.stderr_;
        t.pass = std::abs(t.z_score) <= normal_quantile(est.ci_level);
    } else {
        t.z_score = diff == 0.0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), diff);
        t.pass = diff == 0.0;
    }
    return t;
}

OracleTest agreement_test(const Estimate& a, const Estimate& b) {
    Estimate diff{a.mean - b.mean, std::hypot(a.stderr_, b.stderr_), std::min(a.n, b.n),
                  a.ci_level};
    if (a.empty() || b.empty()) diff = Estimate::empty_branch(a.ci_level);
    return oracle_test(diff, 0.0);
}

bool trend_test(std::span<const Estimate> estimates, Trend direction) {
    if (estimates.size() < 2) throw ParameterError("trend_test: need at least two estimates");
    for (std::size_t i = 0; i + 1 < estimates.size(); ++i) {
        const Estimate& a = estimates[i];
        const Estimate& b = estimates[i + 1];
        if (a.empty() || b.empty()) return false;
        const bool ordered = direction == Trend::increasing ? b.mean >= a.mean : b.mean <= a.mean;
        if (ordered) continue;
        const bool overlap = std::abs(b.mean - a.mean) <= 2.0 * (a.stderr_ + b.stderr_);
        if (!overlap) return false;
    }
    return true;
}

} // namespace degsde
