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
#include "degsde/rng_paths.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

using namespace degsde;

TEST_CASE("estimate of a constant sample") {
    const std::vector<double> v(10, 2.5);
    const Estimate e = estimate(v);
    CHECK(e.mean == 2.5);
    CHECK(e.stderr_ == 0.0);
    CHECK(e.n == 10);
}

TEST_CASE("estimate of {0, 1}") {
    const std::vector<double> v{0.0, 1.0};
    const Estimate e = estimate(v);
    CHECK(e.mean == 0.5);
    // s = sqrt(0.5), stderr = s / sqrt(2)
    CHECK(e.stderr_ == doctest::Approx(std::sqrt(0.5) / std::sqrt(2.0)).epsilon(1e-15));
}

TEST_CASE("estimate is bit-exact under permutation") {
    std::mt19937_64 g(5);
    std::normal_distribution<double> d(3.0, 2.0);
    std::vector<double> v(1001);
    for (double& x : v) x = d(g) * 1e6 + 1e-3 * d(g);
    const Estimate a = estimate(v);
    for (int r = 0; r < 5; ++r) {
        std::shuffle(v.begin(), v.end(), g);
        const Estimate b = estimate(v);
        CHECK(a.mean == b.mean);
        CHECK(a.stderr_ == b.stderr_);
    }
}

TEST_CASE("confidence interval uses the normal quantile") {
    CHECK(normal_quantile(kThreeSigmaLevel) == doctest::Approx(3.0).epsilon(1e-9));
    CHECK(normal_quantile(0.95) == doctest::Approx(1.959963984540054).epsilon(1e-9));
    const std::vector<double> v{0.0, 1.0, 2.0, 3.0};
    const Estimate e = estimate(v, 0.99);
    CHECK(e.half_width() == doctest::Approx(normal_quantile(0.99) * e.stderr_));
    CHECK(e.lower() < e.mean);
    CHECK(e.upper() > e.mean);
}

TEST_CASE("proportion") {
    const Estimate e = proportion(30, 100);
    CHECK(e.mean == doctest::Approx(0.3));
    CHECK(e.stderr_ == doctest::Approx(std::sqrt(0.3 * 0.7 / 99.0)));
    CHECK_THROWS(proportion(0, 0));
}

TEST_CASE("oracle_test") {
    Estimate e;
    e.mean = 1.0;
    e.stderr_ = 0.1;
    e.n = 100;
    e.ci_level = kThreeSigmaLevel;
    CHECK(oracle_test(e, 1.2).pass);
    CHECK(oracle_test(e, 1.2).z_score == doctest::Approx(-2.0));
    e.mean = 1.0 + 10 * 0.1;
    CHECK_FALSE(oracle_test(e, 1.0).pass);
    e.stderr_ = 0.0;
    e.mean = 1.0;
    CHECK(oracle_test(e, 1.0).pass);
    CHECK_FALSE(oracle_test(e, 1.0 + 1e-12).pass);
}

TEST_CASE("agreement_test") {
    Estimate a, b;
    a.mean = 1.0, a.stderr_ = 0.1, a.n = 10, a.ci_level = kThreeSigmaLevel;
    b.mean = 1.3, b.stderr_ = 0.1, b.n = 10, b.ci_level = kThreeSigmaLevel;
    CHECK(agreement_test(a, b).pass);
    b.mean = 1.5;
    CHECK_FALSE(agreement_test(a, b).pass);
}

TEST_CASE("trend_test") {
    auto make = [](std::vector<double> means, double se) {
        std::vector<Estimate> v;
        for (double m : means) {
            Estimate e;
            e.mean = m;
            e.stderr_ = se;
            e.n = 10;
            v.push_back(e);
        }
        return v;
    };
    CHECK(trend_test(make({1, 2, 3}, 0.0), Trend::increasing));
    CHECK_FALSE(trend_test(make({3, 2, 1}, 0.0), Trend::increasing));
    CHECK(trend_test(make({3, 2, 1}, 0.0), Trend::decreasing));
    CHECK(trend_test(make({1, 1, 1}, 5.0), Trend::increasing));
    CHECK_FALSE(trend_test(make({1, 0.5}, 0.1), Trend::increasing));
}

TEST_CASE("empty branch") {
    const Estimate e = Estimate::empty_branch();
    CHECK(e.empty());
    CHECK(std::isnan(e.mean));
}

TEST_CASE("coverage of the 99% interval") {
    const double mu = 0.7;
    std::size_t covered = 0;
    const std::size_t reps = 1000;
    for (std::size_t r = 0; r < reps; ++r) {
        NormalStream z({314, r});
        std::vector<double> v(200);
        for (double& x : v) x = mu + z();
        const Estimate e = estimate(v, 0.99);
        if (e.lower() <= mu && mu <= e.upper()) ++covered;
    }
    CHECK(covered >= 970);
}

TEST_CASE("pairwise_sum") {
    std::vector<double> v(1000, 0.1);
    CHECK(pairwise_sum(v) == doctest::Approx(100.0).epsilon(1e-14));
    CHECK(pairwise_sum(std::vector<double>{}) == 0.0);
}
