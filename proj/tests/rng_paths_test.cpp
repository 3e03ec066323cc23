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

#include "degsde/error.hpp"
#include "degsde/rng_paths.hpp"

#include <doctest.h>

#include <cmath>
#include <numeric>

using namespace degsde;

namespace {

double mean_of(const std::vector<double>& v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

// Fraction of simulated bridges from a to b over [0, T] that touch `level`,
// monitored on a fine grid with the continuity shift 0.5826 sqrt(h).
double brute_force_crossing(double a, double b, double t, double level, std::size_t paths, std::size_t steps) {
    const double h = t / static_cast<double>(steps);
    const double shift = 0.5826 * std::sqrt(h);
    const bool above = a > level;
    const double barrier = above ? level + shift : level - shift;
    NormalStream z(SeedId{99, 0});
    std::size_t hits = 0;
    std::vector<double> w(steps + 1);
    for (std::size_t p = 0; p < paths; ++p) {
        w[0] = 0.0;
        for (std::size_t k = 0; k < steps; ++k) w[k + 1] = w[k] + std::sqrt(h) * z();
        for (std::size_t k = 0; k <= steps; ++k) {
            const double s = static_cast<double>(k) / static_cast<double>(steps);
            const double v = a + w[k] - s * w[steps] + s * (b - a);
            if (above ? v <= barrier : v >= barrier) {
                ++hits;
                break;
            }
        }
    }
    return static_cast<double>(hits) / static_cast<double>(paths);
}

} // namespace

TEST_CASE("gen_path is a pure function of the seed") {
    const auto a = gen_path({7, 3}, 1, 1.0);
    const auto b = gen_path({7, 3}, 1, 1.0);
    CHECK(a.increments == b.increments);

    const auto first = gen_path({7, 5}, 100, 0.01);
    for (std::uint64_t i = 0; i < 20; ++i) (void)gen_path({7, i}, 1000, 0.01);
    CHECK(gen_path({7, 5}, 100, 0.01).increments == first.increments);
    CHECK(gen_path({7, 6}, 100, 0.01).increments != first.increments);
    CHECK(gen_path({8, 5}, 100, 0.01).increments != first.increments);
}

TEST_CASE("gen_path moments") {
    const std::size_t n = 100000;
    const double dt = 1e-3;
    const auto p = gen_path({2026, 0}, n, dt);
    REQUIRE(p.steps() == n);
    const double m = mean_of(p.increments);
    CHECK(std::abs(m) <= 4.0 * std::sqrt(dt / static_cast<double>(n)));
    double ss = 0.0;
    for (double v : p.increments) ss += (v - m) * (v - m);
    const double var = ss / static_cast<double>(n - 1);
    CHECK(std::abs(var - dt) <= 0.05 * dt);
}

TEST_CASE("distinct seeds are uncorrelated") {
    const std::size_t n = 50000;
    const auto a = gen_path({1, 0}, n, 1.0);
    const auto b = gen_path({1, 1}, n, 1.0);
    double c = 0.0;
    for (std::size_t k = 0; k < n; ++k) c += a.increments[k] * b.increments[k];
    CHECK(std::abs(c / static_cast<double>(n)) < 4.0 / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("gen_path rejects bad arguments") {
    CHECK_THROWS_AS(gen_path({1, 0}, 0, 1.0), ParameterError);
    CHECK_THROWS_AS(gen_path({1, 0}, 10, 0.0), ParameterError);
    CHECK_THROWS_AS(gen_path({1, 0}, 10, -1.0), ParameterError);
}

TEST_CASE("extend continues the stream") {
    auto p = gen_path({4, 4}, 10, 0.1);
    p.extend(15);
    CHECK(p.increments == gen_path({4, 4}, 25, 0.1).increments);
    const auto v = p.values();
    REQUIRE(v.size() == 26);
    CHECK(v[0] == p.w0);
}

TEST_CASE("NormalStream random access matches sequential draws") {
    NormalStream s({3, 9});
    std::vector<double> seq(11);
    for (double& v : seq) v = s();
    const NormalStream r({3, 9});
    for (std::size_t k = 0; k < seq.size(); ++k) CHECK(r.at(k) == seq[k]);
    NormalStream other({3, 9}, Lane::refine);
    CHECK(other() != seq[0]);
}

TEST_CASE("coarsen sums blocks of fine increments") {
    const auto p = gen_path({5, 1}, 16, 0.25);
    const auto c = coarsen(p.increments, 4);
    REQUIRE(c.size() == 4);
    for (std::size_t k = 0; k < 4; ++k) {
        double s = 0.0;
        for (std::size_t j = 0; j < 4; ++j) s += p.increments[4 * k + j];
        CHECK(c[k] == doctest::Approx(s).epsilon(1e-15));
    }
    CHECK_THROWS(coarsen(p.increments, 3));
}

TEST_CASE("bridge_split preserves the increment") {
    for (double z : {-2.0, 0.0, 0.7}) {
        const auto [l, r] = bridge_split(0.5, 1.3, z);
        CHECK(l + r == doctest::Approx(1.3).epsilon(1e-15));
    }
    const auto [l, r] = bridge_split(1.0, 2.0, 0.0);
    CHECK(l == doctest::Approx(1.0));
    CHECK(r == doctest::Approx(1.0));
}

TEST_CASE("bridge_crossing_prob closed form") {
    CHECK(bridge_crossing_prob(0.0, 2.0, 1.0, 1.0) == 1.0);
    CHECK(bridge_crossing_prob(1.0, 1.0, 1.0, 0.0) == doctest::Approx(std::exp(-2.0)).epsilon(1e-14));
    CHECK(bridge_crossing_prob(1.0, 2.0, 1.0, 3.0) == doctest::Approx(std::exp(-4.0)).epsilon(1e-14));
    CHECK(bridge_crossing_prob(1.0, 1.0, 1.0, 0.0, 2.0) == doctest::Approx(std::exp(-0.5)).epsilon(1e-14));
}

TEST_CASE("bridge_crossing_prob against simulated bridges") {
    const std::size_t paths = 4000;
    const double p1 = brute_force_crossing(1.0, 1.0, 1.0, 0.0, paths, 4096);
    const double o1 = std::exp(-2.0);
    CHECK(std::abs(p1 - o1) <= 4.0 * std::sqrt(o1 * (1 - o1) / paths));
    const double p2 = brute_force_crossing(1.0, 2.0, 1.0, 3.0, paths, 4096);
    const double o2 = std::exp(-4.0);
    CHECK(std::abs(p2 - o2) <= 4.0 * std::sqrt(o2 * (1 - o2) / paths));
}

TEST_CASE("bridge_crossing_prob symmetry and limits") {
    const double cases[][4] = {{0.3, 0.9, 0.2, 0.0}, {1.1, 1.7, 0.5, 0.4}, {-0.2, -0.6, 0.1, 0.3}};
    for (const auto& c : cases) {
        const double p = bridge_crossing_prob(c[0], c[1], c[2], c[3]);
        const double q = bridge_crossing_prob(2 * c[3] - c[0], 2 * c[3] - c[1], c[2], c[3]);
        CHECK(p == doctest::Approx(q).epsilon(1e-14));
        CHECK(p >= 0.0);
        CHECK(p <= 1.0);
    }
    double prev = 0.0;
    for (double gap : {1.0, 0.1, 0.01, 1e-4, 1e-8}) {
        const double p = bridge_crossing_prob(gap, 1.0, 0.5, 0.0);
        CHECK(p >= prev);
        prev = p;
    }
    CHECK(prev == doctest::Approx(1.0).epsilon(1e-6));
}
