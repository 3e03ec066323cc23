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
#include "degsde/speed_timechange.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>

using namespace degsde;

namespace {

// int_0^c b^(-p) db with b = u^10, which leaves a bounded integrand for p <= 0.9.
double origin_piece(double c, double p, std::size_t m) {
    const double r = std::pow(c, 0.1);
    const double h = r / static_cast<double>(m);
    auto f = [&](double u) { return 10.0 * std::pow(u, 9.0 - 10.0 * p); };
    double s = f(0.0) + f(r);
    for (std::size_t k = 1; k < m; ++k) s += (k % 2 ? 4.0 : 2.0) * f(h * static_cast<double>(k));
    return s * h / 3.0;
}

// Simpson quadrature of |b|^(-2 alpha) along the segment, split at a zero crossing.
double quadrature_speed(double b0, double b1, double h, double alpha, std::size_t m) {
    const double p = 2.0 * alpha;
    if (b0 * b1 < 0.0)
        return h / std::abs(b1 - b0) * (origin_piece(std::abs(b0), p, m) + origin_piece(std::abs(b1), p, m));
    const double step = 1.0 / static_cast<double>(m);
    auto f = [&](double u) { return std::pow(std::abs(b0 + u * (b1 - b0)), -p); };
    double s = f(0.0) + f(1.0);
    for (std::size_t k = 1; k < m; ++k) s += (k % 2 ? 4.0 : 2.0) * f(step * static_cast<double>(k));
    return s * step / 3.0 * h;
}

BrownianPath constant_path(double x, std::size_t n, double dt) {
    BrownianPath b;
    b.dt = dt;
    b.w0 = x;
    b.increments.assign(n, 0.0);
    return b;
}

} // namespace

TEST_CASE("segment_speed_integral closed form") {
    CHECK(segment_speed_integral(1.0, 1.0, 0.3, 0.25) == doctest::Approx(0.3).epsilon(1e-14));
    // int_0^1 |2u - 1|^(-1/2) du = 2
    CHECK(segment_speed_integral(-1.0, 1.0, 1.0, 0.25) == doctest::Approx(2.0).epsilon(1e-13));
    CHECK(segment_speed_integral(0.0, 0.5, 1.0, 0.25) == doctest::Approx(2.0 * std::sqrt(0.5) / 0.5).epsilon(1e-13));
    const double cases[][4] = {{0.3, 0.9, 0.01, 0.1}, {-0.2, 0.7, 0.5, 0.3}, {2.0, -1.0, 0.2, 0.45}, {0.5, 0.5001, 1e-3, 0.2}};
    for (const auto& c : cases) {
        const double exact = segment_speed_integral(c[0], c[1], c[2], c[3]);
        CHECK(exact == doctest::Approx(quadrature_speed(c[0], c[1], c[2], c[3], 20000)).epsilon(1e-8));
    }
}

TEST_CASE("additive functional requires alpha in (0, 1/2)") {
    CHECK_THROWS_AS(additive_functional(constant_path(1.0, 10, 0.1), 0.5), ParameterError);
    CHECK_THROWS_AS(additive_functional(constant_path(1.0, 10, 0.1), 0.0), ParameterError);
}

TEST_CASE("additive functional of a constant path") {
    const auto af = additive_functional(constant_path(1.0, 100, 0.01), 0.25);
    REQUIRE(af.values.size() == 101);
    CHECK(af.values.back() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("additive functional is nondecreasing") {
    for (std::uint64_t i = 0; i < 5; ++i) {
        const auto af = additive_functional(gen_path({11, i}, 5000, 1e-4, 0.05), 0.3);
        CHECK(af.values.front() == 0.0);
        CHECK(std::is_sorted(af.values.begin(), af.values.end()));
    }
}

TEST_CASE("time change at zero horizon") {
    const auto x = time_change_solution(gen_path({3, 0}, 10, 1e-3, 0.4), 0.25, 0.0);
    REQUIRE(x.size() == 1);
    CHECK(x.values[0] == 0.4);
    CHECK(x.times[0] == 0.0);
}

TEST_CASE("time change values lie on the driving interpolant") {
    const auto b = gen_path({21, 2}, 20000, 1e-4, 0.2);
    TimeChangeOptions o;
    o.out_dt = 1e-3;
    const auto x = time_change_solution(b, 0.25, 0.5, o);
    const auto w = b.values();
    REQUIRE(x.times.size() == x.values.size());
    CHECK(x.times.back() == doctest::Approx(0.5));
    CHECK(std::is_sorted(x.times.begin(), x.times.end()));
    const auto [lo, hi] = std::minmax_element(w.begin(), w.end());
    for (double v : x.values) {
        CHECK(v >= *lo - 1e-12);
        CHECK(v <= *hi + 1e-12);
    }
}

TEST_CASE("additive functional sums segment integrals") {
    const auto b = gen_path({5, 5}, 400, 1e-3, 1.0);
    const auto af = additive_functional(b, 0.2);
    const auto w = b.values();
    double acc = 0.0;
    for (std::size_t k = 0; k < b.steps(); ++k) {
        acc += segment_speed_integral(w[k], w[k + 1], b.dt, 0.2);
        CHECK(af.values[k + 1] == doctest::Approx(acc).epsilon(1e-12));
    }
}

TEST_CASE("exit probabilities follow the natural scale") {
    // X is a local martingale, so P(exit at 1 | start 0) from (-1/2, 1) is 1/3.
    const std::size_t n = 3000;
    std::size_t top = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const auto x = solve_until_exit({77, i}, 0.0, 0.25, -0.5, 1.0, 1e-3, 1e-2);
        REQUIRE_FALSE(x.hits.empty());
        if (x.first_hit(1.0)) ++top;
    }
    const double p = static_cast<double>(top) / n;
    CHECK(std::abs(p - 1.0 / 3.0) <= 3.0 * std::sqrt((1.0 / 9.0 * 2.0) / n));
}

TEST_CASE("locate_exit brackets the start") {
    const auto e = locate_exit({8, 1}, 0.3, 0.0, 1.0, 1e-4);
    CHECK((e.level == 0.0 || e.level == 1.0));
    CHECK(e.fraction >= 0.0);
    CHECK(e.fraction <= 1.0);
    CHECK_THROWS_AS(locate_exit({8, 1}, 1.3, 0.0, 1.0, 1e-4), DomainError);
}

TEST_CASE("occupation fraction") {
    DiffusionPath p;
    p.times = {0.0, 0.5, 1.0};
    p.values = {1.0, 1.0, 1.0};
    CHECK(occupation_fraction(p, 0.1, 1.0) == 0.0);
    p.values = {0.0, 0.0, 0.0};
    CHECK(occupation_fraction(p, 0.1, 1.0) == 1.0);
    const auto x = time_change_solution(gen_path({9, 9}, 20000, 1e-4, 0.0), 0.25, 0.3);
    double prev = 0.0;
    for (double eps : {0.01, 0.05, 0.1, 0.5}) {
        const double f = occupation_fraction(x, eps, 0.3);
        CHECK(f >= prev);
        prev = f;
    }
    CHECK_THROWS_AS(occupation_fraction(x, 0.0, 1.0), ParameterError);
}

TEST_CASE("unreachable horizon") {
    TimeChangeOptions o;
    o.max_base_steps = 50;
    CHECK_THROWS_AS(time_change_solution(gen_path({1, 1}, 10, 1e-3, 0.5), 0.25, 100.0, o), HorizonUnreachable);
}
