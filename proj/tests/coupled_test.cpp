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

#include "degsde/coupled.hpp"
#include "degsde/error.hpp"

#include <doctest.h>

#include <cmath>

using namespace degsde;

namespace {

CoupledOptions adaptive_q() {
    CoupledOptions o;
    o.dt = 1e-4;
    o.rel_step = 0.01;
    o.dt_min = 1e-10;
    return o;
}

CoupledSample manual(std::vector<double> x, std::vector<double> y, double alpha) {
    CoupledSample s;
    s.alpha = alpha;
    for (std::size_t k = 0; k < x.size(); ++k) s.times.push_back(static_cast<double>(k));
    s.x = std::move(x);
    s.y = std::move(y);
    s.dw.assign(s.times.size() - 1, 0.0);
    return s;
}

} // namespace

TEST_CASE("equal starts give bit-identical paths") {
    CoupledOptions o;
    o.dt = 1e-3;
    for (std::uint64_t i = 0; i < 20; ++i) {
        const auto s = euler_coupled(0.5, 0.5, 0.25, CoupledMode::plain, o, {12, i});
        CHECK(s.x == s.y);
    }
}

TEST_CASE("comparison ordering before X hits 0") {
    CoupledOptions o;
    o.dt = 1e-4;
    for (std::uint64_t i = 0; i < 40; ++i) {
        const auto s = euler_coupled(0.5, 0.25, 0.25, CoupledMode::plain, o, {13, i});
        for (std::size_t k = 0; k < s.size(); ++k) {
            if (s.x[k] <= 0.0) break;
            CHECK(s.y[k] <= s.x[k]);
        }
        const auto q = euler_coupled(0.2, 0.1, 0.25, CoupledMode::q1, adaptive_q(), {14, i});
        for (std::size_t k = 0; k < q.size(); ++k) CHECK(q.y[k] <= q.x[k]);
    }
}

TEST_CASE("M dominates Z / 2 and the noise is shared") {
    for (std::uint64_t i = 0; i < 20; ++i) {
        const auto s = euler_coupled(0.2, -0.2, 0.25, CoupledMode::q1, adaptive_q(), {15, i});
        REQUIRE(s.dw.size() + 1 == s.size());
        for (std::size_t k = 0; k < s.size(); ++k) CHECK(s.m(k) >= 0.5 * s.z(k));
    }
}

TEST_CASE("two-sided start stays in the envelope while Y < 0") {
    const double a = 0.25, x0 = 0.25;
    const double bound = std::pow(2.0, 1.0 / (1.0 - a)) * x0;
    for (std::uint64_t i = 0; i < 40; ++i) {
        const auto s = euler_coupled(x0, -x0, a, CoupledMode::q1, adaptive_q(), {16, i});
        for (std::size_t k = 1; k < s.size(); ++k) {
            if (s.y[k] >= 0.0) break;
            const double h = s.times[k] - s.times[k - 1];
            const double tol = 3.0 * std::max(std::pow(std::abs(s.x[k - 1]), a), std::pow(std::abs(s.y[k - 1]), a)) * std::sqrt(h);
            CHECK(std::max(s.x[k], std::abs(s.y[k])) <= bound + tol);
        }
    }
}

TEST_CASE("envelope check") {
    for (std::uint64_t i = 0; i < 40; ++i) {
        const auto s = euler_coupled(0.2, -0.2, 0.25, CoupledMode::q1, adaptive_q(), {17, i});
        const auto r = envelope_check(s, 1.0);
        CHECK(r.pass());
        CHECK(r.within_lambda);
    }
    const auto same = euler_coupled(0.2, 0.2, 0.25, CoupledMode::q1, adaptive_q(), {17, 0});
    CHECK(envelope_check(same, 1.0).vacuous);
    CHECK_THROWS_AS(envelope_check(same, 0.5), PreconditionError);
    CoupledOptions o;
    const auto plain = euler_coupled(0.2, 0.1, 0.25, CoupledMode::plain, o, {17, 0});
    CHECK_THROWS_AS(envelope_check(plain, 1.0), PreconditionError);
}

TEST_CASE("R identity trivial cases") {
    CHECK(r_identity_residual(manual({0.5}, {0.4}, 0.25)) == 0.0);
    const auto s = euler_coupled(0.5, 0.5, 0.25, CoupledMode::q1, adaptive_q(), {18, 0});
    CHECK(r_identity_residual(s) == 0.0);
    CHECK_THROWS_AS(r_identity_residual(manual({0.5, 0.5}, {0.0, 0.1}, 0.25)), DomainError);
}

TEST_CASE("R identity residual shrinks on a shared skeleton") {
    double coarse = 0.0, fine = 0.0;
    for (std::uint64_t i = 0; i < 10; ++i) {
        CoupledOptions c;
        c.dt = 1e-4;
        c.skeleton_factor = 4;
        c.refine_rel = 0.01;
        CoupledOptions f = c;
        f.dt = 2.5e-5;
        f.skeleton_factor = 1;
        coarse += r_identity_residual(euler_coupled(0.5, 0.4, 0.25, CoupledMode::q1, c, {19, i}));
        fine += r_identity_residual(euler_coupled(0.5, 0.4, 0.25, CoupledMode::q1, f, {19, i}));
    }
    CHECK(fine < coarse);
}

TEST_CASE("fixed-step runs share one skeleton") {
    CoupledOptions c;
    c.dt = 1e-3;
    c.skeleton_factor = 4;
    c.stop.rule = StopRule::fixed_horizon;
    c.stop.horizon = 0.1;
    CoupledOptions f = c;
    f.dt = 2.5e-4;
    f.skeleton_factor = 1;
    const auto a = euler_coupled(0.5, 0.3, 0.25, CoupledMode::plain, c, {20, 3});
    const auto b = euler_coupled(0.5, 0.3, 0.25, CoupledMode::plain, f, {20, 3});
    REQUIRE(a.dw.size() * 4 == b.dw.size());
    for (std::size_t k = 0; k < a.dw.size(); ++k) {
        const double s = b.dw[4 * k] + b.dw[4 * k + 1] + b.dw[4 * k + 2] + b.dw[4 * k + 3];
        CHECK(a.dw[k] == doctest::Approx(s).epsilon(1e-12));
    }
}

TEST_CASE("transform residuals") {
    const auto flat = transform_residuals(manual({0.5, 0.5, 0.5}, {-0.3, -0.3, -0.3}, 0.0), 0.0);
    REQUIRE(flat.x_power);
    CHECK(*flat.x_power == 0.0);
    CHECK(*flat.abs_y_power == 0.0);
    for (std::uint64_t i = 0; i < 20; ++i) {
        const auto s = euler_coupled(0.2, -0.2, 0.25, CoupledMode::q1, adaptive_q(), {21, i});
        const auto r = transform_residuals(s, 0.25);
        CHECK(r.sum_windows >= 1);
        CHECK(r.sum_decreasing);
        CHECK(r.x_power_tilde.has_value());
    }
    CHECK_THROWS_AS(transform_residuals(manual({0.5, 0.5}, {0.1, 0.1}, 0.25), 0.25, -1.0), ParameterError);
}

TEST_CASE("transform residual scales with the step") {
    double coarse = 0.0, fine = 0.0;
    for (std::uint64_t i = 0; i < 20; ++i) {
        CoupledOptions c;
        c.dt = 1e-5;
        c.skeleton_factor = 4;
        CoupledOptions f = c;
        f.dt = 2.5e-6;
        f.skeleton_factor = 1;
        const auto rc = transform_residuals(euler_coupled(0.2, -0.2, 0.25, CoupledMode::q1, c, {22, i}), 0.25, 0.05);
        const auto rf = transform_residuals(euler_coupled(0.2, -0.2, 0.25, CoupledMode::q1, f, {22, i}), 0.25, 0.05);
        if (rc.x_power && rf.x_power) {
            coarse += *rc.x_power;
            fine += *rf.x_power;
        }
    }
    REQUIRE(fine > 0.0);
    CHECK(coarse / fine >= 1.5);
    CHECK(coarse / fine <= 3.0);
}

TEST_CASE("chasing with equal starts") {
    ChasingOptions o;
    o.runs = 50;
    o.coupled = adaptive_q();
    const auto r = chasing_experiment(0.1, 0.1, 0.25, 0.1, o, 23);
    CHECK(r.n_top == 50);
    CHECK(r.p_close.mean == 1.0);
    CHECK(r.mean_y_top.mean == 1.0);
    CHECK(r.n_top + r.n_bottom + r.excluded == 100);
}

TEST_CASE("rejection mode hit probability") {
    ChasingOptions o;
    o.runs = 2000;
    o.rejection = true;
    o.coupled.dt = 1e-3;
    const auto r = chasing_experiment(0.2, 0.0, 0.25, 0.1, o, 24);
    REQUIRE(r.p_top);
    CHECK(r.n_top + r.n_bottom + r.excluded == 2000);
    CHECK(std::abs(r.p_top->mean - 0.2) <= 3.0 * r.p_top->stderr_);
}

TEST_CASE("empty branch is NaN, not an error") {
    ChasingOptions o;
    o.runs = 1;
    o.rejection = true;
    o.coupled.dt = 1e-3;
    const auto r = chasing_experiment(0.2, 0.1, 0.25, 0.1, o, 25);
    CHECK(r.n_top + r.n_bottom == 1);
    if (r.n_top == 0) CHECK(std::isnan(r.p_close.mean));
    else CHECK(std::isnan(r.mean_neg_y_bottom.mean));
    CHECK_THROWS_AS(chasing_experiment(0.3, 0.1, 0.25, 0.1, o, 25), PreconditionError);
    CHECK_THROWS_AS(chasing_experiment(0.2, -0.3, 0.25, 0.1, o, 25), PreconditionError);
}

TEST_CASE("uniqueness refinement") {
    const std::vector<double> dts{std::ldexp(1.0, -6), std::ldexp(1.0, -8), std::ldexp(1.0, -10)};
    const auto same = uniqueness_refinement(0.5, 0.25, dts, 1.0, {26, 0}, SchemeKind::direct_euler, SchemeKind::direct_euler);
    for (double d : same.divergence) CHECK(d == 0.0);
    const auto t = uniqueness_refinement(0.5, 0.25, dts, 1.0, {26, 0});
    REQUIRE(t.divergence.size() == 3);
    for (double d : t.divergence) CHECK(d >= 0.0);
    CHECK_THROWS_AS(uniqueness_refinement(0.5, 0.25, {1e-3, 1e-2}, 1.0, {26, 0}), PreconditionError);
    CHECK_THROWS_AS(uniqueness_refinement(0.0, 0.25, dts, 1.0, {26, 0}), PreconditionError);
}

TEST_CASE("two-scheme sample uses the summed fine noise") {
    const auto s = two_scheme_sample(0.5, 0.25, 1.0 / 64, 1.0 / 256, 1.0, {27, 0});
    const auto w = gen_path({27, 0}, 256, 1.0 / 256);
    const auto c = coarsen(w.increments, 4);
    REQUIRE(s.dw.size() == c.size());
    for (std::size_t k = 0; k < c.size(); ++k) CHECK(s.dw[k] == doctest::Approx(c[k]).epsilon(1e-13));
}

TEST_CASE("excursions") {
    const auto s = manual({0.0, 1.0, 0.0, 1.0, 0.0}, {0.0, 1.0, 0.0, 1.0, 0.0}, 0.25);
    const auto e = excursion_agreement(s, 0.5);
    REQUIRE(e.size() == 2);
    for (const auto& x : e) {
        CHECK(x.max_z == 0.0);
        CHECK(x.max_m == 1.0);
        CHECK(x.complete);
    }
    CHECK(excursion_agreement(s, 2.0).empty());
    const auto d = manual({0.0, 1.0, 0.0}, {0.0, 0.8, 0.0}, 0.25);
    const auto f = excursion_agreement(d, 0.5);
    REQUIRE(f.size() == 1);
    CHECK(f[0].max_z == doctest::Approx(0.2));
}

TEST_CASE("zero start is perturbed and counted") {
    CoupledOptions o;
    o.dt = 1e-3;
    const auto s = euler_coupled(0.5, 0.0, 0.25, CoupledMode::plain, o, {28, 0});
    CHECK(s.zero_perturbations >= 1);
}

TEST_CASE("halving budget exhaustion is a step failure") {
    CoupledOptions o;
    o.dt = 0.05;
    o.max_halvings = 0;
    bool failed = false;
    for (std::uint64_t i = 0; i < 200 && !failed; ++i) {
        try {
            (void)euler_coupled(0.01, 0.0, 0.25, CoupledMode::q1, o, {29, i});
        } catch (const StepFailure&) {
            failed = true;
        }
    }
    CHECK(failed);
}

TEST_CASE("argument checks") {
    CoupledOptions o;
    CHECK_THROWS_AS(euler_coupled(1.5, 0.0, 0.25, CoupledMode::q1, o, {1, 0}), DomainError);
    CHECK_THROWS_AS(euler_coupled(0.5, 0.0, 0.6, CoupledMode::plain, o, {1, 0}), ParameterError);
    o.dt = 0.0;
    CHECK_THROWS_AS(euler_coupled(0.5, 0.0, 0.25, CoupledMode::plain, o, {1, 0}), ParameterError);
}
