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

#include "degsde/speed_timechange.hpp"

#include "degsde/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace degsde {
namespace {

void check_alpha(double alpha) {
    if (!(alpha > 0.0 && alpha < 0.5))
        throw ParameterError("alpha must lie in (0, 1/2) for a finite speed functional");
}

struct LevelCrossing {
    std::size_t step;
    double fraction;
};

// First step of `w` on which `level` is crossed: a sign change, or a bridge
// excursion accepted by the uniform draw keyed by (step, slot).
std::optional<LevelCrossing> first_crossing(std::span<const double> w, double dt, double level,
                                            std::size_t slot, std::size_t slots,
                                            const UniformStream& uniforms,
                                            std::size_t first_step = 0) {
    for (std::size_t k = first_step; k + 1 < w.size(); ++k) {
        const double a = w[k] - level;
        const double b = w[k + 1] - level;
        if (a * b <= 0.0) {
            const double frac = a == b ? 0.0 : a / (a - b);
            return LevelCrossing{k, std::clamp(frac, 0.0, 1.0)};
        }
        const double p = std::exp(-2.0 * a * b / dt);
        if (p > 1e-300 && uniforms.at(k * slots + slot) < p) return LevelCrossing{k, 0.5};
    }
    return std::nullopt;
}

} // namespace

double segment_speed_integral(double b0, double b1, double h, double alpha) {
    const double p = 1.0 - 2.0 * alpha;
    const double u0 = std::abs(b0);
    const double u1 = std::abs(b1);
    if (b0 * b1 < 0.0) {
        // Straddling: integrate |b0 + s * slope|^(-2 alpha) through the zero.
        return h * (std::pow(u0, p) + std::pow(u1, p)) / (p * (u0 + u1));
    }
    const double big = std::max(u0, u1);
    if (big == 0.0) return std::numeric_limits<double>::infinity();
    const double r = (std::min(u0, u1) - big) / big; // in [-1, 0]
    if (r == 0.0) return h * std::pow(big, -2.0 * alpha);
    // h * mean of u^(-2 alpha) over u in [big(1+r), big], stable for small r.
    return h * std::pow(big, -2.0 * alpha) * std::expm1(p * std::log1p(r)) / (p * r);
}

AdditiveFunctional additive_functional(const BrownianPath& b, double alpha) {
    check_alpha(alpha);
    const auto w = b.values();
    AdditiveFunctional af;
    af.base_times.resize(w.size());
    af.values.resize(w.size());
    af.base_times[0] = 0.0;
    af.values[0] = 0.0;
    for (std::size_t k = 0; k + 1 < w.size(); ++k) {
        af.base_times[k + 1] = b.dt * static_cast<double>(k + 1);
        af.values[k + 1] = af.values[k] + segment_speed_integral(w[k], w[k + 1], b.dt, alpha);
    }
    return af;
}

DiffusionPath time_change_solution(const BrownianPath& b_in, double alpha, double horizon,
                                   const TimeChangeOptions& options) {
    check_alpha(alpha);
    if (!(horizon >= 0.0) || !std::isfinite(horizon))
        throw ParameterError("time_change_solution: horizon must be finite and >= 0");
    if (!(options.out_dt > 0.0)) throw ParameterError("time_change_solution: out_dt must be > 0");

    DiffusionPath out;
    out.alpha = alpha;
    out.origin = Origin::time_change;
    if (horizon == 0.0) {
        out.times = {0.0};
        out.values = {b_in.w0};
        return out;
    }

    BrownianPath b = b_in;
    AdditiveFunctional af = additive_functional(b, alpha);
    while (af.values.back() < horizon) {
        if (b.steps() >= options.max_base_steps) throw HorizonUnreachable(af.values.back(), horizon);
        const std::size_t more = std::min(b.steps(), options.max_base_steps - b.steps());
        b.extend(more);
        af = additive_functional(b, alpha);
    }
    const auto w = b.values();

    const auto n_out = static_cast<std::size_t>(std::floor(horizon / options.out_dt + 1e-9));
    out.times.reserve(n_out + 2);
    out.values.reserve(n_out + 2);
    auto push = [&](double t) {
        // gamma(t): A_k <= t <= A_{k+1}, linear within the step.
        auto it = std::upper_bound(af.values.begin(), af.values.end(), t);
        std::size_t k = it == af.values.begin() ? 0 : static_cast<std::size_t>(it - af.values.begin()) - 1;
        if (k + 1 >= af.values.size()) k = af.values.size() - 2;
        const double span = af.values[k + 1] - af.values[k];
        const double frac = span > 0.0 ? std::clamp((t - af.values[k]) / span, 0.0, 1.0) : 0.0;
        out.times.push_back(t);
        out.values.push_back(w[k] + frac * (w[k + 1] - w[k]));
    };
    for (std::size_t j = 0; j <= n_out; ++j) push(options.out_dt * static_cast<double>(j));
    if (horizon - out.times.back() > 1e-12 * horizon) push(horizon);

    if (!options.levels.empty()) {
        const UniformStream uniforms(b.seed, Lane::bridge);
        for (std::size_t j = 0; j < options.levels.size(); ++j) {
            const auto c = first_crossing(w, b.dt, options.levels[j], j, options.levels.size(), uniforms);
            if (!c) continue;
            const double t = af.values[c->step] + c->fraction * (af.values[c->step + 1] - af.values[c->step]);
            if (t <= horizon) out.hits.push_back({options.levels[j], t});
        }
    }
    return out;
}

BaseExit locate_exit(SeedId seed, double x, double lower, double upper, double base_dt) {
    if (!(lower < x && x < upper)) throw DomainError("locate_exit: start must lie inside (lower, upper)");
    if (!(base_dt > 0.0)) throw ParameterError("locate_exit: base_dt must be > 0");
    const double levels[2] = {lower, upper};
    const UniformStream uniforms(seed, Lane::bridge);

    std::size_t chunk = std::max<std::size_t>(1024, static_cast<std::size_t>(0.25 / base_dt));
    BrownianPath b = gen_path(seed, chunk, base_dt, x);
    std::vector<double> w = b.values();
    std::size_t scanned = 0;
    constexpr std::size_t kMaxSteps = std::size_t{1} << 28;
    std::optional<LevelCrossing> exit;
    std::size_t side = 0;
    for (;;) {
        for (std::size_t j = 0; j < 2; ++j) {
            const auto c = first_crossing(w, base_dt, levels[j], j, 2, uniforms, scanned);
            if (c && (!exit || c->step < exit->step)) exit = c, side = j;
        }
        if (exit) break;
        if (b.steps() >= kMaxSteps) throw HorizonUnreachable(0.0, 0.0);
        scanned = b.steps();
        b.extend(b.steps());
        w = b.values();
    }
    b.increments.resize(exit->step + 1);
    return {std::move(b), exit->step, exit->fraction, levels[side]};
}

DiffusionPath solve_until_exit(SeedId seed, double x, double alpha, double lower, double upper,
                               double base_dt, double out_dt) {
    check_alpha(alpha);
    const BaseExit e = locate_exit(seed, x, lower, upper, base_dt);
    const auto af = additive_functional(e.base, alpha);
    const double t_exit = af.values[e.step] + e.fraction * (af.values[e.step + 1] - af.values[e.step]);

    TimeChangeOptions opt;
    opt.out_dt = out_dt;
    opt.levels = {lower, upper};
    return time_change_solution(e.base, alpha, t_exit, opt);
}

double occupation_fraction(const DiffusionPath& x, double eps, double horizon) {
    if (!(eps > 0.0)) throw ParameterError("occupation_fraction: eps must be > 0");
    if (!(horizon > 0.0)) throw ParameterError("occupation_fraction: horizon must be > 0");
    double inside = 0.0;
    for (std::size_t k = 0; k + 1 < x.size(); ++k) {
        const double t0 = x.times[k];
        if (t0 >= horizon) break;
        const double t1 = std::min(x.times[k + 1], horizon);
        const double w0 = std::abs(x.values[k]) < eps ? 1.0 : 0.0;
        const double w1 = std::abs(x.values[k + 1]) < eps ? 1.0 : 0.0;
        inside += 0.5 * (w0 + w1) * (t1 - t0);
    }
    return std::clamp(inside / horizon, 0.0, 1.0);
}

} // namespace degsde
