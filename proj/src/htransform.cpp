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

#include "degsde/htransform.hpp"

#include "degsde/error.hpp"
#include "degsde/quadrature.hpp"

#include <algorithm>
#include <cmath>

namespace degsde {
namespace {

void check_alpha(double alpha) {
    if (!(alpha > 0.0 && alpha < 0.5)) throw ParameterError("alpha must lie in (0, 1/2)");
}

bool in_domain(ConditioningMode mode, double x) {
    switch (mode) {
    case ConditioningMode::q1: return x > 0.0 && x < 1.0;
    case ConditioningMode::q0: return x > 0.0 && x < 1.0;
    case ConditioningMode::qinf: return x > 0.0 && std::isfinite(x);
    }
    return false;
}

struct SubStep {
    double h;
    double dw;
    int depth;
};

// Hit test of `level` between v0 and v1 (V coordinate, diffusion sigma).
// Returns the fraction of the step at which the hit is placed.
std::optional<double> crossing(double v0, double v1, double level, double h, double sigma,
                               UniformStream& uniforms) {
    const double a = v0 - level;
    const double b = v1 - level;
    if (a * b <= 0.0) return a == b ? 0.0 : std::clamp(a / (a - b), 0.0, 1.0);
    const double p = std::exp(-2.0 * a * b / (sigma * sigma * h));
    if (p > 1e-300 && uniforms() < p) return 1.0;
    return std::nullopt;
}

} // namespace

std::string_view to_string(ConditioningMode mode) noexcept {
    switch (mode) {
    case ConditioningMode::q1: return "Q1";
    case ConditioningMode::q0: return "Q0";
    case ConditioningMode::qinf: return "Qinf";
    }
    return "unknown";
}

double drift(ConditioningMode mode, double x, double alpha) {
    switch (mode) {
    case ConditioningMode::q1:
        if (!(x > 0.0 && x <= 1.0)) throw DomainError("drift: Q1 state must lie in (0, 1]");
        return std::pow(x, 2.0 * alpha - 1.0);
    case ConditioningMode::qinf:
        if (!(x > 0.0) || !std::isfinite(x)) throw DomainError("drift: Qinf state must be positive");
        return std::pow(x, 2.0 * alpha - 1.0);
    case ConditioningMode::q0:
        if (!(x > 0.0 && x < 1.0)) throw DomainError("drift: Q0 state must lie in (0, 1)");
        return -std::pow(x, 2.0 * alpha) / (1.0 - x);
    }
    throw DomainError("drift: unknown mode");
}

DiffusionPath simulate_conditioned(ConditioningMode mode, double x0, double alpha,
                                   const ConditionedOptions& opt, SeedId seed) {
    check_alpha(alpha);
    if (!in_domain(mode, x0)) throw DomainError("simulate_conditioned: start outside the mode's domain");
    if (!(opt.dt > 0.0) || !(opt.dt_min > 0.0) || opt.rel_step < 0.0)
        throw ParameterError("simulate_conditioned: step parameters must be positive");

    const double c = 1.0 - alpha;
    const double inv_c = 1.0 / c;
    auto to_v = [&](double x) { return std::pow(x, c); };
    auto to_x = [&](double v) { return std::pow(v, inv_c); };

    auto mu = [&](double v) {
        if (mode == ConditioningMode::q0) {
            const double x = to_x(v);
            return -c * (std::pow(x, alpha) / (1.0 - x) + 0.5 * alpha / v);
        }
        return c * (1.0 - 0.5 * alpha) / v;
    };
    auto forbidden = [&](double v) {
        return mode == ConditioningMode::q0 ? v >= 1.0 : v <= 0.0;
    };
    auto step_size = [&](double v) {
        if (opt.rel_step <= 0.0) return opt.dt;
        const double s = mode == ConditioningMode::q0 ? std::min(v, 1.0 - v) : v;
        return std::clamp(opt.rel_step * s * s, opt.dt_min, opt.dt);
    };

    // Absorbing boundary in V and the recorded/stop levels.
    std::optional<double> absorb_v;
    double absorb_x = 0.0;
    if (mode == ConditioningMode::q1) absorb_v = 1.0, absorb_x = 1.0;
    if (mode == ConditioningMode::q0) absorb_v = 0.0, absorb_x = 0.0;
    std::vector<double> level_v(opt.levels.size());
    std::vector<bool> level_hit(opt.levels.size(), false);
    for (std::size_t j = 0; j < opt.levels.size(); ++j) level_v[j] = to_v(std::max(opt.levels[j], 0.0));
    const bool has_stop = opt.stop_level.has_value();
    const double stop_v = has_stop ? to_v(*opt.stop_level) : 0.0;

    NormalStream noise(seed, Lane::driving);
    NormalStream refine(seed, Lane::refine);
    UniformStream uniforms(seed, Lane::bridge);

    DiffusionPath path;
    path.alpha = alpha;
    path.origin = Origin::conditioned;
    path.times.push_back(0.0);
    path.values.push_back(x0);

    double t = 0.0;
    double v = to_v(x0);
    std::vector<SubStep> stack;
    std::size_t steps = 0;
    bool done = false;
    while (!done && t < opt.horizon) {
        if (++steps > opt.max_steps) throw StepFailure(t, to_x(v), "simulate_conditioned (step budget)");
        const double h = std::min(step_size(v), opt.horizon - t);
        stack.push_back({h, std::sqrt(h) * noise(), 0});
        while (!stack.empty() && !done) {
            const SubStep s = stack.back();
            stack.pop_back();
            double v1 = v + mu(v) * s.h + c * s.dw;
            if (forbidden(v1)) {
                if (s.depth >= opt.max_halvings)
                    throw StepFailure(t, to_x(v), "simulate_conditioned (halving budget)");
                const auto [first, second] = bridge_split(s.h, s.dw, refine());
                stack.push_back({0.5 * s.h, second, s.depth + 1});
                stack.push_back({0.5 * s.h, first, s.depth + 1});
                continue;
            }
            double end_frac = 1.0;
            double end_x = 0.0;
            if (absorb_v) {
                if (auto f = crossing(v, v1, *absorb_v, s.h, c, uniforms)) {
                    done = true;
                    end_frac = *f;
                    end_x = absorb_x;
                }
            }
            for (std::size_t j = 0; j < level_v.size(); ++j) {
                if (level_hit[j]) continue;
                if (auto f = crossing(v, v1, level_v[j], s.h, c, uniforms)) {
                    if (done && *f > end_frac) continue;
                    level_hit[j] = true;
                    path.hits.push_back({opt.levels[j], t + *f * s.h});
                }
            }
            if (has_stop && !done) {
                if (auto f = crossing(v, v1, stop_v, s.h, c, uniforms)) {
                    done = true;
                    end_frac = *f;
                    end_x = *opt.stop_level;
                }
            }
            if (done) {
                t += end_frac * s.h;
                v = to_v(end_x);
                path.hits.push_back({end_x, t});
                path.times.push_back(t);
                path.values.push_back(end_x);
                break;
            }
            t += s.h;
            v = v1;
            if (opt.store_path || t >= opt.horizon) {
                path.times.push_back(t);
                path.values.push_back(to_x(v));
            }
        }
        stack.clear();
    }
    if (!opt.store_path && path.times.back() != t) {
        path.times.push_back(t);
        path.values.push_back(to_x(v));
    }
    return path;
}

double green_bessel3(double x, double y) {
    if (!(x > 0.0 && x < 1.0 && y > 0.0 && y < 1.0))
        throw DomainError("green_bessel3: arguments must lie in (0, 1)");
    return y >= x ? 2.0 * y * y * (1.0 / y - 1.0) : 2.0 * y * y * (1.0 / x - 1.0);
}

double green_interval(double y, double z, double eta, double alpha) {
    if (!(eta > 0.0)) throw DomainError("green_interval: eta must be positive");
    if (!(std::abs(y) < eta && std::abs(z) < eta) || z == 0.0)
        throw DomainError("green_interval: need |y| < eta, |z| < eta, z != 0");
    const double w = std::pow(std::abs(z), -2.0 * alpha);
    return y < z ? w * (y + eta) * (eta - z) / eta : w * (z + eta) * (eta - y) / eta;
}

double green_additive_integral(double x, double alpha, double tol) {
    if (!(x > 0.0 && x < 1.0)) throw DomainError("green_additive_integral: x must lie in (0, 1)");
    auto f = [&](double y) {
        return std::pow(y, 2.0 * alpha - 2.0) * green_bessel3(x, y) * std::pow(y, -2.0 * alpha);
    };
    return integrate(f, 0.0, x, 0.5 * tol).value + integrate(f, x, 1.0, 0.5 * tol).value;
}

double mean_exit_time(double y, double eta, double alpha, double tol) {
    if (!(eta > 0.0)) throw DomainError("mean_exit_time: eta must be positive");
    if (!(std::abs(y) < eta)) throw DomainError("mean_exit_time: need |y| < eta");
    if (!(alpha >= 0.0 && alpha < 0.5)) throw ParameterError("mean_exit_time: alpha must lie in [0, 1/2)");
    const double p = 2.0 * alpha;
    const double cell = 1e-3 * eta;
    std::vector<double> pts{-eta, -cell, cell, eta, y};
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        const double lo = pts[i];
        const double hi = pts[i + 1];
        const bool above = 0.5 * (lo + hi) > y;
        if (lo >= -cell && hi <= cell) {
            // G = |z|^(-2 alpha) (c0 + c1 z) on this branch.
            const double c0 = above ? (y + eta) : (eta - y);
            const double c1 = above ? -(y + eta) / eta : (eta - y) / eta;
            total += power_linear_integral(p, c0, c1, lo, hi);
        } else {
            auto g = [&](double z) {
                const double w = std::pow(std::abs(z), -p);
                return above ? w * (y + eta) * (eta - z) / eta : w * (z + eta) * (eta - y) / eta;
            };
            total += integrate(g, lo, hi, tol * std::pow(eta, 2.0 - p)).value;
        }
    }
    return total;
}

double bessel3_hit_prob(double x, double a) {
    if (!(a > 0.0 && a <= x && x < 1.0)) throw DomainError("bessel3_hit_prob: need 0 < a <= x < 1");
    return (1.0 / x - 1.0) / (1.0 / a - 1.0);
}

double bessel3_mean_exit(double x) {
    if (!(x >= 0.0 && x <= 1.0)) throw DomainError("bessel3_mean_exit: need 0 <= x <= 1");
    return (1.0 - x * x) / 3.0;
}

Bessel3Report bessel3_correspondence_check(const DiffusionPath& path, double alpha,
                                           const std::vector<double>& levels) {
    Bessel3Report r;
    const std::size_t n = path.size();
    r.clock.resize(n);
    r.values = path.values;
    if (n == 0) return r;
    r.clock[0] = 0.0;
    for (std::size_t k = 0; k + 1 < n; ++k) {
        const double f0 = std::pow(std::abs(path.values[k]), 2.0 * alpha);
        const double f1 = std::pow(std::abs(path.values[k + 1]), 2.0 * alpha);
        r.clock[k + 1] = r.clock[k] + 0.5 * (f0 + f1) * (path.times[k + 1] - path.times[k]);
    }
    r.exit_clock = r.clock.back();
    auto clock_at = [&](double t) {
        auto it = std::upper_bound(path.times.begin(), path.times.end(), t);
        if (it == path.times.begin()) return 0.0;
        if (it == path.times.end()) return r.clock.back();
        const std::size_t k = static_cast<std::size_t>(it - path.times.begin()) - 1;
        const double span = path.times[k + 1] - path.times[k];
        const double f = span > 0.0 ? (t - path.times[k]) / span : 0.0;
        return r.clock[k] + f * (r.clock[k + 1] - r.clock[k]);
    };
    for (double level : levels) {
        const auto t = path.first_hit(level);
        r.level_hits.push_back(t ? std::optional(clock_at(*t)) : std::nullopt);
    }
    return r;
}

} // namespace degsde
