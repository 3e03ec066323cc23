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

#include <algorithm>
#include <cmath>
#include <cstdint>

namespace degsde {
namespace {

constexpr std::uint64_t kBottomOffset = std::uint64_t{1} << 40;
constexpr std::uint64_t kRejectionOffset = std::uint64_t{1} << 41;

void check_alpha(double alpha) {
    if (!(alpha > 0.0 && alpha < 0.5)) throw ParameterError("alpha must lie in (0, 1/2)");
}

// A step or a piece of one. Fixed-step runs address every piece by its fine
// grid index and its dyadic node below that index, so bridge draws depend
// only on where the piece sits in time.
struct SubStep {
    double h;
    double dw;
    int depth;
    std::uint64_t fine = 0;
    int level = -1;  // -1 marks a whole step of skeleton_factor fine pieces
    std::uint64_t pos = 0;
};

std::uint64_t node_key(std::uint64_t fine, int level, std::uint64_t pos) {
    std::uint64_t z = fine * 0x9E3779B97F4A7C15ULL + ((std::uint64_t{1} << level) | pos);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

double series_value(Series s, double x, double y) {
    switch (s) {
    case Series::x: return x;
    case Series::y: return y;
    case Series::abs_y: return std::abs(y);
    case Series::m: return std::max(std::abs(x), std::abs(y));
    case Series::z: return std::abs(x - y);
    }
    return 0.0;
}

constexpr Series kAllSeries[] = {Series::x, Series::y, Series::abs_y, Series::m, Series::z};

double signed_power(double v, double p) { return std::copysign(std::pow(std::abs(v), p), v); }

} // namespace

std::string_view to_string(CoupledMode mode) noexcept {
    switch (mode) {
    case CoupledMode::plain: return "plain";
    case CoupledMode::q1: return "Q1";
    case CoupledMode::q0: return "Q0";
    }
    return "unknown";
}

std::string_view to_string(StopReason reason) noexcept {
    switch (reason) {
    case StopReason::x_hit_zero: return "x-hit-zero";
    case StopReason::x_hit_one: return "x-hit-one";
    case StopReason::m_level: return "m-level";
    case StopReason::horizon: return "horizon";
    case StopReason::step_budget: return "step-budget";
    }
    return "unknown";
}

double CoupledSample::m(std::size_t k) const { return std::max(std::abs(x.at(k)), std::abs(y.at(k))); }

double CoupledSample::z(std::size_t k) const { return std::abs(x.at(k) - y.at(k)); }

std::optional<double> CoupledSample::r(std::size_t k) const {
    if (!(x.at(k) > 0.0 && y.at(k) > 0.0)) return std::nullopt;
    return std::pow(x[k], 1.0 - alpha) - std::pow(y[k], 1.0 - alpha);
}

std::optional<double> CoupledSample::first_hit(Series series, double level) const {
    for (const auto& h : hits)
        if (h.series == series && h.level == level) return h.time;
    return std::nullopt;
}

CoupledSample euler_coupled(double x0, double y0, double alpha, CoupledMode mode,
                            const CoupledOptions& opt, SeedId seed) {
    check_alpha(alpha);
    if (!std::isfinite(x0) || !std::isfinite(y0)) throw DomainError("euler_coupled: nonfinite start");
    if (mode != CoupledMode::plain && !(x0 > 0.0 && x0 < 1.0))
        throw DomainError("euler_coupled: conditioned modes need x0 in (0, 1)");
    if (!(opt.dt > 0.0) || !(opt.dt_min > 0.0) || opt.rel_step < 0.0 || opt.skeleton_factor == 0)
        throw ParameterError("euler_coupled: invalid step parameters");
    const StopCondition& stop = opt.stop;
    if (stop.rule == StopRule::m_hits_level && !(stop.level > 0.0))
        throw ParameterError("euler_coupled: stop level must be positive");
    if (stop.rule == StopRule::fixed_horizon && !(std::isfinite(stop.horizon) && stop.horizon >= 0.0))
        throw ParameterError("euler_coupled: fixed horizon must be finite and nonnegative");
    if (stop.rule == StopRule::x_exits_unit && !(x0 > 0.0 && x0 < 1.0))
        throw DomainError("euler_coupled: exit rule needs x0 in (0, 1)");

    const double a = alpha;
    NormalStream noise(seed, Lane::driving);
    NormalStream refine(seed, Lane::refine);
    NormalStream aux(seed, Lane::aux);
    UniformStream uniforms(seed, Lane::bridge);

    // Drift of either component is |state|^a * factor(X).
    auto drift_factor = [&](double x) {
        switch (mode) {
        case CoupledMode::q1: return std::pow(x, a - 1.0);
        case CoupledMode::q0: return -std::pow(x, a) / (1.0 - x);
        case CoupledMode::plain: break;
        }
        return 0.0;
    };
    auto step_size = [&](double x, double y) {
        if (opt.rel_step <= 0.0) return opt.dt;
        const double m = std::max(std::abs(x), std::abs(y));
        double scale = std::pow(m, 2.0 - 2.0 * a);
        if (mode == CoupledMode::q1 && x > 0.0) scale = std::min(scale, std::pow(x, 2.0 - 2.0 * a));
        if (mode == CoupledMode::q0) scale = std::min(scale, (1.0 - x) * (1.0 - x));
        return std::clamp(opt.rel_step * scale, opt.dt_min, opt.dt);
    };
    auto forbidden = [&](double x1) {
        return (mode == CoupledMode::q1 && x1 <= 0.0) || (mode == CoupledMode::q0 && x1 >= 1.0);
    };
    std::vector<double> boundaries;
    if (mode == CoupledMode::q1) boundaries = {1.0};
    else if (mode == CoupledMode::q0) boundaries = {0.0};
    else if (stop.rule == StopRule::x_exits_unit) boundaries = {0.0, 1.0};

    CoupledSample s;
    s.alpha = alpha;
    s.mode = mode;
    s.times.push_back(0.0);
    s.x.push_back(x0);
    s.y.push_back(y0);

    const std::size_t n_series = std::size(kAllSeries);
    std::vector<bool> recorded(opt.levels.size() * n_series, false);

    double t = 0.0;
    double x = x0;
    double y = y0;
    std::vector<SubStep> stack;
    std::size_t steps = 0;
    bool done = false;
    const double fsk = static_cast<double>(opt.skeleton_factor);
    const bool fixed = opt.rel_step <= 0.0;
    // Splits a piece into its two halves, or a skeleton step into its fine pieces.
    auto split = [&](const SubStep& sub) {
        if (fixed && sub.level < 0) {
            const double hf = sub.h / fsk;
            for (std::size_t j = opt.skeleton_factor; j-- > 0;)
                stack.push_back({hf, std::sqrt(hf) * noise.at(sub.fine + j), sub.depth + 1, sub.fine + j, 0, 0});
            return;
        }
        const double z = fixed ? refine.at(node_key(sub.fine, sub.level, sub.pos)) : refine();
        const auto [first, second] = bridge_split(sub.h, sub.dw, z);
        stack.push_back({0.5 * sub.h, second, sub.depth + 1, sub.fine, sub.level + 1, 2 * sub.pos + 1});
        stack.push_back({0.5 * sub.h, first, sub.depth + 1, sub.fine, sub.level + 1, 2 * sub.pos});
    };
    auto too_coarse = [&](const SubStep& sub, double x, double y) {
        if (!(opt.refine_rel > 0.0) || sub.h <= opt.dt_min || sub.level >= 62) return false;
        const double m = std::min(std::abs(x), std::abs(y));
        return sub.h > opt.refine_rel * std::pow(m, 2.0 - 2.0 * a);
    };
    while (!done) {
        if (!(t < stop.horizon)) {
            s.reason = StopReason::horizon;
            break;
        }
        if (steps++ >= opt.max_steps) {
            s.reason = StopReason::step_budget;
            break;
        }
        const double h = std::min(step_size(x, y), stop.horizon - t);
        double dw = 0.0;
        const std::uint64_t fine0 = noise.position();
        if (fixed && opt.skeleton_factor > 1) {
            for (std::size_t j = 0; j < opt.skeleton_factor; ++j) dw += noise();
            dw *= std::sqrt(h / fsk);
            stack.push_back({h, dw, 0, fine0, -1, 0});
        } else {
            dw = std::sqrt(h) * noise();
            stack.push_back({h, dw, 0, fine0, 0, 0});
        }
        while (!stack.empty() && !done) {
            const SubStep sub = stack.back();
            stack.pop_back();
            if (y == 0.0) {
                y = 1e-15 * std::sqrt(sub.h) * aux();
                ++s.zero_perturbations;
            }
            if (too_coarse(sub, x, y)) {
                split(sub);
                continue;
            }
            const double ax = std::pow(std::abs(x), a);
            const double ay = std::pow(std::abs(y), a);
            const double fx = drift_factor(x);
            const double x1 = x + ax * sub.dw + ax * fx * sub.h;
            const double y1 = y + ay * sub.dw + ay * fx * sub.h;
            if (forbidden(x1)) {
                if (sub.depth >= opt.max_halvings)
                    throw StepFailure(t, x, "euler_coupled (halving budget)");
                split(sub);
                continue;
            }

            double end_f = 2.0;
            double end_x = 0.0;
            StopReason reason = StopReason::horizon;
            for (double b : boundaries) {
                const double da = x - b;
                const double db = x1 - b;
                std::optional<double> f;
                if (da * db <= 0.0) f = da == db ? 0.0 : std::clamp(da / (da - db), 0.0, 1.0);
                else if (ax > 0.0) {
                    const double p = std::exp(-2.0 * da * db / (ax * ax * sub.h));
                    if (p > 1e-300 && uniforms() < p) f = 1.0;
                }
                if (f && *f < end_f) {
                    end_f = *f;
                    end_x = b;
                    reason = b == 0.0 ? StopReason::x_hit_zero : StopReason::x_hit_one;
                }
            }
            if (stop.rule == StopRule::m_hits_level) {
                const double m0 = std::max(std::abs(x), std::abs(y));
                const double m1 = std::max(std::abs(x1), std::abs(y1));
                if (m0 >= stop.level || m1 >= stop.level) {
                    const double f = m0 >= stop.level ? 0.0 : (stop.level - m0) / (m1 - m0);
                    if (f < end_f) {
                        end_f = f;
                        end_x = x + f * (x1 - x);
                        reason = StopReason::m_level;
                    }
                }
            }
            const double limit_f = std::min(end_f, 1.0);
            for (std::size_t j = 0; j < opt.levels.size(); ++j) {
                const double level = opt.levels[j];
                for (std::size_t q = 0; q < n_series; ++q) {
                    if (recorded[j * n_series + q]) continue;
                    const Series ser = kAllSeries[q];
                    const double v0 = series_value(ser, x, y) - level;
                    const double v1 = series_value(ser, x1, y1) - level;
                    std::optional<double> f;
                    if (v0 * v1 <= 0.0) f = v0 == v1 ? 0.0 : std::clamp(v0 / (v0 - v1), 0.0, 1.0);
                    else if (ser == Series::x && ax > 0.0) {
                        const double p = std::exp(-2.0 * v0 * v1 / (ax * ax * sub.h));
                        if (p > 1e-300 && uniforms() < p) f = 1.0;
                    }
                    if (f && *f <= limit_f) {
                        recorded[j * n_series + q] = true;
                        s.hits.push_back({ser, level, t + *f * sub.h});
                    }
                }
            }
            if (end_f <= 1.0) {
                done = true;
                s.reason = reason;
                s.terminal_interpolated = true;
                t += end_f * sub.h;
                s.times.push_back(t);
                s.x.push_back(end_x);
                // Coincident paths stay coincident at the terminal point.
                s.y.push_back(y == x ? end_x : y + end_f * (y1 - y));
                s.dw.push_back(end_f * sub.dw);
                break;
            }
            t += sub.h;
            x = x1;
            y = y1;
            s.times.push_back(t);
            s.x.push_back(x);
            s.y.push_back(y);
            s.dw.push_back(sub.dw);
        }
        stack.clear();
    }
    return s;
}

double r_identity_residual(const CoupledSample& s) {
    if (s.size() == 0) return 0.0;
    if (!(s.x[0] > 0.0 && s.y[0] > 0.0)) throw DomainError("r_identity_residual: start must be positive");
    const double a = s.alpha;
    const double c = 1.0 - a;
    const double r0 = std::pow(s.x[0], c) - std::pow(s.y[0], c);
    if (r0 == 0.0) return 0.0;
    const std::size_t n = s.terminal_interpolated ? s.size() - 1 : s.size();
    auto integrand = [&](std::size_t k) { return std::pow(s.x[k], a - 1.0) * std::pow(s.y[k], a - 1.0); };
    double integral = 0.0;
    double worst = 0.0;
    for (std::size_t k = 1; k < n; ++k) {
        if (!(s.x[k] > 0.0 && s.y[k] > 0.0)) break;
        integral += 0.5 * (integrand(k - 1) + integrand(k)) * (s.times[k] - s.times[k - 1]);
        const double direct = std::pow(s.x[k], c) - std::pow(s.y[k], c);
        const double formula = r0 * std::exp(0.5 * a * c * integral);
        worst = std::max(worst, std::abs(direct - formula) / std::abs(r0));
    }
    return worst;
}

TransformResiduals transform_residuals(const CoupledSample& s, double alpha, double floor) {
    if (!(alpha >= 0.0 && alpha < 0.5)) throw ParameterError("transform_residuals: alpha must lie in [0, 1/2)");
    if (!(floor >= 0.0)) throw ParameterError("transform_residuals: floor must be nonnegative");
    if (s.dw.size() + 1 != s.size()) throw PreconditionError("transform_residuals: noise and grid sizes differ");
    const double a = alpha;
    const double c = 1.0 - a;
    const double k2 = 0.5 * a * c;

    struct Window {
        bool open = false;
        double cum = 0.0;
        std::optional<double> worst;
        void step(bool ok, double diff) {
            if (!ok) {
                open = false;
                return;
            }
            if (!open) cum = 0.0, open = true;
            cum += diff;
            worst = std::max(worst.value_or(0.0), std::abs(cum));
        }
    };
    Window xw, xtw, yw, sw;
    TransformResiduals out;
    bool sum_open = false;
    double drift_series = 0.0;

    const std::size_t steps = s.terminal_interpolated ? s.dw.size() - std::min<std::size_t>(1, s.dw.size()) : s.dw.size();
    for (std::size_t k = 0; k < steps; ++k) {
        const double x = s.x[k], x1 = s.x[k + 1];
        const double y = s.y[k], y1 = s.y[k + 1];
        const double h = s.times[k + 1] - s.times[k];
        const bool x_ok = x > 0.0 && x1 > 0.0;
        const bool x_smooth = x_ok && std::min(x, x1) >= floor;
        const bool y_smooth = std::min(std::abs(y), std::abs(y1)) >= floor;
        double dw_plain = s.dw[k];
        if (x_ok && s.mode == CoupledMode::q1) dw_plain += std::pow(x, a - 1.0) * h;
        if (x_ok && s.mode == CoupledMode::q0) dw_plain -= std::pow(x, a) / (1.0 - x) * h;

        if (x_smooth) {
            const double lhs = std::pow(x1, c) - std::pow(x, c);
            xw.step(true, lhs - (c * dw_plain - k2 * std::pow(x, a - 1.0) * h));
            if (s.mode == CoupledMode::q1)
                xtw.step(true, lhs - (c * s.dw[k] + c * (1.0 - 0.5 * a) * std::pow(x, a - 1.0) * h));
        } else {
            xw.step(false, 0.0);
            xtw.step(false, 0.0);
        }

        const bool y_ok = y != 0.0 && y1 != 0.0 && (y > 0.0) == (y1 > 0.0) &&
                          y_smooth && (s.mode == CoupledMode::plain || x_ok);
        if (y_ok) {
            const double lhs = std::pow(std::abs(y1), c) - std::pow(std::abs(y), c);
            const double sg = y > 0.0 ? 1.0 : -1.0;
            yw.step(true, lhs - (c * sg * dw_plain - k2 * std::pow(std::abs(y), a - 1.0) * h));
        } else {
            yw.step(false, 0.0);
        }

        const bool sum_ok = y < 0.0 && y1 < 0.0 && x_ok;
        if (sum_ok) {
            const double s0 = std::pow(x, c) + std::pow(-y, c);
            const double lhs = std::pow(x1, c) + std::pow(-y1, c) - s0;
            const double rhs = -k2 * (std::pow(x, a - 1.0) + std::pow(-y, a - 1.0)) * h;
            if (!sum_open) {
                ++out.sum_windows;
                sum_open = true;
                drift_series = s0;
            }
            const double next = drift_series + rhs;
            if (!(next < drift_series)) out.sum_decreasing = false;
            drift_series = next;
            sw.step(x_smooth && y_smooth, lhs - rhs);
        } else {
            sum_open = false;
            sw.step(false, 0.0);
        }
    }
    out.x_power = xw.worst;
    out.x_power_tilde = xtw.worst;
    out.abs_y_power = yw.worst;
    out.sum_power = sw.worst;
    return out;
}

ChasingReport chasing_experiment(double x0, double y0, double alpha, double delta,
                                 const ChasingOptions& opt, std::uint64_t master_seed) {
    check_alpha(alpha);
    if (!(x0 > 0.0 && x0 < 0.25)) throw PreconditionError("chasing: x0 must lie in (0, 1/4)");
    if (!(y0 >= -x0 && y0 <= x0)) throw PreconditionError("chasing: y0 must lie in [-x0, x0]");
    if (!(delta > 0.0 && delta < 1.0)) throw ParameterError("chasing: delta must lie in (0, 1)");
    if (opt.runs == 0) throw ParameterError("chasing: runs must be positive");

    ChasingReport rep;
    rep.x0 = x0;
    rep.y0 = y0;
    rep.alpha = alpha;
    rep.delta = delta;

    CoupledOptions co = opt.coupled;
    co.stop.rule = StopRule::x_exits_unit;
    const auto n = static_cast<std::int64_t>(opt.runs);
    const double nan = std::numeric_limits<double>::quiet_NaN();

    // Terminal Y per run, NaN when the run is not in the branch.
    auto run_branch = [&](CoupledMode mode, std::uint64_t offset, std::vector<double>& y_end,
                          std::vector<int>& side) {
        y_end.assign(opt.runs, nan);
        side.assign(opt.runs, -1);
#pragma omp parallel for schedule(dynamic, 16)
        for (std::int64_t i = 0; i < n; ++i) {
            try {
                const auto s = euler_coupled(x0, y0, alpha, mode, co,
                                             {master_seed, offset + static_cast<std::uint64_t>(i)});
                if (s.reason == StopReason::x_hit_one) side[i] = 1;
                else if (s.reason == StopReason::x_hit_zero) side[i] = 0;
                y_end[i] = s.y.back();
            } catch (const StepFailure&) {
                side[i] = -1;
            }
        }
    };

    std::vector<double> top_close, top_y, bottom_y;
    std::vector<double> y_end;
    std::vector<int> side;
    auto collect = [&](int want_top, int want_bottom) {
        for (std::size_t i = 0; i < opt.runs; ++i) {
            if (side[i] == 1 && want_top) {
                top_y.push_back(y_end[i]);
                top_close.push_back(y_end[i] > 1.0 - delta ? 1.0 : 0.0);
            } else if (side[i] == 0 && want_bottom) {
                bottom_y.push_back(-y_end[i]);
            } else if (side[i] < 0) {
                ++rep.excluded;
            }
        }
    };
    if (opt.rejection) {
        run_branch(CoupledMode::plain, kRejectionOffset, y_end, side);
        collect(1, 1);
        const std::size_t classified = top_y.size() + bottom_y.size();
        if (classified > 0) rep.p_top = proportion(top_y.size(), classified, opt.ci_level);
    } else {
        run_branch(CoupledMode::q1, 0, y_end, side);
        collect(1, 0);
        run_branch(CoupledMode::q0, kBottomOffset, y_end, side);
        collect(0, 1);
    }
    rep.n_top = top_y.size();
    rep.n_bottom = bottom_y.size();
    auto est = [&](const std::vector<double>& v) {
        return v.empty() ? Estimate::empty_branch(opt.ci_level) : estimate(v, opt.ci_level);
    };
    rep.p_close = est(top_close);
    rep.mean_y_top = est(top_y);
    rep.mean_neg_y_bottom = est(bottom_y);
    return rep;
}

EnvelopeReport envelope_check(const CoupledSample& s, double lambda) {
    if (s.mode != CoupledMode::q1) throw PreconditionError("envelope_check: needs a Q1 sample");
    if (s.size() == 0) throw PreconditionError("envelope_check: empty sample");
    const double x0 = s.x[0];
    const double y0 = s.y[0];
    if (!(x0 > 0.0 && x0 < 0.25)) throw PreconditionError("envelope_check: x0 must lie in (0, 1/4)");
    if (!(y0 >= -x0 && y0 <= x0)) throw PreconditionError("envelope_check: y0 must lie in [-x0, x0]");
    if (!(lambda >= 4.0 * x0)) throw PreconditionError("envelope_check: lambda must be at least 4 x0");

    EnvelopeReport rep;
    if (y0 == x0) {
        rep.vacuous = true;
        return rep;
    }
    const double a = s.alpha;
    const double c = 1.0 - a;
    const double cap = std::pow(2.0, 1.0 / c) * x0;
    const double lam_c = std::pow(lambda, c);
    bool crossed = y0 >= 0.0;
    auto note = [&](bool& flag, double margin) {
        rep.worst_margin = std::min(rep.worst_margin, margin);
        if (margin < 0.0) {
            flag = false;
            ++rep.violations;
        }
    };
    for (std::size_t k = 0; k < s.size(); ++k) {
        const double x = s.x[k];
        const double y = s.y[k];
        double h = 0.0;
        if (k > 0) h = s.times[k] - s.times[k - 1];
        if (k + 1 < s.size()) h = std::max(h, s.times[k + 1] - s.times[k]);
        const double tol = 3.0 * std::max(std::pow(std::abs(x), a), std::pow(std::abs(y), a)) * std::sqrt(h);
        if (!crossed && y >= 0.0) crossed = true;
        note(rep.ordered, x + tol - y);
        if (!crossed) {
            note(rep.before_crossing, cap + tol - std::max(x, std::abs(y)));
        } else {
            const double gap = std::max(lam_c - std::pow(std::max(x, 0.0), c), 0.0);
            note(rep.lower_bound, y + std::pow(gap, 1.0 / c) + tol);
        }
        note(rep.within_lambda, lambda + tol - std::abs(y));
        if (x >= lambda) {
            if (!crossed) {
                rep.crossing_first = false;
                ++rep.violations;
            }
            break;
        }
    }
    return rep;
}

namespace {

CoupledSample two_scheme_from_fine(double x0, double alpha, double dt, const BrownianPath& fine,
                                   SchemeKind first, SchemeKind second) {
    const auto factor = static_cast<std::size_t>(std::llround(dt / fine.dt));
    if (factor == 0 || std::abs(static_cast<double>(factor) * fine.dt - dt) > 1e-9 * dt)
        throw ParameterError("two_scheme_sample: dt must be an integer multiple of the fine step");
    if (fine.steps() % factor != 0)
        throw ParameterError("two_scheme_sample: horizon must be a multiple of dt");
    const auto inc = coarsen(fine.increments, factor);
    const double a = alpha;
    const double c = 1.0 - a;
    const double k2 = 0.5 * a * c;
    auto advance = [&](SchemeKind kind, double state, double dw) {
        if (kind == SchemeKind::direct_euler) return state + std::pow(std::abs(state), a) * dw;
        // Drift-implicit step in U: U' = U + c dW - k2 h / U', root of matching sign.
        const double r = state + c * dw;
        const double disc = r * r - 4.0 * k2 * dt;
        if (disc < 0.0) return 0.5 * r;
        return r > 0.0 ? 0.5 * (r + std::sqrt(disc)) : 0.5 * (r - std::sqrt(disc));
    };
    auto to_state = [&](SchemeKind kind, double x) { return kind == SchemeKind::direct_euler ? x : signed_power(x, c); };
    auto to_x = [&](SchemeKind kind, double v) { return kind == SchemeKind::direct_euler ? v : signed_power(v, 1.0 / c); };

    CoupledSample s;
    s.alpha = alpha;
    s.mode = CoupledMode::plain;
    s.reason = StopReason::horizon;
    s.times.reserve(inc.size() + 1);
    s.x.reserve(inc.size() + 1);
    s.y.reserve(inc.size() + 1);
    s.times.push_back(0.0);
    s.x.push_back(x0);
    s.y.push_back(x0);
    double u1 = to_state(first, x0);
    double u2 = to_state(second, x0);
    for (std::size_t k = 0; k < inc.size(); ++k) {
        u1 = advance(first, u1, inc[k]);
        u2 = advance(second, u2, inc[k]);
        s.times.push_back(static_cast<double>(k + 1) * dt);
        s.x.push_back(to_x(first, u1));
        s.y.push_back(to_x(second, u2));
    }
    s.dw = inc;
    return s;
}

BrownianPath fine_path(double fine_dt, double horizon, SeedId seed) {
    if (!(fine_dt > 0.0) || !(horizon > 0.0)) throw ParameterError("two_scheme_sample: steps and horizon must be positive");
    const auto n = static_cast<std::size_t>(std::llround(horizon / fine_dt));
    if (n == 0 || std::abs(static_cast<double>(n) * fine_dt - horizon) > 1e-9 * horizon)
        throw ParameterError("two_scheme_sample: horizon must be a multiple of the fine step");
    return gen_path(seed, n, fine_dt);
}

} // namespace

CoupledSample two_scheme_sample(double x0, double alpha, double dt, double fine_dt, double horizon,
                                SeedId seed, SchemeKind first, SchemeKind second) {
    check_alpha(alpha);
    return two_scheme_from_fine(x0, alpha, dt, fine_path(fine_dt, horizon, seed), first, second);
}

DivergenceTable uniqueness_refinement(double x0, double alpha, const std::vector<double>& dts,
                                      double horizon, SeedId seed, SchemeKind first, SchemeKind second) {
    check_alpha(alpha);
    if (!(x0 > 0.0)) throw PreconditionError("uniqueness_refinement: x0 must be positive");
    if (dts.empty()) throw ParameterError("uniqueness_refinement: empty step sequence");
    for (std::size_t i = 1; i < dts.size(); ++i)
        if (!(dts[i] < dts[i - 1])) throw PreconditionError("uniqueness_refinement: steps must strictly decrease");
    const BrownianPath fine = fine_path(dts.back(), horizon, seed);
    DivergenceTable table;
    for (double dt : dts) {
        const auto s = two_scheme_from_fine(x0, alpha, dt, fine, first, second);
        double sup = 0.0;
        for (std::size_t k = 0; k < s.size(); ++k) sup = std::max(sup, s.z(k));
        table.dt.push_back(dt);
        table.divergence.push_back(sup);
    }
    return table;
}

std::vector<Excursion> excursion_agreement(const CoupledSample& s, double level_b, double threshold) {
    std::vector<Excursion> out;
    const std::size_t n = s.size();
    std::size_t k = 0;
    while (k < n) {
        if (s.m(k) <= threshold) {
            ++k;
            continue;
        }
        Excursion e;
        e.start = k > 0 ? s.times[k - 1] : s.times[0];
        const bool from_below = k > 0;
        while (k < n && s.m(k) > threshold) {
            e.max_m = std::max(e.max_m, s.m(k));
            e.max_z = std::max(e.max_z, s.z(k));
            ++k;
        }
        e.complete = from_below && k < n;
        e.end = k < n ? s.times[k] : s.times[n - 1];
        if (e.max_m >= level_b) out.push_back(e);
    }
    return out;
}

} // namespace degsde
