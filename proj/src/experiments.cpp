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

#include "degsde/experiments.hpp"

#include "degsde/coupled.hpp"
#include "degsde/error.hpp"
#include "degsde/htransform.hpp"
#include "degsde/mc_stats.hpp"
#include "degsde/reflected.hpp"
#include "degsde/rng_paths.hpp"
#include "degsde/speed_timechange.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <numbers>
#include <set>
#include <sstream>

namespace degsde {
namespace {

// ---------------------------------------------------------------- params

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

double parse_plain(std::string_view text, const std::string& key) {
    double v = 0.0;
    const auto* first = text.data();
    const auto* last = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last || text.empty())
        throw ConfigError(fmt::format("parameter '{}': cannot parse '{}' as a number", key, text));
    return v;
}

// Accepts plain numbers and powers written base^exp (e.g. 2^-10).
double parse_number(const std::string& raw, const std::string& key) {
    const std::string text = trim(raw);
    const auto caret = text.find('^');
    double v = 0.0;
    if (caret == std::string::npos) {
        v = parse_plain(text, key);
    } else {
        const double base = parse_plain(std::string_view(text).substr(0, caret), key);
        const double ex = parse_plain(std::string_view(text).substr(caret + 1), key);
        v = std::pow(base, ex);
    }
    if (!std::isfinite(v)) throw ConfigError(fmt::format("parameter '{}': value must be finite", key));
    return v;
}

class Params {
public:
    Params(const ExperimentInfo& info, const ParamMap& given) {
        for (const auto& [k, v] : given) {
            const bool known = std::any_of(info.params.begin(), info.params.end(),
                                           [&](const ParamSpec& p) { return p.name == k; });
            if (!known) throw ConfigError(fmt::format("unknown parameter '{}' for {}", k, info.name));
        }
        for (const auto& p : info.params) {
            const auto it = given.find(p.name);
            values_[p.name] = it != given.end() ? it->second : p.default_value;
        }
    }

    double num(const std::string& k) const { return parse_number(values_.at(k), k); }

    std::size_t count(const std::string& k) const {
        const double v = num(k);
        if (v < 0.0 || v != std::floor(v) || v > 1e15)
            throw ConfigError(fmt::format("parameter '{}' must be a nonnegative integer", k));
        return static_cast<std::size_t>(v);
    }

    std::vector<double> list(const std::string& k) const {
        std::vector<double> out;
        std::stringstream ss(values_.at(k));
        std::string item;
        while (std::getline(ss, item, ',')) out.push_back(parse_number(item, k));
        if (out.empty()) throw ConfigError(fmt::format("parameter '{}' needs at least one value", k));
        return out;
    }

    std::string str(const std::string& k) const { return trim(values_.at(k)); }

    bool flag(const std::string& k) const {
        const std::string v = str(k);
        if (v == "1" || v == "true" || v == "yes") return true;
        if (v == "0" || v == "false" || v == "no") return false;
        throw ConfigError(fmt::format("parameter '{}' must be a boolean", k));
    }

private:
    std::map<std::string, std::string> values_;
};

void require(bool ok, const std::string& what) {
    if (!ok) throw ParameterError(what);
}

void require_alpha(double a) { require(a > 0.0 && a < 0.5, "alpha must lie in (0, 1/2)"); }

// ---------------------------------------------------------------- rows

class Tag {
public:
    Tag& add(std::string_view k, double v) {
        sep();
        s_ += fmt::format("{}={}", k, v);
        return *this;
    }
    Tag& add(std::string_view k, std::string_view v) {
        sep();
        s_ += fmt::format("{}={}", k, v);
        return *this;
    }
    std::string str() const { return s_; }

private:
    void sep() {
        if (!s_.empty()) s_ += ';';
    }
    std::string s_;
};

struct Builder {
    std::string name;
    ExperimentResult result;

    void info(const Tag& t, const Estimate& e) { push(t, e, std::nullopt, "info"); }

    // Verdict |mean - oracle| <= sigmas * stderr.
    void oracle(const Tag& t, const Estimate& e, double oracle_value, double sigmas) {
        bool ok = false;
        if (!e.empty()) {
            const double d = std::abs(e.mean - oracle_value);
            ok = e.stderr_ > 0.0 ? d <= sigmas * e.stderr_ : d == 0.0;
        }
        push(t, e, oracle_value, ok ? "pass" : "fail");
    }

    // Deterministic comparison with an absolute tolerance.
    void exact(const Tag& t, double value, std::optional<double> oracle_value, bool ok) {
        Estimate e;
        e.mean = value;
        e.n = 1;
        push(t, e, oracle_value, ok ? "pass" : "fail");
        result.rows.back().z.reset();
    }

    void check(const Tag& t, const Estimate& e, bool ok) { push(t, e, std::nullopt, ok ? "pass" : "fail"); }

    void push(const Tag& t, const Estimate& e, std::optional<double> oracle_value, std::string verdict) {
        ResultRow r;
        r.experiment = name;
        r.params = t.str();
        r.n = e.n;
        r.mean = e.mean;
        r.stderr_ = e.stderr_;
        r.oracle = oracle_value;
        if (oracle_value && !e.empty()) {
            const double d = e.mean - *oracle_value;
            if (e.stderr_ > 0.0) r.z = d / e.stderr_;
            else r.z = d == 0.0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), d);
        }
        r.verdict = std::move(verdict);
        result.rows.push_back(std::move(r));
    }
};

Estimate single(double v) {
    Estimate e;
    e.mean = v;
    e.n = 1;
    return e;
}

Estimate safe_estimate(const std::vector<double>& v) {
    return v.empty() ? Estimate::empty_branch() : estimate(v);
}

// ---------------------------------------------------------------- batches

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

struct Batch {
    std::vector<double> values;  // NaN where the run failed
    std::size_t failed = 0;
    std::string first_error;

    std::vector<double> finite() const {
        std::vector<double> out;
        for (double v : values)
            if (!std::isnan(v)) out.push_back(v);
        return out;
    }
};

// Runs fn(i) for i < n, possibly in parallel. Step failures mark the run as
// failed; any other error is rethrown after the loop.
template <class F>
Batch run_batch(std::size_t n, F&& fn) {
    Batch b;
    b.values.assign(n, std::numeric_limits<double>::quiet_NaN());
    std::vector<std::string> errors(n);
    std::vector<std::exception_ptr> fatal(n);
    const auto sn = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(dynamic, 8)
    for (std::int64_t i = 0; i < sn; ++i) {
        try {
            b.values[i] = fn(static_cast<std::size_t>(i));
        } catch (const StepFailure& e) {
            errors[i] = e.what();
        } catch (const HorizonUnreachable& e) {
            errors[i] = e.what();
        } catch (...) {
            fatal[i] = std::current_exception();
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (fatal[i]) std::rethrow_exception(fatal[i]);
        if (!errors[i].empty()) {
            if (b.failed++ == 0) b.first_error = errors[i];
        }
    }
    return b;
}

SeedId path_seed(std::uint64_t seed, std::uint64_t combo, std::size_t i) {
    return {derive_seed(seed, combo), static_cast<std::uint64_t>(i)};
}

Tag with_failures(Tag t, const Batch& b) {
    if (b.failed > 0) t.add("failed", static_cast<double>(b.failed));
    return t;
}

ConditionedOptions conditioned_options(const Params& p) {
    ConditionedOptions o;
    o.dt = p.num("dt");
    o.rel_step = p.num("rel_step");
    o.dt_min = p.num("dt_min");
    require(o.dt > 0.0 && o.dt_min > 0.0 && o.dt_min <= o.dt, "need 0 < dt_min <= dt");
    require(o.rel_step >= 0.0, "rel_step must be nonnegative");
    return o;
}

CoupledOptions coupled_options(const Params& p) {
    CoupledOptions o;
    o.dt = p.num("dt");
    o.rel_step = p.num("rel_step");
    o.dt_min = p.num("dt_min");
    require(o.dt > 0.0 && o.dt_min > 0.0 && o.dt_min <= o.dt, "need 0 < dt_min <= dt");
    require(o.rel_step >= 0.0, "rel_step must be nonnegative");
    return o;
}

CoefficientSpec coefficient_spec(const Params& p) {
    CoefficientSpec s;
    s.kind = parse_coefficient_kind(p.str("coef"));
    s.alpha = p.num("alpha");
    s.a0 = p.num("a0");
    s.a1 = p.num("a1");
    s.b0 = p.num("b0");
    s.b1 = p.num("b1");
    return s;
}

bool strictly_decreasing(const std::vector<double>& v) {
    for (std::size_t i = 1; i < v.size(); ++i)
        if (!(v[i] < v[i - 1])) return false;
    return true;
}

// ---------------------------------------------------------------- experiments

ExperimentResult oracle_hitting(const Params& p, std::uint64_t seed) {
    const auto alphas = p.list("alpha");
    const auto xs = p.list("x");
    const std::size_t n = p.count("n");
    const double base_dt = p.num("base_dt");
    const double sigmas = p.num("sigmas");
    for (double a : alphas) require_alpha(a);
    for (double x : xs) require(x > 0.0 && x < 1.0, "x must lie in (0, 1)");
    require(n >= 2 && base_dt > 0.0, "need n >= 2 and base_dt > 0");

    Builder out{"oracle-hitting", {}};
    std::uint64_t combo = 0;
    for (double a : alphas) {
        for (double x : xs) {
            const auto batch = run_batch(n, [&](std::size_t i) {
                const auto path = solve_until_exit(path_seed(seed, combo, i), x, a, 0.0, 1.0, base_dt, 1.0);
                return path.first_hit(1.0) ? 1.0 : 0.0;
            });
            ++combo;
            out.oracle(with_failures(Tag().add("alpha", a).add("x", x).add("stat", "P(T1<T0)"), batch),
                       safe_estimate(batch.finite()), x, sigmas);
        }
    }
    return out.result;
}

ExperimentResult oracle_green(const Params& p, std::uint64_t seed) {
    const auto xs = p.list("x");
    const double a = p.num("alpha");
    const double quad_tol = p.num("quad_tol");
    const double eta = p.num("eta");
    const double s = p.num("scale");
    const double scale_tol = p.num("scale_tol");
    const std::size_t n_exit = p.count("n_exit");
    const double base_dt = p.num("base_dt");
    const double sigmas = p.num("sigmas");
    require_alpha(a);
    for (double x : xs) require(x > 0.0 && x < 1.0, "x must lie in (0, 1)");
    require(eta > 0.0 && s > 0.0 && quad_tol > 0.0 && scale_tol > 0.0, "eta, scale and tolerances must be positive");
    require(base_dt > 0.0, "base_dt must be positive");

    Builder out{"oracle-green", {}};
    for (double x : xs) {
        const double v = green_additive_integral(x, a);
        const double o = -2.0 * std::log(x);
        out.exact(Tag().add("alpha", a).add("x", x).add("stat", "green-additive"), v, o, std::abs(v - o) <= quad_tol);
    }
    const double c = 2.0 - 2.0 * a;
    const double quad = mean_exit_time(0.0, eta, a);
    const double closed = 2.0 * std::pow(eta, c) / ((1.0 - 2.0 * a) * c);
    out.exact(Tag().add("alpha", a).add("eta", eta).add("stat", "exit-quadrature"), quad, closed,
              std::abs(quad - closed) <= scale_tol * closed);
    for (double y : {0.0, 0.3}) {
        const double ratio = mean_exit_time(s * y * eta, s * eta, a) / mean_exit_time(y * eta, eta, a);
        const double o = std::pow(s, c);
        out.exact(Tag().add("alpha", a).add("eta", eta).add("y", y * eta).add("s", s).add("stat", "exit-scaling"),
                  ratio, o, std::abs(ratio - o) <= scale_tol * o);
    }
    if (n_exit > 0) {
        const auto batch = run_batch(n_exit, [&](std::size_t i) {
            return solve_until_exit(path_seed(seed, 0, i), 0.0, a, -eta, eta, base_dt, 1.0).end_time();
        });
        out.oracle(with_failures(Tag().add("alpha", a).add("eta", eta).add("stat", "exit-mc"), batch),
                   safe_estimate(batch.finite()), quad, sigmas);
    }
    return out.result;
}

// int_0^T B^-2 du along the base path of a run that left (0, 1) through 1.
double base_inverse_square(const BaseExit& e) {
    const auto w = e.base.values();
    const double h = e.base.dt;
    double total = 0.0;
    for (std::size_t k = 0; k < e.step; ++k) total += h / (w[k] * w[k + 1]);
    const double end = w[e.step] + e.fraction * (w[e.step + 1] - w[e.step]);
    total += e.fraction * h / (w[e.step] * std::max(end, w[e.step]) );
    return total;
}

ExperimentResult conditioned_additive(const Params& p, std::uint64_t seed) {
    const auto xs = p.list("x");
    const double a = p.num("alpha");
    const std::size_t n = p.count("n");
    const double tol_rel = p.num("tol_rel");
    const auto opt = conditioned_options(p);
    const auto cv_xs = p.list("cv_x");
    const std::size_t n_reject = p.count("n_reject");
    const double base_dt = p.num("base_dt");
    const double sigmas = p.num("sigmas");
    require_alpha(a);
    for (double x : xs) require(x > 0.0 && x < 1.0, "x must lie in (0, 1)");
    for (double x : cv_xs) require(x > 0.0 && x < 1.0, "cv_x must lie in (0, 1)");
    require(n >= 2 && tol_rel > 0.0 && base_dt > 0.0, "need n >= 2, tol_rel > 0, base_dt > 0");

    Builder out{"conditioned-additive", {}};
    std::map<double, Estimate> q1;
    std::uint64_t combo = 0;
    ConditionedOptions o = opt;
    o.store_path = true;
    for (double x : xs) {
        const auto batch = run_batch(n, [&](std::size_t i) {
            const auto path = simulate_conditioned(ConditioningMode::q1, x, a, o, path_seed(seed, combo, i));
            return power_integral(path.times, path.values, 2.0 * a - 2.0);
        });
        ++combo;
        const Estimate e = safe_estimate(batch.finite());
        q1[x] = e;
        const double oracle = -2.0 * std::log(x);
        const bool ok = !e.empty() && std::abs(e.mean - oracle) <= tol_rel * oracle;
        out.push(with_failures(Tag().add("alpha", a).add("x", x).add("stat", "q1-additive"), batch), e, oracle,
                 ok ? "pass" : "fail");
    }
    if (n_reject > 0) {
        for (double x : cv_xs) {
            const auto batch = run_batch(n_reject, [&](std::size_t i) {
                const BaseExit e = locate_exit(path_seed(seed, 1000 + combo, i), x, 0.0, 1.0, base_dt);
                if (e.level != 1.0) return std::numeric_limits<double>::quiet_NaN();
                return base_inverse_square(e);
            });
            ++combo;
            const Estimate e = safe_estimate(batch.finite());
            out.oracle(Tag().add("alpha", a).add("x", x).add("stat", "rejection-additive"), e, -2.0 * std::log(x), sigmas);
            if (q1.count(x)) {
                const Estimate& m = q1[x];
                const double se = std::hypot(m.stderr_, e.stderr_);
                Estimate diff;
                diff.mean = m.mean - e.mean;
                diff.stderr_ = se;
                diff.n = e.n;
                out.oracle(Tag().add("alpha", a).add("x", x).add("stat", "q1-minus-rejection"), diff, 0.0, sigmas);
            }
        }
    }
    return out.result;
}

ExperimentResult q0_hitprob(const Params& p, std::uint64_t seed) {
    const auto xs = p.list("x");
    const double level = p.num("level");
    const double a = p.num("alpha");
    const std::size_t n = p.count("n");
    const double sigmas = p.num("sigmas");
    auto o = conditioned_options(p);
    require_alpha(a);
    require(level > 0.0 && level < 1.0, "level must lie in (0, 1)");
    for (double x : xs) require(x > 0.0 && x < level, "x must lie in (0, level)");
    require(n >= 2, "need n >= 2");
    o.levels = {level};
    o.store_path = false;

    Builder out{"q0-hitprob", {}};
    std::uint64_t combo = 0;
    for (double x : xs) {
        const auto batch = run_batch(n, [&](std::size_t i) {
            const auto path = simulate_conditioned(ConditioningMode::q0, x, a, o, path_seed(seed, combo, i));
            return path.first_hit(level) ? 1.0 : 0.0;
        });
        ++combo;
        const double oracle = (1.0 - level) / (1.0 - x) * x / level;
        out.oracle(with_failures(Tag().add("alpha", a).add("x", x).add("level", level).add("stat", "P(T_level<T0)"), batch),
                   safe_estimate(batch.finite()), oracle, sigmas);
    }
    return out.result;
}

ExperimentResult bessel_correspond(const Params& p, std::uint64_t seed) {
    const double x = p.num("x");
    const double level = p.num("level");
    const double a = p.num("alpha");
    const std::size_t n = p.count("n");
    const double sigmas = p.num("sigmas");
    auto o = conditioned_options(p);
    require_alpha(a);
    require(level > 0.0 && level < x && x < 1.0, "need 0 < level < x < 1");
    require(n >= 2, "need n >= 2");
    o.levels = {level};

    std::vector<double> hit(n), clock(n);
    const auto batch = run_batch(n, [&](std::size_t i) {
        const auto path = simulate_conditioned(ConditioningMode::q1, x, a, o, path_seed(seed, 0, i));
        const auto rep = bessel3_correspondence_check(path, a, {level});
        hit[i] = rep.level_hits[0] ? 1.0 : 0.0;
        clock[i] = rep.exit_clock;
        return 0.0;
    });
    std::vector<double> hits, clocks;
    for (std::size_t i = 0; i < n; ++i) {
        if (std::isnan(batch.values[i])) continue;
        hits.push_back(hit[i]);
        clocks.push_back(clock[i]);
    }
    Builder out{"bessel-correspond", {}};
    out.oracle(with_failures(Tag().add("alpha", a).add("x", x).add("level", level).add("stat", "P(T_level<T1)"), batch),
               safe_estimate(hits), bessel3_hit_prob(x, level), sigmas);
    out.oracle(with_failures(Tag().add("alpha", a).add("x", x).add("stat", "bessel-clock-exit"), batch),
               safe_estimate(clocks), bessel3_mean_exit(x), sigmas);
    return out.result;
}

Estimate scaled(Estimate e, double f) {
    e.mean *= f;
    e.stderr_ *= f;
    return e;
}

ExperimentResult chasing(const Params& p, std::uint64_t seed) {
    auto x0s = p.list("x0");
    const double ratio = p.num("y0_ratio");
    const double a = p.num("alpha");
    const double delta = p.num("delta");
    const std::size_t n = p.count("n");
    const std::string method = p.str("method");
    const std::size_t min_branch = p.count("min_branch");
    const double sigmas = p.num("sigmas");
    ChasingOptions co;
    co.coupled = coupled_options(p);
    co.runs = n;
    require_alpha(a);
    require(delta > 0.0 && delta < 1.0, "delta must lie in (0, 1)");
    require(ratio >= -1.0 && ratio <= 1.0, "y0_ratio must lie in [-1, 1]");
    for (double x0 : x0s) require(x0 > 0.0 && x0 < 0.25, "x0 must lie in (0, 1/4)");
    require(n >= 2, "need n >= 2");
    require(method == "q" || method == "rejection" || method == "both", "method must be q, rejection or both");
    std::sort(x0s.begin(), x0s.end(), std::greater<>());

    Builder out{"chasing", {}};
    std::vector<Estimate> close_trend, bottom_trend;
    std::size_t min_seen = std::numeric_limits<std::size_t>::max();
    std::uint64_t combo = 0;
    for (double x0 : x0s) {
        const double y0 = ratio * x0;
        auto base = [&] { return Tag().add("alpha", a).add("x0", x0).add("y0", y0).add("delta", delta); };
        std::optional<ChasingReport> q, rej;
        if (method != "rejection") {
            co.rejection = false;
            q = chasing_experiment(x0, y0, a, delta, co, derive_seed(seed, combo));
        }
        if (method != "q") {
            co.rejection = true;
            rej = chasing_experiment(x0, y0, a, delta, co, derive_seed(seed, combo));
        }
        ++combo;
        for (const auto* r : {q ? &*q : nullptr, rej ? &*rej : nullptr}) {
            if (!r) continue;
            const std::string m = r == &*q ? "q" : "rejection";
            if (q && r == &*q) {
                close_trend.push_back(r->p_close);
                bottom_trend.push_back(scaled(r->mean_neg_y_bottom, 1.0 / x0));
            }
            out.info(base().add("method", m).add("stat", "P(Y_T>1-delta|X_T=1)"), r->p_close);
            out.info(base().add("method", m).add("stat", "E[Y_T|X_T=1]"), r->mean_y_top);
            out.info(base().add("method", m).add("stat", "E[-Y_T|X_T=0]/x0"), scaled(r->mean_neg_y_bottom, 1.0 / x0));
            out.info(base().add("method", m).add("stat", "excluded-runs"), single(static_cast<double>(r->excluded)));
            // Branch counts refer to the primary method; rejection is a cross-check.
            if (!q || r == &*q) min_seen = std::min({min_seen, r->n_top, r->n_bottom});
            if (r->p_top) out.oracle(base().add("method", m).add("stat", "P(X_T=1)"), *r->p_top, x0, sigmas);
        }
        if (q && rej) {
            auto agree = [&](const char* stat, const Estimate& e1, const Estimate& e2) {
                Estimate d;
                d.mean = e1.mean - e2.mean;
                d.stderr_ = std::hypot(e1.stderr_, e2.stderr_);
                d.n = std::min(e1.n, e2.n);
                if (e1.empty() || e2.empty()) d = Estimate::empty_branch();
                out.oracle(base().add("stat", stat), d, 0.0, sigmas);
            };
            agree("q-minus-rejection:E[Y_T|X_T=1]", q->mean_y_top, rej->mean_y_top);
            agree("q-minus-rejection:E[-Y_T|X_T=0]", q->mean_neg_y_bottom, rej->mean_neg_y_bottom);
        }
    }
    const Tag common = Tag().add("alpha", a).add("y0_ratio", ratio).add("delta", delta);
    out.check(Tag(common).add("stat", "min-branch-count").add("required", static_cast<double>(min_branch)),
              single(static_cast<double>(min_seen)), min_seen >= min_branch);
    if (close_trend.size() >= 2) {
        out.check(Tag(common).add("stat", "trend:P(Y_T>1-delta|X_T=1)-up-as-x0-down"), close_trend.back(),
                  trend_test(close_trend, Trend::increasing));
        out.check(Tag(common).add("stat", "trend:E[-Y_T|X_T=0]/x0-up-as-x0-down"), bottom_trend.back(),
                  trend_test(bottom_trend, Trend::increasing));
    }
    return out.result;
}

ExperimentResult envelope(const Params& p, std::uint64_t seed) {
    const double x0 = p.num("x0");
    const double ratio = p.num("y0_ratio");
    const double a = p.num("alpha");
    const auto lambdas = p.list("lambda");
    const std::size_t n = p.count("n");
    const double plain_ratio = p.num("plain_y0_ratio");
    CoupledOptions co = coupled_options(p);
    require_alpha(a);
    require(x0 > 0.0 && x0 < 0.25, "x0 must lie in (0, 1/4)");
    require(ratio >= -1.0 && ratio <= 1.0, "y0_ratio must lie in [-1, 1]");
    require(plain_ratio >= 0.0 && plain_ratio < 1.0, "plain_y0_ratio must lie in [0, 1)");
    for (double l : lambdas) require(l >= 4.0 * x0, "lambda must be at least 4 x0");
    require(n >= 1, "need n >= 1");
    const double y0 = ratio * x0;
    co.stop.rule = StopRule::x_exits_unit;

    const std::size_t nl = lambdas.size();
    std::vector<int> order_bad(n, 0), sum_bad(n, 0), windows(n, 0), plain_bad(n, 0);
    std::vector<std::vector<int>> env_bad(nl, std::vector<int>(n, 0));
    const auto batch = run_batch(n, [&](std::size_t i) {
        const auto s = euler_coupled(x0, y0, a, CoupledMode::q1, co, path_seed(seed, 0, i));
        for (std::size_t k = 0; k < s.size(); ++k)
            if (s.y[k] > s.x[k]) order_bad[i] = 1;
        for (std::size_t j = 0; j < nl; ++j) env_bad[j][i] = envelope_check(s, lambdas[j]).pass() ? 0 : 1;
        const auto tr = transform_residuals(s, a);
        sum_bad[i] = tr.sum_decreasing ? 0 : 1;
        windows[i] = static_cast<int>(tr.sum_windows);
        return 0.0;
    });
    const double py0 = plain_ratio * x0;
    const auto plain = run_batch(n, [&](std::size_t i) {
        const auto s = euler_coupled(x0, py0, a, CoupledMode::plain, co, path_seed(seed, 1, i));
        const std::size_t end = s.reason == StopReason::x_hit_zero ? s.size() - 1 : s.size();
        for (std::size_t k = 0; k < end; ++k)
            if (s.y[k] > s.x[k]) plain_bad[i] = 1;
        return 0.0;
    });
    auto total = [&](const std::vector<int>& v, const Batch& b) {
        double t = 0.0;
        for (std::size_t i = 0; i < v.size(); ++i)
            if (!std::isnan(b.values[i])) t += v[i];
        return t;
    };
    const std::size_t ok_runs = n - batch.failed;
    Builder out{"envelope", {}};
    auto zero_row = [&](Tag t, double bad, std::size_t runs) {
        Estimate e = single(bad);
        e.n = runs;
        out.push(t, e, 0.0, bad == 0.0 && runs > 0 ? "pass" : "fail");
    };
    const Tag base = Tag().add("alpha", a).add("x0", x0).add("y0", y0);
    zero_row(with_failures(Tag(base).add("stat", "q1-order-violations"), batch), total(order_bad, batch), ok_runs);
    for (std::size_t j = 0; j < nl; ++j)
        zero_row(with_failures(Tag(base).add("lambda", lambdas[j]).add("stat", "envelope-violations"), batch),
                 total(env_bad[j], batch), ok_runs);
    zero_row(with_failures(Tag(base).add("stat", "sum-series-not-decreasing"), batch), total(sum_bad, batch), ok_runs);
    out.info(Tag(base).add("stat", "sum-windows"), single(total(windows, batch)));
    zero_row(with_failures(Tag().add("alpha", a).add("x0", x0).add("y0", py0).add("stat", "plain-order-violations"), plain),
             total(plain_bad, plain), n - plain.failed);
    return out.result;
}

struct PairRuns {
    std::vector<CoupledSample> coarse;
    std::vector<CoupledSample> fine;
};

ExperimentResult r_identity(const Params& p, std::uint64_t seed) {
    const double x0 = p.num("x0");
    const double y0 = p.num("y0");
    const double a = p.num("alpha");
    const double dt = p.num("dt");
    const std::size_t refine = p.count("refine");
    const std::size_t n = p.count("n");
    const double tol = p.num("tol");
    const double refine_rel = p.num("refine_rel");
    require_alpha(a);
    require(refine_rel >= 0.0, "refine_rel must be nonnegative");
    require(x0 > 0.0 && x0 < 1.0 && y0 > 0.0 && y0 <= x0, "need 0 < y0 <= x0 < 1");
    require(dt > 0.0 && refine >= 2 && n >= 1 && tol > 0.0, "need dt > 0, refine >= 2, n >= 1, tol > 0");

    std::vector<double> fine(n);
    const auto coarse = run_batch(n, [&](std::size_t i) {
        CoupledOptions c;
        c.dt = dt;
        c.skeleton_factor = refine;
        c.refine_rel = refine_rel;
        const auto s1 = euler_coupled(x0, y0, a, CoupledMode::q1, c, path_seed(seed, 0, i));
        CoupledOptions f;
        f.dt = dt / static_cast<double>(refine);
        f.refine_rel = refine_rel;
        const auto s2 = euler_coupled(x0, y0, a, CoupledMode::q1, f, path_seed(seed, 0, i));
        fine[i] = r_identity_residual(s2);
        return r_identity_residual(s1);
    });
    std::vector<double> rc, rf;
    std::size_t improved = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (std::isnan(coarse.values[i])) continue;
        rc.push_back(coarse.values[i]);
        rf.push_back(fine[i]);
        if (fine[i] < coarse.values[i]) ++improved;
    }
    Builder out{"r-identity", {}};
    const Tag base = Tag().add("alpha", a).add("x0", x0).add("y0", y0);
    const double worst = rc.empty() ? std::numeric_limits<double>::quiet_NaN() : *std::max_element(rc.begin(), rc.end());
    Estimate we = single(worst);
    we.n = rc.size();
    out.check(with_failures(Tag(base).add("dt", dt).add("stat", "max-relative-residual").add("tol", tol), coarse), we,
              !rc.empty() && worst < tol);
    const Estimate ec = safe_estimate(rc);
    const Estimate ef = safe_estimate(rf);
    out.info(Tag(base).add("dt", dt).add("stat", "mean-relative-residual"), ec);
    out.info(Tag(base).add("dt", dt / static_cast<double>(refine)).add("stat", "mean-relative-residual"), ef);
    Estimate frac = proportion(improved, std::max<std::size_t>(rc.size(), 1));
    out.info(Tag(base).add("stat", "fraction-of-paths-improved"), frac);
    out.check(Tag(base).add("dt", dt).add("refine", static_cast<double>(refine)).add("stat", "residual-decreases"),
              single(ec.empty() || ec.mean == 0.0 ? 0.0 : ef.mean / ec.mean), !ec.empty() && ef.mean < ec.mean);
    return out.result;
}

ExperimentResult transform_residuals_exp(const Params& p, std::uint64_t seed) {
    const double x0 = p.num("x0");
    const double y0 = p.num("y0");
    const double a = p.num("alpha");
    const std::string mode_s = p.str("mode");
    const double dt = p.num("dt");
    const std::size_t refine = p.count("refine");
    const std::size_t n = p.count("n");
    const double lo = p.num("ratio_lo");
    const double hi = p.num("ratio_hi");
    const double refine_rel = p.num("refine_rel");
    const double floor = p.num("floor");
    require(refine_rel >= 0.0 && floor >= 0.0, "refine_rel and floor must be nonnegative");
    require_alpha(a);
    require(x0 > 0.0 && x0 < 1.0 && std::abs(y0) <= x0, "need 0 < x0 < 1 and |y0| <= x0");
    require(dt > 0.0 && refine >= 2 && n >= 1, "need dt > 0, refine >= 2, n >= 1");
    require(mode_s == "q1" || mode_s == "plain", "mode must be q1 or plain");
    const CoupledMode mode = mode_s == "q1" ? CoupledMode::q1 : CoupledMode::plain;

    struct Pair {
        TransformResiduals c, f;
    };
    std::vector<Pair> res(n);
    const auto batch = run_batch(n, [&](std::size_t i) {
        CoupledOptions c;
        c.dt = dt;
        c.skeleton_factor = refine;
        c.refine_rel = refine_rel;
        c.stop.rule = StopRule::x_exits_unit;
        CoupledOptions f = c;
        f.dt = dt / static_cast<double>(refine);
        f.skeleton_factor = 1;
        res[i].c = transform_residuals(euler_coupled(x0, y0, a, mode, c, path_seed(seed, 0, i)), a, floor);
        res[i].f = transform_residuals(euler_coupled(x0, y0, a, mode, f, path_seed(seed, 0, i)), a, floor);
        return 0.0;
    });
    Builder out{"transform-residuals", {}};
    const Tag base = Tag().add("alpha", a).add("x0", x0).add("y0", y0).add("mode", mode_s);
    using Field = std::optional<double> TransformResiduals::*;
    const std::pair<const char*, Field> fields[] = {
        {"x-power", &TransformResiduals::x_power},
        {"x-power-tilde", &TransformResiduals::x_power_tilde},
        {"abs-y-power", &TransformResiduals::abs_y_power},
        {"sum-power", &TransformResiduals::sum_power},
    };
    for (const auto& [name, field] : fields) {
        std::vector<double> vc, vf;
        for (std::size_t i = 0; i < n; ++i) {
            if (std::isnan(batch.values[i])) continue;
            const auto& c = res[i].c.*field;
            const auto& f = res[i].f.*field;
            if (c && f) {
                vc.push_back(*c);
                vf.push_back(*f);
            }
        }
        if (vc.empty()) continue;
        const Estimate ec = estimate(vc);
        const Estimate ef = estimate(vf);
        out.info(Tag(base).add("dt", dt).add("stat", std::string(name) + "-residual"), ec);
        out.info(Tag(base).add("dt", dt / static_cast<double>(refine)).add("stat", std::string(name) + "-residual"), ef);
        const double ratio = ef.mean > 0.0 ? ec.mean / ef.mean : std::numeric_limits<double>::infinity();
        Estimate r = single(ratio);
        r.n = vc.size();
        out.check(Tag(base).add("refine", static_cast<double>(refine)).add("stat", std::string(name) + "-ratio")
                      .add("range", fmt::format("[{}:{}]", lo, hi)),
                  r, ratio >= lo && ratio <= hi);
    }
    double bad = 0.0, windows = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (std::isnan(batch.values[i])) continue;
        windows += static_cast<double>(res[i].c.sum_windows);
        if (!res[i].c.sum_decreasing) bad += 1.0;
    }
    Estimate e = single(bad);
    e.n = n - batch.failed;
    out.push(with_failures(Tag(base).add("dt", dt).add("windows", windows).add("stat", "sum-series-not-decreasing"), batch),
             e, 0.0, bad == 0.0 ? "pass" : "fail");
    return out.result;
}

std::vector<double> step_list(const Params& p, const std::string& key) {
    auto dts = p.list(key);
    for (double d : dts) require(d > 0.0, key + " entries must be positive");
    for (std::size_t i = 1; i < dts.size(); ++i) require(dts[i] < dts[i - 1], key + " must be strictly decreasing");
    return dts;
}

ExperimentResult uniqueness_refine(const Params& p, std::uint64_t seed) {
    const double x0 = p.num("x0");
    const double a = p.num("alpha");
    const double horizon = p.num("horizon");
    const auto dts = step_list(p, "dts");
    const std::size_t n = p.count("n");
    const double bound = p.num("bound");
    const double level_b = p.num("level_b");
    const double threshold = p.num("threshold");
    require_alpha(a);
    require(x0 > 0.0 && horizon > 0.0 && n >= 1 && bound > 0.0, "need x0 > 0, horizon > 0, n >= 1, bound > 0");
    require(level_b > threshold && threshold > 0.0, "need level_b > threshold > 0");

    std::vector<DivergenceTable> tables(n);
    std::vector<double> excess(n, 0.0);
    std::vector<std::size_t> excursions(n, 0);
    const auto batch = run_batch(n, [&](std::size_t i) {
        tables[i] = uniqueness_refinement(x0, a, dts, horizon, path_seed(seed, 0, i));
        const auto s = two_scheme_sample(x0, a, dts.back(), dts.back(), horizon, path_seed(seed, 0, i));
        const auto ex = excursion_agreement(s, level_b, threshold);
        excursions[i] = ex.size();
        double worst = -std::numeric_limits<double>::infinity();
        for (const auto& e : ex) worst = std::max(worst, e.max_z - tables[i].divergence.back());
        excess[i] = ex.empty() ? 0.0 : worst;
        return 0.0;
    });
    Builder out{"uniqueness-refine", {}};
    const Tag base = Tag().add("alpha", a).add("x0", x0).add("horizon", horizon);
    std::vector<double> means;
    for (std::size_t j = 0; j < dts.size(); ++j) {
        std::vector<double> v;
        for (std::size_t i = 0; i < n; ++i)
            if (!std::isnan(batch.values[i])) v.push_back(tables[i].divergence[j]);
        const Estimate e = safe_estimate(v);
        means.push_back(e.mean);
        out.info(with_failures(Tag(base).add("dt", dts[j]).add("stat", "mean-sup-divergence"), batch), e);
        std::sort(v.begin(), v.end());
        if (!v.empty()) out.info(Tag(base).add("dt", dts[j]).add("stat", "median-sup-divergence"), single(v[v.size() / 2]));
    }
    out.check(Tag(base).add("stat", "strictly-decreasing"), single(means.back()), strictly_decreasing(means));
    out.exact(Tag(base).add("dt", dts.back()).add("stat", "finest-below-bound").add("bound", bound), means.back(), std::nullopt,
              means.back() < bound);
    double worst = -std::numeric_limits<double>::infinity();
    double count = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (std::isnan(batch.values[i])) continue;
        count += static_cast<double>(excursions[i]);
        if (excursions[i] > 0) worst = std::max(worst, excess[i]);
    }
    Estimate ee = single(count == 0.0 ? 0.0 : worst);
    ee.n = static_cast<std::size_t>(count);
    out.check(Tag(base).add("level_b", level_b).add("stat", "excursion-maxZ-minus-finest-divergence"), ee,
              count == 0.0 || worst <= 0.0);
    return out.result;
}

ExperimentResult excursion_agree(const Params& p, std::uint64_t seed) {
    const double x0 = p.num("x0");
    const double a = p.num("alpha");
    const double horizon = p.num("horizon");
    const double dt = p.num("dt");
    const std::size_t n = p.count("n");
    const double level_b = p.num("level_b");
    const double threshold = p.num("threshold");
    require_alpha(a);
    require(x0 > 0.0 && horizon > 0.0 && dt > 0.0 && n >= 1, "need x0, horizon, dt > 0 and n >= 1");
    require(level_b > threshold && threshold > 0.0, "need level_b > threshold > 0");

    std::vector<std::vector<Excursion>> two(n), same(n);
    std::vector<double> sup(n, 0.0);
    const auto batch = run_batch(n, [&](std::size_t i) {
        const auto s = two_scheme_sample(x0, a, dt, dt, horizon, path_seed(seed, 0, i));
        for (std::size_t k = 0; k < s.size(); ++k) sup[i] = std::max(sup[i], s.z(k));
        two[i] = excursion_agreement(s, level_b, threshold);
        const auto t = two_scheme_sample(x0, a, dt, dt, horizon, path_seed(seed, 0, i), SchemeKind::direct_euler,
                                         SchemeKind::direct_euler);
        same[i] = excursion_agreement(t, level_b, threshold);
        return 0.0;
    });
    std::vector<double> maxz;
    double complete = 0.0, same_worst = 0.0, over = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (std::isnan(batch.values[i])) continue;
        for (const auto& e : two[i]) {
            maxz.push_back(e.max_z);
            if (e.complete) complete += 1.0;
            if (e.max_z > sup[i]) over += 1.0;
        }
        for (const auto& e : same[i]) same_worst = std::max(same_worst, e.max_z);
    }
    Builder out{"excursion-agree", {}};
    const Tag base = Tag().add("alpha", a).add("x0", x0).add("dt", dt).add("level_b", level_b);
    out.info(with_failures(Tag(base).add("stat", "excursion-max-Z"), batch), safe_estimate(maxz));
    out.info(Tag(base).add("stat", "complete-excursions"), single(complete));
    Estimate oe = single(over);
    oe.n = maxz.size();
    out.push(Tag(base).add("stat", "excursions-above-sup-divergence"), oe, 0.0, over == 0.0 ? "pass" : "fail");
    out.exact(Tag(base).add("stat", "identical-schemes-max-Z"), same_worst, 0.0, same_worst == 0.0);
    return out.result;
}

ExperimentResult occupation(const Params& p, std::uint64_t seed) {
    const double a = p.num("alpha");
    const double x = p.num("x");
    const double horizon = p.num("horizon");
    auto eps = p.list("eps");
    const std::size_t n = p.count("n");
    const double base_dt = p.num("base_dt");
    const double out_dt = p.num("out_dt");
    require_alpha(a);
    require(horizon > 0.0 && n >= 2 && base_dt > 0.0 && out_dt > 0.0, "need horizon, base_dt, out_dt > 0 and n >= 2");
    for (double e : eps) require(e > 0.0, "eps must be positive");
    std::sort(eps.begin(), eps.end(), std::greater<>());

    std::vector<std::vector<double>> frac(eps.size(), std::vector<double>(n));
    const auto batch = run_batch(n, [&](std::size_t i) {
        const SeedId sid = path_seed(seed, 0, i);
        const auto steps = static_cast<std::size_t>(std::ceil(horizon / base_dt));
        TimeChangeOptions o;
        o.out_dt = out_dt;
        const auto path = time_change_solution(gen_path(sid, steps, base_dt, x), a, horizon, o);
        for (std::size_t j = 0; j < eps.size(); ++j) frac[j][i] = occupation_fraction(path, eps[j], horizon);
        return 0.0;
    });
    Builder out{"occupation", {}};
    std::vector<Estimate> trend;
    for (std::size_t j = 0; j < eps.size(); ++j) {
        std::vector<double> v;
        for (std::size_t i = 0; i < n; ++i)
            if (!std::isnan(batch.values[i])) v.push_back(frac[j][i]);
        trend.push_back(safe_estimate(v));
        out.info(with_failures(Tag().add("alpha", a).add("x", x).add("eps", eps[j]).add("stat", "occupation-fraction"), batch),
                 trend.back());
    }
    if (trend.size() >= 2)
        out.check(Tag().add("alpha", a).add("x", x).add("stat", "trend:fraction-down-as-eps-down"), trend.back(),
                  trend_test(trend, Trend::decreasing));
    return out.result;
}

void skorokhod_rows(Builder& out) {
    auto same = [](const std::vector<double>& a, const std::vector<double>& b) { return a == b; };
    {
        std::vector<double> psi(11);
        for (std::size_t k = 0; k < psi.size(); ++k) psi[k] = -0.1 * static_cast<double>(k);
        const auto r = skorokhod_map(psi);
        std::vector<double> zero(psi.size(), 0.0), lt(psi.size());
        for (std::size_t k = 0; k < psi.size(); ++k) lt[k] = -psi[k];
        out.exact(Tag().add("stat", "skorokhod:pushing"), 0.0, std::nullopt, same(r.reflected, zero) && same(r.local_time, lt));
    }
    {
        const std::vector<double> psi{0.2, 0.5, 0.1, 0.9};
        const auto r = skorokhod_map(psi);
        out.exact(Tag().add("stat", "skorokhod:no-reflection"), 0.0, std::nullopt,
                  same(r.reflected, psi) && same(r.local_time, std::vector<double>(4, 0.0)));
    }
    {
        const std::vector<double> psi{0.0, -1.0, 0.5};
        const auto r = skorokhod_map(psi);
        out.exact(Tag().add("stat", "skorokhod:three-point"), 0.0, std::nullopt,
                  same(r.reflected, {0.0, 0.0, 1.5}) && same(r.local_time, {0.0, 1.0, 1.0}));
    }
}

ExperimentResult reflected_sim(const Params& p, std::uint64_t seed) {
    const CoefficientSpec spec = coefficient_spec(p);
    const double x0 = p.num("x0");
    const double dt = p.num("dt");
    const double horizon = p.num("horizon");
    const std::size_t n = p.count("n");
    const double sigmas = p.num("sigmas");
    const CoefficientPair pair = make_coefficients(spec);
    require(x0 >= 0.0 && dt > 0.0 && horizon > 0.0 && n >= 2, "need x0 >= 0, dt > 0, horizon > 0, n >= 2");

    std::vector<double> lt(n);
    std::vector<int> bad(n, 0);
    const auto batch = run_batch(n, [&](std::size_t i) {
        const auto path = simulate_reflected(pair, x0, dt, horizon, path_seed(seed, 0, i));
        for (std::size_t k = 0; k < path.size(); ++k) {
            if (path.x[k] < 0.0) bad[i] = 1;
            if (k == 0) continue;
            const bool grew = path.local_time[k] > path.local_time[k - 1];
            if (path.local_time[k] < path.local_time[k - 1]) bad[i] = 1;
            if (grew != path.pushed[k - 1]) bad[i] = 1;
            if (grew && path.x[k] != 0.0) bad[i] = 1;
        }
        lt[i] = path.local_time.back();
        return path.x.back();
    });
    Builder out{"reflected-sim", {}};
    skorokhod_rows(out);
    const Tag base = Tag().add("coef", to_string(spec.kind)).add("a0", spec.a0).add("b0", spec.b0).add("x0", x0).add("dt", dt)
                         .add("horizon", horizon);
    const Estimate mx = safe_estimate(batch.finite());
    const bool has_oracle = spec.kind == CoefficientKind::constant && spec.b0 == 0.0 && x0 == 0.0;
    if (has_oracle)
        out.oracle(with_failures(Tag(base).add("stat", "E[X_T]"), batch), mx, spec.a0 * std::sqrt(2.0 * horizon / std::numbers::pi),
                   sigmas);
    else
        out.info(with_failures(Tag(base).add("stat", "E[X_T]"), batch), mx);
    double nbad = 0.0;
    std::vector<double> lts;
    for (std::size_t i = 0; i < n; ++i) {
        if (std::isnan(batch.values[i])) continue;
        nbad += bad[i];
        lts.push_back(lt[i] / horizon);
    }
    Estimate be = single(nbad);
    be.n = lts.size();
    out.push(Tag(base).add("stat", "complementarity-violations"), be, 0.0, nbad == 0.0 ? "pass" : "fail");
    const Estimate le = safe_estimate(lts);
    if (spec.kind == CoefficientKind::constant && spec.b0 < 0.0 && x0 == 0.0) {
        const double target = -spec.b0;
        out.push(Tag(base).add("stat", "L_T/T-vs-|b|").add("tol", "10%"), le, target,
                 std::abs(le.mean - target) <= 0.1 * target ? "pass" : "fail");
    } else {
        out.info(Tag(base).add("stat", "L_T/T"), le);
    }
    return out.result;
}

ExperimentResult reflected_unique(const Params& p, std::uint64_t seed) {
    const CoefficientSpec spec = coefficient_spec(p);
    const double x0 = p.num("x0");
    const double horizon = p.num("horizon");
    const double fine_dt = p.num("fine_dt");
    const auto dts = step_list(p, "dts");
    const std::size_t n = p.count("n");
    const CoefficientPair pair = make_coefficients(spec);
    require(x0 >= 0.0 && horizon > 0.0 && fine_dt > 0.0 && n >= 1, "need x0 >= 0, horizon, fine_dt > 0, n >= 1");
    require(fine_dt <= dts.back(), "fine_dt must not exceed the smallest dt");
    const auto fine_n = static_cast<std::size_t>(std::llround(horizon / fine_dt));
    std::vector<std::size_t> factors;
    for (double d : dts) {
        const auto f = static_cast<std::size_t>(std::llround(d / fine_dt));
        require(f >= 1 && std::abs(static_cast<double>(f) * fine_dt - d) <= 1e-9 * d && fine_n % f == 0,
                "every dt must be a multiple of fine_dt dividing the horizon");
        factors.push_back(f);
    }
    const bool exact_bm = spec.kind == CoefficientKind::constant && spec.a0 == 1.0 && spec.b0 == 0.0;

    const std::size_t nd = dts.size();
    std::vector<std::vector<double>> sup(nd, std::vector<double>(n)), zres(nd, std::vector<double>(n));
    std::vector<int> dominated(n, 1);
    const auto batch = run_batch(n, [&](std::size_t i) {
        const SeedId sid = path_seed(seed, 0, i);
        const BrownianPath fine = gen_path(sid, fine_n, fine_dt);
        const ReflectedPath fine_sol = exact_bm ? ReflectedPath{} : simulate_reflected(pair, x0, fine_dt, fine.increments, sid);
        for (std::size_t j = 0; j < nd; ++j) {
            ReflectedPath ref;
            if (exact_bm) {
                ref = reflected_bm_reference(x0, fine, factors[j]);
            } else {
                ref.seed = sid;
                ref.dw = coarsen(fine.increments, factors[j]);
                for (std::size_t k = 0; k <= ref.dw.size(); ++k) {
                    ref.times.push_back(static_cast<double>(k) * dts[j]);
                    ref.x.push_back(fine_sol.x[k * factors[j]]);
                    ref.local_time.push_back(fine_sol.local_time[k * factors[j]]);
                }
                ref.pushed.assign(ref.dw.size(), false);
            }
            const auto sol = simulate_reflected(pair, x0, dts[j], ref.dw, sid);
            const auto rep = max_coupling_check(sol, ref, pair);
            sup[j][i] = rep.sup_difference;
            zres[j][i] = rep.z_residual;
            if (!rep.z_dominates) dominated[i] = 0;
        }
        return 0.0;
    });
    Builder out{"reflected-unique", {}};
    const Tag base = Tag().add("coef", to_string(spec.kind)).add("a0", spec.a0).add("b0", spec.b0).add("x0", x0)
                         .add("reference", exact_bm ? "skorokhod-bm" : "fine-euler");
    std::vector<double> means;
    for (std::size_t j = 0; j < nd; ++j) {
        std::vector<double> v, z;
        for (std::size_t i = 0; i < n; ++i) {
            if (std::isnan(batch.values[i])) continue;
            v.push_back(sup[j][i]);
            z.push_back(zres[j][i]);
        }
        const Estimate e = safe_estimate(v);
        means.push_back(e.mean);
        out.info(with_failures(Tag(base).add("dt", dts[j]).add("stat", "mean-sup-difference"), batch), e);
        out.info(Tag(base).add("dt", dts[j]).add("stat", "mean-max-Z-residual"), safe_estimate(z));
    }
    out.check(Tag(base).add("stat", "strictly-decreasing"), single(means.back()), strictly_decreasing(means));
    double nd_bad = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        if (!std::isnan(batch.values[i]) && !dominated[i]) nd_bad += 1.0;
    out.exact(Tag(base).add("stat", "Z-dominance-violations"), nd_bad, 0.0, nd_bad == 0.0);
    return out.result;
}

ExperimentResult fold(const Params& p, std::uint64_t seed) {
    const CoefficientSpec spec = coefficient_spec(p);
    const double x0 = p.num("x0");
    const double dt = p.num("dt");
    const double horizon = p.num("horizon");
    const std::size_t n = p.count("n");
    const double near_zero = p.num("near_zero");
    require(dt > 0.0 && horizon > 0.0 && n >= 1 && near_zero > 0.0, "need dt, horizon, near_zero > 0 and n >= 1");
    const CoefficientPair pair = odd_extension(make_coefficients(spec));

    std::vector<double> ratio(n), lt(n);
    std::vector<int> res_ok(n), acc_ok(n), neg_ok(n);
    const auto batch = run_batch(n, [&](std::size_t i) {
        const auto path = simulate_signed(pair, x0, dt, horizon, path_seed(seed, 0, i));
        const auto rep = fold_check(path, pair, near_zero);
        ratio[i] = rep.bound > 0.0 ? rep.max_residual / rep.bound : 0.0;
        res_ok[i] = rep.residual_ok;
        acc_ok[i] = rep.accumulation_ok;
        lt[i] = rep.accumulation.back();
        SignedPath neg = path;
        for (double& v : neg.x) v = -v;
        neg_ok[i] = fold_check(neg, pair, near_zero).folded == rep.folded;
        return rep.max_residual;
    });
    Builder out{"fold", {}};
    const Tag base = Tag().add("coef", "odd-" + std::string(to_string(spec.kind))).add("x0", x0).add("dt", dt);
    double r_bad = 0.0, a_bad = 0.0, n_bad = 0.0, worst = 0.0;
    std::vector<double> lts;
    for (std::size_t i = 0; i < n; ++i) {
        if (std::isnan(batch.values[i])) continue;
        r_bad += !res_ok[i];
        a_bad += !acc_ok[i];
        n_bad += !neg_ok[i];
        worst = std::max(worst, ratio[i]);
        lts.push_back(lt[i]);
    }
    Estimate we = single(worst);
    we.n = lts.size();
    out.check(with_failures(Tag(base).add("stat", "max-residual/bound"), batch), we, r_bad == 0.0 && !lts.empty());
    out.exact(Tag(base).add("stat", "local-time-accumulation-violations"), a_bad, 0.0, a_bad == 0.0);
    out.exact(Tag(base).add("stat", "negation-fold-mismatches"), n_bad, 0.0, n_bad == 0.0);
    out.info(Tag(base).add("stat", "accumulated-local-time"), safe_estimate(lts));
    return out.result;
}

ExperimentResult scale_fn(const Params& p, std::uint64_t) {
    const CoefficientSpec spec = coefficient_spec(p);
    auto xs = p.list("x");
    const double tol = p.num("tol");
    const double check_tol = p.num("check_tol");
    const CoefficientPair pair = make_coefficients(spec);
    require(tol > 0.0 && check_tol > 0.0, "tolerances must be positive");
    for (double x : xs) require(x >= 0.0, "x must be nonnegative");
    std::sort(xs.begin(), xs.end());

    Builder out{"scale-fn", {}};
    const Tag base = Tag().add("coef", to_string(spec.kind)).add("a0", spec.a0).add("b0", spec.b0);
    std::optional<std::function<double(double)>> closed;
    if (pair.drift_free) closed = [](double x) { return x; };
    else if (spec.kind == CoefficientKind::constant) {
        const double k = 2.0 * spec.b0 / (spec.a0 * spec.a0);
        closed = [k](double x) { return -std::expm1(-k * x) / k; };
    }
    std::vector<double> values;
    for (double x : xs) {
        const double s = scale_function(pair, x, tol);
        values.push_back(s);
        if (closed) {
            const double o = (*closed)(x);
            const bool ok = pair.drift_free ? s == o : std::abs(s - o) <= check_tol;
            out.exact(Tag(base).add("x", x).add("stat", "s(x)"), s, o, ok);
        } else {
            out.exact(Tag(base).add("x", x).add("stat", "s(x)"), s, std::nullopt, true);
            out.result.rows.back().verdict = "info";
        }
        const double back = scale_inverse(pair, s, tol);
        out.exact(Tag(base).add("x", x).add("stat", "inverse-round-trip"), back, x, std::abs(back - x) <= 2.0 * tol * std::max(1.0, x));
    }
    bool mono = true;
    for (std::size_t i = 1; i < values.size(); ++i)
        if (xs[i] > xs[i - 1] && !(values[i] > values[i - 1])) mono = false;
    out.exact(Tag(base).add("stat", "strictly-increasing"), values.back(), std::nullopt, mono);
    return out.result;
}

// ---------------------------------------------------------------- registry

using Runner = ExperimentResult (*)(const Params&, std::uint64_t);

struct Entry {
    ExperimentInfo info;
    Runner run;
};

std::vector<ParamSpec> conditioned_params(std::vector<ParamSpec> extra) {
    extra.push_back({"dt", "1e-4", "largest step"});
    extra.push_back({"rel_step", "0.01", "relative step near the singular boundary (0 = fixed)"});
    extra.push_back({"dt_min", "1e-10", "smallest adaptive step"});
    return extra;
}

std::vector<ParamSpec> coefficient_params(std::vector<ParamSpec> extra, const char* coef, const char* b0 = "0") {
    extra.push_back({"coef", coef, "power | constant | affine | sin-osc"});
    extra.push_back({"alpha", "0.25", "exponent of the power family"});
    extra.push_back({"a0", "1", "a constant term"});
    extra.push_back({"a1", "0", "a slope (affine)"});
    extra.push_back({"b0", b0, "b constant term"});
    extra.push_back({"b1", "0", "b slope (affine)"});
    return extra;
}

const std::vector<Entry>& registry() {
    static const std::vector<Entry> entries = [] {
        std::vector<Entry> e;
        e.push_back({{"oracle-hitting", "Section 2: P^x(T_1 < T_0) = x",
                      "hitting probability of 1 before 0 for time-change solutions",
                      {{"alpha", "0.25", "exponent list"},
                       {"x", "0.5", "start list"},
                       {"n", "20000", "paths per combination"},
                       {"base_dt", "1e-4", "driving path step"},
                       {"sigmas", "3", "acceptance band in standard errors"}}},
                     oracle_hitting});
        e.push_back({{"oracle-green", "Lemma 3.1, Lemma 3.4",
                      "Green-function quadrature identities and the mean exit time of (-eta, eta)",
                      {{"x", "0.1,0.25,0.5", "start list"},
                       {"alpha", "0.25", "exponent"},
                       {"quad_tol", "1e-6", "absolute tolerance of the additive identity"},
                       {"eta", "1", "half width"},
                       {"scale", "2", "scaling factor s"},
                       {"scale_tol", "1e-8", "relative tolerance of closed form and scaling"},
                       {"n_exit", "10000", "Monte Carlo exit paths (0 skips)"},
                       {"base_dt", "1e-4", "driving path step"},
                       {"sigmas", "3", "acceptance band in standard errors"}}},
                     oracle_green});
        e.push_back({{"conditioned-additive", "Lemma 3.1",
                      "Q1 mean of int X^(2a-2) ds against -2 log x, with plain-law rejection cross-check",
                      conditioned_params({{"x", "0.25,0.5", "start list"},
                                          {"alpha", "0.25", "exponent"},
                                          {"n", "10000", "Q1 paths per start"},
                                          {"tol_rel", "0.05", "relative tolerance"},
                                          {"cv_x", "0.5", "starts cross-checked by rejection"},
                                          {"n_reject", "20000", "plain-law paths per cross-check"},
                                          {"base_dt", "1e-4", "driving path step of the plain runs"},
                                          {"sigmas", "3", "acceptance band in standard errors"}})},
                     conditioned_additive});
        e.push_back({{"q0-hitprob", "Eq (3.33)", "Q0 probability of reaching level before 0",
                      conditioned_params({{"x", "0.1", "start list"},
                                          {"level", "0.5", "upper level"},
                                          {"alpha", "0.25", "exponent"},
                                          {"n", "10000", "paths per start"},
                                          {"sigmas", "3", "acceptance band in standard errors"}})},
                     q0_hitprob});
        e.push_back({{"bessel-correspond", "Remark 2.2",
                      "Q1 paths on the |X|^(2a) clock against Bessel-3 hitting and exit oracles",
                      conditioned_params({{"x", "0.5", "start"},
                                          {"level", "0.25", "lower level"},
                                          {"alpha", "0.25", "exponent"},
                                          {"n", "10000", "paths"},
                                          {"sigmas", "3", "acceptance band in standard errors"}})},
                     bessel_correspond});
        e.push_back({{"chasing", "Lemma 3.2, Lemma 3.6, Corollary 3.7, Lemma 3.10",
                      "terminal statistics of Y when X is conditioned to exit at 1 or at 0",
                      conditioned_params({{"x0", "0.125,0.03125,0.0078125", "start list of X"},
                                          {"y0_ratio", "-1", "Y_0 = y0_ratio * x0"},
                                          {"alpha", "0.25", "exponent"},
                                          {"delta", "0.1", "closeness parameter"},
                                          {"n", "2000", "runs per branch"},
                                          {"method", "q", "q | rejection | both"},
                                          {"min_branch", "0", "required conditional samples per branch"},
                                          {"sigmas", "3", "acceptance band in standard errors"}})},
                     chasing});
        e.push_back({{"envelope", "Lemma 3.5, Eq (3.20), Eq (3.21)",
                      "ordering, envelope bounds and the decreasing sum series on coupled runs",
                      conditioned_params({{"x0", "0.125", "start of X"},
                                          {"y0_ratio", "-1", "Y_0 = y0_ratio * x0 for the Q1 runs"},
                                          {"alpha", "0.25", "exponent"},
                                          {"lambda", "0.5,1", "envelope levels (>= 4 x0)"},
                                          {"n", "1000", "runs"},
                                          {"plain_y0_ratio", "0.5", "Y_0 / x0 for the plain-law ordering runs"}})},
                     envelope});
        e.push_back({{"r-identity", "Eq (3.4)", "exponential identity of X^(1-a) - Y^(1-a) on Q1 paths",
                      {{"x0", "0.5", "start of X"},
                       {"y0", "0.4", "start of Y"},
                       {"alpha", "0.25", "exponent"},
                       {"dt", "1e-5", "coarse step"},
                       {"refine", "4", "refinement factor on the same skeleton"},
                       {"n", "20", "paths"},
                       {"tol", "1e-2", "bound on the max relative residual"},
                       {"refine_rel", "0.01", "bridge refinement near 0 (0 = off)"}}},
                     r_identity});
        e.push_back({{"transform-residuals", "Eq (3.2), Eq (3.15), Eq (3.16), Eq (3.21)",
                      "Ito transforms of X^(1-a) and |Y|^(1-a) rebuilt from the stored noise",
                      {{"x0", "0.5", "start of X"},
                       {"y0", "-0.25", "start of Y"},
                       {"alpha", "0.25", "exponent"},
                       {"mode", "q1", "q1 | plain"},
                       {"dt", "1e-5", "coarse step"},
                       {"refine", "4", "refinement factor on the same skeleton"},
                       {"n", "20", "paths"},
                       {"ratio_lo", "1.5", "lower bound of the residual ratio"},
                       {"ratio_hi", "3", "upper bound of the residual ratio"},
                       {"refine_rel", "0", "bridge refinement near 0 (0 = off)"},
                       {"floor", "0.05", "residual windows need X and |Y| above this"}}},
                     transform_residuals_exp});
        e.push_back({{"uniqueness-refine", "Theorem 1.2",
                      "sup divergence of direct Euler and transformed Euler on shared increments",
                      {{"x0", "0.5", "start"},
                       {"alpha", "0.25", "exponent"},
                       {"horizon", "1", "time horizon"},
                       {"dts", "2^-10,2^-12,2^-14,2^-16", "strictly decreasing steps"},
                       {"n", "64", "paths"},
                       {"bound", "1e-2", "bound at the finest step"},
                       {"level_b", "0.25", "excursion level of M"},
                       {"threshold", "1e-4", "zero threshold of M"}}},
                     uniqueness_refine});
        e.push_back({{"excursion-agree", "Section 4", "per-excursion max |X - Y| of the two schemes",
                      {{"x0", "0.5", "start"},
                       {"alpha", "0.25", "exponent"},
                       {"horizon", "1", "time horizon"},
                       {"dt", "2^-16", "step"},
                       {"n", "16", "paths"},
                       {"level_b", "0.25", "excursion level of M"},
                       {"threshold", "1e-4", "zero threshold of M"}}},
                     excursion_agree});
        e.push_back({{"occupation", "Eq (1.3)", "fraction of time the time-change solution spends in |x| < eps",
                      {{"alpha", "0.25", "exponent"},
                       {"x", "0", "start"},
                       {"horizon", "1", "time horizon"},
                       {"eps", "0.1,0.01,0.001", "radius list"},
                       {"n", "1000", "paths"},
                       {"base_dt", "1e-5", "driving path step"},
                       {"out_dt", "1e-4", "output grid step"}}},
                     occupation});
        e.push_back({{"reflected-sim", "Eq (1.4), Section 5",
                      "projected Euler for the reflected equation and the Skorokhod map examples",
                      coefficient_params({{"x0", "0", "start"},
                                          {"dt", "2^-14", "step"},
                                          {"horizon", "1", "time horizon"},
                                          {"n", "20000", "paths"},
                                          {"sigmas", "3", "acceptance band in standard errors"}},
                                         "constant")},
                     reflected_sim});
        e.push_back({{"reflected-unique", "Theorem 1.3", "max-coupling check of projected Euler against a reference",
                      coefficient_params({{"x0", "0", "start"},
                                          {"horizon", "1", "time horizon"},
                                          {"fine_dt", "2^-18", "reference step"},
                                          {"dts", "2^-8,2^-10,2^-12,2^-14", "strictly decreasing steps"},
                                          {"n", "40", "paths"}},
                                         "constant")},
                     reflected_unique});
        e.push_back({{"fold", "Corollary 1.4, Eq (5.2)", "folding |X| of the odd-coefficient equation",
                      coefficient_params({{"x0", "0.3", "start"},
                                          {"dt", "1e-4", "step"},
                                          {"horizon", "1", "time horizon"},
                                          {"n", "20", "paths"},
                                          {"near_zero", "1e-3", "band around 0 excluded from the residual"}},
                                         "sin-osc")},
                     fold});
        e.push_back({{"scale-fn", "Section 5: s(x)", "scale function table with inverse round trips",
                      coefficient_params({{"x", "0.1,1,5", "points"},
                                          {"tol", "1e-10", "quadrature and root tolerance"},
                                          {"check_tol", "1e-6", "tolerance against the closed form"}},
                                         "constant", "1")},
                     scale_fn});
        return e;
    }();
    return entries;
}

const Entry& find_entry(const std::string& name) {
    for (const auto& e : registry())
        if (e.info.name == name) return e;
    throw ConfigError(fmt::format("unknown experiment '{}'", name));
}

} // namespace

bool ExperimentResult::pass() const {
    return std::all_of(rows.begin(), rows.end(), [](const ResultRow& r) { return r.verdict == "pass" || r.verdict == "info"; });
}

const std::vector<ExperimentInfo>& list_experiments() {
    static const std::vector<ExperimentInfo> infos = [] {
        std::vector<ExperimentInfo> v;
        for (const auto& e : registry()) v.push_back(e.info);
        return v;
    }();
    return infos;
}

const ExperimentInfo& find_experiment(const std::string& name) { return find_entry(name).info; }

ExperimentConfig parse_config(std::istream& in) {
    ExperimentConfig cfg;
    std::set<std::string> seen;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const std::string t = trim(line);
        if (t.empty()) continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos) throw ConfigError(fmt::format("line {}: expected key=value", lineno));
        const std::string key = trim(std::string_view(t).substr(0, eq));
        const std::string value = trim(std::string_view(t).substr(eq + 1));
        if (key.empty()) throw ConfigError(fmt::format("line {}: empty key", lineno));
        if (!seen.insert(key).second) throw ConfigError(fmt::format("line {}: duplicate key '{}'", lineno, key));
        if (key == "experiment") {
            cfg.experiment = value;
        } else if (key == "seed") {
            std::uint64_t s = 0;
            const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), s);
            if (ec != std::errc() || ptr != value.data() + value.size() || value.empty())
                throw ConfigError(fmt::format("line {}: seed must be an unsigned integer", lineno));
            cfg.seed = s;
        } else if (key == "out") {
            cfg.out = value;
        } else {
            cfg.params[key] = value;
        }
    }
    return cfg;
}

ExperimentConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(fmt::format("cannot open config file '{}'", path));
    return parse_config(in);
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
    const Entry& e = find_entry(config.experiment);
    const Params params(e.info, config.params);
    return e.run(params, config.seed);
}

std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return fmt::format("{:.17g}", v);
}

std::string csv_header() { return "experiment,params,n,mean,stderr,oracle,z,verdict"; }

std::string to_csv(const ExperimentResult& result) {
    std::string out = csv_header() + "\n";
    for (const auto& r : result.rows) {
        std::string params = r.params;
        if (params.find_first_of(",\"") != std::string::npos) {
            std::string q = "\"";
            for (char c : params) q += c == '"' ? std::string("\"\"") : std::string(1, c);
            params = q + "\"";
        }
        out += fmt::format("{},{},{},{},{},{},{},{}\n", r.experiment, params, r.n, format_number(r.mean),
                           format_number(r.stderr_), r.oracle ? format_number(*r.oracle) : "",
                           r.z ? format_number(*r.z) : "", r.verdict);
    }
    return out;
}

std::string summary_line(const ResultRow& r) {
    std::string s = fmt::format("[{}] {} {}: n={} mean={:.6g} stderr={:.3g}", r.verdict, r.experiment, r.params, r.n, r.mean,
                                r.stderr_);
    if (r.oracle) s += fmt::format(" oracle={:.6g}", *r.oracle);
    if (r.z) s += fmt::format(" z={:.3g}", *r.z);
    return s;
}

} // namespace degsde
