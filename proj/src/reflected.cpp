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

#include "degsde/reflected.hpp"

#include "degsde/error.hpp"
#include "degsde/quadrature.hpp"

#include <boost/math/tools/roots.hpp>
#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <cstdint>

namespace degsde {
namespace {

double sgn(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

double checked(const std::function<double(double)>& f, double x, const char* which, double t) {
    const double v = f(x);
    if (!std::isfinite(v)) throw StepFailure(t, x, fmt::format("coefficient {} is not finite", which));
    return v;
}

} // namespace

CoefficientKind parse_coefficient_kind(std::string_view name) {
    if (name == "power") return CoefficientKind::power;
    if (name == "constant") return CoefficientKind::constant;
    if (name == "affine") return CoefficientKind::affine;
    if (name == "sin-osc") return CoefficientKind::sin_osc;
    throw ParameterError(fmt::format("unknown coefficient family '{}'", name));
}

std::string_view to_string(CoefficientKind kind) noexcept {
    switch (kind) {
    case CoefficientKind::power: return "power";
    case CoefficientKind::constant: return "constant";
    case CoefficientKind::affine: return "affine";
    case CoefficientKind::sin_osc: return "sin-osc";
    }
    return "unknown";
}

CoefficientPair make_coefficients(const CoefficientSpec& s) {
    CoefficientPair p;
    p.name = std::string(to_string(s.kind));
    const double b0 = s.b0;
    const double b1 = s.b1;
    switch (s.kind) {
    case CoefficientKind::power: {
        if (!(s.alpha > 0.0)) throw ParameterError("power coefficient needs alpha > 0");
        const double al = s.alpha;
        p.a = [al](double x) { return std::pow(std::abs(x), al); };
        p.b = [b0](double) { return b0; };
        p.drift_free = b0 == 0.0;
        break;
    }
    case CoefficientKind::constant: {
        if (!(s.a0 > 0.0)) throw ParameterError("constant coefficient needs a0 > 0");
        const double a0 = s.a0;
        p.a = [a0](double) { return a0; };
        p.b = [b0](double) { return b0; };
        p.drift_free = b0 == 0.0;
        break;
    }
    case CoefficientKind::affine: {
        if (!(s.a0 >= 0.0 && s.a1 >= 0.0)) throw ParameterError("affine coefficient needs a0, a1 >= 0");
        const double a0 = s.a0;
        const double a1 = s.a1;
        p.a = [a0, a1](double x) { return a0 + a1 * x; };
        p.b = [b0, b1](double x) { return b0 + b1 * x; };
        p.drift_free = b0 == 0.0 && b1 == 0.0;
        break;
    }
    case CoefficientKind::sin_osc:
        p.a = [](double x) {
            if (x == 0.0) return 2.0;
            const double x2 = x * x;
            return 2.0 + std::sin(1.0 / (x2 * x2));
        };
        p.b = [b0](double) { return b0; };
        p.drift_free = b0 == 0.0;
        break;
    }
    return p;
}

CoefficientPair odd_extension(const CoefficientPair& pair) {
    CoefficientPair p;
    p.name = "odd-" + pair.name;
    p.a = [f = pair.a](double x) { return sgn(x) * f(std::abs(x)); };
    p.b = [f = pair.b](double x) { return sgn(x) * f(std::abs(x)); };
    p.drift_free = pair.drift_free;
    return p;
}

double scale_derivative(const CoefficientPair& pair, double x, double tol) {
    if (!(x >= 0.0)) throw DomainError("scale_derivative: x must be nonnegative");
    if (pair.drift_free || x == 0.0) return 1.0;
    auto ratio = [&](double r) {
        const double a = pair.a(r);
        return 2.0 * pair.b(r) / (a * a);
    };
    return std::exp(-integrate(ratio, 0.0, x, tol).value);
}

double scale_function(const CoefficientPair& pair, double x, double tol) {
    if (!(x >= 0.0)) throw DomainError("scale_function: x must be nonnegative");
    if (pair.drift_free || x == 0.0) return x;
    return integrate([&](double y) { return scale_derivative(pair, y, 0.1 * tol); }, 0.0, x, tol).value;
}

double scale_inverse(const CoefficientPair& pair, double s_value, double tol) {
    if (!(s_value >= 0.0) || !std::isfinite(s_value))
        throw DomainError("scale_inverse: value must be finite and nonnegative");
    if (s_value == 0.0) return 0.0;
    if (pair.drift_free) return s_value;
    double hi = 1.0;
    while (scale_function(pair, hi, 0.1 * tol) < s_value) {
        hi *= 2.0;
        if (hi > 1e6) throw DomainError("scale_inverse: value outside the computed range of s");
    }
    auto g = [&](double x) { return scale_function(pair, x, 0.1 * tol) - s_value; };
    auto done = [tol](double lo, double up) { return up - lo <= tol; };
    const auto [lo, up] = boost::math::tools::bisect(g, 0.0, hi, done);
    return 0.5 * (lo + up);
}

SkorokhodResult skorokhod_map(std::span<const double> psi) {
    SkorokhodResult r;
    if (psi.empty()) return r;
    if (psi[0] < 0.0) throw PreconditionError("skorokhod_map: psi(0) must be nonnegative");
    r.reflected.resize(psi.size());
    r.local_time.resize(psi.size());
    double l = 0.0;
    for (std::size_t k = 0; k < psi.size(); ++k) {
        l = std::max(l, -psi[k]);
        r.local_time[k] = l;
        r.reflected[k] = psi[k] + l;
    }
    return r;
}

ReflectedPath simulate_reflected(const CoefficientPair& pair, double x0, double dt,
                                 std::span<const double> inc, SeedId seed) {
    if (!(x0 >= 0.0)) throw PreconditionError("simulate_reflected: x0 must be nonnegative");
    if (!(dt > 0.0)) throw ParameterError("simulate_reflected: dt must be positive");
    ReflectedPath p;
    p.seed = seed;
    p.times.reserve(inc.size() + 1);
    p.x.reserve(inc.size() + 1);
    p.local_time.reserve(inc.size() + 1);
    p.times.push_back(0.0);
    p.x.push_back(x0);
    p.local_time.push_back(0.0);
    p.dw.assign(inc.begin(), inc.end());
    p.pushed.assign(inc.size(), false);
    double x = x0;
    double l = 0.0;
    for (std::size_t k = 0; k < inc.size(); ++k) {
        const double t = static_cast<double>(k) * dt;
        const double free = x + checked(pair.a, x, "a", t) * inc[k] + checked(pair.b, x, "b", t) * dt;
        if (free < 0.0) {
            l -= free;
            x = 0.0;
            p.pushed[k] = true;
        } else {
            x = free;
        }
        p.times.push_back(static_cast<double>(k + 1) * dt);
        p.x.push_back(x);
        p.local_time.push_back(l);
    }
    return p;
}

ReflectedPath simulate_reflected(const CoefficientPair& pair, double x0, double dt, double horizon,
                                 SeedId seed) {
    if (!(dt > 0.0) || !(horizon > 0.0)) throw ParameterError("simulate_reflected: dt and horizon must be positive");
    const auto n = static_cast<std::size_t>(std::ceil(horizon / dt - 1e-9));
    const BrownianPath w = gen_path(seed, n, dt);
    return simulate_reflected(pair, x0, dt, w.increments, seed);
}

ReflectedPath reflected_bm_reference(double x0, const BrownianPath& fine, std::size_t factor) {
    if (!(x0 >= 0.0)) throw PreconditionError("reflected_bm_reference: x0 must be nonnegative");
    if (factor == 0 || fine.steps() % factor != 0)
        throw ParameterError("reflected_bm_reference: factor must divide the path length");
    std::vector<double> psi = fine.values();
    for (double& v : psi) v += x0;
    const auto sk = skorokhod_map(psi);
    ReflectedPath p;
    p.seed = fine.seed;
    p.dw = coarsen(fine.increments, factor);
    p.pushed.assign(p.dw.size(), false);
    const double dt = fine.dt * static_cast<double>(factor);
    for (std::size_t k = 0; k <= p.dw.size(); ++k) {
        const std::size_t j = k * factor;
        p.times.push_back(static_cast<double>(k) * dt);
        p.x.push_back(sk.reflected[j]);
        p.local_time.push_back(sk.local_time[j]);
        if (k > 0 && sk.local_time[j] > sk.local_time[j - factor]) p.pushed[k - 1] = true;
    }
    return p;
}

MaxCouplingReport max_coupling_check(const ReflectedPath& s1, const ReflectedPath& s2,
                                     const CoefficientPair& pair) {
    if (!(s1.seed == s2.seed)) throw PreconditionError("max_coupling_check: paths use different seeds");
    if (s1.size() != s2.size() || s1.size() == 0)
        throw PreconditionError("max_coupling_check: paths are not on a common grid");
    for (std::size_t k = 0; k < s1.dw.size(); ++k)
        if (std::abs(s1.dw[k] - s2.dw[k]) > 1e-12 * (1.0 + std::abs(s1.dw[k])))
            throw PreconditionError("max_coupling_check: paths use different increments");
    if (s1.x[0] != s2.x[0]) throw PreconditionError("max_coupling_check: paths start apart");

    MaxCouplingReport r;
    const std::size_t n = s1.size();
    r.z.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
        r.z[k] = std::max(s1.x[k], s2.x[k]);
        r.sup_difference = std::max(r.sup_difference, std::abs(s1.x[k] - s2.x[k]));
        if (r.z[k] < s1.x[k] || r.z[k] < s2.x[k]) r.z_dominates = false;
    }
    std::vector<double> psi(n);
    psi[0] = r.z[0];
    for (std::size_t k = 0; k + 1 < n; ++k) {
        const double h = s1.times[k + 1] - s1.times[k];
        psi[k + 1] = psi[k] + pair.a(r.z[k]) * s1.dw[k] + pair.b(r.z[k]) * h;
    }
    const auto sk = skorokhod_map(psi);
    for (std::size_t k = 0; k < n; ++k) r.z_residual = std::max(r.z_residual, std::abs(r.z[k] - sk.reflected[k]));
    return r;
}

SignedPath simulate_signed(const CoefficientPair& pair, double x0, double dt, double horizon, SeedId seed) {
    if (!(dt > 0.0) || !(horizon > 0.0)) throw ParameterError("simulate_signed: dt and horizon must be positive");
    const auto n = static_cast<std::size_t>(std::ceil(horizon / dt - 1e-9));
    const BrownianPath w = gen_path(seed, n, dt);
    SignedPath p;
    p.dt = dt;
    p.dw = w.increments;
    p.times.reserve(n + 1);
    p.x.reserve(n + 1);
    p.times.push_back(0.0);
    p.x.push_back(x0);
    double x = x0;
    for (std::size_t k = 0; k < n; ++k) {
        const double t = static_cast<double>(k) * dt;
        x += checked(pair.a, x, "a", t) * p.dw[k] + checked(pair.b, x, "b", t) * dt;
        p.times.push_back(static_cast<double>(k + 1) * dt);
        p.x.push_back(x);
    }
    return p;
}

FoldReport fold_check(const SignedPath& path, const CoefficientPair& pair, double near_zero) {
    for (double probe : {0.1, 0.37, 1.3, 2.9}) {
        const double sa = pair.a(probe) + pair.a(-probe);
        const double sb = pair.b(probe) + pair.b(-probe);
        if (std::abs(sa) > 1e-12 * (1.0 + std::abs(pair.a(probe))) ||
            std::abs(sb) > 1e-12 * (1.0 + std::abs(pair.b(probe))))
            throw PreconditionError("fold_check: coefficients are not odd");
    }
    if (path.dw.size() + 1 != path.x.size()) throw PreconditionError("fold_check: noise and path sizes differ");
    FoldReport r;
    const std::size_t n = path.x.size();
    r.folded.resize(n);
    for (std::size_t k = 0; k < n; ++k) r.folded[k] = std::abs(path.x[k]);
    r.accumulation.assign(n, 0.0);
    double max_a = 0.0;
    double acc = 0.0;
    for (std::size_t k = 0; k + 1 < n; ++k) {
        const double h = path.times[k + 1] - path.times[k];
        const double u = r.folded[k];
        const double u1 = r.folded[k + 1];
        const double mismatch = (u1 - u) - (pair.a(u) * path.dw[k] + pair.b(u) * h);
        const bool away = u >= near_zero && u1 >= near_zero && sgn(path.x[k]) == sgn(path.x[k + 1]);
        max_a = std::max(max_a, std::abs(pair.a(path.x[k])));
        if (away) {
            r.max_residual = std::max(r.max_residual, std::abs(mismatch));
        } else {
            acc += mismatch;
            if (mismatch < -1e-12 || acc < -1e-12) r.accumulation_ok = false;
        }
        r.accumulation[k + 1] = acc;
    }
    const double dt = n > 1 ? path.times[1] - path.times[0] : 0.0;
    r.bound = 10.0 * std::sqrt(dt) * max_a;
    r.residual_ok = r.max_residual <= r.bound;
    return r;
}

} // namespace degsde
