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

#include "degsde/quadrature.hpp"

#include "degsde/error.hpp"

#include <array>
#include <cmath>
#include <queue>
#include <vector>

namespace degsde {
namespace {

// Kronrod 15-point nodes (descending, last is 0) and weights; Gauss 7-point
// weights for the odd-indexed Kronrod nodes.
constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
    double a, b, value, error;
    bool operator<(const Segment& o) const { return error < o.error; }
};

Segment gk15(const std::function<double(double)>& f, double a, double b) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    const double fc = f(c);
    double kron = fc * kWgk[7];
    double gauss = fc * kWg[3];
    for (int j = 0; j < 7; ++j) {
        const double dx = h * kXgk[j];
        const double s = f(c - dx) + f(c + dx);
        kron += kWgk[j] * s;
        if (j % 2 == 1) gauss += kWg[j / 2] * s;
    }
    return {a, b, kron * h, std::abs((kron - gauss) * h)};
}

} // namespace

QuadratureResult integrate(const std::function<double(double)>& f, double a, double b,
                           double tol) {
    if (a == b) return {};
    if (a > b) {
        auto r = integrate(f, b, a, tol);
        return {-r.value, r.error};
    }
    constexpr int kMaxSegments = 4000;
    std::priority_queue<Segment> heap;
    Segment first = gk15(f, a, b);
    double total = first.value;
    double err = first.error;
    heap.push(first);
    int segments = 1;
    while (err > tol && segments < kMaxSegments) {
        const Segment worst = heap.top();
        heap.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        if (!(mid > worst.a && mid < worst.b)) {
            heap.push(worst);
            break;
        }
        const Segment left = gk15(f, worst.a, mid);
        const Segment right = gk15(f, mid, worst.b);
        total += left.value + right.value - worst.value;
        err += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        ++segments;
    }
    // Recompute from the leaves to shed accumulated update rounding.
    std::vector<Segment> leaves;
    leaves.reserve(heap.size());
    while (!heap.empty()) {
        leaves.push_back(heap.top());
        heap.pop();
    }
    total = 0.0;
    err = 0.0;
    for (const auto& s : leaves) {
        total += s.value;
        err += s.error;
    }
    if (!(err <= tol) || !std::isfinite(total)) throw ToleranceError(err, tol);
    return {total, err};
}

double power_linear_integral(double p, double c0, double c1, double lo, double hi) {
    if (!(p < 1.0)) throw ParameterError("power_linear_integral: exponent must be < 1");
    if (lo > hi) return -power_linear_integral(p, c0, c1, hi, lo);
    if (lo < 0.0 && hi > 0.0) {
        return power_linear_integral(p, c0, c1, lo, 0.0) +
               power_linear_integral(p, c0, c1, 0.0, hi);
    }
    // One side of 0: z = s * u with u = |z|.
    const double s = hi <= 0.0 ? -1.0 : 1.0;
    const double u_lo = std::min(std::abs(lo), std::abs(hi));
    const double u_hi = std::max(std::abs(lo), std::abs(hi));
    const double q0 = 1.0 - p;
    const double q1 = 2.0 - p;
    const double i0 = (std::pow(u_hi, q0) - std::pow(u_lo, q0)) / q0;
    const double i1 = (std::pow(u_hi, q1) - std::pow(u_lo, q1)) / q1;
    return c0 * i0 + c1 * s * i1;
}

} // namespace degsde
