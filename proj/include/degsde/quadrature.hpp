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

#pragma once

#include <functional>

namespace degsde {

struct QuadratureResult {
    double value = 0.0;
    double error = 0.0;
};

/// Adaptive Gauss-Kronrod integral of f over [a, b] (a may exceed b).
/// Throws ToleranceError when the error estimate stays above `tol`.
QuadratureResult integrate(const std::function<double(double)>& f, double a, double b,
                           double tol = 1e-10);

/// Closed-form integral of |z|^(-p) * (c0 + c1 * z) over [lo, hi] for an
/// interval not containing 0 in its interior, p < 1.
double power_linear_integral(double p, double c0, double c1, double lo, double hi);

} // namespace degsde
