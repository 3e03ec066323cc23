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

#include <fmt/format.h>

namespace degsde {

HorizonUnreachable::HorizonUnreachable(double attained_, double horizon_)
    : Error("horizon-unreachable",
            fmt::format("horizon unreachable: additive functional attained {:.17g} < horizon {:.17g}",
                        attained_, horizon_)),
      attained(attained_), horizon(horizon_) {}

StepFailure::StepFailure(double time_, double state_, const std::string& where)
    : Error("step-failure",
            fmt::format("step failure in {} at t={:.17g}, state={:.17g}", where, time_, state_)),
      time(time_), state(state_) {}

ToleranceError::ToleranceError(double achieved_, double requested_)
    : Error("tolerance",
            fmt::format("quadrature did not converge: achieved {:.3g}, requested {:.3g}",
                        achieved_, requested_)),
      achieved(achieved_), requested(requested_) {}

} // namespace degsde
