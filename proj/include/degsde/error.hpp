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

#include <stdexcept>
#include <string>

namespace degsde {

/// Base class of every error raised by the library. `code()` is a short
/// machine-readable tag used by the CLI error line.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& what)
        : std::runtime_error(what), code_(std::move(code)) {}
    const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

struct ParameterError : Error {
    explicit ParameterError(const std::string& what) : Error("parameter", what) {}
};

struct DomainError : Error {
    explicit DomainError(const std::string& what) : Error("domain", what) {}
};

struct PreconditionError : Error {
    explicit PreconditionError(const std::string& what) : Error("precondition", what) {}
};

struct EmptySampleError : Error {
    explicit EmptySampleError(const std::string& what) : Error("empty-sample", what) {}
};

/// The driving path ran out before the additive functional reached the
/// requested horizon.
struct HorizonUnreachable : Error {
    HorizonUnreachable(double attained, double horizon);
    double attained;
    double horizon;
};

/// Step-halving budget exhausted next to a singular boundary.
struct StepFailure : Error {
    StepFailure(double time, double state, const std::string& where);
    double time;
    double state;
};

/// Adaptive quadrature did not reach the requested tolerance.
struct ToleranceError : Error {
    ToleranceError(double achieved, double requested);
    double achieved;
    double requested;
};

/// Malformed experiment configuration (unknown key, unparsable value).
struct ConfigError : Error {
    explicit ConfigError(const std::string& what) : Error("config", what) {}
};

} // namespace degsde
