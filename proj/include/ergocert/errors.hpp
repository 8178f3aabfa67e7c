/*
 * Copyright 2026 The ergocert Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef ERGOCERT_ERRORS_HPP
#define ERGOCERT_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace ergocert
{

// Failure taxonomy. Every code maps onto one of four coarse categories that
// the CLI turns into exit codes: configuration/input problems (2), structural
// assumptions that could not be satisfied on the supplied family (3), a
// certified bound observed to fail (4), and numerical non-convergence or
// degeneracy (5).
enum class ErrorCode
{
    // category: configuration / input (exit 2)
    IoError,
    ParseError,
    InvalidArgument,
    DimensionMismatch,
    DegenerateGrid,
    // category: assumption infeasible (exit 3)
    InfeasibleDrift,
    EmptySmallSet,
    ZeroMinorization,
    NoFeasibleR,
    SandwichViolated,
    // category: bound violation (exit 4)
    ViolatedBound,
    // category: numerical failure (exit 5)
    NonConvergence,
    SingularSystem,
};

// Coarse category used for process exit codes.
int exit_category(ErrorCode code);

// Stable identifier string for reports ("infeasible_drift", ...).
const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error
{
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code)
    {
    }

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace ergocert

#endif  // ERGOCERT_ERRORS_HPP
