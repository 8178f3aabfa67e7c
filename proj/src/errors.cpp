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

#include "ergocert/errors.hpp"

namespace ergocert
{

int exit_category(ErrorCode code)
{
    switch (code)
    {
        case ErrorCode::IoError:
        case ErrorCode::ParseError:
        case ErrorCode::InvalidArgument:
        case ErrorCode::DimensionMismatch:
        case ErrorCode::DegenerateGrid:
            return 2;
        case ErrorCode::InfeasibleDrift:
        case ErrorCode::EmptySmallSet:
        case ErrorCode::ZeroMinorization:
        case ErrorCode::NoFeasibleR:
        case ErrorCode::SandwichViolated:
            return 3;
        case ErrorCode::ViolatedBound:
            return 4;
        case ErrorCode::NonConvergence:
        case ErrorCode::SingularSystem:
            return 5;
    }
    return 5;
}

const char* error_code_name(ErrorCode code)
{
    switch (code)
    {
        case ErrorCode::IoError: return "io_error";
        case ErrorCode::ParseError: return "parse_error";
        case ErrorCode::InvalidArgument: return "invalid_argument";
        case ErrorCode::DimensionMismatch: return "dimension_mismatch";
        case ErrorCode::DegenerateGrid: return "degenerate_grid";
        case ErrorCode::InfeasibleDrift: return "infeasible_drift";
        case ErrorCode::EmptySmallSet: return "empty_small_set";
        case ErrorCode::ZeroMinorization: return "zero_minorization";
        case ErrorCode::NoFeasibleR: return "no_feasible_r";
        case ErrorCode::SandwichViolated: return "sandwich_violated";
        case ErrorCode::ViolatedBound: return "violated_bound";
        case ErrorCode::NonConvergence: return "non_convergence";
        case ErrorCode::SingularSystem: return "singular_system";
    }
    return "unknown";
}

}  // namespace ergocert
