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

// Internal (src-only) batch pipeline behind the C API.
//
// Commands form a chain: validate -> certify -> solve -> sweep.  Each later
// command runs everything it depends on; certify and solve cache their
// reports under <out_dir>/cache keyed by a content hash of (model bytes,
// stage-relevant configuration, library version), so repeated sweeps
// resume.  Downstream objects are always reconstructed from the report JSON
// (cached or fresh), which keeps the cache path exercised and the emitted
// files byte-identical across runs.

#ifndef ERGOCERT_SRC_PIPELINE_HPP
#define ERGOCERT_SRC_PIPELINE_HPP

#include <cstdint>
#include <string>

#include <json.hpp>

namespace ergocert
{
namespace pipeline
{

inline constexpr const char* kVersion = "0.1.0";

// Parsed run configuration with defaults applied.  Flag overlays (--out,
// --seed, --workers, --tol) are merged into the JSON by the caller before
// it reaches the library.
struct RunConfig
{
    // Model source: exactly one of the two is set.
    std::string model_path;
    nlohmann::json generator;  // null when a path is given

    std::string out_dir = "out";
    std::uint64_t seed = 1;
    unsigned workers = 1;
    double tol = 1e-10;  // Poisson series tail tolerance
    unsigned r_max = 8;

    // Contraction-constant tuning: "default", "tuned" or "explicit".
    std::string beta_mode = "default";
    double alpha0 = -1.0;  // explicit mode only
    double gamma0 = -1.0;  // explicit mode only
    unsigned tune_steps = 32;

    // Minorization: R <= 0 selects default_R(drift, margin).
    double R = -1.0;
    double R_margin = 0.25;

    // Sensitivity stage.
    bool all_pairs = false;
    unsigned measure_trials = 0;
    double alpha_dd = -1.0;  // <= 0 selects the default growth rate

    unsigned contraction_trials = 64;
};

RunConfig parse_config(const std::string& config_json);

// Executes one command ("validate", "certify", "solve", "sweep"), writes
// reports and tables under config.out_dir, and returns the command's own
// report.  Throws Error; exit category via exit_category(code).
nlohmann::json run_command(const std::string& command,
                           const std::string& config_json);

}  // namespace pipeline
}  // namespace ergocert

#endif  // ERGOCERT_SRC_PIPELINE_HPP
