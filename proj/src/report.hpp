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

// Internal (src-only) JSON/CSV serialization of certificates and solutions.
//
// Round-trip fidelity: doubles are emitted in shortest round-trip form by
// the JSON library and with 17 significant digits in CSV, so objects
// reconstructed from a cached report are bitwise identical to the originals
// and regenerated outputs are byte-identical across runs.  Reports carry no
// timestamps, hostnames or absolute paths.

#ifndef ERGOCERT_SRC_REPORT_HPP
#define ERGOCERT_SRC_REPORT_HPP

#include <string>

#include <json.hpp>

#include "ergocert/certify.hpp"
#include "ergocert/lipschitz.hpp"
#include "ergocert/poisson.hpp"
#include "ergocert/statespace.hpp"

namespace ergocert
{
namespace report
{

using json = nlohmann::json;

// 17 significant digits: enough for exact double round-trips in CSV cells.
std::string format_double(double value);

// Whole-file text I/O; throws Error(IoError) with the path on failure.
std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

// Certificates.  The drift slack table is summarized by its worst witness;
// the full table lives only in memory (it is re-derivable by re-fitting).
json drift_to_json(const DriftCertificate& drift);
DriftCertificate drift_from_json(const json& j);

json minorization_to_json(const MinorizationCertificate& minor);
MinorizationCertificate minorization_from_json(const json& j);

json contraction_to_json(const ContractionConstants& cc);
ContractionConstants contraction_from_json(const json& j);

json r_step_to_json(const RStepCertificate& rcert);
RStepCertificate r_step_from_json(const json& j);

json hypotheses_to_json(const LipschitzHypotheses& hyp);
LipschitzHypotheses hypotheses_from_json(const json& j);

// include_relaxed selects whether the r-step fields are present (they are
// meaningless on the one-step route).
json bounds_to_json(const LipschitzBounds& bounds, bool include_relaxed);

json solution_to_json(const PoissonSolution& solution);
PoissonSolution solution_from_json(const json& j);

}  // namespace report
}  // namespace ergocert

#endif  // ERGOCERT_SRC_REPORT_HPP
