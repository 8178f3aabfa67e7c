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

#include "report.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>

#include "ergocert/errors.hpp"

namespace ergocert
{
namespace report
{

std::string format_double(double value)
{
    std::ostringstream os;
    os << std::setprecision(17) << value;
    return os.str();
}

std::string read_text_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
    {
        throw Error(ErrorCode::IoError, "cannot open file for reading: " +
                                            path);
    }
    std::ostringstream contents;
    contents << in.rdbuf();
    if (in.bad())
    {
        throw Error(ErrorCode::IoError, "failed while reading file: " + path);
    }
    return contents.str();
}

void write_text_file(const std::string& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
    {
        throw Error(ErrorCode::IoError, "cannot open file for writing: " +
                                            path);
    }
    out << text;
    out.flush();
    if (!out)
    {
        throw Error(ErrorCode::IoError, "failed while writing file: " + path);
    }
}

namespace
{

json witness_to_json(const SlackWitness& witness)
{
    return json{{"grid_index", witness.grid_index},
                {"state", witness.state},
                {"slack", witness.slack}};
}

SlackWitness witness_from_json(const json& j)
{
    SlackWitness witness;
    witness.grid_index = j.at("grid_index").get<std::size_t>();
    witness.state = j.at("state").get<std::size_t>();
    witness.slack = j.at("slack").get<double>();
    return witness;
}

}  // namespace

json drift_to_json(const DriftCertificate& drift)
{
    return json{{"gamma", drift.gamma},
                {"K", drift.K},
                {"worst", witness_to_json(drift.worst)},
                {"provenance", drift.provenance}};
}

DriftCertificate drift_from_json(const json& j)
{
    DriftCertificate drift;
    drift.gamma = j.at("gamma").get<double>();
    drift.K = j.at("K").get<double>();
    drift.worst = witness_from_json(j.at("worst"));
    drift.provenance =
        j.at("provenance").get<std::map<std::string, std::string>>();
    return drift;
}

json minorization_to_json(const MinorizationCertificate& minor)
{
    return json{{"R", minor.R},
                {"small_set", minor.small_set},
                {"alpha_bar", minor.alpha_bar},
                {"mu_bar", minor.mu_bar.weights},
                {"provenance", minor.provenance}};
}

MinorizationCertificate minorization_from_json(const json& j)
{
    MinorizationCertificate minor;
    minor.R = j.at("R").get<double>();
    minor.small_set = j.at("small_set").get<std::vector<std::size_t>>();
    minor.alpha_bar = j.at("alpha_bar").get<double>();
    minor.mu_bar.weights = j.at("mu_bar").get<std::vector<double>>();
    minor.provenance =
        j.at("provenance").get<std::map<std::string, std::string>>();
    return minor;
}

json contraction_to_json(const ContractionConstants& cc)
{
    return json{{"alpha0", cc.alpha0},
                {"gamma0", cc.gamma0},
                {"beta", cc.beta},
                {"alpha", cc.alpha},
                {"branch_minorization", cc.branch_minorization},
                {"branch_drift", cc.branch_drift},
                {"k_floored", cc.k_floored},
                {"provenance", cc.provenance}};
}

ContractionConstants contraction_from_json(const json& j)
{
    ContractionConstants cc;
    cc.alpha0 = j.at("alpha0").get<double>();
    cc.gamma0 = j.at("gamma0").get<double>();
    cc.beta = j.at("beta").get<double>();
    cc.alpha = j.at("alpha").get<double>();
    cc.branch_minorization = j.at("branch_minorization").get<double>();
    cc.branch_drift = j.at("branch_drift").get<double>();
    cc.k_floored = j.at("k_floored").get<bool>();
    cc.provenance =
        j.at("provenance").get<std::map<std::string, std::string>>();
    return cc;
}

json r_step_to_json(const RStepCertificate& rcert)
{
    return json{{"r", rcert.r},
                {"drift_r", drift_to_json(rcert.drift_r)},
                {"minorization_r", minorization_to_json(rcert.minor_r)},
                {"contraction_r", contraction_to_json(rcert.cc_r)},
                {"gamma_1", rcert.gamma_1},
                {"K_1", rcert.K_1},
                {"alpha_prime", rcert.alpha_prime},
                {"C", rcert.C},
                {"alpha", rcert.alpha},
                {"provenance", rcert.provenance}};
}

RStepCertificate r_step_from_json(const json& j)
{
    RStepCertificate rcert;
    rcert.r = j.at("r").get<unsigned>();
    rcert.drift_r = drift_from_json(j.at("drift_r"));
    rcert.minor_r = minorization_from_json(j.at("minorization_r"));
    rcert.cc_r = contraction_from_json(j.at("contraction_r"));
    rcert.gamma_1 = j.at("gamma_1").get<double>();
    rcert.K_1 = j.at("K_1").get<double>();
    rcert.alpha_prime = j.at("alpha_prime").get<double>();
    rcert.C = j.at("C").get<double>();
    rcert.alpha = j.at("alpha").get<double>();
    rcert.provenance =
        j.at("provenance").get<std::map<std::string, std::string>>();
    return rcert;
}

json hypotheses_to_json(const LipschitzHypotheses& hyp)
{
    return json{{"L_P", hyp.L_P},
                {"L_f", hyp.L_f},
                {"K_f", hyp.K_f},
                {"grid_pairs_checked", hyp.grid_pairs_checked}};
}

LipschitzHypotheses hypotheses_from_json(const json& j)
{
    LipschitzHypotheses hyp;
    hyp.L_P = j.at("L_P").get<double>();
    hyp.L_f = j.at("L_f").get<double>();
    hyp.K_f = j.at("K_f").get<double>();
    hyp.grid_pairs_checked = j.at("grid_pairs_checked").get<unsigned>();
    return hyp;
}

json bounds_to_json(const LipschitzBounds& bounds, bool include_relaxed)
{
    json j{{"L_P_prime", bounds.L_P_prime},
           {"L_h", bounds.L_h},
           {"L_u1", bounds.L_u1},
           {"L_u2", bounds.L_u2},
           {"L_u", bounds.L_u},
           {"L_mu_star", bounds.L_mu_star}};
    if (include_relaxed)
    {
        j["alpha_doubleprime"] = bounds.alpha_doubleprime;
        j["L_P_doubleprime"] = bounds.L_P_doubleprime;
        j["L_P_r"] = bounds.L_P_r;
        j["L_rh"] = bounds.L_rh;
        j["L_ru"] = bounds.L_ru;
    }
    return j;
}

json solution_to_json(const PoissonSolution& solution)
{
    return json{{"u", solution.u.values},
                {"h", solution.h},
                {"truncation_n", solution.truncation_n},
                {"residual_norm", solution.residual_norm},
                {"centering_shift", solution.centering_shift},
                {"bound_slack", solution.bound_slack},
                {"k_u", solution.k_u}};
}

PoissonSolution solution_from_json(const json& j)
{
    PoissonSolution solution;
    solution.u.values = j.at("u").get<std::vector<double>>();
    solution.h = j.at("h").get<double>();
    solution.truncation_n = j.at("truncation_n").get<unsigned>();
    solution.residual_norm = j.at("residual_norm").get<double>();
    solution.centering_shift = j.at("centering_shift").get<double>();
    solution.bound_slack = j.at("bound_slack").get<std::vector<double>>();
    solution.k_u = j.at("k_u").get<double>();
    return solution;
}

}  // namespace report
}  // namespace ergocert
