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

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "ergocert/errors.hpp"
#include "ergocert/statespace.hpp"

namespace ergocert
{

namespace
{

using nlohmann::json;

json parse_json_text(const std::string& text, const std::string& origin)
{
    json j = json::parse(text, nullptr, /*allow_exceptions=*/false);
    if (j.is_discarded())
    {
        throw Error(ErrorCode::ParseError, "invalid JSON in " + origin);
    }
    return j;
}

const json& expect_field(const json& j, const char* key,
                         const std::string& origin)
{
    auto it = j.find(key);
    if (it == j.end())
    {
        throw Error(ErrorCode::ParseError,
                    origin + ": missing required field '" + key + "'");
    }
    return *it;
}

std::vector<double> as_double_vector(const json& j, const std::string& what)
{
    if (!j.is_array())
    {
        throw Error(ErrorCode::ParseError, what + " must be an array");
    }
    std::vector<double> out;
    out.reserve(j.size());
    for (const auto& v : j)
    {
        if (!v.is_number())
        {
            throw Error(ErrorCode::ParseError,
                        what + " must contain only numbers");
        }
        out.push_back(v.get<double>());
    }
    return out;
}

std::vector<std::vector<double>> as_matrix(const json& j,
                                           const std::string& what)
{
    if (!j.is_array())
    {
        throw Error(ErrorCode::ParseError, what + " must be an array of rows");
    }
    std::vector<std::vector<double>> out;
    out.reserve(j.size());
    for (std::size_t i = 0; i < j.size(); ++i)
    {
        out.push_back(as_double_vector(j[i], what + " row"));
    }
    return out;
}

Kernel kernel_from_json(const json& j, std::size_t n, const std::string& what)
{
    auto rows = as_matrix(j, what);
    if (rows.size() != n)
    {
        throw Error(ErrorCode::DimensionMismatch,
                    what + " must have one row per state");
    }
    std::vector<double> flat;
    flat.reserve(n * n);
    for (const auto& row : rows)
    {
        if (row.size() != n)
        {
            throw Error(ErrorCode::DimensionMismatch,
                        what + " rows must have one entry per state");
        }
        flat.insert(flat.end(), row.begin(), row.end());
    }
    return Kernel(n, std::move(flat));
}

}  // namespace

Model load_model_json(const std::string& text, const std::string& origin)
{
    const json j = parse_json_text(text, origin);
    if (!j.is_object())
    {
        throw Error(ErrorCode::ParseError, origin + ": model must be an object");
    }

    Model model;
    const auto n_field = expect_field(j, "n", origin);
    if (!n_field.is_number_unsigned() || n_field.get<std::size_t>() == 0)
    {
        throw Error(ErrorCode::ParseError,
                    origin + ": 'n' must be a positive integer");
    }
    const std::size_t n = n_field.get<std::size_t>();
    model.family.space.n = n;

    if (j.contains("labels"))
    {
        const auto& labels = j["labels"];
        if (!labels.is_array())
        {
            throw Error(ErrorCode::ParseError,
                        origin + ": 'labels' must be an array of strings");
        }
        for (const auto& l : labels)
        {
            if (!l.is_string())
            {
                throw Error(ErrorCode::ParseError,
                            origin + ": 'labels' must contain only strings");
            }
            model.family.space.labels.push_back(l.get<std::string>());
        }
    }

    // Grid points may be given either as numbers (one-dimensional parameters)
    // or as coordinate arrays.
    const auto& grid = expect_field(j, "theta_grid", origin);
    if (!grid.is_array() || grid.empty())
    {
        throw Error(ErrorCode::ParseError,
                    origin + ": 'theta_grid' must be a nonempty array");
    }
    for (const auto& point : grid)
    {
        if (point.is_number())
        {
            model.family.theta_grid.push_back({point.get<double>()});
        }
        else
        {
            model.family.theta_grid.push_back(
                as_double_vector(point, "'theta_grid' point"));
        }
    }
    const std::size_t g = model.family.theta_grid.size();

    const auto& kernels = expect_field(j, "kernels", origin);
    if (!kernels.is_array() || kernels.size() != g)
    {
        throw Error(ErrorCode::ParseError,
                    origin + ": 'kernels' must be an array with one kernel "
                             "per grid point");
    }
    for (std::size_t i = 0; i < g; ++i)
    {
        model.family.kernels.push_back(
            kernel_from_json(kernels[i], n, "'kernels' entry"));
    }

    // The observable may be shared across the grid (a flat array of n
    // numbers) or given per grid point (an array of g arrays).
    const auto& f = expect_field(j, "f", origin);
    if (!f.is_array() || f.empty())
    {
        throw Error(ErrorCode::ParseError,
                    origin + ": 'f' must be a nonempty array");
    }
    if (f.front().is_number())
    {
        Observable shared{as_double_vector(f, "'f'")};
        if (shared.size() != n)
        {
            throw Error(ErrorCode::DimensionMismatch,
                        origin + ": 'f' must have one value per state");
        }
        shared.validate_finite();
        model.family.f.assign(g, shared);
    }
    else
    {
        if (f.size() != g)
        {
            throw Error(ErrorCode::DimensionMismatch,
                        origin + ": per-parameter 'f' must have one array "
                                 "per grid point");
        }
        for (const auto& fj : f)
        {
            Observable obs{as_double_vector(fj, "'f' entry")};
            if (obs.size() != n)
            {
                throw Error(ErrorCode::DimensionMismatch,
                            origin + ": 'f' entries must have one value per "
                                     "state");
            }
            obs.validate_finite();
            model.family.f.push_back(std::move(obs));
        }
    }

    model.V.values = as_double_vector(expect_field(j, "V", origin), "'V'");
    if (model.V.size() != n)
    {
        throw Error(ErrorCode::DimensionMismatch,
                    origin + ": 'V' must have one value per state");
    }
    model.V.validate_nonnegative();

    if (j.contains("V_family"))
    {
        const auto& vf = j["V_family"];
        if (!vf.is_array() || vf.size() != g)
        {
            throw Error(ErrorCode::ParseError,
                        origin + ": 'V_family' must have one array per grid "
                                 "point");
        }
        for (const auto& vj : vf)
        {
            Lyapunov v;
            v.values = as_double_vector(vj, "'V_family' entry");
            if (v.size() != n)
            {
                throw Error(ErrorCode::DimensionMismatch,
                            origin + ": 'V_family' entries must have one "
                                     "value per state");
            }
            v.validate_nonnegative();
            model.V_family.push_back(std::move(v));
        }
    }

    if (j.contains("sandwich"))
    {
        const auto& s = j["sandwich"];
        if (!s.is_object())
        {
            throw Error(ErrorCode::ParseError,
                        origin + ": 'sandwich' must be an object with keys "
                                 "a, b, c, d");
        }
        model.has_sandwich = true;
        model.sandwich_a = expect_field(s, "a", origin).get<double>();
        model.sandwich_b = expect_field(s, "b", origin).get<double>();
        model.sandwich_c = expect_field(s, "c", origin).get<double>();
        model.sandwich_d = expect_field(s, "d", origin).get<double>();
        if (model.sandwich_a <= 0.0 || model.sandwich_c <= 0.0)
        {
            throw Error(ErrorCode::InvalidArgument,
                        origin + ": sandwich slopes a and c must be positive");
        }
        if (model.V_family.empty())
        {
            throw Error(ErrorCode::ParseError,
                        origin + ": 'sandwich' requires 'V_family'");
        }
    }

    model.family.validate();
    return model;
}

Model load_model_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
    {
        throw Error(ErrorCode::IoError, "cannot open model file: " + path);
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return load_model_json(buffer.str(), path);
}

std::string save_model_json(const Model& model)
{
    json j;
    j["n"] = model.family.space.n;
    if (!model.family.space.labels.empty())
    {
        j["labels"] = model.family.space.labels;
    }
    j["theta_grid"] = model.family.theta_grid;

    json kernels = json::array();
    const std::size_t n = model.family.space.n;
    for (const auto& kernel : model.family.kernels)
    {
        json rows = json::array();
        for (std::size_t i = 0; i < n; ++i)
        {
            json row = json::array();
            for (std::size_t jj = 0; jj < n; ++jj)
            {
                row.push_back(kernel(i, jj));
            }
            rows.push_back(std::move(row));
        }
        kernels.push_back(std::move(rows));
    }
    j["kernels"] = std::move(kernels);

    json fs = json::array();
    for (const auto& obs : model.family.f)
    {
        fs.push_back(obs.values);
    }
    j["f"] = std::move(fs);

    j["V"] = model.V.values;
    if (!model.V_family.empty())
    {
        json vf = json::array();
        for (const auto& v : model.V_family)
        {
            vf.push_back(v.values);
        }
        j["V_family"] = std::move(vf);
    }
    if (model.has_sandwich)
    {
        j["sandwich"] = {{"a", model.sandwich_a},
                         {"b", model.sandwich_b},
                         {"c", model.sandwich_c},
                         {"d", model.sandwich_d}};
    }
    return j.dump(2);
}

}  // namespace ergocert
