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

#include "ergocert/capi.h"

#include <exception>
#include <string>

#include "ergocert/errors.hpp"
#include "ergocert/statespace.hpp"
#include "pipeline.hpp"

// The opaque result handle.  Strings live as long as the handle.
struct ec_result
{
    int status = EC_OK;
    std::string report;
    std::string message;
};

namespace
{

thread_local std::string g_last_error;

// Maps any in-flight exception to (status, message).  Exceptions that are
// not library errors are treated as configuration/input problems.
void capture_error(ec_result& result)
{
    try
    {
        throw;
    }
    catch (const ergocert::Error& error)
    {
        result.status = ergocert::exit_category(error.code());
        result.message = std::string(ergocert::error_code_name(error.code())) +
                         ": " + error.what();
    }
    catch (const std::exception& error)
    {
        result.status = EC_ERR_CONFIG;
        result.message = error.what();
    }
    catch (...)
    {
        result.status = EC_ERR_CONFIG;
        result.message = "unknown error";
    }
    g_last_error = result.message;
}

}  // namespace

extern "C"
{

const char* ec_version(void)
{
    return ergocert::pipeline::kVersion;
}

const char* ec_last_error(void)
{
    return g_last_error.c_str();
}

ec_result* ec_run(const char* command, const char* config_json)
{
    auto* result = new ec_result();
    if (command == nullptr || config_json == nullptr)
    {
        result->status = EC_ERR_CONFIG;
        result->message = "ec_run: command and config_json must be non-NULL";
        g_last_error = result->message;
        return result;
    }
    try
    {
        const nlohmann::json report =
            ergocert::pipeline::run_command(command, config_json);
        result->report = report.dump(2) + "\n";
        g_last_error.clear();
    }
    catch (...)
    {
        capture_error(*result);
    }
    return result;
}

int ec_result_status(const ec_result* result)
{
    return result == nullptr ? EC_ERR_CONFIG : result->status;
}

const char* ec_result_report(const ec_result* result)
{
    return result == nullptr ? "" : result->report.c_str();
}

const char* ec_result_message(const ec_result* result)
{
    return result == nullptr ? "" : result->message.c_str();
}

void ec_result_free(ec_result* result)
{
    delete result;
}

int ec_validate_model_file(const char* path)
{
    if (path == nullptr)
    {
        g_last_error = "ec_validate_model_file: path must be non-NULL";
        return EC_ERR_CONFIG;
    }
    try
    {
        const ergocert::Model model = ergocert::load_model_file(path);
        model.family.validate();
        g_last_error.clear();
        return EC_OK;
    }
    catch (...)
    {
        ec_result scratch;
        capture_error(scratch);
        return scratch.status;
    }
}

}  // extern "C"
