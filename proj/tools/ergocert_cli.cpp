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

// Command-line front end.  All work happens in the ergocert shared library
// behind its C API; this binary only reads the config file, overlays the
// command-line flags onto it, runs the requested command and relays the
// report (stdout) or the error (stderr) with the library's exit category.

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "ergocert/capi.h"

namespace
{

struct Flags
{
    std::string config_path;
    std::string out_dir;
    unsigned workers = 0;
    std::uint64_t seed = 0;
    double tol = 0.0;
};

// Merges the flags the user actually passed into the config JSON.  If the
// config is not valid JSON it is forwarded untouched so the library reports
// the parse error with its canonical exit code.
std::string merge_flags(const std::string& config_text, const CLI::App& sub,
                        const Flags& flags)
{
    nlohmann::json config;
    try
    {
        config = nlohmann::json::parse(config_text);
    }
    catch (const nlohmann::json::exception&)
    {
        return config_text;
    }
    if (!config.is_object())
    {
        return config_text;
    }
    if (sub.count("--out") > 0)
    {
        config["out_dir"] = flags.out_dir;
    }
    if (sub.count("--workers") > 0)
    {
        config["workers"] = flags.workers;
    }
    if (sub.count("--seed") > 0)
    {
        config["seed"] = flags.seed;
    }
    if (sub.count("--tol") > 0)
    {
        config["tol"] = flags.tol;
    }
    return config.dump(2);
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Certified stability and sensitivity analysis of "
                 "parameter-dependent Markov chains on finite state spaces"};
    app.set_version_flag("--version", ec_version());
    app.require_subcommand(1);

    Flags flags;
    const auto add_common = [&](CLI::App* sub)
    {
        sub->add_option("--config", flags.config_path,
                        "Run configuration JSON file")
            ->required();
        sub->add_option("--out", flags.out_dir,
                        "Output directory (overrides config)");
        sub->add_option("--workers", flags.workers,
                        "Worker threads for the solve stage (overrides "
                        "config)");
        sub->add_option("--seed", flags.seed,
                        "Seed for randomized checks (overrides config)");
        sub->add_option("--tol", flags.tol,
                        "Poisson series tail tolerance (overrides config)");
    };
    add_common(app.add_subcommand(
        "validate", "Load the model and check every structural invariant"));
    add_common(app.add_subcommand(
        "certify",
        "Fit drift, minorization and contraction certificates"));
    add_common(app.add_subcommand(
        "solve", "Solve the Poisson equation at every grid point"));
    add_common(app.add_subcommand(
        "sweep", "Certify parameter sensitivity across the grid"));

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError& e)
    {
        const int code = app.exit(e);
        return code == 0 ? 0 : EC_ERR_CONFIG;
    }

    const CLI::App* sub = app.get_subcommands().front();
    const std::string command = sub->get_name();

    std::ifstream in(flags.config_path, std::ios::binary);
    if (!in)
    {
        std::cerr << "error: cannot open config file: " << flags.config_path
                  << "\n";
        return EC_ERR_CONFIG;
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    const std::string config_text = merge_flags(buffer.str(), *sub, flags);

    ec_result* result = ec_run(command.c_str(), config_text.c_str());
    const int status = ec_result_status(result);
    if (status == EC_OK)
    {
        std::cout << ec_result_report(result);
    }
    else
    {
        std::cerr << "error: " << ec_result_message(result) << "\n";
    }
    ec_result_free(result);
    return status;
}
