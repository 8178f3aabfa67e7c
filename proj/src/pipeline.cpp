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

#include "pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <filesystem>
#include <functional>
#include <mutex>
#include <sstream>
#include <thread>
#include <vector>

#include "ergocert/certify.hpp"
#include "ergocert/errors.hpp"
#include "ergocert/lipschitz.hpp"
#include "ergocert/models.hpp"
#include "ergocert/norms.hpp"
#include "ergocert/poisson.hpp"
#include "ergocert/statespace.hpp"
#include "hashing.hpp"
#include "report.hpp"

namespace ergocert
{
namespace pipeline
{

using json = nlohmann::json;

namespace
{

// Series and direct Poisson solutions must agree to this in |.|_beta.
constexpr double kOracleGap = 1e-6;
// Slack for re-checking mu*(V) <= K/(1-gamma) on computed measures.
constexpr double kMomentSlack = 1e-8;

void require(bool condition, ErrorCode code, const std::string& message)
{
    if (!condition)
    {
        throw Error(code, message);
    }
}

std::vector<double> as_doubles(const json& j, const std::string& what)
{
    require(j.is_array(), ErrorCode::InvalidArgument,
            what + " must be an array of numbers");
    std::vector<double> values;
    values.reserve(j.size());
    for (const auto& entry : j)
    {
        require(entry.is_number(), ErrorCode::InvalidArgument,
                what + " must be an array of numbers");
        values.push_back(entry.get<double>());
    }
    return values;
}

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

json parse_json_object(const std::string& text, const std::string& what)
{
    json j;
    try
    {
        j = json::parse(text);
    }
    catch (const json::exception& e)
    {
        throw Error(ErrorCode::ParseError,
                    what + " is not valid JSON: " + e.what());
    }
    require(j.is_object(), ErrorCode::ParseError,
            what + " must be a JSON object");
    return j;
}

}  // namespace

RunConfig parse_config(const std::string& config_json)
{
    const json j = parse_json_object(config_json, "run configuration");

    RunConfig config;
    require(j.contains("model") && j.at("model").is_object(),
            ErrorCode::InvalidArgument,
            "run configuration needs a \"model\" object with either "
            "\"path\" or \"generator\"");
    const json& model = j.at("model");
    const bool has_path = model.contains("path");
    const bool has_generator = model.contains("generator");
    require(has_path != has_generator, ErrorCode::InvalidArgument,
            "\"model\" must contain exactly one of \"path\" and "
            "\"generator\"");
    if (has_path)
    {
        config.model_path = model.at("path").get<std::string>();
        require(!config.model_path.empty(), ErrorCode::InvalidArgument,
                "\"model.path\" must be a nonempty string");
    }
    else
    {
        config.generator = model.at("generator");
        require(config.generator.is_object() &&
                    config.generator.contains("name"),
                ErrorCode::InvalidArgument,
                "\"model.generator\" must be an object with a \"name\"");
    }

    config.out_dir = j.value("out_dir", std::string("out"));
    require(!config.out_dir.empty(), ErrorCode::InvalidArgument,
            "\"out_dir\" must be a nonempty path");
    config.seed = j.value("seed", std::uint64_t{1});
    config.workers = j.value("workers", 1u);
    require(config.workers >= 1, ErrorCode::InvalidArgument,
            "\"workers\" must be at least 1");
    config.tol = j.value("tol", 1e-10);
    require(config.tol > 0.0, ErrorCode::InvalidArgument,
            "\"tol\" must be positive");
    config.r_max = j.value("r_max", 8u);
    require(config.r_max >= 1, ErrorCode::InvalidArgument,
            "\"r_max\" must be at least 1");

    const json beta = j.value("beta", json::object());
    config.beta_mode = beta.value("mode", std::string("default"));
    require(config.beta_mode == "default" || config.beta_mode == "tuned" ||
                config.beta_mode == "explicit",
            ErrorCode::InvalidArgument,
            "\"beta.mode\" must be one of default|tuned|explicit");
    config.alpha0 = beta.value("alpha0", -1.0);
    config.gamma0 = beta.value("gamma0", -1.0);
    config.tune_steps = beta.value("steps", 32u);
    if (config.beta_mode == "explicit")
    {
        require(config.alpha0 > 0.0 && config.gamma0 > 0.0,
                ErrorCode::InvalidArgument,
                "explicit beta mode needs positive \"beta.alpha0\" and "
                "\"beta.gamma0\"");
    }

    const json minor = j.value("minorization", json::object());
    config.R = minor.value("R", -1.0);
    config.R_margin = minor.value("margin", 0.25);
    require(config.R_margin > 0.0, ErrorCode::InvalidArgument,
            "\"minorization.margin\" must be positive");

    const json lip = j.value("lipschitz", json::object());
    config.all_pairs = lip.value("all_pairs", false);
    config.measure_trials = lip.value("measure_trials", 0u);
    config.alpha_dd = lip.value("alpha_dd", -1.0);

    config.contraction_trials = j.value("contraction_trials", 64u);
    return config;
}

namespace
{

// ---------------------------------------------------------------------------
// Model acquisition
// ---------------------------------------------------------------------------

struct ModelBundle
{
    Model model;
    std::string model_json;  // canonical bytes of the model, for hashing
    std::string model_hash;
    bool generated = false;
};

Model generator_two_state(const json& g)
{
    const std::vector<double> grid =
        as_doubles(g.at("theta_grid"), "generator theta_grid");
    const std::vector<double> p = as_doubles(g.at("p"), "generator p");
    const std::vector<double> q = as_doubles(g.at("q"), "generator q");
    require(p.size() == 2 && q.size() == 2, ErrorCode::InvalidArgument,
            "two_state generator needs affine \"p\" and \"q\" as "
            "[intercept, slope]");
    require(g.contains("f") && g.at("f").is_array() && g.at("f").size() == 2,
            ErrorCode::InvalidArgument,
            "two_state generator needs \"f\" as [[intercept, slope], "
            "[intercept, slope]]");
    const std::vector<double> f0 = as_doubles(g.at("f")[0], "generator f[0]");
    const std::vector<double> f1 = as_doubles(g.at("f")[1], "generator f[1]");
    require(f0.size() == 2 && f1.size() == 2, ErrorCode::InvalidArgument,
            "two_state generator \"f\" entries must be [intercept, slope]");

    TwoStateFamilyResult built = build_two_state_family(
        grid, [&](double t) { return p[0] + p[1] * t; },
        [&](double t) { return q[0] + q[1] * t; },
        [&](double t) {
            return std::vector<double>{f0[0] + f0[1] * t, f1[0] + f1[1] * t};
        });

    Model model;
    model.family = std::move(built.family);
    model.V.values = g.contains("V")
                         ? as_doubles(g.at("V"), "generator V")
                         : std::vector<double>{0.0, 1.0};
    require(model.V.size() == 2, ErrorCode::InvalidArgument,
            "two_state generator \"V\" must have 2 entries");
    return model;
}

Model generator_random_minorized(const json& g, std::uint64_t run_seed)
{
    const std::size_t n = g.at("n").get<std::size_t>();
    const std::vector<double> grid =
        as_doubles(g.at("theta_grid"), "generator theta_grid");
    const double alpha_floor = g.value("alpha_floor", 0.3);
    const std::uint64_t seed = g.value("seed", run_seed);

    RandomFamilyResult built =
        build_random_minorized_family(n, grid, seed, alpha_floor);

    Model model;
    model.family = std::move(built.family);
    if (g.contains("V"))
    {
        model.V.values = as_doubles(g.at("V"), "generator V");
        require(model.V.size() == n, ErrorCode::InvalidArgument,
                "generator \"V\" must have one entry per state");
    }
    else
    {
        model.V.values.resize(n);
        for (std::size_t x = 0; x < n; ++x)
        {
            model.V.values[x] = static_cast<double>(x);
        }
    }
    return model;
}

Model generator_linear_scalar(const json& g)
{
    const std::vector<double> grid =
        as_doubles(g.at("theta_grid"), "generator theta_grid");
    const std::vector<double> box = as_doubles(g.at("box"), "generator box");
    require(box.size() == 2 && box[0] < box[1], ErrorCode::InvalidArgument,
            "linear_scalar generator needs \"box\" as [lo, hi] with lo < hi");
    const unsigned points = g.at("points").get<unsigned>();

    LinearSystemSpec spec;
    for (double theta : grid)
    {
        spec.theta_grid.push_back({theta});
        spec.A.push_back(Eigen::MatrixXd::Constant(1, 1, theta));
        spec.B.push_back(Eigen::MatrixXd::Constant(1, 1, 1.0));
    }
    spec.Q = Eigen::MatrixXd::Identity(1, 1);
    const std::vector<double> support =
        g.contains("noise_support")
            ? as_doubles(g.at("noise_support"), "generator noise_support")
            : std::vector<double>{-1.0, 1.0};
    const std::vector<double> probs =
        g.contains("noise_probs")
            ? as_doubles(g.at("noise_probs"), "generator noise_probs")
            : std::vector<double>{0.5, 0.5};
    for (double point : support)
    {
        spec.noise_support.push_back(Eigen::VectorXd::Constant(1, point));
    }
    spec.noise_probs = probs;
    spec.box_lo = {box[0]};
    spec.box_hi = {box[1]};
    spec.points_per_axis = {points};
    spec.self_test_tolerance = g.value("self_test_tolerance", 0.25);

    LinearFamilyResult built = build_linear_family(spec);
    Model model;
    model.family = std::move(built.family);
    model.V = std::move(built.V);
    return model;
}

ModelBundle acquire_model(const RunConfig& config)
{
    ModelBundle bundle;
    if (!config.model_path.empty())
    {
        bundle.model_json = report::read_text_file(config.model_path);
        bundle.model = load_model_json(bundle.model_json, config.model_path);
    }
    else
    {
        const std::string name =
            config.generator.at("name").get<std::string>();
        if (name == "two_state")
        {
            bundle.model = generator_two_state(config.generator);
        }
        else if (name == "random_minorized")
        {
            bundle.model =
                generator_random_minorized(config.generator, config.seed);
        }
        else if (name == "linear_scalar")
        {
            bundle.model = generator_linear_scalar(config.generator);
        }
        else
        {
            throw Error(ErrorCode::InvalidArgument,
                        "unknown generator \"" + name +
                            "\" (expected two_state|random_minorized|"
                            "linear_scalar)");
        }
        bundle.model_json = save_model_json(bundle.model);
        bundle.generated = true;
    }
    Fnv1a64 h;
    h.add(bundle.model_json);
    bundle.model_hash = h.hex();
    return bundle;
}

// ---------------------------------------------------------------------------
// Cache-aware stage execution
// ---------------------------------------------------------------------------

std::string out_path(const RunConfig& config, const std::string& name)
{
    return (std::filesystem::path(config.out_dir) / name).string();
}

// Returns the stage report, from the cache when a valid entry exists for
// `key`, computing and storing it otherwise.  The report file under out_dir
// is (re)written either way, byte-identically.
json run_stage(const RunConfig& config, const std::string& stage,
               const std::string& key, const std::function<json()>& compute)
{
    const std::string cache_path =
        out_path(config, "cache/" + stage + "-" + key + ".json");
    const std::string report_path = out_path(config, stage + ".json");

    if (std::filesystem::exists(cache_path))
    {
        try
        {
            const std::string text = report::read_text_file(cache_path);
            json cached = json::parse(text);
            if (cached.value("version", std::string()) == kVersion)
            {
                report::write_text_file(report_path, text);
                return cached;
            }
        }
        catch (...)
        {
            // A damaged cache entry is a miss, not an error.
        }
    }

    const json computed = compute();
    const std::string text = computed.dump(2) + "\n";
    report::write_text_file(cache_path, text);
    report::write_text_file(report_path, text);
    return computed;
}

// ---------------------------------------------------------------------------
// Certify stage
// ---------------------------------------------------------------------------

struct CertifyOutcome
{
    std::string route;  // one_step | r_step | individual_sandwich
    bool one_step = true;
    DriftCertificate drift;
    MinorizationCertificate minor;
    ContractionConstants cc;
    RStepCertificate rcert;
    LipschitzHypotheses hyp;
    bool has_hyp = false;

    double beta() const { return one_step ? cc.beta : rcert.cc_r.beta; }
    double alpha() const { return one_step ? cc.alpha : rcert.alpha; }
};

ParametricFamily powered_family(const ParametricFamily& family, unsigned r)
{
    ParametricFamily powered;
    powered.space = family.space;
    powered.theta_grid = family.theta_grid;
    powered.f = family.f;
    powered.kernels.reserve(family.grid_size());
    for (std::size_t g = 0; g < family.grid_size(); ++g)
    {
        powered.kernels.push_back(kernel_power(family.kernel_at(g), r));
    }
    return powered;
}

ContractionConstants make_contraction(const RunConfig& config,
                                      const DriftCertificate& drift,
                                      const MinorizationCertificate& minor)
{
    if (config.beta_mode == "explicit")
    {
        return hm_constants(drift, minor, config.alpha0, config.gamma0);
    }
    if (config.beta_mode == "tuned")
    {
        return hm_constants_tuned(drift, minor, config.tune_steps);
    }
    return hm_constants_default(drift, minor);
}

std::string certify_cache_key(const RunConfig& config,
                              const ModelBundle& bundle)
{
    Fnv1a64 h;
    h.add(std::string(kVersion));
    h.add(std::string("certify"));
    h.add(bundle.model_hash);
    h.add(config.beta_mode);
    h.add(config.alpha0);
    h.add(config.gamma0);
    h.add(std::uint64_t{config.tune_steps});
    h.add(config.R);
    h.add(config.R_margin);
    h.add(std::uint64_t{config.r_max});
    h.add(std::uint64_t{config.all_pairs ? 1u : 0u});
    h.add(std::uint64_t{config.contraction_trials});
    h.add(config.seed);
    return h.hex();
}

json compute_certify(const RunConfig& config, const ModelBundle& bundle)
{
    const Model& model = bundle.model;
    const ParametricFamily& family = model.family;

    CertifyOutcome outcome;
    std::string fallback_note;
    try
    {
        outcome.drift = fit_drift(family, model.V);
        const double R = config.R > 0.0
                             ? config.R
                             : default_R(outcome.drift, config.R_margin);
        outcome.minor = fit_minorization(family, model.V, outcome.drift, R);
        outcome.cc = make_contraction(config, outcome.drift, outcome.minor);
        outcome.route = "one_step";
    }
    catch (const Error& drift_error)
    {
        if (drift_error.code() != ErrorCode::InfeasibleDrift)
        {
            throw;
        }
        try
        {
            outcome.rcert = fit_r_step(family, model.V, config.r_max);
            outcome.one_step = false;
            outcome.route = "r_step";
            fallback_note = std::string("one-step drift infeasible; used "
                                        "the smallest feasible r (") +
                            drift_error.what() + ")";
        }
        catch (const Error& r_error)
        {
            if (r_error.code() == ErrorCode::NoFeasibleR &&
                model.has_sandwich)
            {
                outcome.rcert = individual_to_uniform(
                    family, model.V_family, model.V, model.sandwich_a,
                    model.sandwich_b, model.sandwich_c, model.sandwich_d);
                outcome.one_step = false;
                outcome.route = "individual_sandwich";
                fallback_note =
                    std::string("one-step drift infeasible and no feasible "
                                "r-fold drift; used the per-parameter "
                                "Lyapunov sandwich (") +
                    drift_error.what() + "; " + r_error.what() + ")";
            }
            else
            {
                throw Error(r_error.code(),
                            std::string(r_error.what()) +
                                " (after one-step drift was infeasible: " +
                                drift_error.what() + ")");
            }
        }
    }

    if (family.grid_size() >= 2)
    {
        outcome.hyp = fit_hypotheses(family, model.V,
                                     WeightParam{outcome.beta()},
                                     config.all_pairs);
        outcome.has_hyp = true;
    }

    // Empirical contraction audit on the kernel the certificate actually
    // contracts: the one-step kernel, or the r-fold kernel otherwise.
    ContractionCheckReport check;
    unsigned checked_power = 1;
    if (outcome.one_step)
    {
        check = check_function_contraction(family, model.V, outcome.cc,
                                           config.contraction_trials,
                                           config.seed);
    }
    else
    {
        checked_power = outcome.rcert.r;
        check = check_function_contraction(
            powered_family(family, outcome.rcert.r), model.V,
            outcome.rcert.cc_r, config.contraction_trials, config.seed);
    }

    json rep;
    rep["command"] = "certify";
    rep["version"] = kVersion;
    rep["model_hash"] = bundle.model_hash;
    rep["n"] = family.space.n;
    rep["grid_size"] = family.grid_size();
    rep["theta_grid"] = family.theta_grid;
    rep["route"] = outcome.route;
    rep["beta"] = outcome.beta();
    rep["alpha"] = outcome.alpha();
    if (outcome.one_step)
    {
        rep["drift"] = report::drift_to_json(outcome.drift);
        rep["minorization"] = report::minorization_to_json(outcome.minor);
        rep["contraction"] = report::contraction_to_json(outcome.cc);
        rep["k_u"] = k_u_constant(outcome.cc, outcome.drift);
    }
    else
    {
        rep["r_step"] = report::r_step_to_json(outcome.rcert);
        rep["k_u"] = k_u_r_constant(outcome.rcert);
    }
    if (outcome.has_hyp)
    {
        rep["hypotheses"] = report::hypotheses_to_json(outcome.hyp);
    }
    rep["contraction_check"] =
        json{{"trials", check.trials},
             {"kernel_power", checked_power},
             {"worst_function_ratio", check.worst_function_ratio},
             {"worst_measure_ratio", check.worst_measure_ratio}};
    if (!fallback_note.empty())
    {
        rep["fallback"] = fallback_note;
    }
    return rep;
}

CertifyOutcome outcome_from_report(const json& rep)
{
    CertifyOutcome outcome;
    outcome.route = rep.at("route").get<std::string>();
    outcome.one_step = rep.contains("drift");
    if (outcome.one_step)
    {
        outcome.drift = report::drift_from_json(rep.at("drift"));
        outcome.minor =
            report::minorization_from_json(rep.at("minorization"));
        outcome.cc = report::contraction_from_json(rep.at("contraction"));
    }
    else
    {
        outcome.rcert = report::r_step_from_json(rep.at("r_step"));
    }
    if (rep.contains("hypotheses"))
    {
        outcome.hyp = report::hypotheses_from_json(rep.at("hypotheses"));
        outcome.has_hyp = true;
    }
    return outcome;
}

// ---------------------------------------------------------------------------
// Solve stage
// ---------------------------------------------------------------------------

std::string solve_cache_key(const RunConfig& config,
                            const std::string& certify_key)
{
    Fnv1a64 h;
    h.add(std::string(kVersion));
    h.add(std::string("solve"));
    h.add(certify_key);
    h.add(config.tol);
    return h.hex();
}

struct SolveRow
{
    InvariantMeasure invariant;
    double mu_V = 0.0;
    PoissonSolution solution;
    double direct_gap = 0.0;
    double min_bound_slack = 0.0;
};

json compute_solve(const RunConfig& config, const ModelBundle& bundle,
                   const CertifyOutcome& outcome)
{
    const Model& model = bundle.model;
    const ParametricFamily& family = model.family;
    const std::size_t grid_size = family.grid_size();
    const WeightParam wp{outcome.beta()};

    // mu*(V) <= K/(1-gamma) for the drift pair of the contracted kernel
    // (mu* is shared by the kernel and its r-fold power).
    const DriftCertificate& drift =
        outcome.one_step ? outcome.drift : outcome.rcert.drift_r;
    const double mu_V_budget = drift.K / (1.0 - drift.gamma);

    std::vector<SolveRow> rows(grid_size);
    const auto solve_one = [&](std::size_t g)
    {
        const Kernel& kernel = family.kernel_at(g);
        const Observable& f = family.f_at(g);

        SolveRow row;
        row.invariant = invariant_measure(kernel, model.V, wp);
        row.mu_V = integrate(row.invariant.mu_star, model.V);
        if (row.mu_V > mu_V_budget + kMomentSlack)
        {
            std::ostringstream os;
            os << "certified moment bound mu*(V) <= K/(1-gamma) violated at "
               << "grid point " << g << ": " << row.mu_V << " > "
               << mu_V_budget;
            throw Error(ErrorCode::ViolatedBound, os.str());
        }

        row.solution =
            outcome.one_step
                ? poisson_series(kernel, f, model.V, row.invariant.mu_star,
                                 outcome.cc, outcome.drift, config.tol)
                : poisson_r_step(kernel, outcome.rcert, f, model.V,
                                 row.invariant.mu_star, config.tol);

        const PoissonSolution direct =
            poisson_direct(kernel, f, row.invariant.mu_star);
        Observable diff;
        diff.values.resize(row.solution.u.size());
        for (std::size_t x = 0; x < diff.size(); ++x)
        {
            diff.values[x] =
                row.solution.u.values[x] - direct.u.values[x];
        }
        row.direct_gap = sup_norm_beta(diff, model.V, wp);
        if (row.direct_gap > kOracleGap)
        {
            std::ostringstream os;
            os << "series and direct Poisson solutions disagree at grid "
               << "point " << g << ": |difference|_beta = " << row.direct_gap
               << " > " << kOracleGap;
            throw Error(ErrorCode::ViolatedBound, os.str());
        }

        row.min_bound_slack = row.solution.bound_slack.empty()
                                  ? 0.0
                                  : *std::min_element(
                                        row.solution.bound_slack.begin(),
                                        row.solution.bound_slack.end());
        return row;
    };

    const unsigned workers =
        std::min<unsigned>(config.workers,
                           static_cast<unsigned>(std::max<std::size_t>(
                               grid_size, 1)));
    if (workers <= 1)
    {
        for (std::size_t g = 0; g < grid_size; ++g)
        {
            rows[g] = solve_one(g);
        }
    }
    else
    {
        std::vector<std::thread> threads;
        std::mutex error_mutex;
        std::exception_ptr first_error;
        threads.reserve(workers);
        for (unsigned tid = 0; tid < workers; ++tid)
        {
            threads.emplace_back(
                [&, tid]()
                {
                    try
                    {
                        for (std::size_t g = tid; g < grid_size; g += workers)
                        {
                            rows[g] = solve_one(g);
                        }
                    }
                    catch (...)
                    {
                        const std::lock_guard<std::mutex> lock(error_mutex);
                        if (!first_error)
                        {
                            first_error = std::current_exception();
                        }
                    }
                });
        }
        for (auto& thread : threads)
        {
            thread.join();
        }
        if (first_error)
        {
            std::rethrow_exception(first_error);
        }
    }

    json grid = json::array();
    double max_residual = 0.0;
    double max_gap = 0.0;
    for (std::size_t g = 0; g < grid_size; ++g)
    {
        const SolveRow& row = rows[g];
        max_residual = std::max(max_residual, row.solution.residual_norm);
        max_gap = std::max(max_gap, row.direct_gap);
        grid.push_back(
            json{{"index", g},
                 {"theta", family.theta_grid[g]},
                 {"invariant_iterations", row.invariant.iterations},
                 {"invariant_gap", row.invariant.final_sigma_gap},
                 {"invariant_crosscheck", row.invariant.crosscheck_gap},
                 {"mu_star", row.invariant.mu_star.weights},
                 {"mu_V", row.mu_V},
                 {"direct_gap", row.direct_gap},
                 {"min_bound_slack", row.min_bound_slack},
                 {"solution", report::solution_to_json(row.solution)}});
    }

    json rep;
    rep["command"] = "solve";
    rep["version"] = kVersion;
    rep["model_hash"] = bundle.model_hash;
    rep["route"] = outcome.route;
    rep["beta"] = outcome.beta();
    rep["tol"] = config.tol;
    rep["mu_V_budget"] = mu_V_budget;
    rep["grid"] = std::move(grid);
    rep["max_residual_norm"] = max_residual;
    rep["max_direct_gap"] = max_gap;
    return rep;
}

struct SolveData
{
    std::vector<Measure> mu_stars;
    std::vector<PoissonSolution> solutions;
};

SolveData solve_data_from_report(const json& rep)
{
    SolveData data;
    for (const auto& row : rep.at("grid"))
    {
        Measure mu;
        mu.weights = row.at("mu_star").get<std::vector<double>>();
        data.mu_stars.push_back(std::move(mu));
        data.solutions.push_back(
            report::solution_from_json(row.at("solution")));
    }
    return data;
}

// Plot-ready tables for the solve stage, regenerated from the (possibly
// cached) results so bytes never depend on the code path taken.
void write_solve_tables(const RunConfig& config, const ModelBundle& bundle,
                        const json& rep)
{
    const ParametricFamily& family = bundle.model.family;
    const auto theta_text = [&](std::size_t g)
    {
        std::string text;
        for (std::size_t k = 0; k < family.theta_grid[g].size(); ++k)
        {
            if (k > 0)
            {
                text += ';';
            }
            text += report::format_double(family.theta_grid[g][k]);
        }
        return text;
    };

    std::string summary =
        "grid_index,theta,h,truncation_n,residual_norm,centering_shift,"
        "k_u,direct_gap,invariant_iterations,mu_V,min_bound_slack\n";
    std::string table = "grid_index,state,V,u,bound_slack\n";
    for (const auto& row : rep.at("grid"))
    {
        const std::size_t g = row.at("index").get<std::size_t>();
        const json& sol = row.at("solution");
        summary += std::to_string(g);
        summary += ',' + theta_text(g);
        summary += ',' + report::format_double(sol.at("h").get<double>());
        summary +=
            ',' + std::to_string(sol.at("truncation_n").get<unsigned>());
        summary += ',' + report::format_double(
                             sol.at("residual_norm").get<double>());
        summary += ',' + report::format_double(
                             sol.at("centering_shift").get<double>());
        summary += ',' + report::format_double(sol.at("k_u").get<double>());
        summary += ',' + report::format_double(
                             row.at("direct_gap").get<double>());
        summary += ',' + std::to_string(
                             row.at("invariant_iterations").get<unsigned>());
        summary += ',' + report::format_double(row.at("mu_V").get<double>());
        summary += ',' + report::format_double(
                             row.at("min_bound_slack").get<double>());
        summary += '\n';

        const auto u = sol.at("u").get<std::vector<double>>();
        const auto slack = sol.at("bound_slack").get<std::vector<double>>();
        for (std::size_t x = 0; x < u.size(); ++x)
        {
            table += std::to_string(g);
            table += ',' + std::to_string(x);
            table += ',' + report::format_double(bundle.model.V.values[x]);
            table += ',' + report::format_double(u[x]);
            table += ',' + report::format_double(
                               x < slack.size() ? slack[x] : 0.0);
            table += '\n';
        }
    }
    report::write_text_file(out_path(config, "solve_summary.csv"), summary);
    report::write_text_file(out_path(config, "solve_u.csv"), table);
}

// ---------------------------------------------------------------------------
// Sweep stage
// ---------------------------------------------------------------------------

json compute_sweep(const RunConfig& config, const ModelBundle& bundle,
                   const CertifyOutcome& outcome, const SolveData& data,
                   std::string* pairs_csv)
{
    require(outcome.has_hyp, ErrorCode::InvalidArgument,
            "sweep needs sensitivity hypotheses, which require at least 2 "
            "parameter grid points");
    const Model& model = bundle.model;
    const ParametricFamily& family = model.family;
    const WeightParam wp{outcome.beta()};

    LipschitzBounds bounds;
    double L_h_eff = 0.0;
    double L_u_eff = 0.0;
    if (outcome.one_step)
    {
        bounds = theoretical_constants(outcome.cc, outcome.drift,
                                       outcome.hyp);
        L_h_eff = bounds.L_h;
        L_u_eff = bounds.L_u;
    }
    else
    {
        bounds = relaxed_constants(family, model.V, outcome.rcert,
                                   outcome.hyp, config.alpha_dd);
        L_h_eff = bounds.L_rh;
        L_u_eff = bounds.L_ru;
    }

    const EmpiricalCertifyReport empirical =
        empirical_certify(family, model.V, wp, bounds, data.solutions,
                          data.mu_stars, L_h_eff, L_u_eff);

    // Per-pair table in deterministic (i, j) order.
    json pairs = json::array();
    std::string csv = "i,j,dtheta,dh,h_ratio,u_max_ratio,sigma_mu,mu_ratio\n";
    for (std::size_t i = 0; i + 1 < family.grid_size(); ++i)
    {
        for (std::size_t j = i + 1; j < family.grid_size(); ++j)
        {
            const double d =
                theta_distance(family.theta_grid[i], family.theta_grid[j]);
            const double dh =
                std::abs(data.solutions[i].h - data.solutions[j].h);
            const double h_budget = L_h_eff * d;
            const double h_ratio = h_budget > 0.0 ? dh / h_budget : 0.0;

            double u_max_ratio = 0.0;
            for (std::size_t x = 0; x < family.space.n; ++x)
            {
                const double du = std::abs(data.solutions[i].u.values[x] -
                                           data.solutions[j].u.values[x]);
                const double budget =
                    L_u_eff * (1.0 + wp.beta * model.V.values[x]) * d;
                if (budget > 0.0)
                {
                    u_max_ratio = std::max(u_max_ratio, du / budget);
                }
            }

            const double sigma_mu =
                sigma_beta(data.mu_stars[i], data.mu_stars[j], model.V, wp);
            const double mu_budget = bounds.L_mu_star * d;
            const double mu_ratio =
                mu_budget > 0.0 ? sigma_mu / mu_budget : 0.0;

            pairs.push_back(json{{"i", i},
                                 {"j", j},
                                 {"dtheta", d},
                                 {"dh", dh},
                                 {"h_ratio", h_ratio},
                                 {"u_max_ratio", u_max_ratio},
                                 {"sigma_mu", sigma_mu},
                                 {"mu_ratio", mu_ratio}});
            csv += std::to_string(i) + ',' + std::to_string(j);
            csv += ',' + report::format_double(d);
            csv += ',' + report::format_double(dh);
            csv += ',' + report::format_double(h_ratio);
            csv += ',' + report::format_double(u_max_ratio);
            csv += ',' + report::format_double(sigma_mu);
            csv += ',' + report::format_double(mu_ratio);
            csv += '\n';
        }
    }
    *pairs_csv = std::move(csv);

    json rep;
    rep["command"] = "sweep";
    rep["version"] = kVersion;
    rep["model_hash"] = bundle.model_hash;
    rep["route"] = outcome.route;
    rep["beta"] = outcome.beta();
    rep["hypotheses"] = report::hypotheses_to_json(outcome.hyp);
    rep["bounds"] = report::bounds_to_json(bounds, !outcome.one_step);
    rep["effective"] = json{{"L_h", L_h_eff}, {"L_u", L_u_eff}};
    rep["empirical"] = json{{"pairs_checked", empirical.pairs_checked},
                            {"tightness_h", empirical.tightness_h},
                            {"tightness_u", empirical.tightness_u},
                            {"tightness_mu", empirical.tightness_mu},
                            {"max_h_slope", empirical.max_h_slope}};
    if (config.measure_trials > 0)
    {
        const MeasureExtensionReport extension = extend_to_measures_check(
            family, model.V, wp, outcome.hyp.L_P, config.measure_trials,
            config.seed);
        rep["measure_extension"] =
            json{{"trials", extension.trials},
                 {"worst_probability_ratio",
                  extension.worst_probability_ratio},
                 {"worst_signed_ratio", extension.worst_signed_ratio}};
    }
    rep["pairs"] = std::move(pairs);
    return rep;
}

}  // namespace

json run_command(const std::string& command, const std::string& config_json)
{
    require(command == "validate" || command == "certify" ||
                command == "solve" || command == "sweep",
            ErrorCode::InvalidArgument,
            "unknown command \"" + command +
                "\" (expected validate|certify|solve|sweep)");

    const RunConfig config = parse_config(config_json);
    std::error_code fs_error;
    std::filesystem::create_directories(
        std::filesystem::path(config.out_dir) / "cache", fs_error);
    require(!fs_error, ErrorCode::IoError,
            "cannot create output directory: " + config.out_dir);

    const ModelBundle bundle = acquire_model(config);
    bundle.model.family.validate();
    if (bundle.generated)
    {
        report::write_text_file(out_path(config, "model.json"),
                                bundle.model_json);
    }

    if (command == "validate")
    {
        json rep;
        rep["command"] = "validate";
        rep["version"] = kVersion;
        rep["model_hash"] = bundle.model_hash;
        rep["n"] = bundle.model.family.space.n;
        rep["grid_size"] = bundle.model.family.grid_size();
        rep["has_sandwich"] = bundle.model.has_sandwich;
        rep["status"] = "ok";
        return rep;
    }

    const std::string certify_key = certify_cache_key(config, bundle);
    const json certify_rep =
        run_stage(config, "certify", certify_key,
                  [&]() { return compute_certify(config, bundle); });
    if (command == "certify")
    {
        return certify_rep;
    }

    const CertifyOutcome outcome = outcome_from_report(certify_rep);
    const std::string solve_key = solve_cache_key(config, certify_key);
    const json solve_rep =
        run_stage(config, "solve", solve_key,
                  [&]() { return compute_solve(config, bundle, outcome); });
    write_solve_tables(config, bundle, solve_rep);
    if (command == "solve")
    {
        return solve_rep;
    }

    const SolveData data = solve_data_from_report(solve_rep);
    std::string pairs_csv;
    const json sweep_rep =
        compute_sweep(config, bundle, outcome, data, &pairs_csv);
    const std::string text = sweep_rep.dump(2) + "\n";
    report::write_text_file(out_path(config, "sweep.json"), text);
    report::write_text_file(out_path(config, "sweep_pairs.csv"), pairs_csv);
    return sweep_rep;
}

}  // namespace pipeline
}  // namespace ergocert
