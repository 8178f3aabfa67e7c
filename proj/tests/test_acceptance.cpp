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

// Acceptance suite.  Eight independent criteria; one [PASS]/[FAIL] line per
// criterion on stdout; exit status is the number of failed criteria.
//
//   usage: test_acceptance <path-to-cli-binary> <scratch-directory>
//
// The CLI binary is only used by the determinism criterion; everything else
// runs in-process against the C++ interfaces.

#include <sys/wait.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "ergocert/certify.hpp"
#include "ergocert/lipschitz.hpp"
#include "ergocert/models.hpp"
#include "ergocert/norms.hpp"
#include "ergocert/poisson.hpp"
#include "ergocert/statespace.hpp"
#include "fixtures.hpp"

namespace fs = std::filesystem;
using namespace ergocert;
using namespace ergocert::testing;

namespace
{

std::string g_cli;
fs::path g_scratch;

struct Failure : std::runtime_error
{
    using std::runtime_error::runtime_error;
};

void require(bool condition, const std::string& message)
{
    if (!condition)
    {
        throw Failure(message);
    }
}

std::string fmt(double x)
{
    char buffer[32];
    std::snprintf(buffer, sizeof(buffer), "%.2e", x);
    return buffer;
}

// Random nonnegative Lyapunov values in [0, 3].
Lyapunov random_V(std::mt19937_64& rng, std::size_t n)
{
    std::uniform_real_distribution<double> dist(0.0, 3.0);
    Lyapunov V;
    V.values.reserve(n);
    for (std::size_t i = 0; i < n; ++i)
    {
        V.values.push_back(dist(rng));
    }
    return V;
}

// A randomized family that certifies by construction: rows are floored by
// alpha_floor * nu, and V vanishes except at the last state, which keeps the
// minimal-K drift fit feasible for every draw.
struct CertifiedFamily
{
    ParametricFamily family;
    Lyapunov V;
    DriftCertificate drift;
    MinorizationCertificate minor;
    ContractionConstants cc;
};

CertifiedFamily certified_random_family(std::size_t n, std::uint64_t seed,
                                        double alpha_floor, double v_top)
{
    CertifiedFamily out;
    out.family = build_random_minorized_family(n, {0.0, 0.5, 1.0}, seed,
                                               alpha_floor)
                     .family;
    out.V.values.assign(n, 0.0);
    out.V.values[n - 1] = v_top;
    out.drift = fit_drift(out.family, out.V);
    out.minor =
        fit_minorization(out.family, out.V, out.drift, default_R(out.drift));
    out.cc = hm_constants_default(out.drift, out.minor);
    return out;
}

// Shared one-step chain for the smooth two-state fixture.
struct SmoothChain
{
    ParametricFamily family = smooth_two_state_family();
    Lyapunov V = oracle_V();
    DriftCertificate drift;
    MinorizationCertificate minor;
    ContractionConstants cc;

    SmoothChain()
    {
        drift = fit_drift(family, V);
        minor = fit_minorization(family, V, drift, default_R(drift));
        cc = hm_constants_default(drift, minor);
    }
};

const SmoothChain& smooth_chain()
{
    static const SmoothChain chain;
    return chain;
}

// ---------------------------------------------------------------------------
// Criteria
// ---------------------------------------------------------------------------

// 1. Norm duality: the LP dual oracle equals the weighted-TV closed form on
//    zero-mass measures, and the min-shift construction equals the
//    oscillation seminorm.
std::string criterion_norm_duality()
{
    double max_dual_gap = 0.0;
    double max_shift_gap = 0.0;
    const double betas[] = {0.3, 1.0, 2.7};
    for (int i = 0; i < 200; ++i)
    {
        std::mt19937_64 rng(900 + i);
        const std::size_t n = 2 + static_cast<std::size_t>(i % 11);
        const Lyapunov V = random_V(rng, n);
        const WeightParam beta{betas[i % 3]};

        const SignedMeasure eta = random_zero_mass(rng, n);
        const double dual_gap = std::abs(
            sigma_beta_dual_oracle(eta, V, beta) - rho_beta(eta, V, beta));
        require(dual_gap <= 1e-7,
                "dual oracle vs rho_beta gap " + fmt(dual_gap) +
                    " at instance " + std::to_string(i));
        max_dual_gap = std::max(max_dual_gap, dual_gap);

        const Observable phi = random_observable(rng, n);
        const double shift_gap = std::abs(osc_via_min_shift(phi, V, beta).value -
                                          osc_seminorm(phi, V, beta));
        require(shift_gap <= 1e-9,
                "min-shift vs oscillation gap " + fmt(shift_gap) +
                    " at instance " + std::to_string(i));
        max_shift_gap = std::max(max_shift_gap, shift_gap);
    }
    return "200 instances (n <= 12); max dual gap " + fmt(max_dual_gap) +
           ", max min-shift gap " + fmt(max_shift_gap);
}

// 2. Contraction: on 50 randomized certified families, one kernel step
//    contracts the oscillation of observables and the sigma_beta distance of
//    probability pairs by the certified alpha, and alpha > gamma throughout.
std::string criterion_contraction()
{
    double worst_function = 0.0;
    double worst_measure = 0.0;
    double max_alpha = 0.0;
    for (int i = 0; i < 50; ++i)
    {
        const std::size_t n = 2 + static_cast<std::size_t>(i % 8);
        const CertifiedFamily cf = certified_random_family(
            n, 4000 + i, 0.15 + 0.006 * i, 0.5 + 0.35 * (i % 8));
        require(cf.cc.alpha > cf.drift.gamma,
                "alpha <= gamma on family " + std::to_string(i));
        max_alpha = std::max(max_alpha, cf.cc.alpha);

        // Throws with a witness on any of the 2 * 1000 trials failing.
        const ContractionCheckReport report = check_function_contraction(
            cf.family, cf.V, cf.cc, 1000, 7000 + i);
        require(report.trials == 1000, "trial count mismatch");
        worst_function = std::max(worst_function, report.worst_function_ratio);
        worst_measure = std::max(worst_measure, report.worst_measure_ratio);
    }
    return "50 families x 2000 trials, zero violations; worst empirical "
           "factors " +
           fmt(worst_function) + " (functions), " + fmt(worst_measure) +
           " (measures), max alpha " + fmt(max_alpha);
}

// Shared checks for one Poisson fixture point.
void check_poisson_point(const Kernel& kernel, const Observable& f,
                         const Lyapunov& V, const ContractionConstants& cc,
                         const DriftCertificate& drift, double& max_gap,
                         const std::string& where)
{
    const WeightParam beta{cc.beta};
    const InvariantMeasure inv = invariant_measure(kernel, V, beta);
    const PoissonSolution series =
        poisson_series(kernel, f, V, inv.mu_star, cc, drift);
    const PoissonSolution direct = poisson_direct(kernel, f, inv.mu_star);

    Observable diff;
    diff.values.resize(f.size());
    for (std::size_t x = 0; x < f.size(); ++x)
    {
        diff.values[x] = series.u[x] - direct.u[x];
    }
    const double gap = sup_norm_beta(diff, V, beta);
    require(gap <= 1e-6, where + ": series vs direct gap " + fmt(gap));
    max_gap = std::max(max_gap, gap);
    require(std::abs(series.h - direct.h) <= 1e-6,
            where + ": h disagreement");

    // Residual recomputed from scratch: (I - P*)u = f - h.
    const Observable pu = apply_function(kernel, series.u);
    Observable residual;
    residual.values.resize(f.size());
    for (std::size_t x = 0; x < f.size(); ++x)
    {
        residual.values[x] = series.u[x] - pu[x] - (f[x] - series.h);
    }
    require(sup_norm_beta(residual, V, beta) <= 1e-8,
            where + ": residual above 1e-8");

    // Centering, pointwise affine envelope, scalar norm bound.
    require(std::abs(integrate(inv.mu_star, series.u)) <= 1e-8,
            where + ": mu*(u) not centered");
    double min_slack = 0.0;
    for (double s : series.bound_slack)
    {
        min_slack = std::min(min_slack, s);
    }
    require(min_slack >= -1e-8, where + ": pointwise bound violated");
    const double osc_f = osc_seminorm(f, V, beta);
    require(sup_norm_beta(series.u, V, beta) <=
                series.k_u * osc_f + 1e-9,
            where + ": norm bound |u|_beta <= K_u |||f||| violated");
}

// 3. Poisson oracle equivalence: series and direct solutions agree on every
//    fixture; residual, centering and both certified bounds hold; the
//    analytic two-state fixture is reproduced exactly.
std::string criterion_poisson()
{
    double max_gap = 0.0;

    // Analytic fixture: h = 4/3, u = (-10/9, 20/9).
    {
        const Kernel kernel = oracle_kernel();
        const Lyapunov V = oracle_V();
        const Observable f = oracle_f();
        const CertifiedFamily cf = [&]
        {
            CertifiedFamily out;
            out.family = oracle_family();
            out.V = V;
            out.drift = fit_drift(out.family, V);
            out.minor = fit_minorization(out.family, V, out.drift,
                                         default_R(out.drift));
            out.cc = hm_constants_default(out.drift, out.minor);
            return out;
        }();
        const InvariantMeasure inv =
            invariant_measure(kernel, V, WeightParam{cf.cc.beta});
        const PoissonSolution s =
            poisson_series(kernel, f, V, inv.mu_star, cf.cc, cf.drift, 1e-12);
        require(std::abs(s.h - 4.0 / 3.0) <= 1e-10, "two-state h != 4/3");
        require(std::abs(s.u[0] + 10.0 / 9.0) <= 1e-10 &&
                    std::abs(s.u[1] - 20.0 / 9.0) <= 1e-10,
                "two-state u != (-10/9, 20/9)");
        check_poisson_point(kernel, f, V, cf.cc, cf.drift, max_gap,
                            "two-state");
    }

    // Smooth parametric fixture, every grid point.
    const SmoothChain& chain = smooth_chain();
    for (std::size_t g = 0; g < chain.family.grid_size(); ++g)
    {
        check_poisson_point(chain.family.kernel_at(g), chain.family.f_at(g),
                            chain.V, chain.cc, chain.drift, max_gap,
                            "smooth[" + std::to_string(g) + "]");
    }

    // Randomized certified fixture.
    const CertifiedFamily cf = certified_random_family(6, 77, 0.3, 2.0);
    for (std::size_t g = 0; g < cf.family.grid_size(); ++g)
    {
        check_poisson_point(cf.family.kernel_at(g), cf.family.f_at(g), cf.V,
                            cf.cc, cf.drift, max_gap,
                            "random[" + std::to_string(g) + "]");
    }

    return "two-state exact to 1e-10; series vs direct max gap " +
           fmt(max_gap) + " across 9 fixture points";
}

// 4. Invariant-measure bounds: mu*(V) <= K/(1-gamma) and
//    sigma_beta(mu*_i, mu*_j) <= L_P L_P' |theta_i - theta_j| for all grid
//    pairs on three fixtures.
std::string criterion_invariant_bounds()
{
    double worst_mass_margin = 1e300;
    double worst_pair_ratio = 0.0;

    const auto check_fixture = [&](const ParametricFamily& family,
                                   const Lyapunov& V,
                                   const DriftCertificate& drift,
                                   const ContractionConstants& cc,
                                   const std::string& where)
    {
        const WeightParam beta{cc.beta};
        const double budget_mass = drift.K / (1.0 - drift.gamma);
        std::vector<Measure> mu_stars;
        for (std::size_t g = 0; g < family.grid_size(); ++g)
        {
            const InvariantMeasure inv =
                invariant_measure(family.kernel_at(g), V, beta);
            const double mass = integrate(inv.mu_star, V);
            require(mass <= budget_mass + 1e-8,
                    where + ": mu*(V) exceeds K/(1-gamma)");
            worst_mass_margin =
                std::min(worst_mass_margin, budget_mass - mass);
            mu_stars.push_back(inv.mu_star);
        }

        const double L_P = estimate_kernel_lipschitz(family, V, beta, true);
        const double L_P_prime =
            (1.0 + cc.beta * drift.K / (1.0 - drift.gamma)) /
            (1.0 - cc.alpha);
        for (std::size_t i = 0; i < family.grid_size(); ++i)
        {
            for (std::size_t j = i + 1; j < family.grid_size(); ++j)
            {
                const double d = theta_distance(family.theta_grid[i],
                                                family.theta_grid[j]);
                const double lhs = sigma_beta(mu_stars[i], mu_stars[j], V,
                                              beta);
                const double rhs = L_P * L_P_prime * d;
                require(lhs <= rhs + 1e-9,
                        where + ": invariant-measure pair bound violated");
                if (rhs > 0.0)
                {
                    worst_pair_ratio = std::max(worst_pair_ratio, lhs / rhs);
                }
            }
        }
    };

    const SmoothChain& chain = smooth_chain();
    check_fixture(chain.family, chain.V, chain.drift, chain.cc, "smooth");
    const CertifiedFamily six = certified_random_family(6, 11, 0.3, 1.5);
    check_fixture(six.family, six.V, six.drift, six.cc, "random-6");
    const CertifiedFamily nine = certified_random_family(9, 13, 0.25, 2.0);
    check_fixture(nine.family, nine.V, nine.drift, nine.cc, "random-9");

    return "3 fixtures, all grid pairs; min mass margin " +
           fmt(worst_mass_margin) + ", worst pair tightness " +
           fmt(worst_pair_ratio);
}

// 5. Lipschitz theorems: fitted hypotheses imply the certified bounds on h
//    and u over every grid pair, one-step on the smooth fixture and relaxed
//    (L_rh, L_ru) on the two-step near-cycle fixture.
std::string criterion_lipschitz()
{
    // One-step route.
    const SmoothChain& chain = smooth_chain();
    const WeightParam beta{chain.cc.beta};
    const LipschitzHypotheses hyp =
        fit_hypotheses(chain.family, chain.V, beta, true);
    const LipschitzBounds bounds =
        theoretical_constants(chain.cc, chain.drift, hyp);
    std::vector<PoissonSolution> solutions;
    std::vector<Measure> mu_stars;
    for (std::size_t g = 0; g < chain.family.grid_size(); ++g)
    {
        const InvariantMeasure inv =
            invariant_measure(chain.family.kernel_at(g), chain.V, beta);
        mu_stars.push_back(inv.mu_star);
        solutions.push_back(poisson_series(chain.family.kernel_at(g),
                                           chain.family.f_at(g), chain.V,
                                           inv.mu_star, chain.cc,
                                           chain.drift));
    }
    const EmpiricalCertifyReport one_step = empirical_certify(
        chain.family, chain.V, beta, bounds, solutions, mu_stars);
    require(one_step.pairs_checked == 10, "expected 10 grid pairs");

    // Relaxed route on the r = 2 fixture.
    const ParametricFamily cycle = rotation_family();
    const Lyapunov Vc = rotation_V();
    const RStepCertificate rcert = fit_r_step(cycle, Vc, 8);
    require(rcert.r == 2, "expected a two-step certificate");
    const WeightParam beta_r{rcert.cc_r.beta};
    const LipschitzHypotheses hyp_r = fit_hypotheses(cycle, Vc, beta_r, true);
    const LipschitzBounds relaxed = relaxed_constants(cycle, Vc, rcert, hyp_r);
    std::vector<PoissonSolution> solutions_r;
    std::vector<Measure> mu_stars_r;
    for (std::size_t g = 0; g < cycle.grid_size(); ++g)
    {
        const InvariantMeasure inv =
            invariant_measure(cycle.kernel_at(g), Vc, beta_r);
        mu_stars_r.push_back(inv.mu_star);
        solutions_r.push_back(poisson_r_step(cycle.kernel_at(g), rcert,
                                             cycle.f_at(g), Vc, inv.mu_star));
    }
    const EmpiricalCertifyReport two_step = empirical_certify(
        cycle, Vc, beta_r, relaxed, solutions_r, mu_stars_r, relaxed.L_rh,
        relaxed.L_ru);
    require(two_step.pairs_checked == 3, "expected 3 grid pairs");

    return "tightness one-step h " + fmt(one_step.tightness_h) + " / u " +
           fmt(one_step.tightness_u) + "; relaxed r=2 h " +
           fmt(two_step.tightness_h) + " / u " + fmt(two_step.tightness_u);
}

// 6. r-step machinery: quasi-contraction envelope for n = 1..20, invariant
//    measure of P equals that of P^r, and the per-parameter Lyapunov
//    reduction lands at r = 7 with a verified r-step drift.
std::string criterion_r_step()
{
    const ParametricFamily cycle = rotation_family();
    const Lyapunov V = rotation_V();
    const RStepCertificate rcert = fit_r_step(cycle, V, 8);
    const WeightParam beta{rcert.cc_r.beta};

    double worst_envelope = 0.0;
    std::mt19937_64 rng(21);
    for (std::size_t g = 0; g < cycle.grid_size(); ++g)
    {
        const Kernel& kernel = cycle.kernel_at(g);
        for (int trial = 0; trial < 20; ++trial)
        {
            const Observable phi = random_observable(rng, 3);
            const double base = osc_seminorm(phi, V, beta);
            for (unsigned n = 1; n <= 20; ++n)
            {
                const double lhs = osc_seminorm(
                    apply_function(kernel_power(kernel, n), phi), V, beta);
                const double rhs =
                    rcert.C * std::pow(rcert.alpha, n) * base;
                require(lhs <= rhs + 1e-9,
                        "quasi-contraction envelope violated at n = " +
                            std::to_string(n));
                if (rhs > 0.0)
                {
                    worst_envelope = std::max(worst_envelope, lhs / rhs);
                }
            }
        }

        const Measure one = invariant_measure(kernel, V, beta).mu_star;
        const Measure r_fold =
            invariant_measure(kernel_power(kernel, rcert.r), V, beta).mu_star;
        for (std::size_t x = 0; x < 3; ++x)
        {
            require(std::abs(one[x] - r_fold[x]) <= 1e-9,
                    "invariant measures of P and P^r differ");
        }
    }

    // Per-parameter Lyapunov reduction: gamma = 0.8 and c/a = 4 force r = 7.
    const SandwichFixture fx = sandwich_fixture();
    const RStepCertificate sandwich = individual_to_uniform(
        fx.family, fx.V_family, fx.V, fx.a, fx.b, fx.c, fx.d);
    require(sandwich.r == 7,
            "expected r = 7, got r = " + std::to_string(sandwich.r));
    for (std::size_t g = 0; g < fx.family.grid_size(); ++g)
    {
        const Kernel p7 = kernel_power(fx.family.kernel_at(g), 7);
        const Lyapunov image = apply_function(p7, fx.V);
        for (std::size_t x = 0; x < fx.V.size(); ++x)
        {
            require(image[x] <= sandwich.drift_r.gamma * fx.V[x] +
                                    sandwich.drift_r.K + 1e-9,
                    "seven-step drift inequality violated");
        }
    }

    return "envelope n = 1..20 worst ratio " + fmt(worst_envelope) +
           "; mu*(P) == mu*(P^r); Lyapunov reduction lands at r = 7";
}

// 7. Linear model: the discretized drift constants converge to the analytic
//    gamma = theta^2, K = 1 (10% at 201 points, 5% at 401), and the
//    semidefinite-order rate matches the generalized eigenvalue.
std::string criterion_linear()
{
    const auto spec_at = [](unsigned points)
    {
        LinearSystemSpec spec;
        for (double t : {0.3, 0.6, 0.9})
        {
            spec.theta_grid.push_back({t});
            spec.A.push_back(Eigen::MatrixXd::Constant(1, 1, t));
            spec.B.push_back(Eigen::MatrixXd::Identity(1, 1));
        }
        spec.noise_support = {Eigen::VectorXd::Constant(1, 1.0),
                              Eigen::VectorXd::Constant(1, -1.0)};
        spec.noise_probs = {0.5, 0.5};
        spec.Q = Eigen::MatrixXd::Identity(1, 1);
        spec.box_lo = {-6.0};
        spec.box_hi = {6.0};
        spec.points_per_axis = {points};
        return spec;
    };

    const LinearSelfTest coarse = build_linear_family(spec_at(201)).self_test;
    require(coarse.max_gamma_deviation <= 0.10 &&
                coarse.max_K_deviation <= 0.10,
            "deviation above 10% at 201 points: gamma " +
                fmt(coarse.max_gamma_deviation) + ", K " +
                fmt(coarse.max_K_deviation));

    const LinearSelfTest fine = build_linear_family(spec_at(401)).self_test;
    require(fine.max_gamma_deviation <= 0.05 && fine.max_K_deviation <= 0.05,
            "deviation above 5% at 401 points: gamma " +
                fmt(fine.max_gamma_deviation) + ", K " +
                fmt(fine.max_K_deviation));

    for (std::size_t g = 0; g < 3; ++g)
    {
        require(std::abs(fine.gamma_semidefinite[g] -
                         fine.gamma_continuous[g]) <= 1e-6,
                "semidefinite rate disagrees with the eigenvalue rate");
    }

    return "deviations " + fmt(coarse.max_gamma_deviation) + " @201, " +
           fmt(fine.max_gamma_deviation) +
           " @401; semidefinite check within 1e-6";
}

// 8. Determinism: two CLI sweep runs with the same config and seed produce
//    byte-identical stdout and byte-identical files.
std::string slurp(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    require(static_cast<bool>(in), "cannot open " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

int run_cli(const std::string& args, const fs::path& stdout_file)
{
    const std::string command = "\"" + g_cli + "\" " + args + " > \"" +
                                stdout_file.string() + "\" 2>&1";
    const int rc = std::system(command.c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::vector<std::string> relative_files(const fs::path& root)
{
    std::vector<std::string> out;
    for (const auto& entry : fs::recursive_directory_iterator(root))
    {
        if (entry.is_regular_file())
        {
            out.push_back(fs::relative(entry.path(), root).string());
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::string criterion_determinism()
{
    const fs::path dir = g_scratch / "determinism";
    fs::create_directories(dir);

    Model model;
    model.family = smooth_two_state_family();
    model.V = oracle_V();
    const fs::path model_path = dir / "model.json";
    std::ofstream(model_path) << save_model_json(model);

    const fs::path config_path = dir / "config.json";
    std::ofstream(config_path)
        << "{\n"
           "  \"model\": {\"path\": \"" +
               model_path.string() +
               "\"},\n"
               "  \"out_dir\": \"overridden-by-flag\",\n"
               "  \"seed\": 7,\n"
               "  \"contraction_trials\": 32,\n"
               "  \"lipschitz\": {\"measure_trials\": 16}\n"
               "}\n";

    const fs::path out_a = dir / "run_a";
    const fs::path out_b = dir / "run_b";
    const fs::path stdout_a = dir / "stdout_a.json";
    const fs::path stdout_b = dir / "stdout_b.json";
    const std::string base =
        "sweep --config \"" + config_path.string() + "\" --out \"";
    require(run_cli(base + out_a.string() + "\"", stdout_a) == 0,
            "first sweep run failed");
    require(run_cli(base + out_b.string() + "\"", stdout_b) == 0,
            "second sweep run failed");

    require(slurp(stdout_a) == slurp(stdout_b),
            "stdout differs between identical runs");

    const std::vector<std::string> files_a = relative_files(out_a);
    const std::vector<std::string> files_b = relative_files(out_b);
    require(files_a == files_b, "output file sets differ");
    require(!files_a.empty(), "sweep produced no output files");
    for (const std::string& rel : files_a)
    {
        require(slurp(out_a / rel) == slurp(out_b / rel),
                "file " + rel + " differs between identical runs");
    }
    return "2 runs; stdout and " + std::to_string(files_a.size()) +
           " files byte-identical";
}

}  // namespace

int main(int argc, char** argv)
{
    if (argc < 3)
    {
        std::fprintf(stderr,
                     "usage: test_acceptance <cli-binary> <scratch-dir>\n");
        return 2;
    }
    g_cli = argv[1];
    g_scratch = argv[2];
    std::error_code ec;
    fs::remove_all(g_scratch, ec);
    fs::create_directories(g_scratch);

    struct Criterion
    {
        const char* name;
        std::function<std::string()> body;
    };
    const std::vector<Criterion> criteria = {
        {"norm duality", criterion_norm_duality},
        {"contraction", criterion_contraction},
        {"poisson oracle equivalence", criterion_poisson},
        {"invariant-measure bounds", criterion_invariant_bounds},
        {"lipschitz theorems", criterion_lipschitz},
        {"r-step machinery", criterion_r_step},
        {"linear model", criterion_linear},
        {"determinism", criterion_determinism},
    };

    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i)
    {
        std::string verdict = "PASS";
        std::string detail;
        try
        {
            detail = criteria[i].body();
        }
        catch (const std::exception& e)
        {
            verdict = "FAIL";
            detail = e.what();
            ++failures;
        }
        std::printf("[%s] %zu %s: %s\n", verdict.c_str(), i + 1,
                    criteria[i].name, detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d/8 criteria passed\n", 8 - failures);
    return failures;
}
