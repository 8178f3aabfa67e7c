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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "ergocert/certify.hpp"
#include "ergocert/errors.hpp"
#include "ergocert/lipschitz.hpp"
#include "ergocert/poisson.hpp"
#include "fixtures.hpp"

using namespace ergocert;
using namespace ergocert::testing;

namespace
{

// One-step certificate chain for the smooth two-state family, fitted once.
struct SmoothSetup
{
    ParametricFamily family = smooth_two_state_family();
    Lyapunov V = oracle_V();
    DriftCertificate drift;
    MinorizationCertificate minor;
    ContractionConstants cc;
    LipschitzHypotheses hyp;
    LipschitzBounds bounds;
    std::vector<PoissonSolution> solutions;
    std::vector<Measure> mu_stars;

    SmoothSetup()
    {
        drift = fit_drift(family, V);
        minor = fit_minorization(family, V, drift, default_R(drift));
        cc = hm_constants_default(drift, minor);
        hyp = fit_hypotheses(family, V, WeightParam{cc.beta});
        bounds = theoretical_constants(cc, drift, hyp);
        for (std::size_t g = 0; g < family.grid_size(); ++g)
        {
            const InvariantMeasure inv = invariant_measure(
                family.kernel_at(g), V, WeightParam{cc.beta});
            mu_stars.push_back(inv.mu_star);
            solutions.push_back(poisson_series(family.kernel_at(g),
                                               family.f_at(g), V,
                                               inv.mu_star, cc, drift));
        }
    }
};

const SmoothSetup& smooth()
{
    static const SmoothSetup s;
    return s;
}

}  // namespace

TEST_SUITE("lipschitz")
{
    TEST_CASE("kernel constant vanishes for a parameter-independent family")
    {
        ParametricFamily fam = oracle_family();
        fam.theta_grid = {{0.0}, {1.0}};
        fam.kernels = {oracle_kernel(), oracle_kernel()};
        fam.f = {oracle_f(), oracle_f()};
        CHECK(estimate_kernel_lipschitz(fam, oracle_V(), WeightParam{1.0}) ==
              0.0);
    }

    TEST_CASE("kernel constant rejects degenerate grids")
    {
        CHECK_THROWS_AS(
            estimate_kernel_lipschitz(oracle_family(), oracle_V(),
                                      WeightParam{1.0}),
            Error);  // single grid point

        ParametricFamily coincident = smooth_two_state_family({0.1, 0.1});
        try
        {
            estimate_kernel_lipschitz(coincident, oracle_V(),
                                      WeightParam{1.0});
            FAIL("expected DegenerateGrid");
        }
        catch (const Error& e)
        {
            CHECK(e.code() == ErrorCode::DegenerateGrid);
        }
    }

    TEST_CASE("fitted kernel constant dominates every row ratio")
    {
        const ParametricFamily& fam = smooth().family;
        const WeightParam beta{smooth().cc.beta};
        const double L_P =
            estimate_kernel_lipschitz(fam, smooth().V, beta);
        CHECK(L_P > 0.0);

        for (std::size_t i = 0; i + 1 < fam.grid_size(); ++i)
        {
            const double d =
                theta_distance(fam.theta_grid[i], fam.theta_grid[i + 1]);
            for (std::size_t x = 0; x < fam.space.n; ++x)
            {
                const double s = sigma_beta(fam.kernel_at(i).row(x),
                                            fam.kernel_at(i + 1).row(x),
                                            smooth().V, beta);
                CHECK(s <= L_P * d *
                               (1.0 + beta.beta * smooth().V.values[x]) +
                           1e-12);
            }
        }

        // Auditing all pairs can only raise the constant.
        const double L_P_all =
            estimate_kernel_lipschitz(fam, smooth().V, beta, true);
        CHECK(L_P_all >= L_P - 1e-15);
    }

    TEST_CASE("observable hypotheses dominate every grid pair")
    {
        const LipschitzHypotheses& hyp = smooth().hyp;
        const ParametricFamily& fam = smooth().family;
        const WeightParam beta{smooth().cc.beta};
        CHECK(hyp.grid_pairs_checked == fam.grid_size() - 1);
        CHECK(hyp.L_f > 0.0);
        CHECK(hyp.K_f > 0.0);

        for (std::size_t i = 0; i + 1 < fam.grid_size(); ++i)
        {
            const double d =
                theta_distance(fam.theta_grid[i], fam.theta_grid[i + 1]);
            Observable diff;
            diff.values.resize(fam.space.n);
            for (std::size_t x = 0; x < fam.space.n; ++x)
            {
                diff.values[x] =
                    fam.f_at(i).values[x] - fam.f_at(i + 1).values[x];
            }
            CHECK(sup_norm_beta(diff, smooth().V, beta) <=
                  hyp.L_f * d + 1e-12);
        }
        for (std::size_t g = 0; g < fam.grid_size(); ++g)
        {
            CHECK(osc_seminorm(fam.f_at(g), smooth().V, beta) <=
                  hyp.K_f + 1e-15);
        }
    }

    TEST_CASE("closed forms reproduce hand-computed constants")
    {
        // alpha = 59/60, gamma = 0.5, K = 1, beta = 0.2 with
        // L_P = 0, L_f = 1, K_f = 1:
        //   L_h  = 1 * (1 + 0.2/0.5)   = 1.4
        //   L_u1 = L_u2 = 1/(1/60)     = 60
        //   L_u  = 60 * 2.4            = 144
        //   L_P' = 1.4 * 60            = 84
        DriftCertificate drift;
        drift.gamma = 0.5;
        drift.K = 1.0;
        ContractionConstants cc;
        cc.beta = 0.2;
        cc.alpha = 59.0 / 60.0;
        LipschitzHypotheses hyp;
        hyp.L_P = 0.0;
        hyp.L_f = 1.0;
        hyp.K_f = 1.0;

        const LipschitzBounds bounds = theoretical_constants(cc, drift, hyp);
        CHECK(bounds.L_h == doctest::Approx(1.4).epsilon(1e-12));
        CHECK(bounds.L_u1 == doctest::Approx(60.0).epsilon(1e-12));
        CHECK(bounds.L_u2 == doctest::Approx(60.0).epsilon(1e-12));
        CHECK(bounds.L_u == doctest::Approx(144.0).epsilon(1e-12));
        CHECK(bounds.L_P_prime == doctest::Approx(84.0).epsilon(1e-12));
        CHECK(bounds.L_mu_star == 0.0);

        // With a kernel term the intermediate constants separate:
        // L_u2 - L_u1 = L_P K_f/(1-alpha)^2.
        hyp.L_P = 0.5;
        const LipschitzBounds with_kernel =
            theoretical_constants(cc, drift, hyp);
        CHECK(with_kernel.L_u1 < with_kernel.L_u2);
        CHECK(with_kernel.L_u2 - with_kernel.L_u1 ==
              doctest::Approx(0.5 * 3600.0).epsilon(1e-12));
        CHECK(with_kernel.L_mu_star ==
              doctest::Approx(0.5 * 84.0).epsilon(1e-12));

        // The relaxed fields stay unset on the one-step route.
        CHECK(std::isnan(bounds.alpha_doubleprime));
        CHECK(std::isnan(bounds.L_P_doubleprime));
        CHECK(std::isnan(bounds.L_P_r));
        CHECK(std::isnan(bounds.L_rh));
        CHECK(std::isnan(bounds.L_ru));

        // Guards on the inputs.
        cc.alpha = 1.0;
        CHECK_THROWS_AS(theoretical_constants(cc, drift, hyp), Error);
        cc.alpha = 0.9;
        drift.gamma = 1.0;
        CHECK_THROWS_AS(theoretical_constants(cc, drift, hyp), Error);
    }

    TEST_CASE("n-step evaluators: hand values and edge cases")
    {
        ContractionConstants cc;
        cc.alpha = 0.8;
        cc.beta = 1.0;
        DriftCertificate drift;
        drift.gamma = 0.5;
        drift.K = 1.0;

        const NStepBounds nb = nstep_bounds(cc, drift, 2.0);
        // L_P' = (1 + 1/0.5)/0.2 = 15.
        CHECK(nb.L_P_prime == doctest::Approx(15.0).epsilon(1e-12));
        // general(0, 3) = 2 (15 + 3/0.3) = 50.
        CHECK(nb.general(0, 3.0) == doctest::Approx(50.0).epsilon(1e-12));
        // general(2, 3) = 2 (15 + 0.64 * 10) = 42.8.
        CHECK(nb.general(2, 3.0) == doctest::Approx(42.8).epsilon(1e-12));
        // zero_mass(3) = 2 * 3 * 0.64 = 3.84; zero_mass(0) = 0 exactly.
        CHECK(nb.zero_mass(3) == doctest::Approx(3.84).epsilon(1e-12));
        CHECK(nb.zero_mass(0) == 0.0);
        // The general bound decreases toward L_P L_P' as n grows.
        CHECK(nb.general(50, 3.0) ==
              doctest::Approx(2.0 * 15.0).epsilon(1e-4));

        // alpha must exceed gamma for the general form's denominator.
        drift.gamma = 0.9;
        CHECK_THROWS_AS(nstep_bounds(cc, drift, 2.0), Error);
    }

    TEST_CASE("n-step bounds hold empirically on the smooth family")
    {
        const ParametricFamily& fam = smooth().family;
        const WeightParam beta{smooth().cc.beta};
        const NStepBounds nb =
            nstep_bounds(smooth().cc, smooth().drift, smooth().hyp.L_P);

        std::mt19937_64 rng(51);
        for (int trial = 0; trial < 25; ++trial)
        {
            const Measure mu = random_probability(rng, 2);
            const SignedMeasure eta = random_zero_mass(rng, 2);
            const double mu_v = integrate(mu, smooth().V);
            const double rho_eta = rho_beta(eta, smooth().V, beta);

            for (std::size_t i = 0; i + 1 < fam.grid_size(); ++i)
            {
                const double d = theta_distance(fam.theta_grid[i],
                                                fam.theta_grid[i + 1]);
                Measure mu_i = mu, mu_j = mu;
                SignedMeasure eta_i = eta, eta_j = eta;
                for (unsigned n = 1; n <= 10; ++n)
                {
                    mu_i = push_measure(fam.kernel_at(i), mu_i);
                    mu_j = push_measure(fam.kernel_at(i + 1), mu_j);
                    CHECK(sigma_beta(mu_i, mu_j, smooth().V, beta) <=
                          nb.general(n, mu_v) * d + 1e-9);

                    eta_i = push_measure(fam.kernel_at(i), eta_i);
                    eta_j = push_measure(fam.kernel_at(i + 1), eta_j);
                    SignedMeasure diff;
                    diff.weights.resize(2);
                    for (std::size_t x = 0; x < 2; ++x)
                    {
                        diff.weights[x] =
                            eta_i.weights[x] - eta_j.weights[x];
                    }
                    CHECK(sigma_beta(diff, smooth().V, beta) <=
                          nb.zero_mass(n) * d * rho_eta + 1e-9);
                }
            }
        }
    }

    TEST_CASE("measure extension holds with the fitted constant")
    {
        const MeasureExtensionReport report = extend_to_measures_check(
            smooth().family, smooth().V, WeightParam{smooth().cc.beta},
            smooth().hyp.L_P, 64, 3);
        CHECK(report.trials == 64);
        CHECK(report.worst_probability_ratio <= 1.0 + 1e-9);
        CHECK(report.worst_signed_ratio <= 1.0 + 1e-9);
        CHECK(report.worst_probability_ratio > 0.0);

        // A starved constant is caught with a witness.
        try
        {
            extend_to_measures_check(smooth().family, smooth().V,
                                     WeightParam{smooth().cc.beta},
                                     smooth().hyp.L_P / 1e6, 8, 3);
            FAIL("expected ViolatedBound");
        }
        catch (const Error& e)
        {
            CHECK(e.code() == ErrorCode::ViolatedBound);
        }

        // A parameter-independent family passes with zero budget on both
        // sides (0 <= 0), ratios untouched.
        ParametricFamily constant = smooth().family;
        for (std::size_t g = 0; g < constant.grid_size(); ++g)
        {
            constant.kernels[g] = oracle_kernel();
        }
        const MeasureExtensionReport zero = extend_to_measures_check(
            constant, smooth().V, WeightParam{1.0}, 0.0, 8, 3);
        CHECK(zero.worst_probability_ratio == 0.0);
        CHECK(zero.worst_signed_ratio == 0.0);
    }

    TEST_CASE("certified conclusions verify over the whole grid")
    {
        const EmpiricalCertifyReport report = empirical_certify(
            smooth().family, smooth().V, WeightParam{smooth().cc.beta},
            smooth().bounds, smooth().solutions, smooth().mu_stars);

        // All unordered pairs of the 5-point grid.
        CHECK(report.pairs_checked == 10);
        CHECK(report.tightness_h <= 1.0 + 1e-9);
        CHECK(report.tightness_u <= 1.0 + 1e-9);
        CHECK(report.tightness_mu <= 1.0 + 1e-9);
        CHECK(report.tightness_h > 0.0);
        CHECK(report.max_h_slope <= smooth().bounds.L_h + 1e-9);

        // Starving L_h must trip the certified check.
        try
        {
            empirical_certify(smooth().family, smooth().V,
                              WeightParam{smooth().cc.beta}, smooth().bounds,
                              smooth().solutions, smooth().mu_stars,
                              smooth().bounds.L_h / 1e9);
            FAIL("expected ViolatedBound");
        }
        catch (const Error& e)
        {
            CHECK(e.code() == ErrorCode::ViolatedBound);
        }

        // Solution count mismatch is a dimension error.
        std::vector<PoissonSolution> short_list(smooth().solutions.begin(),
                                                smooth().solutions.end() - 1);
        CHECK_THROWS_AS(
            empirical_certify(smooth().family, smooth().V,
                              WeightParam{smooth().cc.beta}, smooth().bounds,
                              short_list),
            Error);
    }

    TEST_CASE("relaxed constants reduce to the one-step forms at r = 1")
    {
        const ParametricFamily& fam = smooth().family;
        const RStepCertificate rcert = fit_r_step(fam, smooth().V, 1);
        REQUIRE(rcert.r == 1);

        const LipschitzHypotheses hyp =
            fit_hypotheses(fam, smooth().V, WeightParam{rcert.cc_r.beta});
        const LipschitzBounds relaxed =
            relaxed_constants(fam, smooth().V, rcert, hyp);
        const LipschitzBounds one_step =
            theoretical_constants(rcert.cc_r, rcert.drift_r, hyp);

        // Identical by arithmetic identity, not merely close.
        CHECK(relaxed.L_P_prime == one_step.L_P_prime);
        CHECK(relaxed.L_h == one_step.L_h);
        CHECK(relaxed.L_u1 == one_step.L_u1);
        CHECK(relaxed.L_u2 == one_step.L_u2);
        CHECK(relaxed.L_u == one_step.L_u);
        CHECK(relaxed.L_mu_star == one_step.L_mu_star);
        CHECK(relaxed.L_rh == one_step.L_h);
        CHECK(relaxed.L_ru == one_step.L_u);
        CHECK(relaxed.L_P_r == hyp.L_P);
        // The relaxed route fills its extra fields even at r = 1.
        CHECK_FALSE(std::isnan(relaxed.alpha_doubleprime));
        CHECK_FALSE(std::isnan(relaxed.L_P_doubleprime));
    }

    TEST_CASE("relaxed constants on the two-step near-cycle")
    {
        const ParametricFamily fam = rotation_family();
        const Lyapunov V = rotation_V();
        const RStepCertificate rcert = fit_r_step(fam, V, 8);
        REQUIRE(rcert.r == 2);
        const WeightParam beta{rcert.cc_r.beta};
        const LipschitzHypotheses hyp = fit_hypotheses(fam, V, beta);

        const LipschitzBounds bounds =
            relaxed_constants(fam, V, rcert, hyp);

        const double gamma_tilde = std::max(rcert.gamma_1, 1.05);
        const double floor_dd =
            std::max({rcert.alpha_prime, gamma_tilde, 1.0});
        CHECK(bounds.alpha_doubleprime ==
              doctest::Approx(1.05 * floor_dd).epsilon(1e-12));
        CHECK(bounds.L_P_doubleprime >= 0.0);
        CHECK_FALSE(std::isnan(bounds.L_ru));
        CHECK(bounds.L_ru > 0.0);

        // L_{P^r} is fitted on the squared kernels; recompute independently.
        ParametricFamily powered = fam;
        for (std::size_t g = 0; g < fam.grid_size(); ++g)
        {
            powered.kernels[g] = kernel_power(fam.kernel_at(g), 2);
        }
        CHECK(bounds.L_P_r ==
              doctest::Approx(estimate_kernel_lipschitz(powered, V, beta))
                  .epsilon(1e-14));

        // L_rh is the one-step form of the r-fold chain; recompute it.
        const double expected_L_rh =
            (hyp.L_f + bounds.L_P_r * hyp.K_f / (1.0 - rcert.cc_r.alpha)) *
            (1.0 + rcert.cc_r.beta * rcert.drift_r.K /
                       (1.0 - rcert.drift_r.gamma));
        CHECK(bounds.L_rh == doctest::Approx(expected_L_rh).epsilon(1e-12));

        // An explicit growth rate must clear the floor strictly.
        CHECK_THROWS_AS(relaxed_constants(fam, V, rcert, hyp, floor_dd),
                        Error);
        const LipschitzBounds wide =
            relaxed_constants(fam, V, rcert, hyp, 2.0 * floor_dd);
        CHECK(wide.alpha_doubleprime == doctest::Approx(2.0 * floor_dd));
        CHECK(wide.L_P_doubleprime != bounds.L_P_doubleprime);

        // The relaxed conclusions verify empirically against the r-step
        // solutions, with L_rh and L_ru standing in for the one-step bounds.
        std::vector<PoissonSolution> solutions;
        std::vector<Measure> mu_stars;
        for (std::size_t g = 0; g < fam.grid_size(); ++g)
        {
            const InvariantMeasure inv =
                invariant_measure(fam.kernel_at(g), V, beta);
            mu_stars.push_back(inv.mu_star);
            solutions.push_back(poisson_r_step(fam.kernel_at(g), rcert,
                                               fam.f_at(g), V, inv.mu_star));
        }
        const EmpiricalCertifyReport report = empirical_certify(
            fam, V, beta, bounds, solutions, mu_stars, bounds.L_rh,
            bounds.L_ru);
        CHECK(report.pairs_checked == 3);
        CHECK(report.tightness_h <= 1.0 + 1e-9);
        CHECK(report.tightness_u <= 1.0 + 1e-9);
        CHECK(report.tightness_mu <= 1.0 + 1e-9);
    }
}
