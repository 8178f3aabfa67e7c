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

// Hand-checked fixtures shared by the test suites.  Every closed-form value
// quoted in a comment was derived by hand (or with exact rational
// arithmetic) independently of the library code, so the tests are oracles,
// not snapshots.

#ifndef ERGOCERT_TESTS_FIXTURES_HPP
#define ERGOCERT_TESTS_FIXTURES_HPP

#include <cstdint>
#include <random>
#include <vector>

#include "ergocert/statespace.hpp"

namespace ergocert::testing
{

// Two-state chain with closed-form everything:
//   P = [[0.9, 0.1], [0.2, 0.8]],  V = (0, 1),  f = (1, 2)
//   mu*      = (2/3, 1/3)
//   h        = mu*(f) = 4/3
//   u        = (-10/9, 20/9)   (the centered solution, mu*(u) = 0)
//   drift    = (gamma, K) = (0.7, 0.1) under the min-K-then-min-gamma fit
//   minorization at R = 1: alpha_bar = 0.3, mu_bar = (2/3, 1/3)
inline Kernel oracle_kernel()
{
    return Kernel(2, {0.9, 0.1, 0.2, 0.8});
}

inline Lyapunov oracle_V()
{
    return Lyapunov{{0.0, 1.0}};
}

inline Observable oracle_f()
{
    return Observable{{1.0, 2.0}};
}

inline Measure oracle_mu_star()
{
    return Measure{{2.0 / 3.0, 1.0 / 3.0}};
}

// The oracle chain wrapped as a one-point family (theta = 0).
inline ParametricFamily oracle_family()
{
    ParametricFamily fam;
    fam.space.n = 2;
    fam.theta_grid = {{0.0}};
    fam.kernels = {oracle_kernel()};
    fam.f = {oracle_f()};
    return fam;
}

// Parameter-dependent two-state family on a scalar grid,
//   P_theta = [[1-p(theta), p(theta)], [q(theta), 1-q(theta)]],
// with affine p, q bounded inside (0, 1) on the default grid.  Everything
// downstream (invariant measure, drift, minorization) stays certifiable.
inline ParametricFamily smooth_two_state_family(
    const std::vector<double>& grid = {0.0, 0.05, 0.1, 0.15, 0.2})
{
    ParametricFamily fam;
    fam.space.n = 2;
    for (double t : grid)
    {
        const double p = 0.1 + 0.2 * t;
        const double q = 0.2 - 0.1 * t;
        fam.theta_grid.push_back({t});
        fam.kernels.emplace_back(2, std::vector<double>{1.0 - p, p,
                                                        q, 1.0 - q});
        fam.f.push_back(Observable{{1.0 + t, 0.5 - 2.0 * t}});
    }
    return fam;
}

// Three-state near-cycle that defeats the one-step drift fit but admits a
// two-step certificate.  V = (0, 1, 4); rows
//   P(0,.) = (1-p, p, 0),  P(1,.) = (0, 0, 1),  P(2,.) = (0.9, 0.1, 0),
// p = 0.05 + 0.02 theta on the default grid {0, 0.5, 1}.  State 1 maps all
// its mass to the V = 4 state, so (P*V)(1) = 4 with V(1) = 1 forces the
// slope to the cap: one-step drift is infeasible for every theta.  The
// two-step images are
//   (P^2 V)(0) = p(5-p),  (P^2 V)(1) = 0.1,  (P^2 V)(2) = 0.9 p + 0.4,
// so over the grid (p up to 0.07) the min-K-then-min-gamma fit is
//   K_2    = 0.07 * 4.93            = 0.3451   (binds at theta=1, state 0),
//   gamma_2 = (0.463 - 0.3451) / 4  = 0.029475 (binds at theta=1, state 2).
inline ParametricFamily rotation_family(
    const std::vector<double>& grid = {0.0, 0.5, 1.0})
{
    ParametricFamily fam;
    fam.space.n = 3;
    for (double t : grid)
    {
        const double p = 0.05 + 0.02 * t;
        fam.theta_grid.push_back({t});
        fam.kernels.emplace_back(3, std::vector<double>{1.0 - p, p, 0.0,
                                                        0.0, 0.0, 1.0,
                                                        0.9, 0.1, 0.0});
        fam.f.push_back(Observable{{0.0, 1.0 - t, t}});
    }
    return fam;
}

inline Lyapunov rotation_V()
{
    return Lyapunov{{0.0, 1.0, 4.0}};
}

// Per-parameter Lyapunov fixture for the sandwich reduction.  The kernel is
// fixed, symmetric two-state with hold probability 0.9; the per-parameter
// functions scale V = (0, 1) by 1 + 3 theta, so the sandwich
//   1*V + 0 <= V_theta <= 4*V + 0
// holds exactly on theta in [0, 1].  The per-parameter drift fit is
// (gamma, K) = (0.8, 0.4) (binding at theta = 1), and the smallest r with
// gamma^r * c/a = 0.8^r * 4 < 1 is r = 7.
struct SandwichFixture
{
    ParametricFamily family;
    std::vector<Lyapunov> V_family;
    Lyapunov V;
    double a = 1.0, b = 0.0, c = 4.0, d = 0.0;
};

inline SandwichFixture sandwich_fixture(
    const std::vector<double>& grid = {0.0, 0.5, 1.0})
{
    SandwichFixture fx;
    fx.family.space.n = 2;
    fx.V = Lyapunov{{0.0, 1.0}};
    for (double t : grid)
    {
        fx.family.theta_grid.push_back({t});
        fx.family.kernels.emplace_back(2, std::vector<double>{0.9, 0.1,
                                                              0.1, 0.9});
        fx.family.f.push_back(Observable{{t, 1.0}});
        fx.V_family.push_back(Lyapunov{{0.0, 1.0 + 3.0 * t}});
    }
    return fx;
}

// Seeded random helpers used by the property tests.
inline Observable random_observable(std::mt19937_64& rng, std::size_t n,
                                    double lo = -2.0, double hi = 2.0)
{
    std::uniform_real_distribution<double> dist(lo, hi);
    Observable phi;
    phi.values.reserve(n);
    for (std::size_t i = 0; i < n; ++i) phi.values.push_back(dist(rng));
    return phi;
}

inline Measure random_probability(std::mt19937_64& rng, std::size_t n)
{
    std::uniform_real_distribution<double> dist(0.0, 1.0);
    Measure mu;
    mu.weights.reserve(n);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i)
    {
        // Bounded away from zero so ratios stay well-conditioned.
        const double w = dist(rng) + 1e-9;
        mu.weights.push_back(w);
        total += w;
    }
    for (double& w : mu.weights) w /= total;
    return mu;
}

// Random zero-mass signed measure (difference of two probabilities).
inline SignedMeasure random_zero_mass(std::mt19937_64& rng, std::size_t n)
{
    const Measure mu1 = random_probability(rng, n);
    const Measure mu2 = random_probability(rng, n);
    SignedMeasure eta;
    eta.weights.reserve(n);
    for (std::size_t i = 0; i < n; ++i)
    {
        eta.weights.push_back(mu1[i] - mu2[i]);
    }
    return eta;
}

// Random row-stochastic kernel with rows bounded away from zero (keeps the
// chain aperiodic and irreducible so every certification step applies).
inline Kernel random_kernel(std::mt19937_64& rng, std::size_t n,
                            double floor = 0.02)
{
    std::uniform_real_distribution<double> dist(0.0, 1.0);
    std::vector<double> rows(n * n);
    for (std::size_t i = 0; i < n; ++i)
    {
        double total = 0.0;
        for (std::size_t j = 0; j < n; ++j)
        {
            rows[i * n + j] = floor + dist(rng);
            total += rows[i * n + j];
        }
        for (std::size_t j = 0; j < n; ++j) rows[i * n + j] /= total;
    }
    return Kernel(n, rows);
}

}  // namespace ergocert::testing

#endif  // ERGOCERT_TESTS_FIXTURES_HPP
