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

// Model zoo: generators for certified-by-construction and adversarial
// fixtures.
//
//  * Discretized linear stochastic systems X_{n+1} = A_theta X_n + B_theta U_n
//    with quadratic Lyapunov V(x) = x^T Q x.  The continuous drift constants
//    are gamma = lambda_max(Q^{-1/2} A^T Q A Q^{-1/2}) and
//    K = tr(B^T Q B S); a self-test compares the discretized fit against
//    them (equivalently, A^T Q A <= gamma Q in the semidefinite order).
//  * Analytic two-state families with closed-form invariant measure
//    mu* = (q, p)/(p+q).
//  * Randomized families with enforced minorization: every row is
//    alpha_floor * nu + (1 - alpha_floor) * (random row), so the
//    minorization constant is at least alpha_floor by construction.

#ifndef ERGOCERT_MODELS_HPP
#define ERGOCERT_MODELS_HPP

#include <cstdint>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "ergocert/statespace.hpp"

namespace ergocert
{

// Specification of a parameter-dependent linear stochastic system together
// with its spatial discretization.  Matrices are materialized per grid
// point.  The noise driver is a finite discrete distribution (zero mean
// within 1e-12) so pushforwards and the covariance S are exact.
struct LinearSystemSpec
{
    std::vector<std::vector<double>> theta_grid;  // parameter points
    std::vector<Eigen::MatrixXd> A;               // d x d, one per grid point
    std::vector<Eigen::MatrixXd> B;               // d x m, one per grid point
    std::vector<Eigen::VectorXd> noise_support;   // points in R^m
    std::vector<double> noise_probs;              // matching probabilities
    Eigen::MatrixXd Q;                            // symmetric positive definite
    std::vector<double> box_lo;                   // per-axis lower bounds
    std::vector<double> box_hi;                   // per-axis upper bounds
    std::vector<unsigned> points_per_axis;        // per-axis cell counts
    // Acceptable relative deviation of the discretized drift constants from
    // the continuous prediction before the grid is declared too coarse.
    double self_test_tolerance = 0.25;

    void validate() const;  // throws Error(InvalidArgument) on any violation
};

// Per-grid-point comparison of the discretized drift ratio against the
// continuous prediction.  The fitted constants come from a least-squares
// fit of (P*V)(x) against (V(x), 1), restricted to states whose noise
// images all stay inside the box (edge clamping distorts the others).
struct LinearSelfTest
{
    std::vector<double> gamma_continuous;  // lambda_max(A^T Q A, Q)
    std::vector<double> K_continuous;      // tr(B^T Q B S)
    std::vector<double> gamma_fitted;      // from the discretized kernel
    std::vector<double> K_fitted;
    double max_gamma_deviation = 0.0;      // relative
    double max_K_deviation = 0.0;          // relative
    // Smallest gamma with A^T Q A <= gamma Q, found by bisection on
    // lambda_min(gamma Q - A^T Q A); equals gamma_continuous within 1e-6.
    std::vector<double> gamma_semidefinite;
};

struct LinearFamilyResult
{
    ParametricFamily family;
    Lyapunov V;                              // x^T Q x at cell centers
    std::vector<Eigen::VectorXd> centers;    // cell centers, state order
    LinearSelfTest self_test;
};

// Discretizes the system: each cell center x is pushed through
// A_theta x + B_theta u over the noise support and the image mass is
// assigned to the nearest cell (with out-of-box mass clamped to edge cells,
// which preserves row stochasticity exactly).  The default observable is
// f(x) = first coordinate of the cell center, at every grid point.
// Throws Error(InvalidArgument) for unstable A_theta (spectral radius >= 1)
// and Error(ViolatedBound) when the self-test deviation exceeds
// spec.self_test_tolerance (grid too coarse).
LinearFamilyResult build_linear_family(const LinearSystemSpec& spec);

// Analytic two-state family P_theta = [[1-p, p], [q, 1-q]] on a scalar
// theta grid.  p_at/q_at must map into (0, 1); f_at supplies the per-theta
// observable (2 values).  The invariant measure is mu* = (q, p)/(p+q).
struct TwoStateFamilyResult
{
    ParametricFamily family;
    // Closed-form invariant measure per grid point.
    std::vector<Measure> mu_star;
};
TwoStateFamilyResult build_two_state_family(
    const std::vector<double>& theta_grid,
    const std::function<double(double)>& p_at,
    const std::function<double(double)>& q_at,
    const std::function<std::vector<double>(double)>& f_at);

// Random family with enforced minorization: nu is a seeded random
// probability row bounded away from 0; rows interpolate linearly in theta
// between two seeded random stochastic matrices, then mix with nu:
//   row = alpha_floor * nu + (1 - alpha_floor) * interpolated row.
// Observables interpolate between two seeded random vectors in [-1, 1].
// Deterministic under (n, grid, seed, alpha_floor).
struct RandomFamilyResult
{
    ParametricFamily family;
    Measure nu;  // the common minorizing measure
    double alpha_floor = 0.0;
};
RandomFamilyResult build_random_minorized_family(
    std::size_t n, const std::vector<double>& theta_grid, std::uint64_t seed,
    double alpha_floor);

}  // namespace ergocert

#endif  // ERGOCERT_MODELS_HPP
