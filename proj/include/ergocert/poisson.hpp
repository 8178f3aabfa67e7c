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

// Invariant measures and the Poisson equation
//
//     (I - P*) u = f - h,     h = mu*(f),
//
// solved two independent ways: the geometric series
// u(x) = sum_n (P^{*n} f(x) - h), truncated by its analytic tail bound, and
// a direct linear solve used as an oracle.  The particular solution is
// centered, mu*(u) = 0.  Solutions satisfy
//
//     |u(x)| <= osc(f) * U(x),  U(x) = (2 + beta V(x) + beta K/(1-gamma))/(1-alpha)
//
// and the scalar envelope |u|_beta <= K_u osc(f) with
// K_u = (2 + beta K/(1-gamma))/(1-alpha).  An r-step construction solves the
// equation for P^r and assembles u = (I + P* + ... + P^{*(r-1)}) v.

#ifndef ERGOCERT_POISSON_HPP
#define ERGOCERT_POISSON_HPP

#include <cstddef>
#include <vector>

#include "ergocert/certify.hpp"
#include "ergocert/norms.hpp"
#include "ergocert/statespace.hpp"

namespace ergocert
{

// Fixed point of the kernel acting on probability measures.
struct InvariantMeasure
{
    Measure mu_star;
    unsigned iterations = 0;
    double final_sigma_gap = 0.0;  // sigma_beta(mu, P mu) at the last step
    double crosscheck_gap = 0.0;   // sup|mu - mu_oracle| vs the linear solve
};

// Solution of (I - P*)u = f - h with mu*(u) = 0, plus diagnostics.
struct PoissonSolution
{
    Observable u;
    double h = 0.0;            // mu*(f)
    unsigned truncation_n = 0; // series terms summed (0 for the direct solve)
    double residual_norm = 0.0;    // |(I-P*)u - (f-h)|_beta
    double centering_shift = 0.0;  // mu*(u) subtracted after summation
    // Pointwise margin osc(f)*U(x) - |u(x)| of the affine bound; empty when
    // no certificate was supplied (direct solve without constants).
    std::vector<double> bound_slack;
    double k_u = 0.0;  // scalar bound constant for the solve that produced u
};

// Power iteration mu <- P mu from the uniform start, stopping when
// sigma_beta(mu, P mu) <= tol; cross-checked against the linear-solve oracle
// (mu (P - I) = 0, sum mu = 1) to 1e-8.  Throws Error(NonConvergence) after
// max_iterations (periodic or reducible chains), and Error(SingularSystem)
// if the cross-check disagrees.
InvariantMeasure invariant_measure(const Kernel& kernel, const Lyapunov& V,
                                   const WeightParam& beta, double tol = 1e-12,
                                   unsigned max_iterations = 100000);

// Series construction.  Terms t_0 = f - h, t_{k+1} = P* t_k are summed until
// the analytic tail bound
//   osc(f) * alpha^n * (2 + beta V(x) + beta mu*(V)) / (1 - alpha) < tol
// holds uniformly in x, so truncation_n is itself a certificate.  The drift
// certificate supplies (gamma, K) for the affine bound U(x).
PoissonSolution poisson_series(const Kernel& kernel, const Observable& f,
                               const Lyapunov& V, const Measure& mu_star,
                               const ContractionConstants& cc,
                               const DriftCertificate& drift,
                               double tol = 1e-10);

// Direct oracle: solves the (n+1)-equation system (I - P*)u = f - h,
// mu*(u) = 0 by least squares.  Agrees with poisson_series to 1e-6 in
// |.|_beta on certified instances.  Throws Error(SingularSystem) when the
// stacked system is rank-deficient or inconsistent (reducible or periodic
// chains outside the certified class).
PoissonSolution poisson_direct(const Kernel& kernel, const Observable& f,
                               const Measure& mu_star);

// K_u = (2 + beta K/(1-gamma)) / (1 - alpha); monotone increasing in
// alpha, beta and K, and -> 2 as alpha, beta -> 0.
double k_u_constant(const ContractionConstants& cc,
                    const DriftCertificate& drift);

// r-step construction: solves (I - P^{*r}) v = f - h by poisson_series on
// the r-fold kernel, then composes u = (I + P* + ... + P^{*(r-1)}) v.
// Verifies that u solves the one-step equation (residual <= 1e-8) and the
// affine bound |u(x)| <= osc(f) * K_r(x) with coefficients assembled from
// exact finite geometric sums of gamma_1:
//   K_r(x) = (2r + beta*S1*V(x) + beta*K_1*S2 + beta*r*K_r/(1-gamma_r)) / (1-alpha_r),
//   S1 = sum_{k<r} gamma_1^k,  S2 = sum_{k<r} sum_{l<k} gamma_1^l,
// which reduces to U(x) exactly at r = 1.
PoissonSolution poisson_r_step(const Kernel& kernel,
                               const RStepCertificate& rcert,
                               const Observable& f, const Lyapunov& V,
                               const Measure& mu_star, double tol = 1e-10);

// The scalar envelope used in the r-step bound: max of the two affine
// coefficients of K_r(x) w.r.t. (1, beta V(x)), so that
// |u(x)| <= k_u_r * osc(f) * (1 + beta V(x)).
double k_u_r_constant(const RStepCertificate& rcert);

}  // namespace ergocert

#endif  // ERGOCERT_POISSON_HPP
