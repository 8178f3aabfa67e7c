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

// Fitting and verification of the structural conditions a parametric kernel
// family must satisfy before any stability constant can be certified:
//
//   drift         P*V <= gamma V + K        (gamma < 1, uniformly in theta)
//   minorization  P(x,.) >= alpha_bar mu_bar on the small set C = {V <= R},
//                 R > 2K/(1-gamma)
//   contraction   with beta = alpha0/K and a free pair (alpha0, gamma0),
//                 alpha = max(1-(alpha_bar-alpha0), (2+R beta gamma0)/(2+R beta))
//                 satisfies osc(P*phi) <= alpha osc(phi) and alpha > gamma
//
// plus the r-step relaxation (drift required only for P^r together with a
// one-step growth bound P*V <= gamma_1 V + K_1, gamma_1 allowed above 1) and
// the reduction from per-parameter Lyapunov functions V_theta sandwiched by
// a common V.
//
// Every certificate re-verifies its defining inequalities on the full grid
// at construction time; certificates are never emitted unverified.

#ifndef ERGOCERT_CERTIFY_HPP
#define ERGOCERT_CERTIFY_HPP

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "ergocert/norms.hpp"
#include "ergocert/statespace.hpp"

namespace ergocert
{

// Worst-case location of a fitted inequality's tightest margin.
struct SlackWitness
{
    std::size_t grid_index = 0;
    std::size_t state = 0;
    double slack = 0.0;  // inequality margin at the witness (>= -tolerance)
};

// Uniform drift certificate: P_theta*V <= gamma V + K on the whole grid.
struct DriftCertificate
{
    double gamma = 0.0;  // in (0, 1)
    double K = 0.0;      // >= 0
    // Margin gamma*V(x)+K - (P*V)(x) per (grid point, state), flattened
    // grid-major; all entries >= -1e-10.
    std::vector<double> slack;
    SlackWitness worst;
    // How each constant was obtained ("fitted", "user", "defaulted").
    std::map<std::string, std::string> provenance;
};

// Local minorization certificate on the sublevel set C = {V <= R}.
struct MinorizationCertificate
{
    double R = 0.0;                      // > 2K/(1-gamma)
    std::vector<std::size_t> small_set;  // indices of C, ascending
    double alpha_bar = 0.0;              // in (0, 1]
    Measure mu_bar;                      // probability measure
    std::map<std::string, std::string> provenance;
};

// Contraction constants derived from drift + minorization.
struct ContractionConstants
{
    double alpha0 = 0.0;  // in (0, alpha_bar)
    double gamma0 = 0.0;  // in (gamma + 2K/R, 1)
    double beta = 0.0;    // alpha0 / K
    double alpha = 0.0;   // in (gamma, 1)
    // The two branches of the alpha formula, surfaced separately so a
    // corrected constant can be swapped without API change.
    double branch_minorization = 0.0;  // 1 - (alpha_bar - alpha0)
    double branch_drift = 0.0;         // (2 + R beta gamma0)/(2 + R beta)
    // True when K was below the degeneracy floor and beta used K = 1e-12.
    bool k_floored = false;
    std::map<std::string, std::string> provenance;
};

// r-step certificate: drift for P^r, one-step growth for P, minorization for
// P^r, and the derived quasi-contraction envelope
//   osc(P^{*n} phi) <= C alpha^n osc(phi),
// with alpha = alpha_r^(1/r), C = alpha_r^(-1) (alpha')^(r-1),
// alpha' = max(1 + beta K_1, gamma_1).
struct RStepCertificate
{
    unsigned r = 1;
    DriftCertificate drift_r;        // for the r-fold kernel
    MinorizationCertificate minor_r; // for the r-fold kernel
    ContractionConstants cc_r;       // beta and alpha_r for the r-fold kernel
    double gamma_1 = 0.0;            // one-step growth slope (may exceed 1)
    double K_1 = 0.0;                // one-step growth offset, >= 0
    double alpha_prime = 0.0;        // max(1 + beta K_1, gamma_1)
    double C = 1.0;                  // >= 1
    double alpha = 0.0;              // alpha_r^(1/r), in (0,1)
    std::map<std::string, std::string> provenance;
};

// Fits the minimal uniform drift pair.  Convention (recorded in provenance):
// first the smallest K admitting any slope below the cap gamma <= 1 - 1e-6,
//   K* = max(0, max_{theta,x} ((P*V)(x) - gamma_cap V(x))),
// then the smallest feasible slope
//   gamma* = max over states with V(x) > 0 of ((P*V)(x) - K*)/V(x),
// clamped into (0, gamma_cap).  Throws Error(InfeasibleDrift) when no
// gamma < gamma_cap works for any K.
DriftCertificate fit_drift(const ParametricFamily& family, const Lyapunov& V);
// Single-kernel convenience overload (a one-point family).
DriftCertificate fit_drift(const Kernel& kernel, const Lyapunov& V);

// Default small-set radius: 2K/(1-gamma) * (1 + margin).  Only strict
// inequality is required; the margin keeps the set robustly nonempty.
double default_R(const DriftCertificate& drift, double margin = 0.25);

// Fits the minorization certificate: mu_bar is the normalized componentwise
// minimum of all rows P_theta(x,.) over theta on the grid and x in
// C = {V <= R}; alpha_bar is the total mass of that minimum before
// normalization.  Throws EmptySmallSet when C is empty and ZeroMinorization
// when alpha_bar = 0 (the family is not uniformly minorized on C).
MinorizationCertificate fit_minorization(const ParametricFamily& family,
                                         const Lyapunov& V,
                                         const DriftCertificate& drift,
                                         double R);

// Derives (beta, alpha) from drift + minorization for a chosen admissible
// pair (alpha0, gamma0).  Validates 0 < alpha0 < alpha_bar and
// gamma + 2K/R < gamma0 < 1, then asserts alpha in (gamma, 1).  K below
// 1e-12 is floored to 1e-12 for beta = alpha0/K and flagged.
ContractionConstants hm_constants(const DriftCertificate& drift,
                                  const MinorizationCertificate& minor,
                                  double alpha0, double gamma0);

// Midpoint default tuning: alpha0 = alpha_bar/2,
// gamma0 = (gamma + 2K/R + 1)/2.
ContractionConstants hm_constants_default(const DriftCertificate& drift,
                                          const MinorizationCertificate& minor);

// Optional grid search minimizing alpha over (alpha0, gamma0), steps points
// per axis inside the open admissible rectangle.
ContractionConstants hm_constants_tuned(const DriftCertificate& drift,
                                        const MinorizationCertificate& minor,
                                        unsigned steps = 32);

// Empirical verification of the contraction property on random inputs:
// for `trials` random observables phi and every grid point,
//   osc(P* phi) <= alpha osc(phi) + 1e-9,
// and for `trials` random probability pairs (mu1, mu2),
//   sigma_beta(P mu1, P mu2) <= alpha sigma_beta(mu1, mu2) + 1e-9.
// Reports the worst observed ratios (empirical contraction factors).
// Throws Error(ViolatedBound) with a witness on any violation.
struct ContractionCheckReport
{
    unsigned trials = 0;
    double worst_function_ratio = 0.0;
    double worst_measure_ratio = 0.0;
    std::size_t worst_function_grid_index = 0;
    std::size_t worst_measure_grid_index = 0;
};
ContractionCheckReport check_function_contraction(
    const ParametricFamily& family, const Lyapunov& V,
    const ContractionConstants& cc, unsigned trials, std::uint64_t seed = 1);

// Fits one-step growth constants P*V <= gamma_1 V + K_1 (gamma_1 allowed
// above 1).  Along the feasibility frontier K_1(gamma_1) =
// max(0, max(P*V - gamma_1 V)) the pair is chosen to minimize
// alpha' = max(1 + beta K_1, gamma_1) (convex in gamma_1), and gamma_1 is
// then floored at 1.05 — the standing convention gamma_1 > 1 that keeps
// (gamma_1 - 1) divisions in downstream constants well-conditioned.  The
// floor preserves feasibility since raising the slope weakens the bound.
struct GrowthConstants
{
    double gamma_1 = 0.0;
    double K_1 = 0.0;
};
GrowthConstants fit_growth(const ParametricFamily& family, const Lyapunov& V,
                           const WeightParam& beta);

// Finds the smallest r <= r_max such that the r-fold kernels admit a uniform
// drift certificate, then assembles the full r-step certificate
// (minorization and contraction constants for P^r, growth constants,
// alpha', C, alpha).  Throws Error(NoFeasibleR) if no r <= r_max works.
RStepCertificate fit_r_step(const ParametricFamily& family, const Lyapunov& V,
                            unsigned r_max);

// Reduction from per-parameter Lyapunov functions to a uniform r-step
// certificate.  Requires the sandwich a V + b <= V_theta <= c V + d
// (a, c > 0) on every (theta, x) and a uniform per-parameter drift pair
// (gamma, K) for P_theta w.r.t. V_theta.  Returns the certificate for the
// smallest r with gamma^r * c/a < 1; growth constants come from the bound
// P*V <= (gamma c / a) V + (gamma d + K - b)/a implied by the sandwich.
// Throws SandwichViolated / InfeasibleDrift with witnesses.
RStepCertificate individual_to_uniform(const ParametricFamily& family,
                                       const std::vector<Lyapunov>& V_family,
                                       const Lyapunov& V, double a, double b,
                                       double c, double d);

}  // namespace ergocert

#endif  // ERGOCERT_CERTIFY_HPP
