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

// Parameter-sensitivity certificates.  Hypotheses fitted from the grid:
//
//   kernel:      sigma_beta(P_theta delta_x, P_theta' delta_x)
//                   <= L_P |theta-theta'| (1 + beta V(x))
//   observables: |f_theta - f_theta'|_beta <= L_f |theta-theta'|,
//                K_f = sup_theta osc(f_theta)
//
// Closed-form consequences evaluated as pure arithmetic on certified
// constants (each reproducible from the report alone):
//
//   L_P' = (1 + beta K/(1-gamma)) / (1-alpha)
//   n-step:      sigma_beta(P^n mu, P'^n mu) <= L_P |dtheta| (L_P' + alpha^n beta mu(V)/(alpha-gamma))
//   zero-mass:   sigma_beta(P^n eta, P'^n eta) <= L_P |dtheta| n alpha^(n-1) |eta|(1+beta V)
//   invariant:   sigma_beta(mu*_theta, mu*_theta') <= L_P L_P' |dtheta|
//   L_h  = (L_f + L_P K_f/(1-alpha)) (1 + beta K/(1-gamma))
//   L_u1 = L_f/(1-alpha) + L_P K_f/(1-alpha)^2
//   L_u2 = L_f/(1-alpha) + 2 L_P K_f/(1-alpha)^2      (L_u1 <= L_u2)
//   L_u  = L_u2 (2 + beta K/(1-gamma))
//
// guaranteeing |h_theta - h_theta'| <= L_h |dtheta| and
// |u_theta(x) - u_theta'(x)| <= L_u (1+beta V(x)) |dtheta|, plus the r-step
// analogues L_P'' (growth-rate alpha'' > alpha'), L_rh and L_ru.  Every
// closed form is verified empirically over the grid; a certified bound
// observed to fail is an implementation bug and throws ViolatedBound.

#ifndef ERGOCERT_LIPSCHITZ_HPP
#define ERGOCERT_LIPSCHITZ_HPP

#include <cstddef>
#include <cstdint>
#include <vector>

#include "ergocert/certify.hpp"
#include "ergocert/norms.hpp"
#include "ergocert/poisson.hpp"
#include "ergocert/statespace.hpp"

namespace ergocert
{

// Fitted sensitivity hypotheses.
struct LipschitzHypotheses
{
    double L_P = 0.0;  // kernel constant
    double L_f = 0.0;  // observable constant
    double K_f = 0.0;  // sup over the grid of osc(f_theta)
    unsigned grid_pairs_checked = 0;
};

// Closed-form constants.  One-step fields are always filled; the relaxed
// (r-step) fields are NaN until relaxed_constants computes them.
struct LipschitzBounds
{
    double L_P_prime = 0.0;
    double L_h = 0.0;
    double L_u1 = 0.0;  // intermediate, exposed alongside the final L_u
    double L_u2 = 0.0;  // intermediate, L_u = L_u2 (2 + beta K/(1-gamma))
    double L_u = 0.0;
    // Invariant-measure constant: sigma_beta(mu*, mu*') <= L_mu_star |dtheta|
    // (L_P L_P'; the r-fold analogue in the relaxed case).
    double L_mu_star = 0.0;
    // r-step relaxation.
    double alpha_doubleprime = 0.0;
    double L_P_doubleprime = 0.0;
    double L_P_r = 0.0;  // kernel constant of the r-fold family
    double L_rh = 0.0;
    double L_ru = 0.0;
};

// L_P = max over grid pairs (adjacent by default, all pairs for audit) and
// states of sigma_beta(row difference) / (|theta-theta'| (1 + beta V(x))).
// Throws Error(DegenerateGrid) on coincident grid points and
// Error(InvalidArgument) for grids with fewer than 2 points.
double estimate_kernel_lipschitz(const ParametricFamily& family,
                                 const Lyapunov& V, const WeightParam& beta,
                                 bool all_pairs = false);

// Fits all three hypotheses (L_P, L_f, K_f) over the grid.
LipschitzHypotheses fit_hypotheses(const ParametricFamily& family,
                                   const Lyapunov& V, const WeightParam& beta,
                                   bool all_pairs = false);

// Checks the extension of the kernel hypothesis from Dirac measures to
// random probability measures mu and random zero-mass signed measures eta:
//   sigma_beta(P mu, P' mu)  <= L_P |dtheta| mu(1 + beta V)
//   sigma_beta(P eta, P' eta) <= L_P |dtheta| |eta|(1 + beta V).
// Throws Error(ViolatedBound) with a witness.
struct MeasureExtensionReport
{
    unsigned trials = 0;
    double worst_probability_ratio = 0.0;
    double worst_signed_ratio = 0.0;
};
MeasureExtensionReport extend_to_measures_check(const ParametricFamily& family,
                                                const Lyapunov& V,
                                                const WeightParam& beta,
                                                double L_P, unsigned trials,
                                                std::uint64_t seed = 1);

// Evaluators for the n-step bounds (per unit |theta-theta'|):
//   general(n, muV)  = L_P (L_P' + alpha^n beta muV / (alpha - gamma))
//   zero_mass(n)     = L_P n alpha^(n-1)        (0 at n = 0)
struct NStepBounds
{
    double L_P = 0.0;
    double L_P_prime = 0.0;
    double alpha = 0.0;
    double gamma = 0.0;
    double beta = 0.0;

    double general(unsigned n, double muV) const;
    double zero_mass(unsigned n) const;
};
NStepBounds nstep_bounds(const ContractionConstants& cc,
                         const DriftCertificate& drift, double L_P);

// Pure arithmetic assembly of the one-step closed forms.
LipschitzBounds theoretical_constants(const ContractionConstants& cc,
                                      const DriftCertificate& drift,
                                      const LipschitzHypotheses& hyp);

// Grid-wide empirical verification of the certified conclusions, given the
// per-grid-point Poisson solutions:
//   |h - h'| <= L_h |dtheta|,
//   |u(x) - u'(x)| <= L_u (1 + beta V(x)) |dtheta| for every state,
//   |u - u'|_beta <= L_u |dtheta|,
// plus the invariant-measure bound sigma_beta(mu*, mu*') <= L_P L_P' |dtheta|
// when invariant measures are supplied.  Records tightness ratios
// (empirical / theoretical, expected well below 1).  A violation indicates
// an implementation bug and throws Error(ViolatedBound).
struct EmpiricalCertifyReport
{
    unsigned pairs_checked = 0;
    double tightness_h = 0.0;        // max |h-h'| / (L_h |dtheta|)
    double tightness_u = 0.0;        // max pointwise ratio for u
    double tightness_mu = 0.0;       // max ratio for invariant measures
    double max_h_slope = 0.0;        // max finite-difference |dh|/|dtheta|
};
EmpiricalCertifyReport empirical_certify(
    const ParametricFamily& family, const Lyapunov& V, const WeightParam& beta,
    const LipschitzBounds& bounds, const std::vector<PoissonSolution>& solutions,
    const std::vector<Measure>& mu_stars = {}, double L_h_override = -1.0,
    double L_u_override = -1.0);

// r-step analogues.  With beta = beta_r from the certificate:
//   alpha'' > max(alpha', gamma_1~, 1) required (gamma_1~ = max(gamma_1, 1.05)
//     substitutes for certificates built with gamma_1 <= 1; feasible since
//     raising the growth slope preserves the growth inequality);
//   L_P'' = L_P max( 1/(alpha''-1) + beta K_1/((gamma_1~-1)(alpha''-gamma_1~)),
//                    1/(alpha''-gamma_1~) )
//     from the limit values of the three geometric sums bounding
//     sigma_beta(P^n mu, P'^n mu) <= L_P'' |dtheta| (alpha'')^n (1+beta mu(V));
//   L_{P^r} estimated on the r-fold family;
//   L_rh = (L_f + L_{P^r} K_f/(1-alpha_r)) (1 + beta K_r/(1-gamma_r));
//   L_ru assembled over m = 0..r-1 from
//     L_u^(r) (1 + beta(gamma_1^m V + K_1 sum_{l<m} gamma_1^l))   and
//     L_P'' (alpha'')^m K_u^(r) K_f (1 + beta V)  (exactly 0 at m = 0),
//   where L_u^(r), K_u^(r) are the one-step constants of the r-fold chain.
// Reduces to theoretical_constants at r = 1 by arithmetic identity.
// Pass alpha_dd <= 0 to use the default 1.05 * max(alpha', gamma_1~, 1).
LipschitzBounds relaxed_constants(const ParametricFamily& family,
                                  const Lyapunov& V,
                                  const RStepCertificate& rcert,
                                  const LipschitzHypotheses& hyp,
                                  double alpha_dd = -1.0);

}  // namespace ergocert

#endif  // ERGOCERT_LIPSCHITZ_HPP
