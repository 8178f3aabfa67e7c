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

// Weighted norms and metrics with weight function w(x) = 1 + beta*V(x):
//
//   weighted sup norm       |phi|_beta   = max_x |phi(x)| / w(x)
//   state metric            d_beta(x,y)  = 2 + beta*V(x) + beta*V(y),  0 at x=y
//                                        = w(x) + w(y) for x != y
//   oscillation seminorm    osc(phi)     = max_{x!=y} |phi(x)-phi(y)| / d_beta(x,y)
//   weighted TV             rho_beta(eta)= sum_x w(x) |eta(x)|
//   dual seminorm           sigma_beta(eta) = sup { eta(phi) : osc(phi) <= 1 }
//
// For zero-mass signed measures sigma_beta equals rho_beta, so production
// paths use the O(n) closed form; the linear-program dual is kept only as an
// independent cross-check oracle for tests.

#ifndef ERGOCERT_NORMS_HPP
#define ERGOCERT_NORMS_HPP

#include <cstddef>
#include <utility>

#include "ergocert/statespace.hpp"

namespace ergocert
{

// The scalar beta > 0 weighting the norms.
struct WeightParam
{
    double beta = 1.0;

    void validate() const;  // throws unless beta > 0 and finite
};

// max_x |phi(x)| / (1 + beta V(x)); zero iff phi is identically zero.
double sup_norm_beta(const Observable& phi, const Lyapunov& V,
                     const WeightParam& beta);

// 0 if x == y, else 2 + beta V(x) + beta V(y) (always >= 2).
double d_beta(std::size_t x, std::size_t y, const Lyapunov& V,
              const WeightParam& beta);

// max over unordered pairs x != y of |phi(x)-phi(y)| / d_beta(x,y);
// 0 for constant phi (and for n == 1).  Never exceeds sup_norm_beta(phi).
double osc_seminorm(const Observable& phi, const Lyapunov& V,
                    const WeightParam& beta);

// Same value plus the maximizing pair (first-index tie-break; (0,0) when
// n == 1).  The pair is diagnostic output only.
struct OscWitness
{
    double value = 0.0;
    std::size_t x = 0;
    std::size_t y = 0;
};
OscWitness osc_seminorm_witness(const Observable& phi, const Lyapunov& V,
                                const WeightParam& beta);

// The oscillation seminorm as a minimum of shifted sup norms:
// osc(phi) = min_c |phi + c|_beta, attained at a finite c*.  The objective
// is the max of 2n convex piecewise-linear functions of c; the minimum is
// found exactly by balancing the two active pieces of the maximizing pair
// (x*,y*): c* = -(phi(x*) w(y*) + phi(y*) w(x*)) / (w(x*) + w(y*)).
// For n == 1 the value is 0 with c* = -phi(0).
struct MinShiftResult
{
    double value = 0.0;
    double c_star = 0.0;
};
MinShiftResult osc_via_min_shift(const Observable& phi, const Lyapunov& V,
                                 const WeightParam& beta);

// Weighted total variation sum_x (1 + beta V(x)) |eta(x)|.
double rho_beta(const SignedMeasure& eta, const Lyapunov& V,
                const WeightParam& beta);

// Distance between two probability measures: rho_beta(mu1 - mu2).
double sigma_beta(const Measure& mu1, const Measure& mu2, const Lyapunov& V,
                  const WeightParam& beta);
// Zero-mass signed measure variant (the production sigma_beta): equals
// rho_beta(eta).  Callers must pass eta with |sum eta| <= 1e-10.
double sigma_beta(const SignedMeasure& eta, const Lyapunov& V,
                  const WeightParam& beta);

// Independent test oracle: computes sigma_beta(eta) for zero-mass eta by
// solving the finite linear program
//     maximize sum_x phi(x) eta(x)
//     subject to |phi(x) - phi(y)| <= d_beta(x,y) for all pairs,
// with a dense primal simplex (slack basis, Bland's rule).  Rejects eta with
// nonzero total mass (the objective is unbounded along constant shifts
// otherwise).  Intended for small n (tests use n <= 12).
double sigma_beta_dual_oracle(const SignedMeasure& eta, const Lyapunov& V,
                              const WeightParam& beta);

}  // namespace ergocert

#endif  // ERGOCERT_NORMS_HPP
