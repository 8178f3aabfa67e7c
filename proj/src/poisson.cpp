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

#include "ergocert/poisson.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Dense>

#include "ergocert/errors.hpp"

namespace ergocert
{

namespace
{

// Post-condition tolerances: residual of the solved equation and centering.
constexpr double kResidualTol = 1e-8;
// Slack accepted when re-checking a certified bound on a solved instance.
constexpr double kBoundSlack = 1e-8;

void require(bool condition, ErrorCode code, const std::string& message)
{
    if (!condition)
    {
        throw Error(code, message);
    }
}

Observable residual_of(const Kernel& kernel, const Observable& u,
                       const Observable& f, double h)
{
    // (I - P*)u - (f - h)
    const Observable pu = apply_function(kernel, u);
    Observable res;
    res.values.resize(u.size());
    for (std::size_t x = 0; x < u.size(); ++x)
    {
        res.values[x] = u.values[x] - pu.values[x] - (f.values[x] - h);
    }
    return res;
}

double sup_abs(const Observable& phi)
{
    double m = 0.0;
    for (double v : phi.values) m = std::max(m, std::abs(v));
    return m;
}

// Shared bound verification: |u(x)| <= osc_f * (A + B * beta * V(x)), with
// the slack vector and the scalar envelope check against k_u * w(x).
void attach_affine_bound(PoissonSolution& sol, const Lyapunov& V, double beta,
                         double osc_f, double A, double B, double k_u)
{
    sol.k_u = k_u;
    sol.bound_slack.resize(sol.u.size());
    for (std::size_t x = 0; x < sol.u.size(); ++x)
    {
        const double bound = osc_f * (A + B * beta * V.values[x]);
        sol.bound_slack[x] = bound - std::abs(sol.u.values[x]);
        if (sol.bound_slack[x] < -kBoundSlack)
        {
            std::ostringstream os;
            os << "pointwise solution bound violated at state " << x << ": |"
               << sol.u.values[x] << "| > " << bound;
            throw Error(ErrorCode::ViolatedBound, os.str());
        }
        const double envelope =
            k_u * osc_f * (1.0 + beta * V.values[x]);
        if (std::abs(sol.u.values[x]) > envelope + kBoundSlack)
        {
            std::ostringstream os;
            os << "scalar solution envelope violated at state " << x;
            throw Error(ErrorCode::ViolatedBound, os.str());
        }
    }
}

}  // namespace

InvariantMeasure invariant_measure(const Kernel& kernel, const Lyapunov& V,
                                   const WeightParam& beta, double tol,
                                   unsigned max_iterations)
{
    V.validate_nonnegative();
    beta.validate();
    require(V.size() == kernel.size(), ErrorCode::DimensionMismatch,
            "Lyapunov function size must equal the state count");
    require(tol > 0.0, ErrorCode::InvalidArgument,
            "invariant-measure tolerance must be positive");
    const std::size_t n = kernel.size();

    InvariantMeasure out;
    Measure mu;
    mu.weights.assign(n, 1.0 / static_cast<double>(n));
    bool converged = false;
    for (unsigned it = 1; it <= max_iterations; ++it)
    {
        Measure next = push_measure(kernel, mu);
        // Renormalize to cancel mass drift from rounding.
        const double mass = next.total_mass();
        for (double& w : next.weights) w /= mass;
        out.final_sigma_gap = sigma_beta(mu, next, V, beta);
        mu = std::move(next);
        out.iterations = it;
        if (out.final_sigma_gap <= tol)
        {
            converged = true;
            break;
        }
    }
    if (!converged)
    {
        std::ostringstream os;
        os << "power iteration did not reach gap " << tol << " within "
           << max_iterations << " steps (last gap " << out.final_sigma_gap
           << "); the chain may lack a unique attracting invariant measure";
        throw Error(ErrorCode::NonConvergence, os.str());
    }
    mu.validate_probability();
    out.mu_star = mu;

    // Cross-check against the stacked linear solve mu(P - I) = 0, sum mu = 1.
    Eigen::MatrixXd A(n + 1, n);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n) + 1);
    for (std::size_t j = 0; j < n; ++j)
    {
        for (std::size_t i = 0; i < n; ++i)
        {
            // Row j of the system: sum_i mu(i) P(i,j) - mu(j) = 0.
            A(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) =
                kernel(i, j) - (i == j ? 1.0 : 0.0);
        }
    }
    for (std::size_t i = 0; i < n; ++i)
    {
        A(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(i)) = 1.0;
    }
    b(static_cast<Eigen::Index>(n)) = 1.0;
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
    if (qr.rank() < static_cast<Eigen::Index>(n))
    {
        throw Error(ErrorCode::SingularSystem,
                    "invariant-measure system is rank-deficient (multiple "
                    "invariant measures)");
    }
    const Eigen::VectorXd solved = qr.solve(b);
    double gap = 0.0;
    for (std::size_t i = 0; i < n; ++i)
    {
        gap = std::max(gap, std::abs(solved(static_cast<Eigen::Index>(i)) -
                                     mu.weights[i]));
    }
    out.crosscheck_gap = gap;
    if (gap > 1e-8)
    {
        std::ostringstream os;
        os << "power iteration and linear solve disagree by " << gap
           << " (tolerance 1e-8)";
        throw Error(ErrorCode::SingularSystem, os.str());
    }
    return out;
}

PoissonSolution poisson_series(const Kernel& kernel, const Observable& f,
                               const Lyapunov& V, const Measure& mu_star,
                               const ContractionConstants& cc,
                               const DriftCertificate& drift, double tol)
{
    f.validate_finite();
    V.validate_nonnegative();
    mu_star.validate_probability();
    require(f.size() == kernel.size() && V.size() == kernel.size() &&
                mu_star.size() == kernel.size(),
            ErrorCode::DimensionMismatch,
            "solver inputs must share the kernel's state count");
    require(tol > 0.0, ErrorCode::InvalidArgument,
            "series tolerance must be positive");
    const std::size_t n = kernel.size();
    const WeightParam wp{cc.beta};

    PoissonSolution sol;
    sol.h = integrate(mu_star, f);
    const double osc_f = osc_seminorm(f, V, wp);
    const double mu_v = integrate(mu_star, V);

    // Tail of the series after N terms is bounded by
    //   sum_{k>=N} osc_f alpha^k (2 + beta V(x) + beta mu*(V))
    //   <= osc_f alpha^N (2 + beta max V + beta mu*(V)) / (1 - alpha).
    const double tail_scale = osc_f *
                              (2.0 + cc.beta * V.max_value() +
                               cc.beta * mu_v) /
                              (1.0 - cc.alpha);

    sol.u.values.assign(n, 0.0);
    Observable term;
    term.values.resize(n);
    for (std::size_t x = 0; x < n; ++x)
    {
        term.values[x] = f.values[x] - sol.h;
    }
    double tail = tail_scale;
    const unsigned kMaxTerms = 10000000;
    unsigned terms = 0;
    while (tail >= tol)
    {
        require(terms < kMaxTerms, ErrorCode::NonConvergence,
                "series truncation bound did not fall below tolerance");
        for (std::size_t x = 0; x < n; ++x)
        {
            sol.u.values[x] += term.values[x];
        }
        term = apply_function(kernel, term);
        ++terms;
        tail *= cc.alpha;
    }
    sol.truncation_n = terms;

    // Truncation and rounding perturb the centering; re-impose mu*(u) = 0.
    sol.centering_shift = integrate(mu_star, sol.u);
    for (std::size_t x = 0; x < n; ++x)
    {
        sol.u.values[x] -= sol.centering_shift;
    }
    require(std::abs(integrate(mu_star, sol.u)) <= kResidualTol,
            ErrorCode::ViolatedBound, "solution centering failed");

    sol.residual_norm = sup_norm_beta(residual_of(kernel, sol.u, f, sol.h),
                                      V, wp);
    if (sol.residual_norm > kResidualTol)
    {
        std::ostringstream os;
        os << "series solution residual " << sol.residual_norm
           << " exceeds " << kResidualTol;
        throw Error(ErrorCode::ViolatedBound, os.str());
    }

    // |u(x)| <= osc_f * U(x), U(x) = (2 + beta V(x) + beta K/(1-gamma))
    //                                / (1 - alpha).
    const double A = (2.0 + cc.beta * drift.K / (1.0 - drift.gamma)) /
                     (1.0 - cc.alpha);
    const double B = 1.0 / (1.0 - cc.alpha);
    attach_affine_bound(sol, V, cc.beta, osc_f, A, B,
                        k_u_constant(cc, drift));
    return sol;
}

PoissonSolution poisson_direct(const Kernel& kernel, const Observable& f,
                               const Measure& mu_star)
{
    f.validate_finite();
    mu_star.validate_probability();
    require(f.size() == kernel.size() && mu_star.size() == kernel.size(),
            ErrorCode::DimensionMismatch,
            "solver inputs must share the kernel's state count");
    const std::size_t n = kernel.size();

    PoissonSolution sol;
    sol.h = integrate(mu_star, f);

    // Stacked system: n equations (I - P*)u = f - h plus the centering
    // equation mu*(u) = 0, solved by rank-revealing least squares.
    Eigen::MatrixXd A(n + 1, n);
    Eigen::VectorXd b(static_cast<Eigen::Index>(n) + 1);
    for (std::size_t x = 0; x < n; ++x)
    {
        for (std::size_t j = 0; j < n; ++j)
        {
            A(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(j)) =
                (x == j ? 1.0 : 0.0) - kernel(x, j);
        }
        b(static_cast<Eigen::Index>(x)) = f.values[x] - sol.h;
    }
    for (std::size_t j = 0; j < n; ++j)
    {
        A(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(j)) =
            mu_star.weights[j];
    }
    b(static_cast<Eigen::Index>(n)) = 0.0;

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
    if (qr.rank() < static_cast<Eigen::Index>(n))
    {
        throw Error(ErrorCode::SingularSystem,
                    "stacked Poisson system is rank-deficient (no unique "
                    "centered solution)");
    }
    const Eigen::VectorXd u = qr.solve(b);
    const Eigen::VectorXd res = A * u - b;
    const double stacked_residual = res.cwiseAbs().maxCoeff();
    if (stacked_residual > kResidualTol)
    {
        std::ostringstream os;
        os << "stacked Poisson system is inconsistent (residual "
           << stacked_residual << ")";
        throw Error(ErrorCode::SingularSystem, os.str());
    }

    sol.u.values.resize(n);
    for (std::size_t x = 0; x < n; ++x)
    {
        sol.u.values[x] = u(static_cast<Eigen::Index>(x));
    }
    sol.truncation_n = 0;
    sol.centering_shift = 0.0;  // centering was imposed in-system
    // Without certificates the residual is reported in the unweighted sup
    // norm, which dominates every weighted one (weights are >= 1).
    sol.residual_norm = sup_abs(residual_of(kernel, sol.u, f, sol.h));
    return sol;
}

double k_u_constant(const ContractionConstants& cc,
                    const DriftCertificate& drift)
{
    return (2.0 + cc.beta * drift.K / (1.0 - drift.gamma)) / (1.0 - cc.alpha);
}

PoissonSolution poisson_r_step(const Kernel& kernel,
                               const RStepCertificate& rcert,
                               const Observable& f, const Lyapunov& V,
                               const Measure& mu_star, double tol)
{
    f.validate_finite();
    V.validate_nonnegative();
    mu_star.validate_probability();
    require(f.size() == kernel.size() && V.size() == kernel.size() &&
                mu_star.size() == kernel.size(),
            ErrorCode::DimensionMismatch,
            "solver inputs must share the kernel's state count");
    const unsigned r = rcert.r;
    require(r >= 1, ErrorCode::InvalidArgument, "certificate has r = 0");
    const std::size_t n = kernel.size();
    const double beta = rcert.cc_r.beta;
    const WeightParam wp{beta};

    // v solves (I - P^{*r}) v = f - h; mu* is invariant for P and P^r alike,
    // so the r-fold series uses the same centering constant h = mu*(f).
    const Kernel kernel_r = kernel_power(kernel, r);
    const PoissonSolution inner = poisson_series(kernel_r, f, V, mu_star,
                                                 rcert.cc_r, rcert.drift_r,
                                                 tol);

    PoissonSolution sol;
    sol.h = inner.h;
    sol.truncation_n = inner.truncation_n;

    // u = (I + P* + ... + P^{*(r-1)}) v.
    sol.u.values.assign(n, 0.0);
    Observable stage = inner.u;
    for (unsigned k = 0; k < r; ++k)
    {
        for (std::size_t x = 0; x < n; ++x)
        {
            sol.u.values[x] += stage.values[x];
        }
        if (k + 1 < r) stage = apply_function(kernel, stage);
    }

    // mu*(P^{*k} v) = mu*(v) = 0 exactly; remove the rounding residue.
    sol.centering_shift = integrate(mu_star, sol.u);
    for (std::size_t x = 0; x < n; ++x)
    {
        sol.u.values[x] -= sol.centering_shift;
    }
    require(std::abs(integrate(mu_star, sol.u)) <= kResidualTol,
            ErrorCode::ViolatedBound, "solution centering failed");

    // (I - P*)(I + P* + ... + P^{*(r-1)}) v = (I - P^{*r}) v = f - h, so u
    // solves the one-step equation; verify numerically.
    sol.residual_norm = sup_norm_beta(residual_of(kernel, sol.u, f, sol.h),
                                      V, wp);
    if (sol.residual_norm > kResidualTol)
    {
        std::ostringstream os;
        os << "composed r-step solution residual " << sol.residual_norm
           << " exceeds " << kResidualTol;
        throw Error(ErrorCode::ViolatedBound, os.str());
    }

    // Cross-check against the direct linear-solve oracle.
    const PoissonSolution direct = poisson_direct(kernel, f, mu_star);
    Observable diff;
    diff.values.resize(n);
    for (std::size_t x = 0; x < n; ++x)
    {
        diff.values[x] = sol.u.values[x] - direct.u.values[x];
    }
    const double oracle_gap = sup_norm_beta(diff, V, wp);
    if (oracle_gap > 1e-6)
    {
        std::ostringstream os;
        os << "r-step solution disagrees with the direct oracle by "
           << oracle_gap;
        throw Error(ErrorCode::ViolatedBound, os.str());
    }

    // Affine bound assembled from the stage bounds: each |P^{*k} v| obeys
    // the one-step bound of the r-fold chain pushed through k growth steps,
    //   P^{*k} V <= gamma_1^k V + K_1 sum_{l<k} gamma_1^l,
    // giving, summed over k < r,
    //   |u(x)| <= osc_f (2r + beta S1 V(x) + beta K_1 S2
    //                    + beta r K_r/(1-gamma_r)) / (1-alpha_r)
    // with S1 = sum_{k<r} gamma_1^k, S2 = sum_{k<r} sum_{l<k} gamma_1^l.
    const double osc_f = osc_seminorm(f, V, wp);
    double S1 = 0.0, S2 = 0.0, power = 1.0;
    for (unsigned k = 0; k < r; ++k)
    {
        S2 += S1;  // sum_{l<k} gamma_1^l accumulated so far
        S1 += power;
        power *= rcert.gamma_1;
    }
    const double gamma_r = rcert.drift_r.gamma;
    const double K_r = rcert.drift_r.K;
    const double alpha_r = rcert.cc_r.alpha;
    const double A = (2.0 * r + beta * rcert.K_1 * S2 +
                      beta * r * K_r / (1.0 - gamma_r)) /
                     (1.0 - alpha_r);
    const double B = S1 / (1.0 - alpha_r);
    attach_affine_bound(sol, V, beta, osc_f, A, B, k_u_r_constant(rcert));
    return sol;
}

double k_u_r_constant(const RStepCertificate& rcert)
{
    const unsigned r = rcert.r;
    const double beta = rcert.cc_r.beta;
    double S1 = 0.0, S2 = 0.0, power = 1.0;
    for (unsigned k = 0; k < r; ++k)
    {
        S2 += S1;
        S1 += power;
        power *= rcert.gamma_1;
    }
    const double A = (2.0 * r + beta * rcert.K_1 * S2 +
                      beta * r * rcert.drift_r.K /
                          (1.0 - rcert.drift_r.gamma)) /
                     (1.0 - rcert.cc_r.alpha);
    const double B = S1 / (1.0 - rcert.cc_r.alpha);
    return std::max(A, B);
}

}  // namespace ergocert
