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

#include "ergocert/lipschitz.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <utility>

#include "ergocert/errors.hpp"

namespace ergocert
{

namespace
{

// Slack accepted when re-checking a certified bound on computed quantities.
constexpr double kCheckSlack = 1e-9;

void require(bool condition, ErrorCode code, const std::string& message)
{
    if (!condition)
    {
        throw Error(code, message);
    }
}

// The grid pairs a fit or check runs over: consecutive points by default,
// every unordered pair for audits.
std::vector<std::pair<std::size_t, std::size_t>> grid_pairs(
    std::size_t grid_size, bool all_pairs)
{
    require(grid_size >= 2, ErrorCode::InvalidArgument,
            "Lipschitz fitting needs at least 2 parameter grid points; got " +
                std::to_string(grid_size));
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    if (all_pairs)
    {
        pairs.reserve(grid_size * (grid_size - 1) / 2);
        for (std::size_t i = 0; i + 1 < grid_size; ++i)
        {
            for (std::size_t j = i + 1; j < grid_size; ++j)
            {
                pairs.emplace_back(i, j);
            }
        }
    }
    else
    {
        pairs.reserve(grid_size - 1);
        for (std::size_t i = 0; i + 1 < grid_size; ++i)
        {
            pairs.emplace_back(i, i + 1);
        }
    }
    return pairs;
}

// |theta_i - theta_j| with coincident points rejected: ratios of the form
// difference / distance are meaningless at distance zero.
double pair_distance(const ParametricFamily& family, std::size_t i,
                     std::size_t j)
{
    const double d = theta_distance(family.theta_grid[i], family.theta_grid[j]);
    if (!(d > 0.0))
    {
        std::ostringstream os;
        os << "parameter grid points " << i << " and " << j
           << " coincide; Lipschitz ratios are undefined over a zero "
              "parameter distance";
        throw Error(ErrorCode::DegenerateGrid, os.str());
    }
    return d;
}

// The closed-form one-step family of constants for a certified chain with
// contraction rate alpha, drift pair (gamma, K) and weight parameter beta:
//
//   L_P' = (1 + beta K/(1-gamma)) / (1-alpha)
//   L_h  = (L_f + L_P K_f/(1-alpha)) (1 + beta K/(1-gamma))
//   L_u1 = L_f/(1-alpha) + L_P K_f/(1-alpha)^2
//   L_u2 = L_f/(1-alpha) + 2 L_P K_f/(1-alpha)^2
//   L_u  = L_u2 (2 + beta K/(1-gamma))
//   L_mu* = L_P L_P'
//
// Used twice: for the chain itself and, in the relaxed route, for the r-fold
// chain (whose one-step constants drive the r-step assembly).
struct OneStepForms
{
    double L_P_prime = 0.0;
    double L_h = 0.0;
    double L_u1 = 0.0;
    double L_u2 = 0.0;
    double L_u = 0.0;
    double L_mu_star = 0.0;
};

OneStepForms one_step_forms(double alpha, double gamma, double K, double beta,
                            double L_P, double L_f, double K_f)
{
    require(alpha > 0.0 && alpha < 1.0, ErrorCode::InvalidArgument,
            "one-step constants need a contraction rate alpha in (0,1); got " +
                std::to_string(alpha));
    require(gamma >= 0.0 && gamma < 1.0, ErrorCode::InvalidArgument,
            "one-step constants need a drift slope gamma in [0,1); got " +
                std::to_string(gamma));
    require(beta > 0.0 && K >= 0.0 && L_P >= 0.0 && L_f >= 0.0 && K_f >= 0.0,
            ErrorCode::InvalidArgument,
            "one-step constants need beta > 0 and nonnegative K, L_P, L_f, "
            "K_f");

    const double one_minus_alpha = 1.0 - alpha;
    const double drift_factor = 1.0 + beta * K / (1.0 - gamma);

    OneStepForms forms;
    forms.L_P_prime = drift_factor / one_minus_alpha;
    forms.L_h = (L_f + L_P * K_f / one_minus_alpha) * drift_factor;
    forms.L_u1 = L_f / one_minus_alpha +
                 L_P * K_f / (one_minus_alpha * one_minus_alpha);
    forms.L_u2 = L_f / one_minus_alpha +
                 2.0 * L_P * K_f / (one_minus_alpha * one_minus_alpha);
    forms.L_u = forms.L_u2 * (2.0 + beta * K / (1.0 - gamma));
    forms.L_mu_star = L_P * forms.L_P_prime;
    return forms;
}

}  // namespace

double estimate_kernel_lipschitz(const ParametricFamily& family,
                                 const Lyapunov& V, const WeightParam& beta,
                                 bool all_pairs)
{
    beta.validate();
    const auto pairs = grid_pairs(family.grid_size(), all_pairs);
    const std::size_t n = family.space.n;
    require(V.size() == n, ErrorCode::DimensionMismatch,
            "estimate_kernel_lipschitz: V has " + std::to_string(V.size()) +
                " entries but the state space has " + std::to_string(n));

    double L_P = 0.0;
    for (const auto& [i, j] : pairs)
    {
        const double d = pair_distance(family, i, j);
        const Kernel& P_i = family.kernel_at(i);
        const Kernel& P_j = family.kernel_at(j);
        for (std::size_t x = 0; x < n; ++x)
        {
            // Rows are probability measures, so their difference has zero
            // mass and the dual seminorm is the weighted closed form.
            const double s = sigma_beta(P_i.row(x), P_j.row(x), V, beta);
            const double weight = 1.0 + beta.beta * V.values[x];
            L_P = std::max(L_P, s / (d * weight));
        }
    }
    return L_P;
}

LipschitzHypotheses fit_hypotheses(const ParametricFamily& family,
                                   const Lyapunov& V, const WeightParam& beta,
                                   bool all_pairs)
{
    LipschitzHypotheses hyp;
    hyp.L_P = estimate_kernel_lipschitz(family, V, beta, all_pairs);

    const auto pairs = grid_pairs(family.grid_size(), all_pairs);
    hyp.grid_pairs_checked = static_cast<unsigned>(pairs.size());
    for (const auto& [i, j] : pairs)
    {
        const double d = pair_distance(family, i, j);
        const Observable& f_i = family.f_at(i);
        const Observable& f_j = family.f_at(j);
        Observable diff;
        diff.values.resize(f_i.size());
        for (std::size_t x = 0; x < f_i.size(); ++x)
        {
            diff.values[x] = f_i.values[x] - f_j.values[x];
        }
        hyp.L_f = std::max(hyp.L_f, sup_norm_beta(diff, V, beta) / d);
    }
    for (std::size_t g = 0; g < family.grid_size(); ++g)
    {
        hyp.K_f = std::max(hyp.K_f, osc_seminorm(family.f_at(g), V, beta));
    }
    return hyp;
}

MeasureExtensionReport extend_to_measures_check(const ParametricFamily& family,
                                                const Lyapunov& V,
                                                const WeightParam& beta,
                                                double L_P, unsigned trials,
                                                std::uint64_t seed)
{
    beta.validate();
    require(L_P >= 0.0, ErrorCode::InvalidArgument,
            "extend_to_measures_check needs L_P >= 0");
    // The extension from point masses is guaranteed pair by pair, so check
    // the same consecutive pairs the hypothesis is fitted on.
    const auto pairs = grid_pairs(family.grid_size(), false);
    const std::size_t n = family.space.n;

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_real_distribution<double> symmetric(-1.0, 1.0);

    MeasureExtensionReport report;
    report.trials = trials;
    for (unsigned t = 0; t < trials; ++t)
    {
        // A random probability measure with full support and a random
        // zero-mass signed measure.
        Measure mu;
        mu.weights.resize(n);
        double mass = 0.0;
        for (std::size_t x = 0; x < n; ++x)
        {
            mu.weights[x] = unit(rng) + 1e-12;
            mass += mu.weights[x];
        }
        for (double& w : mu.weights) w /= mass;

        SignedMeasure eta;
        eta.weights.resize(n);
        double mean = 0.0;
        for (std::size_t x = 0; x < n; ++x)
        {
            eta.weights[x] = symmetric(rng);
            mean += eta.weights[x];
        }
        mean /= static_cast<double>(n);
        for (double& w : eta.weights) w -= mean;

        for (const auto& [i, j] : pairs)
        {
            const double d = pair_distance(family, i, j);
            const Kernel& P_i = family.kernel_at(i);
            const Kernel& P_j = family.kernel_at(j);

            // sigma_beta(P mu, P' mu) <= L_P |dtheta| mu(1 + beta V).
            const double s_mu =
                sigma_beta(push_measure(P_i, mu), push_measure(P_j, mu), V,
                           beta);
            const double budget_mu =
                L_P * d * (1.0 + beta.beta * integrate(mu, V));
            if (s_mu > budget_mu + kCheckSlack)
            {
                std::ostringstream os;
                os << "measure-extension bound violated for a probability "
                      "measure: trial "
                   << t << ", grid pair (" << i << "," << j << "), observed "
                   << s_mu << " > budget " << budget_mu;
                throw Error(ErrorCode::ViolatedBound, os.str());
            }
            if (budget_mu > 0.0)
            {
                report.worst_probability_ratio =
                    std::max(report.worst_probability_ratio, s_mu / budget_mu);
            }

            // sigma_beta(P eta, P' eta) <= L_P |dtheta| |eta|(1 + beta V).
            const SignedMeasure push_i = push_measure(P_i, eta);
            const SignedMeasure push_j = push_measure(P_j, eta);
            SignedMeasure diff;
            diff.weights.resize(n);
            for (std::size_t x = 0; x < n; ++x)
            {
                diff.weights[x] = push_i.weights[x] - push_j.weights[x];
            }
            const double s_eta = sigma_beta(diff, V, beta);
            const double budget_eta = L_P * d * rho_beta(eta, V, beta);
            if (s_eta > budget_eta + kCheckSlack)
            {
                std::ostringstream os;
                os << "measure-extension bound violated for a zero-mass "
                      "signed measure: trial "
                   << t << ", grid pair (" << i << "," << j << "), observed "
                   << s_eta << " > budget " << budget_eta;
                throw Error(ErrorCode::ViolatedBound, os.str());
            }
            if (budget_eta > 0.0)
            {
                report.worst_signed_ratio =
                    std::max(report.worst_signed_ratio, s_eta / budget_eta);
            }
        }
    }
    return report;
}

double NStepBounds::general(unsigned n, double muV) const
{
    return L_P *
           (L_P_prime +
            std::pow(alpha, static_cast<double>(n)) * beta * muV /
                (alpha - gamma));
}

double NStepBounds::zero_mass(unsigned n) const
{
    if (n == 0)
    {
        return 0.0;
    }
    return L_P * static_cast<double>(n) *
           std::pow(alpha, static_cast<double>(n - 1));
}

NStepBounds nstep_bounds(const ContractionConstants& cc,
                         const DriftCertificate& drift, double L_P)
{
    require(cc.alpha > drift.gamma, ErrorCode::InvalidArgument,
            "n-step bounds need alpha > gamma; got alpha = " +
                std::to_string(cc.alpha) + ", gamma = " +
                std::to_string(drift.gamma));
    require(L_P >= 0.0, ErrorCode::InvalidArgument,
            "n-step bounds need L_P >= 0");
    NStepBounds bounds;
    bounds.L_P = L_P;
    bounds.L_P_prime =
        (1.0 + cc.beta * drift.K / (1.0 - drift.gamma)) / (1.0 - cc.alpha);
    bounds.alpha = cc.alpha;
    bounds.gamma = drift.gamma;
    bounds.beta = cc.beta;
    return bounds;
}

LipschitzBounds theoretical_constants(const ContractionConstants& cc,
                                      const DriftCertificate& drift,
                                      const LipschitzHypotheses& hyp)
{
    const OneStepForms forms = one_step_forms(
        cc.alpha, drift.gamma, drift.K, cc.beta, hyp.L_P, hyp.L_f, hyp.K_f);

    LipschitzBounds bounds;
    bounds.L_P_prime = forms.L_P_prime;
    bounds.L_h = forms.L_h;
    bounds.L_u1 = forms.L_u1;
    bounds.L_u2 = forms.L_u2;
    bounds.L_u = forms.L_u;
    bounds.L_mu_star = forms.L_mu_star;

    const double nan = std::numeric_limits<double>::quiet_NaN();
    bounds.alpha_doubleprime = nan;
    bounds.L_P_doubleprime = nan;
    bounds.L_P_r = nan;
    bounds.L_rh = nan;
    bounds.L_ru = nan;
    return bounds;
}

EmpiricalCertifyReport empirical_certify(
    const ParametricFamily& family, const Lyapunov& V, const WeightParam& beta,
    const LipschitzBounds& bounds, const std::vector<PoissonSolution>& solutions,
    const std::vector<Measure>& mu_stars, double L_h_override,
    double L_u_override)
{
    beta.validate();
    require(solutions.size() == family.grid_size(),
            ErrorCode::DimensionMismatch,
            "empirical_certify needs one Poisson solution per grid point; "
            "got " +
                std::to_string(solutions.size()) + " for a grid of " +
                std::to_string(family.grid_size()));
    require(mu_stars.empty() || mu_stars.size() == family.grid_size(),
            ErrorCode::DimensionMismatch,
            "empirical_certify needs either no invariant measures or one per "
            "grid point");

    const double L_h = L_h_override > 0.0 ? L_h_override : bounds.L_h;
    const double L_u = L_u_override > 0.0 ? L_u_override : bounds.L_u;
    const std::size_t n = family.space.n;

    // Every unordered pair: the certified conclusions hold for arbitrary
    // theta, theta', not only neighbours.
    const auto pairs = grid_pairs(family.grid_size(), true);

    EmpiricalCertifyReport report;
    report.pairs_checked = static_cast<unsigned>(pairs.size());
    for (const auto& [i, j] : pairs)
    {
        const double d = pair_distance(family, i, j);

        const double dh = std::abs(solutions[i].h - solutions[j].h);
        report.max_h_slope = std::max(report.max_h_slope, dh / d);
        const double budget_h = L_h * d;
        if (dh > budget_h + kCheckSlack)
        {
            std::ostringstream os;
            os << "certified bound |h - h'| <= L_h |dtheta| violated on grid "
                  "pair ("
               << i << "," << j << "): observed " << dh << " > budget "
               << budget_h;
            throw Error(ErrorCode::ViolatedBound, os.str());
        }
        if (budget_h > 0.0)
        {
            report.tightness_h = std::max(report.tightness_h, dh / budget_h);
        }

        Observable u_diff;
        u_diff.values.resize(n);
        for (std::size_t x = 0; x < n; ++x)
        {
            u_diff.values[x] =
                solutions[i].u.values[x] - solutions[j].u.values[x];
            const double du = std::abs(u_diff.values[x]);
            const double budget_u =
                L_u * (1.0 + beta.beta * V.values[x]) * d;
            if (du > budget_u + kCheckSlack)
            {
                std::ostringstream os;
                os << "certified bound |u(x) - u'(x)| <= L_u (1 + beta V(x)) "
                      "|dtheta| violated on grid pair ("
                   << i << "," << j << ") at state " << x << ": observed "
                   << du << " > budget " << budget_u;
                throw Error(ErrorCode::ViolatedBound, os.str());
            }
            if (budget_u > 0.0)
            {
                report.tightness_u =
                    std::max(report.tightness_u, du / budget_u);
            }
        }
        // The weighted-norm consequence of the pointwise bound.
        const double norm_diff = sup_norm_beta(u_diff, V, beta);
        if (norm_diff > L_u * d + kCheckSlack)
        {
            std::ostringstream os;
            os << "certified bound |u - u'|_beta <= L_u |dtheta| violated on "
                  "grid pair ("
               << i << "," << j << "): observed " << norm_diff << " > budget "
               << L_u * d;
            throw Error(ErrorCode::ViolatedBound, os.str());
        }

        if (!mu_stars.empty())
        {
            const double s = sigma_beta(mu_stars[i], mu_stars[j], V, beta);
            const double budget_mu = bounds.L_mu_star * d;
            if (s > budget_mu + kCheckSlack)
            {
                std::ostringstream os;
                os << "certified bound sigma_beta(mu*, mu*') <= L_P L_P' "
                      "|dtheta| violated on grid pair ("
                   << i << "," << j << "): observed " << s << " > budget "
                   << budget_mu;
                throw Error(ErrorCode::ViolatedBound, os.str());
            }
            if (budget_mu > 0.0)
            {
                report.tightness_mu =
                    std::max(report.tightness_mu, s / budget_mu);
            }
        }
    }
    return report;
}

LipschitzBounds relaxed_constants(const ParametricFamily& family,
                                  const Lyapunov& V,
                                  const RStepCertificate& rcert,
                                  const LipschitzHypotheses& hyp,
                                  double alpha_dd)
{
    require(rcert.r >= 1, ErrorCode::InvalidArgument,
            "relaxed_constants needs r >= 1");
    const double beta = rcert.cc_r.beta;
    const double alpha_r = rcert.cc_r.alpha;
    const double gamma_r = rcert.drift_r.gamma;
    const double K_r = rcert.drift_r.K;
    const double gamma_1 = rcert.gamma_1;
    const double K_1 = rcert.K_1;
    require(K_1 >= 0.0, ErrorCode::InvalidArgument,
            "relaxed_constants needs a growth offset K_1 >= 0");

    // The r-fold-kernel Lipschitz geometric sums need a growth slope
    // strictly above 1; raising the slope preserves the growth inequality
    // because V >= 0, so certificates built with gamma_1 <= 1 are lifted to
    // the floor.
    const double gamma_tilde = std::max(gamma_1, 1.05);
    const double floor_dd =
        std::max({rcert.alpha_prime, gamma_tilde, 1.0});
    if (alpha_dd <= 0.0)
    {
        alpha_dd = 1.05 * floor_dd;
    }
    require(alpha_dd > floor_dd, ErrorCode::InvalidArgument,
            "alpha_dd must exceed max(alpha', gamma_1, 1) = " +
                std::to_string(floor_dd) + "; got " +
                std::to_string(alpha_dd));

    // L_P'' collects the limit values of the three geometric sums bounding
    // the telescoped n-step difference: one for the constant part of the
    // weight, one for the gamma_1^k V part, one for the accumulated growth
    // offsets K_1 (gamma_1^k - 1)/(gamma_1 - 1) <= gamma_1^k K_1/(gamma_1-1).
    const double L_P_dd =
        hyp.L_P *
        std::max(1.0 / (alpha_dd - 1.0) +
                     beta * K_1 /
                         ((gamma_tilde - 1.0) * (alpha_dd - gamma_tilde)),
                 1.0 / (alpha_dd - gamma_tilde));

    // Kernel constant of the r-fold family.  At r = 1 that family is the
    // original one, so the fitted hypothesis is reused verbatim.
    double L_P_r = hyp.L_P;
    if (rcert.r > 1)
    {
        ParametricFamily powered;
        powered.space = family.space;
        powered.theta_grid = family.theta_grid;
        powered.f = family.f;
        powered.kernels.reserve(family.grid_size());
        for (std::size_t g = 0; g < family.grid_size(); ++g)
        {
            powered.kernels.push_back(
                kernel_power(family.kernel_at(g), rcert.r));
        }
        L_P_r = estimate_kernel_lipschitz(powered, V, WeightParam{beta});
    }

    // One-step constants of the r-fold chain (contraction alpha_r, drift
    // (gamma_r, K_r), kernel constant L_{P^r}); they bound the solution v of
    // the r-fold equation, from which the full solution u is assembled.
    const OneStepForms forms = one_step_forms(alpha_r, gamma_r, K_r, beta,
                                              L_P_r, hyp.L_f, hyp.K_f);
    const double K_u_r = k_u_constant(rcert.cc_r, rcert.drift_r);

    // u = sum_{m<r} P^{*m} v.  Each summand contributes
    //   L_u^(r) (1 + beta(gamma_1^m V + K_1 sum_{l<m} gamma_1^l))
    // for moving the parameter inside v, plus
    //   L_P'' (alpha'')^m K_u^(r) K_f (1 + beta V)
    // for moving it inside P^{*m} (exactly 0 at m = 0, where P^0 is the
    // identity for both parameters).  Collecting the affine-in-(beta V)
    // coefficients gives L_ru = max(A, B) with
    //   A = constant coefficients, B = beta V coefficients,
    // so that |u(x) - u'(x)| <= L_ru (1 + beta V(x)) |dtheta|.
    double A = 0.0;
    double B = 0.0;
    double gamma_pow = 1.0;     // gamma_1^m
    double growth_sum = 0.0;    // sum_{l<m} gamma_1^l
    double alpha_dd_pow = alpha_dd;  // (alpha'')^m for m >= 1
    for (unsigned m = 0; m < rcert.r; ++m)
    {
        A += forms.L_u * (1.0 + beta * K_1 * growth_sum);
        B += forms.L_u * gamma_pow;
        if (m >= 1)
        {
            const double kernel_term = L_P_dd * alpha_dd_pow * K_u_r * hyp.K_f;
            A += kernel_term;
            B += kernel_term;
            alpha_dd_pow *= alpha_dd;
        }
        growth_sum += gamma_pow;
        gamma_pow *= gamma_1;
    }

    LipschitzBounds bounds;
    bounds.L_P_prime = forms.L_P_prime;
    bounds.L_h = forms.L_h;
    bounds.L_u1 = forms.L_u1;
    bounds.L_u2 = forms.L_u2;
    bounds.L_u = forms.L_u;
    // mu* is also the invariant measure of the r-fold kernel, so the r-fold
    // invariant bound applies to it directly.
    bounds.L_mu_star = forms.L_mu_star;
    bounds.alpha_doubleprime = alpha_dd;
    bounds.L_P_doubleprime = L_P_dd;
    bounds.L_P_r = L_P_r;
    // h = mu*(f) is the same functional for the chain and its r-fold kernel,
    // and the one-step form for the r-fold chain is exactly L_rh.
    bounds.L_rh = forms.L_h;
    bounds.L_ru = std::max(A, B);
    return bounds;
}

}  // namespace ergocert
