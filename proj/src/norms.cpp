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

#include "ergocert/norms.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

#include "ergocert/errors.hpp"

namespace ergocert
{

namespace
{

// Mass tolerance below which a signed measure counts as zero-mass; looser
// than tol::kMass to absorb rounding accumulated by repeated pushforwards.
constexpr double kZeroMassSlack = 1e-10;

void require(bool condition, ErrorCode code, const std::string& message)
{
    if (!condition)
    {
        throw Error(code, message);
    }
}

void require_same_size(std::size_t a, std::size_t b, const char* what)
{
    if (a != b)
    {
        std::ostringstream os;
        os << "dimension mismatch in " << what << ": " << a << " vs " << b;
        throw Error(ErrorCode::DimensionMismatch, os.str());
    }
}

double weight_at(const Lyapunov& v, double beta, std::size_t i)
{
    return 1.0 + beta * v.values[i];
}

}  // namespace

void WeightParam::validate() const
{
    require(std::isfinite(beta) && beta > 0.0, ErrorCode::InvalidArgument,
            "weight parameter beta must be positive and finite");
}

double sup_norm_beta(const Observable& phi, const Lyapunov& V,
                     const WeightParam& beta)
{
    require_same_size(phi.size(), V.size(), "sup_norm_beta");
    beta.validate();
    double best = 0.0;
    for (std::size_t i = 0; i < phi.size(); ++i)
    {
        best = std::max(best,
                        std::abs(phi.values[i]) / weight_at(V, beta.beta, i));
    }
    return best;
}

double d_beta(std::size_t x, std::size_t y, const Lyapunov& V,
              const WeightParam& beta)
{
    require(x < V.size() && y < V.size(), ErrorCode::InvalidArgument,
            "d_beta state out of range");
    beta.validate();
    if (x == y) return 0.0;
    // d(x, y) = w(x) + w(y) with w = 1 + beta V.
    return weight_at(V, beta.beta, x) + weight_at(V, beta.beta, y);
}

double osc_seminorm(const Observable& phi, const Lyapunov& V,
                    const WeightParam& beta)
{
    return osc_seminorm_witness(phi, V, beta).value;
}

OscWitness osc_seminorm_witness(const Observable& phi, const Lyapunov& V,
                                const WeightParam& beta)
{
    require_same_size(phi.size(), V.size(), "osc_seminorm");
    beta.validate();
    OscWitness best{0.0, 0, 0};
    if (phi.size() < 2)
    {
        return best;  // a single state admits no distinct pair
    }
    best.x = 0;
    best.y = 1;
    for (std::size_t x = 0; x + 1 < phi.size(); ++x)
    {
        const double wx = weight_at(V, beta.beta, x);
        for (std::size_t y = x + 1; y < phi.size(); ++y)
        {
            const double ratio = std::abs(phi.values[x] - phi.values[y]) /
                                 (wx + weight_at(V, beta.beta, y));
            // Strict improvement keeps the first pair on ties (lexicographic
            // order over (x, y)).
            if (ratio > best.value)
            {
                best.value = ratio;
                best.x = x;
                best.y = y;
            }
        }
    }
    return best;
}

MinShiftResult osc_via_min_shift(const Observable& phi, const Lyapunov& V,
                                 const WeightParam& beta)
{
    require_same_size(phi.size(), V.size(), "osc_via_min_shift");
    beta.validate();
    MinShiftResult out{0.0, 0.0};
    if (phi.size() == 1)
    {
        // min_c max |phi + c| / w is achieved at c = -phi(0) with value 0.
        out.c_star = -phi.values[0];
        return out;
    }
    // The minimum over shifts equals the oscillation seminorm; the optimal
    // shift balances the two witness states so that (phi + c)/w is equal in
    // magnitude and opposite in sign there (d(x,y) = w(x) + w(y) makes the
    // balanced common magnitude exactly |phi(x)-phi(y)| / d(x,y)).
    const OscWitness w = osc_seminorm_witness(phi, V, beta);
    const double wx = weight_at(V, beta.beta, w.x);
    const double wy = weight_at(V, beta.beta, w.y);
    out.value = w.value;
    out.c_star = -(phi.values[w.x] * wy + phi.values[w.y] * wx) / (wx + wy);
    return out;
}

double rho_beta(const SignedMeasure& eta, const Lyapunov& V,
                const WeightParam& beta)
{
    require_same_size(eta.size(), V.size(), "rho_beta");
    beta.validate();
    double acc = 0.0;
    for (std::size_t i = 0; i < eta.size(); ++i)
    {
        acc += weight_at(V, beta.beta, i) * std::abs(eta.weights[i]);
    }
    return acc;
}

double sigma_beta(const SignedMeasure& eta, const Lyapunov& V,
                  const WeightParam& beta)
{
    require_same_size(eta.size(), V.size(), "sigma_beta");
    const double mass = eta.total_mass();
    if (std::abs(mass) > kZeroMassSlack)
    {
        std::ostringstream os;
        os << "sigma_beta requires a zero-mass difference; got total mass "
           << mass;
        throw Error(ErrorCode::InvalidArgument, os.str());
    }
    // On zero-mass differences the dual seminorm collapses to the weighted
    // total-variation closed form sum w |eta|.
    return rho_beta(eta, V, beta);
}

double sigma_beta(const Measure& mu1, const Measure& mu2, const Lyapunov& V,
                  const WeightParam& beta)
{
    require_same_size(mu1.size(), mu2.size(), "sigma_beta");
    SignedMeasure eta;
    eta.weights.resize(mu1.size());
    for (std::size_t i = 0; i < mu1.size(); ++i)
    {
        eta.weights[i] = mu1.weights[i] - mu2.weights[i];
    }
    return sigma_beta(eta, V, beta);
}

// ---------------------------------------------------------------------------
// Linear-programming oracle for the dual characterization
//
//   sigma(eta) = sup { sum_x phi(x) eta(x) :
//                      |phi(x) - phi(y)| <= d(x, y) for all x, y }.
//
// Fixing phi(0) = 0 removes the shift degeneracy (eta has zero mass, so the
// objective is shift-invariant).  The remaining variables are split into
// positive and negative parts and each pair constraint becomes two
// inequalities with slack variables, giving a standard-form problem solved
// by a dense primal simplex with Bland's anti-cycling rule.  The slack basis
// is feasible outright because every right-hand side d(x, y) >= 2 > 0.
// ---------------------------------------------------------------------------
double sigma_beta_dual_oracle(const SignedMeasure& eta, const Lyapunov& V,
                              const WeightParam& beta)
{
    require_same_size(eta.size(), V.size(), "sigma_beta_dual_oracle");
    beta.validate();
    const double mass = eta.total_mass();
    if (std::abs(mass) > kZeroMassSlack)
    {
        std::ostringstream os;
        os << "sigma_beta_dual_oracle requires a zero-mass difference; got "
              "total mass "
           << mass;
        throw Error(ErrorCode::InvalidArgument, os.str());
    }
    const std::size_t n = eta.size();
    if (n == 1)
    {
        return 0.0;  // only the zero difference has zero mass
    }

    // Variables: phi(i) = p_i - q_i for i = 1..n-1 (phi(0) fixed at 0),
    // then one slack per inequality.  Constraints, for each pair x < y:
    //   phi(x) - phi(y) <= d(x, y)   and   phi(y) - phi(x) <= d(x, y).
    const std::size_t free_vars = 2 * (n - 1);
    const std::size_t n_pairs = n * (n - 1) / 2;
    const std::size_t n_rows = 2 * n_pairs;
    const std::size_t n_cols = free_vars + n_rows;  // structural + slack

    // Dense tableau: rows 0..n_rows-1 are constraints with the slack basis,
    // row n_rows is the objective (stored negated so pivoting maximizes).
    std::vector<std::vector<double>> t(n_rows + 1,
                                       std::vector<double>(n_cols + 1, 0.0));
    std::vector<std::size_t> basis(n_rows);

    auto var_plus = [](std::size_t i) { return 2 * (i - 1); };
    auto var_minus = [](std::size_t i) { return 2 * (i - 1) + 1; };

    std::size_t row = 0;
    for (std::size_t x = 0; x + 1 < n; ++x)
    {
        for (std::size_t y = x + 1; y < n; ++y)
        {
            const double d =
                weight_at(V, beta.beta, x) + weight_at(V, beta.beta, y);
            // phi(x) - phi(y) <= d
            if (x > 0)
            {
                t[row][var_plus(x)] = 1.0;
                t[row][var_minus(x)] = -1.0;
            }
            t[row][var_plus(y)] = -1.0;
            t[row][var_minus(y)] = 1.0;
            t[row][free_vars + row] = 1.0;
            t[row][n_cols] = d;
            basis[row] = free_vars + row;
            ++row;
            // phi(y) - phi(x) <= d
            if (x > 0)
            {
                t[row][var_plus(x)] = -1.0;
                t[row][var_minus(x)] = 1.0;
            }
            t[row][var_plus(y)] = 1.0;
            t[row][var_minus(y)] = -1.0;
            t[row][free_vars + row] = 1.0;
            t[row][n_cols] = d;
            basis[row] = free_vars + row;
            ++row;
        }
    }

    // Objective: maximize sum_i eta(i) phi(i); the i = 0 term vanishes since
    // phi(0) = 0.  Stored negated (simplex minimizes the stored row).
    for (std::size_t i = 1; i < n; ++i)
    {
        t[n_rows][var_plus(i)] = -eta.weights[i];
        t[n_rows][var_minus(i)] = eta.weights[i];
    }

    const double eps = 1e-12;
    const std::size_t max_pivots = 200000;
    for (std::size_t pivot = 0; pivot < max_pivots; ++pivot)
    {
        // Bland's rule: entering column = lowest index with a negative
        // reduced cost.
        std::size_t enter = n_cols;
        for (std::size_t c = 0; c < n_cols; ++c)
        {
            if (t[n_rows][c] < -eps)
            {
                enter = c;
                break;
            }
        }
        if (enter == n_cols)
        {
            return t[n_rows][n_cols];  // optimal
        }
        // Ratio test, ties broken by smallest basis variable index (Bland).
        std::size_t leave = n_rows;
        double best_ratio = std::numeric_limits<double>::infinity();
        for (std::size_t r = 0; r < n_rows; ++r)
        {
            if (t[r][enter] > eps)
            {
                const double ratio = t[r][n_cols] / t[r][enter];
                if (ratio < best_ratio - eps ||
                    (ratio < best_ratio + eps &&
                     (leave == n_rows || basis[r] < basis[leave])))
                {
                    best_ratio = std::min(best_ratio, ratio);
                    leave = r;
                }
            }
        }
        require(leave != n_rows, ErrorCode::SingularSystem,
                "dual oracle: objective unbounded (feasible set should be "
                "compact)");
        // Pivot.
        const double pv = t[leave][enter];
        for (std::size_t c = 0; c <= n_cols; ++c) t[leave][c] /= pv;
        for (std::size_t r = 0; r <= n_rows; ++r)
        {
            if (r == leave) continue;
            const double factor = t[r][enter];
            if (factor == 0.0) continue;
            for (std::size_t c = 0; c <= n_cols; ++c)
            {
                t[r][c] -= factor * t[leave][c];
            }
        }
        basis[leave] = enter;
    }
    throw Error(ErrorCode::NonConvergence,
                "dual oracle: simplex exceeded the pivot budget");
}

}  // namespace ergocert
