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

#include "ergocert/models.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "ergocert/errors.hpp"

namespace ergocert
{

namespace
{

void require(bool condition, ErrorCode code, const std::string& message)
{
    if (!condition)
    {
        throw Error(code, message);
    }
}

// Relative deviation with an absolute floor so exact-zero references do not
// blow up the ratio.
double relative_deviation(double fitted, double reference)
{
    return std::abs(fitted - reference) / std::max(reference, 1e-6);
}

// Largest |eigenvalue| of a (generally non-symmetric) real matrix.
double spectral_radius(const Eigen::MatrixXd& A)
{
    Eigen::EigenSolver<Eigen::MatrixXd> solver(A, false);
    double radius = 0.0;
    for (Eigen::Index i = 0; i < solver.eigenvalues().size(); ++i)
    {
        radius = std::max(radius, std::abs(solver.eigenvalues()[i]));
    }
    return radius;
}

// Smallest gamma with A^T Q A <= gamma Q in the semidefinite order, located
// by bisection on lambda_min(gamma Q - A^T Q A) (monotone in gamma).
double smallest_semidefinite_gamma(const Eigen::MatrixXd& AtQA,
                                   const Eigen::MatrixXd& Q, double hint)
{
    const auto is_dominating = [&](double gamma)
    {
        const Eigen::MatrixXd gap = gamma * Q - AtQA;
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(
            gap, Eigen::EigenvaluesOnly);
        return solver.eigenvalues().minCoeff() >= -1e-12;
    };

    double lo = 0.0;
    double hi = std::max(1.0, 2.0 * hint);
    for (int expand = 0; expand < 64 && !is_dominating(hi); ++expand)
    {
        hi *= 2.0;
    }
    require(is_dominating(hi), ErrorCode::NonConvergence,
            "semidefinite bisection found no dominating gamma");
    while (hi - lo > 1e-9)
    {
        const double mid = 0.5 * (lo + hi);
        if (is_dominating(mid))
        {
            hi = mid;
        }
        else
        {
            lo = mid;
        }
    }
    return hi;
}

}  // namespace

void LinearSystemSpec::validate() const
{
    require(!theta_grid.empty(), ErrorCode::InvalidArgument,
            "linear system needs a nonempty parameter grid");
    require(A.size() == theta_grid.size() && B.size() == theta_grid.size(),
            ErrorCode::InvalidArgument,
            "linear system needs one A and one B matrix per grid point");

    const Eigen::Index d = Q.rows();
    require(d >= 1 && Q.cols() == d, ErrorCode::InvalidArgument,
            "Q must be a square matrix of positive dimension");
    require((Q - Q.transpose()).cwiseAbs().maxCoeff() <= 1e-12,
            ErrorCode::InvalidArgument, "Q must be symmetric");
    {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(
            Q, Eigen::EigenvaluesOnly);
        require(solver.eigenvalues().minCoeff() > 0.0,
                ErrorCode::InvalidArgument, "Q must be positive definite");
    }

    require(!B.empty() && B[0].cols() >= 1, ErrorCode::InvalidArgument,
            "B must have at least one column");
    const Eigen::Index m = B[0].cols();
    for (std::size_t g = 0; g < A.size(); ++g)
    {
        require(A[g].rows() == d && A[g].cols() == d,
                ErrorCode::InvalidArgument,
                "A matrices must be d x d with d matching Q");
        require(B[g].rows() == d && B[g].cols() == m,
                ErrorCode::InvalidArgument,
                "B matrices must be d x m with a common m");
    }

    require(!noise_support.empty() &&
                noise_probs.size() == noise_support.size(),
            ErrorCode::InvalidArgument,
            "noise needs matching nonempty support and probabilities");
    double total = 0.0;
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(m);
    for (std::size_t s = 0; s < noise_support.size(); ++s)
    {
        require(noise_support[s].size() == m, ErrorCode::InvalidArgument,
                "noise support points must live in R^m");
        require(noise_probs[s] >= 0.0, ErrorCode::InvalidArgument,
                "noise probabilities must be nonnegative");
        total += noise_probs[s];
        mean += noise_probs[s] * noise_support[s];
    }
    require(std::abs(total - 1.0) <= 1e-12, ErrorCode::InvalidArgument,
            "noise probabilities must sum to 1");
    require(mean.cwiseAbs().maxCoeff() <= 1e-12, ErrorCode::InvalidArgument,
            "noise must have zero mean");

    require(box_lo.size() == static_cast<std::size_t>(d) &&
                box_hi.size() == static_cast<std::size_t>(d) &&
                points_per_axis.size() == static_cast<std::size_t>(d),
            ErrorCode::InvalidArgument,
            "box bounds and cell counts must have one entry per dimension");
    for (Eigen::Index i = 0; i < d; ++i)
    {
        require(box_lo[i] < box_hi[i], ErrorCode::InvalidArgument,
                "box bounds must satisfy lo < hi on every axis");
        require(points_per_axis[i] >= 1, ErrorCode::InvalidArgument,
                "every axis needs at least one cell");
    }
    require(self_test_tolerance > 0.0, ErrorCode::InvalidArgument,
            "self_test_tolerance must be positive");
}

LinearFamilyResult build_linear_family(const LinearSystemSpec& spec)
{
    spec.validate();

    const Eigen::Index d = spec.Q.rows();
    const std::size_t grid_size = spec.theta_grid.size();

    // Cell geometry: axis i splits [lo, hi] into points_per_axis[i] equal
    // cells; states enumerate cells row-major with axis 0 slowest.
    std::size_t n = 1;
    std::vector<double> width(d);
    for (Eigen::Index i = 0; i < d; ++i)
    {
        n *= spec.points_per_axis[i];
        width[i] = (spec.box_hi[i] - spec.box_lo[i]) /
                   static_cast<double>(spec.points_per_axis[i]);
    }

    LinearFamilyResult result;
    result.centers.resize(n);
    for (std::size_t x = 0; x < n; ++x)
    {
        Eigen::VectorXd center(d);
        std::size_t rest = x;
        for (Eigen::Index i = d - 1; i >= 0; --i)
        {
            const std::size_t k = rest % spec.points_per_axis[i];
            rest /= spec.points_per_axis[i];
            center[i] = spec.box_lo[i] +
                        (static_cast<double>(k) + 0.5) * width[i];
        }
        result.centers[x] = center;
    }

    const auto snap = [&](const Eigen::VectorXd& y)
    {
        std::size_t index = 0;
        for (Eigen::Index i = 0; i < d; ++i)
        {
            double cell = std::floor((y[i] - spec.box_lo[i]) / width[i]);
            cell = std::max(
                0.0, std::min(cell,
                              static_cast<double>(spec.points_per_axis[i]) -
                                  1.0));
            index = index * spec.points_per_axis[i] +
                    static_cast<std::size_t>(cell);
        }
        return index;
    };

    // Exact row stochasticity regardless of rounding in the supplied
    // probabilities: normalize once and reuse.
    std::vector<double> probs = spec.noise_probs;
    {
        double total = 0.0;
        for (double p : probs) total += p;
        for (double& p : probs) p /= total;
    }

    // Noise covariance S = sum_s p_s u_s u_s^T (the mean is zero).
    const Eigen::Index m = spec.B[0].cols();
    Eigen::MatrixXd S = Eigen::MatrixXd::Zero(m, m);
    for (std::size_t s = 0; s < probs.size(); ++s)
    {
        S += probs[s] * spec.noise_support[s] *
             spec.noise_support[s].transpose();
    }

    result.V.values.resize(n);
    for (std::size_t x = 0; x < n; ++x)
    {
        result.V.values[x] = std::max(
            0.0, result.centers[x].dot(spec.Q * result.centers[x]));
    }

    result.family.space.n = n;
    result.family.theta_grid = spec.theta_grid;
    result.family.kernels.reserve(grid_size);
    result.family.f.reserve(grid_size);

    Observable first_coordinate;
    first_coordinate.values.resize(n);
    for (std::size_t x = 0; x < n; ++x)
    {
        first_coordinate.values[x] = result.centers[x][0];
    }

    LinearSelfTest& self_test = result.self_test;
    self_test.gamma_continuous.resize(grid_size);
    self_test.K_continuous.resize(grid_size);
    self_test.gamma_fitted.resize(grid_size);
    self_test.K_fitted.resize(grid_size);
    self_test.gamma_semidefinite.resize(grid_size);

    for (std::size_t g = 0; g < grid_size; ++g)
    {
        const Eigen::MatrixXd& A = spec.A[g];
        const Eigen::MatrixXd& B = spec.B[g];

        const double radius = spectral_radius(A);
        if (radius >= 1.0)
        {
            std::ostringstream os;
            os << "A at grid point " << g << " is not stable: spectral "
               << "radius " << radius << " >= 1";
            throw Error(ErrorCode::InvalidArgument, os.str());
        }

        // Continuous drift constants for V(x) = x^T Q x:
        //   E[V(Ax + Bu)] = x^T A^T Q A x + tr(B^T Q B S)
        //                 <= gamma V(x) + K
        // with gamma the largest generalized eigenvalue of (A^T Q A, Q).
        Eigen::MatrixXd AtQA = A.transpose() * spec.Q * A;
        AtQA = 0.5 * (AtQA + AtQA.transpose().eval());
        Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> pencil(
            AtQA, spec.Q, Eigen::EigenvaluesOnly);
        const double gamma_cont = pencil.eigenvalues().maxCoeff();
        if (gamma_cont >= 1.0)
        {
            std::ostringstream os;
            os << "Q is not a contraction witness for A at grid point " << g
               << ": largest generalized eigenvalue " << gamma_cont
               << " >= 1";
            throw Error(ErrorCode::InvalidArgument, os.str());
        }
        const double K_cont = (B.transpose() * spec.Q * B * S).trace();

        self_test.gamma_continuous[g] = gamma_cont;
        self_test.K_continuous[g] = K_cont;
        self_test.gamma_semidefinite[g] =
            smallest_semidefinite_gamma(AtQA, spec.Q, gamma_cont);

        // Discretize: push every cell center through the dynamics over the
        // noise support and assign mass to the containing (clamped) cell.
        // States with any image outside the box see the clamped dynamics
        // rather than A x + B u, so they are excluded from the drift-ratio
        // fit below.
        std::vector<double> rows(n * n, 0.0);
        std::vector<char> clamped(n, 0);
        for (std::size_t x = 0; x < n; ++x)
        {
            const Eigen::VectorXd base = A * result.centers[x];
            for (std::size_t s = 0; s < probs.size(); ++s)
            {
                const Eigen::VectorXd image =
                    base + B * spec.noise_support[s];
                for (Eigen::Index i = 0; i < d; ++i)
                {
                    if (image[i] < spec.box_lo[i] ||
                        image[i] > spec.box_hi[i])
                    {
                        clamped[x] = 1;
                    }
                }
                rows[x * n + snap(image)] += probs[s];
            }
        }
        result.family.kernels.emplace_back(n, std::move(rows));
        result.family.f.push_back(first_coordinate);

        // Recover the drift slope/offset from the discretized kernel.  The
        // worst-case certification fitter is the wrong instrument here: its
        // binding state on a quadratic V is a discretization artifact, not a
        // property of the dynamics.  A least-squares fit of (P*V)(x) against
        // (V(x), 1) over the unclamped states estimates the ratio itself,
        // and its deviation from the continuous constants shrinks as the
        // grid refines.
        const Lyapunov PV =
            apply_function(result.family.kernels.back(), result.V);
        double sum_v = 0.0, sum_pv = 0.0, sum_vv = 0.0, sum_vpv = 0.0;
        std::size_t interior = 0;
        for (std::size_t x = 0; x < n; ++x)
        {
            if (clamped[x]) continue;
            sum_v += result.V[x];
            sum_pv += PV[x];
            sum_vv += result.V[x] * result.V[x];
            sum_vpv += result.V[x] * PV[x];
            ++interior;
        }
        if (interior < 2)
        {
            std::ostringstream os;
            os << "box too small at grid point " << g << ": fewer than two "
               << "states keep every noise image inside it, so the drift "
               << "ratio cannot be fitted";
            throw Error(ErrorCode::InvalidArgument, os.str());
        }
        const double count = static_cast<double>(interior);
        const double mean_v = sum_v / count;
        const double mean_pv = sum_pv / count;
        const double var_v = sum_vv / count - mean_v * mean_v;
        if (var_v <= 1e-12 * std::max(1.0, sum_vv / count))
        {
            std::ostringstream os;
            os << "V is numerically constant on the unclamped states at "
               << "grid point " << g
               << "; the drift slope is unidentifiable";
            throw Error(ErrorCode::InvalidArgument, os.str());
        }
        const double gamma_fit =
            (sum_vpv / count - mean_v * mean_pv) / var_v;
        const double K_fit = mean_pv - gamma_fit * mean_v;
        self_test.gamma_fitted[g] = gamma_fit;
        self_test.K_fitted[g] = K_fit;
        self_test.max_gamma_deviation =
            std::max(self_test.max_gamma_deviation,
                     relative_deviation(gamma_fit, gamma_cont));
        self_test.max_K_deviation =
            std::max(self_test.max_K_deviation,
                     relative_deviation(K_fit, K_cont));
    }

    const double worst = std::max(self_test.max_gamma_deviation,
                                  self_test.max_K_deviation);
    if (worst > spec.self_test_tolerance)
    {
        std::ostringstream os;
        os << "discretization self-test failed: worst relative deviation "
           << worst << " exceeds tolerance " << spec.self_test_tolerance
           << " (grid too coarse for the continuous drift constants)";
        throw Error(ErrorCode::ViolatedBound, os.str());
    }

    result.family.validate();
    return result;
}

TwoStateFamilyResult build_two_state_family(
    const std::vector<double>& theta_grid,
    const std::function<double(double)>& p_at,
    const std::function<double(double)>& q_at,
    const std::function<std::vector<double>(double)>& f_at)
{
    require(!theta_grid.empty(), ErrorCode::InvalidArgument,
            "two-state family needs a nonempty parameter grid");
    require(static_cast<bool>(p_at) && static_cast<bool>(q_at) &&
                static_cast<bool>(f_at),
            ErrorCode::InvalidArgument,
            "two-state family needs p_at, q_at and f_at callables");

    TwoStateFamilyResult result;
    result.family.space.n = 2;
    result.family.theta_grid.reserve(theta_grid.size());
    result.family.kernels.reserve(theta_grid.size());
    result.family.f.reserve(theta_grid.size());
    result.mu_star.reserve(theta_grid.size());

    for (double theta : theta_grid)
    {
        const double p = p_at(theta);
        const double q = q_at(theta);
        if (!(p > 0.0 && p < 1.0 && q > 0.0 && q < 1.0))
        {
            std::ostringstream os;
            os << "two-state rates must lie in (0,1); got p = " << p
               << ", q = " << q << " at theta = " << theta;
            throw Error(ErrorCode::InvalidArgument, os.str());
        }
        const std::vector<double> f_values = f_at(theta);
        require(f_values.size() == 2, ErrorCode::InvalidArgument,
                "two-state observable must have exactly 2 values");

        result.family.theta_grid.push_back({theta});
        result.family.kernels.emplace_back(
            2, std::vector<double>{1.0 - p, p, q, 1.0 - q});
        Observable f;
        f.values = f_values;
        result.family.f.push_back(std::move(f));

        Measure mu;
        mu.weights = {q / (p + q), p / (p + q)};
        result.mu_star.push_back(std::move(mu));
    }

    result.family.validate();
    return result;
}

RandomFamilyResult build_random_minorized_family(
    std::size_t n, const std::vector<double>& theta_grid, std::uint64_t seed,
    double alpha_floor)
{
    require(n >= 1, ErrorCode::InvalidArgument,
            "random family needs at least one state");
    require(!theta_grid.empty(), ErrorCode::InvalidArgument,
            "random family needs a nonempty parameter grid");
    require(alpha_floor > 0.0 && alpha_floor < 1.0,
            ErrorCode::InvalidArgument,
            "alpha_floor must lie in (0,1); got " +
                std::to_string(alpha_floor));

    // Fixed draw order (nu, M0, M1, f0, f1) keeps the family a pure
    // function of (n, grid, seed, alpha_floor).
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    const auto random_row = [&](double floor_mass)
    {
        std::vector<double> row(n);
        double total = 0.0;
        for (double& entry : row)
        {
            entry = unit(rng) + floor_mass;
            total += entry;
        }
        for (double& entry : row) entry /= total;
        return row;
    };

    RandomFamilyResult result;
    result.alpha_floor = alpha_floor;
    result.nu.weights = random_row(0.1);

    std::vector<std::vector<double>> M0(n), M1(n);
    for (std::size_t x = 0; x < n; ++x) M0[x] = random_row(0.05);
    for (std::size_t x = 0; x < n; ++x) M1[x] = random_row(0.05);

    std::vector<double> f0(n), f1(n);
    for (double& v : f0) v = 2.0 * unit(rng) - 1.0;
    for (double& v : f1) v = 2.0 * unit(rng) - 1.0;

    const double t_min = *std::min_element(theta_grid.begin(),
                                           theta_grid.end());
    const double t_max = *std::max_element(theta_grid.begin(),
                                           theta_grid.end());
    const double span = t_max - t_min;

    result.family.space.n = n;
    result.family.theta_grid.reserve(theta_grid.size());
    result.family.kernels.reserve(theta_grid.size());
    result.family.f.reserve(theta_grid.size());
    for (double theta : theta_grid)
    {
        const double lambda = span > 0.0 ? (theta - t_min) / span : 0.0;

        std::vector<double> rows(n * n);
        for (std::size_t x = 0; x < n; ++x)
        {
            for (std::size_t y = 0; y < n; ++y)
            {
                const double blended =
                    (1.0 - lambda) * M0[x][y] + lambda * M1[x][y];
                rows[x * n + y] = alpha_floor * result.nu.weights[y] +
                                  (1.0 - alpha_floor) * blended;
            }
        }
        result.family.theta_grid.push_back({theta});
        result.family.kernels.emplace_back(n, std::move(rows));

        Observable f;
        f.values.resize(n);
        for (std::size_t x = 0; x < n; ++x)
        {
            f.values[x] = (1.0 - lambda) * f0[x] + lambda * f1[x];
        }
        result.family.f.push_back(std::move(f));
    }

    result.family.validate();
    return result;
}

}  // namespace ergocert
