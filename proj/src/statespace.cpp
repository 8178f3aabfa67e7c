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

#include "ergocert/statespace.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

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

void require_same_size(std::size_t a, std::size_t b, const char* what)
{
    if (a != b)
    {
        std::ostringstream os;
        os << "dimension mismatch in " << what << ": " << a << " vs " << b;
        throw Error(ErrorCode::DimensionMismatch, os.str());
    }
}

bool all_finite(const std::vector<double>& xs)
{
    return std::all_of(xs.begin(), xs.end(),
                       [](double x) { return std::isfinite(x); });
}

}  // namespace

void StateSpace::validate() const
{
    require(n >= 1, ErrorCode::InvalidArgument,
            "state space must have at least one state");
    if (!labels.empty())
    {
        require(labels.size() == n, ErrorCode::InvalidArgument,
                "label count must equal the state count");
        std::set<std::string> unique(labels.begin(), labels.end());
        require(unique.size() == n, ErrorCode::InvalidArgument,
                "state labels must be unique");
    }
}

double Measure::total_mass() const
{
    return std::accumulate(weights.begin(), weights.end(), 0.0);
}

void Measure::validate_nonnegative() const
{
    require(all_finite(weights), ErrorCode::InvalidArgument,
            "measure weights must be finite");
    for (std::size_t i = 0; i < weights.size(); ++i)
    {
        if (weights[i] < 0.0)
        {
            std::ostringstream os;
            os << "measure weight at state " << i << " is negative ("
               << weights[i] << ")";
            throw Error(ErrorCode::InvalidArgument, os.str());
        }
    }
}

void Measure::validate_probability() const
{
    validate_nonnegative();
    const double mass = total_mass();
    if (std::abs(mass - 1.0) > tol::kMass)
    {
        std::ostringstream os;
        os << "probability measure has total mass " << mass
           << " (must be 1 within " << tol::kMass << ")";
        throw Error(ErrorCode::InvalidArgument, os.str());
    }
}

double SignedMeasure::total_mass() const
{
    return std::accumulate(weights.begin(), weights.end(), 0.0);
}

Measure SignedMeasure::total_variation() const
{
    Measure tv;
    tv.weights.reserve(weights.size());
    for (double w : weights)
    {
        tv.weights.push_back(std::abs(w));
    }
    return tv;
}

void Observable::validate_finite() const
{
    require(all_finite(values), ErrorCode::InvalidArgument,
            "observable values must be finite");
}

double Lyapunov::max_value() const
{
    return values.empty() ? 0.0
                          : *std::max_element(values.begin(), values.end());
}

void Lyapunov::validate_nonnegative() const
{
    require(all_finite(values), ErrorCode::InvalidArgument,
            "Lyapunov values must be finite");
    for (std::size_t i = 0; i < values.size(); ++i)
    {
        if (values[i] < 0.0)
        {
            std::ostringstream os;
            os << "Lyapunov value at state " << i << " is negative ("
               << values[i] << ")";
            throw Error(ErrorCode::InvalidArgument, os.str());
        }
    }
}

Kernel::Kernel(std::size_t n, std::vector<double> rows)
    : n_(n), rows_(std::move(rows))
{
    require(n_ >= 1, ErrorCode::InvalidArgument,
            "kernel needs at least one state");
    require_same_size(rows_.size(), n_ * n_, "kernel rows");
    require(all_finite(rows_), ErrorCode::InvalidArgument,
            "kernel entries must be finite");
    for (std::size_t i = 0; i < n_; ++i)
    {
        double sum = 0.0;
        for (std::size_t j = 0; j < n_; ++j)
        {
            const double p = rows_[i * n_ + j];
            if (p < 0.0)
            {
                std::ostringstream os;
                os << "kernel entry (" << i << "," << j << ") is negative ("
                   << p << ")";
                throw Error(ErrorCode::InvalidArgument, os.str());
            }
            sum += p;
        }
        if (std::abs(sum - 1.0) > tol::kRowSum)
        {
            std::ostringstream os;
            os << "kernel row " << i << " sums to " << sum
               << " (must be 1 within " << tol::kRowSum << ")";
            throw Error(ErrorCode::InvalidArgument, os.str());
        }
    }
}

Measure Kernel::row(std::size_t i) const
{
    Measure mu;
    mu.weights.assign(rows_.begin() + static_cast<std::ptrdiff_t>(i * n_),
                      rows_.begin() + static_cast<std::ptrdiff_t>((i + 1) * n_));
    return mu;
}

void ParametricFamily::validate() const
{
    space.validate();
    require(!theta_grid.empty(), ErrorCode::InvalidArgument,
            "parameter grid must be nonempty");
    require_same_size(kernels.size(), theta_grid.size(), "kernels per grid point");
    require_same_size(f.size(), theta_grid.size(), "observables per grid point");
    const std::size_t dim = theta_grid.front().size();
    require(dim >= 1, ErrorCode::InvalidArgument,
            "parameter points must have at least one coordinate");
    for (const auto& theta : theta_grid)
    {
        require_same_size(theta.size(), dim, "parameter point dimension");
        require(all_finite(theta), ErrorCode::InvalidArgument,
                "parameter coordinates must be finite");
    }
    for (std::size_t g = 0; g < kernels.size(); ++g)
    {
        require_same_size(kernels[g].size(), space.n, "kernel state count");
        require_same_size(f[g].size(), space.n, "observable state count");
        f[g].validate_finite();
    }
}

double theta_distance(const std::vector<double>& a,
                      const std::vector<double>& b)
{
    require_same_size(a.size(), b.size(), "parameter points");
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
    {
        const double d = a[i] - b[i];
        sum += d * d;
    }
    return std::sqrt(sum);
}

Measure push_measure(const Kernel& kernel, const Measure& mu)
{
    require_same_size(kernel.size(), mu.size(), "push_measure");
    const std::size_t n = kernel.size();
    Measure out;
    out.weights.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
    {
        const double w = mu.weights[i];
        if (w == 0.0) continue;
        for (std::size_t j = 0; j < n; ++j)
        {
            out.weights[j] += w * kernel(i, j);
        }
    }
    return out;
}

SignedMeasure push_measure(const Kernel& kernel, const SignedMeasure& eta)
{
    require_same_size(kernel.size(), eta.size(), "push_measure");
    const std::size_t n = kernel.size();
    SignedMeasure out;
    out.weights.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
    {
        const double w = eta.weights[i];
        if (w == 0.0) continue;
        for (std::size_t j = 0; j < n; ++j)
        {
            out.weights[j] += w * kernel(i, j);
        }
    }
    return out;
}

Observable apply_function(const Kernel& kernel, const Observable& phi)
{
    require_same_size(kernel.size(), phi.size(), "apply_function");
    const std::size_t n = kernel.size();
    Observable out;
    out.values.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
    {
        double acc = 0.0;
        for (std::size_t j = 0; j < n; ++j)
        {
            acc += kernel(i, j) * phi.values[j];
        }
        out.values[i] = acc;
    }
    return out;
}

Lyapunov apply_function(const Kernel& kernel, const Lyapunov& v)
{
    Observable phi{v.values};
    Observable image = apply_function(kernel, phi);
    Lyapunov out;
    out.values.resize(image.size());
    for (std::size_t i = 0; i < image.size(); ++i)
    {
        // A convex combination of nonnegative values is nonnegative; clamp
        // only the rounding noise.
        out.values[i] = std::max(0.0, image.values[i]);
    }
    return out;
}

Kernel kernel_power(const Kernel& kernel, unsigned m)
{
    const std::size_t n = kernel.size();
    // Start from the identity (m = 0).
    std::vector<double> acc(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) acc[i * n + i] = 1.0;

    std::vector<double> base = kernel.data();
    std::vector<double> tmp(n * n);
    // Binary exponentiation; products of row-stochastic matrices stay
    // row-stochastic up to rounding, renormalized at the end.
    auto multiply = [n, &tmp](std::vector<double>& lhs,
                              const std::vector<double>& rhs)
    {
        std::fill(tmp.begin(), tmp.end(), 0.0);
        for (std::size_t i = 0; i < n; ++i)
        {
            for (std::size_t k = 0; k < n; ++k)
            {
                const double l = lhs[i * n + k];
                if (l == 0.0) continue;
                const double* rrow = rhs.data() + k * n;
                double* trow = tmp.data() + i * n;
                for (std::size_t j = 0; j < n; ++j)
                {
                    trow[j] += l * rrow[j];
                }
            }
        }
        lhs.swap(tmp);
    };

    unsigned e = m;
    while (e > 0)
    {
        if (e & 1u) multiply(acc, base);
        e >>= 1u;
        if (e > 0)
        {
            std::vector<double> base_copy = base;
            multiply(base, base_copy);
        }
    }
    // Remove accumulated rounding from the row sums so the constructor's
    // 1e-10 validation cannot trip on long products.
    for (std::size_t i = 0; i < n; ++i)
    {
        double sum = 0.0;
        for (std::size_t j = 0; j < n; ++j) sum += acc[i * n + j];
        if (sum > 0.0)
        {
            for (std::size_t j = 0; j < n; ++j) acc[i * n + j] /= sum;
        }
    }
    return Kernel(n, std::move(acc));
}

Measure dirac(std::size_t n, std::size_t x)
{
    require(x < n, ErrorCode::InvalidArgument, "dirac state out of range");
    Measure mu;
    mu.weights.assign(n, 0.0);
    mu.weights[x] = 1.0;
    return mu;
}

double integrate(const Measure& mu, const Observable& phi)
{
    require_same_size(mu.size(), phi.size(), "integrate");
    double acc = 0.0;
    for (std::size_t i = 0; i < mu.size(); ++i)
    {
        acc += mu.weights[i] * phi.values[i];
    }
    return acc;
}

double integrate(const Measure& mu, const Lyapunov& v)
{
    Observable phi{v.values};
    return integrate(mu, phi);
}

double integrate(const SignedMeasure& eta, const Observable& phi)
{
    require_same_size(eta.size(), phi.size(), "integrate");
    double acc = 0.0;
    for (std::size_t i = 0; i < eta.size(); ++i)
    {
        acc += eta.weights[i] * phi.values[i];
    }
    return acc;
}

}  // namespace ergocert
