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

// Core data model for finite state spaces: measures, observables, Lyapunov
// functions, row-stochastic transition kernels, and parameter-indexed
// families of kernels.  All types are immutable after construction by
// convention; every operation is a pure function, so everything here is safe
// to share across threads.

#ifndef ERGOCERT_STATESPACE_HPP
#define ERGOCERT_STATESPACE_HPP

#include <cstddef>
#include <string>
#include <vector>

namespace ergocert
{

// Declared floating-point slack for validating structural invariants.
namespace tol
{
// Row sums of a stochastic matrix must be 1 within this.
inline constexpr double kRowSum = 1e-10;
// Probability measures must have total mass 1 within this.
inline constexpr double kMass = 1e-12;
}  // namespace tol

// A finite state space: n points, optionally labelled.
struct StateSpace
{
    std::size_t n = 0;
    std::vector<std::string> labels;  // empty, or exactly n unique labels

    void validate() const;  // throws Error(InvalidArgument) on violation
};

// Nonnegative weights over states.  A probability measure additionally has
// total mass 1 within tol::kMass; call validate_probability() to assert it.
struct Measure
{
    std::vector<double> weights;

    std::size_t size() const { return weights.size(); }
    double operator[](std::size_t i) const { return weights[i]; }
    double total_mass() const;
    void validate_nonnegative() const;
    void validate_probability() const;
};

// Signed weights over states (differences of measures live here).
struct SignedMeasure
{
    std::vector<double> weights;

    std::size_t size() const { return weights.size(); }
    double operator[](std::size_t i) const { return weights[i]; }
    double total_mass() const;
    // Entrywise absolute values |eta| as a (nonnegative) Measure.
    Measure total_variation() const;
};

// A real-valued function on states.
struct Observable
{
    std::vector<double> values;

    std::size_t size() const { return values.size(); }
    double operator[](std::size_t i) const { return values[i]; }
    void validate_finite() const;
};

// A nonnegative function V on states used in drift inequalities and as the
// weight 1 + beta*V of the norms.
struct Lyapunov
{
    std::vector<double> values;

    std::size_t size() const { return values.size(); }
    double operator[](std::size_t i) const { return values[i]; }
    double max_value() const;
    void validate_nonnegative() const;
};

// Row-stochastic transition matrix; row i is the distribution of the next
// state given the current state i.  Construction validates nonnegativity and
// row sums (within tol::kRowSum).
class Kernel
{
public:
    Kernel() = default;
    // rows are given flattened row-major, n*n entries.
    Kernel(std::size_t n, std::vector<double> rows);

    std::size_t size() const { return n_; }
    double operator()(std::size_t i, std::size_t j) const
    {
        return rows_[i * n_ + j];
    }
    // Row i as a probability measure.
    Measure row(std::size_t i) const;
    const std::vector<double>& data() const { return rows_; }

private:
    std::size_t n_ = 0;
    std::vector<double> rows_;
};

// A family of kernels and observables indexed by points of a finite
// parameter grid in R^k.  All kernels share one state space; Lipschitz
// statements "for all theta, theta'" are checked over grid pairs.
struct ParametricFamily
{
    StateSpace space;
    std::vector<std::vector<double>> theta_grid;  // nonempty, points in R^k
    std::vector<Kernel> kernels;                  // one per grid point
    std::vector<Observable> f;                    // one per grid point

    std::size_t grid_size() const { return theta_grid.size(); }
    const Kernel& kernel_at(std::size_t g) const { return kernels[g]; }
    const Observable& f_at(std::size_t g) const { return f[g]; }
    void validate() const;  // throws on any structural violation
};

// Euclidean distance between two parameter points.
double theta_distance(const std::vector<double>& a,
                      const std::vector<double>& b);

// Pushforward of a measure through the kernel: result(j) = sum_i mu(i)P(i,j).
// Preserves total mass.  Throws Error(DimensionMismatch) on size mismatch.
Measure push_measure(const Kernel& kernel, const Measure& mu);
SignedMeasure push_measure(const Kernel& kernel, const SignedMeasure& eta);

// Conditional expectation of an observable one step ahead:
// result(i) = sum_j P(i,j) phi(j).  Constant functions map to themselves.
Observable apply_function(const Kernel& kernel, const Observable& phi);
// Same action on a Lyapunov function (the image may fail nonnegativity only
// through rounding; entries are clamped at 0).
Lyapunov apply_function(const Kernel& kernel, const Lyapunov& v);

// m-fold kernel composition; m = 0 gives the identity kernel.
Kernel kernel_power(const Kernel& kernel, unsigned m);

// Dirac measure at state x.
Measure dirac(std::size_t n, std::size_t x);

// Integral mu(phi) = sum_x mu(x) phi(x).
double integrate(const Measure& mu, const Observable& phi);
double integrate(const Measure& mu, const Lyapunov& v);
double integrate(const SignedMeasure& eta, const Observable& phi);

// --- model file round-trip -------------------------------------------------
//
// Model files are JSON documents with keys:
//   n            state count (positive integer)
//   labels       optional array of n unique strings
//   theta_grid   array of parameter points, each an array of reals
//   kernels      one n*n row-major matrix (array of n rows) per grid point
//   V            array of n nonnegative reals
//   f            one array of n reals per grid point
//   V_family     optional: one array of n nonnegative reals per grid point
//   sandwich     optional: {"a":..,"b":..,"c":..,"d":..} with a,c > 0
//
// The loader validates every structural invariant and reports the first
// violation with row/entry indices.
struct Model
{
    ParametricFamily family;
    Lyapunov V;
    // Optional per-parameter Lyapunov functions with sandwich constants
    // a*V + b <= V_theta <= c*V + d (used by the individual-drift route).
    std::vector<Lyapunov> V_family;
    bool has_sandwich = false;
    double sandwich_a = 1.0, sandwich_b = 0.0;
    double sandwich_c = 1.0, sandwich_d = 0.0;
};

Model load_model_file(const std::string& path);
Model load_model_json(const std::string& json_text,
                      const std::string& origin = "model JSON");
std::string save_model_json(const Model& model);

}  // namespace ergocert

#endif  // ERGOCERT_STATESPACE_HPP
