// SPDX-License-Identifier: Apache-2.0
//
// mimo-pilot: channel estimation and pilot power allocation for multi-cell massive MIMO
// Copyright (C) 2026 The mimo-pilot authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------


#ifndef MIMO_PILOT_REFSOLVER_HPP
#define MIMO_PILOT_REFSOLVER_HPP

#include "estimators.hpp"
#include "ppa.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

namespace mimo_pilot
{

// Euclidean projection of v onto {x : sum x = P, lo <= x <= hi}. The solution
// is x_k = clip(v_k - theta, lo, hi); the budget residual is piecewise linear
// in theta with kinks at v_k - lo and v_k - hi, so theta is located on the
// sorted kinks and then interpolated.
inline std::vector<double> project_bounded_simplex(std::span<const double> v, double P, double lo, double hi)
{
    const std::size_t K = v.size();
    if (K == 0 || !(lo <= hi))
        throw std::invalid_argument("project_bounded_simplex: empty input or lo > hi");
    const double slack = 1e-12 * std::max({1.0, std::abs(P), std::abs(hi) * K});
    if (K * lo > P + slack || K * hi < P - slack)
        throw std::invalid_argument("project_bounded_simplex: infeasible budget for the bounds");

    const auto total = [&](double theta)
    {
        double s = 0.0;
        for (const double x : v)
            s += std::clamp(x - theta, lo, hi);
        return s;
    };

    std::vector<double> kinks;
    kinks.reserve(2 * K);
    for (const double x : v)
    {
        kinks.push_back(x - hi);
        kinks.push_back(x - lo);
    }
    std::sort(kinks.begin(), kinks.end());

    double theta = kinks.front();
    if (total(kinks.front()) <= P)
        theta = kinks.front();
    else if (total(kinks.back()) >= P)
        theta = kinks.back();
    else
    {
        // Invariant: total(kinks[a]) > P > total(kinks[b]).
        std::size_t a = 0;
        std::size_t b = kinks.size() - 1;
        while (b - a > 1)
        {
            const std::size_t mid = (a + b) / 2;
            const double s = total(kinks[mid]);
            if (s == P)
            {
                a = b = mid;
                break;
            }
            (s > P ? a : b) = mid;
        }
        if (a == b)
            theta = kinks[a];
        else
        {
            const double sa = total(kinks[a]);
            const double sb = total(kinks[b]);
            theta = kinks[a] + (sa - P) / (sa - sb) * (kinks[b] - kinks[a]);
        }
    }

    std::vector<double> x(K);
    for (std::size_t k = 0; k < K; ++k)
        x[k] = std::clamp(v[k] - theta, lo, hi);

    // Remove the rounding residual on coordinates strictly inside the box.
    double residual = P;
    std::size_t free = 0;
    for (std::size_t k = 0; k < K; ++k)
    {
        residual -= x[k];
        if (x[k] > lo && x[k] < hi)
            ++free;
    }
    if (free > 0 && residual != 0.0)
    {
        const double shift = residual / static_cast<double>(free);
        for (auto &xk : x)
            if (xk > lo && xk < hi)
                xk = std::clamp(xk + shift, lo, hi);
    }
    return x;
}

struct ConstrainedProblem
{
    // Writes the gradient into its second argument and returns the value.
    std::function<double(std::span<const double>, std::span<double>)> objective;
    double P = 0.0;
    double lo = 0.0;
    double hi = 0.0;
    std::vector<double> start;
};

struct SolverOptions
{
    double tolerance = 1e-10; // on the projected-gradient step ||P(x - g) - x||_inf
    int max_iterations = 100000;
};

struct SolverResult
{
    std::vector<double> rho;
    double objective = 0.0;
    int iterations = 0;
    bool converged = false;
    double stationarity = 0.0;
    std::vector<double> history; // objective at the start point and every accepted iterate
};

// Spectral projected gradient with Barzilai-Borwein steps and a monotone
// Armijo backtracking line search along the projected direction.
inline SolverResult solve(const ConstrainedProblem &problem, const SolverOptions &opts = {})
{
    const std::size_t K = problem.start.size();
    if (!problem.objective || K == 0)
        throw std::invalid_argument("refsolver: objective and start point are required");

    std::vector<double> x = project_bounded_simplex(problem.start, problem.P, problem.lo, problem.hi);
    std::vector<double> g(K), x_new(K), g_new(K), trial(K), d(K);
    double f = problem.objective(x, g);

    const auto stationarity = [&](std::span<const double> at, std::span<const double> grad)
    {
        for (std::size_t k = 0; k < K; ++k)
            trial[k] = at[k] - grad[k];
        const auto p = project_bounded_simplex(trial, problem.P, problem.lo, problem.hi);
        double m = 0.0;
        for (std::size_t k = 0; k < K; ++k)
            m = std::max(m, std::abs(p[k] - at[k]));
        return m;
    };

    double gmax = 0.0;
    for (const double gk : g)
        gmax = std::max(gmax, std::abs(gk));
    double xmax = 0.0;
    for (const double xk : x)
        xmax = std::max(xmax, std::abs(xk));
    double step = gmax > 0.0 ? 1e-2 * std::max(xmax, 1.0) / gmax : 1.0;
    constexpr double step_min = 1e-30;
    constexpr double step_max = 1e30;
    constexpr double armijo = 1e-4;

    SolverResult res;
    res.history.push_back(f);
    res.stationarity = stationarity(x, g);
    while (res.iterations < opts.max_iterations)
    {
        if (res.stationarity < opts.tolerance)
        {
            res.converged = true;
            break;
        }
        ++res.iterations;

        for (std::size_t k = 0; k < K; ++k)
            trial[k] = x[k] - step * g[k];
        const auto target = project_bounded_simplex(trial, problem.P, problem.lo, problem.hi);
        double slope = 0.0;
        for (std::size_t k = 0; k < K; ++k)
        {
            d[k] = target[k] - x[k];
            slope += g[k] * d[k];
        }
        if (!(slope < 0.0))
            break; // no descent direction left at working precision

        double t = 1.0;
        double f_new = 0.0;
        bool accepted = false;
        for (int back = 0; back < 60; ++back)
        {
            for (std::size_t k = 0; k < K; ++k)
                x_new[k] = x[k] + t * d[k];
            f_new = problem.objective(x_new, g_new);
            if (f_new <= f + armijo * t * slope)
            {
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if (!accepted)
            break;

        double ss = 0.0;
        double sy = 0.0;
        for (std::size_t k = 0; k < K; ++k)
        {
            const double s = x_new[k] - x[k];
            ss += s * s;
            sy += s * (g_new[k] - g[k]);
        }
        step = sy > 0.0 ? std::clamp(ss / sy, step_min, step_max) : step_max;
        x.swap(x_new);
        g.swap(g_new);
        f = f_new;
        res.history.push_back(f);
        res.stationarity = stationarity(x, g);
    }
    if (!res.converged && res.stationarity < opts.tolerance)
        res.converged = true;
    res.rho = std::move(x);
    res.objective = f;
    return res;
}

// Allocation problem of one target cell handed to the generic solver, started
// from the relaxed closed-form solution projected onto the box.
inline ConstrainedProblem allocation_problem(EstimationMethod method, const InterferenceProfile &profile,
                                             const PowerBox &box, int M, ObjectiveKind kind = ObjectiveKind::exact)
{
    box.check(profile.users());
    ConstrainedProblem problem;
    problem.P = box.P;
    problem.lo = box.rho_min;
    problem.hi = box.rho_max;
    problem.start = unconstrained_optimum(method, profile.weights(), box.P);
    problem.objective = [method, profile, M, kind](std::span<const double> rho, std::span<double> grad)
    {
        objective_gradient(method, rho, profile, M, kind, grad);
        return objective_value(method, rho, profile, M, kind);
    };
    return problem;
}

inline SolverResult solve_allocation(EstimationMethod method, const InterferenceProfile &profile, const PowerBox &box,
                                     int M, ObjectiveKind kind = ObjectiveKind::exact, const SolverOptions &opts = {})
{
    return solve(allocation_problem(method, profile, box, M, kind), opts);
}

} // namespace mimo_pilot

#endif
