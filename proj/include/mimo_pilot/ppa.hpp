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

#ifndef MIMO_PILOT_PPA_HPP
#define MIMO_PILOT_PPA_HPP

#include "config.hpp"
#include "estimators.hpp"
#include "matrix.hpp"
#include "metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

namespace mimo_pilot
{

// Per-user interference seen by the target cell with the other cells'
// pilot powers held fixed: upsilon_k = sum_{l != j} rho_lk beta_jlk + 1.
struct InterferenceProfile
{
    std::vector<double> upsilon;
    std::vector<double> beta_target; // beta_jjk

    int users() const { return static_cast<int>(upsilon.size()); }
    double weight(int k) const { return upsilon[k] / beta_target[k]; }
    std::vector<double> weights() const
    {
        std::vector<double> w(upsilon.size());
        for (std::size_t k = 0; k < w.size(); ++k)
            w[k] = upsilon[k] / beta_target[k];
        return w;
    }
};

// rho is [L][K]; row 0 (the target cell) is ignored.
inline InterferenceProfile make_profile(const BetaMatrix &beta, const PowerMatrix &rho)
{
    if (beta.rows() != rho.rows() || beta.cols() != rho.cols())
        throw std::invalid_argument("make_profile: shape mismatch");
    InterferenceProfile out;
    const std::size_t K = beta.cols();
    out.upsilon.assign(K, 1.0);
    out.beta_target.resize(K);
    for (std::size_t k = 0; k < K; ++k)
    {
        for (std::size_t l = 1; l < beta.rows(); ++l)
            out.upsilon[k] += rho(l, k) * beta(l, k);
        out.beta_target[k] = beta(0, k);
        if (!(out.beta_target[k] > 0.0))
            throw std::invalid_argument("make_profile: beta_jjk must be positive");
    }
    return out;
}

// Every user of every cell at P / K.
inline PowerMatrix eppa_powers(int L, int K, double P) { return PowerMatrix(L, K, P / K); }

// Box and budget of the allocation problem.
struct PowerBox
{
    double P = 0.0;
    double rho_min = 0.0;
    double rho_max = 0.0;

    static PowerBox from_config(const SystemConfig &cfg) { return {cfg.P_total, cfg.rho_min(), cfg.rho_max()}; }

    // rho_min = P / 2K, rho_max = mu P / K.
    static PowerBox standard(double P, int K, double mu) { return {P, P / (2.0 * K), mu * P / K}; }

    void check(int K) const
    {
        if (!(P > 0.0) || !(rho_min > 0.0) || !(rho_max >= rho_min))
            throw std::invalid_argument("configuration error: invalid power box");
        if (K * rho_min > P * (1.0 + 1e-12) || K * rho_max < P * (1.0 - 1e-12))
            throw std::invalid_argument("configuration error: power box infeasible for the budget");
        if ((K - 1) * rho_min + rho_max > P * (1.0 + 1e-12))
            throw std::invalid_argument("configuration error: (K-1) rho_min + rho_max exceeds P");
    }
};

// Solution of the relaxed problem (average surrogate Exp_rcee, budget only)
// over the users in `active`, sharing `budget`. Entries outside `active` are
// left untouched. MMSE values may come out negative for extreme weight spreads.
inline void relaxed_optimum(EstimationMethod method, std::span<const double> weights, std::span<const int> active,
                            double budget, std::span<double> rho)
{
    if (active.empty())
        return;
    // Equal weights: return the exact equal share, free of rounding.
    if (std::all_of(active.begin(), active.end(), [&](int k) { return weights[k] == weights[active[0]]; }))
    {
        for (const int k : active)
            rho[k] = budget / static_cast<double>(active.size());
        return;
    }
    double sum_sqrt = 0.0;
    double sum_w = 0.0;
    for (const int k : active)
    {
        sum_sqrt += std::sqrt(weights[k]);
        sum_w += weights[k];
    }
    if (method == EstimationMethod::LS)
    {
        const double lambda = sum_sqrt / budget;
        for (const int k : active)
            rho[k] = std::sqrt(weights[k]) / lambda;
    }
    else
    {
        const double lambda = sum_sqrt / (budget + sum_w);
        for (const int k : active)
            rho[k] = std::sqrt(weights[k]) / lambda - weights[k];
    }
}

inline std::vector<double> unconstrained_optimum(EstimationMethod method, std::span<const double> weights, double P)
{
    if (!(P > 0.0))
        throw std::invalid_argument("unconstrained_optimum: P must be positive");
    for (const double w : weights)
        if (!(w > 0.0))
            throw std::invalid_argument("unconstrained_optimum: weights must be positive");
    std::vector<int> all(weights.size());
    std::iota(all.begin(), all.end(), 0);
    std::vector<double> rho(weights.size(), 0.0);
    relaxed_optimum(method, weights, all, P, rho);
    return rho;
}

struct UserGroups
{
    std::vector<int> active; // powers from the relaxed solution on the residual budget
    std::vector<int> at_min;
    std::vector<int> at_max;

    bool operator==(const UserGroups &) const = default;
};

struct PilotAllocation
{
    std::vector<double> rho;
    UserGroups groups;
    EstimationMethod method = EstimationMethod::LS;
    int iterations = 0;        // number of users pinned to a bound
    int guarded_decisions = 0; // pins redirected to keep the residual budget feasible
};

// User-grouping allocation: solve the relaxed problem, then repeatedly pin the
// worst box violator to its bound, deduct its power and re-solve on the rest.
//
// Violator sets are {k : rho_k < rho_min} and {t : rho_t > rho_max}. The
// lower violator is pinned when its violation is at least the upper one, or
// when there is no upper violator. A pin that would leave the remaining users
// unable to share the residual budget inside the box is replaced by a pin on
// the other side; that side is then guaranteed to hold a violator.
inline PilotAllocation ppa_allocate(EstimationMethod method, const InterferenceProfile &profile, const PowerBox &box)
{
    const int K = profile.users();
    box.check(K);
    const auto weights = profile.weights();
    for (const double w : weights)
        if (!(w > 0.0) || !std::isfinite(w))
            throw std::invalid_argument("ppa_allocate: weights must be positive and finite");

    PilotAllocation out;
    out.method = method;
    out.rho.assign(K, 0.0);
    std::vector<int> &active = out.groups.active;
    active.resize(K);
    std::iota(active.begin(), active.end(), 0);

    double budget = box.P;
    const double tol = 1e-12 * box.P;
    relaxed_optimum(method, weights, active, budget, out.rho);

    for (int iter = 0; iter < K && !active.empty(); ++iter)
    {
        int low = -1;
        int high = -1;
        double low_gap = 0.0;
        double high_gap = 0.0;
        for (const int k : active)
        {
            const double below = box.rho_min - out.rho[k];
            const double above = out.rho[k] - box.rho_max;
            if (below > tol && (low < 0 || below > low_gap))
            {
                low = k;
                low_gap = below;
            }
            if (above > tol && (high < 0 || above > high_gap))
            {
                high = k;
                high_gap = above;
            }
        }
        if (low < 0 && high < 0)
            break;

        bool pin_low = high < 0 || (low >= 0 && low_gap >= high_gap);

        const double n_rest = static_cast<double>(active.size()) - 1.0;
        const auto residual_ok = [&](double pinned)
        {
            const double rest = budget - pinned;
            return rest >= n_rest * box.rho_min - tol && rest <= n_rest * box.rho_max + tol;
        };
        if (pin_low && !residual_ok(box.rho_min) && high >= 0)
        {
            pin_low = false;
            ++out.guarded_decisions;
        }
        else if (!pin_low && !residual_ok(box.rho_max) && low >= 0)
        {
            pin_low = true;
            ++out.guarded_decisions;
        }

        const int user = pin_low ? low : high;
        out.rho[user] = pin_low ? box.rho_min : box.rho_max;
        budget -= out.rho[user];
        (pin_low ? out.groups.at_min : out.groups.at_max).push_back(user);
        active.erase(std::find(active.begin(), active.end(), user));
        ++out.iterations;
        if (!active.empty())
            relaxed_optimum(method, weights, active, budget, out.rho);
    }

    std::sort(out.groups.at_min.begin(), out.groups.at_min.end());
    std::sort(out.groups.at_max.begin(), out.groups.at_max.end());
    return out;
}

inline PilotAllocation ppa_allocate(EstimationMethod method, const InterferenceProfile &profile,
                                    const SystemConfig &cfg)
{
    return ppa_allocate(method, profile, PowerBox::from_config(cfg));
}

inline PilotAllocation eppa_allocation(int K, double P, EstimationMethod method)
{
    PilotAllocation out;
    out.method = method;
    out.rho.assign(K, P / K);
    out.groups.active.resize(K);
    std::iota(out.groups.active.begin(), out.groups.active.end(), 0);
    return out;
}

enum class ObjectiveKind
{
    exact,     // average closed-form Exp_rcee
    surrogate, // MMSE term replaced by its upper bound; LS unchanged
};

inline double user_objective(EstimationMethod method, ObjectiveKind kind, int M, double ups, double signal)
{
    if (kind == ObjectiveKind::exact || method == EstimationMethod::LS)
        return exp_rcee_closed(method, M, ups, signal);
    return static_cast<double>(M) / (M - 1) * ups / (ups + signal);
}

// d/d(rho_k) of user k's term.
inline double user_objective_derivative(EstimationMethod method, ObjectiveKind kind, int M, double ups,
                                        double beta, double rho)
{
    const double gain = static_cast<double>(M) / (M - 1);
    const double signal = rho * beta;
    if (method == EstimationMethod::LS)
        return -gain * ups / (rho * signal);
    const double total = ups + signal;
    if (kind == ObjectiveKind::surrogate)
        return -gain * ups * beta / (total * total);
    return beta * ups * ((gain - 2.0) * ups - gain * signal) / (total * total * total);
}

// Average per-user Exp_rcee of the target cell.
inline double objective_value(EstimationMethod method, std::span<const double> rho, const InterferenceProfile &profile,
                              int M, ObjectiveKind kind = ObjectiveKind::exact)
{
    if (M < 2)
        throw std::domain_error("objective_value: M must be at least 2");
    double acc = 0.0;
    for (std::size_t k = 0; k < rho.size(); ++k)
        acc += user_objective(method, kind, M, profile.upsilon[k], rho[k] * profile.beta_target[k]);
    return acc / static_cast<double>(rho.size());
}

inline void objective_gradient(EstimationMethod method, std::span<const double> rho, const InterferenceProfile &profile,
                               int M, ObjectiveKind kind, std::span<double> grad)
{
    const double inv_k = 1.0 / static_cast<double>(rho.size());
    for (std::size_t k = 0; k < rho.size(); ++k)
        grad[k] = inv_k * user_objective_derivative(method, kind, M, profile.upsilon[k], profile.beta_target[k], rho[k]);
}

// ---------- Large-P asymptotics ----------

// Groups of the noise-free allocation problem, where every other-cell power
// scales with the budget as rho_lk = delta_lk P. They do not depend on P.
struct AsymptoticGroups
{
    UserGroups groups;
    EstimationMethod method = EstimationMethod::LS;
    int K = 0;
    double alpha = 0.5;  // rho_min K / P
    double mu = 0.0;     // rho_max K / P
    double varphi = 0.0; // 1 - (alpha |min| + mu |max|) / K
    double varpi = 0.0;  // sum over active users of S_k / beta_jjk
    double sum_sqrt = 0.0; // sum over active users of sqrt(S_k / beta_jjk)
    std::vector<double> interference; // S_k = sum_{l != j} delta_lk beta_jlk
};

inline constexpr double kAsymptoticReferencePower = 1.0e6;

// delta is [L][K] with row 0 ignored; beta is [L][K] with row 0 the target cell.
inline AsymptoticGroups asymptotic_groups(EstimationMethod method, const PowerMatrix &delta, const BetaMatrix &beta,
                                          double mu, double reference_power = kAsymptoticReferencePower)
{
    if (beta.rows() < 2)
        throw std::invalid_argument("asymptotic_groups: needs at least one interfering cell");
    const int K = static_cast<int>(beta.cols());
    AsymptoticGroups out;
    out.method = method;
    out.K = K;
    out.mu = mu;
    out.interference.assign(K, 0.0);
    InterferenceProfile noise_free;
    noise_free.upsilon.resize(K);
    noise_free.beta_target.resize(K);
    for (int k = 0; k < K; ++k)
    {
        for (std::size_t l = 1; l < beta.rows(); ++l)
            out.interference[k] += delta(l, k) * beta(l, k);
        if (!(out.interference[k] > 0.0))
            throw std::invalid_argument("asymptotic_groups: co-channel interference must be positive");
        noise_free.upsilon[k] = reference_power * out.interference[k];
        noise_free.beta_target[k] = beta(0, k);
    }
    const auto alloc = ppa_allocate(method, noise_free, PowerBox::standard(reference_power, K, mu));
    out.groups = alloc.groups;
    std::sort(out.groups.active.begin(), out.groups.active.end());

    out.varphi = 1.0 - (out.alpha * static_cast<double>(out.groups.at_min.size()) +
                        mu * static_cast<double>(out.groups.at_max.size())) / K;
    for (const int k : out.groups.active)
    {
        const double ratio = out.interference[k] / beta(0, k);
        out.varpi += ratio;
        out.sum_sqrt += std::sqrt(ratio);
    }
    return out;
}

// Large-M, large-P limit of user k's Exp_rcee under the grouped allocation.
// Pinned users hold rho = alpha P / K or mu P / K against interference S_k P.
inline double exp_rcee_asymptotic(const AsymptoticGroups &g, const BetaMatrix &beta, int k)
{
    const double S = g.interference[k];
    const double b = beta(0, k);
    const auto contains = [k](const std::vector<int> &v) { return std::find(v.begin(), v.end(), k) != v.end(); };
    const bool ls = g.method == EstimationMethod::LS;

    if (contains(g.groups.at_min) || contains(g.groups.at_max))
    {
        const double share = (contains(g.groups.at_min) ? g.alpha : g.mu) / g.K;
        return ls ? S / (share * b) : S / (S + share * b);
    }
    if (!contains(g.groups.active))
        throw std::invalid_argument("exp_rcee_asymptotic: user not assigned to any group");

    const double phi = S * g.sum_sqrt;
    const double psi = std::sqrt(b * S);
    return ls ? phi / (g.varphi * psi) : phi / ((g.varphi + g.varpi) * psi);
}

} // namespace mimo_pilot

#endif
