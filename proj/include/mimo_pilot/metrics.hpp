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

#ifndef MIMO_PILOT_METRICS_HPP
#define MIMO_PILOT_METRICS_HPP

#include "airlink.hpp"
#include "config.hpp"
#include "estimators.hpp"
#include "matrix.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <span>
#include <stdexcept>

// Closed-form and sample metrics for one target-cell user k. Per-user inputs
// are columns over cells: index 0 is the target cell j, indices 1..L-1 are
// the co-channel cells. Infinite results are IEEE +infinity.

namespace mimo_pilot
{

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

// sum_{l != j} rho_lk beta_jlk
inline double pilot_interference(std::span<const double> rho_col, std::span<const double> beta_col)
{
    double acc = 0.0;
    for (std::size_t l = 1; l < beta_col.size(); ++l)
        acc += rho_col[l] * beta_col[l];
    return acc;
}

// ||h - h_hat||^2 / ||h||^2
inline double rcee_sample(std::span<const cdouble> h, std::span<const cdouble> h_hat)
{
    if (h.size() != h_hat.size())
        throw std::invalid_argument("rcee_sample: length mismatch");
    double err = 0.0;
    for (std::size_t m = 0; m < h.size(); ++m)
        err += std::norm(h[m] - h_hat[m]);
    const double energy = norm_sq(h);
    if (!(energy > 0.0))
        throw std::domain_error("rcee_sample: zero channel vector");
    return err / energy;
}

// Expected RCEE from the two scalars it depends on: ups = sum_{l != j}
// rho_lk beta_jlk + 1 and signal = rho_jk beta_jjk. Infinite for M = 1.
inline double exp_rcee_closed(EstimationMethod method, int M, double ups, double signal)
{
    if (M < 1)
        throw std::domain_error("exp_rcee_closed: M must be at least 1");
    if (M == 1)
        return kInfinity;
    const double gain = static_cast<double>(M) / (M - 1);
    if (method == EstimationMethod::LS)
        return gain * ups / signal;
    const double total = ups + signal;
    return ups * (ups + gain * signal) / (total * total);
}

inline double exp_rcee_closed(EstimationMethod method, int M, std::span<const double> rho_col,
                              std::span<const double> beta_col)
{
    return exp_rcee_closed(method, M, pilot_interference(rho_col, beta_col) + 1.0, rho_col[0] * beta_col[0]);
}

// Upper bound on the MMSE expected RCEE; strictly above exp_rcee_closed(MMSE).
inline double exp_rcee_bound_mmse(int M, std::span<const double> rho_col, std::span<const double> beta_col)
{
    if (M < 2)
        throw std::domain_error("exp_rcee_bound_mmse: M must be at least 2");
    const double ups = pilot_interference(rho_col, beta_col) + 1.0;
    const double total = ups + rho_col[0] * beta_col[0];
    return static_cast<double>(M) / (M - 1) * ups / total;
}

// Large-M limit of the expected RCEE, also the almost-sure limit of the RCEE.
inline double exp_rcee_limit(EstimationMethod method, std::span<const double> rho_col,
                             std::span<const double> beta_col)
{
    const double ups = pilot_interference(rho_col, beta_col) + 1.0;
    const double signal = rho_col[0] * beta_col[0];
    return method == EstimationMethod::LS ? ups / signal : ups / (ups + signal);
}

// Large-M limit under equal powers rho = P / K in every cell.
inline double exp_rcee_eppa_limit(EstimationMethod method, std::span<const double> beta_col, int K, double P)
{
    const double noise = static_cast<double>(K) / P;
    double interference = 0.0;
    for (std::size_t l = 1; l < beta_col.size(); ++l)
        interference += beta_col[l];
    const double num = interference + noise;
    return method == EstimationMethod::LS ? num / beta_col[0] : num / (interference + beta_col[0] + noise);
}

// Equal powers, large M and P.
inline double exp_rcee_eppa_high_power_limit(EstimationMethod method, std::span<const double> beta_col)
{
    double interference = 0.0;
    for (std::size_t l = 1; l < beta_col.size(); ++l)
        interference += beta_col[l];
    return method == EstimationMethod::LS ? interference / beta_col[0] : interference / (interference + beta_col[0]);
}

// Effective MRC SINR of target user k, identical for LS and MMSE estimates.
// rho and beta are [L][K] with row 0 the target cell.
inline double sinr_closed(int M, const PowerMatrix &rho, const BetaMatrix &beta, double rho_u, int k)
{
    const std::size_t L = beta.rows();
    double pc = 0.0;   // sum_{l != j} rho_lk beta_jlk^2
    double all = 1.0;  // sum_l rho_lk beta_jlk + 1
    for (std::size_t l = 0; l < L; ++l)
    {
        all += rho(l, k) * beta(l, k);
        if (l != 0)
            pc += rho(l, k) * beta(l, k) * beta(l, k);
    }
    double received = 1.0 / rho_u; // 1/rho_u + sum_{l,n} beta_jln
    for (const double b : beta.data())
        received += b;
    const double b0 = beta(0, k);
    return M * rho(0, k) * b0 * b0 / (M * pc + all * received);
}

// Large-M SINR; infinite without co-channel interference.
inline double sinr_limit(std::span<const double> rho_col, std::span<const double> beta_col)
{
    double pc = 0.0;
    for (std::size_t l = 1; l < beta_col.size(); ++l)
        pc += rho_col[l] * beta_col[l] * beta_col[l];
    const double num = rho_col[0] * beta_col[0] * beta_col[0];
    if (pc == 0.0)
        return kInfinity;
    return num / pc;
}

// (B / Gamma) * slot_fraction * (Tu / To), in bits/s per unit log2(1 + SINR).
inline double rate_prefactor(const SystemConfig &cfg)
{
    return cfg.B / cfg.Gamma * cfg.slot_fraction * (cfg.Tu / cfg.To);
}

inline double achievable_rate(const SystemConfig &cfg, double sinr)
{
    if (!(sinr >= 0.0))
        throw std::domain_error("achievable_rate: SINR must be nonnegative");
    return rate_prefactor(cfg) * std::log2(1.0 + sinr);
}

struct RateSummary
{
    double r_min = 0.0;
    double r_av = 0.0;
};

inline RateSummary rate_summary(std::span<const double> rates)
{
    if (rates.empty())
        throw std::invalid_argument("rate_summary: empty input");
    RateSummary out;
    out.r_min = *std::min_element(rates.begin(), rates.end());
    out.r_av = std::accumulate(rates.begin(), rates.end(), 0.0) / static_cast<double>(rates.size());
    return out;
}

} // namespace mimo_pilot

#endif
