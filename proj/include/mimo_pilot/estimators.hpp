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

#ifndef MIMO_PILOT_ESTIMATORS_HPP
#define MIMO_PILOT_ESTIMATORS_HPP

#include "airlink.hpp"
#include "matrix.hpp"

#include <cctype>
#include <cmath>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace mimo_pilot
{

enum class EstimationMethod
{
    LS,
    MMSE,
};

inline std::string_view to_string(EstimationMethod m) { return m == EstimationMethod::LS ? "LS" : "MMSE"; }

// Accepts "ls" / "mmse" in any letter case.
inline std::optional<EstimationMethod> parse_method(std::string_view s)
{
    std::string lower(s);
    for (auto &c : lower)
        c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (lower == "ls")
        return EstimationMethod::LS;
    if (lower == "mmse")
        return EstimationMethod::MMSE;
    return std::nullopt;
}

// Estimates of the target cell's channels h_{jjk}, k = 0..K-1.
struct ChannelEstimate
{
    std::vector<CVector> h_hat;
    EstimationMethod method = EstimationMethod::LS;
};

// h_hat_k = Y s_k / sqrt(rho_jk)
inline ChannelEstimate estimate_ls(const PilotObservation &obs, std::span<const double> rho_target)
{
    ChannelEstimate est;
    est.method = EstimationMethod::LS;
    est.h_hat.reserve(rho_target.size());
    for (std::size_t k = 0; k < rho_target.size(); ++k)
    {
        if (!(rho_target[k] > 0.0))
            throw std::domain_error("estimate_ls: pilot power of user " + std::to_string(k) + " must be positive");
        CVector v = obs.despread(static_cast<int>(k));
        const double scale = 1.0 / std::sqrt(rho_target[k]);
        for (auto &x : v)
            x *= scale;
        est.h_hat.push_back(std::move(v));
    }
    return est;
}

// Scalar MMSE gain rho_jk beta_jjk / (sum_l rho_lk beta_jlk + 1). Row 0 of
// rho and beta is the target cell.
inline double mmse_gain(const PowerMatrix &rho, const BetaMatrix &beta, int k)
{
    double total = 1.0;
    for (std::size_t l = 0; l < beta.rows(); ++l)
        total += rho(l, k) * beta(l, k);
    return rho(0, k) * beta(0, k) / total;
}

inline ChannelEstimate estimate_mmse(const PilotObservation &obs, const PowerMatrix &rho, const BetaMatrix &beta)
{
    const auto target = rho.row(0);
    ChannelEstimate est = estimate_ls(obs, target);
    est.method = EstimationMethod::MMSE;
    for (std::size_t k = 0; k < est.h_hat.size(); ++k)
    {
        const double c = mmse_gain(rho, beta, static_cast<int>(k));
        for (auto &x : est.h_hat[k])
            x *= c;
    }
    return est;
}

inline ChannelEstimate estimate(EstimationMethod method, const PilotObservation &obs, const PowerMatrix &rho,
                                const BetaMatrix &beta)
{
    return method == EstimationMethod::LS ? estimate_ls(obs, rho.row(0)) : estimate_mmse(obs, rho, beta);
}

// Debug path for the MMSE reduction: W = R_{h,hls} R_{hls,hls}^{-1} from
// explicit covariance matrices. With i.i.d. Rayleigh channels both matrices
// are scaled identities and W collapses to mmse_gain() * I.
inline Matrix<cdouble> mmse_matrix_from_covariances(const Matrix<cdouble> &cross_cov, const Matrix<cdouble> &ls_cov)
{
    const std::size_t n = ls_cov.rows();
    if (ls_cov.cols() != n || cross_cov.rows() != n || cross_cov.cols() != n)
        throw std::invalid_argument("mmse_matrix_from_covariances: matrices must be square and equally sized");

    // Solve W R = C, i.e. R^T W^T = C^T, by Gauss-Jordan on [R^T | C^T].
    Matrix<cdouble> a(n, 2 * n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
        {
            a(i, j) = ls_cov(j, i);
            a(i, n + j) = cross_cov(j, i);
        }
    for (std::size_t col = 0; col < n; ++col)
    {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::abs(a(r, col)) > std::abs(a(pivot, col)))
                pivot = r;
        if (std::abs(a(pivot, col)) == 0.0)
            throw std::domain_error("mmse_matrix_from_covariances: singular covariance");
        if (pivot != col)
            for (std::size_t j = 0; j < 2 * n; ++j)
                std::swap(a(pivot, j), a(col, j));
        const cdouble inv = 1.0 / a(col, col);
        for (std::size_t j = 0; j < 2 * n; ++j)
            a(col, j) *= inv;
        for (std::size_t r = 0; r < n; ++r)
        {
            if (r == col)
                continue;
            const cdouble f = a(r, col);
            if (f == cdouble{0.0, 0.0})
                continue;
            for (std::size_t j = 0; j < 2 * n; ++j)
                a(r, j) -= f * a(col, j);
        }
    }
    Matrix<cdouble> w(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            w(i, j) = a(j, n + i);
    return w;
}

// Analytic covariances of (h_jjk, h_hat_LS_k) for i.i.d. Rayleigh channels:
// E{h h_ls^H} = beta_jjk I and E{h_ls h_ls^H} = (sum_l rho_lk beta_jlk + 1) / rho_jk I.
inline std::pair<Matrix<cdouble>, Matrix<cdouble>> ls_covariances(const PowerMatrix &rho, const BetaMatrix &beta,
                                                                  int k, int M)
{
    double total = 1.0;
    for (std::size_t l = 0; l < beta.rows(); ++l)
        total += rho(l, k) * beta(l, k);
    Matrix<cdouble> cross(M, M), auto_cov(M, M);
    for (int m = 0; m < M; ++m)
    {
        cross(m, m) = beta(0, k);
        auto_cov(m, m) = total / rho(0, k);
    }
    return {cross, auto_cov};
}

} // namespace mimo_pilot

#endif
