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


#include "mimo_pilot/airlink.hpp"
#include "mimo_pilot/estimators.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace mimo_pilot;

namespace
{
struct Fixture
{
    BetaMatrix beta{3, 2};
    PowerMatrix rho{3, 2};
    Fixture()
    {
        const double b[3][2] = {{0.8, 0.3}, {0.05, 0.2}, {0.1, 0.01}};
        const double p[3][2] = {{4.0, 9.0}, {2.0, 3.0}, {5.0, 1.0}};
        for (int l = 0; l < 3; ++l)
            for (int k = 0; k < 2; ++k)
            {
                beta(l, k) = b[l][k];
                rho(l, k) = p[l][k];
            }
    }
};
} // namespace

TEST(Estimators, ParseMethod)
{
    EXPECT_EQ(parse_method("ls"), EstimationMethod::LS);
    EXPECT_EQ(parse_method("MMSE"), EstimationMethod::MMSE);
    EXPECT_EQ(parse_method("MmSe"), EstimationMethod::MMSE);
    EXPECT_FALSE(parse_method("mmsee").has_value());
    EXPECT_EQ(to_string(EstimationMethod::LS), "LS");
}

TEST(Estimators, LsIsExactWithoutNoiseOrContamination)
{
    BetaMatrix beta(1, 2, 0.7);
    PowerMatrix rho(1, 2, 3.0);
    auto crng = seed_schedule(1, 0, Purpose::channel);
    auto nrng = seed_schedule(1, 0, Purpose::pilot_noise);
    const auto ch = sample_channels(beta, 8, crng);
    const auto obs = pilot_phase(ch, rho, 2, nrng, NoiseMode::off);
    const auto est = estimate_ls(obs, rho.row(0));
    for (int k = 0; k < 2; ++k)
        for (int m = 0; m < 8; ++m)
            EXPECT_NEAR(std::abs(est.h_hat[k][m] - ch.vec(0, k)[m]), 0.0, 1e-12);
}

TEST(Estimators, LsCarriesScaledContamination)
{
    const Fixture s;
    auto crng = seed_schedule(2, 0, Purpose::channel);
    auto nrng = seed_schedule(2, 0, Purpose::pilot_noise);
    const auto ch = sample_channels(s.beta, 5, crng);
    const auto obs = pilot_phase(ch, s.rho, 2, nrng, NoiseMode::off);
    const auto est = estimate_ls(obs, s.rho.row(0));
    for (int k = 0; k < 2; ++k)
        for (int m = 0; m < 5; ++m)
        {
            cdouble expected = ch.vec(0, k)[m];
            for (int l = 1; l < 3; ++l)
                expected += std::sqrt(s.rho(l, k) / s.rho(0, k)) * ch.vec(l, k)[m];
            EXPECT_NEAR(std::abs(est.h_hat[k][m] - expected), 0.0, 1e-12);
        }
}

TEST(Estimators, MmseIsScaledLs)
{
    const Fixture s;
    auto crng = seed_schedule(3, 0, Purpose::channel);
    auto nrng = seed_schedule(3, 0, Purpose::pilot_noise);
    const auto ch = sample_channels(s.beta, 4, crng);
    const auto obs = pilot_phase(ch, s.rho, 2, nrng);
    const auto ls = estimate(EstimationMethod::LS, obs, s.rho, s.beta);
    const auto mmse = estimate(EstimationMethod::MMSE, obs, s.rho, s.beta);
    EXPECT_EQ(mmse.method, EstimationMethod::MMSE);
    for (int k = 0; k < 2; ++k)
    {
        // Independent evaluation of rho_jk beta_jjk / (sum_l rho_lk beta_jlk + 1).
        const double den = s.rho(0, k) * s.beta(0, k) + s.rho(1, k) * s.beta(1, k) + s.rho(2, k) * s.beta(2, k) + 1.0;
        const double c = s.rho(0, k) * s.beta(0, k) / den;
        EXPECT_NEAR(mmse_gain(s.rho, s.beta, k), c, 1e-15);
        for (int m = 0; m < 4; ++m)
            EXPECT_NEAR(std::abs(mmse.h_hat[k][m] - c * ls.h_hat[k][m]), 0.0, 1e-12);
    }
}

TEST(Estimators, LsRejectsNonPositivePower)
{
    const Fixture s;
    auto crng = seed_schedule(4, 0, Purpose::channel);
    const auto ch = sample_channels(s.beta, 2, crng);
    PowerMatrix rho = s.rho;
    rho(0, 1) = 0.0;
    const auto obs = pilot_phase(ch, rho, 2, crng);
    EXPECT_THROW(estimate_ls(obs, rho.row(0)), std::domain_error);
}

TEST(Estimators, CovarianceFormReducesToScalarGain)
{
    const Fixture s;
    for (int k = 0; k < 2; ++k)
    {
        const auto [cross, auto_cov] = ls_covariances(s.rho, s.beta, k, 4);
        const auto W = mmse_matrix_from_covariances(cross, auto_cov);
        const double c = mmse_gain(s.rho, s.beta, k);
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j)
                EXPECT_NEAR(std::abs(W(i, j) - cdouble(i == j ? c : 0.0, 0.0)), 0.0, 1e-14);
    }
}

TEST(Estimators, GeneralCovarianceSolveSatisfiesNormalEquations)
{
    Matrix<cdouble> R(2, 2), C(2, 2);
    R(0, 0) = 2.0;
    R(0, 1) = cdouble(0.5, 0.5);
    R(1, 0) = cdouble(0.5, -0.5);
    R(1, 1) = 3.0;
    C(0, 0) = cdouble(1.0, 1.0);
    C(0, 1) = 0.2;
    C(1, 0) = cdouble(0.0, -1.0);
    C(1, 1) = 0.7;
    const auto W = mmse_matrix_from_covariances(C, R);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
        {
            cdouble wr = W(i, 0) * R(0, j) + W(i, 1) * R(1, j);
            EXPECT_NEAR(std::abs(wr - C(i, j)), 0.0, 1e-14);
        }
    EXPECT_THROW(mmse_matrix_from_covariances(C, Matrix<cdouble>(2, 2)), std::domain_error);
    EXPECT_THROW(mmse_matrix_from_covariances(C, Matrix<cdouble>(3, 3)), std::invalid_argument);
}

TEST(Estimators, MmseErrorIsOrthogonalToEstimate)
{
    const Fixture s;
    const int M = 4;
    const int reps = 20000;
    cdouble corr{0.0, 0.0};
    double scale = 0.0;
    for (int r = 0; r < reps; ++r)
    {
        auto crng = seed_schedule(5, r, Purpose::channel);
        auto nrng = seed_schedule(5, r, Purpose::pilot_noise);
        const auto ch = sample_channels(s.beta, M, crng);
        const auto obs = pilot_phase(ch, s.rho, 2, nrng);
        const auto est = estimate_mmse(obs, s.rho, s.beta);
        for (int m = 0; m < M; ++m)
        {
            corr += (ch.vec(0, 0)[m] - est.h_hat[0][m]) * std::conj(est.h_hat[0][m]);
            scale += std::norm(est.h_hat[0][m]);
        }
    }
    // E{(h - h_hat) h_hat^*} = 0 for the linear MMSE estimate.
    EXPECT_LT(std::abs(corr) / scale, 0.02);
}
