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

#ifndef MIMO_PILOT_AIRLINK_HPP
#define MIMO_PILOT_AIRLINK_HPP

#include "matrix.hpp"
#include "random.hpp"

#include <cmath>
#include <complex>
#include <span>
#include <stdexcept>
#include <vector>

namespace mimo_pilot
{

using cdouble = std::complex<double>;
using CVector = std::vector<cdouble>;

// <a, b> = a^H b
inline cdouble inner(std::span<const cdouble> a, std::span<const cdouble> b)
{
    cdouble acc{0.0, 0.0};
    for (std::size_t i = 0; i < a.size(); ++i)
        acc += std::conj(a[i]) * b[i];
    return acc;
}

inline double norm_sq(std::span<const cdouble> a)
{
    double acc = 0.0;
    for (const auto &v : a)
        acc += std::norm(v);
    return acc;
}

// Channel vectors h_{jlk} in C^M from every user (l, k) to the target BS j.
struct ChannelRealization
{
    int L = 0;
    int K = 0;
    int M = 0;
    std::vector<cdouble> h; // [L][K][M]
    BetaMatrix beta;        // coefficients the channels were drawn with

    std::span<const cdouble> vec(int l, int k) const
    {
        return {h.data() + (static_cast<std::size_t>(l) * K + k) * M, static_cast<std::size_t>(M)};
    }
    std::span<cdouble> vec(int l, int k)
    {
        return {h.data() + (static_cast<std::size_t>(l) * K + k) * M, static_cast<std::size_t>(M)};
    }
};

// Independent Rayleigh vectors h = sqrt(beta) * CN(0, I_M) per (l, k).
inline ChannelRealization sample_channels(const BetaMatrix &beta, int M, RngStream &rng)
{
    if (M < 1)
        throw std::invalid_argument("sample_channels: M must be at least 1");
    ChannelRealization ch;
    ch.L = static_cast<int>(beta.rows());
    ch.K = static_cast<int>(beta.cols());
    ch.M = M;
    ch.beta = beta;
    ch.h.resize(static_cast<std::size_t>(ch.L) * ch.K * M);
    for (int l = 0; l < ch.L; ++l)
        for (int k = 0; k < ch.K; ++k)
        {
            const double amp = std::sqrt(beta(l, k));
            for (auto &v : ch.vec(l, k))
                v = amp * rng.complex_normal();
        }
    return ch;
}

// tau x K matrix whose column k is the unit-norm pilot of user k. The same
// book is reused by every cell.
struct PilotBook
{
    Matrix<cdouble> s;

    int length() const { return static_cast<int>(s.rows()); }
    int users() const { return static_cast<int>(s.cols()); }
};

// Columns are the first K canonical basis vectors of C^tau.
inline PilotBook identity_pilot_book(int K, int tau)
{
    if (tau < K)
        throw std::invalid_argument("pilot book: tau must be >= K");
    PilotBook book{Matrix<cdouble>(tau, K)};
    for (int k = 0; k < K; ++k)
        book.s(k, k) = 1.0;
    return book;
}

enum class NoiseMode
{
    on,
    off,
};

struct PilotObservation
{
    Matrix<cdouble> Y; // M x tau
    PowerMatrix rho;   // [L][K] pilot powers
    PilotBook book;

    // Y s_k
    CVector despread(int k) const
    {
        const std::size_t M = Y.rows();
        CVector out(M, cdouble{0.0, 0.0});
        for (std::size_t t = 0; t < Y.cols(); ++t)
        {
            const cdouble s = book.s(t, k);
            if (s == cdouble{0.0, 0.0})
                continue;
            for (std::size_t m = 0; m < M; ++m)
                out[m] += Y(m, t) * s;
        }
        return out;
    }
};

// Received pilot matrix Y = sum_{l,k} sqrt(rho_lk) h_lk s_k^H + N with N having
// i.i.d. CN(0, 1) entries.
inline PilotObservation pilot_phase(const ChannelRealization &ch, const PowerMatrix &rho, int tau,
                                    RngStream &noise, NoiseMode mode = NoiseMode::on)
{
    if (static_cast<int>(rho.rows()) != ch.L || static_cast<int>(rho.cols()) != ch.K)
        throw std::invalid_argument("pilot_phase: power matrix shape mismatch");
    for (const double p : rho.data())
        if (!(p >= 0.0))
            throw std::invalid_argument("pilot_phase: pilot powers must be nonnegative");

    PilotObservation obs{Matrix<cdouble>(ch.M, tau), rho, identity_pilot_book(ch.K, tau)};
    if (mode == NoiseMode::on)
        for (auto &v : obs.Y.data())
            v = noise.complex_normal();

    for (int l = 0; l < ch.L; ++l)
        for (int k = 0; k < ch.K; ++k)
        {
            const double amp = std::sqrt(rho(l, k));
            const auto h = ch.vec(l, k);
            for (int t = 0; t < tau; ++t)
            {
                const cdouble s = std::conj(obs.book.s(t, k));
                if (s == cdouble{0.0, 0.0})
                    continue;
                for (int m = 0; m < ch.M; ++m)
                    obs.Y(m, t) += amp * h[m] * s;
            }
        }
    return obs;
}

// Sample moments behind the effective SINR of one target user k:
//   A = |E{h_hat^H h_jjk}|^2,  G(l, n) = E{|h_hat^H h_jln|^2},  D = E{||h_hat||^2}.
// Entries G(l, n) with n != k are the B terms, G(l, k) are the C terms.
struct SinrMoments
{
    double A = 0.0;
    Matrix<double> G;
    double D = 0.0;
    std::size_t samples = 0;

    double B(int l, int n) const { return G(l, n); }
    double C(int l) const { return G(l, target_user); }
    int target_user = 0;

    double sinr(double rho_u) const
    {
        double total = 0.0;
        for (const double g : G.data())
            total += g;
        return rho_u * A / (rho_u * total - rho_u * A + D);
    }
};

class SinrMomentAccumulator
{
  public:
    SinrMomentAccumulator(int L, int K, int target_user)
        : k_(target_user), G_(L, K, 0.0) {}

    void add(const ChannelRealization &ch, std::span<const cdouble> h_hat)
    {
        if (ch.L != static_cast<int>(G_.rows()) || ch.K != static_cast<int>(G_.cols()))
            throw std::invalid_argument("SinrMomentAccumulator: realization shape mismatch");
        for (int l = 0; l < ch.L; ++l)
            for (int n = 0; n < ch.K; ++n)
            {
                const cdouble ip = inner(h_hat, ch.vec(l, n));
                G_(l, n) += std::norm(ip);
                if (l == 0 && n == k_)
                    cross_ += ip;
            }
        D_ += norm_sq(h_hat);
        ++count_;
    }

    std::size_t count() const { return count_; }

    SinrMoments moments() const
    {
        if (count_ < 2)
            throw std::domain_error("SinrMomentAccumulator: need at least 2 samples");
        const double n = static_cast<double>(count_);
        SinrMoments out;
        out.target_user = k_;
        out.samples = count_;
        out.A = std::norm(cross_ / n);
        out.G = G_;
        for (auto &g : out.G.data())
            g /= n;
        out.D = D_ / n;
        return out;
    }

  private:
    int k_;
    Matrix<double> G_;
    cdouble cross_{0.0, 0.0};
    double D_ = 0.0;
    std::size_t count_ = 0;
};

} // namespace mimo_pilot

#endif
