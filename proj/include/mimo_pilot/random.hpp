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

#ifndef MIMO_PILOT_RANDOM_HPP
#define MIMO_PILOT_RANDOM_HPP

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <random>

namespace mimo_pilot
{

// Tags separating the random streams used for one trial.
enum class Purpose : std::uint32_t
{
    placement = 1,
    shadowing = 2,
    channel = 3,
    pilot_noise = 4,
    instance = 5,
};

// A reproducible random stream. Copying a stream copies its state, so two
// copies produce identical draws (used for common random numbers across schemes).
class RngStream
{
  public:
    explicit RngStream(std::seed_seq &seq) : engine_(seq) {}

    double uniform() { return uniform_(engine_); }
    double normal() { return normal_(engine_); }

    // CN(0, 1): independent real and imaginary parts with variance 1/2 each.
    std::complex<double> complex_normal()
    {
        const double re = normal_(engine_);
        const double im = normal_(engine_);
        constexpr double scale = 1.0 / std::numbers::sqrt2;
        return {re * scale, im * scale};
    }

    std::mt19937_64 &engine() { return engine_; }

  private:
    std::mt19937_64 engine_;
    std::uniform_real_distribution<double> uniform_{0.0, 1.0};
    std::normal_distribution<double> normal_{0.0, 1.0};
};

// Maps (seed, trial, purpose) to an independent stream. Identical inputs give
// identical streams; the seed sequence keeps all 64 bits of seed and trial.
inline RngStream seed_schedule(std::uint64_t seed, std::uint64_t trial, Purpose purpose)
{
    std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xffffffffu),
                      static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(trial & 0xffffffffu),
                      static_cast<std::uint32_t>(trial >> 32),
                      static_cast<std::uint32_t>(purpose)};
    return RngStream(seq);
}

// Packs a drop index and a small-scale trial index into one trial id.
constexpr std::uint64_t trial_id(std::uint64_t drop, std::uint64_t sub)
{
    return (drop << 32) | (sub & 0xffffffffu);
}

} // namespace mimo_pilot

#endif
