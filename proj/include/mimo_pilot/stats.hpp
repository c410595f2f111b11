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


#ifndef MIMO_PILOT_STATS_HPP
#define MIMO_PILOT_STATS_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

namespace mimo_pilot
{

// Welford accumulator for mean and unbiased variance.
class RunningStats
{
  public:
    void add(double x)
    {
        ++n_;
        const double delta = x - mean_;
        mean_ += delta / static_cast<double>(n_);
        m2_ += delta * (x - mean_);
    }

    std::size_t count() const { return n_; }
    double mean() const { return mean_; }
    double variance() const { return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0; }
    double stddev() const { return std::sqrt(variance()); }
    double stderr_mean() const { return n_ > 0 ? std::sqrt(variance() / static_cast<double>(n_)) : 0.0; }

  private:
    std::size_t n_ = 0;
    double mean_ = 0.0;
    double m2_ = 0.0;
};

inline RunningStats summarize(std::span<const double> xs)
{
    RunningStats s;
    for (const double x : xs)
        s.add(x);
    return s;
}

// Right-continuous empirical CDF: F(x) = #{samples <= x} / n.
class EmpiricalCdf
{
  public:
    explicit EmpiricalCdf(std::vector<double> samples) : sorted_(std::move(samples))
    {
        if (sorted_.empty())
            throw std::invalid_argument("empirical_cdf: no samples");
        std::sort(sorted_.begin(), sorted_.end());
    }

    const std::vector<double> &sorted() const { return sorted_; }
    std::size_t size() const { return sorted_.size(); }

    double operator()(double x) const
    {
        const auto it = std::upper_bound(sorted_.begin(), sorted_.end(), x);
        return static_cast<double>(it - sorted_.begin()) / static_cast<double>(sorted_.size());
    }

    // Smallest sample x with F(x) >= p, for p in (0, 1].
    double quantile(double p) const
    {
        if (!(p > 0.0 && p <= 1.0))
            throw std::domain_error("empirical_cdf: quantile level must be in (0, 1]");
        const auto n = static_cast<double>(sorted_.size());
        auto idx = static_cast<std::size_t>(std::ceil(p * n));
        idx = std::clamp<std::size_t>(idx, 1, sorted_.size());
        return sorted_[idx - 1];
    }

  private:
    std::vector<double> sorted_;
};

inline EmpiricalCdf empirical_cdf(std::vector<double> samples) { return EmpiricalCdf(std::move(samples)); }

// sup_x |F_a(x) - F_b(x)| over the pooled jump points.
inline double ks_distance(const EmpiricalCdf &a, const EmpiricalCdf &b)
{
    double d = 0.0;
    for (const auto *cdf : {&a, &b})
        for (const double x : cdf->sorted())
            d = std::max(d, std::abs(a(x) - b(x)));
    return d;
}

// sup_x |F(x) - G(x)| against a continuous reference CDF G.
inline double ks_distance(const EmpiricalCdf &a, const std::function<double(double)> &reference)
{
    const auto &xs = a.sorted();
    const double n = static_cast<double>(xs.size());
    double d = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i)
    {
        const double g = reference(xs[i]);
        d = std::max({d, std::abs(static_cast<double>(i + 1) / n - g), std::abs(g - static_cast<double>(i) / n)});
    }
    return d;
}

// True when a's CDF lies on or above b's everywhere, i.e. a is stochastically smaller.
inline bool cdf_dominates(const EmpiricalCdf &a, const EmpiricalCdf &b)
{
    for (const auto *cdf : {&a, &b})
        for (const double x : cdf->sorted())
            if (a(x) < b(x))
                return false;
    return true;
}

} // namespace mimo_pilot

#endif
