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


#include "mimo_pilot/harness.hpp"

#include <gtest/gtest.h>

#include <atomic>
#include <cmath>
#include <sstream>

using namespace mimo_pilot;

namespace
{
ExperimentPlan tiny_fig3()
{
    ExperimentPlan plan = default_plan(ExperimentId::fig3);
    plan.M_grid = {8, 16};
    plan.gammas = {1, 7};
    plan.n_large = 3;
    plan.n_small = 4;
    return plan;
}
} // namespace

TEST(Pool, CoversEveryIndexOnce)
{
    for (const int jobs : {1, 2, 4})
    {
        std::vector<std::atomic<int>> hits(100);
        parallel_for(hits.size(), jobs, [&](std::size_t i) { ++hits[i]; });
        for (const auto &h : hits)
            EXPECT_EQ(h.load(), 1);
    }
}

TEST(Pool, PropagatesLowestIndexFailure)
{
    try
    {
        parallel_for(50, 3,
                     [](std::size_t i)
                     {
                         if (i == 7 || i == 30)
                             throw std::runtime_error("task " + std::to_string(i));
                     });
        FAIL() << "expected an exception";
    }
    catch (const std::runtime_error &e)
    {
        EXPECT_STREQ(e.what(), "task 7");
    }
}

TEST(Plan, IdsAndSchemesParse)
{
    EXPECT_EQ(parse_experiment_id("3"), ExperimentId::fig3);
    EXPECT_EQ(parse_experiment_id("fig4a"), ExperimentId::fig4a);
    EXPECT_EQ(parse_experiment_id("5B"), ExperimentId::fig5b);
    EXPECT_EQ(parse_experiment_id("validate"), ExperimentId::validate);
    EXPECT_FALSE(parse_experiment_id("6").has_value());
    EXPECT_EQ(parse_scheme("EPPA"), Scheme::eppa);
    EXPECT_EQ(parse_scheme("ref"), Scheme::ref);
    EXPECT_FALSE(parse_scheme("opt").has_value());
}

TEST(Plan, DefaultsAndValidation)
{
    for (const auto id : {ExperimentId::fig3, ExperimentId::fig4a, ExperimentId::fig4b, ExperimentId::fig5a,
                          ExperimentId::fig5b, ExperimentId::validate})
    {
        EXPECT_NO_THROW(default_plan(id).validate());
        EXPECT_NO_THROW(default_plan(id, true).validate());
    }
    const auto desk = default_plan(ExperimentId::fig3);
    const auto paper = default_plan(ExperimentId::fig3, true);
    EXPECT_EQ(desk.n_large, 20);
    EXPECT_EQ(desk.n_small, 50);
    EXPECT_EQ(paper.n_large, 100);
    EXPECT_EQ(paper.n_small, 100);

    auto bad = desk;
    bad.n_small = 0;
    EXPECT_THROW(bad.validate(), std::invalid_argument);
    bad = desk;
    bad.M_grid = {16, 8};
    EXPECT_THROW(bad.validate(), std::invalid_argument);
    bad = desk;
    bad.M_grid.clear();
    EXPECT_THROW(bad.validate(), std::invalid_argument);
    bad = desk;
    bad.gammas = {2};
    EXPECT_THROW(bad.validate(), std::invalid_argument);
}

TEST(Fig3, SchemaAndRowCount)
{
    const auto plan = tiny_fig3();
    const auto rep = run_experiment(plan, SystemConfig{});
    const auto table = rep.to_csv();
    EXPECT_EQ(table.header(), (std::vector<std::string>{"M", "scheme", "method", "gamma", "mean_exp_rcee", "stderr",
                                                         "closed_form", "asymptote"}));
    EXPECT_EQ(table.num_rows(), plan.M_grid.size() * plan.gammas.size() * plan.schemes.size() * plan.methods.size());
    for (const auto &p : rep.points)
    {
        EXPECT_GE(p.values[rep.column("stderr")], 0.0);
        EXPECT_GT(p.values[rep.column("closed_form")], p.values[rep.column("asymptote")]);
    }
    const std::string csv = table.str();
    EXPECT_EQ(csv.find('\r'), std::string::npos);
    EXPECT_EQ(csv.back(), '\n');
}

TEST(Fig3, IndependentOfWorkerCount)
{
    const auto plan = tiny_fig3();
    const SystemConfig cfg;
    const auto a = run_experiment(plan, cfg, 1).to_csv().str();
    const auto b = run_experiment(plan, cfg, 3).to_csv().str();
    EXPECT_EQ(a, b);
    SystemConfig other = cfg;
    other.seed = 2;
    EXPECT_NE(a, run_experiment(plan, other, 1).to_csv().str());
}

TEST(Fig3, ReferenceSchemeRuns)
{
    auto plan = tiny_fig3();
    plan.schemes = {Scheme::ppa, Scheme::ref};
    plan.n_small = 2;
    const auto rep = run_experiment(plan, SystemConfig{});
    for (const int gamma : plan.gammas)
        for (const int M : plan.M_grid)
            for (const auto m : plan.methods)
            {
                const double ppa = rep.value(M, Scheme::ppa, m, gamma, "closed_form");
                const double ref = rep.value(M, Scheme::ref, m, gamma, "closed_form");
                // The reference optimizes the finite-M objective; the allocator
                // optimizes its large-M surrogate, so it can only be worse.
                EXPECT_LE(ref, ppa * (1.0 + 1e-9));
                EXPECT_NEAR(ppa, ref, 5e-3 * ref);
            }
}

TEST(Cdf, LongFormatIsSorted)
{
    auto plan = default_plan(ExperimentId::fig4a);
    plan.n_large = 15;
    const auto rep = run_experiment(plan, SystemConfig{});
    const auto table = rep.to_csv();
    EXPECT_EQ(table.header(), (std::vector<std::string>{"scheme", "method", "gamma", "value", "cdf"}));
    EXPECT_EQ(table.num_rows(), 15u * 3u * 4u);
    for (const auto &c : rep.cdfs)
        EXPECT_TRUE(std::is_sorted(c.cdf.sorted().begin(), c.cdf.sorted().end()));
}

TEST(Fig5b, LsApproachesMmseAsReuseGrows)
{
    auto plan = default_plan(ExperimentId::fig5b);
    plan.schemes = {Scheme::ppa};
    const auto rep = run_experiment(plan, SystemConfig{});
    std::vector<double> ks;
    for (const int g : plan.gammas)
        ks.push_back(ks_distance(rep.cdf(Scheme::ppa, EstimationMethod::LS, g),
                                 rep.cdf(Scheme::ppa, EstimationMethod::MMSE, g)));
    EXPECT_GT(ks[0], ks[1]);
    EXPECT_GT(ks[1], ks[2]);
}

TEST(Consistency, SymmetricPpaEqualsEppaPipeline)
{
    // Identical coefficients for every user make the PPA weights symmetric.
    BetaMatrix beta(3, 4, 0.02);
    for (int k = 0; k < 4; ++k)
        beta(0, k) = 0.7;
    const auto profile = make_profile(beta, eppa_powers(3, 4, 400.0));
    const auto box = PowerBox::standard(400.0, 4, 2.0);
    for (const auto m : {EstimationMethod::LS, EstimationMethod::MMSE})
    {
        const auto ppa = full_powers(target_allocation(Scheme::ppa, m, profile, box, 8), 3, 400.0);
        const auto eppa = full_powers(target_allocation(Scheme::eppa, m, profile, box, 8), 3, 400.0);
        EXPECT_TRUE(ppa == eppa);
        const auto a = monte_carlo(m, beta, ppa, 8, 50, 3, 0);
        const auto b = monte_carlo(m, beta, eppa, 8, 50, 3, 0);
        for (int k = 0; k < 4; ++k)
            EXPECT_EQ(a.rcee[k].mean(), b.rcee[k].mean());
    }
}

TEST(MonteCarlo, StandardErrorShrinksWithTrials)
{
    BetaMatrix beta(2, 2, 0.1);
    beta(0, 0) = 1.0;
    beta(0, 1) = 0.5;
    const PowerMatrix rho(2, 2, 10.0);
    const auto small = monte_carlo(EstimationMethod::MMSE, beta, rho, 16, 400, 5, 1);
    const auto large = monte_carlo(EstimationMethod::MMSE, beta, rho, 16, 1600, 5, 2);
    for (int k = 0; k < 2; ++k)
        EXPECT_NEAR(small.rcee[k].stderr_mean() / large.rcee[k].stderr_mean(), 2.0, 0.4);
    EXPECT_THROW(monte_carlo(EstimationMethod::LS, beta, rho, 4, 1, 1, 0), std::invalid_argument);
    EXPECT_THROW(monte_carlo(EstimationMethod::LS, beta, rho, 4, 10, 1, trial_id(1, 0)), std::invalid_argument);
}

TEST(Validate, MonteCarloMatchesClosedForms)
{
    auto plan = default_plan(ExperimentId::validate);
    plan.schemes = {Scheme::eppa};
    plan.n_small = 2000;
    const auto rep = run_experiment(plan, SystemConfig{});
    EXPECT_EQ(rep.to_csv().header(), (std::vector<std::string>{"quantity", "scheme", "method", "gamma", "M", "user",
                                                                "monte_carlo", "stderr", "closed_form"}));
    int outside = 0;
    int total = 0;
    for (const auto &p : rep.points)
    {
        if (p.quantity != "exp_rcee")
            continue;
        ++total;
        if (std::abs(p.values[0] - p.values[2]) > 3.0 * p.values[1])
            ++outside;
    }
    // 3-sigma agreement, allowing the odd excursion among 20 comparisons.
    EXPECT_EQ(total, 20);
    EXPECT_LE(outside, 1);
}

TEST(Benchmark, ProducesOneRowPerK)
{
    const auto table = allocation_benchmark(EstimationMethod::LS, SystemConfig{}, 2, 0.001);
    EXPECT_EQ(table.num_rows(), 9u);
    EXPECT_EQ(table.rows().front().front(), "2");
    EXPECT_EQ(table.rows().back().front(), "10");
}
