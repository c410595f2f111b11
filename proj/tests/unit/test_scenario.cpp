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


#include "mimo_pilot/config.hpp"
#include "mimo_pilot/scenario.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <sstream>

using namespace mimo_pilot;

namespace
{
const std::string kThreeUser = std::string(MIMO_PILOT_DATA_DIR) + "/three_user_betas.csv";
}

TEST(Config, DecibelConversions)
{
    EXPECT_DOUBLE_EQ(db_to_linear(40.0), 1.0e4);
    EXPECT_DOUBLE_EQ(db_to_linear(0.0), 1.0);
    EXPECT_NEAR(linear_to_db(3000.0 / 3.0), 30.0, 1e-12);
}

TEST(Config, DefaultsAreValidAndDerivedBoundsFollow)
{
    SystemConfig cfg;
    EXPECT_NO_THROW(cfg.validate());
    EXPECT_EQ(cfg.pilot_length(), cfg.K);
    EXPECT_DOUBLE_EQ(cfg.rho_min(), 500.0);
    EXPECT_DOUBLE_EQ(cfg.rho_max(), 3000.0);
    EXPECT_DOUBLE_EQ(cfg.rho_eppa(), 1000.0);
}

TEST(Config, RejectsOutOfRangeValues)
{
    const auto rejects = [](auto mutate)
    {
        SystemConfig cfg;
        mutate(cfg);
        EXPECT_THROW(cfg.validate(), std::invalid_argument);
    };
    rejects([](SystemConfig &c) { c.mu = 1.4; });
    rejects([](SystemConfig &c) { c.mu = 5.6; }); // (K+1)/2 = 5.5
    rejects([](SystemConfig &c) { c.Gamma = 2; });
    rejects([](SystemConfig &c) { c.K = 1; });
    rejects([](SystemConfig &c) { c.M = 1; });
    rejects([](SystemConfig &c) { c.L = 8; });
    rejects([](SystemConfig &c) { c.tau = 5; });
    rejects([](SystemConfig &c) { c.P_total = 0.0; });
    rejects([](SystemConfig &c) { c.slot_fraction = 1.5; });

    SystemConfig edge;
    edge.K = 3;
    edge.mu = 2.0;
    EXPECT_NO_THROW(edge.validate());
}

TEST(Config, ParsesKeyValueFormat)
{
    std::istringstream in("# comment\nK = 3\nP_total_dB = 30   # trailing\nmu=1.5\n\nrho_u_dB = 10\nseed = 42\n");
    const auto cfg = parse_config(in);
    EXPECT_EQ(cfg.K, 3);
    EXPECT_NEAR(cfg.P_total, 1000.0, 1e-9);
    EXPECT_DOUBLE_EQ(cfg.mu, 1.5);
    EXPECT_NEAR(cfg.rho_u, 10.0, 1e-12);
    EXPECT_EQ(cfg.seed, 42u);
    EXPECT_EQ(cfg.L, 7);
}

TEST(Config, ParseErrors)
{
    std::istringstream unknown("antennas = 4\n");
    EXPECT_THROW(parse_config(unknown), std::invalid_argument);
    std::istringstream no_eq("K 3\n");
    EXPECT_THROW(parse_config(no_eq), std::invalid_argument);
    std::istringstream bad_num("K = three\n");
    EXPECT_THROW(parse_config(bad_num), std::invalid_argument);
    std::istringstream negative_seed("seed = -1\n");
    EXPECT_THROW(parse_config(negative_seed), std::invalid_argument);
    EXPECT_THROW(load_config("/nonexistent/file.cfg"), std::runtime_error);
}

TEST(Config, SampleConfigFilesLoad)
{
    const auto def = load_config(std::string(MIMO_PILOT_DATA_DIR) + "/default.cfg");
    EXPECT_NO_THROW(def.validate());
    EXPECT_NEAR(def.P_total, 1e4, 1e-8);
    EXPECT_NEAR(def.rho_u, 100.0, 1e-10);
    EXPECT_EQ(def.K, SystemConfig{}.K);
    const auto three_user = load_config(std::string(MIMO_PILOT_DATA_DIR) + "/three_user.cfg");
    EXPECT_NO_THROW(three_user.validate());
    EXPECT_DOUBLE_EQ(three_user.P_total / three_user.K, 1000.0);
}

TEST(Geometry, HexagonMembership)
{
    const Point c{0.0, 0.0};
    const double r = 500.0;
    EXPECT_TRUE(inside_hexagon({0.0, r}, c, r));            // vertex
    EXPECT_FALSE(inside_hexagon({0.0, r + 1.0}, c, r));
    EXPECT_TRUE(inside_hexagon({std::numbers::sqrt3 * r / 2.0, 0.0}, c, r)); // edge midpoint
    EXPECT_FALSE(inside_hexagon({std::numbers::sqrt3 * r / 2.0 + 1.0, 0.0}, c, r));
    EXPECT_FALSE(inside_hexagon({400.0, 300.0}, c, r));
}

TEST(Geometry, LayoutDistancesScaleWithReuse)
{
    for (const int gamma : {1, 3, 7})
    {
        SystemConfig cfg;
        cfg.Gamma = gamma;
        const auto layout = build_layout(cfg);
        ASSERT_EQ(layout.num_cells(), 7);
        const double expected = cfg.r * std::sqrt(3.0 * gamma);
        for (int l = 1; l < 7; ++l)
            EXPECT_NEAR(distance(layout.centers[0], layout.centers[l]), expected, 1e-9);
        // Adjacent co-channel cells are one reuse distance apart as well.
        EXPECT_NEAR(distance(layout.centers[1], layout.centers[2]), expected, 1e-9);
    }
    EXPECT_NEAR(reuse_distance(500.0, 1), 500.0 * std::sqrt(3.0), 1e-12);

    SystemConfig bad;
    bad.Gamma = 4;
    EXPECT_THROW(build_layout(bad), std::invalid_argument);
}

TEST(Geometry, Gamma1CellsTileWithoutOverlap)
{
    SystemConfig cfg;
    const auto layout = build_layout(cfg);
    // Points just inside one cell's shared edge are outside its neighbour.
    const Point mid{(layout.centers[0].x + layout.centers[1].x) / 2.0,
                    (layout.centers[0].y + layout.centers[1].y) / 2.0};
    const Point toward0{mid.x - 1.0, mid.y};
    EXPECT_TRUE(inside_hexagon(toward0, layout.centers[0], cfg.r, 0.0));
    EXPECT_FALSE(inside_hexagon(toward0, layout.centers[1], cfg.r, 0.0));
}

TEST(Geometry, DroppedUsersAreUniformInTheirCell)
{
    SystemConfig cfg;
    cfg.L = 1;
    cfg.K = 1000;
    const auto layout = build_layout(cfg);
    double sx = 0.0;
    double sy = 0.0;
    double sxx = 0.0;
    int n = 0;
    for (int drop = 0; drop < 100; ++drop)
    {
        auto rng = seed_schedule(3, drop, Purpose::placement);
        const auto pos = drop_users(cfg, layout, rng);
        for (int k = 0; k < cfg.K; ++k)
        {
            ASSERT_TRUE(inside_hexagon(pos(0, k), layout.centers[0], cfg.r, 0.0));
            sx += pos(0, k).x;
            sy += pos(0, k).y;
            sxx += pos(0, k).x * pos(0, k).x;
            ++n;
        }
    }
    // Uniform regular hexagon of circumradius r: E[x^2] = E[y^2] = 5 r^2 / 24.
    const double var = 5.0 * cfg.r * cfg.r / 24.0;
    const double se = std::sqrt(var / n);
    EXPECT_LT(std::abs(sx / n), 3.0 * se);
    EXPECT_LT(std::abs(sy / n), 3.0 * se);
    EXPECT_NEAR(sxx / n, var, 0.02 * var);
}

TEST(LargeScale, CoefficientModel)
{
    EXPECT_DOUBLE_EQ(large_scale_coefficient(200.0, 1.0, 200.0, 3.8), 0.5);
    EXPECT_DOUBLE_EQ(large_scale_coefficient(0.0, 2.0, 200.0, 3.8), 2.0);
    const double b = large_scale_coefficient(400.0, 1.0, 200.0, 2.0);
    EXPECT_DOUBLE_EQ(b, 1.0 / 5.0);
    EXPECT_GT(large_scale_coefficient(300.0, 1.0, 200.0, 3.8), large_scale_coefficient(301.0, 1.0, 200.0, 3.8));
}

TEST(LargeScale, ShadowingHasConfiguredSpread)
{
    SystemConfig cfg;
    const auto layout = build_layout(cfg);
    double s = 0.0;
    double ss = 0.0;
    int n = 0;
    for (int drop = 0; drop < 40; ++drop)
    {
        const auto real = generate_drop(cfg, layout, drop);
        for (const double z : real.shadowing)
        {
            const double db = 10.0 * std::log10(z);
            s += db;
            ss += db * db;
            ++n;
        }
    }
    const double mean = s / n;
    const double sd = std::sqrt(ss / n - mean * mean);
    EXPECT_LT(std::abs(mean), 3.0 * cfg.sigma_sh / std::sqrt(n));
    EXPECT_NEAR(sd, cfg.sigma_sh, 0.05 * cfg.sigma_sh);
}

TEST(LargeScale, DropsAreReproducibleAndConsistent)
{
    SystemConfig cfg;
    const auto layout = build_layout(cfg);
    const auto a = generate_drop(cfg, layout, 5);
    const auto b = generate_drop(cfg, layout, 5);
    const auto c = generate_drop(cfg, layout, 6);
    EXPECT_TRUE(a == b);
    EXPECT_FALSE(a == c);
    for (int j = 0; j < 7; ++j)
        for (int l = 0; l < 7; ++l)
            for (int k = 0; k < cfg.K; ++k)
            {
                const auto idx = a.index(j, l, k);
                EXPECT_GT(a(j, l, k), 0.0);
                EXPECT_DOUBLE_EQ(a(j, l, k),
                                 large_scale_coefficient(a.distances[idx], a.shadowing[idx], cfg.r_min, cfg.gamma_pl));
                EXPECT_NEAR(a.distances[idx], distance(a.user_positions(l, k), layout.centers[j]), 1e-9);
            }
    const auto slice = a.slice(2);
    EXPECT_DOUBLE_EQ(slice(4, 1), a(2, 4, 1));
}

TEST(Fixture, ThreeUserFixtureLoads)
{
    const auto real = load_beta_fixture(kThreeUser);
    EXPECT_EQ(real.num_cells(), 7);
    EXPECT_EQ(real.num_users(), 3);
    const auto beta = real.slice(0);
    EXPECT_DOUBLE_EQ(beta(0, 1), 1.2899);
    EXPECT_DOUBLE_EQ(beta(5, 1), 0.0003);
    EXPECT_DOUBLE_EQ(beta(6, 2), 0.0014);
}

TEST(Fixture, RoundTrip)
{
    const auto beta = load_beta_fixture(kThreeUser).slice(0);
    std::stringstream ss;
    write_beta_fixture(ss, beta);
    EXPECT_TRUE(parse_beta_fixture(ss).slice(0) == beta);
}

TEST(Fixture, RejectsMalformedInput)
{
    const auto parse = [](const std::string &text)
    {
        std::istringstream in(text);
        return parse_beta_fixture(in);
    };
    EXPECT_THROW(parse(""), std::runtime_error);
    EXPECT_THROW(parse("user_1,user_3\n0.1,0.2\n"), std::runtime_error);
    EXPECT_THROW(parse("user_1,user_2\n0.1\n"), std::runtime_error);
    EXPECT_THROW(parse("user_1,user_2\n0.1,-0.2\n"), std::runtime_error);
    EXPECT_THROW(parse("user_1,user_2\n"), std::runtime_error);
    EXPECT_THROW(load_beta_fixture("/nonexistent.csv"), std::runtime_error);
    EXPECT_NO_THROW(parse("user_1,user_2\n0.1,0.2\n\n"));
}
