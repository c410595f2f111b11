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

#ifndef MIMO_PILOT_SCENARIO_HPP
#define MIMO_PILOT_SCENARIO_HPP

#include "config.hpp"
#include "csv.hpp"
#include "matrix.hpp"
#include "random.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace mimo_pilot
{

struct Point
{
    double x = 0.0;
    double y = 0.0;

    bool operator==(const Point &) const = default;
};

inline double distance(const Point &a, const Point &b) { return std::hypot(a.x - b.x, a.y - b.y); }

// Regular hexagon of circumradius r with vertices at 30 + 60 i degrees. Its
// six neighbours in a reuse-1 tiling sit at 60 i degrees, distance r sqrt(3).
inline bool inside_hexagon(const Point &p, const Point &center, double r, double slack = 1e-9)
{
    const double dx = std::abs(p.x - center.x);
    const double dy = std::abs(p.y - center.y);
    const double half_width = 0.5 * std::numbers::sqrt3 * r;
    return dx <= half_width + slack && dy + dx / std::numbers::sqrt3 <= r + slack;
}

struct CellLayout
{
    std::vector<Point> centers; // centers[0] is the target cell
    double radius = 0.0;
    int target_index = 0;

    int num_cells() const { return static_cast<int>(centers.size()); }
};

// Co-channel distance of the first interfering tier for reuse factor Gamma.
inline double reuse_distance(double r, int Gamma) { return r * std::sqrt(3.0 * Gamma); }

inline CellLayout build_layout(const SystemConfig &cfg)
{
    if (cfg.Gamma != 1 && cfg.Gamma != 3 && cfg.Gamma != 7)
        throw std::invalid_argument("configuration error: unsupported reuse factor " + std::to_string(cfg.Gamma));
    if (cfg.L < 1 || cfg.L > 7)
        throw std::invalid_argument("configuration error: L must be in [1, 7]");

    CellLayout layout;
    layout.radius = cfg.r;
    layout.centers.push_back({0.0, 0.0});
    const double D = reuse_distance(cfg.r, cfg.Gamma);
    for (int i = 0; i + 1 < cfg.L; ++i)
    {
        const double angle = i * std::numbers::pi / 3.0;
        layout.centers.push_back({D * std::cos(angle), D * std::sin(angle)});
    }
    return layout;
}

// Uniform user positions inside each cell's hexagon, by rejection from the
// bounding box. Result is [L][K].
inline Matrix<Point> drop_users(const SystemConfig &cfg, const CellLayout &layout, RngStream &rng)
{
    const int L = layout.num_cells();
    Matrix<Point> positions(L, cfg.K);
    const double r = layout.radius;
    const double half_width = 0.5 * std::numbers::sqrt3 * r;
    for (int l = 0; l < L; ++l)
    {
        const Point &c = layout.centers[l];
        for (int k = 0; k < cfg.K; ++k)
        {
            Point p;
            do
            {
                p.x = c.x + (2.0 * rng.uniform() - 1.0) * half_width;
                p.y = c.y + (2.0 * rng.uniform() - 1.0) * r;
            } while (!inside_hexagon(p, c, r, 0.0));
            positions(l, k) = p;
        }
    }
    return positions;
}

// Path loss with shadowing: z / (1 + (d / r_min)^gamma).
inline double large_scale_coefficient(double d, double z, double r_min, double gamma_pl)
{
    return z / (1.0 + std::pow(d / r_min, gamma_pl));
}

// beta[j][l][k] for BS j, cell l, user k. Fixtures carry only the target BS
// slice (num_bs() == 1).
class LargeScaleRealization
{
  public:
    LargeScaleRealization() = default;
    LargeScaleRealization(int num_bs, int L, int K)
        : num_bs_(num_bs), L_(L), K_(K),
          beta_(static_cast<std::size_t>(num_bs) * L * K, 0.0) {}

    int num_bs() const { return num_bs_; }
    int num_cells() const { return L_; }
    int num_users() const { return K_; }

    double &operator()(int j, int l, int k) { return beta_[index(j, l, k)]; }
    double operator()(int j, int l, int k) const { return beta_[index(j, l, k)]; }

    // Coefficients seen by BS j as an [L][K] matrix.
    BetaMatrix slice(int j = 0) const
    {
        BetaMatrix out(L_, K_);
        for (int l = 0; l < L_; ++l)
            for (int k = 0; k < K_; ++k)
                out(l, k) = (*this)(j, l, k);
        return out;
    }

    static LargeScaleRealization from_slice(const BetaMatrix &beta)
    {
        LargeScaleRealization out(1, static_cast<int>(beta.rows()), static_cast<int>(beta.cols()));
        for (int l = 0; l < out.L_; ++l)
            for (int k = 0; k < out.K_; ++k)
                out(0, l, k) = beta(l, k);
        return out;
    }

    // Geometry behind a generated realization; empty for fixtures.
    Matrix<Point> user_positions;
    std::vector<double> distances; // same indexing as beta
    std::vector<double> shadowing; // linear z, same indexing as beta

    std::size_t index(int j, int l, int k) const
    {
        return (static_cast<std::size_t>(j) * L_ + l) * K_ + k;
    }

    bool operator==(const LargeScaleRealization &) const = default;

  private:
    int num_bs_ = 0;
    int L_ = 0;
    int K_ = 0;
    std::vector<double> beta_;
};

inline LargeScaleRealization large_scale(const SystemConfig &cfg, const CellLayout &layout,
                                         const Matrix<Point> &positions, RngStream &rng)
{
    const int L = layout.num_cells();
    const int K = static_cast<int>(positions.cols());
    if (static_cast<int>(positions.rows()) != L)
        throw std::invalid_argument("positions do not match the layout");

    LargeScaleRealization out(L, L, K);
    out.user_positions = positions;
    out.distances.resize(static_cast<std::size_t>(L) * L * K);
    out.shadowing.resize(out.distances.size());
    for (int j = 0; j < L; ++j)
        for (int l = 0; l < L; ++l)
            for (int k = 0; k < K; ++k)
            {
                const std::size_t idx = out.index(j, l, k);
                const double d = distance(positions(l, k), layout.centers[j]);
                const double z = std::pow(10.0, cfg.sigma_sh * rng.normal() / 10.0);
                out.distances[idx] = d;
                out.shadowing[idx] = z;
                out(j, l, k) = large_scale_coefficient(d, z, cfg.r_min, cfg.gamma_pl);
            }
    return out;
}

// One drop: layout-relative positions and shadowing from dedicated streams.
inline LargeScaleRealization generate_drop(const SystemConfig &cfg, const CellLayout &layout,
                                           std::uint64_t drop)
{
    auto place = seed_schedule(cfg.seed, drop, Purpose::placement);
    auto shadow = seed_schedule(cfg.seed, drop, Purpose::shadowing);
    const auto positions = drop_users(cfg, layout, place);
    return large_scale(cfg, layout, positions, shadow);
}

// Fixture CSV: header user_1..user_K, then one row per cell l holding the
// coefficients beta[j][l][k] seen by the target BS j.
inline LargeScaleRealization parse_beta_fixture(std::istream &in)
{
    std::string line;
    if (!std::getline(in, line) || detail::trim(line).empty())
        throw std::runtime_error("beta fixture: missing header");
    const auto header = split_csv_line(detail::trim(line));
    const int K = static_cast<int>(header.size());
    for (int k = 0; k < K; ++k)
        if (detail::trim(header[k]) != "user_" + std::to_string(k + 1))
            throw std::runtime_error("beta fixture: header must be user_1..user_K");

    std::vector<std::vector<double>> rows;
    while (std::getline(in, line))
    {
        const std::string body = detail::trim(line);
        if (body.empty())
            continue;
        const auto fields = split_csv_line(body);
        if (static_cast<int>(fields.size()) != K)
            throw std::runtime_error("beta fixture: row " + std::to_string(rows.size() + 1) + " has " +
                                     std::to_string(fields.size()) + " columns, expected " + std::to_string(K));
        std::vector<double> row;
        for (const auto &f : fields)
        {
            const double v = detail::parse_double("beta", detail::trim(f));
            if (!(v > 0.0) || !std::isfinite(v))
                throw std::runtime_error("beta fixture: coefficients must be positive and finite");
            row.push_back(v);
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty())
        throw std::runtime_error("beta fixture: no data rows");

    BetaMatrix beta(rows.size(), K);
    for (std::size_t l = 0; l < rows.size(); ++l)
        for (int k = 0; k < K; ++k)
            beta(l, k) = rows[l][k];
    return LargeScaleRealization::from_slice(beta);
}

inline LargeScaleRealization load_beta_fixture(const std::string &path)
{
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open beta fixture: " + path);
    try
    {
        return parse_beta_fixture(in);
    }
    catch (const std::invalid_argument &e)
    {
        throw std::runtime_error(std::string("beta fixture: ") + e.what());
    }
}

inline void write_beta_fixture(std::ostream &out, const BetaMatrix &beta)
{
    for (std::size_t k = 0; k < beta.cols(); ++k)
        out << (k ? "," : "") << "user_" << k + 1;
    out << '\n';
    for (std::size_t l = 0; l < beta.rows(); ++l)
    {
        for (std::size_t k = 0; k < beta.cols(); ++k)
            out << (k ? "," : "") << format_double(beta(l, k));
        out << '\n';
    }
}

inline void save_beta_fixture(const std::string &path, const BetaMatrix &beta)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot write beta fixture: " + path);
    write_beta_fixture(out, beta);
}

} // namespace mimo_pilot

#endif
