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

#ifndef MIMO_PILOT_CONFIG_HPP
#define MIMO_PILOT_CONFIG_HPP

#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>

namespace mimo_pilot
{

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double lin) { return 10.0 * std::log10(lin); }

// All powers are linear and normalized to unit noise variance.
struct SystemConfig
{
    int L = 7;                       // Cells: target plus co-channel interferers
    int K = 10;                      // Users per cell
    int M = 200;                     // BS antennas
    int tau = 0;                     // Pilot length in symbols, 0 means tau = K
    double P_total = 1.0e4;          // Pilot power budget per cell (40 dB)
    double mu = 3.0;                 // Max-power multiplier, rho_max = mu * P_total / K
    double rho_u = 100.0;            // Per-user data power (20 dB)
    int Gamma = 1;                   // Frequency reuse factor, one of 1, 3, 7
    double r = 500.0;                // Cell radius in m
    double sigma_sh = 8.0;           // Shadowing std in dB
    double gamma_pl = 3.8;           // Path loss exponent
    double r_min = 200.0;            // Reference distance in m
    double B = 2.0e7;                // Bandwidth in Hz
    double slot_fraction = 3.0 / 7.0; // (T_s - T_p) / T_s
    double Tu = 66.7;                // Useful symbol duration
    double To = 71.4;                // OFDM symbol interval
    std::uint64_t seed = 1;

    int pilot_length() const { return tau == 0 ? K : tau; }
    double rho_min() const { return P_total / (2.0 * K); }
    double rho_max() const { return mu * P_total / K; }
    double rho_eppa() const { return P_total / K; }

    // Bounds on mu for a given K. Requires K >= 2 for a nonempty range.
    static double mu_lower() { return 1.5; }
    static double mu_upper(int K) { return 0.5 * (K + 1); }

    // Throws std::invalid_argument on any violated invariant.
    void validate() const
    {
        auto fail = [](const std::string &msg)
        { throw std::invalid_argument("configuration error: " + msg); };

        if (L < 1 || L > 7)
            fail("L must be in [1, 7] (target cell plus first co-channel ring)");
        if (K < 2)
            fail("K must be at least 2");
        if (M < 2)
            fail("M must be at least 2");
        if (pilot_length() < K)
            fail("tau must be >= K");
        if (!(P_total > 0.0) || !std::isfinite(P_total))
            fail("P_total must be positive");
        if (!(rho_u > 0.0) || !std::isfinite(rho_u))
            fail("rho_u must be positive");
        if (Gamma != 1 && Gamma != 3 && Gamma != 7)
            fail("Gamma must be one of 1, 3, 7");
        if (mu < mu_lower() || mu > mu_upper(K))
            fail("mu must lie in [3/2, (K+1)/2]");
        if (!(r > 0.0) || !(r_min > 0.0))
            fail("r and r_min must be positive");
        if (sigma_sh < 0.0)
            fail("sigma_sh cannot be negative");
        if (!(gamma_pl > 0.0))
            fail("gamma_pl must be positive");
        if (!(B > 0.0) || !(Tu > 0.0) || !(To > 0.0))
            fail("B, Tu and To must be positive");
        if (!(slot_fraction > 0.0) || slot_fraction > 1.0)
            fail("slot_fraction must be in (0, 1]");
        // Implied by the mu range, kept as a direct check on the derived box.
        if ((K - 1) * rho_min() + rho_max() > P_total * (1.0 + 1e-12))
            fail("(K-1) rho_min + rho_max exceeds P_total");
    }
};

namespace detail
{
inline std::string trim(std::string_view s)
{
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos)
        return {};
    const auto last = s.find_last_not_of(" \t\r");
    return std::string(s.substr(first, last - first + 1));
}

inline double parse_double(const std::string &key, const std::string &value)
{
    std::size_t pos = 0;
    double out = 0.0;
    try
    {
        out = std::stod(value, &pos);
    }
    catch (const std::exception &)
    {
        pos = 0;
    }
    if (pos == 0 || pos != value.size())
        throw std::invalid_argument("configuration error: bad number for '" + key + "': " + value);
    return out;
}

inline long long parse_int(const std::string &key, const std::string &value)
{
    std::size_t pos = 0;
    long long out = 0;
    try
    {
        out = std::stoll(value, &pos);
    }
    catch (const std::exception &)
    {
        pos = 0;
    }
    if (pos == 0 || pos != value.size())
        throw std::invalid_argument("configuration error: bad integer for '" + key + "': " + value);
    return out;
}
} // namespace detail

// Applies one key=value assignment. Keys mirror the SystemConfig field names;
// P_total_dB and rho_u_dB are accepted as dB spellings of the two powers.
inline void apply_config_entry(SystemConfig &cfg, const std::string &key, const std::string &value)
{
    using detail::parse_double;
    using detail::parse_int;

    if (key == "L")
        cfg.L = static_cast<int>(parse_int(key, value));
    else if (key == "K")
        cfg.K = static_cast<int>(parse_int(key, value));
    else if (key == "M")
        cfg.M = static_cast<int>(parse_int(key, value));
    else if (key == "tau")
        cfg.tau = static_cast<int>(parse_int(key, value));
    else if (key == "P_total")
        cfg.P_total = parse_double(key, value);
    else if (key == "P_total_dB")
        cfg.P_total = db_to_linear(parse_double(key, value));
    else if (key == "mu")
        cfg.mu = parse_double(key, value);
    else if (key == "rho_u")
        cfg.rho_u = parse_double(key, value);
    else if (key == "rho_u_dB")
        cfg.rho_u = db_to_linear(parse_double(key, value));
    else if (key == "Gamma")
        cfg.Gamma = static_cast<int>(parse_int(key, value));
    else if (key == "r")
        cfg.r = parse_double(key, value);
    else if (key == "sigma_sh")
        cfg.sigma_sh = parse_double(key, value);
    else if (key == "gamma_pl")
        cfg.gamma_pl = parse_double(key, value);
    else if (key == "r_min")
        cfg.r_min = parse_double(key, value);
    else if (key == "B")
        cfg.B = parse_double(key, value);
    else if (key == "slot_fraction")
        cfg.slot_fraction = parse_double(key, value);
    else if (key == "Tu")
        cfg.Tu = parse_double(key, value);
    else if (key == "To")
        cfg.To = parse_double(key, value);
    else if (key == "seed")
    {
        const long long s = parse_int(key, value);
        if (s < 0)
            throw std::invalid_argument("configuration error: seed cannot be negative");
        cfg.seed = static_cast<std::uint64_t>(s);
    }
    else
        throw std::invalid_argument("configuration error: unknown key '" + key + "'");
}

// Parses the key=value config format. '#' starts a comment, blank lines are skipped.
// Unset keys keep their defaults. The result is not validated.
inline SystemConfig parse_config(std::istream &in)
{
    SystemConfig cfg;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line))
    {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos)
            line.erase(hash);
        const std::string body = detail::trim(line);
        if (body.empty())
            continue;
        const auto eq = body.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("configuration error: line " + std::to_string(line_no) + " has no '='");
        apply_config_entry(cfg, detail::trim(std::string_view(body).substr(0, eq)),
                           detail::trim(std::string_view(body).substr(eq + 1)));
    }
    return cfg;
}

inline SystemConfig load_config(const std::string &path)
{
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open config file: " + path);
    return parse_config(in);
}

} // namespace mimo_pilot

#endif
