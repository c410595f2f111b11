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


#ifndef MIMO_PILOT_HARNESS_HPP
#define MIMO_PILOT_HARNESS_HPP

#include "airlink.hpp"
#include "config.hpp"
#include "csv.hpp"
#include "estimators.hpp"
#include "matrix.hpp"
#include "metrics.hpp"
#include "ppa.hpp"
#include "random.hpp"
#include "refsolver.hpp"
#include "scenario.hpp"
#include "stats.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cctype>
#include <cmath>
#include <exception>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <utility>
#include <vector>

namespace mimo_pilot
{

// ---------- worker pool ----------

// Runs f(0) .. f(n-1) on up to `jobs` threads. Every task writes only its own
// output slot, so results do not depend on the thread count. The exception of
// the lowest failing index is rethrown.
template <typename F>
void parallel_for(std::size_t n, int jobs, F &&f)
{
    if (jobs <= 1 || n <= 1)
    {
        for (std::size_t i = 0; i < n; ++i)
            f(i);
        return;
    }
    std::vector<std::exception_ptr> errors(n);
    std::atomic<std::size_t> next{0};
    const auto worker = [&]
    {
        for (std::size_t i = next++; i < n; i = next++)
        {
            try
            {
                f(i);
            }
            catch (...)
            {
                errors[i] = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    const auto count = std::min<std::size_t>(static_cast<std::size_t>(jobs), n);
    for (std::size_t t = 0; t < count; ++t)
        pool.emplace_back(worker);
    for (auto &t : pool)
        t.join();
    for (const auto &e : errors)
        if (e)
            std::rethrow_exception(e);
}

// ---------- plan ----------

enum class ExperimentId
{
    fig3,
    fig4a,
    fig4b,
    fig5a,
    fig5b,
    validate,
};

inline std::string_view to_string(ExperimentId id)
{
    switch (id)
    {
    case ExperimentId::fig3: return "fig3";
    case ExperimentId::fig4a: return "fig4a";
    case ExperimentId::fig4b: return "fig4b";
    case ExperimentId::fig5a: return "fig5a";
    case ExperimentId::fig5b: return "fig5b";
    case ExperimentId::validate: return "validate";
    }
    return "?";
}

// Accepts "3", "fig3", "4a", "FIG4A", "validate", ...
inline std::optional<ExperimentId> parse_experiment_id(std::string_view s)
{
    std::string key(s);
    for (auto &c : key)
        c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (key.rfind("fig", 0) == 0)
        key = key.substr(3);
    if (key == "3") return ExperimentId::fig3;
    if (key == "4a") return ExperimentId::fig4a;
    if (key == "4b") return ExperimentId::fig4b;
    if (key == "5a") return ExperimentId::fig5a;
    if (key == "5b") return ExperimentId::fig5b;
    if (key == "validate") return ExperimentId::validate;
    return std::nullopt;
}

enum class Scheme
{
    ppa,
    eppa,
    ref,
};

inline std::string_view to_string(Scheme s)
{
    switch (s)
    {
    case Scheme::ppa: return "PPA";
    case Scheme::eppa: return "EPPA";
    case Scheme::ref: return "REF";
    }
    return "?";
}

inline std::optional<Scheme> parse_scheme(std::string_view s)
{
    std::string key(s);
    for (auto &c : key)
        c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (key == "ppa") return Scheme::ppa;
    if (key == "eppa") return Scheme::eppa;
    if (key == "ref") return Scheme::ref;
    return std::nullopt;
}

struct ExperimentPlan
{
    ExperimentId id = ExperimentId::fig3;
    std::vector<int> M_grid;         // fig3, fig5a, validate
    std::vector<double> P_grid_db;   // fig4b
    std::vector<int> gammas{1};
    int n_large = 20;
    int n_small = 50;
    int fixed_M = 200;               // fig4b, fig5b
    std::vector<Scheme> schemes{Scheme::ppa, Scheme::eppa};
    std::vector<EstimationMethod> methods{EstimationMethod::LS, EstimationMethod::MMSE};

    void validate() const
    {
        const auto fail = [](const std::string &m) { throw std::invalid_argument("plan error: " + m); };
        if (n_large < 1 || n_small < 1)
            fail("counts must be at least 1");
        if (gammas.empty() || schemes.empty() || methods.empty())
            fail("gamma set, schemes and methods must be nonempty");
        if (!std::is_sorted(gammas.begin(), gammas.end()))
            fail("gamma set must be sorted");
        for (const int g : gammas)
            if (g != 1 && g != 3 && g != 7)
                fail("gamma values must be 1, 3 or 7");
        const bool needs_m = id == ExperimentId::fig3 || id == ExperimentId::fig5a || id == ExperimentId::validate;
        if (needs_m && M_grid.empty())
            fail("M grid must be nonempty");
        if (!std::is_sorted(M_grid.begin(), M_grid.end()))
            fail("M grid must be sorted");
        for (const int m : M_grid)
            if (m < 2)
                fail("M grid values must be at least 2");
        if (id == ExperimentId::fig4b && P_grid_db.empty())
            fail("P grid must be nonempty");
        if (!std::is_sorted(P_grid_db.begin(), P_grid_db.end()))
            fail("P grid must be sorted");
        if (fixed_M < 2)
            fail("fixed M must be at least 2");
    }
};

// Desk-scale defaults unless paper_scale is set. Monte-Carlo experiments keep
// small drop counts; closed-form experiments are cheap and use 100 drops.
inline ExperimentPlan default_plan(ExperimentId id, bool paper_scale = false)
{
    ExperimentPlan plan;
    plan.id = id;
    const std::vector<int> m_grid{8, 16, 32, 64, 128, 256, 512};
    switch (id)
    {
    case ExperimentId::fig3:
        plan.M_grid = m_grid;
        plan.gammas = {1, 3, 7};
        plan.n_large = paper_scale ? 100 : 20;
        plan.n_small = paper_scale ? 100 : 50;
        break;
    case ExperimentId::fig4a:
    case ExperimentId::fig5b:
        plan.gammas = {1, 3, 7};
        plan.n_large = 100;
        plan.n_small = 1;
        break;
    case ExperimentId::fig4b:
        plan.P_grid_db = {0, 10, 20, 30, 40, 50, 60, 70, 80, 90, 100};
        plan.gammas = {1, 3, 7};
        plan.n_large = 100;
        plan.n_small = 1;
        break;
    case ExperimentId::fig5a:
        plan.M_grid = m_grid;
        plan.gammas = {1, 3, 7};
        plan.n_large = 100;
        plan.n_small = 1;
        break;
    case ExperimentId::validate:
        plan.M_grid = {8};
        plan.gammas = {1};
        plan.n_large = 1;
        plan.n_small = paper_scale ? 10000 : 2000;
        break;
    }
    return plan;
}

// ---------- allocations ----------

// Target-cell allocation with every other cell at P / K.
inline std::vector<double> target_allocation(Scheme scheme, EstimationMethod method, const InterferenceProfile &profile,
                                             const PowerBox &box, int M)
{
    switch (scheme)
    {
    case Scheme::ppa:
        return ppa_allocate(method, profile, box).rho;
    case Scheme::eppa:
        return std::vector<double>(profile.users(), box.P / profile.users());
    case Scheme::ref:
        return solve_allocation(method, profile, box, M).rho;
    }
    throw std::logic_error("unknown scheme");
}

inline PowerMatrix full_powers(std::span<const double> target, int L, double P)
{
    const int K = static_cast<int>(target.size());
    PowerMatrix rho = eppa_powers(L, K, P);
    for (int k = 0; k < K; ++k)
        rho(0, k) = target[k];
    return rho;
}

// ---------- Monte-Carlo primitives ----------

struct MonteCarloResult
{
    std::vector<RunningStats> rcee;          // per target user, over trials
    std::vector<SinrMoments> moments;        // per target user, filled when requested
    std::vector<RunningStats> sinr_batches;  // per target user, SINR of each trial batch
};

// Small-scale trials at fixed large-scale coefficients and pilot powers.
// Trial t draws channels from (seed, trial_id(stream, t), channel) and noise
// from (seed, trial_id(stream, t), pilot_noise).
inline MonteCarloResult monte_carlo(EstimationMethod method, const BetaMatrix &beta, const PowerMatrix &rho, int M,
                                    int trials, std::uint64_t seed, std::uint64_t stream, bool with_sinr = false,
                                    double rho_u = 1.0, int batches = 10)
{
    if (trials < 2)
        throw std::invalid_argument("monte_carlo: need at least 2 trials");
    if (stream > 0xffffffffu)
        throw std::invalid_argument("monte_carlo: stream must be a 32-bit index, not a packed trial id");
    const int L = static_cast<int>(beta.rows());
    const int K = static_cast<int>(beta.cols());
    MonteCarloResult out;
    out.rcee.resize(K);

    std::vector<SinrMomentAccumulator> total;
    std::vector<std::vector<SinrMomentAccumulator>> batch;
    if (with_sinr)
    {
        batches = std::clamp(batches, 1, trials / 2);
        for (int k = 0; k < K; ++k)
        {
            total.emplace_back(L, K, k);
            batch.emplace_back();
            for (int b = 0; b < batches; ++b)
                batch.back().emplace_back(L, K, k);
        }
    }

    for (int t = 0; t < trials; ++t)
    {
        auto chan_rng = seed_schedule(seed, trial_id(stream, t), Purpose::channel);
        auto noise_rng = seed_schedule(seed, trial_id(stream, t), Purpose::pilot_noise);
        const auto ch = sample_channels(beta, M, chan_rng);
        const auto obs = pilot_phase(ch, rho, K, noise_rng);
        const auto est = estimate(method, obs, rho, beta);
        for (int k = 0; k < K; ++k)
        {
            out.rcee[k].add(rcee_sample(ch.vec(0, k), est.h_hat[k]));
            if (with_sinr)
            {
                total[k].add(ch, est.h_hat[k]);
                batch[k][static_cast<std::size_t>(t) * batches / trials].add(ch, est.h_hat[k]);
            }
        }
    }
    if (with_sinr)
    {
        out.sinr_batches.resize(K);
        for (int k = 0; k < K; ++k)
        {
            out.moments.push_back(total[k].moments());
            for (const auto &acc : batch[k])
                out.sinr_batches[k].add(acc.moments().sinr(rho_u));
        }
    }
    return out;
}

// ---------- report ----------

struct SeriesPoint
{
    std::string quantity; // validate only
    double x = 0.0;       // M or P in dB
    Scheme scheme = Scheme::ppa;
    EstimationMethod method = EstimationMethod::LS;
    int gamma = 1;
    int user = -1;        // validate only
    std::vector<double> values;
};

struct CdfSeries
{
    Scheme scheme = Scheme::ppa;
    EstimationMethod method = EstimationMethod::LS;
    int gamma = 1;
    EmpiricalCdf cdf;
};

struct MetricReport
{
    ExperimentId id = ExperimentId::fig3;
    std::vector<std::string> value_columns;
    std::vector<SeriesPoint> points;
    std::vector<CdfSeries> cdfs;

    std::size_t column(std::string_view name) const
    {
        for (std::size_t i = 0; i < value_columns.size(); ++i)
            if (value_columns[i] == name)
                return i;
        throw std::out_of_range("report has no column " + std::string(name));
    }

    const SeriesPoint &point(double x, Scheme scheme, EstimationMethod method, int gamma) const
    {
        for (const auto &p : points)
            if (p.x == x && p.scheme == scheme && p.method == method && p.gamma == gamma && p.quantity.empty())
                return p;
        throw std::out_of_range("report has no such point");
    }

    double value(double x, Scheme scheme, EstimationMethod method, int gamma, std::string_view col) const
    {
        return point(x, scheme, method, gamma).values[column(col)];
    }

    const EmpiricalCdf &cdf(Scheme scheme, EstimationMethod method, int gamma) const
    {
        for (const auto &c : cdfs)
            if (c.scheme == scheme && c.method == method && c.gamma == gamma)
                return c.cdf;
        throw std::out_of_range("report has no such CDF");
    }

    CsvTable to_csv() const
    {
        if (!cdfs.empty())
        {
            CsvTable t({"scheme", "method", "gamma", "value", "cdf"});
            for (const auto &c : cdfs)
            {
                const auto &xs = c.cdf.sorted();
                for (std::size_t i = 0; i < xs.size(); ++i)
                    t.add_row({std::string(to_string(c.scheme)), std::string(to_string(c.method)),
                               std::to_string(c.gamma), format_double(xs[i]),
                               format_double(static_cast<double>(i + 1) / static_cast<double>(xs.size()))});
            }
            return t;
        }
        std::vector<std::string> header;
        if (id == ExperimentId::validate)
            header = {"quantity", "scheme", "method", "gamma", "M", "user"};
        else
            header = {id == ExperimentId::fig4b ? "P_dB" : "M", "scheme", "method", "gamma"};
        header.insert(header.end(), value_columns.begin(), value_columns.end());
        CsvTable t(header);
        for (const auto &p : points)
        {
            std::vector<std::string> row;
            if (id == ExperimentId::validate)
                row = {p.quantity, std::string(to_string(p.scheme)), std::string(to_string(p.method)),
                       std::to_string(p.gamma), format_double(p.x), std::to_string(p.user)};
            else
                row = {format_double(p.x), std::string(to_string(p.scheme)), std::string(to_string(p.method)),
                       std::to_string(p.gamma)};
            for (const double v : p.values)
                row.push_back(format_double(v));
            t.add_row(std::move(row));
        }
        return t;
    }
};

// ---------- experiments ----------

namespace detail
{

struct Series
{
    Scheme scheme;
    EstimationMethod method;
};

inline std::vector<Series> series_of(const ExperimentPlan &plan)
{
    std::vector<Series> out;
    for (const auto s : plan.schemes)
        for (const auto m : plan.methods)
            out.push_back({s, m});
    return out;
}

inline double mean_of(std::span<const double> xs)
{
    double acc = 0.0;
    for (const double x : xs)
        acc += x;
    return acc / static_cast<double>(xs.size());
}

// Target-cell coefficients of one drop at one reuse factor. The same drop
// index gives the same relative user positions and shadowing for every Gamma.
inline BetaMatrix drop_beta(SystemConfig cfg, int gamma, int drop)
{
    cfg.Gamma = gamma;
    const auto layout = build_layout(cfg);
    return generate_drop(cfg, layout, static_cast<std::uint64_t>(drop)).slice(0);
}

// Per-drop values laid out as [gamma][x][series][component], reduced over
// drops in drop order: component 0 gives mean and standard error, the other
// components are averaged.
class GridReducer
{
  public:
    GridReducer(std::size_t gammas, std::size_t xs, std::size_t series, std::size_t components, std::size_t drops)
        : G_(gammas), X_(xs), S_(series), C_(components),
          data_(drops, std::vector<double>(gammas * xs * series * components, 0.0)) {}

    double &at(std::size_t drop, std::size_t g, std::size_t x, std::size_t s, std::size_t c)
    {
        return data_[drop][((g * X_ + x) * S_ + s) * C_ + c];
    }

    std::vector<double> reduce(std::size_t g, std::size_t x, std::size_t s) const
    {
        RunningStats head;
        std::vector<double> rest(C_ - 1, 0.0);
        for (const auto &d : data_)
        {
            const std::size_t base = ((g * X_ + x) * S_ + s) * C_;
            head.add(d[base]);
            for (std::size_t c = 1; c < C_; ++c)
                rest[c - 1] += d[base + c];
        }
        std::vector<double> out{head.mean(), head.stderr_mean()};
        for (const double r : rest)
            out.push_back(r / static_cast<double>(data_.size()));
        return out;
    }

  private:
    std::size_t G_, X_, S_, C_;
    std::vector<std::vector<double>> data_;
};

inline MetricReport collect_grid(const ExperimentPlan &plan, const std::vector<Series> &series,
                                 const std::vector<double> &xs, const GridReducer &red,
                                 std::vector<std::string> columns)
{
    MetricReport rep;
    rep.id = plan.id;
    rep.value_columns = std::move(columns);
    for (std::size_t g = 0; g < plan.gammas.size(); ++g)
        for (std::size_t x = 0; x < xs.size(); ++x)
            for (std::size_t s = 0; s < series.size(); ++s)
            {
                SeriesPoint p;
                p.x = xs[x];
                p.scheme = series[s].scheme;
                p.method = series[s].method;
                p.gamma = plan.gammas[g];
                p.values = red.reduce(g, x, s);
                rep.points.push_back(std::move(p));
            }
    return rep;
}

inline MetricReport collect_cdfs(const ExperimentPlan &plan, const std::vector<Series> &series,
                                 const std::vector<std::vector<double>> &per_drop) // [drop][g * S + s]
{
    MetricReport rep;
    rep.id = plan.id;
    rep.value_columns = {"value", "cdf"};
    for (std::size_t g = 0; g < plan.gammas.size(); ++g)
        for (std::size_t s = 0; s < series.size(); ++s)
        {
            std::vector<double> samples;
            for (const auto &d : per_drop)
                samples.push_back(d[g * series.size() + s]);
            rep.cdfs.push_back({series[s].scheme, series[s].method, plan.gammas[g], EmpiricalCdf(std::move(samples))});
        }
    return rep;
}

// Mean over target users of the RCEE of one Monte-Carlo run, per series.
inline MetricReport run_fig3(const ExperimentPlan &plan, const SystemConfig &cfg, int jobs)
{
    const auto series = series_of(plan);
    const int K = cfg.K;
    const int L = cfg.L;
    const PowerBox box = PowerBox::from_config(cfg);
    GridReducer red(plan.gammas.size(), plan.M_grid.size(), series.size(), 3, plan.n_large);

    parallel_for(static_cast<std::size_t>(plan.n_large), jobs,
                 [&](std::size_t drop)
                 {
                     for (std::size_t g = 0; g < plan.gammas.size(); ++g)
                     {
                         const BetaMatrix beta = drop_beta(cfg, plan.gammas[g], static_cast<int>(drop));
                         const auto profile = make_profile(beta, eppa_powers(L, K, cfg.P_total));
                         for (std::size_t mi = 0; mi < plan.M_grid.size(); ++mi)
                         {
                             const int M = plan.M_grid[mi];
                             std::vector<PowerMatrix> rho;
                             for (const auto &s : series)
                                 rho.push_back(full_powers(target_allocation(s.scheme, s.method, profile, box, M), L,
                                                           cfg.P_total));

                             std::vector<double> acc(series.size(), 0.0);
                             for (int t = 0; t < plan.n_small; ++t)
                             {
                                 const auto id = trial_id(drop, static_cast<std::uint64_t>(t));
                                 auto chan_rng = seed_schedule(cfg.seed, id, Purpose::channel);
                                 const auto noise_base = seed_schedule(cfg.seed, id, Purpose::pilot_noise);
                                 const auto ch = sample_channels(beta, M, chan_rng);
                                 std::vector<std::optional<PilotObservation>> obs(series.size());
                                 for (std::size_t s = 0; s < series.size(); ++s)
                                 {
                                     for (std::size_t p = 0; p < s && !obs[s]; ++p)
                                         if (rho[p] == rho[s])
                                             obs[s] = obs[p];
                                     if (!obs[s])
                                     {
                                         auto noise = noise_base;
                                         obs[s] = pilot_phase(ch, rho[s], cfg.pilot_length(), noise);
                                     }
                                     const auto est = estimate(series[s].method, *obs[s], rho[s], beta);
                                     double user_mean = 0.0;
                                     for (int k = 0; k < K; ++k)
                                         user_mean += rcee_sample(ch.vec(0, k), est.h_hat[k]);
                                     acc[s] += user_mean / K;
                                 }
                             }
                             for (std::size_t s = 0; s < series.size(); ++s)
                             {
                                 double closed = 0.0;
                                 double limit = 0.0;
                                 for (int k = 0; k < K; ++k)
                                 {
                                     const auto rc = rho[s].col(k);
                                     const auto bc = beta.col(k);
                                     closed += exp_rcee_closed(series[s].method, M, rc, bc);
                                     limit += exp_rcee_limit(series[s].method, rc, bc);
                                 }
                                 red.at(drop, g, mi, s, 0) = acc[s] / plan.n_small;
                                 red.at(drop, g, mi, s, 1) = closed / K;
                                 red.at(drop, g, mi, s, 2) = limit / K;
                             }
                         }
                     }
                 });

    std::vector<double> xs(plan.M_grid.begin(), plan.M_grid.end());
    return collect_grid(plan, series, xs, red, {"mean_exp_rcee", "stderr", "closed_form", "asymptote"});
}

// Large-M limit of the per-drop user-average Exp_rcee.
inline MetricReport run_fig4a(const ExperimentPlan &plan, const SystemConfig &cfg, int jobs)
{
    const auto series = series_of(plan);
    const PowerBox box = PowerBox::from_config(cfg);
    std::vector<std::vector<double>> per_drop(plan.n_large, std::vector<double>(plan.gammas.size() * series.size()));
    parallel_for(static_cast<std::size_t>(plan.n_large), jobs,
                 [&](std::size_t drop)
                 {
                     for (std::size_t g = 0; g < plan.gammas.size(); ++g)
                     {
                         const BetaMatrix beta = drop_beta(cfg, plan.gammas[g], static_cast<int>(drop));
                         const auto profile = make_profile(beta, eppa_powers(cfg.L, cfg.K, cfg.P_total));
                         for (std::size_t s = 0; s < series.size(); ++s)
                         {
                             const auto rho = full_powers(
                                 target_allocation(series[s].scheme, series[s].method, profile, box, cfg.M), cfg.L,
                                 cfg.P_total);
                             std::vector<double> vals;
                             for (int k = 0; k < cfg.K; ++k)
                                 vals.push_back(exp_rcee_limit(series[s].method, rho.col(k), beta.col(k)));
                             per_drop[drop][g * series.size() + s] = mean_of(vals);
                         }
                     }
                 });
    return collect_cdfs(plan, series, per_drop);
}

// Exp_rcee against the pilot budget at fixed M, with the large-P asymptote.
inline MetricReport run_fig4b(const ExperimentPlan &plan, const SystemConfig &cfg, int jobs)
{
    const auto series = series_of(plan);
    const int K = cfg.K;
    const int L = cfg.L;
    const int M = plan.fixed_M;
    GridReducer red(plan.gammas.size(), plan.P_grid_db.size(), series.size(), 3, plan.n_large);
    parallel_for(static_cast<std::size_t>(plan.n_large), jobs,
                 [&](std::size_t drop)
                 {
                     for (std::size_t g = 0; g < plan.gammas.size(); ++g)
                     {
                         const BetaMatrix beta = drop_beta(cfg, plan.gammas[g], static_cast<int>(drop));
                         const PowerMatrix delta(L, K, 1.0 / K);
                         for (std::size_t s = 0; s < series.size(); ++s)
                         {
                             double asym = 0.0;
                             if (L < 2)
                                 asym = 0.0;
                             else if (series[s].scheme == Scheme::eppa)
                             {
                                 for (int k = 0; k < K; ++k)
                                     asym += exp_rcee_eppa_high_power_limit(series[s].method, beta.col(k));
                                 asym /= K;
                             }
                             else
                             {
                                 const auto groups = asymptotic_groups(series[s].method, delta, beta, cfg.mu);
                                 for (int k = 0; k < K; ++k)
                                     asym += exp_rcee_asymptotic(groups, beta, k);
                                 asym /= K;
                             }
                             for (std::size_t pi = 0; pi < plan.P_grid_db.size(); ++pi)
                             {
                                 const double P = db_to_linear(plan.P_grid_db[pi]);
                                 const PowerBox box = PowerBox::standard(P, K, cfg.mu);
                                 const auto profile = make_profile(beta, eppa_powers(L, K, P));
                                 const auto rho = full_powers(
                                     target_allocation(series[s].scheme, series[s].method, profile, box, M), L, P);
                                 double closed = 0.0;
                                 double limit = 0.0;
                                 for (int k = 0; k < K; ++k)
                                 {
                                     closed += exp_rcee_closed(series[s].method, M, rho.col(k), beta.col(k));
                                     limit += exp_rcee_limit(series[s].method, rho.col(k), beta.col(k));
                                 }
                                 red.at(drop, g, pi, s, 0) = closed / K;
                                 red.at(drop, g, pi, s, 1) = limit / K;
                                 red.at(drop, g, pi, s, 2) = asym;
                             }
                         }
                     }
                 });
    return collect_grid(plan, series, plan.P_grid_db, red, {"mean_exp_rcee", "stderr", "limit", "asymptote"});
}

// Per-user achievable rates of the target cell from the closed-form SINR.
inline std::vector<double> user_rates(const SystemConfig &cfg, const PowerMatrix &rho, const BetaMatrix &beta, int M)
{
    std::vector<double> r(cfg.K);
    for (int k = 0; k < cfg.K; ++k)
        r[k] = achievable_rate(cfg, sinr_closed(M, rho, beta, cfg.rho_u, k));
    return r;
}

inline std::vector<double> user_limit_rates(const SystemConfig &cfg, const PowerMatrix &rho, const BetaMatrix &beta)
{
    std::vector<double> r(cfg.K);
    for (int k = 0; k < cfg.K; ++k)
        r[k] = achievable_rate(cfg, sinr_limit(rho.col(k), beta.col(k)));
    return r;
}

inline MetricReport run_fig5a(const ExperimentPlan &plan, const SystemConfig &cfg, int jobs)
{
    const auto series = series_of(plan);
    const PowerBox box = PowerBox::from_config(cfg);
    GridReducer red(plan.gammas.size(), plan.M_grid.size(), series.size(), 3, plan.n_large);
    parallel_for(static_cast<std::size_t>(plan.n_large), jobs,
                 [&](std::size_t drop)
                 {
                     for (std::size_t g = 0; g < plan.gammas.size(); ++g)
                     {
                         SystemConfig c = cfg;
                         c.Gamma = plan.gammas[g];
                         const BetaMatrix beta = drop_beta(cfg, c.Gamma, static_cast<int>(drop));
                         const auto profile = make_profile(beta, eppa_powers(c.L, c.K, c.P_total));
                         for (std::size_t mi = 0; mi < plan.M_grid.size(); ++mi)
                         {
                             const int M = plan.M_grid[mi];
                             for (std::size_t s = 0; s < series.size(); ++s)
                             {
                                 const auto rho = full_powers(
                                     target_allocation(series[s].scheme, series[s].method, profile, box, M), c.L,
                                     c.P_total);
                                 const auto rates = rate_summary(user_rates(c, rho, beta, M));
                                 const auto limits = rate_summary(user_limit_rates(c, rho, beta));
                                 red.at(drop, g, mi, s, 0) = rates.r_min;
                                 red.at(drop, g, mi, s, 1) = rates.r_av;
                                 red.at(drop, g, mi, s, 2) = limits.r_min;
                             }
                         }
                     }
                 });
    std::vector<double> xs(plan.M_grid.begin(), plan.M_grid.end());
    return collect_grid(plan, series, xs, red, {"min_rate", "stderr", "avg_rate", "limit_min_rate"});
}

inline MetricReport run_fig5b(const ExperimentPlan &plan, const SystemConfig &cfg, int jobs)
{
    const auto series = series_of(plan);
    const PowerBox box = PowerBox::from_config(cfg);
    std::vector<std::vector<double>> per_drop(plan.n_large, std::vector<double>(plan.gammas.size() * series.size()));
    parallel_for(static_cast<std::size_t>(plan.n_large), jobs,
                 [&](std::size_t drop)
                 {
                     for (std::size_t g = 0; g < plan.gammas.size(); ++g)
                     {
                         SystemConfig c = cfg;
                         c.Gamma = plan.gammas[g];
                         const BetaMatrix beta = drop_beta(cfg, c.Gamma, static_cast<int>(drop));
                         const auto profile = make_profile(beta, eppa_powers(c.L, c.K, c.P_total));
                         for (std::size_t s = 0; s < series.size(); ++s)
                         {
                             const auto rho = full_powers(
                                 target_allocation(series[s].scheme, series[s].method, profile, box, plan.fixed_M),
                                 c.L, c.P_total);
                             per_drop[drop][g * series.size() + s] =
                                 rate_summary(user_rates(c, rho, beta, plan.fixed_M)).r_av;
                         }
                     }
                 });
    return collect_cdfs(plan, series, per_drop);
}

// Monte-Carlo against closed forms on drop 0, per user.
inline MetricReport run_validate(const ExperimentPlan &plan, const SystemConfig &cfg, int jobs)
{
    const auto series = series_of(plan);
    const PowerBox box = PowerBox::from_config(cfg);
    struct Task
    {
        std::size_t g, m, s;
    };
    std::vector<Task> tasks;
    for (std::size_t g = 0; g < plan.gammas.size(); ++g)
        for (std::size_t m = 0; m < plan.M_grid.size(); ++m)
            for (std::size_t s = 0; s < series.size(); ++s)
                tasks.push_back({g, m, s});
    std::vector<std::vector<SeriesPoint>> out(tasks.size());

    parallel_for(tasks.size(), jobs,
                 [&](std::size_t i)
                 {
                     const auto [g, m, s] = tasks[i];
                     const int gamma = plan.gammas[g];
                     const int M = plan.M_grid[m];
                     const BetaMatrix beta = drop_beta(cfg, gamma, 0);
                     const auto profile = make_profile(beta, eppa_powers(cfg.L, cfg.K, cfg.P_total));
                     const auto rho = full_powers(
                         target_allocation(series[s].scheme, series[s].method, profile, box, M), cfg.L, cfg.P_total);
                     const auto mc = monte_carlo(series[s].method, beta, rho, M, plan.n_small, cfg.seed, 1, true,
                                                 cfg.rho_u);
                     for (int k = 0; k < cfg.K; ++k)
                     {
                         SeriesPoint base;
                         base.x = M;
                         base.scheme = series[s].scheme;
                         base.method = series[s].method;
                         base.gamma = gamma;
                         base.user = k + 1;

                         SeriesPoint e = base;
                         e.quantity = "exp_rcee";
                         e.values = {mc.rcee[k].mean(), mc.rcee[k].stderr_mean(),
                                     exp_rcee_closed(series[s].method, M, rho.col(k), beta.col(k))};
                         out[i].push_back(std::move(e));

                         SeriesPoint q = base;
                         q.quantity = "sinr";
                         q.values = {mc.moments[k].sinr(cfg.rho_u), mc.sinr_batches[k].stderr_mean(),
                                     sinr_closed(M, rho, beta, cfg.rho_u, k)};
                         out[i].push_back(std::move(q));
                     }
                 });

    MetricReport rep;
    rep.id = plan.id;
    rep.value_columns = {"monte_carlo", "stderr", "closed_form"};
    for (auto &v : out)
        for (auto &p : v)
            rep.points.push_back(std::move(p));
    return rep;
}

} // namespace detail

inline MetricReport run_experiment(const ExperimentPlan &plan, const SystemConfig &cfg, int jobs = 1)
{
    plan.validate();
    cfg.validate();
    switch (plan.id)
    {
    case ExperimentId::fig3: return detail::run_fig3(plan, cfg, jobs);
    case ExperimentId::fig4a: return detail::run_fig4a(plan, cfg, jobs);
    case ExperimentId::fig4b: return detail::run_fig4b(plan, cfg, jobs);
    case ExperimentId::fig5a: return detail::run_fig5a(plan, cfg, jobs);
    case ExperimentId::fig5b: return detail::run_fig5b(plan, cfg, jobs);
    case ExperimentId::validate: return detail::run_validate(plan, cfg, jobs);
    }
    throw std::logic_error("unknown experiment");
}

// ---------- timing ----------

// Wall-clock of ppa_allocate against the reference solver for K = 2..10 on
// drops of the given configuration (mu = 1.5, P = 1000 K). Columns: K, seconds
// per call for each, their ratio, and the mean refsolver iteration count.
inline CsvTable allocation_benchmark(EstimationMethod method, const SystemConfig &base, int instances = 50,
                                     double min_seconds = 0.05)
{
    using clock = std::chrono::steady_clock;
    CsvTable table({"K", "ppa_seconds", "refsolver_seconds", "speedup", "refsolver_iterations"});

    // Repeats body() until min_seconds elapsed; returns seconds per call.
    const auto time_per_call = [min_seconds](const auto &body)
    {
        long long calls = 0;
        const auto start = clock::now();
        double elapsed = 0.0;
        do
        {
            calls += body();
            elapsed = std::chrono::duration<double>(clock::now() - start).count();
        } while (elapsed < min_seconds);
        return elapsed / static_cast<double>(calls);
    };

    for (int K = 2; K <= 10; ++K)
    {
        SystemConfig cfg = base;
        cfg.K = K;
        cfg.mu = 1.5;
        cfg.P_total = 1000.0 * K;
        cfg.validate();
        const auto box = PowerBox::from_config(cfg);
        std::vector<InterferenceProfile> profiles;
        for (int i = 0; i < instances; ++i)
            profiles.push_back(make_profile(detail::drop_beta(cfg, cfg.Gamma, i), eppa_powers(cfg.L, K, cfg.P_total)));

        double sink = 0.0;
        const double ppa_s = time_per_call(
            [&]
            {
                for (const auto &p : profiles)
                    sink += ppa_allocate(method, p, box).rho[0];
                return static_cast<long long>(profiles.size());
            });
        long long iterations = 0;
        for (const auto &p : profiles)
            iterations += solve_allocation(method, p, box, cfg.M).iterations;
        const double ref_s = time_per_call(
            [&]
            {
                for (const auto &p : profiles)
                    sink += solve_allocation(method, p, box, cfg.M).rho[0];
                return static_cast<long long>(profiles.size());
            });
        if (!(sink > 0.0))
            throw std::runtime_error("bench: unexpected allocation result");

        table.add_row({std::to_string(K), format_double(ppa_s), format_double(ref_s), format_double(ref_s / ppa_s),
                       format_double(static_cast<double>(iterations) / instances)});
    }
    return table;
}

} // namespace mimo_pilot

#endif
