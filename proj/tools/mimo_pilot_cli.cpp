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


// Command-line front end. Exit codes: 0 success, 1 runtime or domain failure,
// 2 usage error.

#include "mimo_pilot/mimo_pilot.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace mp = mimo_pilot;

namespace
{

struct UsageError : std::runtime_error
{
    using std::runtime_error::runtime_error;
};

struct CommonOptions
{
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string method = "ls";
    std::string scheme;
    std::vector<int> gammas;
    bool paper_scale = false;
    int jobs = 1;
    std::string out;
    bool check = false;
    std::string fixture;
    int drops = 0;
    int trials = 0;
    int drop_index = 0;
};

mp::SystemConfig resolve_config(const CommonOptions &o)
{
    mp::SystemConfig cfg;
    if (!o.config_path.empty())
    {
        std::ifstream probe(o.config_path);
        if (!probe)
            throw UsageError("config file not found: " + o.config_path);
        cfg = mp::load_config(o.config_path);
    }
    if (o.seed)
        cfg.seed = *o.seed;
    else if (const char *env = std::getenv("MIMO_PILOT_SEED"); env && *env)
    {
        try
        {
            std::size_t pos = 0;
            const auto v = std::stoull(env, &pos);
            if (pos != std::string(env).size())
                throw std::invalid_argument("trailing characters");
            cfg.seed = v;
        }
        catch (const std::exception &)
        {
            throw UsageError(std::string("MIMO_PILOT_SEED is not an unsigned integer: ") + env);
        }
    }
    return cfg;
}

mp::EstimationMethod method_of(const CommonOptions &o)
{
    const auto m = mp::parse_method(o.method);
    if (!m)
        throw UsageError("unknown method: " + o.method);
    return *m;
}

void write_output(const mp::CsvTable &table, const std::string &out)
{
    if (out.empty() || out == "-")
        table.write(std::cout);
    else
        mp::emit_csv(table, out);
}

std::string join_ints(const std::vector<int> &v)
{
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i)
        s += (i ? " " : "") + std::to_string(v[i] + 1);
    return s.empty() ? "-" : s;
}

int run_figure(const CommonOptions &o, const std::string &id_text, bool method_given)
{
    const auto id = mp::parse_experiment_id(id_text);
    if (!id)
        throw UsageError("unknown figure id: " + id_text);
    mp::SystemConfig cfg = resolve_config(o);
    mp::ExperimentPlan plan = mp::default_plan(*id, o.paper_scale);
    if (!o.gammas.empty())
    {
        plan.gammas = o.gammas;
        std::sort(plan.gammas.begin(), plan.gammas.end());
    }
    if (!o.scheme.empty())
    {
        const auto s = mp::parse_scheme(o.scheme);
        if (!s)
            throw UsageError("unknown scheme: " + o.scheme);
        plan.schemes = {*s};
    }
    if (method_given)
        plan.methods = {method_of(o)};
    if (o.drops > 0)
        plan.n_large = o.drops;
    if (o.trials > 0)
        plan.n_small = o.trials;
    const auto report = mp::run_experiment(plan, cfg, o.jobs);
    write_output(report.to_csv(), o.out);
    return 0;
}

mp::BetaMatrix beta_for(const CommonOptions &o, mp::SystemConfig &cfg)
{
    if (!o.fixture.empty())
    {
        const auto beta = mp::load_beta_fixture(o.fixture).slice(0);
        cfg.L = static_cast<int>(beta.rows());
        cfg.K = static_cast<int>(beta.cols());
        cfg.validate();
        return beta;
    }
    cfg.validate();
    return mp::detail::drop_beta(cfg, cfg.Gamma, o.drop_index);
}

int run_allocate(const CommonOptions &o)
{
    mp::SystemConfig cfg = resolve_config(o);
    const auto method = method_of(o);
    const auto beta = beta_for(o, cfg);
    const auto box = mp::PowerBox::from_config(cfg);
    const auto profile = mp::make_profile(beta, mp::eppa_powers(cfg.L, cfg.K, cfg.P_total));

    mp::Scheme scheme = mp::Scheme::ppa;
    if (!o.scheme.empty())
    {
        const auto s = mp::parse_scheme(o.scheme);
        if (!s)
            throw UsageError("unknown scheme: " + o.scheme);
        scheme = *s;
    }

    std::vector<double> rho;
    std::cout << "method: " << mp::to_string(method) << "\n";
    std::cout << "scheme: " << mp::to_string(scheme) << "\n";
    if (scheme == mp::Scheme::ppa)
    {
        const auto alloc = mp::ppa_allocate(method, profile, box);
        rho = alloc.rho;
        std::cout << "group_free: " << join_ints(alloc.groups.active) << "\n";
        std::cout << "group_min: " << join_ints(alloc.groups.at_min) << "\n";
        std::cout << "group_max: " << join_ints(alloc.groups.at_max) << "\n";
    }
    else
        rho = mp::target_allocation(scheme, method, profile, box, cfg.M);

    std::cout << "rho:";
    for (const double r : rho)
        std::cout << " " << mp::format_double(r);
    std::cout << "\n";
    const double obj = mp::objective_value(method, rho, profile, cfg.M);
    std::cout << "objective: " << mp::format_double(obj) << "\n";

    if (o.check)
    {
        const auto ref = mp::solve_allocation(method, profile, box, cfg.M);
        const double gap = (obj - ref.objective) / ref.objective;
        std::cout << "refsolver_objective: " << mp::format_double(ref.objective) << "\n";
        std::cout << "relative_gap: " << mp::format_double(gap) << "\n";
        const bool ok = gap <= 1e-4;
        std::cout << "check: " << (ok ? "ok" : "FAILED") << "\n";
        return ok ? 0 : 1;
    }
    return 0;
}

int run_fixture_check(const CommonOptions &o)
{
    CommonOptions opts = o;
    if (opts.fixture.empty())
        opts.fixture = "data/three_user_betas.csv";
    mp::SystemConfig cfg = resolve_config(opts);
    if (o.config_path.empty())
    {
        cfg.K = 3;
        cfg.M = 200;
        cfg.P_total = 3000.0;
        cfg.mu = 1.5;
    }
    const auto beta = beta_for(opts, cfg);
    const auto box = mp::PowerBox::from_config(cfg);
    const auto profile = mp::make_profile(beta, mp::eppa_powers(cfg.L, cfg.K, cfg.P_total));
    bool ok = true;
    mp::CsvTable table({"method", "ppa_objective", "refsolver_objective", "eppa_objective", "relative_gap", "status"});
    for (const auto method : {mp::EstimationMethod::LS, mp::EstimationMethod::MMSE})
    {
        const auto alloc = mp::ppa_allocate(method, profile, box);
        const double obj = mp::objective_value(method, alloc.rho, profile, cfg.M);
        const auto ref = mp::solve_allocation(method, profile, box, cfg.M);
        const auto eppa = mp::eppa_allocation(cfg.K, cfg.P_total, method);
        const double eobj = mp::objective_value(method, eppa.rho, profile, cfg.M);
        const double gap = (obj - ref.objective) / ref.objective;
        const bool pass = gap <= 1e-4 && obj <= eobj;
        ok = ok && pass;
        table.add_row({std::string(mp::to_string(method)), mp::format_double(obj), mp::format_double(ref.objective),
                       mp::format_double(eobj), mp::format_double(gap), pass ? "ok" : "FAILED"});
    }
    write_output(table, o.out);
    return ok ? 0 : 1;
}

int run_bench(const CommonOptions &o)
{
    const auto table = mp::allocation_benchmark(method_of(o), resolve_config(o));
    write_output(table, o.out);
    return 0;
}

void add_common(CLI::App *cmd, CommonOptions &o)
{
    cmd->add_option("--config", o.config_path, "key=value configuration file");
    cmd->add_option("--seed", o.seed, "master seed (falls back to MIMO_PILOT_SEED, then the config)");
    cmd->add_option("--jobs", o.jobs, "worker threads")->check(CLI::PositiveNumber);
    cmd->add_option("--out", o.out, "output CSV path (stdout when omitted)");
}

} // namespace

int main(int argc, char **argv)
{
    CLI::App app{"mimo-pilot: channel estimation and pilot power allocation for multi-cell massive MIMO"};
    app.require_subcommand(1);
    CommonOptions o;
    std::string figure_id;

    auto *validate = app.add_subcommand("validate", "Monte-Carlo check of the closed forms on one drop");
    add_common(validate, o);
    validate->add_option("--scheme", o.scheme, "ppa|eppa|ref");
    validate->add_option("--method", o.method, "ls|mmse");
    validate->add_option("--trials", o.trials, "small-scale trials")->check(CLI::Range(2, 100000000));
    validate->add_flag("--paper-scale", o.paper_scale, "full trial counts");

    auto *allocate = app.add_subcommand("allocate", "allocate pilot powers in the target cell");
    add_common(allocate, o);
    allocate->add_option("--method", o.method, "ls|mmse");
    allocate->add_option("--scheme", o.scheme, "ppa|eppa|ref");
    allocate->add_option("--fixture", o.fixture, "large-scale coefficient CSV (rows = cells, user_1..user_K)");
    allocate->add_option("--drop", o.drop_index, "drop index when no fixture is given")->check(CLI::NonNegativeNumber);
    allocate->add_flag("--check", o.check, "cross-check against the reference solver");

    auto *figure = app.add_subcommand("figure", "run a figure experiment and emit CSV");
    add_common(figure, o);
    figure->add_option("id", figure_id, "3 | 4a | 4b | 5a | 5b | validate")->required();
    figure->add_option("--gamma", o.gammas, "reuse factors, e.g. 1,3,7")->delimiter(',')->check(CLI::IsMember({1, 3, 7}));
    figure->add_option("--scheme", o.scheme, "restrict to ppa|eppa|ref");
    auto *method_opt = figure->add_option("--method", o.method, "restrict to ls|mmse");
    figure->add_flag("--paper-scale", o.paper_scale, "full drop and trial counts");
    figure->add_option("--drops", o.drops, "override large-scale drop count")->check(CLI::PositiveNumber);
    figure->add_option("--trials", o.trials, "override small-scale trial count")->check(CLI::PositiveNumber);

    auto *bench = app.add_subcommand("bench", "time the allocator against the reference solver for K = 2..10");
    add_common(bench, o);
    bench->add_option("--method", o.method, "ls|mmse");

    auto *fixture_check = app.add_subcommand("fixture-check", "allocation cross-check on a coefficient fixture");
    add_common(fixture_check, o);
    fixture_check->add_option("--fixture", o.fixture, "coefficient CSV (default data/three_user_betas.csv)");

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError &e)
    {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try
    {
        method_of(o);
        if (*validate)
        {
            CommonOptions v = o;
            return run_figure(v, "validate", validate->count("--method") > 0);
        }
        if (*allocate)
            return run_allocate(o);
        if (*figure)
            return run_figure(o, figure_id, method_opt->count() > 0);
        if (*bench)
            return run_bench(o);
        if (*fixture_check)
            return run_fixture_check(o);
    }
    catch (const UsageError &e)
    {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    }
    catch (const std::exception &e)
    {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
