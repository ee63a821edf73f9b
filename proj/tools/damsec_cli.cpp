// SPDX-License-Identifier: Apache-2.0
//
// damsec - delay-alignment modulation toolkit for secure ISAC simulation
// Copyright (C) 2026 The damsec Authors
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

#include <damsec/damsec.hpp>

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

namespace fs = std::filesystem;

namespace
{
    constexpr int kExitOk = 0;
    constexpr int kExitConfig = 1;
    constexpr int kExitRuntime = 2;

    struct CommonArgs
    {
        std::string config;
        std::optional<std::uint64_t> seed;
        std::string out = ".";
        std::optional<int> trials;
    };

    void add_common(CLI::App *cmd, CommonArgs &a)
    {
        cmd->add_option("--config", a.config, "JSON configuration file (defaults are used when omitted)");
        cmd->add_option("--seed", a.seed, "Master seed (overrides the config)");
        cmd->add_option("--out", a.out, "Output directory")->capture_default_str();
        cmd->add_option("--trials", a.trials, "Monte Carlo trials per point (overrides the config)")
            ->check(CLI::PositiveNumber);
    }

    damsec::ExperimentConfig resolve_config(const CommonArgs &a)
    {
        damsec::ExperimentConfig cfg;
        if (!a.config.empty())
            cfg = damsec::load_config(a.config);
        else
            cfg.finalize();
        if (a.seed)
            cfg.seed = *a.seed;
        cfg.finalize();
        cfg.validate();
        return cfg;
    }

    fs::path prepare_out(const std::string &dir)
    {
        std::error_code ec;
        fs::create_directories(dir, ec);
        if (ec)
            throw damsec::ConfigError("cannot create output directory '" + dir + "': " + ec.message());
        return fs::path(dir);
    }

    void write_file(const fs::path &path, const std::string &content)
    {
        std::ofstream os(path, std::ios::binary);
        if (!os)
            throw std::runtime_error("cannot write '" + path.string() + "'");
        os << content;
        if (!os)
            throw std::runtime_error("write to '" + path.string() + "' failed");
    }

    void emit(const fs::path &dir, const std::string &stem, const std::string &command,
              const damsec::ExperimentConfig &cfg, const std::vector<damsec::ResultRow> &rows,
              std::vector<std::string> extra_outputs = {})
    {
        std::ostringstream csv;
        damsec::write_csv(csv, rows);
        write_file(dir / (stem + ".csv"), csv.str());
        extra_outputs.insert(extra_outputs.begin(), stem + ".csv");
        write_file(dir / (stem + ".manifest.json"),
                   damsec::run_manifest(cfg, command, extra_outputs).dump(2) + "\n");
        std::cout << "wrote " << (dir / (stem + ".csv")).string() << '\n';
    }

    int cmd_sse(const CommonArgs &a)
    {
        auto cfg = resolve_config(a);
        if (a.trials)
            cfg.sse_trials = *a.trials;
        const auto dir = prepare_out(a.out);
        emit(dir, "sse_vs_power", "sse-sweep", cfg, damsec::run_sse_vs_power(cfg));
        return kExitOk;
    }

    int cmd_crb(const CommonArgs &a)
    {
        auto cfg = resolve_config(a);
        if (a.trials)
            cfg.crb_trials = *a.trials;
        const auto dir = prepare_out(a.out);
        emit(dir, "crb_rmse", "crb-sweep", cfg, damsec::run_crb_rmse(cfg));
        return kExitOk;
    }

    int cmd_validate(const CommonArgs &a)
    {
        const auto cfg = resolve_config(a);
        const auto checks = damsec::run_validation_suite(cfg.seed);
        damsec::print_validation_table(std::cout, checks);
        for (const auto &c : checks)
            if (!c.pass)
                return kExitRuntime;
        return kExitOk;
    }

    int cmd_solve(const CommonArgs &a, std::optional<double> power_dbm, bool trace)
    {
        const auto cfg = resolve_config(a);
        const double p_dbm = power_dbm.value_or(cfg.power_dbm.back());
        const double p = damsec::dbm_to_watt(p_dbm);
        auto rng = damsec::derive_rng(cfg.seed, {0x50u});
        const auto t = damsec::prepare_secrecy_trial(cfg, rng);
        const auto &sc = cfg.scenario;
        const auto split = damsec::crb_aware_split(p, t.channels.num_ues(), t.min_sensing_power);
        const auto mrt = damsec::mrt_precoders(t.channels, sc.array, t.bank, split);
        const auto sp = damsec::sp_precoders(t.channels, sc.array, t.bank, split);
        const auto rp = damsec::build_reduced_problem(t.channels, sc.array, t.bank, t.projected,
                                                      {t.los_steering, t.sensing_floor}, p);
        damsec::ScaOptions opt;
        opt.max_iterations = cfg.sca_max_iterations;
        opt.tolerance = cfg.sca_tolerance;
        opt.solver.tolerance = cfg.solver_tolerance;
        const auto res = damsec::sca_loop(mrt, rp, opt);

        std::vector<damsec::ResultRow> rows;
        auto report = [&](const std::string &name, const damsec::PrecoderSet &pre) {
            rows.push_back({name, p_dbm, "worst_sse", damsec::worst_user_sse(pre, t.raw, sc.coherence_symbols, t.max_tap), 1, 0.0});
            for (int k = 0; k < pre.num_ues(); ++k)
            {
                const double s = damsec::sse(damsec::sinr_ue(k, pre, t.raw), damsec::sinr_eve(k, pre, t.raw),
                                             sc.coherence_symbols, t.max_tap);
                rows.push_back({name, p_dbm, "sse_ue" + std::to_string(k), s, 1, 0.0});
            }
            const auto audit = damsec::audit_constraints(pre, p, t.echo, t.los_steering, t.tau, t.beta,
                                                         sc.noise_sensing_stage2, t.threshold);
            rows.push_back({name, p_dbm, "power_ratio", audit.power_ratio, 1, 0.0});
            rows.push_back({name, p_dbm, "crb_ratio", audit.crb_ratio, 1, 0.0});
        };
        report("optimized", res.precoders);
        report("mrt", mrt);
        report("sp", sp);
        rows.push_back({"optimized", p_dbm, "sca_iterations", static_cast<double>(res.state.iteration), 1, 0.0});

        const auto dir = prepare_out(a.out);
        std::vector<std::string> extra;
        if (trace)
        {
            std::ostringstream os;
            damsec::write_sca_trace(os, res.state);
            write_file(dir / "sca_trace.csv", os.str());
            extra.push_back("sca_trace.csv");
        }
        emit(dir, "solve", "solve", cfg, rows, extra);
        std::cout << "sca: " << res.state.iteration << " iteration(s), " << res.state.stop_reason << '\n';
        return kExitOk;
    }
} // namespace

int main(int argc, char **argv)
{
    CLI::App app{"damsec: secure delay-alignment ISAC simulator"};
    app.require_subcommand(1);

    CommonArgs sse_args, crb_args, val_args, solve_args;
    auto *sse = app.add_subcommand("sse-sweep", "Worst-UE secrecy spectral efficiency versus transmit power");
    add_common(sse, sse_args);
    auto *crb = app.add_subcommand("crb-sweep", "Delay CRB and estimator RMSE versus transmit power");
    add_common(crb, crb_args);
    auto *val = app.add_subcommand("validate", "Run the closed-form versus time-domain oracle checks");
    add_common(val, val_args);
    auto *solve = app.add_subcommand("solve", "Optimise one channel draw and dump the result");
    add_common(solve, solve_args);
    std::optional<double> solve_power;
    bool solve_trace = false;
    solve->add_option("--power-dbm", solve_power, "Transmit power (default: last sweep point)");
    solve->add_flag("--trace", solve_trace, "Also write the per-iteration SCA trace (sca_trace.csv)");

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::CallForHelp &e)
    {
        return app.exit(e);
    }
    catch (const CLI::CallForAllHelp &e)
    {
        return app.exit(e);
    }
    catch (const CLI::ParseError &e)
    {
        std::cerr << "error: " << e.what() << "\n\n" << app.help();
        return kExitConfig;
    }

    try
    {
        if (*sse)
            return cmd_sse(sse_args);
        if (*crb)
            return cmd_crb(crb_args);
        if (*val)
            return cmd_validate(val_args);
        if (*solve)
            return cmd_solve(solve_args, solve_power, solve_trace);
    }
    catch (const damsec::ConfigError &e)
    {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    }
    catch (const std::exception &e)
    {
        std::cerr << "runtime error: " << e.what() << '\n';
        return kExitRuntime;
    }
    return kExitRuntime;
}
