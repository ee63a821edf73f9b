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

#ifndef DAMSEC_EXPERIMENTS_HPP
#define DAMSEC_EXPERIMENTS_HPP

// Configuration, seeded Monte Carlo orchestration, the secrecy and delay-CRB
// sweeps, CSV emission and run manifests.

#include "channel.hpp"
#include "precoding.hpp"
#include "sca.hpp"
#include "secrecy.hpp"
#include "stage2_delay.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <exception>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace damsec
{
    inline constexpr const char *kVersion = "1.0.0";

    /// Thermal noise power in W: 10^((psd + NF) / 10) mW/Hz times the bandwidth.
    inline double noise_variance(double psd_dbm_per_hz, double noise_figure_db, double bandwidth_hz)
    {
        if (!(bandwidth_hz > 0.0))
            throw ConfigError("noise_variance: bandwidth must be positive");
        return 1e-3 * std::pow(10.0, (psd_dbm_per_hz + noise_figure_db) / 10.0) * bandwidth_hz;
    }

    struct ExperimentConfig
    {
        std::uint64_t seed = 2026;
        double carrier_hz = 28e9;
        ScenarioConfig scenario;
        double noise_psd_dbm_per_hz = -174.0;
        double noise_figure_db = 9.0;
        std::vector<double> power_dbm{0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0};

        int sse_trials = 100;
        std::vector<std::string> schemes{"optimized", "mrt", "sp"};
        double crb_threshold_factor = 2.0;
        std::optional<double> crb_threshold; // s^2, overrides the factor rule

        int crb_trials = 500;
        std::vector<int> crb_array_sizes{30, 100};

        int taps = 16;
        int snapshots = 256;
        int window_lead = 4;

        int sca_max_iterations = 50;
        double sca_tolerance = 1e-4;
        double solver_tolerance = 1e-8;

        int threads = 1;

        /// Applies derived quantities (array, noise) to the scenario.
        void finalize()
        {
            scenario.array = ArrayConfig::half_wavelength(scenario.array.num_antennas, carrier_hz, scenario.array.bandwidth);
            const double s2 = noise_variance(noise_psd_dbm_per_hz, noise_figure_db, scenario.array.bandwidth);
            scenario.noise_sensing_stage1 = s2;
            scenario.noise_sensing_stage2 = s2;
            scenario.noise_ue.assign(scenario.num_ues, s2);
            scenario.noise_eve = s2;
            scenario.seed = seed;
        }

        void validate() const
        {
            scenario.validate();
            if (power_dbm.empty())
                throw ConfigError("config: power sweep is empty");
            if (!std::is_sorted(power_dbm.begin(), power_dbm.end()) ||
                std::adjacent_find(power_dbm.begin(), power_dbm.end()) != power_dbm.end())
                throw ConfigError("config: power sweep must be strictly increasing");
            if (sse_trials < 1 || crb_trials < 1)
                throw ConfigError("config: trials must be >= 1");
            static const std::set<std::string> known{"optimized", "mrt", "sp"};
            if (schemes.empty())
                throw ConfigError("config: no schemes selected");
            for (const auto &s : schemes)
                if (!known.count(s))
                    throw ConfigError("config: unknown scheme '" + s + "' (expected optimized, mrt or sp)");
            if (!(crb_threshold_factor > 0.0))
                throw ConfigError("config: crb threshold factor must be positive");
            if (crb_threshold && !(*crb_threshold > 0.0))
                throw ConfigError("config: crb threshold must be positive");
            if (crb_array_sizes.empty() ||
                std::any_of(crb_array_sizes.begin(), crb_array_sizes.end(), [](int n) { return n < 2; }))
                throw ConfigError("config: crb array sizes must be >= 2");
            if (taps < 8 || snapshots < taps || window_lead < 2 || window_lead > taps - 3)
                throw ConfigError("config: need taps >= 8, snapshots >= taps and 2 <= window lead <= taps - 3");
            if (sca_max_iterations < 1 || !(sca_tolerance > 0.0) || !(solver_tolerance > 0.0))
                throw ConfigError("config: SCA iteration limit and tolerances must be positive");
            if (threads < 0)
                throw ConfigError("config: threads must be >= 0");
            if (!(carrier_hz > 0.0))
                throw ConfigError("config: carrier frequency must be positive");
        }
    };

    namespace detail
    {
        using nlohmann::json;

        inline Point2 read_point(const json &j, const std::string &what)
        {
            if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
                throw ConfigError("config: " + what + " must be an [x, y] pair");
            return {j[0].get<double>(), j[1].get<double>()};
        }

        inline void reject_unknown(const json &obj, const std::set<std::string> &allowed, const std::string &where)
        {
            if (!obj.is_object())
                throw ConfigError("config: '" + where + "' must be an object");
            for (auto it = obj.begin(); it != obj.end(); ++it)
                if (!allowed.count(it.key()))
                    throw ConfigError("config: unknown key '" + it.key() + "' in " + where);
        }

        template <typename T>
        void read(const json &obj, const char *key, T &out, const std::string &where)
        {
            if (!obj.contains(key))
                return;
            try
            {
                out = obj.at(key).get<T>();
            }
            catch (const json::exception &e)
            {
                throw ConfigError("config: bad value for '" + where + "." + key + "': " + e.what());
            }
        }
    } // namespace detail

    inline ExperimentConfig config_from_json(const nlohmann::json &j)
    {
        using detail::read;
        ExperimentConfig c;
        detail::reject_unknown(j, {"seed", "scenario", "noise", "sweep", "sse", "crb", "stage2", "sca", "threads"}, "root");
        read(j, "seed", c.seed, "root");
        read(j, "threads", c.threads, "root");
        if (j.contains("scenario"))
        {
            const auto &s = j.at("scenario");
            detail::reject_unknown(s,
                                   {"num_antennas", "carrier_hz", "bandwidth_hz", "target", "ues", "eve", "sensing_paths",
                                    "ue_paths", "eve_paths", "scatter_inner_m", "scatter_outer_m", "coherence_symbols"},
                                   "scenario");
            auto &sc = c.scenario;
            read(s, "num_antennas", sc.array.num_antennas, "scenario");
            read(s, "carrier_hz", c.carrier_hz, "scenario");
            read(s, "bandwidth_hz", sc.array.bandwidth, "scenario");
            if (s.contains("target"))
                sc.target = detail::read_point(s.at("target"), "scenario.target");
            if (s.contains("eve"))
                sc.eve = detail::read_point(s.at("eve"), "scenario.eve");
            if (s.contains("ues"))
            {
                const auto &u = s.at("ues");
                if (!u.is_array() || u.empty())
                    throw ConfigError("config: scenario.ues must be a non-empty list of [x, y] pairs");
                sc.ues.clear();
                for (const auto &p : u)
                    sc.ues.push_back(detail::read_point(p, "scenario.ues entry"));
                sc.num_ues = static_cast<int>(sc.ues.size());
                sc.ue_paths.assign(sc.num_ues, 3);
            }
            read(s, "sensing_paths", sc.sensing_paths, "scenario");
            read(s, "ue_paths", sc.ue_paths, "scenario");
            read(s, "eve_paths", sc.eve_paths, "scenario");
            read(s, "scatter_inner_m", sc.scatter_inner_radius, "scenario");
            read(s, "scatter_outer_m", sc.scatter_outer_radius, "scenario");
            read(s, "coherence_symbols", sc.coherence_symbols, "scenario");
        }
        if (j.contains("noise"))
        {
            const auto &n = j.at("noise");
            detail::reject_unknown(n, {"psd_dbm_per_hz", "noise_figure_db"}, "noise");
            read(n, "psd_dbm_per_hz", c.noise_psd_dbm_per_hz, "noise");
            read(n, "noise_figure_db", c.noise_figure_db, "noise");
        }
        if (j.contains("sweep"))
        {
            const auto &s = j.at("sweep");
            detail::reject_unknown(s, {"power_dbm"}, "sweep");
            read(s, "power_dbm", c.power_dbm, "sweep");
        }
        if (j.contains("sse"))
        {
            const auto &s = j.at("sse");
            detail::reject_unknown(s, {"trials", "schemes", "crb_threshold_factor", "crb_threshold_s2"}, "sse");
            read(s, "trials", c.sse_trials, "sse");
            read(s, "schemes", c.schemes, "sse");
            read(s, "crb_threshold_factor", c.crb_threshold_factor, "sse");
            if (s.contains("crb_threshold_s2") && !s.at("crb_threshold_s2").is_null())
            {
                double v = 0.0;
                read(s, "crb_threshold_s2", v, "sse");
                c.crb_threshold = v;
            }
        }
        if (j.contains("crb"))
        {
            const auto &s = j.at("crb");
            detail::reject_unknown(s, {"trials", "array_sizes"}, "crb");
            read(s, "trials", c.crb_trials, "crb");
            read(s, "array_sizes", c.crb_array_sizes, "crb");
        }
        if (j.contains("stage2"))
        {
            const auto &s = j.at("stage2");
            detail::reject_unknown(s, {"taps", "snapshots", "window_lead"}, "stage2");
            read(s, "taps", c.taps, "stage2");
            read(s, "snapshots", c.snapshots, "stage2");
            read(s, "window_lead", c.window_lead, "stage2");
        }
        if (j.contains("sca"))
        {
            const auto &s = j.at("sca");
            detail::reject_unknown(s, {"max_iterations", "tolerance", "solver_tolerance"}, "sca");
            read(s, "max_iterations", c.sca_max_iterations, "sca");
            read(s, "tolerance", c.sca_tolerance, "sca");
            read(s, "solver_tolerance", c.solver_tolerance, "sca");
        }
        c.scenario.noise_ue.assign(c.scenario.num_ues, 1.0);
        c.finalize();
        c.validate();
        return c;
    }

    inline nlohmann::json config_to_json(const ExperimentConfig &c)
    {
        using nlohmann::json;
        const auto &sc = c.scenario;
        json ues = json::array();
        for (const auto &p : sc.ues)
            ues.push_back({p.x, p.y});
        json j;
        j["seed"] = c.seed;
        j["threads"] = c.threads;
        j["scenario"] = {{"num_antennas", sc.array.num_antennas},
                         {"carrier_hz", c.carrier_hz},
                         {"bandwidth_hz", sc.array.bandwidth},
                         {"target", {sc.target.x, sc.target.y}},
                         {"ues", ues},
                         {"eve", {sc.eve.x, sc.eve.y}},
                         {"sensing_paths", sc.sensing_paths},
                         {"ue_paths", sc.ue_paths},
                         {"eve_paths", sc.eve_paths},
                         {"scatter_inner_m", sc.scatter_inner_radius},
                         {"scatter_outer_m", sc.scatter_outer_radius},
                         {"coherence_symbols", sc.coherence_symbols}};
        j["noise"] = {{"psd_dbm_per_hz", c.noise_psd_dbm_per_hz}, {"noise_figure_db", c.noise_figure_db}};
        j["sweep"] = {{"power_dbm", c.power_dbm}};
        j["sse"] = {{"trials", c.sse_trials},
                    {"schemes", c.schemes},
                    {"crb_threshold_factor", c.crb_threshold_factor},
                    {"crb_threshold_s2", c.crb_threshold ? json(*c.crb_threshold) : json(nullptr)}};
        j["crb"] = {{"trials", c.crb_trials}, {"array_sizes", c.crb_array_sizes}};
        j["stage2"] = {{"taps", c.taps}, {"snapshots", c.snapshots}, {"window_lead", c.window_lead}};
        j["sca"] = {{"max_iterations", c.sca_max_iterations},
                    {"tolerance", c.sca_tolerance},
                    {"solver_tolerance", c.solver_tolerance}};
        return j;
    }

    inline ExperimentConfig load_config(const std::string &path)
    {
        std::ifstream in(path);
        if (!in)
            throw ConfigError("config: cannot open '" + path + "'");
        nlohmann::json j;
        try
        {
            in >> j;
        }
        catch (const nlohmann::json::exception &e)
        {
            throw ConfigError("config: '" + path + "' is not valid JSON: " + e.what());
        }
        return config_from_json(j);
    }

    /// FNV-1a (64 bit) of the canonical JSON form.
    inline std::string config_hash(const ExperimentConfig &c)
    {
        const std::string s = config_to_json(c).dump();
        std::uint64_t h = 0xcbf29ce484222325ULL;
        for (unsigned char ch : s)
        {
            h ^= ch;
            h *= 0x100000001b3ULL;
        }
        char buf[17];
        std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
        return buf;
    }

    /// Independent generator for (seed, tags...).
    inline std::mt19937_64 derive_rng(std::uint64_t seed, std::initializer_list<std::uint32_t> tags)
    {
        std::vector<std::uint32_t> words{static_cast<std::uint32_t>(seed & 0xffffffffu),
                                         static_cast<std::uint32_t>(seed >> 32)};
        words.insert(words.end(), tags.begin(), tags.end());
        std::seed_seq seq(words.begin(), words.end());
        return std::mt19937_64(seq);
    }

    /// Runs fn(i) for i in [0, n) on up to `threads` workers (0 = hardware concurrency).
    inline void parallel_for(int n, int threads, const std::function<void(int)> &fn)
    {
        int workers = threads == 0 ? static_cast<int>(std::max(1u, std::thread::hardware_concurrency())) : threads;
        workers = std::max(1, std::min(workers, n));
        if (workers == 1)
        {
            for (int i = 0; i < n; ++i)
                fn(i);
            return;
        }
        std::atomic<int> next{0};
        std::vector<std::thread> pool;
        std::vector<std::exception_ptr> errors(workers);
        for (int w = 0; w < workers; ++w)
            pool.emplace_back([&, w] {
                try
                {
                    for (int i = next++; i < n; i = next++)
                        fn(i);
                }
                catch (...)
                {
                    errors[w] = std::current_exception();
                }
            });
        for (auto &t : pool)
            t.join();
        for (auto &e : errors)
            if (e)
                std::rethrow_exception(e);
    }

    struct ResultRow
    {
        std::string scheme;
        double power_dbm = 0.0;
        std::string metric;
        double value = 0.0;
        int trials = 0;
        double stderr_value = 0.0;
    };

    inline constexpr const char *kCsvHeader = "scheme,power_dbm,metric,value,trials,stderr";

    inline void write_csv(std::ostream &os, const std::vector<ResultRow> &rows)
    {
        os << kCsvHeader << '\n';
        char buf[512];
        for (const auto &r : rows)
        {
            std::snprintf(buf, sizeof(buf), "%s,%.10g,%s,%.17g,%d,%.17g\n", r.scheme.c_str(), r.power_dbm,
                          r.metric.c_str(), r.value, r.trials, r.stderr_value);
            os << buf;
        }
    }

    struct SampleSummary
    {
        double mean = 0.0;
        double stderr_value = 0.0;
        int count = 0;
    };

    /// Mean and standard error with pairwise summation over the samples in trial order.
    inline SampleSummary summarize(const std::vector<double> &v)
    {
        SampleSummary s;
        s.count = static_cast<int>(v.size());
        if (v.empty())
            return s;
        s.mean = pairwise_sum(v) / s.count;
        if (s.count > 1)
        {
            std::vector<double> sq(v.size());
            for (std::size_t i = 0; i < v.size(); ++i)
                sq[i] = (v[i] - s.mean) * (v[i] - s.mean);
            s.stderr_value = std::sqrt(pairwise_sum(sq) / (s.count - 1) / s.count);
        }
        return s;
    }

    /// Everything one secrecy trial needs, independent of the transmit power.
    struct SecrecyTrial
    {
        ChannelSet channels;
        ProjectorBank bank;
        QuadraticFormSet raw;
        QuadraticFormSet projected;
        LosEchoModel echo; // illumination left at zero; set per precoder
        CVec los_steering;
        double tau = 0.0;
        cd beta{};
        CrbCoefficients crb{};
        double threshold = 0.0;      // Gamma, s^2
        double sensing_floor = 0.0;  // Gamma_2 sigma_a^2 on |a^H f_s|^2
        double min_sensing_power = 0.0;
        int max_tap = 0;
    };

    inline SecrecyTrial prepare_secrecy_trial(const ExperimentConfig &cfg, std::mt19937_64 &rng)
    {
        SecrecyTrial t;
        const auto &sc = cfg.scenario;
        const auto &array = sc.array;
        t.channels = generate_channels(sc, rng);
        t.bank = build_projector_bank(t.channels, array);
        t.raw = build_quadratic_forms(t.channels, array, sc.noise_ue, sc.noise_eve);
        t.projected = effective_forms(t.bank, t.raw);
        const auto &los = t.channels.sensing.paths.front();
        t.tau = los.delay;
        t.beta = los.gain;
        t.los_steering = array_response(los.angle, array);
        const PulseShape pulse{cfg.taps, array.bandwidth, window_reference(t.tau, array.bandwidth, cfg.window_lead)};
        t.echo = make_los_echo_model(array, los.angle, CVec::Zero(array.num_antennas), pulse, cfg.snapshots, rng);
        t.crb.g = sensing_gain(t.tau, t.echo.probing, pulse);
        const double qa2 = (t.bank.sensing * t.los_steering).squaredNorm();
        const double s2 = sc.noise_sensing_stage2;
        if (cfg.crb_threshold)
            t.threshold = *cfg.crb_threshold;
        else
        {
            const double p_low = dbm_to_watt(cfg.power_dbm.front());
            const double crb_full = 1.0 / (std::norm(t.beta) * (2.0 * p_low * qa2 / s2) * t.crb.g);
            t.threshold = cfg.crb_threshold_factor * crb_full;
        }
        t.crb = crb_constraint_coeff(t.tau, t.beta, t.threshold, t.echo.probing, pulse);
        t.sensing_floor = t.crb.gamma2 * s2;
        t.min_sensing_power = t.sensing_floor / qa2;
        t.max_tap = max_user_tap(t.channels);
        return t;
    }

    struct SchemeOutcome
    {
        std::map<std::string, double> worst_sse;
        int sca_iterations = 0;
    };

    /// Worst-UE SSE of each requested scheme at one power level.
    inline SchemeOutcome run_schemes(const ExperimentConfig &cfg, const SecrecyTrial &t, double power_w)
    {
        const auto &sc = cfg.scenario;
        const int k_count = t.channels.num_ues();
        const auto split = crb_aware_split(power_w, k_count, t.min_sensing_power);
        const auto want = [&](const char *s) { return std::find(cfg.schemes.begin(), cfg.schemes.end(), s) != cfg.schemes.end(); };

        SchemeOutcome out;
        const PrecoderSet mrt = mrt_precoders(t.channels, sc.array, t.bank, split);
        if (want("mrt"))
            out.worst_sse["mrt"] = worst_user_sse(mrt, t.raw, sc.coherence_symbols, t.max_tap);
        if (want("sp"))
            out.worst_sse["sp"] =
                worst_user_sse(sp_precoders(t.channels, sc.array, t.bank, split), t.raw, sc.coherence_symbols, t.max_tap);
        if (want("optimized"))
        {
            const auto rp = build_reduced_problem(t.channels, sc.array, t.bank, t.projected,
                                                  {t.los_steering, t.sensing_floor}, power_w);
            ScaOptions opt;
            opt.max_iterations = cfg.sca_max_iterations;
            opt.tolerance = cfg.sca_tolerance;
            opt.solver.tolerance = cfg.solver_tolerance;
            const auto res = sca_loop(mrt, rp, opt);
            out.worst_sse["optimized"] = worst_user_sse(res.precoders, t.raw, sc.coherence_symbols, t.max_tap);
            out.sca_iterations = res.state.iteration;
        }
        return out;
    }

    /// Worst-UE SSE versus transmit power; channels are redrawn per trial and shared across power points.
    inline std::vector<ResultRow> run_sse_vs_power(const ExperimentConfig &cfg)
    {
        cfg.validate();
        const int n_pts = static_cast<int>(cfg.power_dbm.size());
        const int n_tr = cfg.sse_trials;
        // [trial][point] -> outcome (empty map when the trial failed at that point)
        std::vector<std::vector<std::map<std::string, double>>> slots(n_tr, std::vector<std::map<std::string, double>>(n_pts));
        parallel_for(n_tr, cfg.threads, [&](int trial) {
            auto rng = derive_rng(cfg.seed, {0x55u, static_cast<std::uint32_t>(trial)});
            SecrecyTrial t;
            try
            {
                t = prepare_secrecy_trial(cfg, rng);
            }
            catch (const InfeasibleError &)
            {
                return;
            }
            catch (const ModelError &)
            {
                return;
            }
            for (int p = 0; p < n_pts; ++p)
            {
                try
                {
                    slots[trial][p] = run_schemes(cfg, t, dbm_to_watt(cfg.power_dbm[p])).worst_sse;
                }
                catch (const InfeasibleError &)
                {
                    slots[trial][p].clear();
                }
            }
        });

        std::vector<ResultRow> rows;
        for (const auto &scheme : cfg.schemes)
            for (int p = 0; p < n_pts; ++p)
            {
                std::vector<double> v;
                for (int trial = 0; trial < n_tr; ++trial)
                    if (!slots[trial][p].empty())
                        v.push_back(slots[trial][p].at(scheme));
                const auto s = summarize(v);
                rows.push_back({scheme, cfg.power_dbm[p], "worst_sse", s.mean, s.count, s.stderr_value});
                rows.push_back({scheme, cfg.power_dbm[p], "failed_trials", static_cast<double>(n_tr - s.count), n_tr, 0.0});
            }
        return rows;
    }

    /// One fixed channel / probing block per array size; trials redraw only the noise.
    struct CrbSetup
    {
        LosEchoModel echo;
        double tau = 0.0;
        cd beta{};
        double noise = 0.0;
    };

    inline CrbSetup prepare_crb_setup(const ExperimentConfig &cfg, int num_antennas, double power_w)
    {
        ScenarioConfig sc = cfg.scenario;
        sc.array = ArrayConfig::half_wavelength(num_antennas, cfg.carrier_hz, sc.array.bandwidth);
        auto rng = derive_rng(cfg.seed, {0xC7u});
        const auto channels = generate_channels(sc, rng);
        const auto &los = channels.sensing.paths.front();
        const auto q = zf_sensing_projector(sensing_nlos_columns(channels.sensing, sc.array), num_antennas);
        const CVec v = q.matrix * array_response(los.angle, sc.array);
        const CVec f_s = std::sqrt(power_w) * v / v.norm();
        const PulseShape pulse{cfg.taps, sc.array.bandwidth, window_reference(los.delay, sc.array.bandwidth, cfg.window_lead)};
        CrbSetup s;
        s.echo = make_los_echo_model(sc.array, los.angle, f_s, pulse, cfg.snapshots, rng);
        s.tau = los.delay;
        s.beta = los.gain;
        s.noise = sc.noise_sensing_stage2;
        return s;
    }

    /// Squared delay errors of the ML estimator, initialised at the nearest tap.
    inline std::vector<double> delay_errors(const CrbSetup &s, const ExperimentConfig &cfg, std::uint32_t point,
                                            std::uint32_t array_tag, int *failures)
    {
        std::vector<double> err(cfg.crb_trials, -1.0);
        parallel_for(cfg.crb_trials, cfg.threads, [&](int trial) {
            auto rng = derive_rng(cfg.seed, {0xC8u, array_tag, point, static_cast<std::uint32_t>(trial)});
            const CVec y = s.echo.simulate(s.tau, s.beta, s.noise, rng);
            const double init = s.echo.pulse.from_taps(std::round(s.echo.pulse.to_taps(s.tau)));
            const auto est = estimate_delay(y, s.echo, init);
            if (est.converged)
                err[trial] = (est.delay - s.tau) * (est.delay - s.tau);
        });
        std::vector<double> out;
        for (double e : err)
            if (e >= 0.0)
                out.push_back(e);
        if (failures)
            *failures = cfg.crb_trials - static_cast<int>(out.size());
        return out;
    }

    inline std::vector<ResultRow> run_crb_rmse(const ExperimentConfig &cfg)
    {
        cfg.validate();
        std::vector<ResultRow> rows;
        for (int n : cfg.crb_array_sizes)
        {
            const std::string scheme = "array_" + std::to_string(n);
            for (std::size_t p = 0; p < cfg.power_dbm.size(); ++p)
            {
                const double pdbm = cfg.power_dbm[p];
                const auto s = prepare_crb_setup(cfg, n, dbm_to_watt(pdbm));
                const double crb = crb_delay(s.tau, s.beta, s.echo, s.noise);
                int failures = 0;
                const auto e2 = delay_errors(s, cfg, static_cast<std::uint32_t>(p), static_cast<std::uint32_t>(n), &failures);
                const auto mse = summarize(e2);
                const double rmse = std::sqrt(mse.mean);
                const double rmse_se = rmse > 0.0 ? mse.stderr_value / (2.0 * rmse) : 0.0;
                rows.push_back({scheme, pdbm, "crb", crb, 0, 0.0});
                rows.push_back({scheme, pdbm, "sqrt_crb", std::sqrt(crb), 0, 0.0});
                rows.push_back({scheme, pdbm, "rmse", rmse, mse.count, rmse_se});
                rows.push_back({scheme, pdbm, "rmse_over_sqrt_crb", rmse / std::sqrt(crb), mse.count,
                                rmse_se / std::sqrt(crb)});
                rows.push_back({scheme, pdbm, "failed_trials", static_cast<double>(failures), cfg.crb_trials, 0.0});
            }
        }
        return rows;
    }

    /// Machine-readable description of a run; contains no timestamps so reruns are identical.
    inline nlohmann::json run_manifest(const ExperimentConfig &cfg, const std::string &command,
                                       const std::vector<std::string> &outputs)
    {
        nlohmann::json m;
        m["tool"] = "damsec";
        m["version"] = kVersion;
        m["command"] = command;
        m["seed"] = cfg.seed;
        m["config_hash"] = "fnv1a64:" + config_hash(cfg);
        m["config"] = config_to_json(cfg);
        m["outputs"] = outputs;
        m["versions"] = {{"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                       std::to_string(EIGEN_MINOR_VERSION)},
                         {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                               std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                               std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
                         {"compiler", __VERSION__},
                         {"cxx_standard", static_cast<long>(__cplusplus)}};
        return m;
    }

} // namespace damsec

#endif
