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


#include "test_support.hpp"

#include <catch_amalgamated.hpp>

#include <atomic>
#include <sstream>

using namespace damsec;
using namespace damsec::testing;
using Catch::Approx;
using nlohmann::json;

TEST_CASE("thermal noise power", "[experiments]")
{
    CHECK(noise_variance(-174.0, 0.0, 1.0) == Approx(3.981071705534985e-21).epsilon(1e-12));
    CHECK(noise_variance(-174.0, 9.0, 128e6) == Approx(3.1622776601683795e-17 * 1.28e8 * 1e-3).epsilon(1e-12));
    CHECK(noise_variance(-30.0, 0.0, 1.0) == Approx(1e-6));
    CHECK_THROWS_AS(noise_variance(-174.0, 9.0, 0.0), ConfigError);
}

TEST_CASE("configuration parsing", "[experiments]")
{
    SECTION("empty object gives the defaults")
    {
        const auto c = config_from_json(json::object());
        CHECK(c.seed == 2026);
        CHECK(c.scenario.array.num_antennas == 30);
        CHECK(c.power_dbm.size() == 7);
        CHECK(c.scenario.noise_eve == Approx(noise_variance(-174.0, 9.0, 128e6)));
        CHECK(c.scenario.noise_ue.size() == 2);
    }
    SECTION("overrides")
    {
        const auto c = config_from_json(json::parse(R"({"seed": 5, "scenario": {"num_antennas": 40,
            "ues": [[20, 0]]}, "sweep": {"power_dbm": [1, 2]}, "sse": {"schemes": ["mrt"]}})"));
        CHECK(c.seed == 5);
        CHECK(c.scenario.array.num_antennas == 40);
        CHECK(c.scenario.num_ues == 1);
        CHECK(c.scenario.ue_paths.size() == 1);
        CHECK(c.schemes == std::vector<std::string>{"mrt"});
    }
    SECTION("errors")
    {
        CHECK_THROWS_AS(config_from_json(json::parse(R"({"sede": 1})")), ConfigError);
        CHECK_THROWS_AS(config_from_json(json::parse(R"({"scenario": {"antennas": 4}})")), ConfigError);
        CHECK_THROWS_AS(config_from_json(json::parse(R"({"seed": "x"})")), ConfigError);
        CHECK_THROWS_AS(config_from_json(json::parse(R"({"sweep": {"power_dbm": [5, 0]}})")), ConfigError);
        CHECK_THROWS_AS(config_from_json(json::parse(R"({"sse": {"schemes": ["zf"]}})")), ConfigError);
        CHECK_THROWS_AS(config_from_json(json::parse(R"({"scenario": {"target": [1]}})")), ConfigError);
        CHECK_THROWS_AS(config_from_json(json::parse(R"({"stage2": {"taps": 4}})")), ConfigError);
        try
        {
            load_config("/nonexistent/cfg.json");
            FAIL("expected ConfigError");
        }
        catch (const ConfigError &e)
        {
            CHECK(std::string(e.what()).find("/nonexistent/cfg.json") != std::string::npos);
        }
    }
}

TEST_CASE("shipped configurations load", "[experiments]")
{
    const std::string root = DAMSEC_SOURCE_DIR;
    const auto d = load_config(root + "/configs/default.json");
    ExperimentConfig builtin;
    builtin.finalize();
    CHECK(config_hash(d) == config_hash(builtin));
    const auto s = load_config(root + "/configs/smoke.json");
    CHECK(s.seed == 7);
}

TEST_CASE("config hash and round trip", "[experiments]")
{
    ExperimentConfig a;
    a.finalize();
    const auto b = config_from_json(config_to_json(a));
    CHECK(config_hash(a) == config_hash(b));
    CHECK(config_hash(a).size() == 16);
    ExperimentConfig c = a;
    c.seed = 1;
    CHECK(config_hash(c) != config_hash(a));
    c = a;
    c.crb_threshold = 1e-20;
    CHECK(config_hash(c) != config_hash(a));
    CHECK(config_from_json(config_to_json(c)).crb_threshold.value() == 1e-20);
}

TEST_CASE("seed derivation", "[experiments]")
{
    auto a = derive_rng(1, {2u, 3u});
    auto b = derive_rng(1, {2u, 3u});
    auto c = derive_rng(1, {3u, 2u});
    const auto x = a();
    CHECK(x == b());
    CHECK(x != c());
    CHECK(derive_rng(1ull << 32, {})() != derive_rng(0, {})());
}

TEST_CASE("parallel_for covers every index once and forwards errors", "[experiments]")
{
    std::vector<std::atomic<int>> hits(97);
    parallel_for(97, 4, [&](int i) { hits[i]++; });
    for (const auto &h : hits)
        CHECK(h.load() == 1);
    CHECK_THROWS_AS(parallel_for(10, 3, [](int i) {
                        if (i == 7)
                            throw ModelError("boom");
                    }),
                    ModelError);
}

TEST_CASE("CSV layout", "[experiments]")
{
    std::ostringstream os;
    write_csv(os, {{"mrt", 10.0, "worst_sse", 1.5, 3, 0.25}});
    CHECK(os.str() == "scheme,power_dbm,metric,value,trials,stderr\nmrt,10,worst_sse,1.5,3,0.25\n");
    const auto s = summarize({1.0, 2.0, 3.0, 4.0});
    CHECK(s.mean == 2.5);
    CHECK(s.stderr_value == Approx(std::sqrt(5.0 / 3.0 / 4.0)));
    CHECK(summarize({}).count == 0);
}

TEST_CASE("secrecy sweep is reproducible", "[experiments]")
{
    ExperimentConfig cfg;
    cfg.power_dbm = {10.0, 30.0};
    cfg.sse_trials = 1;
    cfg.schemes = {"mrt"};
    cfg.finalize();
    std::ostringstream a, b;
    write_csv(a, run_sse_vs_power(cfg));
    write_csv(b, run_sse_vs_power(cfg));
    CHECK(a.str() == b.str());

    cfg.sse_trials = 3;
    cfg.threads = 3;
    const auto threaded = run_sse_vs_power(cfg);
    cfg.threads = 1;
    const auto serial = run_sse_vs_power(cfg);
    REQUIRE(threaded.size() == serial.size());
    for (std::size_t i = 0; i < serial.size(); ++i)
        CHECK(threaded[i].value == serial[i].value);
}

TEST_CASE("CRB shrinks with the array size", "[experiments]")
{
    ExperimentConfig cfg;
    cfg.finalize();
    for (double pdbm : {0.0, 30.0})
    {
        const auto s30 = prepare_crb_setup(cfg, 30, dbm_to_watt(pdbm));
        const auto s100 = prepare_crb_setup(cfg, 100, dbm_to_watt(pdbm));
        CHECK(crb_delay(s100.tau, s100.beta, s100.echo, s100.noise) < crb_delay(s30.tau, s30.beta, s30.echo, s30.noise));
    }
    const auto lo = prepare_crb_setup(cfg, 30, dbm_to_watt(0.0));
    const auto hi = prepare_crb_setup(cfg, 30, dbm_to_watt(30.0));
    CHECK(crb_delay(lo.tau, lo.beta, lo.echo, lo.noise) / crb_delay(hi.tau, hi.beta, hi.echo, hi.noise) ==
          Approx(1000.0).epsilon(1e-9));
}

TEST_CASE("run manifest", "[experiments]")
{
    ExperimentConfig cfg;
    cfg.finalize();
    const auto m = run_manifest(cfg, "sse-sweep", {"sse_vs_power.csv"});
    CHECK(m.at("tool") == "damsec");
    CHECK(m.at("version") == kVersion);
    CHECK(m.at("seed") == 2026);
    CHECK(m.at("config_hash") == "fnv1a64:" + config_hash(cfg));
    CHECK(m.at("outputs")[0] == "sse_vs_power.csv");
    CHECK(m.at("versions").contains("eigen"));
    CHECK(config_from_json(m.at("config")).seed == 2026);
}
