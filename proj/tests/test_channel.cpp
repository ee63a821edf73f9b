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

using namespace damsec;
using namespace damsec::testing;
using Catch::Approx;

TEST_CASE("steering vector at broadside and endfire", "[channel]")
{
    const CVec a = array_response(0.0, array(2));
    CHECK(std::abs(a(0) - 1.0 / std::sqrt(2.0)) < 1e-15);
    CHECK(std::abs(a(1) - 1.0 / std::sqrt(2.0)) < 1e-15);

    const CVec e = array_response(kPi / 2 - 1e-9, array(4));
    const double expect[] = {0.5, -0.5, 0.5, -0.5};
    for (int m = 0; m < 4; ++m)
        CHECK(std::abs(e(m) - expect[m]) < 1e-7);
}

TEST_CASE("steering vectors have unit norm", "[channel]")
{
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-kPi / 2, kPi / 2);
    for (int t = 0; t < 100; ++t)
        CHECK(array_response(u(rng), array(30)).norm() == Approx(1.0).epsilon(1e-13));
}

TEST_CASE("large-scale gain follows the distance law", "[channel]")
{
    CHECK(large_scale_gain(1.0, PathType::LoS) == Approx(std::pow(10.0, -6.14)).epsilon(1e-13));
    CHECK(large_scale_gain(1.0, PathType::NLoS) == Approx(std::pow(10.0, -7.2)).epsilon(1e-13));
    CHECK(large_scale_gain(10.0, PathType::LoS) == Approx(std::pow(10.0, -6.14) * 1e-2).epsilon(1e-13));
    CHECK_THROWS_AS(large_scale_gain(0.5, PathType::LoS), ModelError);
    CHECK_THROWS_AS(large_scale_gain(0.0, PathType::NLoS), ModelError);
}

TEST_CASE("channel generation is deterministic for a seed", "[channel]")
{
    auto sc = scenario();
    sc.seed = 99;
    const auto a = generate_channels(sc);
    const auto b = generate_channels(sc);
    REQUIRE(a.ues.size() == b.ues.size());
    for (int l = 0; l < a.sensing.size(); ++l)
    {
        CHECK(a.sensing.paths[l].gain == b.sensing.paths[l].gain);
        CHECK(a.sensing.paths[l].tap == b.sensing.paths[l].tap);
    }
    CHECK(a.eve.paths.back().angle == b.eve.paths.back().angle);
    sc.seed = 100;
    CHECK(generate_channels(sc).sensing.paths[0].gain != a.sensing.paths[0].gain);
}

TEST_CASE("single-path LoS gain power matches N K d^-2", "[channel]")
{
    auto sc = scenario(30);
    sc.num_ues = 1;
    sc.ues = {{20.0, 0.0}};
    sc.ue_paths = {1};
    sc.noise_ue = {1.0};
    std::mt19937_64 rng(5);
    const int draws = 20000;
    double acc = 0.0;
    for (int t = 0; t < draws; ++t)
    {
        const auto ch = detail::draw_link(sc.ues[0], 1, false, sc, rng);
        REQUIRE(ch.size() == 1);
        CHECK(ch.paths[0].tap == 0);
        acc += std::norm(ch.paths[0].gain);
    }
    const double expect = 30.0 * std::pow(10.0, -6.14) * std::pow(20.0, -2.0);
    CHECK(acc / draws == Approx(expect).epsilon(0.03));
}

TEST_CASE("sensing echo is a round trip", "[channel]")
{
    auto sc = scenario();
    sc.target = {15.0, 0.0};
    std::mt19937_64 rng(8);
    const auto ch = detail::draw_link(sc.target, 3, true, sc, rng);
    CHECK(ch.paths[0].delay == Approx(30.0 / kSpeedOfLight).epsilon(1e-14));
    CHECK(ch.paths[0].delay == Approx(100.07e-9).epsilon(1e-4));
    CHECK(ch.paths[0].angle == Approx(0.0).margin(1e-15));
    for (const auto &p : ch.paths)
        CHECK(p.tap == std::lround(128e6 * (p.delay - ch.timing_reference)));
    CHECK(ch.timing_reference == Approx(ch.paths[0].delay));
    CHECK(taps_distinct(ch));
}

TEST_CASE("generated links have resolvable paths and the requested counts", "[channel]")
{
    auto sc = scenario();
    std::mt19937_64 rng(21);
    for (int t = 0; t < 20; ++t)
    {
        const auto set = generate_channels(sc, rng);
        CHECK(set.sensing.size() == 3);
        CHECK(set.eve.size() == 3);
        REQUIRE(set.num_ues() == 2);
        for (const auto &ch : set.ues)
        {
            CHECK(taps_distinct(ch));
            CHECK(ch.min_tap() == 0);
        }
        CHECK(taps_distinct(set.sensing));
        CHECK(set.sensing.paths[0].type == PathType::LoS);
    }
}

TEST_CASE("spatial vectors scale the steering vector", "[channel]")
{
    const auto p = path(1.0, 0.0, 0);
    const CVec h = spatial_vector(p, array(4));
    for (int m = 0; m < 4; ++m)
        CHECK(std::abs(h(m) - 0.5) < 1e-15);
    CHECK(spatial_vector(path(0.0, 17.0, 0), array(4)).norm() == 0.0);

    std::mt19937_64 rng(4);
    for (int t = 0; t < 50; ++t)
    {
        const auto q = path(cgauss(rng), 80.0 * (std::uniform_real_distribution<double>(-1, 1)(rng)), 0);
        CHECK(spatial_vector(q, array(16)).norm() == Approx(std::abs(q.gain)).epsilon(1e-13));
    }
}

TEST_CASE("invalid geometry and configuration are rejected", "[channel]")
{
    auto sc = scenario();
    sc.ues[0] = {-3.0, 4.0};
    CHECK_THROWS_AS(generate_channels(sc), ModelError);

    auto bad = scenario();
    bad.ue_paths = {3};
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = scenario();
    bad.noise_eve = 0.0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = scenario();
    bad.scatter_outer_radius = 1.0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = scenario();
    bad.array.num_antennas = 0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);

    auto close = scenario();
    close.eve = {0.5, 0.0};
    CHECK_THROWS_AS(generate_channels(close), ModelError);
}
