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

namespace
{
    ChannelSet single_link_set()
    {
        ChannelSet set;
        set.sensing = link({path(1.0, -30, 0)}, LinkRole::Sensing);
        set.ues.push_back(link({path(cd(0.4, 0.3), 12, 0)}, LinkRole::User, 0));
        set.eve = link({path(0.1, 50, 0)}, LinkRole::Eve);
        return set;
    }

    double rank_of(const CMat &m)
    {
        Eigen::SelfAdjointEigenSolver<CMat> eig(m);
        int r = 0;
        for (Eigen::Index i = 0; i < eig.eigenvalues().size(); ++i)
            r += eig.eigenvalues()(i) > 0.5;
        return r;
    }
} // namespace

TEST_CASE("communication projector for one user and one sensing path", "[precoding]")
{
    const auto arr = array(8);
    const auto set = single_link_set();
    std::vector<NulledColumn> reg;
    const auto q = build_comm_projector(0, 0, set, arr, &reg);
    REQUIRE(reg.size() == 1);
    CHECK(reg[0].role == LinkRole::Sensing);
    const CVec hs = spatial_vector(set.sensing.paths[0], arr);
    CHECK((q.matrix * hs).norm() < 1e-10 * hs.norm());
}

TEST_CASE("projectors null every registered column", "[precoding]")
{
    std::mt19937_64 rng(1);
    const auto arr = array(16);
    for (int t = 0; t < 10; ++t)
    {
        const auto set = random_channel_set(2, 3, 6, rng);
        const auto bank = build_projector_bank(set, arr);
        for (int k = 0; k < 2; ++k)
            for (int l = 0; l < 3; ++l)
            {
                const CMat &q = bank.comm[k][l];
                CMat hsc(16, bank.nulled[k][l].size());
                int c = 0;
                for (const auto &col : bank.nulled[k][l])
                {
                    const auto &p = col.role == LinkRole::Sensing ? set.sensing.paths[col.path]
                                                                  : set.ues[col.user].paths[col.path];
                    const CVec h = spatial_vector(p, arr);
                    hsc.col(c++) = h;
                    for (int r = 0; r < 10; ++r)
                    {
                        const CVec x = random_cvec(16, rng);
                        CHECK(std::abs(h.dot(q * x)) < 1e-10 * h.norm() * x.norm());
                    }
                }
                CHECK(bank.nulled[k][l].size() == 3 + 5);
                // rank audit through an independent SVD of the nulled block
                Eigen::JacobiSVD<CMat> svd(hsc);
                int rk = 0;
                for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i)
                    rk += svd.singularValues()(i) > 1e-10 * svd.singularValues()(0);
                CHECK(rank_of(q) == 16 - rk);
            }
        CHECK(projector_defect(bank, set, arr) < 1e-10);
    }
}

TEST_CASE("sensing projector keeps the LoS direction", "[precoding]")
{
    const auto arr = array(8);
    ChannelSet set;
    set.sensing = link({path(1.0, 0, 0)}, LinkRole::Sensing);
    // a user at endfire-ish angle orthogonal to broadside for N = 8: sin(phi) = 2/8
    set.ues.push_back(link({path(1.0, rad_to_deg(std::asin(0.25)), 0)}, LinkRole::User, 0));
    set.eve = link({path(1.0, 40, 0)}, LinkRole::Eve);
    const CVec a = array_response(0.0, arr);
    REQUIRE(std::abs(a.dot(spatial_vector(set.ues[0].paths[0], arr))) < 1e-12);
    const auto q = build_sensing_projector(set, arr);
    CHECK((q.matrix * a).norm() >= 1.0 - 1e-10);

    std::mt19937_64 rng(2);
    const auto rnd = random_channel_set(2, 3, 6, rng);
    const auto qs = build_sensing_projector(rnd, array(16));
    for (const auto &ch : rnd.ues)
        for (const auto &p : ch.paths)
        {
            const CVec h = spatial_vector(p, array(16));
            const CVec b = random_cvec(16, rng);
            CHECK(std::abs(h.dot(qs.matrix * b)) < 1e-10 * h.norm() * b.norm());
        }
    // nonzero LoS illumination whenever the steering is outside the nulled span
    const CVec al = array_response(rnd.sensing.paths[0].angle, array(16));
    CHECK(std::abs(al.dot(qs.matrix * al)) > 0.0);
}

TEST_CASE("sensing projector rejects a LoS direction inside the nulled span", "[precoding]")
{
    const auto arr = array(8);
    ChannelSet set;
    set.sensing = link({path(1.0, 10, 0)}, LinkRole::Sensing);
    set.ues.push_back(link({path(2.0, 10, 0)}, LinkRole::User, 0));
    set.eve = link({path(1.0, 40, 0)}, LinkRole::Eve);
    CHECK_THROWS_AS(build_sensing_projector(set, arr), InfeasibleError);
}

TEST_CASE("too many paths for the antenna count", "[precoding]")
{
    std::mt19937_64 rng(3);
    const auto set = random_channel_set(2, 3, 6, rng);
    try
    {
        build_comm_projector(0, 0, set, array(6));
        FAIL("expected InfeasibleError");
    }
    catch (const InfeasibleError &e)
    {
        CHECK(std::string(e.what()).find("3 more antenna") != std::string::npos);
    }
}

TEST_CASE("projected forms agree with full forms under f = Q b", "[precoding]")
{
    std::mt19937_64 rng(4);
    const auto arr = array(16);
    const auto set = random_channel_set(2, 3, 5, rng);
    const auto bank = build_projector_bank(set, arr);
    const std::vector<double> noise{1.0, 1.0};
    const auto raw = build_quadratic_forms(set, arr, noise, 1.0);
    const auto eff = effective_forms(bank, raw);
    for (int t = 0; t < 10; ++t)
    {
        const CVec b = random_cvec(16 * 3, rng);
        CHECK(hermitian_form(eff.ue[0].isi, b) < 1e-12 * b.squaredNorm() * raw.ue[0].isi.norm());

        auto pre_b = random_precoders(set, 16, 1.0, rng);
        PrecoderSet pre_f = pre_b;
        for (int k = 0; k < 2; ++k)
            for (int l = 0; l < 3; ++l)
                pre_f.comm[k][l] = bank.comm[k][l] * pre_b.comm[k][l];
        pre_f.sensing = bank.sensing * pre_b.sensing;
        for (int k = 0; k < 2; ++k)
        {
            const auto a = ue_terms(k, pre_b, eff), f = ue_terms(k, pre_f, raw);
            CHECK(a.desired == Approx(f.desired).epsilon(1e-10));
            CHECK(a.interference() == Approx(f.interference()).margin(1e-10 * f.desired));
            const auto ea = eve_terms(k, pre_b, eff), ef = eve_terms(k, pre_f, raw);
            CHECK(ea.desired == Approx(ef.desired).epsilon(1e-10));
            CHECK(ea.interference() == Approx(ef.interference()).epsilon(1e-10));
        }
    }
    const auto zero = zero_precoders(set, 16);
    CHECK(ue_terms(0, zero, eff).desired == 0.0);
    CHECK(eve_terms(1, zero, eff).interference() == 0.0);
}

TEST_CASE("MRT precoders", "[precoding]")
{
    std::mt19937_64 rng(5);
    const auto arr = array(16);
    SECTION("single path reduces to the projected matched filter")
    {
        const auto set = single_link_set();
        const auto arr8 = array(8);
        const auto bank = build_projector_bank(set, arr8);
        PowerSplit split{0.5, {2.0}};
        const auto pre = mrt_precoders(set, arr8, bank, split);
        const CVec v = bank.comm[0][0] * spatial_vector(set.ues[0].paths[0], arr8);
        CHECK((pre.comm[0][0] - std::sqrt(2.0) * v / v.norm()).norm() < 1e-12);
        CHECK((sp_precoders(set, arr8, bank, split).comm[0][0] - pre.comm[0][0]).norm() < 1e-12);
    }
    SECTION("power audit and closed-form SINR")
    {
        for (int t = 0; t < 10; ++t)
        {
            const auto set = random_channel_set(2, 3, 5, rng);
            const auto bank = build_projector_bank(set, arr);
            const auto split = equal_split(3.0, 2);
            const auto pre = mrt_precoders(set, arr, bank, split);
            CHECK(pre.total_power() == Approx(3.0).epsilon(1e-10));
            const std::vector<double> noise{0.2, 0.2};
            const auto raw = build_quadratic_forms(set, arr, noise, 0.2);
            for (int k = 0; k < 2; ++k)
            {
                double g = 0.0;
                for (int l = 0; l < 3; ++l)
                    g += (bank.comm[k][l] * spatial_vector(set.ues[k].paths[l], arr)).squaredNorm();
                CHECK(sinr_ue(k, pre, raw) == Approx(split.users[k] * g / 0.2).epsilon(1e-9));
            }
        }
    }
}

TEST_CASE("strongest-path precoders use one path per user", "[precoding]")
{
    const auto arr = array(8);
    ChannelSet set;
    set.sensing = link({path(1.0, -30, 0)}, LinkRole::Sensing);
    set.ues.push_back(link({path(1.0, 12, 0), path(2.0, 40, 3)}, LinkRole::User, 0));
    set.eve = link({path(0.1, 50, 0)}, LinkRole::Eve);
    const auto bank = build_projector_bank(set, arr);
    const auto pre = sp_precoders(set, arr, bank, {0.5, {1.0}});
    CHECK(pre.comm[0][0].norm() == 0.0);
    CHECK(pre.comm[0][1].squaredNorm() == Approx(1.0));
}

TEST_CASE("MRT is at least as secure as the strongest path on most draws", "[precoding]")
{
    std::mt19937_64 rng(6);
    const auto sc = scenario();
    int wins = 0, total = 0;
    for (int t = 0; t < 100; ++t)
    {
        const auto set = generate_channels(sc, rng);
        const auto bank = build_projector_bank(set, sc.array);
        const auto raw = build_quadratic_forms(set, sc.array, sc.noise_ue, sc.noise_eve);
        const auto split = crb_aware_split(0.1, 2, 0.01);
        const int mt = max_user_tap(set);
        const double mrt = worst_user_sse(mrt_precoders(set, sc.array, bank, split), raw, 1000, mt);
        const double sp = worst_user_sse(sp_precoders(set, sc.array, bank, split), raw, 1000, mt);
        wins += mrt >= sp;
        ++total;
    }
    CHECK(wins >= 90);
}

TEST_CASE("power splits", "[precoding]")
{
    const auto e = equal_split(3.0, 2);
    CHECK(e.sensing == Approx(1.0));
    CHECK(e.total() == Approx(3.0));
    const auto c = crb_aware_split(1.0, 2, 0.1);
    CHECK(c.sensing == Approx(0.2));
    CHECK(c.total() == Approx(1.0));
    CHECK(crb_aware_split(1.0, 1, 0.8).sensing == Approx(0.9));
    CHECK_THROWS_AS(crb_aware_split(1.0, 2, 1.0), InfeasibleError);
}
