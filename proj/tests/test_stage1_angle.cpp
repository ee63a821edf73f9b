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
    FrameConfig identity_frame(int n, int taps)
    {
        FrameConfig f;
        f.taps = taps;
        f.subframes = 1;
        f.probing = CMat::Identity(taps, taps);
        f.precoders = CMat::Identity(n, n);
        return f;
    }

    // Unitary DFT matrix of size n.
    CMat dft(int n)
    {
        CMat f(n, n);
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b)
                f(a, b) = std::exp(-kJ * (2.0 * kPi * a * b / n)) / std::sqrt(static_cast<double>(n));
        return f;
    }
} // namespace

TEST_CASE("FIR taps of a matched single path form a unit impulse", "[stage1]")
{
    const auto arr = array(8);
    const auto ch = link({path(1.0, 0.0, 3)});
    const CVec h = fir_taps(ch, arr, array_response(0.0, arr), 8);
    for (int m = 0; m < 8; ++m)
        CHECK(std::abs(h(m) - (m == 3 ? 1.0 : 0.0)) < 1e-14);
}

TEST_CASE("FIR taps vanish for a beam orthogonal to every path", "[stage1]")
{
    const auto arr = array(4);
    const auto ch = link({path(1.0, 0.0, 0), path(cd(0.3, 1), 0.0, 2)});
    CVec f(4);
    f << 1.0, -1.0, 0.0, 0.0;
    CHECK(fir_taps(ch, arr, f, 4).norm() < 1e-15);
}

TEST_CASE("FIR taps equal the matrix form entry by entry", "[stage1]")
{
    std::mt19937_64 rng(3);
    const auto arr = array(6);
    const auto ch = link({path(cgauss(rng), 12.0, 1), path(cgauss(rng), -30.0, 4)});
    const CVec f = random_cvec(6, rng);
    const CVec h = fir_taps(ch, arr, f, 6);
    // q[m]^H D^* A^H f with q[m] the tap-selection vector
    CMat a(6, 2);
    a << array_response(ch.paths[0].angle, arr), array_response(ch.paths[1].angle, arr);
    CMat d = CMat::Zero(2, 2);
    d(0, 0) = std::conj(ch.paths[0].gain);
    d(1, 1) = std::conj(ch.paths[1].gain);
    const CVec core = d * a.adjoint() * f;
    for (int m = 0; m < 6; ++m)
    {
        RVec q = RVec::Zero(2);
        for (int l = 0; l < 2; ++l)
            q(l) = ch.paths[l].tap == m ? 1.0 : 0.0;
        CHECK(std::abs(h(m) - q.cast<cd>().dot(core)) < 1e-14);
    }
}

TEST_CASE("identity probing and precoding observe the channel directly", "[stage1]")
{
    std::mt19937_64 rng(4);
    const auto arr = array(5);
    const auto ch = link({path(cgauss(rng), 10.0, 0), path(cgauss(rng), -25.0, 3)});
    const auto frame = identity_frame(5, 6);
    const CMat y = simulate_subframe(ch, arr, frame, 0.0, rng);
    CHECK((y - time_space_matrix(ch, arr, 6).adjoint()).norm() < 1e-15);
}

TEST_CASE("generic noiseless subframe equals the product form", "[stage1]")
{
    std::mt19937_64 rng(5);
    const auto arr = array(6);
    const auto ch = link({path(cgauss(rng), 10.0, 1), path(cgauss(rng), -25.0, 5)});
    const auto frame = make_frame_config(6, 8, 4, 2.0, rng);
    const CMat y = simulate_subframe(ch, arr, frame, 0.0, rng);
    const CMat expect = frame.probing.adjoint() * time_space_matrix(ch, arr, 8).adjoint() * frame.precoders;
    CHECK((y - expect).norm() < 1e-13 * expect.norm());
    // each slot carries the configured power
    for (int q = 0; q < frame.slots(); ++q)
        CHECK(frame.precoders.col(q).squaredNorm() == Approx(2.0).epsilon(1e-13));
}

TEST_CASE("noise-only subframe has the configured entry variance", "[stage1]")
{
    std::mt19937_64 rng(6);
    const auto arr = array(16);
    const auto ch = link({path(0.0, 0.0, 0)});
    const auto frame = identity_frame(16, 16);
    double acc = 0.0;
    const int reps = 200;
    for (int r = 0; r < reps; ++r)
        acc += simulate_subframe(ch, arr, frame, 0.7, rng).squaredNorm();
    CHECK(acc / (reps * 256.0) == Approx(0.7).epsilon(0.05));
}

TEST_CASE("noiseless least-squares estimate is exact", "[stage1]")
{
    std::mt19937_64 rng(7);
    const auto arr = array(8);
    for (int t = 0; t < 10; ++t)
    {
        const auto ch = random_link(3, 6, rng);
        const auto frame = make_frame_config(8, 8, 4, 1.0, rng);
        const CMat est = ls_channel_estimate(simulate_subframe(ch, arr, frame, 0.0, rng), frame);
        const CMat truth = time_space_matrix(ch, arr, 8).adjoint();
        CHECK((est - truth).norm() / truth.norm() < 1e-10);
    }
}

TEST_CASE("least-squares estimate of pure noise is the two-sided inverse", "[stage1]")
{
    std::mt19937_64 rng(8);
    const auto frame = make_frame_config(5, 6, 1, 1.0, rng);
    const CMat w = random_cmat(6, 5, rng);
    const CMat s = frame.probing, f = frame.precoders;
    const CMat s_left = (s * s.adjoint()).inverse() * s;
    const CMat f_right = f.adjoint() * (f * f.adjoint()).inverse();
    CHECK((ls_channel_estimate(w, frame) - s_left * w * f_right).norm() < 1e-10 * w.norm());
}

TEST_CASE("estimate noise power scales with the precoder gain", "[stage1]")
{
    std::mt19937_64 rng(9);
    const int n = 8, m = 8;
    const double c = 3.0, sigma2 = 2.0;
    FrameConfig frame;
    frame.taps = m;
    frame.probing = dft(m);
    frame.precoders = c * dft(n);
    const auto ch = link({path(0.0, 0.0, 0)});
    double acc = 0.0;
    const int reps = 400;
    for (int r = 0; r < reps; ++r)
        acc += ls_channel_estimate(simulate_subframe(ch, array(n), frame, sigma2, rng), frame).squaredNorm();
    // unitary S_a and F_s = c U: each estimate entry carries sigma^2 / c^2
    CHECK(acc / (reps * n * m) == Approx(sigma2 / (c * c)).epsilon(0.03));
}

TEST_CASE("ill-conditioned probing is rejected", "[stage1]")
{
    auto frame = identity_frame(4, 4);
    frame.probing(3, 3) = 0.0;
    CHECK_THROWS_AS(ls_channel_estimate(CMat::Zero(4, 4), frame), ConditioningError);
    CHECK_THROWS_AS(time_space_matrix(link({path(1.0, 0, 9)}), array(4), 4), ConfigError);
}

TEST_CASE("frame covariance shapes", "[stage1]")
{
    std::mt19937_64 rng(10);
    const CVec u = random_cvec(12, rng);
    const CMat r1 = frame_covariance({u});
    CHECK((r1 - u * u.adjoint()).norm() < 1e-13);
    Eigen::SelfAdjointEigenSolver<CMat> eig(r1);
    CHECK(eig.eigenvalues()(10) < 1e-12 * eig.eigenvalues()(11));
    CHECK((frame_covariance({u, u, u}) - u * u.adjoint()).norm() < 1e-12);
}

TEST_CASE("noiseless covariance spans the space-time signatures", "[stage1]")
{
    std::mt19937_64 rng(11);
    const auto arr = array(6);
    const int taps = 6;
    const auto ch = link({path(cgauss(rng), 10.0, 0), path(cgauss(rng), -20.0, 2), path(cgauss(rng), 35.0, 4)});
    const auto frame = make_frame_config(6, taps, 8, 1.0, rng);
    const CMat r = frame_covariance(simulate_frame(ch, arr, frame, 0.0, rng));
    Eigen::SelfAdjointEigenSolver<CMat> eig(r);
    const Eigen::Index dim = r.rows();
    const CMat es = eig.eigenvectors().rightCols(3);
    CHECK(eig.eigenvalues()(dim - 4) < 1e-10 * eig.eigenvalues()(dim - 1));
    const auto m = SpaceTimeManifold::with_default_grid(arr, taps);
    CMat u(dim, 3);
    for (int l = 0; l < 3; ++l)
        u.col(l) = m.column(ch.paths[l].angle, ch.paths[l].tap);
    const CMat pu = u * (u.adjoint() * u).inverse() * u.adjoint();
    CHECK((pu - es * es.adjoint()).norm() < 1e-8);
}

TEST_CASE("MUSIC recovers on-grid paths exactly without noise", "[stage1]")
{
    std::mt19937_64 rng(12);
    const auto arr = array(8);
    const int taps = 8;
    const auto m = SpaceTimeManifold::with_default_grid(arr, taps);
    SECTION("single source")
    {
        const auto ch = link({path(cgauss(rng), 17.25, 3)});
        const auto frame = make_frame_config(8, taps, 4, 1.0, rng);
        const auto res = music_estimate(frame_covariance(simulate_frame(ch, arr, frame, 0.0, rng)), 1, m);
        REQUIRE(res.success);
        CHECK(rad_to_deg(res.peaks[0].angle) == Approx(17.25).margin(1e-9));
        CHECK(res.peaks[0].delay_taps == Approx(3.0).margin(1e-9));
    }
    SECTION("three sources")
    {
        const auto ch = link({path(cgauss(rng), -40.0, 0), path(cgauss(rng), 5.5, 2), path(cgauss(rng), 33.0, 6)});
        const auto frame = make_frame_config(8, taps, 8, 1.0, rng);
        const auto res = music_estimate(frame_covariance(simulate_frame(ch, arr, frame, 0.0, rng)), 3, m);
        REQUIRE(res.success);
        REQUIRE(res.peaks.size() == 3);
        for (const auto &p : ch.paths)
        {
            bool found = false;
            for (const auto &e : res.peaks)
                found = found || (std::abs(e.angle - p.angle) < 1e-9 && std::abs(e.delay_taps - p.tap) < 1e-9);
            CHECK(found);
        }
    }
}

TEST_CASE("MUSIC grid peak matches a brute-force pseudo-spectrum scan", "[stage1]")
{
    std::mt19937_64 rng(13);
    const auto arr = array(6);
    const int taps = 6;
    const auto m = SpaceTimeManifold::with_default_grid(arr, taps, 1.0);
    const auto ch = link({path(cgauss(rng), -12.0, 2)});
    const auto frame = make_frame_config(6, taps, 4, 1.0, rng);
    const CMat r = frame_covariance(simulate_frame(ch, arr, frame, 1e-3, rng));
    const auto res = music_estimate(r, 1, m);
    REQUIRE(res.success);
    Eigen::SelfAdjointEigenSolver<CMat> eig(r);
    const CMat en = eig.eigenvectors().leftCols(r.rows() - 1);
    double best = -1.0;
    int bi = -1, bj = -1;
    for (std::size_t i = 0; i < m.angles.size(); ++i)
        for (std::size_t j = 0; j < m.delays.size(); ++j)
        {
            const double v = 1.0 / (en.adjoint() * m.column(m.angles[i], m.delays[j])).squaredNorm();
            if (v > best)
            {
                best = v;
                bi = static_cast<int>(i);
                bj = static_cast<int>(j);
            }
        }
    CHECK(res.peaks[0].angle_index == bi);
    CHECK(res.peaks[0].delay_index == bj);
}

TEST_CASE("MUSIC reports failure on a flat spectrum", "[stage1]")
{
    const auto arr = array(4);
    const auto m = SpaceTimeManifold::with_default_grid(arr, 4);
    const auto res = music_estimate(CMat::Identity(16, 16), 2, m);
    CHECK_FALSE(res.success);
    CHECK_FALSE(res.message.empty());
    CHECK_THROWS(music_estimate(CMat::Identity(15, 15), 1, m));
}

TEST_CASE("MUSIC resolves two sources at 20 dB SNR", "[stage1]")
{
    std::mt19937_64 rng(14);
    const auto arr = array(8);
    const int taps = 8;
    const auto m = SpaceTimeManifold::with_default_grid(arr, taps);
    const double step = deg_to_rad(0.25);
    std::uniform_int_distribution<int> ang(-200, 200);
    std::uniform_int_distribution<int> tap(0, taps - 1);
    int hits = 0;
    const int trials = 100;
    for (int t = 0; t < trials; ++t)
    {
        int a1 = ang(rng), a2 = ang(rng), d1 = tap(rng), d2 = tap(rng);
        while (std::abs(a1 - a2) <= 2)
            a2 = ang(rng);
        while (std::abs(d1 - d2) <= 2)
            d2 = tap(rng);
        const auto ch = link({path(1.0, a1 * 0.25, d1), path(1.0, a2 * 0.25, d2)});
        const auto frame = make_frame_config(8, taps, 32, 1.0, rng);
        const double sig = (frame.probing.adjoint() * time_space_matrix(ch, arr, taps).adjoint() * frame.precoders)
                               .squaredNorm() /
                           (taps * 8.0);
        const auto res = music_estimate(frame_covariance(simulate_frame(ch, arr, frame, sig / 100.0, rng)), 2, m);
        if (!res.success)
            continue;
        int ok = 0;
        for (const auto &p : ch.paths)
            for (const auto &e : res.peaks)
                if (std::abs(e.angle - p.angle) <= step * 1.0001 && std::abs(e.delay_taps - p.tap) <= 1.0001)
                {
                    ++ok;
                    break;
                }
        hits += ok == 2;
    }
    CHECK(hits >= 95);
}
