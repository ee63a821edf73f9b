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

#ifndef DAMSEC_STAGE1_ANGLE_HPP
#define DAMSEC_STAGE1_ANGLE_HPP

// First sensing stage: slot/subframe/frame probing, least-squares recovery of
// the time-space channel and 2-D MUSIC over the space-time manifold p(tau) (x) a(phi).

#include "channel.hpp"
#include "linalg.hpp"
#include "pulse.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <random>
#include <string>
#include <vector>

namespace damsec
{
    struct FrameConfig
    {
        int taps = 16;      // M
        int subframes = 32; // Q
        CMat probing;       // S_a, M x M
        CMat precoders;     // F_s, N x N (one column per slot)

        int slots() const { return static_cast<int>(precoders.cols()); }
    };

    /// QPSK Toeplitz S_a (redrawn until cond < 1e6) and a DFT slot schedule whose
    /// columns each carry sensing power slot_power.
    inline FrameConfig make_frame_config(int num_antennas, int taps, int subframes, double slot_power,
                                         std::mt19937_64 &rng)
    {
        if (taps < 1 || subframes < 1 || num_antennas < 1)
            throw ConfigError("frame: taps, subframes and antennas must be >= 1");
        FrameConfig cfg;
        cfg.taps = taps;
        cfg.subframes = subframes;
        constexpr int kMaxDraws = 1000;
        int draw = 0;
        do
        {
            const CVec seq = qpsk_sequence(2 * taps - 1, rng);
            cfg.probing = probing_matrix(seq, taps, taps);
        } while (condition_number(cfg.probing) >= 1e6 && ++draw < kMaxDraws);
        if (draw >= kMaxDraws)
            throw ConditioningError("frame: no well-conditioned probing matrix found");

        const double scale = std::sqrt(slot_power / num_antennas);
        cfg.precoders.resize(num_antennas, num_antennas);
        for (int n = 0; n < num_antennas; ++n)
            for (int q = 0; q < num_antennas; ++q)
                cfg.precoders(n, q) = scale * std::exp(-kJ * (2.0 * kPi * n * q / num_antennas));
        return cfg;
    }

    /// H_s = A_s D_s G_s (N x M): column m holds the spatial vectors of the paths at tap m.
    inline CMat time_space_matrix(const MultipathChannel &ch, const ArrayConfig &array, int taps)
    {
        if (ch.max_tap() >= taps)
            throw ConfigError("frame: taps M = " + std::to_string(taps) + " must exceed the largest path tap " +
                              std::to_string(ch.max_tap()));
        CMat h = CMat::Zero(array.num_antennas, taps);
        for (const auto &p : ch.paths)
            h.col(p.tap) += spatial_vector(p, array);
        return h;
    }

    /// h_s[m] = sum_l beta_l^* a^H(phi_l) f_s delta[m - n_l].
    inline CVec fir_taps(const MultipathChannel &ch, const ArrayConfig &array, const CVec &f_s, int taps)
    {
        if (ch.max_tap() >= taps)
            throw ConfigError("fir_taps: taps must exceed the largest path tap");
        CVec h = CVec::Zero(taps);
        for (const auto &p : ch.paths)
            h(p.tap) += std::conj(p.gain) * array_response(p.angle, array).dot(f_s);
        return h;
    }

    inline CMat complex_gaussian_matrix(Eigen::Index rows, Eigen::Index cols, double variance, std::mt19937_64 &rng)
    {
        std::normal_distribution<double> g(0.0, std::sqrt(0.5 * variance));
        CMat w(rows, cols);
        for (Eigen::Index j = 0; j < cols; ++j)
            for (Eigen::Index i = 0; i < rows; ++i)
            {
                const double re = g(rng);
                const double im = g(rng);
                w(i, j) = cd(re, im);
            }
        return w;
    }

    /// Y = S_a^H H_s^H F_s + W (M x N).
    inline CMat simulate_subframe(const MultipathChannel &ch, const ArrayConfig &array, const FrameConfig &cfg,
                                  double noise_var, std::mt19937_64 &rng)
    {
        const CMat h = time_space_matrix(ch, array, cfg.taps);
        CMat y = cfg.probing.adjoint() * h.adjoint() * cfg.precoders;
        if (noise_var > 0.0)
            y += complex_gaussian_matrix(y.rows(), y.cols(), noise_var, rng);
        return y;
    }

    /// Estimate of H_s^H by left/right inversion: (S S^H)^-1 S  Y  F^H (F F^H)^-1.
    inline CMat ls_channel_estimate(const CMat &y, const FrameConfig &cfg)
    {
        constexpr double kMaxCond = 1e6;
        const double cs = condition_number(cfg.probing);
        const double cf = condition_number(cfg.precoders);
        if (!(cs < kMaxCond) || !(cf < kMaxCond))
            throw ConditioningError("ls_channel_estimate: probing/precoder matrix is singular or ill-conditioned (cond S_a = " +
                                    std::to_string(cs) + ", cond F_s = " + std::to_string(cf) + ")");
        const CMat &s = cfg.probing;
        const CMat &f = cfg.precoders;
        const CMat s_left = (s * s.adjoint()).ldlt().solve(s);
        const CMat ffh = f * f.adjoint();
        // F^H (F F^H)^-1 == ((F F^H)^-1 F)^H since F F^H is Hermitian
        const CMat f_right = ffh.ldlt().solve(f).adjoint();
        return s_left * y * f_right;
    }

    /// vec(H_s) from an estimate of H_s^H (length M N, index m N + n).
    inline CVec subframe_vector(const CMat &h_hermitian) { return vec(h_hermitian.adjoint()); }

    /// R = (1/Q) sum_j h_j h_j^H.
    inline CMat frame_covariance(const std::vector<CVec> &estimates)
    {
        if (estimates.empty())
            throw std::invalid_argument("frame_covariance: no subframes");
        const Eigen::Index n = estimates.front().size();
        CMat r = CMat::Zero(n, n);
        for (const auto &h : estimates)
            r.noalias() += h * h.adjoint();
        r /= static_cast<double>(estimates.size());
        return r;
    }

    /// Copy of the channel with fresh complex gains of the same average power per path.
    inline MultipathChannel resample_gains(const MultipathChannel &ch, std::mt19937_64 &rng)
    {
        MultipathChannel out = ch;
        std::normal_distribution<double> g(0.0, std::sqrt(0.5));
        for (auto &p : out.paths)
        {
            const double re = g(rng);
            const double im = g(rng);
            p.gain = std::abs(p.gain) * cd(re, im);
        }
        return out;
    }

    /// Q subframes, each with independently redrawn path gains, through the LS estimator.
    inline std::vector<CVec> simulate_frame(const MultipathChannel &ch, const ArrayConfig &array,
                                            const FrameConfig &cfg, double noise_var, std::mt19937_64 &rng)
    {
        std::vector<CVec> out;
        out.reserve(cfg.subframes);
        for (int j = 0; j < cfg.subframes; ++j)
        {
            const auto ch_j = resample_gains(ch, rng);
            out.push_back(subframe_vector(ls_channel_estimate(simulate_subframe(ch_j, array, cfg, noise_var, rng), cfg)));
        }
        return out;
    }

    /// Angle/delay search grid and the space-time steering u(phi, tau) = p(tau) (x) a(phi).
    struct SpaceTimeManifold
    {
        ArrayConfig array;
        int taps = 16;
        std::vector<double> angles; // rad
        std::vector<double> delays; // taps

        static SpaceTimeManifold with_default_grid(const ArrayConfig &array, int taps, double angle_step_deg = 0.25,
                                                   double delay_step = 1.0)
        {
            SpaceTimeManifold m;
            m.array = array;
            m.taps = taps;
            for (double deg = -90.0 + angle_step_deg; deg < 90.0 - 1e-9; deg += angle_step_deg)
                m.angles.push_back(deg_to_rad(deg));
            for (double d = 0.0; d <= taps - 1 + 1e-9; d += delay_step)
                m.delays.push_back(d);
            return m;
        }

        CVec column(double angle, double delay_taps) const
        {
            PulseShape pulse{taps, array.bandwidth, 0.0};
            const RVec p = pulse.vector_taps(delay_taps);
            return kron(p.cast<cd>(), array_response(angle, array));
        }
    };

    struct AngleDelayEstimate
    {
        double angle = 0.0;      // rad
        double delay_taps = 0.0; // taps relative to the sensing timing reference
        double spectrum = 0.0;   // pseudo-spectrum at the grid peak
        int angle_index = -1;
        int delay_index = -1;
    };

    struct MusicResult
    {
        bool success = false;
        std::vector<AngleDelayEstimate> peaks; // strongest first
        std::string message;
    };

    namespace detail
    {
        // ||E_n^H u||^2 = ||u||^2 - ||E_s^H u||^2 for a single (angle, delay) point.
        inline double null_spectrum(const CMat &signal_basis, const SpaceTimeManifold &m, double angle, double delay)
        {
            const CVec u = m.column(angle, delay);
            const double proj = (signal_basis.adjoint() * u).squaredNorm();
            return std::max(u.squaredNorm() - proj, 0.0);
        }
    } // namespace detail

    /// 2-D MUSIC: the L strongest well-separated peaks of 1 / ||E_n^H u(phi, tau)||^2.
    inline MusicResult music_estimate(const CMat &covariance, int num_paths, const SpaceTimeManifold &m)
    {
        const Eigen::Index n_ant = m.array.num_antennas;
        const Eigen::Index dim = n_ant * m.taps;
        if (covariance.rows() != dim || covariance.cols() != dim)
            throw std::invalid_argument("music_estimate: covariance size does not match M N");
        if (num_paths < 1 || num_paths >= dim)
            throw std::invalid_argument("music_estimate: need 1 <= L < M N");

        MusicResult result;
        Eigen::SelfAdjointEigenSolver<CMat> eig(covariance);
        const RVec &ev = eig.eigenvalues();
        const double sig_min = ev(dim - num_paths);
        const double noise_max = ev(dim - num_paths - 1);
        if (!(sig_min > noise_max * (1.0 + 1e-9)) || !(sig_min > 0.0))
        {
            result.message = "no separation between signal and noise eigenvalues";
            return result;
        }
        const CMat es = eig.eigenvectors().rightCols(num_paths);

        const int n_ang = static_cast<int>(m.angles.size());
        const int n_del = static_cast<int>(m.delays.size());
        CMat steer(n_ant, n_ang);
        for (int i = 0; i < n_ang; ++i)
            steer.col(i) = array_response(m.angles[i], m.array);

        std::vector<CMat> per_tap(m.taps);
        for (int k = 0; k < m.taps; ++k)
            per_tap[k] = es.middleRows(k * n_ant, n_ant).adjoint() * steer; // L x G

        const PulseShape pulse{m.taps, m.array.bandwidth, 0.0};
        RMat null_spec(n_ang, n_del);
        for (int j = 0; j < n_del; ++j)
        {
            const RVec p = pulse.vector_taps(m.delays[j]);
            CMat w = CMat::Zero(num_paths, n_ang);
            for (int k = 0; k < m.taps; ++k)
                if (p(k) != 0.0)
                    w += p(k) * per_tap[k];
            const double pn = p.squaredNorm();
            for (int i = 0; i < n_ang; ++i)
                null_spec(i, j) = std::max(pn - w.col(i).squaredNorm(), 0.0);
        }

        const double floor = 1e-300;
        auto spec = [&](int i, int j) { return 1.0 / std::max(null_spec(i, j), floor); };

        struct Candidate
        {
            double value;
            int i;
            int j;
        };
        std::vector<Candidate> cands;
        for (int i = 0; i < n_ang; ++i)
            for (int j = 0; j < n_del; ++j)
            {
                const double v = spec(i, j);
                bool is_max = true;
                for (int di = -1; di <= 1 && is_max; ++di)
                    for (int dj = -1; dj <= 1; ++dj)
                    {
                        if (di == 0 && dj == 0)
                            continue;
                        const int ii = i + di, jj = j + dj;
                        if (ii < 0 || ii >= n_ang || jj < 0 || jj >= n_del)
                            continue;
                        if (spec(ii, jj) > v)
                        {
                            is_max = false;
                            break;
                        }
                    }
                if (is_max)
                    cands.push_back({v, i, j});
            }
        std::sort(cands.begin(), cands.end(), [](const Candidate &a, const Candidate &b) {
            if (a.value != b.value)
                return a.value > b.value;
            return a.i != b.i ? a.i < b.i : a.j < b.j;
        });

        std::vector<Candidate> accepted;
        for (const auto &c : cands)
        {
            if (static_cast<int>(accepted.size()) == num_paths)
                break;
            const bool near = std::any_of(accepted.begin(), accepted.end(), [&](const Candidate &a) {
                return std::abs(a.i - c.i) <= 2 && std::abs(a.j - c.j) <= 2;
            });
            if (!near)
                accepted.push_back(c);
        }

        // Parabolic refinement of the null spectrum along each axis; kept only if it
        // lowers the null spectrum below the grid value.
        auto vertex = [](double l, double c, double r) {
            const double den = l - 2.0 * c + r;
            if (!(den > 0.0))
                return 0.0;
            return std::clamp(0.5 * (l - r) / den, -0.5, 0.5);
        };
        for (const auto &a : accepted)
        {
            AngleDelayEstimate est;
            est.angle_index = a.i;
            est.delay_index = a.j;
            est.angle = m.angles[a.i];
            est.delay_taps = m.delays[a.j];
            est.spectrum = a.value;
            double ang = est.angle, del = est.delay_taps;
            if (a.i > 0 && a.i + 1 < n_ang)
                ang += vertex(null_spec(a.i - 1, a.j), null_spec(a.i, a.j), null_spec(a.i + 1, a.j)) *
                       (m.angles[a.i + 1] - m.angles[a.i]);
            if (a.j > 0 && a.j + 1 < n_del)
                del += vertex(null_spec(a.i, a.j - 1), null_spec(a.i, a.j), null_spec(a.i, a.j + 1)) *
                       (m.delays[a.j + 1] - m.delays[a.j]);
            if ((ang != est.angle || del != est.delay_taps) &&
                detail::null_spectrum(es, m, ang, del) < null_spec(a.i, a.j))
            {
                est.angle = ang;
                est.delay_taps = del;
            }
            result.peaks.push_back(est);
        }

        if (static_cast<int>(result.peaks.size()) < num_paths)
        {
            result.message = "found " + std::to_string(result.peaks.size()) + " separable peaks, expected " +
                             std::to_string(num_paths);
            return result;
        }
        result.success = true;
        return result;
    }

} // namespace damsec

#endif
