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

#ifndef DAMSEC_WAVEFORM_HPP
#define DAMSEC_WAVEFORM_HPP

// Tap-resolution transmit synthesis (probing + per-path delayed DAM data) and
// the time-domain receive oracle that every closed-form SINR is checked against.

#include "channel.hpp"
#include "linalg.hpp"

#include <random>
#include <vector>

namespace damsec
{
    enum class StreamKind
    {
        Probing,
        Data
    };

    /// Unit-power symbol sequence addressed by absolute sample index.
    /// Index n maps to samples[n + origin]; reads outside the stored range are zero,
    /// so a stream generated with origin > 0 supports look-ahead (negative pre-delays).
    struct SymbolStream
    {
        CVec samples;
        Eigen::Index origin = 0;
        StreamKind kind = StreamKind::Data;

        cd at(Eigen::Index n) const
        {
            const Eigen::Index i = n + origin;
            return (i >= 0 && i < samples.size()) ? samples(i) : cd{};
        }
    };

    /// i.i.d. unit-modulus QPSK, covering sample indices [-origin, length - origin).
    inline SymbolStream qpsk_stream(Eigen::Index length, std::mt19937_64 &rng, StreamKind kind = StreamKind::Data,
                                    Eigen::Index origin = 0)
    {
        SymbolStream s;
        s.kind = kind;
        s.origin = origin;
        s.samples.resize(length);
        std::uniform_int_distribution<int> bit(0, 1);
        const double a = 1.0 / std::sqrt(2.0);
        for (Eigen::Index i = 0; i < length; ++i)
            s.samples(i) = cd(bit(rng) ? a : -a, bit(rng) ? a : -a);
        return s;
    }

    struct StreamSet
    {
        SymbolStream probing;
        std::vector<SymbolStream> data; // one per UE
    };

    /// Per-path DAM precoders plus the sensing precoder.
    /// pre_delay[k][l] = reference[k] - n_{c,kl}; it is negative for paths that arrive
    /// after the reference path, which the transmitter realises by look-ahead in the data buffer.
    struct PrecoderSet
    {
        CVec sensing;
        std::vector<std::vector<CVec>> comm;
        std::vector<std::vector<int>> pre_delay;
        std::vector<int> reference;

        int num_ues() const { return static_cast<int>(comm.size()); }

        CVec stacked(int k) const { return stack(std::span<const CVec>(comm[k])); }

        double user_power(int k) const
        {
            double p = 0.0;
            for (const auto &f : comm[k])
                p += f.squaredNorm();
            return p;
        }

        double total_power() const
        {
            double p = sensing.squaredNorm();
            for (int k = 0; k < num_ues(); ++k)
                p += user_power(k);
            return p;
        }

        int max_abs_pre_delay() const
        {
            int m = 0;
            for (const auto &row : pre_delay)
                for (int d : row)
                    m = std::max(m, std::abs(d));
            return m;
        }
    };

    /// Tap of the strongest path; ties go to the earliest tap.
    inline int strongest_path_reference(const MultipathChannel &ch)
    {
        int best = 0;
        for (int l = 1; l < ch.size(); ++l)
        {
            const double a = std::abs(ch.paths[l].gain);
            const double b = std::abs(ch.paths[best].gain);
            if (a > b || (a == b && ch.paths[l].tap < ch.paths[best].tap))
                best = l;
        }
        return ch.paths[best].tap;
    }

    inline int strongest_path_index(const MultipathChannel &ch)
    {
        const int ref = strongest_path_reference(ch);
        for (int l = 0; l < ch.size(); ++l)
            if (ch.paths[l].tap == ref)
                return l;
        return 0;
    }

    /// Fills references and pre-delays from the user channels; precoder vectors untouched.
    inline void assign_alignment(PrecoderSet &pre, const ChannelSet &channels)
    {
        const int k_count = channels.num_ues();
        pre.reference.assign(k_count, 0);
        pre.pre_delay.assign(k_count, {});
        for (int k = 0; k < k_count; ++k)
        {
            const auto &ch = channels.ues[k];
            pre.reference[k] = strongest_path_reference(ch);
            for (const auto &p : ch.paths)
                pre.pre_delay[k].push_back(pre.reference[k] - p.tap);
        }
    }

    /// All-zero precoders shaped after the channel set.
    inline PrecoderSet zero_precoders(const ChannelSet &channels, int num_antennas)
    {
        PrecoderSet pre;
        pre.sensing = CVec::Zero(num_antennas);
        for (const auto &ch : channels.ues)
            pre.comm.emplace_back(ch.size(), CVec::Zero(num_antennas));
        assign_alignment(pre, channels);
        return pre;
    }

    /// x[n] = f_s s_d[n] + sum_k sum_l f_kl s_k[n - kappa_kl], n = 0..horizon-1 (N x horizon).
    inline CMat synthesize_transmit(const PrecoderSet &pre, const StreamSet &streams, Eigen::Index horizon)
    {
        const Eigen::Index n_ant = pre.sensing.size();
        CMat x = CMat::Zero(n_ant, horizon);
        if (pre.sensing.squaredNorm() > 0.0)
            for (Eigen::Index n = 0; n < horizon; ++n)
                x.col(n) += pre.sensing * streams.probing.at(n);
        for (int k = 0; k < pre.num_ues(); ++k)
            for (std::size_t l = 0; l < pre.comm[k].size(); ++l)
            {
                const CVec &f = pre.comm[k][l];
                if (f.squaredNorm() == 0.0)
                    continue;
                const int kappa = pre.pre_delay[k][l];
                for (Eigen::Index n = 0; n < horizon; ++n)
                    x.col(n) += f * streams.data[k].at(n - kappa);
            }
        return x;
    }

    /// y[n] = sum_l h_l^H x[n - n_l] + w[n]. Samples before the start of x read as zero.
    inline CVec receive_oracle(const MultipathChannel &ch, const ArrayConfig &array, const CMat &x, double noise_var,
                               std::mt19937_64 *rng = nullptr)
    {
        const Eigen::Index horizon = x.cols();
        CVec y = CVec::Zero(horizon);
        for (const auto &p : ch.paths)
        {
            const CVec h = spatial_vector(p, array);
            // row vector h^H x, shifted by the path tap
            const Eigen::RowVectorXcd hx = h.adjoint() * x;
            for (Eigen::Index n = p.tap; n < horizon; ++n)
                y(n) += hx(n - p.tap);
        }
        if (noise_var > 0.0)
        {
            if (rng == nullptr)
                throw std::invalid_argument("receive_oracle: noise requested without an RNG");
            std::normal_distribution<double> g(0.0, std::sqrt(0.5 * noise_var));
            for (Eigen::Index n = 0; n < horizon; ++n)
            {
                const double re = g(*rng);
                const double im = g(*rng);
                y(n) += cd(re, im);
            }
        }
        return y;
    }

} // namespace damsec

#endif
