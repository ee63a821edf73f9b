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

#ifndef DAMSEC_PRECODING_HPP
#define DAMSEC_PRECODING_HPP

// Path-based zero-forcing projectors and the MRT / strongest-path baselines.

#include "channel.hpp"
#include "linalg.hpp"
#include "secrecy.hpp"
#include "waveform.hpp"

#include <string>
#include <vector>

namespace damsec
{
    /// Identifies one nulled column.
    struct NulledColumn
    {
        LinkRole role = LinkRole::User;
        int user = -1;
        int path = 0;
    };

    struct ProjectorBank
    {
        std::vector<std::vector<CMat>> comm;                         // Q_c,kl
        std::vector<std::vector<std::vector<NulledColumn>>> nulled;  // registry per (k, l)
        std::vector<std::vector<Eigen::Index>> comm_rank;            // rank of the nulled block
        CMat sensing;                                                // Q_s (bar)
        std::vector<NulledColumn> sensing_nulled;
        bool degraded = false; // some nulled block was numerically rank deficient

        int num_ues() const { return static_cast<int>(comm.size()); }

        CMat stacked(int k) const { return block_diagonal(std::span<const CMat>(comm[k])); }
    };

    namespace detail
    {
        inline std::string role_name(LinkRole r)
        {
            switch (r)
            {
            case LinkRole::Sensing:
                return "sensing";
            case LinkRole::Eve:
                return "eve";
            default:
                return "ue";
            }
        }
    } // namespace detail

    /// Q_c,kl: nulls every sensing path and every UE path except (k, l).
    inline NullingProjector build_comm_projector(int k, int l, const ChannelSet &channels, const ArrayConfig &array,
                                                 std::vector<NulledColumn> *registry = nullptr)
    {
        std::vector<CVec> cols;
        std::vector<NulledColumn> reg;
        for (int s = 0; s < channels.sensing.size(); ++s)
        {
            cols.push_back(spatial_vector(channels.sensing.paths[s], array));
            reg.push_back({LinkRole::Sensing, -1, s});
        }
        for (int kp = 0; kp < channels.num_ues(); ++kp)
            for (int lp = 0; lp < channels.ues[kp].size(); ++lp)
            {
                if (kp == k && lp == l)
                    continue;
                cols.push_back(spatial_vector(channels.ues[kp].paths[lp], array));
                reg.push_back({LinkRole::User, kp, lp});
            }
        const int n = array.num_antennas;
        const int count = static_cast<int>(cols.size());
        if (count >= n)
            throw InfeasibleError("build_comm_projector: " + std::to_string(count) + " columns to null with N = " +
                                  std::to_string(n) + " antennas; ZF needs " + std::to_string(count + 1 - n) +
                                  " more antenna(s)");
        CMat h(n, count);
        for (int c = 0; c < count; ++c)
            h.col(c) = cols[c];
        if (registry)
            *registry = std::move(reg);
        return nulling_projector(h, n);
    }

    /// Q_s (bar): nulls NLoS sensing paths and all UE paths, keeping part of the LoS steering.
    inline NullingProjector build_sensing_projector(const ChannelSet &channels, const ArrayConfig &array,
                                                    std::vector<NulledColumn> *registry = nullptr)
    {
        std::vector<CVec> cols;
        std::vector<NulledColumn> reg;
        for (int s = 1; s < channels.sensing.size(); ++s)
        {
            cols.push_back(spatial_vector(channels.sensing.paths[s], array));
            reg.push_back({LinkRole::Sensing, -1, s});
        }
        for (int kp = 0; kp < channels.num_ues(); ++kp)
            for (int lp = 0; lp < channels.ues[kp].size(); ++lp)
            {
                cols.push_back(spatial_vector(channels.ues[kp].paths[lp], array));
                reg.push_back({LinkRole::User, kp, lp});
            }
        const int n = array.num_antennas;
        const int count = static_cast<int>(cols.size());
        if (count >= n)
            throw InfeasibleError("build_sensing_projector: " + std::to_string(count) +
                                  " columns to null with N = " + std::to_string(n) + " antennas; ZF needs " +
                                  std::to_string(count + 1 - n) + " more antenna(s)");
        CMat h(n, count);
        for (int c = 0; c < count; ++c)
            h.col(c) = cols[c];
        auto q = nulling_projector(h, n);
        const CVec a = array_response(channels.sensing.paths.front().angle, array);
        if ((q.matrix * a).norm() < 1e-8)
            throw InfeasibleError("build_sensing_projector: the LoS sensing direction lies in the span of the nulled "
                                  "paths");
        if (registry)
            *registry = std::move(reg);
        return q;
    }

    inline ProjectorBank build_projector_bank(const ChannelSet &channels, const ArrayConfig &array)
    {
        ProjectorBank bank;
        const int k_count = channels.num_ues();
        bank.comm.resize(k_count);
        bank.nulled.resize(k_count);
        bank.comm_rank.resize(k_count);
        for (int k = 0; k < k_count; ++k)
            for (int l = 0; l < channels.ues[k].size(); ++l)
            {
                std::vector<NulledColumn> reg;
                const auto q = build_comm_projector(k, l, channels, array, &reg);
                bank.comm[k].push_back(q.matrix);
                bank.nulled[k].push_back(std::move(reg));
                bank.comm_rank[k].push_back(q.rank);
                bank.degraded = bank.degraded || q.rank_deficient();
            }
        const auto qs = build_sensing_projector(channels, array, &bank.sensing_nulled);
        bank.sensing = qs.matrix;
        bank.degraded = bank.degraded || qs.rank_deficient();
        return bank;
    }

    /// Forms seen by the unconstrained b-vectors when f = Q b.
    inline QuadraticFormSet effective_forms(const ProjectorBank &bank, const QuadraticFormSet &raw)
    {
        const int k_count = raw.num_ues();
        if (bank.num_ues() != k_count)
            throw std::invalid_argument("effective_forms: projector bank and forms disagree on the UE count");
        std::vector<CMat> qbar(k_count);
        for (int k = 0; k < k_count; ++k)
        {
            qbar[k] = bank.stacked(k);
            if (qbar[k].rows() != raw.ue[k].desired.rows())
                throw std::invalid_argument("effective_forms: stacked dimension mismatch for UE " + std::to_string(k));
        }
        auto proj = [](const CMat &q, const CMat &m) -> CMat { return q.adjoint() * m * q; };
        QuadraticFormSet out;
        out.ue.resize(k_count);
        out.eve.resize(k_count);
        for (int k = 0; k < k_count; ++k)
        {
            out.ue[k].desired = proj(qbar[k], raw.ue[k].desired);
            out.ue[k].isi = proj(qbar[k], raw.ue[k].isi);
            out.ue[k].iui.resize(k_count);
            for (int kp = 0; kp < k_count; ++kp)
                if (kp != k)
                    out.ue[k].iui[kp] = proj(qbar[kp], raw.ue[k].iui[kp]);
            out.ue[k].sensing = proj(bank.sensing, raw.ue[k].sensing);

            out.eve[k].best_index = raw.eve[k].best_index;
            out.eve[k].desired = proj(qbar[k], raw.eve[k].desired);
            out.eve[k].self = proj(qbar[k], raw.eve[k].self);
            out.eve[k].cross = proj(qbar[k], raw.eve[k].cross);
        }
        out.eve_sensing = proj(bank.sensing, raw.eve_sensing);
        return out;
    }

    struct PowerSplit
    {
        double sensing = 0.0;
        std::vector<double> users;

        double total() const
        {
            double p = sensing;
            for (double u : users)
                p += u;
            return p;
        }
    };

    /// P / (K + 1) to the sensing beam and to every UE.
    inline PowerSplit equal_split(double total_power, int num_ues)
    {
        PowerSplit s;
        s.sensing = total_power / (num_ues + 1);
        s.users.assign(num_ues, total_power / (num_ues + 1));
        return s;
    }

    /// Sensing beam gets twice its CRB floor (capped halfway to P); the rest is shared equally.
    inline PowerSplit crb_aware_split(double total_power, int num_ues, double sensing_floor)
    {
        if (!(sensing_floor < total_power))
            throw InfeasibleError("crb_aware_split: the CRB threshold needs " + std::to_string(sensing_floor) +
                                  " W on the sensing beam but only " + std::to_string(total_power) +
                                  " W are available; raise the power or relax the threshold");
        PowerSplit s;
        s.sensing = std::min(2.0 * sensing_floor, 0.5 * (total_power + sensing_floor));
        s.users.assign(num_ues, (total_power - s.sensing) / num_ues);
        return s;
    }

    /// f_s = sqrt(P_s) Q_s a / ||Q_s a||.
    inline CVec sensing_beam(const ProjectorBank &bank, const ChannelSet &channels, const ArrayConfig &array,
                             double power)
    {
        const CVec v = bank.sensing * array_response(channels.sensing.paths.front().angle, array);
        return std::sqrt(power) * v / v.norm();
    }

    namespace detail
    {
        inline void check_split(const PowerSplit &split, int num_ues)
        {
            if (static_cast<int>(split.users.size()) != num_ues)
                throw ConfigError("power split: one entry per UE required");
            if (split.sensing < 0.0 || std::any_of(split.users.begin(), split.users.end(), [](double p) { return p < 0.0; }))
                throw ConfigError("power split: negative power");
        }

        inline bool projected_vanishes(const CVec &v, const CVec &h) { return v.norm() <= 1e-10 * h.norm(); }
    } // namespace detail

    /// Per-path MRT in the projected subspaces: f_kl = c_k Q_kl h_kl with sum_l ||f_kl||^2 = P_c,k.
    inline PrecoderSet mrt_precoders(const ChannelSet &channels, const ArrayConfig &array, const ProjectorBank &bank,
                                     const PowerSplit &split, std::vector<std::string> *warnings = nullptr)
    {
        const int k_count = channels.num_ues();
        detail::check_split(split, k_count);
        PrecoderSet pre = zero_precoders(channels, array.num_antennas);
        pre.sensing = sensing_beam(bank, channels, array, split.sensing);
        for (int k = 0; k < k_count; ++k)
        {
            double norm2 = 0.0;
            for (int l = 0; l < channels.ues[k].size(); ++l)
            {
                const CVec h = spatial_vector(channels.ues[k].paths[l], array);
                CVec v = bank.comm[k][l] * h;
                if (detail::projected_vanishes(v, h))
                {
                    v.setZero();
                    if (warnings)
                        warnings->push_back("UE " + std::to_string(k) + " path " + std::to_string(l) +
                                            " vanishes after projection; dropped");
                }
                pre.comm[k][l] = v;
                norm2 += v.squaredNorm();
            }
            if (!(norm2 > 0.0))
                throw InfeasibleError("mrt_precoders: every path of UE " + std::to_string(k) +
                                      " is nulled by its projector");
            const double c = std::sqrt(split.users[k] / norm2);
            for (auto &f : pre.comm[k])
                f *= c;
        }
        return pre;
    }

    /// All of UE k's power on the projected strongest path.
    inline PrecoderSet sp_precoders(const ChannelSet &channels, const ArrayConfig &array, const ProjectorBank &bank,
                                    const PowerSplit &split)
    {
        const int k_count = channels.num_ues();
        detail::check_split(split, k_count);
        PrecoderSet pre = zero_precoders(channels, array.num_antennas);
        pre.sensing = sensing_beam(bank, channels, array, split.sensing);
        for (int k = 0; k < k_count; ++k)
        {
            const int l = strongest_path_index(channels.ues[k]);
            const CVec h = spatial_vector(channels.ues[k].paths[l], array);
            const CVec v = bank.comm[k][l] * h;
            if (detail::projected_vanishes(v, h))
                throw InfeasibleError("sp_precoders: strongest path of UE " + std::to_string(k) +
                                      " is nulled by its projector");
            pre.comm[k][l] = std::sqrt(split.users[k]) * v / v.norm();
        }
        return pre;
    }

} // namespace damsec

#endif
