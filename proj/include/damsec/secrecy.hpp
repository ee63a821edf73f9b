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

#ifndef DAMSEC_SECRECY_HPP
#define DAMSEC_SECRECY_HPP

// Delay-difference grouping of received replicas, the Hermitian forms behind
// the UE and eavesdropper SINRs, and the secrecy spectral efficiency.

#include "channel.hpp"
#include "linalg.hpp"
#include "waveform.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace damsec
{
    /// Replicas of one source's per-path streams seen by one observer, binned by
    /// delay difference i = n_obs,l - n_src,l'.
    struct DelayGroupTable
    {
        int delta_min = 0;
        int delta_max = 0;
        int source_paths = 0;
        CMat observer_vectors;                 // N x L_obs spatial vectors
        std::vector<std::vector<int>> binned;  // [l'][i - delta_min] -> observer path or -1

        int span() const { return delta_max - delta_min + 1; }
        Eigen::Index dim() const { return observer_vectors.rows(); }

        int observer_path(int i, int source_path) const
        {
            if (i < delta_min || i > delta_max)
                return -1;
            return binned[source_path][i - delta_min];
        }

        /// g[i] for source path l' (zero if no observer path lands in bin i).
        CVec g(int i, int source_path) const
        {
            const int l = observer_path(i, source_path);
            return l < 0 ? CVec::Zero(dim()) : CVec(observer_vectors.col(l));
        }

        /// Stack over source paths: [g_1[i]; ...; g_L'[i]].
        CVec stacked(int i) const
        {
            CVec out = CVec::Zero(dim() * source_paths);
            for (int lp = 0; lp < source_paths; ++lp)
            {
                const int l = observer_path(i, lp);
                if (l >= 0)
                    out.segment(lp * dim(), dim()) = observer_vectors.col(l);
            }
            return out;
        }

        double bin_power(int i) const
        {
            double p = 0.0;
            for (int lp = 0; lp < source_paths; ++lp)
            {
                const int l = observer_path(i, lp);
                if (l >= 0)
                    p += observer_vectors.col(l).squaredNorm();
            }
            return p;
        }
    };

    inline DelayGroupTable build_group_table(const MultipathChannel &observer, const MultipathChannel &source,
                                             const ArrayConfig &array)
    {
        if (observer.paths.empty() || source.paths.empty())
            throw std::invalid_argument("build_group_table: empty channel");
        if (!taps_distinct(observer))
            throw ModelError("build_group_table: observer has two paths on the same tap (paths not resolvable)");

        DelayGroupTable t;
        t.delta_min = observer.min_tap() - source.max_tap();
        t.delta_max = observer.max_tap() - source.min_tap();
        t.source_paths = source.size();
        t.observer_vectors = spatial_matrix(observer, array);
        t.binned.assign(source.size(), std::vector<int>(t.span(), -1));
        for (int lp = 0; lp < source.size(); ++lp)
            for (int l = 0; l < observer.size(); ++l)
                t.binned[lp][observer.paths[l].tap - source.paths[lp].tap - t.delta_min] = l;
        return t;
    }

    /// Tables for every (observer, source UE) pair.
    struct GroupTables
    {
        std::vector<std::vector<DelayGroupTable>> ue; // [k observer][k' source]
        std::vector<DelayGroupTable> eve;             // [k' source]
    };

    inline GroupTables build_all_tables(const ChannelSet &channels, const ArrayConfig &array)
    {
        GroupTables t;
        const int k_count = channels.num_ues();
        t.ue.resize(k_count);
        for (int k = 0; k < k_count; ++k)
            for (int kp = 0; kp < k_count; ++kp)
                t.ue[k].push_back(build_group_table(channels.ues[k], channels.ues[kp], array));
        for (int kp = 0; kp < k_count; ++kp)
            t.eve.push_back(build_group_table(channels.eve, channels.ues[kp], array));
        return t;
    }

    /// argmax_i sum_l' ||g_e,kl'[i]||^2, ties to the smallest i.
    inline int eve_best_index(const DelayGroupTable &eve_table)
    {
        int best = eve_table.delta_min;
        double best_p = -1.0;
        for (int i = eve_table.delta_min; i <= eve_table.delta_max; ++i)
        {
            const double p = eve_table.bin_power(i);
            if (p > best_p)
            {
                best_p = p;
                best = i;
            }
        }
        return best;
    }

    struct UeForms
    {
        CMat desired;                // R_c,k
        CMat isi;                    // A_k,k
        std::vector<CMat> iui;       // B_k,k' (empty matrix for k' == k)
        CMat sensing;                // B_s,k
    };

    struct EveForms
    {
        int best_index = 0; // i*
        CMat desired;       // R_e,k
        CMat self;          // A_e,k
        CMat cross;         // B_e,k (this UE's streams as interference for another target UE)
    };

    struct QuadraticFormSet
    {
        std::vector<UeForms> ue;
        std::vector<EveForms> eve;
        CMat eve_sensing; // B_es

        int num_ues() const { return static_cast<int>(ue.size()); }
    };

    namespace detail
    {
        // sum over bins (optionally skipping one) of gbar[i] gbar[i]^H / sigma^2
        inline CMat binned_gram(const DelayGroupTable &t, double noise_var, bool skip, int skip_index)
        {
            const Eigen::Index n = t.dim() * t.source_paths;
            CMat out = CMat::Zero(n, n);
            for (int i = t.delta_min; i <= t.delta_max; ++i)
            {
                if (skip && i == skip_index)
                    continue;
                const CVec g = t.stacked(i);
                if (g.squaredNorm() > 0.0)
                    out.noalias() += g * g.adjoint();
            }
            return out / noise_var;
        }
    } // namespace detail

    inline QuadraticFormSet build_quadratic_forms(const ChannelSet &channels, const GroupTables &tables,
                                                  const ArrayConfig &array, const std::vector<double> &noise_ue,
                                                  double noise_eve)
    {
        const int k_count = channels.num_ues();
        if (static_cast<int>(noise_ue.size()) != k_count)
            throw std::invalid_argument("build_quadratic_forms: one noise variance per UE required");
        QuadraticFormSet f;
        f.ue.resize(k_count);
        f.eve.resize(k_count);
        for (int k = 0; k < k_count; ++k)
        {
            const double s2 = noise_ue[k];
            const CMat hk = spatial_matrix(channels.ues[k], array);
            const CVec hbar = vec(hk);
            auto &u = f.ue[k];
            u.desired = hbar * hbar.adjoint() / s2;
            u.isi = detail::binned_gram(tables.ue[k][k], s2, true, 0);
            u.iui.resize(k_count);
            for (int kp = 0; kp < k_count; ++kp)
                if (kp != k)
                    u.iui[kp] = detail::binned_gram(tables.ue[k][kp], s2, false, 0);
            u.sensing = hk * hk.adjoint() / s2;

            auto &e = f.eve[k];
            const auto &te = tables.eve[k];
            e.best_index = eve_best_index(te);
            const CVec gs = te.stacked(e.best_index);
            e.desired = gs * gs.adjoint() / noise_eve;
            e.self = detail::binned_gram(te, noise_eve, true, e.best_index);
            e.cross = detail::binned_gram(te, noise_eve, false, 0);
        }
        const CMat he = spatial_matrix(channels.eve, array);
        f.eve_sensing = he * he.adjoint() / noise_eve;
        return f;
    }

    inline QuadraticFormSet build_quadratic_forms(const ChannelSet &channels, const ArrayConfig &array,
                                                  const std::vector<double> &noise_ue, double noise_eve)
    {
        return build_quadratic_forms(channels, build_all_tables(channels, array), array, noise_ue, noise_eve);
    }

    /// Power terms of one SINR, each already divided by the noise variance.
    struct SinrTerms
    {
        double desired = 0.0;
        double isi = 0.0;
        double iui = 0.0;
        double sensing = 0.0;

        double interference() const { return isi + iui + sensing; }
        double sinr() const { return desired / (interference() + 1.0); }
    };

    inline SinrTerms ue_terms(int k, const PrecoderSet &pre, const QuadraticFormSet &forms)
    {
        const auto &u = forms.ue[k];
        SinrTerms t;
        const CVec fk = pre.stacked(k);
        t.desired = hermitian_form(u.desired, fk);
        t.isi = hermitian_form(u.isi, fk);
        for (int kp = 0; kp < pre.num_ues(); ++kp)
            if (kp != k)
                t.iui += hermitian_form(u.iui[kp], pre.stacked(kp));
        t.sensing = hermitian_form(u.sensing, pre.sensing);
        return t;
    }

    inline SinrTerms eve_terms(int k, const PrecoderSet &pre, const QuadraticFormSet &forms)
    {
        const auto &e = forms.eve[k];
        SinrTerms t;
        const CVec fk = pre.stacked(k);
        t.desired = hermitian_form(e.desired, fk);
        t.isi = hermitian_form(e.self, fk);
        for (int kp = 0; kp < pre.num_ues(); ++kp)
            if (kp != k)
                t.iui += hermitian_form(forms.eve[kp].cross, pre.stacked(kp));
        t.sensing = hermitian_form(forms.eve_sensing, pre.sensing);
        return t;
    }

    inline double sinr_ue(int k, const PrecoderSet &pre, const QuadraticFormSet &forms)
    {
        return ue_terms(k, pre, forms).sinr();
    }

    inline double sinr_eve(int k, const PrecoderSet &pre, const QuadraticFormSet &forms)
    {
        return eve_terms(k, pre, forms).sinr();
    }

    /// Fraction of the coherence block left after the delay-spread guards.
    inline double guard_factor(int coherence_symbols, int max_tap)
    {
        if (coherence_symbols <= 2 * max_tap)
            throw ConfigError("sse: coherence block n_c = " + std::to_string(coherence_symbols) +
                              " must exceed twice the largest UE tap (" + std::to_string(2 * max_tap) + ")");
        return static_cast<double>(coherence_symbols - 2 * max_tap) / coherence_symbols;
    }

    inline double sse(double gamma_ue, double gamma_eve, int coherence_symbols, int max_tap)
    {
        const double factor = guard_factor(coherence_symbols, max_tap);
        return factor * std::max(0.0, std::log2(1.0 + gamma_ue) - std::log2(1.0 + gamma_eve));
    }

    /// log2(1 + gamma_k) - log2(1 + gamma_e,k) per UE (unclipped, unscaled).
    inline std::vector<double> rate_gaps(const PrecoderSet &pre, const QuadraticFormSet &forms)
    {
        std::vector<double> out;
        for (int k = 0; k < forms.num_ues(); ++k)
            out.push_back(std::log2(1.0 + sinr_ue(k, pre, forms)) - std::log2(1.0 + sinr_eve(k, pre, forms)));
        return out;
    }

    /// min_k SSE_k.
    inline double worst_user_sse(const PrecoderSet &pre, const QuadraticFormSet &forms, int coherence_symbols,
                                 int max_tap)
    {
        double worst = std::numeric_limits<double>::infinity();
        for (int k = 0; k < forms.num_ues(); ++k)
            worst = std::min(worst, sse(sinr_ue(k, pre, forms), sinr_eve(k, pre, forms), coherence_symbols, max_tap));
        return worst;
    }

} // namespace damsec

#endif
