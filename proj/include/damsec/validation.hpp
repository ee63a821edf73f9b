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

#ifndef DAMSEC_VALIDATION_HPP
#define DAMSEC_VALIDATION_HPP

// Time-domain cross-checks of the closed-form models: SINR terms measured
// through the sample-level receiver, zero-forcing leakage, and the delay CRB
// against a finite-difference Fisher matrix.

#include "channel.hpp"
#include "precoding.hpp"
#include "sca.hpp"
#include "secrecy.hpp"
#include "stage1_angle.hpp"
#include "stage2_delay.hpp"
#include "waveform.hpp"

#include <Eigen/LU>

#include <cmath>
#include <cstdio>
#include <ostream>
#include <random>
#include <string>
#include <vector>

namespace damsec
{
    /// SINR power terms per UE as seen by the UE and by Eve (each divided by its noise variance).
    struct MeasuredTerms
    {
        std::vector<SinrTerms> ue;
        std::vector<SinrTerms> eve;
    };

    namespace detail
    {
        inline int largest_tap(const ChannelSet &ch)
        {
            int m = std::max(ch.sensing.max_tap(), ch.eve.max_tap());
            return std::max(m, max_user_tap(ch));
        }

        // Precoders of one source only: UE `k` (k >= 0) or the sensing beam (k < 0).
        inline PrecoderSet isolate_source(const PrecoderSet &pre, int k)
        {
            PrecoderSet out = pre;
            if (k >= 0)
                out.sensing.setZero();
            for (int u = 0; u < out.num_ues(); ++u)
                if (u != k)
                    for (auto &f : out.comm[u])
                        f.setZero();
            return out;
        }

        inline StreamSet silent_streams(int num_ues)
        {
            StreamSet s;
            s.data.resize(num_ues);
            return s;
        }

        inline SymbolStream impulse_at(Eigen::Index index)
        {
            SymbolStream s;
            s.samples = CVec::Zero(index + 1);
            s.samples(index) = 1.0;
            return s;
        }

        inline double energy(const CVec &y) { return y.squaredNorm(); }
    } // namespace detail

    /// Exact per-lag powers from a unit impulse on each source stream through receive_oracle.
    inline MeasuredTerms impulse_terms(const ChannelSet &channels, const ArrayConfig &array, const PrecoderSet &pre,
                                       const QuadraticFormSet &forms, const std::vector<double> &noise_ue,
                                       double noise_eve)
    {
        const int k_count = channels.num_ues();
        const int m0 = pre.max_abs_pre_delay();
        const Eigen::Index horizon = 2 * m0 + detail::largest_tap(channels) + 2;

        // y[observer][source] (source k_count = sensing)
        std::vector<std::vector<CVec>> y_ue(k_count, std::vector<CVec>(k_count + 1));
        std::vector<CVec> y_eve(k_count + 1);
        for (int src = 0; src <= k_count; ++src)
        {
            const bool sensing = src == k_count;
            StreamSet streams = detail::silent_streams(k_count);
            if (sensing)
                streams.probing = detail::impulse_at(m0);
            else
                streams.data[src] = detail::impulse_at(m0);
            const CMat x = synthesize_transmit(detail::isolate_source(pre, sensing ? -1 : src), streams, horizon);
            for (int k = 0; k < k_count; ++k)
                y_ue[k][src] = receive_oracle(channels.ues[k], array, x, 0.0);
            y_eve[src] = receive_oracle(channels.eve, array, x, 0.0);
        }

        MeasuredTerms out;
        for (int k = 0; k < k_count; ++k)
        {
            SinrTerms t;
            const Eigen::Index lag = m0 + pre.reference[k];
            const CVec &own = y_ue[k][k];
            t.desired = std::norm(own(lag)) / noise_ue[k];
            t.isi = (detail::energy(own) - std::norm(own(lag))) / noise_ue[k];
            for (int kp = 0; kp < k_count; ++kp)
                if (kp != k)
                    t.iui += detail::energy(y_ue[k][kp]) / noise_ue[k];
            t.sensing = detail::energy(y_ue[k][k_count]) / noise_ue[k];
            out.ue.push_back(t);

            SinrTerms e;
            const Eigen::Index elag = m0 + pre.reference[k] + forms.eve[k].best_index;
            const CVec &eo = y_eve[k];
            const double d = (elag >= 0 && elag < eo.size()) ? std::norm(eo(elag)) : 0.0;
            e.desired = d / noise_eve;
            e.isi = (detail::energy(eo) - d) / noise_eve;
            for (int kp = 0; kp < k_count; ++kp)
                if (kp != k)
                    e.iui += detail::energy(y_eve[kp]) / noise_eve;
            e.sensing = detail::energy(y_eve[k_count]) / noise_eve;
            out.eve.push_back(e);
        }
        return out;
    }

    /// Sample estimates of the same terms from random QPSK streams of `symbols` samples.
    inline MeasuredTerms monte_carlo_terms(const ChannelSet &channels, const ArrayConfig &array, const PrecoderSet &pre,
                                           const QuadraticFormSet &forms, const std::vector<double> &noise_ue,
                                           double noise_eve, Eigen::Index symbols, std::mt19937_64 &rng)
    {
        const int k_count = channels.num_ues();
        const int m0 = pre.max_abs_pre_delay() + 1;
        const Eigen::Index start = detail::largest_tap(channels) + 1;
        const Eigen::Index horizon = symbols + start;

        StreamSet streams;
        streams.probing = qpsk_stream(horizon + 2 * m0, rng, StreamKind::Probing, m0);
        for (int k = 0; k < k_count; ++k)
            streams.data.push_back(qpsk_stream(horizon + 2 * m0, rng, StreamKind::Data, m0));

        auto window_power = [&](const CVec &y) { return y.segment(start, symbols).squaredNorm() / symbols; };
        // Desired tap by least squares against every lag of the stream, ISI as the residual power.
        const int lag_lo = -m0;
        const int lag_hi = detail::largest_tap(channels) + m0;
        auto split = [&](const CVec &y, const SymbolStream &s, Eigen::Index lag, double &desired, double &rest) {
            const int width = lag_hi - lag_lo + 1;
            CMat a(symbols, width);
            for (int j = 0; j < width; ++j)
                for (Eigen::Index n = 0; n < symbols; ++n)
                    a(n, j) = s.at(start + n - (lag_lo + j));
            const CVec c = (a.adjoint() * a).ldlt().solve(a.adjoint() * y.segment(start, symbols));
            const cd c0 = c(lag - lag_lo);
            double r = 0.0;
            for (Eigen::Index n = start; n < horizon; ++n)
                r += std::norm(y(n) - c0 * s.at(n - lag));
            desired = std::norm(c0);
            rest = r / symbols;
        };

        std::vector<std::vector<CVec>> y_ue(k_count, std::vector<CVec>(k_count + 1));
        std::vector<CVec> y_eve(k_count + 1);
        for (int src = 0; src <= k_count; ++src)
        {
            const bool sensing = src == k_count;
            const CMat x = synthesize_transmit(detail::isolate_source(pre, sensing ? -1 : src), streams, horizon);
            for (int k = 0; k < k_count; ++k)
                y_ue[k][src] = receive_oracle(channels.ues[k], array, x, 0.0);
            y_eve[src] = receive_oracle(channels.eve, array, x, 0.0);
        }

        MeasuredTerms out;
        for (int k = 0; k < k_count; ++k)
        {
            SinrTerms t;
            split(y_ue[k][k], streams.data[k], pre.reference[k], t.desired, t.isi);
            t.desired /= noise_ue[k];
            t.isi /= noise_ue[k];
            for (int kp = 0; kp < k_count; ++kp)
                if (kp != k)
                    t.iui += window_power(y_ue[k][kp]) / noise_ue[k];
            t.sensing = window_power(y_ue[k][k_count]) / noise_ue[k];
            out.ue.push_back(t);

            SinrTerms e;
            split(y_eve[k], streams.data[k], pre.reference[k] + forms.eve[k].best_index, e.desired, e.isi);
            e.desired /= noise_eve;
            e.isi /= noise_eve;
            for (int kp = 0; kp < k_count; ++kp)
                if (kp != k)
                    e.iui += window_power(y_eve[kp]) / noise_eve;
            e.sensing = window_power(y_eve[k_count]) / noise_eve;
            out.eve.push_back(e);
        }
        return out;
    }

    /// Closed-form counterpart of MeasuredTerms.
    inline MeasuredTerms closed_form_terms(const PrecoderSet &pre, const QuadraticFormSet &forms)
    {
        MeasuredTerms out;
        for (int k = 0; k < forms.num_ues(); ++k)
        {
            out.ue.push_back(ue_terms(k, pre, forms));
            out.eve.push_back(eve_terms(k, pre, forms));
        }
        return out;
    }

    /// Per-path i.i.d. CN(0, power / entries) precoders with DAM alignment.
    inline PrecoderSet random_precoders(const ChannelSet &channels, int num_antennas, double power, std::mt19937_64 &rng)
    {
        PrecoderSet pre = zero_precoders(channels, num_antennas);
        int count = 1;
        for (const auto &row : pre.comm)
            count += static_cast<int>(row.size());
        const double var = power / (count * num_antennas);
        auto draw = [&](CVec &v) {
            for (Eigen::Index i = 0; i < v.size(); ++i)
                v(i) = detail::complex_gaussian(rng, var);
        };
        draw(pre.sensing);
        for (auto &row : pre.comm)
            for (auto &f : row)
                draw(f);
        return pre;
    }

    /// Worst (ISI + IUI + sensing) / desired over all UEs, in dB, from impulse measurements.
    inline double zf_leakage_db(const MeasuredTerms &m)
    {
        double worst = 0.0;
        for (const auto &t : m.ue)
        {
            if (!(t.desired > 0.0))
                return std::numeric_limits<double>::infinity();
            worst = std::max(worst, t.interference() / t.desired);
        }
        return worst > 0.0 ? 10.0 * std::log10(worst) : -std::numeric_limits<double>::infinity();
    }

    /// Largest deviation from the projector identities Q^2 = Q, Q^H = Q, Q h = 0 over the bank.
    inline double projector_defect(const ProjectorBank &bank, const ChannelSet &channels, const ArrayConfig &array)
    {
        double worst = 0.0;
        auto check = [&](const CMat &q, const std::vector<NulledColumn> &nulled) {
            worst = std::max(worst, (q * q - q).cwiseAbs().maxCoeff());
            worst = std::max(worst, (q - q.adjoint()).cwiseAbs().maxCoeff());
            for (const auto &c : nulled)
            {
                const PathComponent &p = c.role == LinkRole::Sensing ? channels.sensing.paths[c.path]
                                                                     : channels.ues[c.user].paths[c.path];
                const CVec h = spatial_vector(p, array);
                worst = std::max(worst, (q * h).norm() / h.norm());
            }
        };
        for (std::size_t k = 0; k < bank.comm.size(); ++k)
            for (std::size_t l = 0; l < bank.comm[k].size(); ++l)
                check(bank.comm[k][l], bank.nulled[k][l]);
        check(bank.sensing, bank.sensing_nulled);
        return worst;
    }

    /// Delay CRB from a 3x3 Fisher matrix over (tau, Re beta, Im beta) with central differences of the mean.
    inline double numeric_fim_crb(double tau, cd beta, const LosEchoModel &m, double noise_var, double step_fraction = 1e-4)
    {
        const double h_tau = step_fraction / m.pulse.bandwidth;
        const double h_b = step_fraction * std::max(std::abs(beta), 1e-300);
        CMat d(m.snapshots(), 3);
        d.col(0) = (m.mean(tau + h_tau, beta) - m.mean(tau - h_tau, beta)) / (2.0 * h_tau);
        d.col(1) = (m.mean(tau, beta + h_b) - m.mean(tau, beta - h_b)) / (2.0 * h_b);
        d.col(2) = (m.mean(tau, beta + kJ * h_b) - m.mean(tau, beta - kJ * h_b)) / (2.0 * h_b);
        const RMat fim = (2.0 / noise_var) * (d.adjoint() * d).real();
        return fim.inverse()(0, 0);
    }

    struct ValidationCheck
    {
        std::string name;
        double value = 0.0;
        double limit = 0.0;
        bool pass = false;
    };

    namespace detail
    {
        inline double term_error(const SinrTerms &a, const SinrTerms &b)
        {
            const double scale = std::max({a.desired, a.isi, a.iui, a.sensing, 1e-300});
            double e = 0.0;
            e = std::max(e, std::abs(a.desired - b.desired));
            e = std::max(e, std::abs(a.isi - b.isi));
            e = std::max(e, std::abs(a.iui - b.iui));
            e = std::max(e, std::abs(a.sensing - b.sensing));
            return e / scale;
        }

        inline ScenarioConfig validation_scenario(int num_antennas, int num_ues, int paths)
        {
            ScenarioConfig sc;
            sc.array = ArrayConfig::half_wavelength(num_antennas, 28e9, 128e6);
            const std::vector<Point2> ue_pos{{18.0, -10.0}, {32.0, 12.0}, {24.0, -3.0}};
            sc.num_ues = num_ues;
            sc.ues.assign(ue_pos.begin(), ue_pos.begin() + num_ues);
            sc.ue_paths.assign(num_ues, paths);
            sc.sensing_paths = paths;
            sc.eve_paths = paths;
            sc.noise_ue.assign(num_ues, 1.0);
            sc.noise_eve = 1.0;
            sc.scatter_outer_radius = 15.0;
            return sc;
        }
    } // namespace detail

    /// Oracle-equivalence checks run by `damsec validate`.
    inline std::vector<ValidationCheck> run_validation_suite(std::uint64_t seed)
    {
        std::vector<ValidationCheck> out;
        std::mt19937_64 rng(seed);

        {
            double worst = 0.0;
            for (int trial = 0; trial < 5; ++trial)
            {
                const auto sc = detail::validation_scenario(16, 1 + trial % 3, 2 + trial % 3);
                const auto ch = generate_channels(sc, rng);
                const auto forms = build_quadratic_forms(ch, sc.array, sc.noise_ue, sc.noise_eve);
                const auto pre = random_precoders(ch, sc.array.num_antennas, 1.0, rng);
                const auto cf = closed_form_terms(pre, forms);
                const auto im = impulse_terms(ch, sc.array, pre, forms, sc.noise_ue, sc.noise_eve);
                for (int k = 0; k < sc.num_ues; ++k)
                    worst = std::max({worst, detail::term_error(cf.ue[k], im.ue[k]), detail::term_error(cf.eve[k], im.eve[k])});
            }
            out.push_back({"sinr terms vs impulse response (rel)", worst, 1e-9, worst < 1e-9});
        }
        {
            const auto sc = detail::validation_scenario(16, 2, 3);
            const auto ch = generate_channels(sc, rng);
            const auto forms = build_quadratic_forms(ch, sc.array, sc.noise_ue, sc.noise_eve);
            const auto pre = random_precoders(ch, sc.array.num_antennas, 1.0, rng);
            const auto cf = closed_form_terms(pre, forms);
            const auto mc = monte_carlo_terms(ch, sc.array, pre, forms, sc.noise_ue, sc.noise_eve, 50000, rng);
            double worst = 0.0;
            for (int k = 0; k < sc.num_ues; ++k)
                worst = std::max({worst, detail::term_error(cf.ue[k], mc.ue[k]), detail::term_error(cf.eve[k], mc.eve[k])});
            out.push_back({"sinr terms vs random symbols (rel)", worst, 0.03, worst < 0.03});
        }
        {
            const auto sc = detail::validation_scenario(30, 2, 3);
            const auto ch = generate_channels(sc, rng);
            const auto bank = build_projector_bank(ch, sc.array);
            const auto forms = build_quadratic_forms(ch, sc.array, sc.noise_ue, sc.noise_eve);
            const auto pre = mrt_precoders(ch, sc.array, bank, equal_split(1.0, sc.num_ues));
            const double leak = zf_leakage_db(impulse_terms(ch, sc.array, pre, forms, sc.noise_ue, sc.noise_eve));
            out.push_back({"zf leakage at the UEs (dB)", leak, -80.0, leak < -80.0});
            const double defect = projector_defect(bank, ch, sc.array);
            out.push_back({"projector identities", defect, 1e-10, defect < 1e-10});
        }
        {
            double worst = 0.0;
            for (int trial = 0; trial < 5; ++trial)
            {
                const auto sc = detail::validation_scenario(30, 2, 3);
                const auto ch = generate_channels(sc, rng);
                const auto &los = ch.sensing.paths.front();
                const PulseShape pulse{16, sc.array.bandwidth, window_reference(los.delay, sc.array.bandwidth)};
                const CVec f = array_response(los.angle, sc.array) * 0.1;
                const auto m = make_los_echo_model(sc.array, los.angle, f, pulse, 256, rng);
                const double closed = crb_delay(los.delay, los.gain, m, 4e-12);
                const double numeric = numeric_fim_crb(los.delay, los.gain, m, 4e-12);
                worst = std::max(worst, std::abs(closed - numeric) / numeric);
            }
            out.push_back({"delay crb vs numeric fisher (rel)", worst, 1e-6, worst < 1e-6});
        }
        {
            const auto sc = detail::validation_scenario(8, 1, 3);
            const auto ch = generate_channels(sc, rng);
            const int taps = ch.sensing.max_tap() + 4;
            const auto frame = make_frame_config(sc.array.num_antennas, taps, 8, 1.0, rng);
            const CMat y = simulate_subframe(ch.sensing, sc.array, frame, 0.0, rng);
            const CMat est = ls_channel_estimate(y, frame);
            const CMat truth = time_space_matrix(ch.sensing, sc.array, taps).adjoint();
            const double err = (est - truth).cwiseAbs().maxCoeff() / truth.cwiseAbs().maxCoeff();
            out.push_back({"noiseless ls channel estimate (rel)", err, 1e-10, err < 1e-10});
        }
        {
            const auto sc = detail::validation_scenario(30, 2, 3);
            std::vector<double> crb_ratio;
            try
            {
                const auto ch = generate_channels(sc, rng);
                const auto bank = build_projector_bank(ch, sc.array);
                std::vector<double> noise(sc.num_ues, 4e-12);
                const auto raw = build_quadratic_forms(ch, sc.array, noise, 4e-12);
                const auto eff = effective_forms(bank, raw);
                const CVec a = array_response(ch.sensing.paths.front().angle, sc.array);
                const double qa2 = (bank.sensing * a).squaredNorm();
                const double p = dbm_to_watt(20.0);
                const double floor = 0.1 * p * qa2;
                const auto init = mrt_precoders(ch, sc.array, bank, crb_aware_split(p, sc.num_ues, floor / qa2));
                const auto rp = build_reduced_problem(ch, sc.array, bank, eff, {a, floor}, p);
                const auto res = sca_loop(init, rp);
                bool monotone = true;
                for (std::size_t i = 1; i < res.state.history.size(); ++i)
                    monotone = monotone && res.state.history[i] >= res.state.history[i - 1];
                const double pr = res.precoders.total_power() / p - 1.0;
                const double cr = 1.0 - std::norm(a.dot(res.precoders.sensing)) / floor;
                const double viol = std::max({0.0, pr, cr});
                out.push_back({"sca monotone objective", monotone ? 0.0 : 1.0, 0.5, monotone});
                out.push_back({"sca constraint violation (rel)", viol, 1e-6, viol < 1e-6});
            }
            catch (const Error &e)
            {
                out.push_back({std::string("sca run failed: ") + e.what(), 1.0, 0.0, false});
            }
        }
        return out;
    }

    inline void print_validation_table(std::ostream &os, const std::vector<ValidationCheck> &checks)
    {
        char buf[256];
        std::snprintf(buf, sizeof(buf), "%-40s %14s %12s  %s\n", "check", "value", "limit", "result");
        os << buf;
        for (const auto &c : checks)
        {
            std::snprintf(buf, sizeof(buf), "%-40s %14.4e %12.3e  %s\n", c.name.c_str(), c.value, c.limit,
                          c.pass ? "PASS" : "FAIL");
            os << buf;
        }
    }

} // namespace damsec

#endif
