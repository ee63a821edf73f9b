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

#ifndef DAMSEC_STAGE2_DELAY_HPP
#define DAMSEC_STAGE2_DELAY_HPP

// Second sensing stage: NLoS-nulling sensing projector, ML delay/amplitude
// estimation of the LoS echo and its Cramer-Rao bound.

#include "channel.hpp"
#include "linalg.hpp"
#include "pulse.hpp"

#include <random>

namespace damsec
{
    struct SensingProjector
    {
        CMat matrix;
        bool degraded = false; // nulled columns were numerically rank deficient
    };

    /// Projector onto the complement of the NLoS sensing spatial vectors (columns of nlos).
    inline SensingProjector zf_sensing_projector(const CMat &nlos, Eigen::Index num_antennas)
    {
        if (nlos.cols() >= num_antennas)
            throw InfeasibleError("zf_sensing_projector: " + std::to_string(nlos.cols()) +
                                  " NLoS columns leave no degrees of freedom with N = " + std::to_string(num_antennas));
        const auto q = nulling_projector(nlos, num_antennas);
        return {q.matrix, q.rank_deficient()};
    }

    /// Spatial vectors of all non-LoS paths of the sensing channel (path 0 is the LoS path).
    inline CMat sensing_nlos_columns(const MultipathChannel &ch, const ArrayConfig &array)
    {
        CMat h(array.num_antennas, std::max(ch.size() - 1, 0));
        for (int l = 1; l < ch.size(); ++l)
            h.col(l - 1) = spatial_vector(ch.paths[l], array);
        return h;
    }

    /// y = S_d^H p(tau) beta (a^H f_s) + z for the LoS echo.
    struct LosEchoModel
    {
        CMat probing;        // S_d, M x M2
        PulseShape pulse;    // taps M and window reference
        cd illumination{};   // a^H(phi_1) f_s

        Eigen::Index snapshots() const { return probing.cols(); }

        /// xi(tau) = S_d^H p(tau) a^H f_s.
        CVec xi(double tau) const { return illumination * (probing.adjoint() * pulse.vector(tau).cast<cd>()); }

        CVec mean(double tau, cd beta) const { return beta * xi(tau); }

        CVec simulate(double tau, cd beta, double noise_var, std::mt19937_64 &rng) const
        {
            CVec y = mean(tau, beta);
            if (noise_var > 0.0)
            {
                std::normal_distribution<double> g(0.0, std::sqrt(0.5 * noise_var));
                for (Eigen::Index i = 0; i < y.size(); ++i)
                {
                    const double re = g(rng);
                    const double im = g(rng);
                    y(i) += cd(re, im);
                }
            }
            return y;
        }
    };

    /// Echo model with a fresh QPSK probing block: S_d(k, j) = s*[n0 + j - k].
    inline LosEchoModel make_los_echo_model(const ArrayConfig &array, double los_angle, const CVec &f_s,
                                            const PulseShape &pulse, Eigen::Index snapshots, std::mt19937_64 &rng)
    {
        LosEchoModel m;
        m.pulse = pulse;
        m.probing = probing_matrix(qpsk_sequence(pulse.taps + snapshots - 1, rng), pulse.taps, snapshots);
        m.illumination = array_response(los_angle, array).dot(f_s);
        return m;
    }

    /// Window reference that puts the delay `tau` `lead` taps into the M-tap window.
    inline double window_reference(double tau, double bandwidth, int lead = 4)
    {
        return (std::floor(bandwidth * tau) - lead) / bandwidth;
    }

    namespace detail
    {
        inline void require_illumination(const LosEchoModel &m)
        {
            if (std::abs(m.illumination) == 0.0)
                throw DegenerateError("sensing precoder is orthogonal to the LoS steering vector (a^H f_s = 0)");
        }
    } // namespace detail

    /// J(tau) = |xi^H y|^2 / ||xi||^2.
    inline double ml_objective(double tau, const CVec &y, const LosEchoModel &m)
    {
        detail::require_illumination(m);
        const CVec x = m.xi(tau);
        const double n2 = x.squaredNorm();
        if (!(n2 > 0.0))
            throw DegenerateError("ml_objective: xi(tau) vanishes");
        return std::norm(x.dot(y)) / n2;
    }

    /// beta_hat = xi^H y / ||xi||^2.
    inline cd ml_amplitude(double tau, const CVec &y, const LosEchoModel &m)
    {
        detail::require_illumination(m);
        const CVec x = m.xi(tau);
        const double n2 = x.squaredNorm();
        if (!(n2 > 0.0))
            throw DegenerateError("ml_amplitude: xi(tau) vanishes");
        return x.dot(y) / n2;
    }

    struct DelayEstimate
    {
        double delay = 0.0; // s
        cd amplitude{};
        double objective = 0.0;
        double initial_objective = 0.0;
        int iterations = 0;
        bool converged = false;
    };

    struct DelayEstimatorOptions
    {
        double bracket_taps = 2.0;
        double tolerance_taps = 1e-4;
        int max_iterations = 100;
    };

    namespace detail
    {
        // J and dJ/du in tap units, with v = S_d y and Rr = Re(S_d S_d^H); |a^H f_s|^2 cancels.
        struct TapObjective
        {
            const PulseShape &pulse;
            CVec v;
            RMat rr;

            double value(double u) const
            {
                const RVec p = pulse.vector_taps(u);
                const double h = p.dot(rr * p);
                return std::norm(p.cast<cd>().dot(v)) / h;
            }

            double slope(double u) const
            {
                const RVec p = pulse.vector_taps(u);
                RVec dp(pulse.taps);
                for (int k = 0; k < pulse.taps; ++k)
                    dp(k) = -sinc_derivative(k - u);
                const RVec rp = rr * p;
                const double h = p.dot(rp);
                const cd g = (p.cast<cd>().transpose() * v)(0);
                const cd dg = (dp.cast<cd>().transpose() * v)(0);
                const double dh = 2.0 * dp.dot(rp);
                return (2.0 * std::real(std::conj(g) * dg) * h - std::norm(g) * dh) / (h * h);
            }
        };
    } // namespace detail

    /// Newton-scaled gradient ascent on J with Armijo backtracking, inside init +/- bracket.
    inline DelayEstimate estimate_delay(const CVec &y, const LosEchoModel &m, double tau_init,
                                        const DelayEstimatorOptions &opt = {})
    {
        detail::require_illumination(m);
        if (y.size() != m.snapshots())
            throw std::invalid_argument("estimate_delay: observation length does not match the probing block");
        const detail::TapObjective obj{m.pulse, m.probing * y, (m.probing * m.probing.adjoint()).real()};

        const double u0 = m.pulse.to_taps(tau_init);
        const double lo = u0 - opt.bracket_taps;
        const double hi = u0 + opt.bracket_taps;
        double u = u0;
        double j = obj.value(u);

        DelayEstimate out;
        out.initial_objective = j;
        for (int it = 1; it <= opt.max_iterations; ++it)
        {
            out.iterations = it;
            const double g = obj.slope(u);
            constexpr double h = 1e-4;
            const double curv = (obj.slope(u + h) - obj.slope(u - h)) / (2.0 * h);
            double step = curv < 0.0 ? -g / curv : 0.1 * g / std::max(j, 1e-300);
            step = std::clamp(step, -0.5, 0.5);
            if (step == 0.0)
            {
                out.converged = true;
                break;
            }

            double accepted = 0.0;
            for (int bt = 0; bt < 40; ++bt)
            {
                const double cand = std::clamp(u + step, lo, hi);
                const double jc = obj.value(cand);
                if (jc >= j + 1e-4 * (cand - u) * g)
                {
                    accepted = cand - u;
                    u = cand;
                    j = jc;
                    break;
                }
                step *= 0.5;
            }
            if (std::abs(accepted) < opt.tolerance_taps)
            {
                out.converged = true;
                break;
            }
        }
        out.delay = m.pulse.from_taps(u);
        out.objective = ml_objective(out.delay, y, m);
        out.amplitude = ml_amplitude(out.delay, y, m);
        return out;
    }

    /// G = p~^H R_J p~ - |p~^H R_J p|^2 / (p^H R_J p) with p~ = dp/dtau (1/s^2).
    inline double sensing_gain(double tau, const CMat &probing, const PulseShape &pulse)
    {
        const CMat r = probing * probing.adjoint();
        const CVec p = pulse.vector(tau).cast<cd>();
        const CVec dp = pulse.derivative(tau).cast<cd>();
        const CVec rp = r * p;
        const double ppp = std::real(p.dot(rp));
        if (!(ppp > 0.0))
            throw DegenerateError("sensing_gain: p(tau) lies in the null space of R_J");
        return std::real(dp.dot(r * dp)) - std::norm(dp.dot(rp)) / ppp;
    }

    /// CRB(tau_1) = 1 / (|beta|^2 zeta G), zeta = 2 |a^H f_s|^2 / sigma_a^2 (s^2).
    inline double crb_delay(double tau, cd beta, const LosEchoModel &m, double noise_var)
    {
        const double zeta = 2.0 * std::norm(m.illumination) / noise_var;
        if (!(zeta > 0.0))
            throw DegenerateError("crb_delay: no LoS illumination, the CRB is infinite");
        if (!(std::abs(beta) > 0.0))
            throw DegenerateError("crb_delay: zero path gain, the CRB is infinite");
        const double g = sensing_gain(tau, m.probing, m.pulse);
        if (!(g > 0.0))
            throw DegenerateError("crb_delay: delay is not identifiable with this probing block");
        return 1.0 / (std::norm(beta) * zeta * g);
    }

} // namespace damsec

#endif
