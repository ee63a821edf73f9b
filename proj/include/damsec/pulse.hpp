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

#ifndef DAMSEC_PULSE_HPP
#define DAMSEC_PULSE_HPP

#include "types.hpp"

#include <random>

namespace damsec
{
    /// sin(pi x) / (pi x)
    inline double sinc(double x)
    {
        if (std::abs(x) < 1e-8)
            return 1.0 - kPi * kPi * x * x / 6.0;
        const double px = kPi * x;
        return std::sin(px) / px;
    }

    /// d sinc(x) / dx
    inline double sinc_derivative(double x)
    {
        if (std::abs(x) < 1e-4)
        {
            const double p2 = kPi * kPi;
            return -p2 * x / 3.0 + p2 * p2 * x * x * x / 30.0;
        }
        return (std::cos(kPi * x) - sinc(x)) / x;
    }

    /// Sinc-sampled delay signature over M taps: [p(tau)]_k = sinc(k + B (eta - tau)).
    /// Integer-tap delays give a canonical basis vector.
    struct PulseShape
    {
        int taps = 16;
        double bandwidth = 128e6; // Hz
        double reference = 0.0;   // eta, s

        /// Delay expressed in taps relative to the reference.
        double to_taps(double tau) const { return bandwidth * (tau - reference); }
        double from_taps(double u) const { return reference + u / bandwidth; }

        RVec vector(double tau) const { return vector_taps(to_taps(tau)); }

        RVec vector_taps(double u) const
        {
            RVec p(taps);
            for (int k = 0; k < taps; ++k)
                p(k) = sinc(k - u);
            return p;
        }

        /// Exact d p / d tau (units 1/s).
        RVec derivative(double tau) const
        {
            const double u = to_taps(tau);
            RVec d(taps);
            for (int k = 0; k < taps; ++k)
                d(k) = -bandwidth * sinc_derivative(k - u);
            return d;
        }
    };

    /// QPSK probing sequence of the given length (unit modulus).
    inline CVec qpsk_sequence(Eigen::Index length, std::mt19937_64 &rng)
    {
        CVec s(length);
        std::uniform_int_distribution<int> bit(0, 1);
        const double a = 1.0 / std::sqrt(2.0);
        for (Eigen::Index i = 0; i < length; ++i)
            s(i) = cd(bit(rng) ? a : -a, bit(rng) ? a : -a);
        return s;
    }

    /// Shifted probing matrix S = [s_d[n0], ..., s_d[n0 + cols - 1]] with
    /// s_d[n] = [s*[n], ..., s*[n - M + 1]]^T and n0 = M - 1, i.e. S(k, j) = conj(seq[M - 1 + j - k]).
    /// Requires seq.size() >= taps + cols - 1.
    inline CMat probing_matrix(const CVec &seq, int taps, Eigen::Index cols)
    {
        if (seq.size() < taps + cols - 1)
            throw std::invalid_argument("probing_matrix: sequence too short");
        CMat s(taps, cols);
        for (Eigen::Index j = 0; j < cols; ++j)
            for (int k = 0; k < taps; ++k)
                s(k, j) = std::conj(seq(taps - 1 + j - k));
        return s;
    }

} // namespace damsec

#endif
