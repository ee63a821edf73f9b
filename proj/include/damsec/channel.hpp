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

#ifndef DAMSEC_CHANNEL_HPP
#define DAMSEC_CHANNEL_HPP

// Geometry, ULA manifold, path loss and multipath channel synthesis for the
// sensing (round-trip), legitimate-user and eavesdropper links.
//
// Coordinates: the BS sits at the origin with its ULA along the y-axis, so the
// array broadside is +x and a node at (x, y) is seen under azimuth atan2(y, x).
// Only the half-plane x > 0 is a valid node location.

#include "types.hpp"

#include <algorithm>
#include <array>
#include <random>
#include <set>
#include <string>
#include <vector>

namespace damsec
{
    struct ArrayConfig
    {
        int num_antennas = 30;
        double element_spacing = 0.0; // m
        double wavelength = 0.0;      // m
        double bandwidth = 128e6;     // Hz

        double sample_period() const { return 1.0 / bandwidth; }

        /// Half-wavelength ULA at the given carrier.
        static ArrayConfig half_wavelength(int n, double carrier_hz, double bandwidth_hz)
        {
            ArrayConfig cfg;
            cfg.num_antennas = n;
            cfg.wavelength = kSpeedOfLight / carrier_hz;
            cfg.element_spacing = 0.5 * cfg.wavelength;
            cfg.bandwidth = bandwidth_hz;
            return cfg;
        }

        void validate() const
        {
            if (num_antennas < 1)
                throw ConfigError("array: num_antennas must be >= 1");
            if (!(element_spacing > 0.0) || !(wavelength > 0.0) || !(bandwidth > 0.0))
                throw ConfigError("array: spacing, wavelength and bandwidth must be positive");
        }
    };

    enum class PathType
    {
        LoS,
        NLoS
    };

    struct PathComponent
    {
        cd gain{0.0, 0.0}; // beta = sqrt(N/L) * alpha
        double angle = 0.0; // rad, azimuth from broadside
        double delay = 0.0; // s, physical propagation delay
        int tap = 0;        // round(B * (delay - timing_reference))
        PathType type = PathType::NLoS;
    };

    enum class LinkRole
    {
        Sensing,
        User,
        Eve
    };

    struct MultipathChannel
    {
        std::vector<PathComponent> paths;
        double timing_reference = 0.0; // s, earliest arrival
        LinkRole role = LinkRole::User;
        int user = -1; // UE index for LinkRole::User

        int size() const { return static_cast<int>(paths.size()); }
        int min_tap() const
        {
            int m = paths.front().tap;
            for (const auto &p : paths)
                m = std::min(m, p.tap);
            return m;
        }
        int max_tap() const
        {
            int m = paths.front().tap;
            for (const auto &p : paths)
                m = std::max(m, p.tap);
            return m;
        }
    };

    struct Point2
    {
        double x = 0.0;
        double y = 0.0;
    };

    inline double distance(Point2 a, Point2 b) { return std::hypot(a.x - b.x, a.y - b.y); }

    struct ScenarioConfig
    {
        ArrayConfig array = ArrayConfig::half_wavelength(30, 28e9, 128e6);
        int num_ues = 2;

        Point2 target{15.0, 4.0};
        std::vector<Point2> ues{{18.0, -10.0}, {32.0, 12.0}};
        Point2 eve{26.0, 2.0};

        int sensing_paths = 3;
        std::vector<int> ue_paths{3, 3};
        int eve_paths = 3;

        // Scatterers: centre drawn uniformly on the middle 60% of the BS-node segment,
        // offset by a radius drawn uniformly in [inner, outer] at a uniform bearing.
        double scatter_inner_radius = 2.0; // m
        double scatter_outer_radius = 8.0; // m

        double noise_sensing_stage1 = 4.0e-12; // sigma_d^2, W
        double noise_sensing_stage2 = 4.0e-12; // sigma_a^2, W
        std::vector<double> noise_ue{4.0e-12, 4.0e-12};
        double noise_eve = 4.0e-12;

        double total_power = 1.0; // W
        int coherence_symbols = 1000;
        std::uint64_t seed = 1;

        void validate() const
        {
            array.validate();
            if (num_ues < 1)
                throw ConfigError("scenario: num_ues must be >= 1");
            if (static_cast<int>(ues.size()) != num_ues || static_cast<int>(ue_paths.size()) != num_ues ||
                static_cast<int>(noise_ue.size()) != num_ues)
                throw ConfigError("scenario: ue positions, path counts and noise variances must have num_ues entries");
            if (sensing_paths < 1 || eve_paths < 1 ||
                std::any_of(ue_paths.begin(), ue_paths.end(), [](int l) { return l < 1; }))
                throw ConfigError("scenario: every link needs at least one path");
            if (!(noise_sensing_stage1 > 0.0) || !(noise_sensing_stage2 > 0.0) || !(noise_eve > 0.0) ||
                std::any_of(noise_ue.begin(), noise_ue.end(), [](double v) { return !(v > 0.0); }))
                throw ConfigError("scenario: noise variances must be positive");
            if (!(total_power > 0.0))
                throw ConfigError("scenario: total power must be positive");
            if (!(scatter_inner_radius >= 0.0) || !(scatter_outer_radius >= scatter_inner_radius))
                throw ConfigError("scenario: scatterer annulus must satisfy 0 <= inner <= outer");
        }
    };

    /// ULA steering vector, unit norm.
    inline CVec array_response(double angle, const ArrayConfig &cfg)
    {
        const int n = cfg.num_antennas;
        CVec a(n);
        const double phase = 2.0 * kPi * cfg.element_spacing * std::sin(angle) / cfg.wavelength;
        const double norm = 1.0 / std::sqrt(static_cast<double>(n));
        for (int m = 0; m < n; ++m)
            a(m) = norm * std::exp(kJ * (phase * m));
        return a;
    }

    /// beta * a(phi)
    inline CVec spatial_vector(const PathComponent &p, const ArrayConfig &cfg)
    {
        return p.gain * array_response(p.angle, cfg);
    }

    /// N x L matrix of spatial vectors.
    inline CMat spatial_matrix(const MultipathChannel &ch, const ArrayConfig &cfg)
    {
        CMat h(cfg.num_antennas, ch.size());
        for (int l = 0; l < ch.size(); ++l)
            h.col(l) = spatial_vector(ch.paths[l], cfg);
        return h;
    }

    /// Large-scale gain K_u (d/d0)^-eps_u, d0 = 1 m.
    inline double large_scale_gain(double distance_m, PathType type)
    {
        constexpr double d0 = 1.0;
        if (!(distance_m >= d0))
            throw ModelError("large_scale_gain: distance " + std::to_string(distance_m) +
                             " m is below the 1 m reference distance");
        const double k = type == PathType::LoS ? std::pow(10.0, -6.14) : std::pow(10.0, -7.2);
        const double eps = type == PathType::LoS ? 2.0 : 2.92;
        return k * std::pow(distance_m / d0, -eps);
    }

    /// Assigns taps from the earliest arrival; rejects unresolvable paths.
    inline void assign_taps(MultipathChannel &ch, double bandwidth)
    {
        double eta = ch.paths.front().delay;
        for (const auto &p : ch.paths)
            eta = std::min(eta, p.delay);
        ch.timing_reference = eta;
        for (auto &p : ch.paths)
            p.tap = static_cast<int>(std::lround(bandwidth * (p.delay - eta)));
    }

    inline bool taps_distinct(const MultipathChannel &ch)
    {
        std::set<int> seen;
        for (const auto &p : ch.paths)
            if (!seen.insert(p.tap).second)
                return false;
        return true;
    }

    struct ChannelSet
    {
        MultipathChannel sensing;
        std::vector<MultipathChannel> ues;
        MultipathChannel eve;

        int num_ues() const { return static_cast<int>(ues.size()); }
    };

    namespace detail
    {
        inline double azimuth_of(Point2 p)
        {
            if (!(p.x > 0.0))
                throw ModelError("geometry: node at (" + std::to_string(p.x) + ", " + std::to_string(p.y) +
                                 ") is not in front of the array (x must be > 0)");
            return std::atan2(p.y, p.x);
        }

        inline cd complex_gaussian(std::mt19937_64 &rng, double variance)
        {
            std::normal_distribution<double> g(0.0, std::sqrt(0.5 * variance));
            const double re = g(rng);
            const double im = g(rng);
            return {re, im};
        }

        // One link: path 0 is LoS, paths 1.. bounce off one scatterer each.
        // round_trip adds the node->BS return leg (monostatic sensing).
        inline MultipathChannel draw_link(Point2 node, int num_paths, bool round_trip, const ScenarioConfig &cfg,
                                          std::mt19937_64 &rng)
        {
            const Point2 bs{0.0, 0.0};
            const double d_los = distance(bs, node);
            if (d_los < 1.0)
                throw ModelError("geometry: node closer than 1 m to the BS (zero or degenerate distance)");
            const double los_angle = azimuth_of(node);
            const double n_scale = std::sqrt(static_cast<double>(cfg.array.num_antennas) / num_paths);

            std::uniform_real_distribution<double> seg(0.2, 0.8);
            std::uniform_real_distribution<double> rad(cfg.scatter_inner_radius, cfg.scatter_outer_radius);
            std::uniform_real_distribution<double> bearing(-kPi, kPi);

            constexpr int kMaxAttempts = 1000;
            for (int attempt = 0; attempt < kMaxAttempts; ++attempt)
            {
                MultipathChannel ch;
                PathComponent los;
                los.type = PathType::LoS;
                los.angle = los_angle;
                const double los_len = round_trip ? 2.0 * d_los : d_los;
                los.delay = los_len / kSpeedOfLight;
                los.gain = n_scale * complex_gaussian(rng, large_scale_gain(los_len, PathType::LoS));
                ch.paths.push_back(los);

                for (int l = 1; l < num_paths; ++l)
                {
                    Point2 s;
                    int tries = 0;
                    do
                    {
                        const double t = seg(rng);
                        const double r = rad(rng);
                        const double b = bearing(rng);
                        s = {t * node.x + r * std::cos(b), t * node.y + r * std::sin(b)};
                        ++tries;
                    } while ((s.x <= 0.0 || distance(bs, s) < 1.0 || distance(s, node) < 1.0) && tries < 1000);
                    if (tries >= 1000)
                        throw ModelError("geometry: cannot place a scatterer in front of the array");
                    PathComponent p;
                    p.type = PathType::NLoS;
                    p.angle = std::atan2(s.y, s.x);
                    double len = distance(bs, s) + distance(s, node);
                    if (round_trip)
                        len += d_los;
                    p.delay = len / kSpeedOfLight;
                    p.gain = n_scale * complex_gaussian(rng, large_scale_gain(len, PathType::NLoS));
                    ch.paths.push_back(p);
                }
                assign_taps(ch, cfg.array.bandwidth);
                if (taps_distinct(ch))
                    return ch;
            }
            throw ModelError("geometry: could not draw " + std::to_string(num_paths) +
                             " resolvable paths; widen the scatterer annulus");
        }
    } // namespace detail

    /// Draws all links. Deterministic for a given RNG state.
    inline ChannelSet generate_channels(const ScenarioConfig &cfg, std::mt19937_64 &rng)
    {
        cfg.validate();
        ChannelSet set;
        set.sensing = detail::draw_link(cfg.target, cfg.sensing_paths, true, cfg, rng);
        set.sensing.role = LinkRole::Sensing;
        for (int k = 0; k < cfg.num_ues; ++k)
        {
            auto ch = detail::draw_link(cfg.ues[k], cfg.ue_paths[k], false, cfg, rng);
            ch.role = LinkRole::User;
            ch.user = k;
            set.ues.push_back(std::move(ch));
        }
        set.eve = detail::draw_link(cfg.eve, cfg.eve_paths, false, cfg, rng);
        set.eve.role = LinkRole::Eve;
        return set;
    }

    inline ChannelSet generate_channels(const ScenarioConfig &cfg)
    {
        std::mt19937_64 rng(cfg.seed);
        return generate_channels(cfg, rng);
    }

    /// Largest tap over the legitimate users (n_B,max).
    inline int max_user_tap(const ChannelSet &set)
    {
        int m = 0;
        for (const auto &ch : set.ues)
            m = std::max(m, ch.max_tap());
        return m;
    }

} // namespace damsec

#endif
