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

#ifndef DAMSEC_TYPES_HPP
#define DAMSEC_TYPES_HPP

#include <Eigen/Dense>

#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

namespace damsec
{
    using cd = std::complex<double>;
    using CVec = Eigen::VectorXcd;
    using CMat = Eigen::MatrixXcd;
    using RVec = Eigen::VectorXd;
    using RMat = Eigen::MatrixXd;

    inline constexpr double kSpeedOfLight = 299792458.0; // m/s
    inline constexpr double kPi = std::numbers::pi;
    inline constexpr cd kJ{0.0, 1.0};

    // Base for everything the library throws on purpose.
    class Error : public std::runtime_error
    {
    public:
        using std::runtime_error::runtime_error;
    };

    // Bad user-supplied configuration (file content, parameter ranges).
    class ConfigError : public Error
    {
    public:
        using Error::Error;
    };

    // Physical model violated: degenerate geometry, unresolvable paths, out-of-domain distance.
    class ModelError : public Error
    {
    public:
        using Error::Error;
    };

    // A matrix that has to be inverted is too badly conditioned.
    class ConditioningError : public Error
    {
    public:
        using Error::Error;
    };

    // Zero-forcing or optimisation constraints cannot be met.
    class InfeasibleError : public Error
    {
    public:
        using Error::Error;
    };

    // Estimation/CRB configuration has no information (e.g. no LoS illumination).
    class DegenerateError : public Error
    {
    public:
        using Error::Error;
    };

    inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
    inline double dbm_to_watt(double dbm) { return 1e-3 * db_to_linear(dbm); }
    inline double deg_to_rad(double deg) { return deg * kPi / 180.0; }
    inline double rad_to_deg(double rad) { return rad * 180.0 / kPi; }

} // namespace damsec

#endif
