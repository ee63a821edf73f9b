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

#ifndef DAMSEC_SCA_HPP
#define DAMSEC_SCA_HPP

// Max-min secrecy optimisation by successive convex approximation.
//
// Every per-path precoder lives in the range of its ZF projector, and only its
// inner products with the intended path and with Eve's paths enter the SINRs.
// The optimiser therefore works in an orthonormal basis of
// span{Q_kl h_kl, Q_kl h_e,1..L_e} per path (and span{Q_s a, Q_s h_e,..} for
// sensing), which leaves the optimum unchanged. BasisMode::Range keeps the full
// projector range instead.

#include "channel.hpp"
#include "linalg.hpp"
#include "precoding.hpp"
#include "qcqp.hpp"
#include "secrecy.hpp"
#include "stage2_delay.hpp"

#include <cmath>
#include <ostream>
#include <string>
#include <vector>

namespace damsec
{
    struct CrbCoefficients
    {
        double g = 0.0;      // sensing gain G (1/s^2)
        double gamma2 = 0.0; // CRB <= Gamma  <=>  |a^H f_s|^2 >= gamma2 sigma_a^2
    };

    inline CrbCoefficients crb_constraint_coeff(double tau, cd beta, double threshold, const CMat &probing,
                                                const PulseShape &pulse)
    {
        if (!(threshold > 0.0))
            throw ConfigError("crb_constraint_coeff: CRB threshold must be positive");
        if (!(std::abs(beta) > 0.0))
            throw DegenerateError("crb_constraint_coeff: zero LoS gain");
        CrbCoefficients c;
        c.g = sensing_gain(tau, probing, pulse);
        if (!(c.g > 0.0))
            throw DegenerateError("crb_constraint_coeff: G <= 0, the probing block carries no delay information");
        c.gamma2 = 1.0 / (2.0 * std::norm(beta) * threshold * c.g);
        return c;
    }

    /// m(x) = 2 Re{x^H A x0} - x0^H A x0, tight at x0 and below x^H A x for PSD A.
    struct AffineMinorant
    {
        CVec slope;          // A x0
        double offset = 0.0; // -x0^H A x0

        double operator()(const CVec &x) const { return 2.0 * std::real(x.dot(slope)) + offset; }
    };

    inline AffineMinorant linearize_quadratic(const CMat &a, const CVec &x0)
    {
        AffineMinorant m;
        m.slope = a * x0;
        m.offset = -std::real(x0.dot(m.slope));
        return m;
    }

    /// |a^H f_s|^2 >= floor on the LoS steering a.
    struct SensingRequirement
    {
        CVec steering;
        double floor = 0.0;
    };

    enum class BasisMode
    {
        Exact,
        Range
    };

    /// Reduced coordinates: z = [z_11 .. z_KL_K, z_s] with f_kl = U_kl z_kl, f_s = U_s z_s.
    struct ReducedProblem
    {
        std::vector<std::vector<CMat>> basis;
        CMat sensing_basis;
        std::vector<std::vector<Eigen::Index>> offset;
        Eigen::Index sensing_offset = 0;
        Eigen::Index dim = 0;

        // Hermitian forms on z
        std::vector<CMat> desired;      // R_c,k
        std::vector<CMat> eve_desired;  // R_e,k
        std::vector<CMat> eve_interf;   // A_e,k + sum_k'!=k B_e,k' + B_es
        CMat steering_gram;             // U_s^H a a^H U_s embedded

        SensingRequirement sensing;
        double power = 0.0;

        int num_ues() const { return static_cast<int>(desired.size()); }

        CVec reduce(const PrecoderSet &pre) const
        {
            CVec z = CVec::Zero(dim);
            for (std::size_t k = 0; k < basis.size(); ++k)
                for (std::size_t l = 0; l < basis[k].size(); ++l)
                    z.segment(offset[k][l], basis[k][l].cols()) = basis[k][l].adjoint() * pre.comm[k][l];
            z.segment(sensing_offset, sensing_basis.cols()) = sensing_basis.adjoint() * pre.sensing;
            return z;
        }

        PrecoderSet expand(const CVec &z, const PrecoderSet &layout) const
        {
            PrecoderSet pre = layout;
            for (std::size_t k = 0; k < basis.size(); ++k)
                for (std::size_t l = 0; l < basis[k].size(); ++l)
                    pre.comm[k][l] = basis[k][l] * z.segment(offset[k][l], basis[k][l].cols());
            pre.sensing = sensing_basis * z.segment(sensing_offset, sensing_basis.cols());
            return pre;
        }

        double illumination(const CVec &z) const { return hermitian_form(steering_gram, z); }

        struct Slacks
        {
            RVec q1, q2, q3;
        };

        Slacks slacks(const CVec &z) const
        {
            const int k_count = num_ues();
            Slacks s{RVec(k_count), RVec(k_count), RVec(k_count)};
            for (int k = 0; k < k_count; ++k)
            {
                s.q1(k) = hermitian_form(desired[k], z) + 1.0;
                s.q3(k) = hermitian_form(eve_interf[k], z) + 1.0;
                s.q2(k) = s.q3(k) + hermitian_form(eve_desired[k], z);
            }
            return s;
        }

        /// min_k log2(1 + gamma_k) - log2(1 + gamma_e,k).
        double objective(const CVec &z) const
        {
            const auto s = slacks(z);
            double worst = std::numeric_limits<double>::infinity();
            for (int k = 0; k < num_ues(); ++k)
                worst = std::min(worst, std::log2(s.q1(k)) - std::log2(s.q2(k)) + std::log2(s.q3(k)));
            return worst;
        }
    };

    namespace detail
    {
        inline CMat path_basis(const CMat &q, const CVec &h, const CMat &eve, BasisMode mode)
        {
            if (mode == BasisMode::Range)
                return projector_range(q);
            CMat cols(q.rows(), 1 + eve.cols());
            cols.col(0) = q * h;
            for (Eigen::Index e = 0; e < eve.cols(); ++e)
                cols.col(1 + e) = q * eve.col(e);
            return orthonormal_range(cols);
        }

        inline CMat embed(const CMat &local, Eigen::Index offset, Eigen::Index dim)
        {
            CMat out = CMat::Zero(dim, dim);
            out.block(offset, offset, local.rows(), local.cols()) = local;
            return out;
        }
    } // namespace detail

    /// Builds the reduced problem from the projected forms (f = Q b).
    inline ReducedProblem build_reduced_problem(const ChannelSet &channels, const ArrayConfig &array,
                                                const ProjectorBank &bank, const QuadraticFormSet &forms,
                                                const SensingRequirement &sensing, double total_power,
                                                BasisMode mode = BasisMode::Exact)
    {
        const int k_count = channels.num_ues();
        if (forms.num_ues() != k_count || bank.num_ues() != k_count)
            throw std::invalid_argument("build_reduced_problem: UE count mismatch between channels, bank and forms");
        if (!(total_power > 0.0))
            throw ConfigError("build_reduced_problem: total power must be positive");
        ReducedProblem rp;
        rp.sensing = sensing;
        rp.power = total_power;
        const CMat he = spatial_matrix(channels.eve, array);

        rp.basis.resize(k_count);
        rp.offset.resize(k_count);
        Eigen::Index off = 0;
        for (int k = 0; k < k_count; ++k)
            for (int l = 0; l < channels.ues[k].size(); ++l)
            {
                const CVec h = spatial_vector(channels.ues[k].paths[l], array);
                rp.basis[k].push_back(detail::path_basis(bank.comm[k][l], h, he, mode));
                rp.offset[k].push_back(off);
                off += rp.basis[k].back().cols();
            }
        rp.sensing_basis = detail::path_basis(bank.sensing, sensing.steering, he, mode);
        rp.sensing_offset = off;
        off += rp.sensing_basis.cols();
        rp.dim = off;

        // stacked user basis: maps z_k (its own segment) to f_bar_k
        std::vector<CMat> ubar(k_count);
        std::vector<Eigen::Index> user_off(k_count), user_dim(k_count);
        for (int k = 0; k < k_count; ++k)
        {
            ubar[k] = block_diagonal(std::span<const CMat>(rp.basis[k]));
            user_off[k] = rp.offset[k].front();
            user_dim[k] = ubar[k].cols();
        }
        auto on_user = [&](const CMat &m, int k) {
            return detail::embed(ubar[k].adjoint() * m * ubar[k], user_off[k], rp.dim);
        };
        const CMat &us = rp.sensing_basis;
        const CMat eve_sens = detail::embed(us.adjoint() * forms.eve_sensing * us, rp.sensing_offset, rp.dim);

        for (int k = 0; k < k_count; ++k)
        {
            rp.desired.push_back(on_user(forms.ue[k].desired, k));
            rp.eve_desired.push_back(on_user(forms.eve[k].desired, k));
            CMat interf = on_user(forms.eve[k].self, k) + eve_sens;
            for (int kp = 0; kp < k_count; ++kp)
                if (kp != k)
                    interf += on_user(forms.eve[kp].cross, kp);
            rp.eve_interf.push_back(interf);
        }
        const CVec sa = us.adjoint() * sensing.steering;
        rp.steering_gram = detail::embed(sa * sa.adjoint(), rp.sensing_offset, rp.dim);
        return rp;
    }

    struct ScaIterationRecord
    {
        int iteration = 0;
        double objective = 0.0;
        double power_residual = 0.0; // ||f||^2 / P - 1
        double crb_residual = 0.0;   // 1 - |a^H f_s|^2 / floor
        int newton_steps = 0;
        std::string status;
    };

    struct ScaState
    {
        std::vector<CVec> comm; // f_bar_c,k
        CVec sensing;
        RVec t1, t2, t3, q1, q2, q3;
        double objective = 0.0;
        std::vector<double> history;
        std::vector<ScaIterationRecord> records;
        int iteration = 0;
        int rejected = 0;
        double max_decrease = 0.0; // largest drop of a rejected proposal
        bool converged = false;
        std::string stop_reason;
    };

    struct ScaOptions
    {
        int max_iterations = 50;
        double tolerance = 1e-4;
        SolverOptions solver{};
        BasisMode basis = BasisMode::Exact;
    };

    /// Subproblem in y = [Re z^; Im z^; gamma; t1; t2; t3], z^ = z / sqrt(P), linearised at z0.
    inline ConvexSubproblem build_subproblem(const ReducedProblem &rp, const CVec &z0)
    {
        if (z0.size() != rp.dim)
            throw std::invalid_argument("build_subproblem: iterate dimension " + std::to_string(z0.size()) +
                                        " does not match the reduced problem (" + std::to_string(rp.dim) + ")");
        const int k_count = rp.num_ues();
        const Eigen::Index nx = 2 * rp.dim;
        const int n = static_cast<int>(nx) + 1 + 3 * k_count;
        const Eigen::Index i_gamma = nx;
        auto i_t1 = [&](int k) { return nx + 1 + k; };
        auto i_t2 = [&](int k) { return nx + 1 + k_count + k; };
        auto i_t3 = [&](int k) { return nx + 1 + 2 * k_count + k; };

        const double p = rp.power;
        const CVec zh = z0 / std::sqrt(p);
        const double ln2 = std::log(2.0);

        ConvexSubproblem sp;
        sp.num_vars = n;
        sp.objective = RVec::Zero(n);
        sp.objective(i_gamma) = -1.0;

        auto padded = [&](const RVec &v) {
            RVec out = RVec::Zero(n);
            out.head(nx) = v;
            return out;
        };

        {
            QuadraticConstraint c;
            c.family = "power";
            c.h = RMat::Zero(n, n);
            c.h.topLeftCorner(nx, nx).setIdentity();
            c.g = RVec::Zero(n);
            c.c = -1.0;
            sp.quadratic.push_back(std::move(c));
        }
        {
            const double rho = rp.sensing.floor;
            const auto m = linearize_quadratic(p * rp.steering_gram, zh);
            QuadraticConstraint c;
            c.family = "crb";
            c.g = padded(-2.0 * real_vector(m.slope) / rho);
            c.c = 1.0 - m.offset / rho;
            sp.quadratic.push_back(std::move(c));
        }
        for (int k = 0; k < k_count; ++k)
        {
            QuadraticConstraint c0;
            c0.family = "rate-split";
            c0.g = RVec::Zero(n);
            c0.g(i_gamma) = 1.0;
            c0.g(i_t1(k)) = -1.0;
            c0.g(i_t2(k)) = 1.0;
            c0.g(i_t3(k)) = -1.0;
            sp.quadratic.push_back(std::move(c0));

            const auto m1 = linearize_quadratic(p * rp.desired[k], zh);
            LogConstraint l1;
            l1.family = "ue-rate";
            l1.a = RVec::Zero(n);
            l1.a(i_t1(k)) = 1.0;
            l1.weight = 1.0 / ln2;
            l1.u = padded(2.0 * real_vector(m1.slope));
            l1.u0 = m1.offset + 1.0;
            sp.logs.push_back(std::move(l1));

            const auto m3 = linearize_quadratic(p * rp.eve_interf[k], zh);
            LogConstraint l3;
            l3.family = "eve-interference";
            l3.a = RVec::Zero(n);
            l3.a(i_t3(k)) = 1.0;
            l3.weight = 1.0 / ln2;
            l3.u = padded(2.0 * real_vector(m3.slope));
            l3.u0 = m3.offset + 1.0;
            sp.logs.push_back(std::move(l3));

            // log2 q2 <= log2 q2^0 + (q2 - q2^0) / (q2^0 ln 2) with q2 >= z^H T z + 1
            const CMat total = p * (rp.eve_interf[k] + rp.eve_desired[k]);
            const double q20 = hermitian_form(total, zh) + 1.0;
            QuadraticConstraint c2;
            c2.family = "eve-total";
            c2.h = RMat::Zero(n, n);
            c2.h.topLeftCorner(nx, nx) = real_form(total) / (q20 * ln2);
            c2.g = RVec::Zero(n);
            c2.g(i_t2(k)) = -1.0;
            c2.c = std::log2(q20) + (1.0 - q20) / (q20 * ln2);
            sp.quadratic.push_back(std::move(c2));
        }
        return sp;
    }

    namespace detail
    {
        inline void record_slacks(ScaState &st, const ReducedProblem &rp, const CVec &z)
        {
            const auto s = rp.slacks(z);
            st.q1 = s.q1;
            st.q2 = s.q2;
            st.q3 = s.q3;
            st.t1 = s.q1.array().log() / std::log(2.0);
            st.t2 = s.q2.array().log() / std::log(2.0);
            st.t3 = s.q3.array().log() / std::log(2.0);
            st.objective = rp.objective(z);
        }

        inline RVec start_point(const ScaState &st, const CVec &zh)
        {
            const int k_count = static_cast<int>(st.t1.size());
            const Eigen::Index nx = 2 * zh.size();
            RVec y(nx + 1 + 3 * k_count);
            y.head(nx) = real_vector(zh);
            y(nx) = st.objective;
            y.segment(nx + 1, k_count) = st.t1;
            y.segment(nx + 1 + k_count, k_count) = st.t2;
            y.segment(nx + 1 + 2 * k_count, k_count) = st.t3;
            return y;
        }

        inline ScaIterationRecord make_record(int it, const ReducedProblem &rp, const CVec &z, double obj, int steps,
                                              const std::string &status)
        {
            ScaIterationRecord r;
            r.iteration = it;
            r.objective = obj;
            r.power_residual = z.squaredNorm() / rp.power - 1.0;
            r.crb_residual = rp.sensing.floor > 0.0 ? 1.0 - rp.illumination(z) / rp.sensing.floor : 0.0;
            r.newton_steps = steps;
            r.status = status;
            return r;
        }
    } // namespace detail

    struct ScaResult
    {
        PrecoderSet precoders;
        ScaState state;
    };

    /// Outer SCA loop warm-started from a feasible precoder set.
    inline ScaResult sca_loop(const PrecoderSet &init, const ReducedProblem &rp, const ScaOptions &opt = {})
    {
        CVec z = rp.reduce(init);
        const double p0 = z.squaredNorm();
        if (p0 > rp.power * (1.0 + 1e-9))
            throw InfeasibleError("sca_loop: infeasible start, the initial precoders use " + std::to_string(p0) +
                                  " W of a " + std::to_string(rp.power) + " W budget; lower the initial power");
        if (rp.illumination(z) < rp.sensing.floor * (1.0 - 1e-9))
            throw InfeasibleError("sca_loop: infeasible start, the sensing beam misses the CRB floor; raise the "
                                  "sensing power or relax the CRB threshold");

        ScaResult out;
        ScaState &st = out.state;
        detail::record_slacks(st, rp, z);
        st.history.push_back(st.objective);
        st.records.push_back(detail::make_record(0, rp, z, st.objective, 0, "start"));

        for (int it = 1; it <= opt.max_iterations; ++it)
        {
            st.iteration = it;
            const double sp_scale = std::sqrt(rp.power);
            const auto sp = build_subproblem(rp, z);
            const auto sol = solve_subproblem(sp, detail::start_point(st, z / sp_scale), opt.solver);
            if (sol.status == SolveStatus::Infeasible)
            {
                st.stop_reason = "subproblem infeasible (" + sol.violated_family + ")";
                st.records.push_back(detail::make_record(it, rp, z, st.objective, sol.newton_steps, "infeasible"));
                break;
            }
            const CVec cand = sp_scale * complex_from_real(sol.x.head(2 * rp.dim));
            const double obj = rp.objective(cand);
            if (!(obj >= st.objective))
            {
                ++st.rejected;
                st.max_decrease = std::max(st.max_decrease, st.objective - obj);
                st.records.push_back(detail::make_record(it, rp, cand, obj, sol.newton_steps, "rejected"));
                st.converged = true;
                st.stop_reason = "no ascent from the subproblem solution";
                break;
            }
            const double gain = obj - st.objective;
            z = cand;
            detail::record_slacks(st, rp, z);
            st.history.push_back(st.objective);
            st.records.push_back(detail::make_record(it, rp, z, st.objective, sol.newton_steps, to_string(sol.status)));
            if (gain < opt.tolerance)
            {
                st.converged = true;
                st.stop_reason = "objective change below tolerance";
                break;
            }
        }
        if (st.stop_reason.empty())
            st.stop_reason = "iteration limit";

        out.precoders = rp.expand(z, init);
        st.sensing = out.precoders.sensing;
        for (int k = 0; k < out.precoders.num_ues(); ++k)
            st.comm.push_back(out.precoders.stacked(k));
        return out;
    }

    /// CSV trace of the per-iteration records.
    inline void write_sca_trace(std::ostream &os, const ScaState &st)
    {
        os << "iteration,objective,power_residual,crb_residual,newton_steps,status\n";
        os.precision(17);
        for (const auto &r : st.records)
            os << r.iteration << ',' << r.objective << ',' << r.power_residual << ',' << r.crb_residual << ','
               << r.newton_steps << ',' << r.status << '\n';
    }

    /// Ratios against the original power and CRB constraints (both must be <= 1).
    struct ConstraintAudit
    {
        double power_ratio = 0.0; // sum ||f||^2 / P
        double crb_ratio = 0.0;   // CRB(tau_1) / Gamma
    };

    inline ConstraintAudit audit_constraints(const PrecoderSet &pre, double total_power, const LosEchoModel &echo_template,
                                             const CVec &los_steering, double tau, cd beta, double noise_var,
                                             double threshold)
    {
        ConstraintAudit a;
        a.power_ratio = pre.total_power() / total_power;
        LosEchoModel m = echo_template;
        m.illumination = los_steering.dot(pre.sensing);
        a.crb_ratio = crb_delay(tau, beta, m, noise_var) / threshold;
        return a;
    }

} // namespace damsec

#endif
