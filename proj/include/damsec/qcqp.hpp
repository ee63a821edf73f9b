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

#ifndef DAMSEC_QCQP_HPP
#define DAMSEC_QCQP_HPP

// Small dense convex solver: minimize c^T x subject to convex quadratic and
// log-concave constraints, via a phase-I / log-barrier interior-point method.

#include "types.hpp"

#include <Eigen/Cholesky>

#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace damsec
{
    /// x^T H x + g^T x + c <= 0 with H symmetric PSD (an empty H makes it linear).
    struct QuadraticConstraint
    {
        RMat h;
        RVec g;
        double c = 0.0;
        std::string family;

        double value(const RVec &x) const
        {
            double v = g.dot(x) + c;
            if (h.size() > 0)
                v += x.dot(h * x);
            return v;
        }
    };

    /// a^T x + c - w ln(u^T x + u0) <= 0 with w >= 0 (convex; domain u^T x + u0 > 0).
    struct LogConstraint
    {
        RVec a;
        double c = 0.0;
        double weight = 1.0;
        RVec u;
        double u0 = 0.0;
        std::string family;

        double argument(const RVec &x) const { return u.dot(x) + u0; }

        double value(const RVec &x) const
        {
            const double arg = argument(x);
            if (!(arg > 0.0))
                return std::numeric_limits<double>::infinity();
            return a.dot(x) + c - weight * std::log(arg);
        }
    };

    struct ConvexSubproblem
    {
        int num_vars = 0;
        RVec objective; // minimise objective^T x
        std::vector<QuadraticConstraint> quadratic;
        std::vector<LogConstraint> logs;

        int num_constraints() const { return static_cast<int>(quadratic.size() + logs.size()); }

        void validate() const
        {
            if (objective.size() != num_vars)
                throw std::invalid_argument("ConvexSubproblem: objective length != num_vars");
            for (const auto &q : quadratic)
                if (q.g.size() != num_vars || (q.h.size() > 0 && (q.h.rows() != num_vars || q.h.cols() != num_vars)))
                    throw std::invalid_argument("ConvexSubproblem: quadratic constraint '" + q.family +
                                                "' has inconsistent dimensions");
            for (const auto &l : logs)
                if (l.a.size() != num_vars || l.u.size() != num_vars || l.weight < 0.0)
                    throw std::invalid_argument("ConvexSubproblem: log constraint '" + l.family +
                                                "' has inconsistent dimensions");
        }

        /// Largest constraint value and the family it belongs to.
        std::pair<double, std::string> worst_violation(const RVec &x) const
        {
            double worst = -std::numeric_limits<double>::infinity();
            std::string fam;
            for (const auto &q : quadratic)
                if (const double v = q.value(x); v > worst)
                {
                    worst = v;
                    fam = q.family;
                }
            for (const auto &l : logs)
                if (const double v = l.value(x); v > worst)
                {
                    worst = v;
                    fam = l.family;
                }
            return {worst, fam};
        }
    };

    enum class SolveStatus
    {
        Optimal,
        Infeasible,
        MaxIter
    };

    inline const char *to_string(SolveStatus s)
    {
        switch (s)
        {
        case SolveStatus::Optimal:
            return "optimal";
        case SolveStatus::Infeasible:
            return "infeasible";
        default:
            return "max_iter";
        }
    }

    struct SolveResult
    {
        SolveStatus status = SolveStatus::MaxIter;
        RVec x;
        double objective = 0.0;
        double gap = std::numeric_limits<double>::infinity();
        int newton_steps = 0;
        std::string violated_family;
        std::string message;
    };

    struct SolverOptions
    {
        double tolerance = 1e-8; // duality gap m / t
        double mu = 20.0;
        double t0 = 1.0;
        int max_newton = 2000;
    };

    namespace detail
    {
        // phi(x) = t c^T x - sum ln(-f_i(x)); +inf outside the strict interior.
        struct Barrier
        {
            const ConvexSubproblem &sp;

            double value(const RVec &x, double t) const
            {
                double v = t * sp.objective.dot(x);
                for (const auto &q : sp.quadratic)
                {
                    const double f = q.value(x);
                    if (!(f < 0.0))
                        return std::numeric_limits<double>::infinity();
                    v -= std::log(-f);
                }
                for (const auto &l : sp.logs)
                {
                    const double f = l.value(x);
                    if (!(f < 0.0))
                        return std::numeric_limits<double>::infinity();
                    v -= std::log(-f);
                }
                return v;
            }

            void derivatives(const RVec &x, double t, RVec &grad, RMat &hess) const
            {
                const Eigen::Index n = x.size();
                grad = t * sp.objective;
                hess = RMat::Zero(n, n);
                for (const auto &q : sp.quadratic)
                {
                    const double f = q.value(x);
                    RVec df = q.g;
                    if (q.h.size() > 0)
                        df += 2.0 * (q.h * x);
                    grad += df / (-f);
                    hess.noalias() += (df * df.transpose()) / (f * f);
                    if (q.h.size() > 0)
                        hess += (2.0 / (-f)) * q.h;
                }
                for (const auto &l : sp.logs)
                {
                    const double f = l.value(x);
                    const double arg = l.argument(x);
                    const RVec df = l.a - (l.weight / arg) * l.u;
                    grad += df / (-f);
                    hess.noalias() += (df * df.transpose()) / (f * f);
                    hess.noalias() += (l.weight / (arg * arg * (-f))) * (l.u * l.u.transpose());
                }
            }
        };

        // Barrier path following from a strictly feasible x. stop_early(x) may end the run.
        template <typename Stop>
        SolveResult barrier_path(const ConvexSubproblem &sp, RVec x, const SolverOptions &opt, Stop stop_early)
        {
            const Barrier bar{sp};
            const int m = sp.num_constraints();
            SolveResult res;
            double t = opt.t0;
            RVec grad;
            RMat hess;
            int steps = 0;
            while (true)
            {
                // centering
                for (int inner = 0; inner < 200; ++inner)
                {
                    if (steps >= opt.max_newton)
                    {
                        res.status = SolveStatus::MaxIter;
                        res.x = x;
                        res.objective = sp.objective.dot(x);
                        res.gap = m / t;
                        res.newton_steps = steps;
                        res.message = "Newton budget exhausted";
                        return res;
                    }
                    bar.derivatives(x, t, grad, hess);
                    const double scale = std::max(1.0, hess.diagonal().cwiseAbs().maxCoeff());
                    RVec dx;
                    double reg = 1e-14 * scale;
                    for (int attempt = 0; attempt < 12; ++attempt)
                    {
                        Eigen::LDLT<RMat> ldlt(hess + reg * RMat::Identity(x.size(), x.size()));
                        if (ldlt.info() == Eigen::Success && ldlt.isPositive())
                        {
                            dx = -ldlt.solve(grad);
                            if (dx.allFinite() && grad.dot(dx) < 0.0)
                                break;
                        }
                        dx.resize(0);
                        reg *= 100.0;
                    }
                    ++steps;
                    if (dx.size() == 0)
                        break;
                    const double dec = -grad.dot(dx);
                    if (dec / 2.0 <= 1e-12)
                        break;
                    const double phi0 = bar.value(x, t);
                    double s = 1.0;
                    bool moved = false;
                    for (int bt = 0; bt < 80; ++bt)
                    {
                        const RVec cand = x + s * dx;
                        const double phi = bar.value(cand, t);
                        if (phi <= phi0 - 0.01 * s * dec)
                        {
                            x = cand;
                            moved = true;
                            break;
                        }
                        s *= 0.5;
                    }
                    if (!moved)
                        break;
                    if (stop_early(x))
                    {
                        res.status = SolveStatus::Optimal;
                        res.x = x;
                        res.objective = sp.objective.dot(x);
                        res.gap = m / t;
                        res.newton_steps = steps;
                        res.message = "stopped early";
                        return res;
                    }
                }
                if (m == 0 || m / t < opt.tolerance)
                    break;
                t *= opt.mu;
            }
            res.status = SolveStatus::Optimal;
            res.x = x;
            res.objective = sp.objective.dot(x);
            res.gap = m == 0 ? 0.0 : m / t;
            res.newton_steps = steps;
            return res;
        }
    } // namespace detail

    /// Finds a strictly feasible point (phase I: min s s.t. f_i(x) <= s, s >= -1), then follows the log barrier.
    inline SolveResult solve_subproblem(const ConvexSubproblem &sp, const RVec &start, const SolverOptions &opt = {})
    {
        sp.validate();
        if (start.size() != sp.num_vars)
            throw std::invalid_argument("solve_subproblem: start point has the wrong length");
        if (sp.num_constraints() == 0)
            throw std::invalid_argument("solve_subproblem: unconstrained linear objective is unbounded");

        RVec x = start;
        int phase1_steps = 0;
        auto [worst, fam] = sp.worst_violation(x);
        if (!(worst < 0.0))
        {
            for (const auto &l : sp.logs)
                if (!(l.argument(x) > 0.0))
                    throw std::invalid_argument("solve_subproblem: start point outside the domain of log constraint '" +
                                                l.family + "'");
            const int n = sp.num_vars;
            ConvexSubproblem p1;
            p1.num_vars = n + 1;
            p1.objective = RVec::Zero(n + 1);
            p1.objective(n) = 1.0;
            for (const auto &q : sp.quadratic)
            {
                QuadraticConstraint c;
                c.family = q.family;
                c.g = RVec::Zero(n + 1);
                c.g.head(n) = q.g;
                c.g(n) = -1.0;
                c.c = q.c;
                if (q.h.size() > 0)
                {
                    c.h = RMat::Zero(n + 1, n + 1);
                    c.h.topLeftCorner(n, n) = q.h;
                }
                p1.quadratic.push_back(std::move(c));
            }
            QuadraticConstraint floor;
            floor.family = "phase1-floor";
            floor.g = RVec::Zero(n + 1);
            floor.g(n) = -1.0;
            floor.c = -1.0;
            p1.quadratic.push_back(floor);
            for (const auto &l : sp.logs)
            {
                LogConstraint c = l;
                c.a = RVec::Zero(n + 1);
                c.a.head(n) = l.a;
                c.a(n) = -1.0;
                c.u = RVec::Zero(n + 1);
                c.u.head(n) = l.u;
                p1.logs.push_back(std::move(c));
            }
            RVec y(n + 1);
            y.head(n) = x;
            y(n) = std::max(worst, -0.5) + 1.0;
            SolverOptions o1 = opt;
            o1.tolerance = 1e-10;
            auto r1 = detail::barrier_path(p1, y, o1, [&](const RVec &z) {
                return sp.worst_violation(z.head(n)).first < -1e-4;
            });
            phase1_steps = r1.newton_steps;
            x = r1.x.head(n);
            std::tie(worst, fam) = sp.worst_violation(x);
            if (!(worst < 0.0))
            {
                SolveResult res;
                res.status = SolveStatus::Infeasible;
                res.x = x;
                res.objective = sp.objective.dot(x);
                res.newton_steps = phase1_steps;
                res.violated_family = fam;
                res.message = "no strictly feasible point; most violated constraint family: " + fam;
                return res;
            }
        }
        auto res = detail::barrier_path(sp, x, opt, [](const RVec &) { return false; });
        res.newton_steps += phase1_steps;
        return res;
    }

} // namespace damsec

#endif
