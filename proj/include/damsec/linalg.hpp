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

#ifndef DAMSEC_LINALG_HPP
#define DAMSEC_LINALG_HPP

#include "types.hpp"

#include <Eigen/SVD>

#include <span>
#include <vector>

namespace damsec
{
    /// Column-space basis of a matrix, found by SVD with a relative singular-value cut.
    /// Columns of the result are orthonormal; rank 0 yields an N x 0 matrix.
    inline CMat orthonormal_range(const CMat &cols, double rel_tol = 1e-10)
    {
        if (cols.cols() == 0 || cols.rows() == 0)
            return CMat(cols.rows(), 0);
        Eigen::JacobiSVD<CMat> svd(cols, Eigen::ComputeThinU);
        const auto &sv = svd.singularValues();
        const double cut = rel_tol * (sv.size() > 0 ? sv(0) : 0.0);
        Eigen::Index rank = 0;
        while (rank < sv.size() && sv(rank) > cut && sv(rank) > 0.0)
            ++rank;
        return svd.matrixU().leftCols(rank);
    }

    /// Orthogonal projector onto the complement of span(cols).
    struct NullingProjector
    {
        CMat matrix;            // I - U_r U_r^H
        Eigen::Index rank = 0;  // numerical rank of the nulled columns
        Eigen::Index columns = 0;

        bool rank_deficient() const { return rank < columns; }
    };

    inline NullingProjector nulling_projector(const CMat &cols, Eigen::Index dim, double rel_tol = 1e-10)
    {
        NullingProjector out;
        out.columns = cols.cols();
        out.matrix = CMat::Identity(dim, dim);
        if (cols.cols() == 0)
            return out;
        if (cols.rows() != dim)
            throw std::invalid_argument("nulling_projector: column length does not match dimension");
        const CMat u = orthonormal_range(cols, rel_tol);
        out.rank = u.cols();
        out.matrix.noalias() -= u * u.adjoint();
        return out;
    }

    /// Orthonormal basis of the range of a Hermitian projector (eigenvalues near one).
    inline CMat projector_range(const CMat &projector)
    {
        Eigen::SelfAdjointEigenSolver<CMat> eig(projector);
        const auto &ev = eig.eigenvalues();
        Eigen::Index first = 0;
        while (first < ev.size() && ev(first) < 0.5)
            ++first;
        return eig.eigenvectors().rightCols(ev.size() - first);
    }

    inline CMat block_diagonal(std::span<const CMat> blocks)
    {
        Eigen::Index rows = 0, cols = 0;
        for (const auto &b : blocks)
        {
            rows += b.rows();
            cols += b.cols();
        }
        CMat out = CMat::Zero(rows, cols);
        Eigen::Index r = 0, c = 0;
        for (const auto &b : blocks)
        {
            out.block(r, c, b.rows(), b.cols()) = b;
            r += b.rows();
            c += b.cols();
        }
        return out;
    }

    inline CVec stack(std::span<const CVec> parts)
    {
        Eigen::Index n = 0;
        for (const auto &p : parts)
            n += p.size();
        CVec out(n);
        Eigen::Index o = 0;
        for (const auto &p : parts)
        {
            out.segment(o, p.size()) = p;
            o += p.size();
        }
        return out;
    }

    /// Column-wise Kronecker product: column l is kron(a.col(l), b.col(l)).
    inline CMat khatri_rao(const CMat &a, const CMat &b)
    {
        if (a.cols() != b.cols())
            throw std::invalid_argument("khatri_rao: column counts differ");
        CMat out(a.rows() * b.rows(), a.cols());
        for (Eigen::Index l = 0; l < a.cols(); ++l)
            for (Eigen::Index i = 0; i < a.rows(); ++i)
                out.col(l).segment(i * b.rows(), b.rows()) = a(i, l) * b.col(l);
        return out;
    }

    inline CVec kron(const CVec &a, const CVec &b)
    {
        CVec out(a.size() * b.size());
        for (Eigen::Index i = 0; i < a.size(); ++i)
            out.segment(i * b.size(), b.size()) = a(i) * b;
        return out;
    }

    /// Column-major vec().
    inline CVec vec(const CMat &m) { return Eigen::Map<const CVec>(m.data(), m.size()); }

    inline double condition_number(const CMat &m)
    {
        Eigen::JacobiSVD<CMat> svd(m);
        const auto &sv = svd.singularValues();
        if (sv.size() == 0 || sv(sv.size() - 1) <= 0.0)
            return std::numeric_limits<double>::infinity();
        return sv(0) / sv(sv.size() - 1);
    }

    // Real embedding of a Hermitian form: x^T H x == z^H A z for x = [Re z; Im z].
    inline RMat real_form(const CMat &a)
    {
        const Eigen::Index n = a.rows();
        const RMat re = 0.5 * (a + a.adjoint()).real();
        const RMat im = 0.5 * (a + a.adjoint()).imag();
        RMat out(2 * n, 2 * n);
        out.topLeftCorner(n, n) = re;
        out.topRightCorner(n, n) = -im;
        out.bottomLeftCorner(n, n) = im;
        out.bottomRightCorner(n, n) = re;
        return out;
    }

    // Re{z^H w} == x^T real_vector(w).
    inline RVec real_vector(const CVec &w)
    {
        RVec out(2 * w.size());
        out.head(w.size()) = w.real();
        out.tail(w.size()) = w.imag();
        return out;
    }

    inline CVec complex_from_real(const RVec &x)
    {
        const Eigen::Index n = x.size() / 2;
        CVec out(n);
        for (Eigen::Index i = 0; i < n; ++i)
            out(i) = cd(x(i), x(i + n));
        return out;
    }

    inline double hermitian_form(const CMat &a, const CVec &z) { return std::real(z.dot(a * z)); }

    /// Pairwise (cascade) summation; order-independent enough for reproducible aggregation.
    inline double pairwise_sum(std::span<const double> v)
    {
        if (v.size() <= 8)
        {
            double s = 0.0;
            for (double x : v)
                s += x;
            return s;
        }
        const auto half = v.size() / 2;
        return pairwise_sum(v.first(half)) + pairwise_sum(v.subspan(half));
    }

} // namespace damsec

#endif
