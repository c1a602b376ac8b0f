// Copyright 2026 The pdmwit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

/**
 * @file
 * Dense complex linear-algebra kernel. Everything in the library is built on
 * the small helpers here: Hermitian eigendecomposition with a reproducible
 * basis convention, Kronecker products, anticommutators, the Moore-Penrose
 * pseudo-inverse, Euclidean projection onto the probability simplex and the
 * superoperator exponential.
 *
 * Dimensions in scope are tiny (at most 16 for joint two-time spaces, 64 for
 * three-time Leggett-Garg operators), so every matrix is dense.
 */

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include "pdmwit/errors.hpp"

namespace pdmwit {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;
using RealMatrix = Eigen::MatrixXd;
using Index = Eigen::Index;

namespace tol {
inline constexpr double hermitian = 1e-12;
inline constexpr double reconstruction = 1e-10;
inline constexpr double rank = 1e-10;
} // namespace tol

[[nodiscard]] inline Matrix identity(Index dim) {
    return Matrix::Identity(dim, dim);
}

/// Largest absolute entry of a - b. Shapes must agree.
[[nodiscard]] inline double max_abs_diff(const Matrix &a, const Matrix &b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw DimensionMismatch("max_abs_diff: shape mismatch");
    }
    if (a.size() == 0) {
        return 0.0;
    }
    return (a - b).cwiseAbs().maxCoeff();
}

/**
 * Dense complex square matrix that is Hermitian within 1e-12 (absolute,
 * entrywise). The stored matrix is replaced by its exact Hermitian part so
 * downstream spectral routines see a perfectly symmetric input.
 */
class HermitianMatrix {
  public:
    HermitianMatrix() : mat_(Matrix::Zero(1, 1)) {}

    explicit HermitianMatrix(const Matrix &m, double tolerance = tol::hermitian) {
        if (m.rows() != m.cols() || m.rows() < 1) {
            throw DimensionMismatch("HermitianMatrix: expected a non-empty square matrix, got " +
                                    std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
        }
        const double asym = max_abs_diff(m, m.adjoint());
        if (!(asym <= tolerance)) {
            throw NonHermitian("HermitianMatrix: |M - M^dagger| = " + std::to_string(asym) +
                               " exceeds tolerance");
        }
        mat_ = (m + m.adjoint()) * 0.5;
    }

    [[nodiscard]] const Matrix &matrix() const noexcept { return mat_; }
    [[nodiscard]] Index dim() const noexcept { return mat_.rows(); }
    [[nodiscard]] double trace() const { return mat_.trace().real(); }
    [[nodiscard]] Complex operator()(Index i, Index j) const { return mat_(i, j); }

  private:
    Matrix mat_;
};

/// Eigenvalues ascending; eigenvectors are the matching columns.
struct EigenDecomposition {
    RealVector eigenvalues;
    Matrix eigenvectors;

    [[nodiscard]] Matrix reconstruct() const {
        return eigenvectors * eigenvalues.cast<Complex>().asDiagonal() * eigenvectors.adjoint();
    }
};

namespace detail {

// Rotate v so that its first non-negligible component is real and positive.
inline void fix_phase(Eigen::Ref<Vector> v) {
    for (Index k = 0; k < v.size(); ++k) {
        const double mag = std::abs(v(k));
        if (mag > 1e-12) {
            v *= std::conj(v(k)) / mag;
            v(k) = Complex(mag, 0.0);
            return;
        }
    }
}

inline bool lex_less(const Vector &a, const Vector &b) {
    for (Index k = 0; k < a.size(); ++k) {
        if (a(k).real() != b(k).real()) {
            return a(k).real() < b(k).real();
        }
        if (a(k).imag() != b(k).imag()) {
            return a(k).imag() < b(k).imag();
        }
    }
    return false;
}

} // namespace detail

/**
 * Hermitian eigendecomposition with a reproducible basis: eigenvalues
 * ascending, each eigenvector phase-fixed (first nonzero entry real-positive),
 * and eigenvectors inside a degenerate cluster ordered lexicographically.
 */
[[nodiscard]] inline EigenDecomposition eig_hermitian(const HermitianMatrix &m) {
    Eigen::SelfAdjointEigenSolver<Matrix> solver(m.matrix());
    if (solver.info() != Eigen::Success) {
        throw Error("eig_hermitian: eigensolver failed to converge");
    }
    EigenDecomposition out{solver.eigenvalues(), solver.eigenvectors()};
    const Index n = out.eigenvalues.size();
    for (Index c = 0; c < n; ++c) {
        detail::fix_phase(out.eigenvectors.col(c));
    }

    const double scale = std::max(1.0, out.eigenvalues.cwiseAbs().maxCoeff());
    Index start = 0;
    while (start < n) {
        Index stop = start + 1;
        while (stop < n &&
               out.eigenvalues(stop) - out.eigenvalues(stop - 1) <= tol::reconstruction * scale) {
            ++stop;
        }
        if (stop - start > 1) {
            std::vector<Vector> cluster;
            for (Index c = start; c < stop; ++c) {
                cluster.emplace_back(out.eigenvectors.col(c));
            }
            std::stable_sort(cluster.begin(), cluster.end(), detail::lex_less);
            for (Index c = start; c < stop; ++c) {
                out.eigenvectors.col(c) = cluster[static_cast<std::size_t>(c - start)];
            }
        }
        start = stop;
    }
    return out;
}

[[nodiscard]] inline Matrix kron(const Matrix &a, const Matrix &b) {
    Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Index i = 0; i < a.rows(); ++i) {
        for (Index j = 0; j < a.cols(); ++j) {
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
        }
    }
    return out;
}

[[nodiscard]] inline Matrix kron(const HermitianMatrix &a, const Matrix &b) {
    return kron(a.matrix(), b);
}

[[nodiscard]] inline Matrix anticommutator(const Matrix &a, const Matrix &b) {
    if (a.rows() != b.rows() || a.cols() != b.cols() || a.rows() != a.cols()) {
        throw DimensionMismatch("anticommutator: operands must be square with equal dimensions");
    }
    return a * b + b * a;
}

/// Moore-Penrose pseudo-inverse; eigenvalues with |l| <= rank_tol * max|l| are dropped.
[[nodiscard]] inline HermitianMatrix pseudo_inverse(const HermitianMatrix &m,
                                                    double rank_tol = tol::rank) {
    const auto ed = eig_hermitian(m);
    const double largest = ed.eigenvalues.cwiseAbs().maxCoeff();
    RealVector inv = RealVector::Zero(ed.eigenvalues.size());
    if (largest > 0.0) {
        for (Index k = 0; k < inv.size(); ++k) {
            const double l = ed.eigenvalues(k);
            if (std::abs(l) > rank_tol * largest) {
                inv(k) = 1.0 / l;
            }
        }
    }
    Matrix p = ed.eigenvectors * inv.cast<Complex>().asDiagonal() * ed.eigenvectors.adjoint();
    return HermitianMatrix(p, 1e-6 * std::max(1.0, inv.cwiseAbs().maxCoeff()));
}

/// Euclidean projection onto {q >= 0, sum q = 1} (sort-and-threshold).
[[nodiscard]] inline RealVector project_simplex(const RealVector &v) {
    const Index n = v.size();
    if (n == 0) {
        return v;
    }
    std::vector<double> u(v.data(), v.data() + n);
    std::sort(u.begin(), u.end(), std::greater<>());
    double running = 0.0;
    double theta = 0.0;
    for (Index k = 0; k < n; ++k) {
        running += u[static_cast<std::size_t>(k)];
        const double candidate = (running - 1.0) / static_cast<double>(k + 1);
        if (u[static_cast<std::size_t>(k)] - candidate > 0.0) {
            theta = candidate;
        }
    }
    RealVector out = (v.array() - theta).max(0.0).matrix();
    const double s = out.sum();
    if (s > 0.0) {
        out /= s;
    }
    return out;
}

/// exp(generator * t) for a d^2 x d^2 Liouvillian (scaling-and-squaring Pade).
[[nodiscard]] inline Matrix superop_exp(const Matrix &generator, double t) {
    if (generator.rows() != generator.cols()) {
        throw DimensionMismatch("superop_exp: generator must be square");
    }
    const Matrix scaled = generator * Complex(t, 0.0);
    return scaled.exp();
}

/// Schatten p-norm of a Hermitian matrix (p >= 1, or infinity).
[[nodiscard]] inline double schatten_norm(const HermitianMatrix &m, double p) {
    if (!(p >= 1.0)) {
        throw InvalidP("schatten_norm: p must be >= 1, got " + std::to_string(p));
    }
    const auto ed = eig_hermitian(m);
    const RealVector a = ed.eigenvalues.cwiseAbs();
    if (std::isinf(p)) {
        return a.maxCoeff();
    }
    if (p == 1.0) {
        return a.sum();
    }
    return std::pow(a.array().pow(p).sum(), 1.0 / p);
}

[[nodiscard]] inline double trace_norm(const HermitianMatrix &m) { return schatten_norm(m, 1.0); }

[[nodiscard]] inline double min_eigenvalue(const HermitianMatrix &m) {
    return eig_hermitian(m).eigenvalues(0);
}

/// Hermitian part of an arbitrary square matrix (no tolerance check).
[[nodiscard]] inline HermitianMatrix hermitian_part(const Matrix &m) {
    return HermitianMatrix((m + m.adjoint()) * 0.5);
}

} // namespace pdmwit
