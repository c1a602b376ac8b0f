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

#pragma once

#include <cstdint>
#include <random>

#include "pdmwit/qobjects.hpp"

namespace pdmwit {

/// Algorithm identifier written into simulation metadata.
inline constexpr const char *kRngAlgorithm = "mt19937_64/splitmix64-substreams";

using Rng = std::mt19937_64;

/// SplitMix64 finalizer; used to derive independent substream seeds.
[[nodiscard]] constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

[[nodiscard]] constexpr std::uint64_t substream_seed(std::uint64_t root,
                                                     std::uint64_t index) noexcept {
    return splitmix64(splitmix64(root) ^ splitmix64(index + 0x632BE59BD9B4E019ULL));
}

/// Uniform double in [0, 1) from the top 53 bits; portable across standard libraries.
[[nodiscard]] inline double uniform01(Rng &rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Standard normal via Box-Muller on uniform01 (portable, unlike std::normal_distribution).
[[nodiscard]] inline double standard_normal(Rng &rng) {
    double u1 = uniform01(rng);
    while (u1 <= 0.0) {
        u1 = uniform01(rng);
    }
    const double u2 = uniform01(rng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.141592653589793 * u2);
}

[[nodiscard]] inline Matrix ginibre(Index rows, Index cols, Rng &rng) {
    Matrix g(rows, cols);
    for (Index j = 0; j < cols; ++j) {
        for (Index i = 0; i < rows; ++i) {
            const double re = standard_normal(rng);
            const double im = standard_normal(rng);
            g(i, j) = Complex(re, im) / std::sqrt(2.0);
        }
    }
    return g;
}

/// Haar-random unitary (QR of a Ginibre matrix with the R-diagonal phases removed).
[[nodiscard]] inline Matrix random_unitary(Index d, Rng &rng) {
    const Matrix g = ginibre(d, d, rng);
    Eigen::HouseholderQR<Matrix> qr(g);
    Matrix q = qr.householderQ() * identity(d);
    const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (Index k = 0; k < d; ++k) {
        const Complex rk = r(k, k);
        const double mag = std::abs(rk);
        if (mag > 0.0) {
            q.col(k) *= rk / mag;
        }
    }
    return q;
}

[[nodiscard]] inline Vector random_pure_vector(Index d, Rng &rng) {
    Vector v = ginibre(d, 1, rng).col(0);
    return v / v.norm();
}

[[nodiscard]] inline DensityMatrix random_pure_state(Index d, Rng &rng) {
    return DensityMatrix::pure(random_pure_vector(d, rng));
}

/// Random mixed state G G^dag / Tr with G of shape d x rank (Hilbert-Schmidt for rank = d).
[[nodiscard]] inline DensityMatrix random_density(Index d, Rng &rng, Index rank = 0) {
    if (rank <= 0) {
        rank = d;
    }
    const Matrix g = ginibre(d, rank, rng);
    Matrix rho = g * g.adjoint();
    rho /= rho.trace().real();
    return DensityMatrix(Matrix((rho + rho.adjoint()) * 0.5));
}

[[nodiscard]] inline DensityMatrix random_incoherent_state(Index d, Rng &rng) {
    RealVector p(d);
    for (Index k = 0; k < d; ++k) {
        double u = uniform01(rng);
        while (u <= 0.0) {
            u = uniform01(rng);
        }
        p(k) = -std::log(u);
    }
    return DensityMatrix::diagonal(p / p.sum());
}

/// Random probability vector (flat Dirichlet).
[[nodiscard]] inline RealVector random_probabilities(Index d, Rng &rng) {
    return random_incoherent_state(d, rng).matrix().diagonal().real();
}

/**
 * Random CPTP map from a Stinespring dilation: Haar isometry V from C^in into
 * C^out (x) C^env, Kraus operators K_e = (I (x) <e|) V.
 */
[[nodiscard]] inline KrausChannel random_channel(Index in_dim, Index out_dim, Rng &rng,
                                                 Index env_dim = 4) {
    const Index big = out_dim * env_dim;
    if (big < in_dim) {
        throw InvalidArgument("random_channel: dilation too small for an isometry");
    }
    const Matrix u = random_unitary(big, rng);
    const Matrix v = u.leftCols(in_dim);
    std::vector<Matrix> ops;
    for (Index e = 0; e < env_dim; ++e) {
        Matrix k(out_dim, in_dim);
        for (Index o = 0; o < out_dim; ++o) {
            k.row(o) = v.row(o * env_dim + e);
        }
        ops.push_back(std::move(k));
    }
    return KrausChannel(std::move(ops));
}

/**
 * Random measure-and-prepare channel: read out |i>, prepare sigma_i. Every
 * such map satisfies Phi = Phi o Delta. Kraus set {sqrt(w_m) |psi_im><i|}.
 */
[[nodiscard]] inline KrausChannel random_oi_channel(Index d, Rng &rng, Index rank = 2) {
    std::vector<Matrix> ops;
    for (Index i = 0; i < d; ++i) {
        const RealVector w = random_probabilities(rank, rng);
        for (Index m = 0; m < rank; ++m) {
            Matrix k = Matrix::Zero(d, d);
            k.col(i) = std::sqrt(w(m)) * random_pure_vector(d, rng);
            ops.push_back(std::move(k));
        }
    }
    return KrausChannel(std::move(ops));
}

/// Random Hermitian matrix with unit trace (not necessarily positive).
[[nodiscard]] inline HermitianMatrix random_unit_trace_hermitian(Index d, Rng &rng) {
    const Matrix g = ginibre(d, d, rng);
    Matrix h = (g + g.adjoint()) * 0.5;
    h += identity(d) * ((1.0 - h.trace().real()) / static_cast<double>(d));
    return HermitianMatrix(h);
}

/// Random observable with spectrum in {-1, +1}, both signs present.
[[nodiscard]] inline Matrix random_dichotomic(Index d, Rng &rng) {
    const Matrix u = random_unitary(d, rng);
    RealVector signs(d);
    Index flips = 1 + static_cast<Index>(uniform01(rng) * static_cast<double>(d - 1));
    if (flips >= d) {
        flips = d - 1;
    }
    for (Index k = 0; k < d; ++k) {
        signs(k) = k < flips ? -1.0 : 1.0;
    }
    Matrix q = u * signs.cast<Complex>().asDiagonal() * u.adjoint();
    return (q + q.adjoint()) * 0.5;
}

} // namespace pdmwit
