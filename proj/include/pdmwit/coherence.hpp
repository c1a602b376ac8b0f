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
 * Channels in the coherence hierarchy, with Delta the computational-basis
 * dephasing map:
 *
 *   OI   (off-diagonal independent)   Phi = Phi o Delta
 *   CE   (coherence erasing)          Phi = Delta o Phi
 *   CI   (creation incoherent)        Phi o Delta = Delta o Phi o Delta
 *   DI   (detection incoherent)       Delta o Phi = Delta o Phi o Delta
 *   NCGD Delta o L(t) o Delta o L(s) o Delta = Delta o L(t + s) o Delta
 *
 * plus the block-positivity test of R(rho, Phi) for incoherent rho and the
 * coherent-input construction that makes classical (CE and OI) channels
 * spatially incompatible.
 */

#pragma once

#include <array>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <variant>
#include <vector>

#include "pdmwit/pdm.hpp"

namespace pdmwit {

inline constexpr double kClassTolerance = 1e-9;

/// Generator L of a Lindblad semigroup L(t) = exp(L t), as a d^2 x d^2 superoperator.
struct LiouvillianProbe {
    Matrix generator;
};

/// Explicit family with L(k) = steps[k - 1] (superoperators) and L(a) o L(b) = L(a + b).
struct DiscreteFamilyProbe {
    std::vector<Matrix> steps;
};

using NcgdProbe = std::variant<std::monostate, LiouvillianProbe, DiscreteFamilyProbe>;

struct CoherenceClassReport {
    bool is_oi = false;
    bool is_ce = false;
    bool is_ci = false;
    bool is_di = false;
    bool is_ncgd = false;
    /// Max entrywise deviation of each defining identity (keys "OI", "CE", "CI", "DI", "NCGD").
    std::map<std::string, double> residuals;
    std::string ncgd_mode;
};

/**
 * Column-stacking Lindblad generator for H and jump operators L_k:
 * drho/dt = -i[H, rho] + sum_k (L rho L^dag - {L^dag L, rho} / 2).
 */
[[nodiscard]] inline Matrix lindblad_generator(const Matrix &hamiltonian,
                                               const std::vector<Matrix> &jumps) {
    const Index d = hamiltonian.rows();
    const Matrix id = identity(d);
    const Complex i(0.0, 1.0);
    Matrix gen = -i * (kron(id, hamiltonian) - kron(Matrix(hamiltonian.transpose()), id));
    for (const auto &l : jumps) {
        if (l.rows() != d || l.cols() != d) {
            throw DimensionMismatch("lindblad_generator: jump operator shape");
        }
        const Matrix ldl = l.adjoint() * l;
        gen += kron(Matrix(l.conjugate()), l) - 0.5 * kron(id, ldl) -
               0.5 * kron(Matrix(ldl.transpose()), id);
    }
    return gen;
}

namespace detail {

inline std::vector<double> ncgd_grid() {
    std::vector<double> g;
    for (int k = 0; k < 10; ++k) {
        g.push_back(std::pow(10.0, -2.0 + 3.0 * k / 9.0));
    }
    return g;
}

} // namespace detail

/**
 * Class membership by exact identity testing on the superoperator (equivalently
 * on all basis units |j><i|) within 1e-9. Without a probe, NCGD is evaluated on
 * the single-channel surrogate L(t) = L(s) = ch; a Liouvillian probe is
 * checked on a 10 x 10 logarithmic (t, s) grid over [1e-2, 10], and a pass
 * means "not refuted on grid", not a proof.
 */
[[nodiscard]] inline CoherenceClassReport classify_channel(const KrausChannel &ch,
                                                           const NcgdProbe &probe = {}) {
    if (ch.in_dim() != ch.out_dim()) {
        throw DimensionMismatch("classify_channel: Delta compositions need a square channel");
    }
    const Index d = ch.in_dim();
    const Matrix s = superoperator(ch);
    const Matrix dz = dephase_superoperator(d);

    CoherenceClassReport r;
    r.residuals["OI"] = max_abs_diff(s, s * dz);
    r.residuals["CE"] = max_abs_diff(s, dz * s);
    r.residuals["CI"] = max_abs_diff(s * dz, dz * s * dz);
    r.residuals["DI"] = max_abs_diff(dz * s, dz * s * dz);

    double ncgd = 0.0;
    if (std::holds_alternative<std::monostate>(probe)) {
        ncgd = max_abs_diff(dz * s * dz * s * dz, dz * s * s * dz);
        r.ncgd_mode = "single-channel surrogate";
    } else if (const auto *lv = std::get_if<LiouvillianProbe>(&probe)) {
        if (lv->generator.rows() != d * d || lv->generator.cols() != d * d) {
            throw DimensionMismatch("classify_channel: generator must be d^2 x d^2");
        }
        const auto grid = detail::ncgd_grid();
        std::vector<Matrix> props;
        for (double t : grid) {
            props.push_back(superop_exp(lv->generator, t));
        }
        for (std::size_t a = 0; a < grid.size(); ++a) {
            for (std::size_t b = 0; b < grid.size(); ++b) {
                const Matrix joint = superop_exp(lv->generator, grid[a] + grid[b]);
                ncgd = std::max(ncgd, max_abs_diff(dz * props[a] * dz * props[b] * dz,
                                                   dz * joint * dz));
            }
        }
        r.ncgd_mode = ncgd <= kClassTolerance ? "NCGD not refuted on grid" : "NCGD refuted on grid";
    } else {
        const auto &fam = std::get<DiscreteFamilyProbe>(probe);
        for (std::size_t a = 1; a <= fam.steps.size(); ++a) {
            for (std::size_t b = 1; a + b <= fam.steps.size(); ++b) {
                ncgd = std::max(ncgd,
                                max_abs_diff(dz * fam.steps[a - 1] * dz * fam.steps[b - 1] * dz,
                                             dz * fam.steps[a + b - 1] * dz));
            }
        }
        r.ncgd_mode = "finite family";
    }
    r.residuals["NCGD"] = ncgd;

    r.is_oi = r.residuals["OI"] <= kClassTolerance;
    r.is_ce = r.residuals["CE"] <= kClassTolerance;
    r.is_ci = r.residuals["CI"] <= kClassTolerance;
    r.is_di = r.residuals["DI"] <= kClassTolerance;
    r.is_ncgd = ncgd <= kClassTolerance;
    return r;
}

/// Powers of one channel as a discrete family L(k) = ch^k, k = 1..n.
[[nodiscard]] inline DiscreteFamilyProbe power_family(const KrausChannel &ch, std::size_t n) {
    DiscreteFamilyProbe fam;
    const Matrix s = superoperator(ch);
    Matrix acc = s;
    for (std::size_t k = 0; k < n; ++k) {
        fam.steps.push_back(acc);
        acc = s * acc;
    }
    return fam;
}

// ---------------------------------------------------------------------------
// Block positivity for incoherent inputs

/// R(diag(p), Phi) in blocks R_ij = (p_i + p_j) / 2 Phi(|j><i|).
struct BlockDecomposition {
    RealVector probs;
    Index block_dim = 0;
    std::vector<std::vector<Matrix>> blocks;

    [[nodiscard]] Index count() const noexcept { return probs.size(); }
    [[nodiscard]] const Matrix &at(Index i, Index j) const {
        return blocks[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    }

    [[nodiscard]] Matrix assemble() const {
        const Index n = block_dim;
        Matrix m(count() * n, count() * n);
        for (Index i = 0; i < count(); ++i) {
            for (Index j = 0; j < count(); ++j) {
                m.block(i * n, j * n, n, n) = at(i, j);
            }
        }
        return m;
    }
};

namespace detail {

inline void check_probabilities(const RealVector &probs) {
    if (probs.size() < 1 || (probs.array() < -1e-12).any() || std::abs(probs.sum() - 1.0) > 1e-10) {
        throw InvalidArgument("expected a probability vector (nonnegative, sums to 1)");
    }
}

} // namespace detail

[[nodiscard]] inline BlockDecomposition block_decomposition(const RealVector &probs,
                                                            const KrausChannel &ch) {
    detail::check_probabilities(probs);
    if (probs.size() != ch.in_dim()) {
        throw DimensionMismatch("block_decomposition: probability vector length != channel input dim");
    }
    BlockDecomposition b;
    b.probs = probs;
    b.block_dim = ch.out_dim();
    const Index d = ch.in_dim();
    b.blocks.assign(static_cast<std::size_t>(d), std::vector<Matrix>(static_cast<std::size_t>(d)));
    for (Index i = 0; i < d; ++i) {
        for (Index j = 0; j < d; ++j) {
            b.blocks[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
                0.5 * (probs(i) + probs(j)) * apply_channel(ch, unit(d, j, i));
        }
    }
    return b;
}

enum class BlockFailure { support, schur };

[[nodiscard]] inline std::string to_string(BlockFailure f) {
    return f == BlockFailure::support ? "support" : "schur";
}

struct BlockTestResult {
    bool compatible = true;
    std::optional<std::pair<Index, Index>> failing_pair;
    std::optional<BlockFailure> failure_kind;
    /// "pairwise" (2x2 block conditions) or "recursive" (full Schur chain); empty when compatible.
    std::string stage;
};

namespace detail {

inline double support_residual(const HermitianMatrix &a, const Matrix &b) {
    const Matrix proj = a.matrix() * pseudo_inverse(a).matrix();
    const Matrix res = (identity(a.dim()) - proj) * b;
    return res.size() == 0 ? 0.0 : res.cwiseAbs().maxCoeff();
}

} // namespace detail

/**
 * Conditions on every ordered pair (i, j), i != j:
 * support  ||(I - R_ii R_ii^+) R_ij|| <= 1e-9,
 * schur    R_jj - R_ji R_ii^+ R_ij >= -1e-9.
 * Sufficient for R >= 0 only when the input dimension is 2.
 */
[[nodiscard]] inline BlockTestResult pairwise_block_conditions(const BlockDecomposition &b) {
    for (Index i = 0; i < b.count(); ++i) {
        const HermitianMatrix rii = hermitian_part(b.at(i, i));
        const HermitianMatrix rii_pinv = pseudo_inverse(rii);
        for (Index j = 0; j < b.count(); ++j) {
            if (i == j) {
                continue;
            }
            if (detail::support_residual(rii, b.at(i, j)) > kClassTolerance) {
                return {false, std::pair{i, j}, BlockFailure::support, "pairwise"};
            }
            const Matrix schur = b.at(j, j) - b.at(j, i) * rii_pinv.matrix() * b.at(i, j);
            if (min_eigenvalue(hermitian_part(schur)) < -kClassTolerance) {
                return {false, std::pair{i, j}, BlockFailure::schur, "pairwise"};
            }
        }
    }
    return {true, std::nullopt, std::nullopt, ""};
}

/**
 * Positivity of R(diag(probs), ch) through generalized Schur complements.
 * The pairwise conditions run first and pinpoint the failing (i, j); if they
 * all hold, the Schur complement is eliminated block by block, which also
 * catches the higher-order failures that pairwise checks miss when d > 2.
 */
[[nodiscard]] inline BlockTestResult block_positivity_test(const RealVector &probs,
                                                           const KrausChannel &ch) {
    const auto b = block_decomposition(probs, ch);
    auto pairwise = pairwise_block_conditions(b);
    if (!pairwise.compatible) {
        return pairwise;
    }
    const Index n = b.block_dim;
    Matrix rest = b.assemble();
    for (Index pivot = 0; pivot + 1 < b.count(); ++pivot) {
        const Index tail = rest.rows() - n;
        const HermitianMatrix a = hermitian_part(rest.topLeftCorner(n, n));
        if (min_eigenvalue(a) < -kClassTolerance) {
            return {false, std::pair{pivot, pivot}, BlockFailure::schur, "recursive"};
        }
        const Matrix cross = rest.topRightCorner(n, tail);
        const Matrix proj = a.matrix() * pseudo_inverse(a).matrix();
        const Matrix support = (identity(n) - proj) * cross;
        for (Index j = 0; j < tail / n; ++j) {
            if (support.middleCols(j * n, n).cwiseAbs().maxCoeff() > kClassTolerance) {
                return {false, std::pair{pivot, pivot + 1 + j}, BlockFailure::support, "recursive"};
            }
        }
        rest = rest.bottomRightCorner(tail, tail) -
               cross.adjoint() * pseudo_inverse(a).matrix() * cross;
    }
    const HermitianMatrix last = hermitian_part(rest);
    if (min_eigenvalue(last) < -kClassTolerance) {
        const Index idx = b.count() - 1;
        return {false, std::pair{idx - 1, idx}, BlockFailure::schur, "recursive"};
    }
    return {true, std::nullopt, std::nullopt, ""};
}

// ---------------------------------------------------------------------------
// Classical (CE and OI) channels and coherent inputs

/// Column-stochastic matrix a(k, i) = P(output |k> | input |i>).
class StochasticMatrix {
  public:
    explicit StochasticMatrix(RealMatrix a) : a_(std::move(a)) {
        if (a_.rows() != a_.cols() || a_.rows() < 1) {
            throw DimensionMismatch("StochasticMatrix: square matrix required");
        }
        if ((a_.array() < 0.0).any()) {
            throw InvalidArgument("StochasticMatrix: entries must be nonnegative");
        }
        for (Index i = 0; i < a_.cols(); ++i) {
            if (std::abs(a_.col(i).sum() - 1.0) > 1e-12) {
                throw InvalidArgument("StochasticMatrix: column " + std::to_string(i) +
                                      " does not sum to 1");
            }
        }
    }

    [[nodiscard]] const RealMatrix &matrix() const noexcept { return a_; }
    [[nodiscard]] Index dim() const noexcept { return a_.rows(); }
    [[nodiscard]] double operator()(Index k, Index i) const { return a_(k, i); }

  private:
    RealMatrix a_;
};

/// Kraus set {sqrt(a_ki) |k><i|}: maps |i><j| to 0 for i != j and |i><i| to sum_k a_ki |k><k|.
[[nodiscard]] inline KrausChannel build_ce_oi_channel(const StochasticMatrix &a) {
    const Index d = a.dim();
    std::vector<Matrix> ops;
    for (Index i = 0; i < d; ++i) {
        for (Index k = 0; k < d; ++k) {
            if (a(k, i) > 0.0) {
                ops.push_back(std::sqrt(a(k, i)) * unit(d, k, i));
            }
        }
    }
    return KrausChannel(std::move(ops));
}

/// First (i < j, k) with a_ki != a_kj, if any.
[[nodiscard]] inline std::optional<std::array<Index, 3>>
find_asymmetric_entry(const StochasticMatrix &a, double tolerance = 1e-12) {
    for (Index i = 0; i < a.dim(); ++i) {
        for (Index j = i + 1; j < a.dim(); ++j) {
            for (Index k = 0; k < a.dim(); ++k) {
                if (std::abs(a(k, i) - a(k, j)) > tolerance) {
                    return std::array<Index, 3>{i, j, k};
                }
            }
        }
    }
    return std::nullopt;
}

struct AdversarialState {
    DensityMatrix state;
    /// det of the k-th block of R restricted to span{|i>, |j>}.
    double block_det = 0.0;
};

/**
 * |psi> = sqrt(p)|i> + sqrt(1-p)|j>. Restricted to span{|i>, |j>} the k-th
 * block of R(psi, C) is [[a_ki p, (a_ki + a_kj) s / 2], [., a_kj (1-p)]] with
 * s = sqrt(p (1-p)), so det = -p (1-p) (a_ki - a_kj)^2 / 4 < 0.
 */
[[nodiscard]] inline AdversarialState adversarial_coherent_state(const StochasticMatrix &a,
                                                                 Index i, Index j, Index k,
                                                                 double p) {
    const Index d = a.dim();
    if (i < 0 || j < 0 || k < 0 || i >= d || j >= d || k >= d || i == j) {
        throw InvalidArgument("adversarial_coherent_state: need distinct i, j and k inside the dimension");
    }
    if (!(p > 0.0 && p < 1.0)) {
        throw InvalidArgument("adversarial_coherent_state: p must lie in (0, 1)");
    }
    const double aki = a(k, i);
    const double akj = a(k, j);
    if (aki == akj) {
        bool identical = true;
        for (Index r = 0; r < d; ++r) {
            identical = identical && a(r, i) == a(r, j);
        }
        if (identical) {
            throw NoAsymmetricColumn("adversarial_coherent_state: columns " + std::to_string(i) +
                                     " and " + std::to_string(j) + " are identical");
        }
        throw InvalidArgument("adversarial_coherent_state: row " + std::to_string(k) +
                              " does not separate columns " + std::to_string(i) + " and " +
                              std::to_string(j));
    }
    Vector psi = Vector::Zero(d);
    psi(i) = std::sqrt(p);
    psi(j) = std::sqrt(1.0 - p);
    const double diff = aki - akj;
    return {DensityMatrix::pure(psi), -p * (1.0 - p) * diff * diff / 4.0};
}

/// Adversarial state for the first asymmetric entry of a; NoAsymmetricColumn if all columns agree.
[[nodiscard]] inline AdversarialState adversarial_coherent_state(const StochasticMatrix &a,
                                                                 double p = 0.5) {
    const auto hit = find_asymmetric_entry(a);
    if (!hit) {
        throw NoAsymmetricColumn("adversarial_coherent_state: all columns are identical, R >= 0 for every input");
    }
    return adversarial_coherent_state(a, (*hit)[0], (*hit)[1], (*hit)[2], p);
}

} // namespace pdmwit
