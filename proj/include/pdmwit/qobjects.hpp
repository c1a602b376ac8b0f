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
 * Quantum objects: density matrices, Kraus channels and their Jamiolkowski
 * and superoperator forms, Pauli-string and light-touch observable bases, and
 * the computational-basis dephasing map.
 */

#pragma once

#include <bit>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "pdmwit/matcore.hpp"

namespace pdmwit {

/// Unit-trace positive semidefinite operator.
class DensityMatrix {
  public:
    explicit DensityMatrix(const Matrix &m) : DensityMatrix(HermitianMatrix(m)) {}

    explicit DensityMatrix(HermitianMatrix m) : mat_(std::move(m)) {
        const double tr = mat_.trace();
        if (std::abs(tr - 1.0) > 1e-10) {
            throw InvalidArgument("DensityMatrix: trace " + std::to_string(tr) + " != 1");
        }
        const double lo = min_eigenvalue(mat_);
        if (lo < -1e-10) {
            throw InvalidArgument("DensityMatrix: negative eigenvalue " + std::to_string(lo));
        }
    }

    static DensityMatrix pure(const Vector &psi) {
        const double n = psi.norm();
        if (n == 0.0) {
            throw InvalidArgument("DensityMatrix::pure: zero vector");
        }
        const Vector v = psi / n;
        return DensityMatrix(Matrix(v * v.adjoint()));
    }

    static DensityMatrix basis_state(Index dim, Index i) {
        Vector v = Vector::Zero(dim);
        v(i) = 1.0;
        return pure(v);
    }

    static DensityMatrix maximally_mixed(Index dim) {
        return DensityMatrix(Matrix(identity(dim) / static_cast<double>(dim)));
    }

    /// Incoherent state sum_i p_i |i><i|.
    static DensityMatrix diagonal(const RealVector &probs) {
        return DensityMatrix(Matrix(probs.cast<Complex>().asDiagonal()));
    }

    [[nodiscard]] const HermitianMatrix &hermitian() const noexcept { return mat_; }
    [[nodiscard]] const Matrix &matrix() const noexcept { return mat_.matrix(); }
    [[nodiscard]] Index dim() const noexcept { return mat_.dim(); }

  private:
    HermitianMatrix mat_;
};

/// CPTP map given by Kraus operators K_l (out_dim x in_dim), sum K^dag K = I.
class KrausChannel {
  public:
    explicit KrausChannel(std::vector<Matrix> ops) : ops_(std::move(ops)) {
        if (ops_.empty()) {
            throw InvalidArgument("KrausChannel: empty Kraus operator list");
        }
        in_dim_ = ops_.front().cols();
        out_dim_ = ops_.front().rows();
        Matrix completeness = Matrix::Zero(in_dim_, in_dim_);
        for (const auto &k : ops_) {
            if (k.cols() != in_dim_ || k.rows() != out_dim_) {
                throw DimensionMismatch("KrausChannel: Kraus operators have inconsistent shapes");
            }
            completeness += k.adjoint() * k;
        }
        const double dev = max_abs_diff(completeness, identity(in_dim_));
        if (dev > 1e-10) {
            throw InvalidArgument("KrausChannel: not trace preserving, |sum K^dag K - I| = " +
                                  std::to_string(dev));
        }
    }

    [[nodiscard]] Index in_dim() const noexcept { return in_dim_; }
    [[nodiscard]] Index out_dim() const noexcept { return out_dim_; }
    [[nodiscard]] const std::vector<Matrix> &kraus_ops() const noexcept { return ops_; }

  private:
    std::vector<Matrix> ops_;
    Index in_dim_ = 0;
    Index out_dim_ = 0;
};

[[nodiscard]] inline Matrix apply_channel(const KrausChannel &ch, const Matrix &m) {
    if (m.rows() != ch.in_dim() || m.cols() != ch.in_dim()) {
        throw DimensionMismatch("apply_channel: input is " + std::to_string(m.rows()) + "x" +
                                std::to_string(m.cols()) + ", channel expects " +
                                std::to_string(ch.in_dim()));
    }
    Matrix out = Matrix::Zero(ch.out_dim(), ch.out_dim());
    for (const auto &k : ch.kraus_ops()) {
        out += k * m * k.adjoint();
    }
    return out;
}

[[nodiscard]] inline DensityMatrix apply_channel(const KrausChannel &ch, const DensityMatrix &rho) {
    return DensityMatrix(hermitian_part(apply_channel(ch, rho.matrix())));
}

/// Delete every off-diagonal entry in the computational basis.
[[nodiscard]] inline Matrix dephase(const Matrix &m) {
    if (m.rows() != m.cols()) {
        throw DimensionMismatch("dephase: square matrix required");
    }
    return Matrix(m.diagonal().asDiagonal());
}

/// a after b: Kraus set {A_i B_j}.
[[nodiscard]] inline KrausChannel compose(const KrausChannel &a, const KrausChannel &b) {
    if (b.out_dim() != a.in_dim()) {
        throw DimensionMismatch("compose: outer channel input dim " + std::to_string(a.in_dim()) +
                                " != inner channel output dim " + std::to_string(b.out_dim()));
    }
    std::vector<Matrix> ops;
    ops.reserve(a.kraus_ops().size() * b.kraus_ops().size());
    for (const auto &ka : a.kraus_ops()) {
        for (const auto &kb : b.kraus_ops()) {
            Matrix k = ka * kb;
            if (k.cwiseAbs().maxCoeff() > 0.0) {
                ops.push_back(std::move(k));
            }
        }
    }
    if (ops.empty()) {
        ops.push_back(a.kraus_ops().front() * b.kraus_ops().front());
    }
    return KrausChannel(std::move(ops));
}

/// Convex combination (1 - w) a + w b, as the union of rescaled Kraus sets.
[[nodiscard]] inline KrausChannel mixture(const KrausChannel &a, const KrausChannel &b, double w) {
    if (a.in_dim() != b.in_dim() || a.out_dim() != b.out_dim()) {
        throw DimensionMismatch("mixture: channel shapes differ");
    }
    if (!(w >= 0.0 && w <= 1.0)) {
        throw InvalidArgument("mixture: weight must lie in [0, 1]");
    }
    std::vector<Matrix> ops;
    for (const auto &k : a.kraus_ops()) {
        ops.push_back(std::sqrt(1.0 - w) * k);
    }
    for (const auto &k : b.kraus_ops()) {
        ops.push_back(std::sqrt(w) * k);
    }
    return KrausChannel(std::move(ops));
}

/// |j><i| in dimension d.
[[nodiscard]] inline Matrix unit(Index d, Index j, Index i) {
    Matrix e = Matrix::Zero(d, d);
    e(j, i) = 1.0;
    return e;
}

/// Largest entrywise deviation between the actions of two channels on all |j><i|.
[[nodiscard]] inline double channel_action_distance(const KrausChannel &a, const KrausChannel &b) {
    if (a.in_dim() != b.in_dim() || a.out_dim() != b.out_dim()) {
        throw DimensionMismatch("channel_action_distance: channel shapes differ");
    }
    double worst = 0.0;
    for (Index i = 0; i < a.in_dim(); ++i) {
        for (Index j = 0; j < a.in_dim(); ++j) {
            const Matrix e = unit(a.in_dim(), j, i);
            worst = std::max(worst, max_abs_diff(apply_channel(a, e), apply_channel(b, e)));
        }
    }
    return worst;
}

[[nodiscard]] inline bool channels_equal(const KrausChannel &a, const KrausChannel &b,
                                         double tolerance = 1e-9) {
    return channel_action_distance(a, b) <= tolerance;
}

// ---------------------------------------------------------------------------
// Built-in channels

namespace channels {

[[nodiscard]] inline KrausChannel identity(Index d) { return KrausChannel({pdmwit::identity(d)}); }

/// The fully decohering map Delta, Kraus set {|i><i|}.
[[nodiscard]] inline KrausChannel dephase(Index d) {
    std::vector<Matrix> ops;
    for (Index i = 0; i < d; ++i) {
        ops.push_back(unit(d, i, i));
    }
    return KrausChannel(std::move(ops));
}

[[nodiscard]] inline KrausChannel unitary(const Matrix &u) {
    if (u.rows() != u.cols()) {
        throw DimensionMismatch("unitary: square matrix required");
    }
    if (max_abs_diff(u.adjoint() * u, pdmwit::identity(u.rows())) > 1e-10) {
        throw InvalidArgument("unitary: matrix is not unitary");
    }
    return KrausChannel({u});
}

[[nodiscard]] inline KrausChannel amplitude_damping(double gamma) {
    if (!(gamma >= 0.0 && gamma <= 1.0)) {
        throw InvalidArgument("amplitude_damping: gamma must lie in [0, 1]");
    }
    Matrix k0 = Matrix::Zero(2, 2);
    Matrix k1 = Matrix::Zero(2, 2);
    k0(0, 0) = 1.0;
    k0(1, 1) = std::sqrt(1.0 - gamma);
    k1(0, 1) = std::sqrt(gamma);
    return KrausChannel({k0, k1});
}

/// rho -> (1 - p) rho + p Tr(rho) I / d.
[[nodiscard]] inline KrausChannel depolarizing(double p, Index d = 2) {
    if (!(p >= 0.0 && p <= 1.0)) {
        throw InvalidArgument("depolarizing: p must lie in [0, 1]");
    }
    std::vector<Matrix> ops;
    if (p < 1.0) {
        ops.push_back(std::sqrt(1.0 - p) * pdmwit::identity(d));
    }
    if (p > 0.0) {
        const double w = std::sqrt(p / static_cast<double>(d));
        for (Index i = 0; i < d; ++i) {
            for (Index j = 0; j < d; ++j) {
                ops.push_back(w * unit(d, i, j));
            }
        }
    }
    return KrausChannel(std::move(ops));
}

} // namespace channels

// ---------------------------------------------------------------------------
// Jamiolkowski and superoperator forms

/// M_N = sum_ij |i><j| (x) N(|j><i|); first factor is the input space.
struct JamiolkowskiMatrix {
    HermitianMatrix mat;
    Index in_dim = 0;
    Index out_dim = 0;
};

[[nodiscard]] inline JamiolkowskiMatrix jamiolkowski(const KrausChannel &ch) {
    const Index din = ch.in_dim();
    const Index dout = ch.out_dim();
    Matrix m = Matrix::Zero(din * dout, din * dout);
    for (Index i = 0; i < din; ++i) {
        for (Index j = 0; j < din; ++j) {
            m.block(i * dout, j * dout, dout, dout) = apply_channel(ch, unit(din, j, i));
        }
    }
    return {HermitianMatrix(m, 1e-10), din, dout};
}

/// Recover N(|j><i|) from the (i, j) block of M_N.
[[nodiscard]] inline Matrix channel_from_jamiolkowski(const JamiolkowskiMatrix &m, Index j,
                                                      Index i) {
    return m.mat.matrix().block(i * m.out_dim, j * m.out_dim, m.out_dim, m.out_dim);
}

/// Column-stacking superoperator: vec(N(X)) = S vec(X), S = sum conj(K) (x) K.
[[nodiscard]] inline Matrix superoperator(const KrausChannel &ch) {
    Matrix s = Matrix::Zero(ch.out_dim() * ch.out_dim(), ch.in_dim() * ch.in_dim());
    for (const auto &k : ch.kraus_ops()) {
        s += kron(Matrix(k.conjugate()), k);
    }
    return s;
}

[[nodiscard]] inline Matrix dephase_superoperator(Index d) {
    Matrix s = Matrix::Zero(d * d, d * d);
    for (Index i = 0; i < d; ++i) {
        s(i * d + i, i * d + i) = 1.0;
    }
    return s;
}

[[nodiscard]] inline Vector vec(const Matrix &m) {
    return Eigen::Map<const Vector>(m.data(), m.size());
}

[[nodiscard]] inline Matrix unvec(const Vector &v, Index d) {
    return Eigen::Map<const Matrix>(v.data(), d, d);
}

// ---------------------------------------------------------------------------
// Observables

/// Tensor product of single-qubit Paulis, e.g. "XZ".
struct PauliString {
    std::string label;

    [[nodiscard]] std::size_t n_qubits() const noexcept { return label.size(); }

    [[nodiscard]] static Matrix letter_matrix(char c) {
        Matrix m = Matrix::Zero(2, 2);
        switch (c) {
        case 'I':
            m(0, 0) = 1.0;
            m(1, 1) = 1.0;
            break;
        case 'X':
            m(0, 1) = 1.0;
            m(1, 0) = 1.0;
            break;
        case 'Y':
            m(0, 1) = Complex(0.0, -1.0);
            m(1, 0) = Complex(0.0, 1.0);
            break;
        case 'Z':
            m(0, 0) = 1.0;
            m(1, 1) = -1.0;
            break;
        default:
            throw InvalidArgument(std::string("PauliString: invalid letter '") + c + "'");
        }
        return m;
    }

    [[nodiscard]] Matrix matrix() const {
        if (label.empty()) {
            throw InvalidArgument("PauliString: empty label");
        }
        Matrix m = letter_matrix(label.front());
        for (std::size_t k = 1; k < label.size(); ++k) {
            m = kron(m, letter_matrix(label[k]));
        }
        return m;
    }
};

/// All 4^n Pauli strings, lexicographic with I < X < Y < Z per site.
[[nodiscard]] inline std::vector<PauliString> pauli_basis(std::size_t n) {
    if (n < 1) {
        throw InvalidArgument("pauli_basis: n must be >= 1");
    }
    static constexpr char letters[] = {'I', 'X', 'Y', 'Z'};
    std::vector<PauliString> out;
    std::size_t total = 1;
    for (std::size_t k = 0; k < n; ++k) {
        total *= 4;
    }
    out.reserve(total);
    for (std::size_t idx = 0; idx < total; ++idx) {
        std::string label(n, 'I');
        std::size_t rest = idx;
        for (std::size_t k = n; k-- > 0;) {
            label[k] = letters[rest % 4];
            rest /= 4;
        }
        out.push_back({label});
    }
    return out;
}

enum class SpectrumKind { single, plus_minus };

/// Hermitian observable with spectrum {lambda} or {+-lambda}.
class LightTouchObservable {
  public:
    LightTouchObservable(std::string label, const Matrix &m) : label_(std::move(label)), mat_(m) {
        const RealVector ev = eig_hermitian(mat_).eigenvalues;
        const double hi = ev.maxCoeff();
        if (!(hi > 1e-10)) {
            throw InvalidArgument("LightTouchObservable '" + label_ +
                                  "': spectrum must contain a positive lambda");
        }
        lambda_ = hi;
        bool single = true;
        for (Index k = 0; k < ev.size(); ++k) {
            const double l = ev(k);
            if (std::abs(l - hi) <= 1e-10) {
                continue;
            }
            if (std::abs(l + hi) <= 1e-10) {
                single = false;
                continue;
            }
            throw InvalidArgument("LightTouchObservable '" + label_ +
                                  "': spectrum is not {lambda} or {+-lambda}");
        }
        kind_ = single ? SpectrumKind::single : SpectrumKind::plus_minus;
        // A^2 = lambda^2 I, so the Frobenius norm gives lambda without eigensolver rounding.
        lambda_ = std::sqrt(mat_.matrix().squaredNorm() / static_cast<double>(mat_.dim()));
    }

    [[nodiscard]] const std::string &label() const noexcept { return label_; }
    [[nodiscard]] const HermitianMatrix &hermitian() const noexcept { return mat_; }
    [[nodiscard]] const Matrix &matrix() const noexcept { return mat_.matrix(); }
    [[nodiscard]] double lambda() const noexcept { return lambda_; }
    [[nodiscard]] SpectrumKind kind() const noexcept { return kind_; }
    [[nodiscard]] Index dim() const noexcept { return mat_.dim(); }

  private:
    std::string label_;
    HermitianMatrix mat_;
    double lambda_ = 1.0;
    SpectrumKind kind_ = SpectrumKind::plus_minus;
};

namespace detail {

// Rows of a Sylvester-Hadamard matrix when d is a power of two, otherwise
// the all-ones row plus single sign flips at positions 0..d-2.
inline std::vector<std::vector<int>> diagonal_sign_rows(Index d) {
    std::vector<std::vector<int>> rows;
    const bool pow2 = d > 0 && (d & (d - 1)) == 0;
    if (pow2) {
        for (Index r = 0; r < d; ++r) {
            std::vector<int> row(static_cast<std::size_t>(d));
            for (Index c = 0; c < d; ++c) {
                const auto bits = static_cast<unsigned>(r & c);
                row[static_cast<std::size_t>(c)] = (std::popcount(bits) % 2 == 0) ? 1 : -1;
            }
            rows.push_back(std::move(row));
        }
        return rows;
    }
    rows.emplace_back(static_cast<std::size_t>(d), 1);
    for (Index k = 0; k + 1 < d; ++k) {
        std::vector<int> row(static_cast<std::size_t>(d), 1);
        row[static_cast<std::size_t>(k)] = -1;
        rows.push_back(std::move(row));
    }
    return rows;
}

} // namespace detail

/**
 * Tomographically complete set of d^2 light-touch observables:
 * d diagonal +-1 observables (Hadamard rows, or identity plus single flips
 * when no Sylvester-Hadamard matrix exists) and, for each pair i < j, the
 * X-type and Y-type swaps on span{|i>, |j>} completed with the identity on
 * the complement. For d = 2 this is exactly {I, X, Y, Z}.
 */
[[nodiscard]] inline std::vector<LightTouchObservable> light_touch_basis(Index d) {
    if (d < 2) {
        throw InvalidArgument("light_touch_basis: d must be >= 2");
    }
    std::vector<LightTouchObservable> out;
    if (d == 2) {
        for (const char *l : {"I", "X", "Y", "Z"}) {
            out.emplace_back(l, PauliString{l}.matrix());
        }
        return out;
    }
    const auto rows = detail::diagonal_sign_rows(d);
    for (std::size_t r = 0; r < rows.size(); ++r) {
        Matrix m = Matrix::Zero(d, d);
        for (Index c = 0; c < d; ++c) {
            m(c, c) = rows[r][static_cast<std::size_t>(c)];
        }
        out.emplace_back("D" + std::to_string(r), m);
    }
    for (Index i = 0; i < d; ++i) {
        for (Index j = i + 1; j < d; ++j) {
            Matrix rest = pdmwit::identity(d);
            rest(i, i) = 0.0;
            rest(j, j) = 0.0;
            Matrix x = rest;
            x(i, j) = 1.0;
            x(j, i) = 1.0;
            Matrix y = rest;
            y(i, j) = Complex(0.0, -1.0);
            y(j, i) = Complex(0.0, 1.0);
            const std::string tag = std::to_string(i) + "_" + std::to_string(j);
            out.emplace_back("X" + tag, x);
            out.emplace_back("Y" + tag, y);
        }
    }
    return out;
}

/// Rank of the Gram matrix Tr[A_a^dag A_b] of an observable family.
[[nodiscard]] inline Index gram_rank(const std::vector<Matrix> &ops) {
    const auto n = static_cast<Index>(ops.size());
    Matrix g(n, n);
    for (Index a = 0; a < n; ++a) {
        for (Index b = 0; b < n; ++b) {
            g(a, b) = (ops[static_cast<std::size_t>(a)].adjoint() *
                       ops[static_cast<std::size_t>(b)])
                          .trace();
        }
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(g);
    const double top = es.eigenvalues().cwiseAbs().maxCoeff();
    Index r = 0;
    for (Index k = 0; k < n; ++k) {
        if (std::abs(es.eigenvalues()(k)) > 1e-9 * top) {
            ++r;
        }
    }
    return r;
}

enum class BasisKind { pauli, light_touch };

[[nodiscard]] inline std::string to_string(BasisKind k) {
    return k == BasisKind::pauli ? "pauli" : "light_touch";
}

/// Named measurement basis for one time slot, with a dual frame for reconstruction.
class ObservableBasis {
  public:
    ObservableBasis(BasisKind kind, Index dim) : kind_(kind), dim_(dim) {
        if (kind == BasisKind::pauli) {
            std::size_t n = 0;
            Index v = 1;
            while (v < dim) {
                v *= 2;
                ++n;
            }
            if (v != dim || n == 0) {
                throw InvalidArgument("ObservableBasis: Pauli basis needs a power-of-two dim >= 2, got " +
                                      std::to_string(dim));
            }
            for (const auto &p : pauli_basis(n)) {
                observables_.emplace_back(p.label, p.matrix());
            }
        } else {
            observables_ = light_touch_basis(dim);
        }
        const auto n = static_cast<Index>(observables_.size());
        Matrix gram(n, n);
        for (Index a = 0; a < n; ++a) {
            for (Index b = 0; b < n; ++b) {
                gram(a, b) = (observables_[static_cast<std::size_t>(a)].matrix() *
                              observables_[static_cast<std::size_t>(b)].matrix())
                                 .trace();
            }
        }
        const Matrix ginv = gram.inverse();
        for (Index a = 0; a < n; ++a) {
            Matrix d = Matrix::Zero(dim, dim);
            for (Index b = 0; b < n; ++b) {
                d += ginv(a, b) * observables_[static_cast<std::size_t>(b)].matrix();
            }
            duals_.push_back(std::move(d));
        }
    }

    [[nodiscard]] BasisKind kind() const noexcept { return kind_; }
    [[nodiscard]] Index dim() const noexcept { return dim_; }
    [[nodiscard]] std::size_t size() const noexcept { return observables_.size(); }
    [[nodiscard]] const std::vector<LightTouchObservable> &observables() const noexcept {
        return observables_;
    }
    [[nodiscard]] const LightTouchObservable &at(std::size_t k) const { return observables_.at(k); }
    /// Dual frame element: X = sum_a Tr[A_a X] dual(a).
    [[nodiscard]] const Matrix &dual(std::size_t k) const { return duals_.at(k); }

    [[nodiscard]] std::size_t index_of(const std::string &label) const {
        for (std::size_t k = 0; k < observables_.size(); ++k) {
            if (observables_[k].label() == label) {
                return k;
            }
        }
        throw InvalidArgument("ObservableBasis: unknown label '" + label + "'");
    }

  private:
    BasisKind kind_;
    Index dim_;
    std::vector<LightTouchObservable> observables_;
    std::vector<Matrix> duals_;
};

/// Pauli basis when dim is a power of two, light-touch otherwise.
[[nodiscard]] inline BasisKind default_basis_kind(Index dim) {
    return (dim >= 2 && (dim & (dim - 1)) == 0) ? BasisKind::pauli : BasisKind::light_touch;
}

} // namespace pdmwit
