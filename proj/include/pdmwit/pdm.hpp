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
 * Pseudo-density matrices of two-time processes.
 *
 * A Pdm is a unit-trace Hermitian operator on H_1 (x) H_2 whose expectation
 * values against A (x) B reproduce the two-time correlators <{A, B}>. It may
 * have negative eigenvalues; the amount of negativity is the spatial
 * incompatibility T_p, the Schatten-p distance to the set of density matrices.
 *
 * This header builds Pdms in closed form from (state, channel) pairs and
 * tomographically from correlator tables, computes T_p, and synthesizes and
 * evaluates positive semidefinite witnesses.
 */

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "pdmwit/qobjects.hpp"

namespace pdmwit {

/// Unit-trace Hermitian operator over H_1 (x) H_2; negative eigenvalues allowed.
class Pdm {
  public:
    Pdm(HermitianMatrix m, Index d1, Index d2) : mat_(std::move(m)), d1_(d1), d2_(d2) {
        if (d1 < 1 || d2 < 1 || d1 * d2 != mat_.dim()) {
            throw DimensionMismatch("Pdm: dims (" + std::to_string(d1) + ", " + std::to_string(d2) +
                                    ") do not match matrix dimension " +
                                    std::to_string(mat_.dim()));
        }
        const double tr = mat_.trace();
        if (std::abs(tr - 1.0) > 1e-10) {
            throw InvalidArgument("Pdm: trace " + std::to_string(tr) + " != 1");
        }
    }

    /// A density matrix viewed as a (spatially compatible) Pdm.
    static Pdm from_state(const DensityMatrix &rho, Index d1, Index d2) {
        return Pdm(rho.hermitian(), d1, d2);
    }

    [[nodiscard]] const HermitianMatrix &hermitian() const noexcept { return mat_; }
    [[nodiscard]] const Matrix &matrix() const noexcept { return mat_.matrix(); }
    [[nodiscard]] Index dim() const noexcept { return mat_.dim(); }
    [[nodiscard]] Index d1() const noexcept { return d1_; }
    [[nodiscard]] Index d2() const noexcept { return d2_; }

  private:
    HermitianMatrix mat_;
    Index d1_;
    Index d2_;
};

/// R(rho, N) = {rho (x) I, M_N} / 2.
[[nodiscard]] inline Pdm pdm_closed_form(const DensityMatrix &rho, const KrausChannel &ch) {
    if (rho.dim() != ch.in_dim()) {
        throw DimensionMismatch("pdm_closed_form: state dim " + std::to_string(rho.dim()) +
                                " != channel input dim " + std::to_string(ch.in_dim()));
    }
    const auto m = jamiolkowski(ch);
    const Matrix left = kron(rho.matrix(), identity(ch.out_dim()));
    const Matrix r = anticommutator(left, m.mat.matrix()) * 0.5;
    return Pdm(HermitianMatrix(r, 1e-10), ch.in_dim(), ch.out_dim());
}

// ---------------------------------------------------------------------------
// Correlator tables

using LabelPair = std::pair<std::string, std::string>;

/// Two-time correlators <{A, B}> keyed by (label at t1, label at t2).
struct CorrelatorTable {
    BasisKind kind1 = BasisKind::pauli;
    BasisKind kind2 = BasisKind::pauli;
    Index dim1 = 2;
    Index dim2 = 2;
    std::map<LabelPair, double> entries;
    /// Present for sampled tables only.
    std::map<LabelPair, std::int64_t> shots;
    std::map<LabelPair, double> stderrs;

    [[nodiscard]] ObservableBasis basis1() const { return ObservableBasis(kind1, dim1); }
    [[nodiscard]] ObservableBasis basis2() const { return ObservableBasis(kind2, dim2); }

    /// Pairs of the full basis grid that have no entry, in grid order.
    [[nodiscard]] std::vector<LabelPair> missing_pairs() const {
        std::vector<LabelPair> missing;
        const auto b1 = basis1();
        const auto b2 = basis2();
        for (const auto &a : b1.observables()) {
            for (const auto &b : b2.observables()) {
                LabelPair key{a.label(), b.label()};
                if (!entries.contains(key)) {
                    missing.push_back(std::move(key));
                }
            }
        }
        return missing;
    }
};

/// Tr[r (A (x) B)] over the full basis grid.
[[nodiscard]] inline CorrelatorTable exact_correlators(const Pdm &r, BasisKind kind1,
                                                       BasisKind kind2) {
    CorrelatorTable t;
    t.kind1 = kind1;
    t.kind2 = kind2;
    t.dim1 = r.d1();
    t.dim2 = r.d2();
    const ObservableBasis b1(kind1, r.d1());
    const ObservableBasis b2(kind2, r.d2());
    for (const auto &a : b1.observables()) {
        for (const auto &b : b2.observables()) {
            const Complex v = (r.matrix() * kron(a.matrix(), b.matrix())).trace();
            t.entries[{a.label(), b.label()}] = v.real();
        }
    }
    return t;
}

[[nodiscard]] inline CorrelatorTable exact_correlators(const Pdm &r) {
    return exact_correlators(r, default_basis_kind(r.d1()), default_basis_kind(r.d2()));
}

/// R = sum_ab <{A_a, B_b}> dual(A_a) (x) dual(B_b); for Paulis dual(s) = s / d.
[[nodiscard]] inline Pdm pdm_from_correlators(const CorrelatorTable &t) {
    auto missing = t.missing_pairs();
    if (!missing.empty()) {
        std::string msg = "pdm_from_correlators: table is missing " +
                          std::to_string(missing.size()) + " pair(s), first (" +
                          missing.front().first + ", " + missing.front().second + ")";
        throw IncompleteTable(msg, std::move(missing));
    }
    const auto b1 = t.basis1();
    const auto b2 = t.basis2();
    Matrix r = Matrix::Zero(t.dim1 * t.dim2, t.dim1 * t.dim2);
    for (std::size_t a = 0; a < b1.size(); ++a) {
        for (std::size_t b = 0; b < b2.size(); ++b) {
            const double v = t.entries.at({b1.at(a).label(), b2.at(b).label()});
            if (v != 0.0) {
                r += v * kron(b1.dual(a), b2.dual(b));
            }
        }
    }
    return Pdm(HermitianMatrix(r, 1e-9), t.dim1, t.dim2);
}

// ---------------------------------------------------------------------------
// Spatial incompatibility

/// Eigenvalues below this are treated as genuinely negative.
inline constexpr double kNegativityThreshold = 1e-10;

struct SiReport {
    double p = 1.0;
    double value = 0.0;
    DensityMatrix minimizer;
    std::vector<std::pair<double, Vector>> negative_eigenpairs;
    std::string method;
};

/**
 * Minimizer of ||lambda - q||_p over the probability simplex, for any p >= 1.
 * The objective is a sum of one convex function of (q_i - lambda_i) per
 * coordinate, so an optimum has the form q = max(0, lambda + theta); theta is
 * found by bisection on sum q = 1.
 */
[[nodiscard]] inline RealVector simplex_shift_minimizer(const RealVector &lambda) {
    const auto mass = [&](double theta) { return (lambda.array() + theta).max(0.0).sum(); };
    double lo = -lambda.maxCoeff();
    double hi = 1.0 - lambda.minCoeff();
    for (int it = 0; it < 200 && hi - lo > 1e-16 * std::max(1.0, std::abs(hi)); ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mass(mid) < 1.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    RealVector q = (lambda.array() + hi).max(0.0).matrix();
    return q / q.sum();
}

[[nodiscard]] inline double vector_p_distance(const RealVector &a, const RealVector &b, double p) {
    const RealVector d = (a - b).cwiseAbs();
    if (p == 1.0) {
        return d.sum();
    }
    return std::pow(d.array().pow(p).sum(), 1.0 / p);
}

namespace detail {

inline void check_p(double p) {
    if (!(p >= 1.0)) {
        throw InvalidP("si_measure: p must be >= 1, got " + std::to_string(p));
    }
}

inline DensityMatrix density_from_spectrum(const EigenDecomposition &ed, const RealVector &q) {
    Matrix m = ed.eigenvectors * q.cast<Complex>().asDiagonal() * ed.eigenvectors.adjoint();
    return DensityMatrix(Matrix((m + m.adjoint()) * 0.5));
}

inline std::vector<std::pair<double, Vector>> negative_pairs(const EigenDecomposition &ed) {
    std::vector<std::pair<double, Vector>> out;
    for (Index k = 0; k < ed.eigenvalues.size(); ++k) {
        if (ed.eigenvalues(k) < -kNegativityThreshold) {
            out.emplace_back(ed.eigenvalues(k), ed.eigenvectors.col(k));
        }
    }
    return out;
}

} // namespace detail

/// General-p route: commuting minimizer with spectrum from simplex_shift_minimizer.
[[nodiscard]] inline SiReport si_optimize(const Pdm &r, double p) {
    detail::check_p(p);
    const auto ed = eig_hermitian(r.hermitian());
    const RealVector q = simplex_shift_minimizer(ed.eigenvalues);
    auto neg = detail::negative_pairs(ed);
    double value = vector_p_distance(ed.eigenvalues, q, p);
    if (neg.empty()) {
        value = 0.0;
    }
    return {p, value, detail::density_from_spectrum(ed, q), std::move(neg), "simplex_shift"};
}

/**
 * T_p(R) = min over density matrices rho of ||R - rho||_p.
 * p = 1 uses the closed form 2 sum |lambda_-| with minimizer R_+ / Tr R_+.
 * Value is exactly 0 when the smallest eigenvalue is >= -1e-10.
 */
[[nodiscard]] inline SiReport si_measure(const Pdm &r, double p = 1.0) {
    detail::check_p(p);
    if (p != 1.0) {
        return si_optimize(r, p);
    }
    const auto ed = eig_hermitian(r.hermitian());
    auto neg = detail::negative_pairs(ed);
    if (neg.empty()) {
        const RealVector q = ed.eigenvalues.cwiseMax(0.0);
        return {1.0, 0.0, detail::density_from_spectrum(ed, q / q.sum()), {}, "closed_form"};
    }
    double negative_mass = 0.0;
    for (Index k = 0; k < ed.eigenvalues.size(); ++k) {
        negative_mass += std::min(0.0, ed.eigenvalues(k));
    }
    const RealVector plus = ed.eigenvalues.cwiseMax(0.0);
    return {1.0, -2.0 * negative_mass, detail::density_from_spectrum(ed, plus / plus.sum()),
            std::move(neg), "closed_form"};
}

/// ||R - rho||_p for an arbitrary candidate density matrix.
[[nodiscard]] inline double distance_to_state(const Pdm &r, const DensityMatrix &rho, double p) {
    return schatten_norm(HermitianMatrix(Matrix(r.matrix() - rho.matrix()), 1e-9), p);
}

[[nodiscard]] inline bool is_spatially_incompatible(const Pdm &r) {
    return min_eigenvalue(r.hermitian()) < -kNegativityThreshold;
}

// ---------------------------------------------------------------------------
// Witnesses

enum class WitnessPolicy { negative_space, most_negative, custom };

/**
 * Positive semidefinite W with its local decomposition
 * W = sum_ab coeffs[a, b] A_a (x) B_b over the chosen bases. For Pauli bases
 * coeffs[a, b] = Tr[W (s_a (x) s_b)] / (d1 d2) (orthonormal convention; the
 * singlet projector reads (II - XX - YY - ZZ) / 4).
 */
struct Witness {
    HermitianMatrix mat;
    Index d1 = 2;
    Index d2 = 2;
    BasisKind kind1 = BasisKind::pauli;
    BasisKind kind2 = BasisKind::pauli;
    std::map<LabelPair, double> coeffs;
};

/// Coefficients below this magnitude are not required when evaluating from a table.
inline constexpr double kCoefficientCutoff = 1e-12;

[[nodiscard]] inline Witness make_witness(const HermitianMatrix &w, Index d1, Index d2,
                                          BasisKind kind1, BasisKind kind2) {
    if (w.dim() != d1 * d2) {
        throw DimensionMismatch("make_witness: operator dim does not match (d1, d2)");
    }
    const double lo = min_eigenvalue(w);
    if (lo < -1e-10) {
        throw InvalidArgument("make_witness: witness must be positive semidefinite, min eigenvalue " +
                              std::to_string(lo));
    }
    Witness out{w, d1, d2, kind1, kind2, {}};
    const ObservableBasis b1(kind1, d1);
    const ObservableBasis b2(kind2, d2);
    for (std::size_t a = 0; a < b1.size(); ++a) {
        for (std::size_t b = 0; b < b2.size(); ++b) {
            const Complex c = (w.matrix() * kron(b1.dual(a), b2.dual(b))).trace();
            out.coeffs[{b1.at(a).label(), b2.at(b).label()}] = c.real();
        }
    }
    return out;
}

/// Tr[W R].
[[nodiscard]] inline double witness_expectation(const Witness &w, const Pdm &r) {
    if (w.mat.dim() != r.dim()) {
        throw DimensionMismatch("witness_expectation: dimension mismatch");
    }
    return (w.mat.matrix() * r.matrix()).trace().real();
}

/**
 * Witness certifying that r is not a density matrix.
 * negative_space: projector onto all eigenvectors with lambda < -1e-10.
 * most_negative: projector onto the single most negative eigenvector.
 */
[[nodiscard]] inline Witness synthesize_witness(const Pdm &r,
                                                WitnessPolicy policy = WitnessPolicy::negative_space,
                                                std::optional<BasisKind> kind = std::nullopt) {
    const auto ed = eig_hermitian(r.hermitian());
    if (!(ed.eigenvalues(0) < -kNegativityThreshold)) {
        throw NotSpatiallyIncompatible("synthesize_witness: PDM is positive semidefinite (min eigenvalue " +
                                       std::to_string(ed.eigenvalues(0)) + ")");
    }
    Matrix w = Matrix::Zero(r.dim(), r.dim());
    switch (policy) {
    case WitnessPolicy::most_negative:
        w = ed.eigenvectors.col(0) * ed.eigenvectors.col(0).adjoint();
        break;
    case WitnessPolicy::negative_space:
        for (Index k = 0; k < ed.eigenvalues.size(); ++k) {
            if (ed.eigenvalues(k) < -kNegativityThreshold) {
                w += ed.eigenvectors.col(k) * ed.eigenvectors.col(k).adjoint();
            }
        }
        break;
    case WitnessPolicy::custom:
        throw InvalidArgument("synthesize_witness: use custom_witness for user-supplied operators");
    }
    const BasisKind k1 = kind.value_or(default_basis_kind(r.d1()));
    const BasisKind k2 = kind.value_or(default_basis_kind(r.d2()));
    return make_witness(hermitian_part(w), r.d1(), r.d2(), k1, k2);
}

/// Validate a user-supplied PSD operator as a witness for r (Tr[W r] must be negative).
[[nodiscard]] inline Witness custom_witness(const Pdm &r, const Matrix &w,
                                            std::optional<BasisKind> kind = std::nullopt) {
    const HermitianMatrix hw(w, 1e-10);
    auto out = make_witness(hw, r.d1(), r.d2(), kind.value_or(default_basis_kind(r.d1())),
                            kind.value_or(default_basis_kind(r.d2())));
    const double e = witness_expectation(out, r);
    if (!(e < 0.0)) {
        throw InvalidArgument("custom_witness: Tr[W R] = " + std::to_string(e) +
                              " is not negative, operator does not witness this PDM");
    }
    return out;
}

struct WitnessEstimate {
    double value = 0.0;
    /// Propagated standard error; zero for exact tables.
    double std_error = 0.0;
};

/// sum_ab coeffs[a, b] <{A_a, B_b}> with error propagation from per-entry stderrs.
[[nodiscard]] inline WitnessEstimate evaluate_witness_with_error(const Witness &w,
                                                                 const CorrelatorTable &t) {
    if (w.kind1 != t.kind1 || w.kind2 != t.kind2 || w.d1 != t.dim1 || w.d2 != t.dim2) {
        throw DimensionMismatch("evaluate_witness: witness and table use different bases");
    }
    std::vector<LabelPair> missing;
    double value = 0.0;
    double variance = 0.0;
    for (const auto &[key, c] : w.coeffs) {
        if (std::abs(c) <= kCoefficientCutoff) {
            continue;
        }
        const auto it = t.entries.find(key);
        if (it == t.entries.end()) {
            missing.push_back(key);
            continue;
        }
        value += c * it->second;
        if (const auto se = t.stderrs.find(key); se != t.stderrs.end()) {
            variance += c * c * se->second * se->second;
        }
    }
    if (!missing.empty()) {
        std::string msg = "evaluate_witness: table lacks " + std::to_string(missing.size()) +
                          " required pair(s), first (" + missing.front().first + ", " +
                          missing.front().second + ")";
        throw IncompleteTable(msg, std::move(missing));
    }
    return {value, std::sqrt(variance)};
}

[[nodiscard]] inline double evaluate_witness(const Witness &w, const CorrelatorTable &t) {
    return evaluate_witness_with_error(w, t).value;
}

// ---------------------------------------------------------------------------
// Maximal SI of CPTP processes

struct BoundCheck {
    double t1 = 0.0;
    double reference = 1.0;
    bool bound_ok = true;
};

/// T_1 of R(|0><0|, identity) in dimension d; equals 1 for qubits.
[[nodiscard]] inline double max_si_reference(Index d) {
    return si_measure(pdm_closed_form(DensityMatrix::basis_state(d, 0), channels::identity(d)), 1.0)
        .value;
}

/// T_1(R(rho, N)) <= T_1(R(|0><0|, identity)) for channels with equal input/output dims.
[[nodiscard]] inline BoundCheck check_bound(const DensityMatrix &rho, const KrausChannel &ch) {
    if (ch.in_dim() != ch.out_dim()) {
        throw DimensionMismatch("check_bound: the bound compares d -> d channels");
    }
    BoundCheck out;
    out.t1 = si_measure(pdm_closed_form(rho, ch), 1.0).value;
    out.reference = max_si_reference(ch.in_dim());
    out.bound_ok = out.t1 <= out.reference + 1e-9;
    return out;
}

} // namespace pdmwit
