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
 * Monte Carlo simulation of the two-time measurement procedure: measure A
 * projectively (Lueders update), send the post-measurement state through the
 * channel, measure B, record the product of the two outcomes.
 *
 * Each (A, B) pair of a table is sampled from its own substream derived from
 * the root seed, so a table is bit-identical whatever the thread count.
 */

#pragma once

#include <algorithm>
#include <cstdint>
#include <thread>
#include <vector>

#include "pdmwit/pdm.hpp"
#include "pdmwit/random.hpp"

namespace pdmwit {

/// Spectral projectors onto the +lambda and -lambda eigenspaces.
struct MeasurementProjectors {
    Matrix plus;
    Matrix minus;
    double lambda = 1.0;
};

[[nodiscard]] inline MeasurementProjectors projectors_for(const LightTouchObservable &obs) {
    const Index d = obs.dim();
    if (obs.kind() == SpectrumKind::single) {
        return {identity(d), Matrix::Zero(d, d), obs.lambda()};
    }
    const auto ed = eig_hermitian(obs.hermitian());
    Matrix plus = Matrix::Zero(d, d);
    Matrix minus = Matrix::Zero(d, d);
    for (Index k = 0; k < d; ++k) {
        const Matrix p = ed.eigenvectors.col(k) * ed.eigenvectors.col(k).adjoint();
        if (ed.eigenvalues(k) > 0.0) {
            plus += p;
        } else {
            minus += p;
        }
    }
    return {plus, minus, obs.lambda()};
}

[[nodiscard]] inline MeasurementProjectors projectors_for(const PauliString &p) {
    return projectors_for(LightTouchObservable(p.label, p.matrix()));
}

struct ShotRecord {
    double outcome1 = 0.0;
    double outcome2 = 0.0;

    friend bool operator==(const ShotRecord &, const ShotRecord &) = default;
};

struct TwoTimeEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    std::int64_t shots = 0;
};

namespace detail {

// Branches below this probability are never sampled.
inline constexpr double kMinBranchProbability = 1e-14;

/// Exact branch structure of one (rho, N, A, B) experiment.
struct TwoTimeBranches {
    double p_first_plus = 0.0;
    /// P(second = +lambda2 | first = +-lambda1).
    double p_second_plus_given_plus = 0.0;
    double p_second_plus_given_minus = 0.0;
    double lambda1 = 1.0;
    double lambda2 = 1.0;
};

inline double born(const Matrix &proj, const Matrix &rho) {
    return std::clamp((proj * rho).trace().real(), 0.0, 1.0);
}

inline TwoTimeBranches two_time_branches(const DensityMatrix &rho, const KrausChannel &ch,
                                         const LightTouchObservable &obs1,
                                         const LightTouchObservable &obs2) {
    if (rho.dim() != ch.in_dim() || obs1.dim() != ch.in_dim() || obs2.dim() != ch.out_dim()) {
        throw DimensionMismatch("sample_two_time: state/observable dims do not match the channel");
    }
    const auto m1 = projectors_for(obs1);
    const auto m2 = projectors_for(obs2);
    TwoTimeBranches b;
    b.lambda1 = m1.lambda;
    b.lambda2 = m2.lambda;
    b.p_first_plus = born(m1.plus, rho.matrix());
    const auto conditional = [&](const Matrix &proj, double prob) {
        if (prob < kMinBranchProbability) {
            return 0.0;
        }
        const Matrix post = proj * rho.matrix() * proj / prob;
        // Lueders update followed by the channel; both must stay valid states.
        const DensityMatrix evolved = apply_channel(ch, DensityMatrix(hermitian_part(post)));
        return born(m2.plus, evolved.matrix());
    };
    b.p_second_plus_given_plus = conditional(m1.plus, b.p_first_plus);
    b.p_second_plus_given_minus = conditional(m1.minus, 1.0 - b.p_first_plus);
    return b;
}

inline bool draw(Rng &rng, double p_true) {
    if (p_true <= 0.0) {
        return false;
    }
    if (p_true >= 1.0) {
        return true;
    }
    return uniform01(rng) < p_true;
}

inline ShotRecord one_shot(const TwoTimeBranches &b, Rng &rng) {
    const bool first = draw(rng, b.p_first_plus);
    const bool second =
        draw(rng, first ? b.p_second_plus_given_plus : b.p_second_plus_given_minus);
    return {first ? b.lambda1 : -b.lambda1, second ? b.lambda2 : -b.lambda2};
}

inline TwoTimeEstimate estimate_from_counts(std::int64_t agree, std::int64_t shots, double scale) {
    const double n = static_cast<double>(shots);
    const double m = (2.0 * static_cast<double>(agree) - n) / n;
    TwoTimeEstimate e;
    e.shots = shots;
    e.mean = scale * m;
    if (shots > 1) {
        const double var = scale * scale * (1.0 - m * m) * n / (n - 1.0);
        e.std_error = std::sqrt(std::max(0.0, var) / n);
    }
    return e;
}

} // namespace detail

/// Per-shot outcomes for one experiment; reproducible bit-for-bit from seed.
[[nodiscard]] inline std::vector<ShotRecord>
simulate_shots(const DensityMatrix &rho, const KrausChannel &ch, const LightTouchObservable &obs1,
               const LightTouchObservable &obs2, std::int64_t shots, std::uint64_t seed) {
    if (shots <= 0) {
        throw ZeroShots("simulate_shots: shots must be positive");
    }
    const auto b = detail::two_time_branches(rho, ch, obs1, obs2);
    Rng rng(seed);
    std::vector<ShotRecord> out;
    out.reserve(static_cast<std::size_t>(shots));
    for (std::int64_t s = 0; s < shots; ++s) {
        out.push_back(detail::one_shot(b, rng));
    }
    return out;
}

/// Mean of outcome1 * outcome2 with stderr = sample std / sqrt(shots).
[[nodiscard]] inline TwoTimeEstimate sample_two_time(const DensityMatrix &rho,
                                                     const KrausChannel &ch,
                                                     const LightTouchObservable &obs1,
                                                     const LightTouchObservable &obs2,
                                                     std::int64_t shots, std::uint64_t seed) {
    if (shots <= 0) {
        throw ZeroShots("sample_two_time: shots must be positive");
    }
    const auto b = detail::two_time_branches(rho, ch, obs1, obs2);
    Rng rng(seed);
    std::int64_t agree = 0;
    for (std::int64_t s = 0; s < shots; ++s) {
        const auto r = detail::one_shot(b, rng);
        if ((r.outcome1 > 0.0) == (r.outcome2 > 0.0)) {
            ++agree;
        }
    }
    return detail::estimate_from_counts(agree, shots, b.lambda1 * b.lambda2);
}

[[nodiscard]] inline TwoTimeEstimate sample_two_time(const DensityMatrix &rho,
                                                     const KrausChannel &ch, const PauliString &a,
                                                     const PauliString &b, std::int64_t shots,
                                                     std::uint64_t seed) {
    return sample_two_time(rho, ch, LightTouchObservable(a.label, a.matrix()),
                           LightTouchObservable(b.label, b.matrix()), shots, seed);
}

/**
 * Sampled correlator table over the full basis grid. Pair k (grid order) uses
 * substream_seed(seed, k). Identity-observable sides are measured trivially
 * (outcome +1, no disturbance). Work is split over `threads` workers.
 */
[[nodiscard]] inline CorrelatorTable sample_table(const DensityMatrix &rho, const KrausChannel &ch,
                                                  BasisKind kind1, BasisKind kind2,
                                                  std::int64_t shots_per_pair, std::uint64_t seed,
                                                  unsigned threads = 1) {
    if (shots_per_pair <= 0) {
        throw ZeroShots("sample_table: shots_per_pair must be positive");
    }
    if (rho.dim() != ch.in_dim()) {
        throw DimensionMismatch("sample_table: state dim does not match channel input");
    }
    const ObservableBasis b1(kind1, ch.in_dim());
    const ObservableBasis b2(kind2, ch.out_dim());
    const std::size_t n2 = b2.size();
    const std::size_t total = b1.size() * n2;
    std::vector<TwoTimeEstimate> results(total);

    const auto work = [&](std::size_t begin, std::size_t stride) {
        for (std::size_t k = begin; k < total; k += stride) {
            results[k] = sample_two_time(rho, ch, b1.at(k / n2), b2.at(k % n2), shots_per_pair,
                                         substream_seed(seed, k));
        }
    };
    threads = std::max(1U, std::min<unsigned>(threads, static_cast<unsigned>(total)));
    if (threads == 1) {
        work(0, 1);
    } else {
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < threads; ++t) {
            pool.emplace_back(work, t, threads);
        }
    }

    CorrelatorTable t;
    t.kind1 = kind1;
    t.kind2 = kind2;
    t.dim1 = ch.in_dim();
    t.dim2 = ch.out_dim();
    for (std::size_t k = 0; k < total; ++k) {
        const LabelPair key{b1.at(k / n2).label(), b2.at(k % n2).label()};
        t.entries[key] = results[k].mean;
        t.shots[key] = results[k].shots;
        t.stderrs[key] = results[k].std_error;
    }
    return t;
}

} // namespace pdmwit
