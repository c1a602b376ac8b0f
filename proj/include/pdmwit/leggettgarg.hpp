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
 * Leggett-Garg quantity K = C12 + C23 - C13 for a three-time process
 * rho -> ch12 -> ch23, each two-time correlator taken as Tr[R (Q (x) Q)] for
 * the matching (state, channel) pair. C13 uses ch23 o ch12 with no
 * measurement at t2.
 */

#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "pdmwit/pdm.hpp"
#include "pdmwit/simulate.hpp"

namespace pdmwit {

/// Hermitian observable with Q^2 = I (spectrum in {-1, +1}).
class Dichotomic {
  public:
    explicit Dichotomic(const Matrix &q) : mat_(q, 1e-10) {
        if (max_abs_diff(mat_.matrix() * mat_.matrix(), identity(mat_.dim())) > 1e-10) {
            throw InvalidArgument("Dichotomic: Q^2 != I, spectrum must be {-1, +1}");
        }
    }

    [[nodiscard]] const Matrix &matrix() const noexcept { return mat_.matrix(); }
    [[nodiscard]] const HermitianMatrix &hermitian() const noexcept { return mat_; }
    [[nodiscard]] Index dim() const noexcept { return mat_.dim(); }

  private:
    HermitianMatrix mat_;
};

struct LgScenario {
    DensityMatrix initial;
    KrausChannel ch12;
    KrausChannel ch23;
    Dichotomic q;
};

struct LgResult {
    double c12 = 0.0;
    double c23 = 0.0;
    double c13 = 0.0;
    double k = 0.0;
};

namespace detail {

inline void check_lg_dims(const LgScenario &s) {
    const Index d = s.initial.dim();
    if (s.ch12.in_dim() != d || s.ch12.out_dim() != s.ch23.in_dim() ||
        s.ch23.out_dim() != d || s.ch12.out_dim() != d || s.q.dim() != d) {
        throw DimensionMismatch("lg_evaluate: state, legs and Q must share one dimension");
    }
}

inline double pdm_correlator(const DensityMatrix &rho, const KrausChannel &ch, const Matrix &q) {
    return (pdm_closed_form(rho, ch).matrix() * kron(q, q)).trace().real();
}

} // namespace detail

[[nodiscard]] inline LgResult lg_evaluate(const LgScenario &s) {
    detail::check_lg_dims(s);
    const Matrix &q = s.q.matrix();
    LgResult r;
    r.c12 = detail::pdm_correlator(s.initial, s.ch12, q);
    r.c23 = detail::pdm_correlator(apply_channel(s.ch12, s.initial), s.ch23, q);
    r.c13 = detail::pdm_correlator(s.initial, compose(s.ch23, s.ch12), q);
    r.k = r.c12 + r.c23 - r.c13;
    return r;
}

struct LgEstimate {
    LgResult result;
    double se12 = 0.0;
    double se23 = 0.0;
    double se13 = 0.0;
    /// Standard error of K (the three runs are independent).
    double se_k = 0.0;
};

/// Monte Carlo counterpart of lg_evaluate; correlator c uses substream_seed(seed, c).
[[nodiscard]] inline LgEstimate lg_sample(const LgScenario &s, std::int64_t shots,
                                          std::uint64_t seed) {
    detail::check_lg_dims(s);
    const LightTouchObservable obs("Q", s.q.matrix());
    const auto e12 = sample_two_time(s.initial, s.ch12, obs, obs, shots, substream_seed(seed, 0));
    const auto e23 = sample_two_time(apply_channel(s.ch12, s.initial), s.ch23, obs, obs, shots,
                                     substream_seed(seed, 1));
    const auto e13 = sample_two_time(s.initial, compose(s.ch23, s.ch12), obs, obs, shots,
                                     substream_seed(seed, 2));
    LgEstimate out;
    out.result = {e12.mean, e23.mean, e13.mean, e12.mean + e23.mean - e13.mean};
    out.se12 = e12.std_error;
    out.se23 = e23.std_error;
    out.se13 = e13.std_error;
    out.se_k = std::sqrt(e12.std_error * e12.std_error + e23.std_error * e23.std_error +
                         e13.std_error * e13.std_error);
    return out;
}

/// B = q1 (x) q2 (x) I + I (x) q2 (x) q3 - q1 (x) I (x) q3 on three copies of C^d.
[[nodiscard]] inline Matrix lg_b_operator(const Dichotomic &q1, const Dichotomic &q2,
                                          const Dichotomic &q3) {
    const Index d = q1.dim();
    if (q2.dim() != d || q3.dim() != d) {
        throw DimensionMismatch("lg_b_operator: observables must share one dimension");
    }
    const Matrix id = identity(d);
    return kron(kron(q1.matrix(), q2.matrix()), id) + kron(kron(id, q2.matrix()), q3.matrix()) -
           kron(kron(q1.matrix(), id), q3.matrix());
}

struct SpatialLgBound {
    double max_k = 0.0;
    double min_k = 0.0;
};

/// Extreme eigenvalues of B, i.e. the range of K over all tripartite states.
[[nodiscard]] inline SpatialLgBound spatial_lg_bound(const Dichotomic &q1, const Dichotomic &q2,
                                                     const Dichotomic &q3) {
    const auto ed = eig_hermitian(hermitian_part(lg_b_operator(q1, q2, q3)));
    return {ed.eigenvalues(ed.eigenvalues.size() - 1), ed.eigenvalues(0)};
}

struct LgVsSiResult {
    bool lg_violated = false;
    double max_k = 0.0;
    bool si_detected = false;
    double best_negativity = 0.0;
    /// Index into the input states of the most negative PDM.
    std::optional<std::size_t> best_state;
    std::optional<Witness> witness;
};

/**
 * Sweeps states x observables. Both legs are ch unless ch23 is given. SI is
 * judged on R(state, ch) with T_1 > 1e-9; the states are meant to be
 * incoherent, which is not enforced.
 */
[[nodiscard]] inline LgVsSiResult lg_vs_si(const KrausChannel &ch,
                                           const std::vector<DensityMatrix> &states,
                                           const std::vector<Dichotomic> &q_list,
                                           const std::optional<KrausChannel> &ch23 = std::nullopt) {
    if (ch.in_dim() != ch.out_dim()) {
        throw DimensionMismatch("lg_vs_si: channel must be square");
    }
    const KrausChannel &second = ch23 ? *ch23 : ch;
    LgVsSiResult out;
    out.max_k = -3.0;
    for (std::size_t s = 0; s < states.size(); ++s) {
        for (const auto &q : q_list) {
            const auto r = lg_evaluate({states[s], ch, second, q});
            out.max_k = std::max(out.max_k, r.k);
        }
        const Pdm pdm = pdm_closed_form(states[s], ch);
        const double t1 = si_measure(pdm, 1.0).value;
        if (t1 > out.best_negativity) {
            out.best_negativity = t1;
            out.best_state = s;
        }
    }
    out.lg_violated = out.max_k > 1.0 + 1e-9;
    out.si_detected = out.best_negativity > 1e-9;
    if (out.si_detected) {
        out.witness = synthesize_witness(pdm_closed_form(states[*out.best_state], ch));
    }
    return out;
}

} // namespace pdmwit
