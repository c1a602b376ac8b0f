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
 * Randomized property suites run by `pdmwit verify`. Each invariant draws
 * from its own substream of the root seed, so results do not depend on the
 * thread count.
 */

#pragma once

#include <cstdio>
#include <functional>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "pdmwit/coherence.hpp"
#include "pdmwit/leggettgarg.hpp"
#include "pdmwit/random.hpp"
#include "pdmwit/simulate.hpp"

namespace pdmwit {

/// Deliberate defects for mutation checks of the suites themselves.
enum class Fault { none, t1_sign };

struct VerifyOptions {
    std::uint64_t seed = 20260101;
    std::int64_t trials = 200;
    unsigned threads = 1;
    Fault fault = Fault::none;
};

struct InvariantResult {
    std::string suite;
    std::string name;
    std::int64_t trials = 0;
    std::int64_t failures = 0;
    /// First failure, empty when passed.
    std::string detail;

    [[nodiscard]] bool passed() const noexcept { return failures == 0; }
};

namespace detail {

/// One trial; returns a failure message or nullopt.
using TrialFn = std::function<std::optional<std::string>(Rng &, std::int64_t)>;

struct Invariant {
    std::string suite;
    std::string name;
    std::int64_t trials;
    TrialFn trial;
};

inline std::string fmt(const char *f, double a, double b = 0.0) {
    char buf[160];
    std::snprintf(buf, sizeof buf, f, a, b);
    return buf;
}

/// T_1 as the closed form reports it, with the optional injected sign error.
inline double closed_form_t1(const Pdm &r, Fault fault) {
    const double v = si_measure(r, 1.0).value;
    return fault == Fault::t1_sign ? -v : v;
}

inline Pdm random_process_pdm(Rng &rng, Index d) {
    return pdm_closed_form(random_density(d, rng), random_channel(d, d, rng));
}

inline Pdm random_unit_trace_pdm(Rng &rng, Index d) {
    return Pdm(random_unit_trace_hermitian(d * d, rng), d, d);
}

inline Dichotomic random_diagonal_dichotomic(Index d, Rng &rng) {
    Matrix q = identity(d);
    q(0, 0) = -1.0;
    for (Index k = 1; k < d; ++k) {
        if (uniform01(rng) < 0.5) {
            q(k, k) = -1.0;
        }
    }
    return Dichotomic(q);
}

/// Stinespring channels for even trials; near-OI mixtures, which sit close to the boundary, for odd ones.
inline KrausChannel block_test_channel(Rng &rng, Index d, std::int64_t t) {
    if (t % 2 == 0) {
        return random_channel(d, d, rng);
    }
    const double w = 0.2 * uniform01(rng);
    return mixture(random_oi_channel(d, rng), random_channel(d, d, rng), w);
}

inline std::vector<Invariant> pdm_invariants(const VerifyOptions &o) {
    const auto n = o.trials;
    std::vector<Invariant> v;
    v.push_back({"pdm", "closed form is Hermitian with unit trace", n,
                 [](Rng &rng, std::int64_t t) -> std::optional<std::string> {
                     const Pdm r = random_process_pdm(rng, 2 + t % 3);
                     const double herm = max_abs_diff(r.matrix(), r.matrix().adjoint());
                     const double tr = std::abs(r.matrix().trace().real() - 1.0);
                     if (herm > 1e-12 || tr > 1e-10) {
                         return fmt("hermiticity %.3g, trace error %.3g", herm, tr);
                     }
                     return std::nullopt;
                 }});
    v.push_back({"pdm", "tomographic reconstruction equals closed form", n,
                 [](Rng &rng, std::int64_t t) -> std::optional<std::string> {
                     const Index d = 2 + t % 3;
                     const Pdm r = random_process_pdm(rng, d);
                     const BasisKind k = t % 2 == 0 ? default_basis_kind(d) : BasisKind::light_touch;
                     const Pdm back = pdm_from_correlators(exact_correlators(r, k, k));
                     const double err = max_abs_diff(back.matrix(), r.matrix());
                     if (err > 1e-10) {
                         return fmt("d=%g reconstruction error %.3g", static_cast<double>(d), err);
                     }
                     return std::nullopt;
                 }});
    v.push_back({"pdm", "T1 closed form matches optimizer", n,
                 [fault = o.fault](Rng &rng, std::int64_t t) -> std::optional<std::string> {
                     const Pdm r = t % 2 == 0 ? random_process_pdm(rng, 2 + t % 3)
                                              : random_unit_trace_pdm(rng, 2);
                     const double closed = closed_form_t1(r, fault);
                     const double opt = si_optimize(r, 1.0).value;
                     if (std::abs(closed - opt) > 1e-7) {
                         return fmt("closed-form/optimizer mismatch: closed_form=%.17g optimizer=%.17g",
                                    closed, opt);
                     }
                     return std::nullopt;
                 }});
    v.push_back({"pdm", "T_p is nonnegative", n,
                 [](Rng &rng, std::int64_t t) -> std::optional<std::string> {
                     const Pdm r = random_unit_trace_pdm(rng, 2 + t % 2);
                     for (double p : {1.0, 1.5, 2.0, 3.0}) {
                         const double val = si_measure(r, p).value;
                         if (val < -1e-12) {
                             return fmt("T_%g = %.3g", p, val);
                         }
                     }
                     return std::nullopt;
                 }});
    v.push_back({"pdm", "T_p is unitarily invariant", n,
                 [](Rng &rng, std::int64_t t) -> std::optional<std::string> {
                     const Index d = 2 + t % 2;
                     const Pdm r = random_process_pdm(rng, d);
                     const Matrix u = random_unitary(d * d, rng);
                     const Pdm rotated(hermitian_part(u * r.matrix() * u.adjoint()), d, d);
                     for (double p : {1.0, 2.0}) {
                         const double diff = std::abs(si_measure(r, p).value - si_measure(rotated, p).value);
                         if (diff > 1e-9) {
                             return fmt("p=%g changed by %.3g", p, diff);
                         }
                     }
                     return std::nullopt;
                 }});
    v.push_back({"pdm", "T_1 is convex", n,
                 [](Rng &rng, std::int64_t) -> std::optional<std::string> {
                     const Pdm a = random_unit_trace_pdm(rng, 2);
                     const Pdm b = random_process_pdm(rng, 2);
                     const double w = uniform01(rng);
                     const Pdm mix(hermitian_part(w * a.matrix() + (1.0 - w) * b.matrix()), 2, 2);
                     const double lhs = si_measure(mix).value;
                     const double rhs = w * si_measure(a).value + (1.0 - w) * si_measure(b).value;
                     if (lhs > rhs + 1e-9) {
                         return fmt("T1(mix)=%.17g > %.17g", lhs, rhs);
                     }
                     return std::nullopt;
                 }});
    v.push_back({"pdm", "T_1 is monotone under CPTP maps", n,
                 [](Rng &rng, std::int64_t) -> std::optional<std::string> {
                     const Pdm r = random_unit_trace_pdm(rng, 2);
                     const KrausChannel lam = random_channel(4, 4, rng, 3);
                     const Pdm out(hermitian_part(apply_channel(lam, r.matrix())), 2, 2);
                     const double before = si_measure(r).value;
                     const double after = si_measure(out).value;
                     if (after > before + 1e-9) {
                         return fmt("T1 grew from %.17g to %.17g", before, after);
                     }
                     return std::nullopt;
                 }});
    v.push_back({"pdm", "T_1 <= 1 for qubit processes", n,
                 [](Rng &rng, std::int64_t t) -> std::optional<std::string> {
                     const auto rho = t % 2 == 0 ? random_pure_state(2, rng) : random_density(2, rng);
                     const auto ch = t % 3 == 0 ? channels::unitary(random_unitary(2, rng))
                                                : random_channel(2, 2, rng, 1 + t % 4);
                     const auto b = check_bound(rho, ch);
                     if (!b.bound_ok) {
                         return fmt("T1=%.17g exceeds reference %.17g", b.t1, b.reference);
                     }
                     return std::nullopt;
                 }});
    v.push_back({"pdm", "witness is negative and table evaluation agrees", n,
                 [](Rng &rng, std::int64_t t) -> std::optional<std::string> {
                     const Index d = 2 + t % 2;
                     const Pdm r = pdm_closed_form(random_pure_state(d, rng),
                                                   channels::unitary(random_unitary(d, rng)));
                     if (!is_spatially_incompatible(r)) {
                         return std::nullopt;
                     }
                     const auto w = synthesize_witness(r);
                     const double direct = witness_expectation(w, r);
                     const double table = evaluate_witness(w, exact_correlators(r, w.kind1, w.kind2));
                     if (!(direct < 0.0) || std::abs(direct - table) > 1e-9) {
                         return fmt("Tr[WR]=%.17g, from table %.17g", direct, table);
                     }
                     return std::nullopt;
                 }});
    return v;
}

inline std::vector<Invariant> simulate_invariants(const VerifyOptions &o) {
    const auto n = std::max<std::int64_t>(1, o.trials / 20);
    std::vector<Invariant> v;
    v.push_back({"simulate", "identical seeds give identical shots", n,
                 [](Rng &rng, std::int64_t) -> std::optional<std::string> {
                     const auto rho = random_density(2, rng);
                     const auto ch = random_channel(2, 2, rng);
                     const std::uint64_t seed = rng();
                     const auto obs = light_touch_basis(2);
                     const auto a = simulate_shots(rho, ch, obs[1], obs[3], 500, seed);
                     const auto b = simulate_shots(rho, ch, obs[1], obs[3], 500, seed);
                     const auto t1 = sample_table(rho, ch, BasisKind::pauli, BasisKind::pauli, 200, seed, 1);
                     const auto t4 = sample_table(rho, ch, BasisKind::pauli, BasisKind::pauli, 200, seed, 4);
                     if (a != b || t1.entries != t4.entries) {
                         return std::string("shot sequence or table differs between runs");
                     }
                     return std::nullopt;
                 }});
    v.push_back({"simulate", "sample means are unbiased over 100 seeds", n,
                 [](Rng &rng, std::int64_t) -> std::optional<std::string> {
                     const auto rho = random_density(2, rng);
                     const auto ch = random_channel(2, 2, rng);
                     const LightTouchObservable a("A", random_dichotomic(2, rng));
                     const LightTouchObservable b("B", random_dichotomic(2, rng));
                     const double exact = (pdm_closed_form(rho, ch).matrix() *
                                           kron(a.matrix(), b.matrix())).trace().real();
                     const std::uint64_t root = rng();
                     double sum = 0.0;
                     double var = 0.0;
                     for (std::uint64_t s = 0; s < 100; ++s) {
                         const auto e = sample_two_time(rho, ch, a, b, 400, substream_seed(root, s));
                         sum += e.mean;
                         var += e.std_error * e.std_error;
                     }
                     const double pooled = std::sqrt(var) / 100.0;
                     if (std::abs(sum / 100.0 - exact) > 5.0 * pooled + 1e-12) {
                         return fmt("mean %.17g vs exact %.17g", sum / 100.0, exact);
                     }
                     return std::nullopt;
                 }});
    v.push_back({"simulate", "identity-side pairs match single-sided expectations", n,
                 [](Rng &rng, std::int64_t) -> std::optional<std::string> {
                     const auto rho = random_density(2, rng);
                     const auto ch = random_channel(2, 2, rng);
                     const auto t = sample_table(rho, ch, BasisKind::pauli, BasisKind::pauli, 4000, rng(), 1);
                     if (t.entries.at({"I", "I"}) != 1.0 || t.stderrs.at({"I", "I"}) != 0.0) {
                         return std::string("(I, I) is not exactly 1");
                     }
                     const DensityMatrix out = apply_channel(ch, rho);
                     for (const char *l : {"X", "Y", "Z"}) {
                         const Matrix s = PauliString{l}.matrix();
                         const double e2 = (out.matrix() * s).trace().real();
                         const double e1 = (rho.matrix() * s).trace().real();
                         if (std::abs(t.entries.at({"I", l}) - e2) > 5.0 * t.stderrs.at({"I", l}) + 1e-12 ||
                             std::abs(t.entries.at({l, "I"}) - e1) > 5.0 * t.stderrs.at({l, "I"}) + 1e-12) {
                             return std::string("single-sided entry outside 5 sigma for ") + l;
                         }
                     }
                     return std::nullopt;
                 }});
    return v;
}

inline std::vector<Invariant> coherence_invariants(const VerifyOptions &o) {
    const auto n = o.trials;
    std::vector<Invariant> v;
    v.push_back({"coherence", "block test agrees with full PDM eigenvalues (d = 2, 3, 4)", 3 * n,
                 [](Rng &rng, std::int64_t t) -> std::optional<std::string> {
                     const Index d = 2 + t % 3;
                     const RealVector p = random_probabilities(d, rng);
                     const KrausChannel ch = block_test_channel(rng, d, t / 3);
                     const bool verdict = block_positivity_test(p, ch).compatible;
                     const double lo = min_eigenvalue(
                         pdm_closed_form(DensityMatrix::diagonal(p), ch).hermitian());
                     if (verdict != (lo >= -kClassTolerance)) {
                         return fmt("d=%g, block test disagrees with min eigenvalue %.3g",
                                    static_cast<double>(d), lo);
                     }
                     return std::nullopt;
                 }});
    v.push_back({"coherence", "OI implies DI and CE implies CI", n,
                 [](Rng &rng, std::int64_t t) -> std::optional<std::string> {
                     const Index d = 2 + t % 2;
                     KrausChannel ch = random_channel(d, d, rng);
                     if (t % 3 == 1) {
                         ch = random_oi_channel(d, rng);
                     } else if (t % 3 == 2) {
                         RealMatrix a = RealMatrix::Zero(d, d);
                         for (Index i = 0; i < d; ++i) {
                             a.col(i) = random_probabilities(d, rng);
                         }
                         ch = build_ce_oi_channel(StochasticMatrix(a));
                     }
                     const auto c = classify_channel(ch);
                     if ((c.is_oi && !c.is_di) || (c.is_ce && !c.is_ci)) {
                         return std::string("hierarchy implication violated");
                     }
                     if (t % 3 == 1 && !c.is_oi) {
                         return fmt("measure-and-prepare channel not OI, residual %.3g", c.residuals.at("OI"));
                     }
                     if (t % 3 == 2 && !(c.is_oi && c.is_ce)) {
                         return std::string("classical channel not OI and CE");
                     }
                     return std::nullopt;
                 }});
    v.push_back({"coherence", "OI channels give zero SI on incoherent states", n,
                 [](Rng &rng, std::int64_t t) -> std::optional<std::string> {
                     const Index d = 2 + t % 3;
                     const auto ch = random_oi_channel(d, rng);
                     const double val = si_measure(pdm_closed_form(random_incoherent_state(d, rng), ch)).value;
                     if (val > 1e-9) {
                         return fmt("T1 = %.3g", val);
                     }
                     return std::nullopt;
                 }});
    v.push_back({"coherence", "asymmetric classical channels admit an SI coherent input", n,
                 [](Rng &rng, std::int64_t t) -> std::optional<std::string> {
                     const Index d = 2 + t % 3;
                     RealMatrix a(d, d);
                     for (Index i = 0; i < d; ++i) {
                         a.col(i) = random_probabilities(d, rng);
                     }
                     const StochasticMatrix sm(a);
                     const double p = 0.05 + 0.9 * uniform01(rng);
                     const auto adv = adversarial_coherent_state(sm, p);
                     const double val =
                         si_measure(pdm_closed_form(adv.state, build_ce_oi_channel(sm))).value;
                     if (!(val > 0.0) || !(adv.block_det < 0.0)) {
                         return fmt("T1 = %.3g, block det %.3g", val, adv.block_det);
                     }
                     return std::nullopt;
                 }});
    return v;
}

inline std::vector<Invariant> lg_invariants(const VerifyOptions &o) {
    const auto n = o.trials;
    std::vector<Invariant> v;
    v.push_back({"lg", "B spectrum spans [-3, 1] for dichotomic triples", n,
                 [](Rng &rng, std::int64_t t) -> std::optional<std::string> {
                     const Index d = 2 + t % 2;
                     const Dichotomic q1(random_dichotomic(d, rng));
                     const Dichotomic q2(random_dichotomic(d, rng));
                     const Dichotomic q3(random_dichotomic(d, rng));
                     const auto b = spatial_lg_bound(q1, q2, q3);
                     if (std::abs(b.max_k - 1.0) > 1e-9 || std::abs(b.min_k + 3.0) > 1e-9) {
                         return fmt("spectrum [%.17g, %.17g]", b.min_k, b.max_k);
                     }
                     return std::nullopt;
                 }});
    v.push_back({"lg", "K lies in [-3, 1] on tripartite states", n,
                 [](Rng &rng, std::int64_t) -> std::optional<std::string> {
                     const Matrix b = lg_b_operator(Dichotomic(random_dichotomic(2, rng)),
                                                    Dichotomic(random_dichotomic(2, rng)),
                                                    Dichotomic(random_dichotomic(2, rng)));
                     const double k = (random_density(8, rng).matrix() * b).trace().real();
                     if (k > 1.0 + 1e-9 || k < -3.0 - 1e-9) {
                         return fmt("K = %.17g", k);
                     }
                     return std::nullopt;
                 }});
    v.push_back({"lg", "B summands commute", n,
                 [](Rng &rng, std::int64_t) -> std::optional<std::string> {
                     const Matrix q1 = random_dichotomic(2, rng);
                     const Matrix q2 = random_dichotomic(2, rng);
                     const Matrix q3 = random_dichotomic(2, rng);
                     const Matrix id = identity(2);
                     const Matrix s1 = kron(kron(q1, q2), id);
                     const Matrix s2 = kron(kron(id, q2), q3);
                     const Matrix s3 = kron(kron(q1, id), q3);
                     double worst = 0.0;
                     for (const auto &[a, b] : {std::pair{&s1, &s2}, std::pair{&s1, &s3}, std::pair{&s2, &s3}}) {
                         worst = std::max(worst, max_abs_diff(*a * *b, *b * *a));
                     }
                     if (worst > 1e-12) {
                         return fmt("commutator norm %.3g", worst);
                     }
                     return std::nullopt;
                 }});
    v.push_back({"lg", "OI legs keep K <= 1 on incoherent states", n,
                 [](Rng &rng, std::int64_t t) -> std::optional<std::string> {
                     const Index d = 2 + t % 2;
                     const auto r = lg_evaluate({random_incoherent_state(d, rng), random_oi_channel(d, rng),
                                                 random_oi_channel(d, rng), random_diagonal_dichotomic(d, rng)});
                     if (r.k > 1.0 + 1e-9) {
                         return fmt("K = %.17g", r.k);
                     }
                     return std::nullopt;
                 }});
    v.push_back({"lg", "exact correlators match sampled estimates within 5 sigma",
                 std::max<std::int64_t>(1, n / 10),
                 [](Rng &rng, std::int64_t) -> std::optional<std::string> {
                     const LgScenario s{random_density(2, rng), random_channel(2, 2, rng),
                                        random_channel(2, 2, rng), Dichotomic(random_dichotomic(2, rng))};
                     const auto exact = lg_evaluate(s);
                     const auto est = lg_sample(s, 20000, rng());
                     const double d12 = std::abs(est.result.c12 - exact.c12);
                     const double d23 = std::abs(est.result.c23 - exact.c23);
                     const double d13 = std::abs(est.result.c13 - exact.c13);
                     if (d12 > 5.0 * est.se12 + 1e-12 || d23 > 5.0 * est.se23 + 1e-12 ||
                         d13 > 5.0 * est.se13 + 1e-12) {
                         return fmt("deviation %.3g (K exact %.6f)", std::max({d12, d23, d13}), exact.k);
                     }
                     return std::nullopt;
                 }});
    return v;
}

inline std::uint64_t fnv1a(const std::string &s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h = (h ^ c) * 0x100000001b3ULL;
    }
    return h;
}

inline InvariantResult run_invariant(const Invariant &inv, std::uint64_t seed) {
    InvariantResult r{inv.suite, inv.name, inv.trials, 0, ""};
    Rng rng(seed);
    for (std::int64_t t = 0; t < inv.trials; ++t) {
        std::optional<std::string> failure;
        try {
            failure = inv.trial(rng, t);
        } catch (const std::exception &e) {
            failure = std::string("exception: ") + e.what();
        }
        if (failure) {
            if (r.failures == 0) {
                r.detail = "trial " + std::to_string(t) + ": " + *failure;
            }
            ++r.failures;
        }
    }
    return r;
}

} // namespace detail

[[nodiscard]] inline const std::vector<std::string> &verify_suite_names() {
    static const std::vector<std::string> names{"all", "pdm", "simulate", "coherence", "lg"};
    return names;
}

/// Runs one suite ("all" runs every suite) and returns one result per invariant.
[[nodiscard]] inline std::vector<InvariantResult> run_verify(const std::string &suite,
                                                             const VerifyOptions &opts) {
    std::vector<detail::Invariant> all;
    const auto add = [&](std::vector<detail::Invariant> v) {
        all.insert(all.end(), std::make_move_iterator(v.begin()), std::make_move_iterator(v.end()));
    };
    if (suite == "all" || suite == "pdm") {
        add(detail::pdm_invariants(opts));
    }
    if (suite == "all" || suite == "simulate") {
        add(detail::simulate_invariants(opts));
    }
    if (suite == "all" || suite == "coherence") {
        add(detail::coherence_invariants(opts));
    }
    if (suite == "all" || suite == "lg") {
        add(detail::lg_invariants(opts));
    }
    if (all.empty()) {
        throw InvalidArgument("unknown verify suite '" + suite + "'");
    }
    // Seeds are tied to (suite, name) so selecting a subset does not shift them.
    std::vector<InvariantResult> results(all.size());
    const auto seed_of = [&](const detail::Invariant &inv) {
        return substream_seed(opts.seed, detail::fnv1a(inv.suite + "/" + inv.name));
    };
    const unsigned workers = std::max(1U, std::min<unsigned>(opts.threads, static_cast<unsigned>(all.size())));
    {
        std::vector<std::jthread> pool;
        for (unsigned w = 0; w < workers; ++w) {
            pool.emplace_back([&, w] {
                for (std::size_t k = w; k < all.size(); k += workers) {
                    results[k] = detail::run_invariant(all[k], seed_of(all[k]));
                }
            });
        }
    }
    return results;
}

} // namespace pdmwit
