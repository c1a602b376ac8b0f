// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <sys/wait.h>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <sstream>
#include <thread>

#include "oracles.hpp"
#include "pdmwit/coherence.hpp"
#include "pdmwit/leggettgarg.hpp"
#include "pdmwit/simulate.hpp"

using namespace pdmwit;
namespace fs = std::filesystem;

namespace {

// Tolerances, fixed here rather than passed in.
constexpr double kExactTol = 1e-10;
constexpr double kSiTol = 1e-9;
constexpr double kOptimizerTol = 1e-7;
constexpr double kSigmas = 5.0;
constexpr double kFrobeniusLimit = 0.01;

constexpr double kLimitCriterion1 = 1.0;
constexpr double kLimitCriterion3 = 60.0;
constexpr double kLimitCriterion8 = 300.0;

struct Outcome {
    bool pass = false;
    std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char *f, double a) {
    char buf[160];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

Matrix real_matrix(std::initializer_list<std::initializer_list<double>> rows) {
    Matrix m(static_cast<Index>(rows.size()), static_cast<Index>(rows.begin()->size()));
    Index i = 0;
    for (const auto &row : rows) {
        Index j = 0;
        for (double v : row) {
            m(i, j++) = v;
        }
        ++i;
    }
    return m;
}

DensityMatrix ket0() { return DensityMatrix::basis_state(2, 0); }

DensityMatrix plus_state() {
    Vector v(2);
    v << 1.0, 1.0;
    return DensityMatrix::pure(v);
}

double negativity_oracle(const Matrix &r) {
    const RealVector ev = oracle::eigenvalues(r);
    double s = 0.0;
    for (Index k = 0; k < ev.size(); ++k) {
        s += std::min(ev(k), 0.0);
    }
    return -2.0 * s;
}

Outcome criterion1() {
    const auto t0 = std::chrono::steady_clock::now();
    const Matrix expected = real_matrix({{1, 0, 0, 0}, {0, 0, 0.5, 0}, {0, 0.5, 0, 0}, {0, 0, 0, 0}});
    const Pdm r = pdm_closed_form(ket0(), channels::identity(2));
    const bool exact = r.matrix() == expected;
    const RealVector ev = eig_hermitian(r.hermitian()).eigenvalues;
    RealVector want(4);
    want << -0.5, 0.0, 0.5, 1.0;
    const double spec_err = (ev - want).cwiseAbs().maxCoeff();
    const double t1 = si_measure(r, 1.0).value;
    const double w = witness_expectation(synthesize_witness(r), r);
    const double elapsed = seconds_since(t0);
    Outcome o;
    o.pass = exact && spec_err <= kExactTol && std::abs(t1 - 1.0) <= kSiTol && std::abs(w + 0.5) <= kExactTol &&
             elapsed < kLimitCriterion1;
    o.detail = std::string("matrix ") + (exact ? "exact" : "differs") + fmt(", spectrum err %.2e", spec_err) +
               fmt(", T1 %.17g", t1) + fmt(", <W> %.17g", w) + fmt(", %.3f s", elapsed);
    return o;
}

Outcome criterion2() {
    const Matrix expected =
        real_matrix({{0.5, 0, 0.25, 0}, {0, 0, 0, 0.25}, {0.25, 0, 0, 0}, {0, 0.25, 0, 0.5}});
    const Pdm r = pdm_closed_form(plus_state(), channels::dephase(2));
    const double entry_err = max_abs_diff(r.matrix(), expected);
    const double t1 = si_measure(r, 1.0).value;
    const double oracle_t1 = negativity_oracle(r.matrix());
    const auto adv = adversarial_coherent_state(StochasticMatrix(RealMatrix::Identity(2, 2)), 0, 1, 0, 0.5);
    Outcome o;
    o.pass = entry_err <= 1e-15 && std::abs(t1 - (std::numbers::sqrt2 - 1.0)) <= kSiTol &&
             std::abs(oracle_t1 - (std::numbers::sqrt2 - 1.0)) <= kSiTol && adv.block_det == -1.0 / 16.0;
    o.detail = fmt("entry err %.2e", entry_err) + fmt(", T1 %.17g", t1) + fmt(", oracle %.17g", oracle_t1) +
               fmt(", block det %.17g", adv.block_det);
    return o;
}

Outcome criterion3() {
    const auto t0 = std::chrono::steady_clock::now();
    Rng rng(substream_seed(3, 0));
    double worst = 0.0;
    double best_pure_unitary = 0.0;
    int violations = 0;
    const int n = 10000;
    for (int t = 0; t < n; ++t) {
        const bool pure_unitary = t % 4 == 0;
        const DensityMatrix rho = pure_unitary ? random_pure_state(2, rng) : random_density(2, rng);
        const KrausChannel ch = pure_unitary ? channels::unitary(random_unitary(2, rng))
                                             : random_channel(2, 2, rng, 1 + t % 4);
        const auto b = check_bound(rho, ch);
        worst = std::max(worst, b.t1);
        violations += b.t1 <= 1.0 + kSiTol ? 0 : 1;
        if (pure_unitary) {
            best_pure_unitary = std::max(best_pure_unitary, b.t1);
        }
    }
    const double elapsed = seconds_since(t0);
    Outcome o;
    o.pass = violations == 0 && best_pure_unitary > 0.999 && elapsed < kLimitCriterion3;
    o.detail = std::to_string(n) + " pairs, max T1 " + fmt("%.17g", worst) + ", violations " +
               std::to_string(violations) + fmt(", best pure/unitary %.17g", best_pure_unitary) +
               fmt(", %.2f s", elapsed);
    return o;
}

Outcome criterion4() {
    Rng rng(substream_seed(4, 0));
    int disagreements = 0;
    int incompatible = 0;
    int total = 0;
    for (Index d : {2, 3, 4}) {
        for (int t = 0; t < 1000; ++t) {
            RealVector p = random_probabilities(d, rng);
            if (t % 4 == 1) {
                p(static_cast<Index>(uniform01(rng) * static_cast<double>(d))) = 0.0;
                p /= p.sum();
            }
            const KrausChannel ch =
                t % 3 == 0 ? mixture(random_oi_channel(d, rng), random_channel(d, d, rng), 0.02 * uniform01(rng))
                           : random_channel(d, d, rng, 1 + t % 3);
            const bool full = oracle::min_eig(pdm_closed_form(DensityMatrix::diagonal(p), ch).matrix()) >= -1e-9;
            const bool blocks = block_positivity_test(p, ch).compatible;
            disagreements += full == blocks ? 0 : 1;
            incompatible += full ? 0 : 1;
            ++total;
        }
    }
    Outcome o;
    o.pass = disagreements == 0;
    o.detail = std::to_string(total) + " instances, " + std::to_string(incompatible) + " incompatible, " +
               std::to_string(disagreements) + " disagreements";
    return o;
}

// Vertex distributions e_i, then uniform pairs (e_i + e_j) / 2.
bool non_oi_detected(const KrausChannel &ch) {
    const Index d = ch.in_dim();
    std::vector<RealVector> candidates;
    for (Index i = 0; i < d; ++i) {
        candidates.push_back(RealVector::Unit(d, i));
    }
    for (Index i = 0; i < d; ++i) {
        for (Index j = i + 1; j < d; ++j) {
            RealVector p = RealVector::Zero(d);
            p(i) = p(j) = 0.5;
            candidates.push_back(p);
        }
    }
    for (const auto &p : candidates) {
        if (si_measure(pdm_closed_form(DensityMatrix::diagonal(p), ch), 1.0).value > kSiTol) {
            return true;
        }
        const auto bt = block_positivity_test(p, ch);
        if (!bt.compatible && bt.failure_kind == BlockFailure::support) {
            return true;
        }
    }
    return false;
}

Outcome criterion5() {
    Rng rng(substream_seed(5, 0));
    std::vector<KrausChannel> oi;
    std::vector<KrausChannel> non_oi;
    for (Index d : {2, 3, 4}) {
        oi.push_back(channels::dephase(d));
        non_oi.push_back(channels::identity(d));
        non_oi.push_back(channels::unitary(random_unitary(d, rng)));
        for (int t = 0; t < 10; ++t) {
            oi.push_back(random_oi_channel(d, rng, 1 + t % 3));
            RealMatrix a(d, d);
            for (Index i = 0; i < d; ++i) {
                a.col(i) = random_probabilities(d, rng);
            }
            oi.push_back(build_ce_oi_channel(StochasticMatrix(a)));
            non_oi.push_back(random_channel(d, d, rng, 1 + t % 4));
        }
    }
    for (double g : {0.1, 0.5, 0.9}) {
        non_oi.push_back(channels::amplitude_damping(g));
    }
    non_oi.push_back(channels::depolarizing(0.5, 2));

    int oi_failures = 0;
    double oi_worst = 0.0;
    for (const auto &ch : oi) {
        for (int s = 0; s < 100; ++s) {
            const double v = si_measure(pdm_closed_form(random_incoherent_state(ch.in_dim(), rng), ch), 1.0).value;
            oi_worst = std::max(oi_worst, v);
            oi_failures += v < kSiTol ? 0 : 1;
        }
    }
    int misclassified = 0;
    int undetected = 0;
    for (const auto &ch : non_oi) {
        misclassified += classify_channel(ch).is_oi ? 1 : 0;
        undetected += non_oi_detected(ch) ? 0 : 1;
    }
    Outcome o;
    o.pass = oi_failures == 0 && misclassified == 0 && undetected == 0;
    o.detail = std::to_string(oi.size()) + " OI channels x 100 states" + fmt(", max T1 %.2e", oi_worst) + ", " +
               std::to_string(non_oi.size()) + " non-OI channels, " + std::to_string(undetected) + " undetected";
    return o;
}

Outcome criterion6() {
    Rng rng(substream_seed(6, 0));
    double spec_err = 0.0;
    for (int t = 0; t < 1000; ++t) {
        const Index d = 2 + t % 3;
        const auto b = spatial_lg_bound(Dichotomic(random_dichotomic(d, rng)), Dichotomic(random_dichotomic(d, rng)),
                                        Dichotomic(random_dichotomic(d, rng)));
        spec_err = std::max({spec_err, std::abs(b.max_k - 1.0), std::abs(b.min_k + 3.0)});
    }
    int out_of_range = 0;
    for (int t = 0; t < 1000; ++t) {
        const Matrix b = lg_b_operator(Dichotomic(random_dichotomic(2, rng)), Dichotomic(random_dichotomic(2, rng)),
                                       Dichotomic(random_dichotomic(2, rng)));
        const DensityMatrix rho = t % 2 == 0 ? random_density(8, rng) : random_pure_state(8, rng);
        const double k = (rho.matrix() * b).trace().real();
        out_of_range += (k >= -3.0 - kSiTol && k <= 1.0 + kSiTol) ? 0 : 1;
    }
    Outcome o;
    o.pass = spec_err <= kSiTol && out_of_range == 0;
    o.detail = fmt("1000 triples, spectrum err %.2e", spec_err) + ", 1000 states, " + std::to_string(out_of_range) +
               " outside [-3, 1]";
    return o;
}

Outcome criterion7() {
    const std::vector<DensityMatrix> states{DensityMatrix::basis_state(2, 0), DensityMatrix::basis_state(2, 1),
                                            DensityMatrix::maximally_mixed(2)};
    const std::vector<Dichotomic> q{Dichotomic(PauliString{"Z"}.matrix())};
    const auto id = lg_vs_si(channels::identity(2), states, q);
    const auto dz = lg_vs_si(channels::dephase(2), states, q);
    Outcome o;
    o.pass = !id.lg_violated && id.si_detected && std::abs(id.best_negativity - 1.0) <= kSiTol && !dz.lg_violated &&
             !dz.si_detected;
    o.detail = std::string("identity: lg ") + (id.lg_violated ? "violated" : "holds") + ", si " +
               (id.si_detected ? "detected" : "none") + fmt(", negativity %.17g", id.best_negativity) +
               "; dephasing: lg " + (dz.lg_violated ? "violated" : "holds") + ", si " +
               (dz.si_detected ? "detected" : "none");
    return o;
}

Outcome criterion8() {
    const auto t0 = std::chrono::steady_clock::now();
    Rng rng(substream_seed(8, 0));
    const unsigned threads = std::max(1U, std::thread::hardware_concurrency());
    int outside = 0;
    int compared = 0;
    double worst_z = 0.0;
    for (int s = 0; s < 20; ++s) {
        const Index d = s < 16 ? 2 : 3;
        const auto rho = random_density(d, rng);
        const auto ch = random_channel(d, d, rng);
        const auto kind = default_basis_kind(d);
        const auto t = sample_table(rho, ch, kind, kind, 100000, substream_seed(80, static_cast<std::uint64_t>(s)),
                                    threads);
        const auto exact = exact_correlators(pdm_closed_form(rho, ch), kind, kind);
        for (const auto &[key, v] : t.entries) {
            const double dev = std::abs(v - exact.entries.at(key));
            const double se = t.stderrs.at(key);
            if (se > 0.0) {
                worst_z = std::max(worst_z, dev / se);
            }
            outside += dev <= kSigmas * se + 1e-12 ? 0 : 1;
            ++compared;
        }
    }
    const auto big = sample_table(ket0(), channels::identity(2), BasisKind::pauli, BasisKind::pauli, 1000000, 88,
                                  threads);
    const double frob =
        (pdm_from_correlators(big).matrix() - pdm_closed_form(ket0(), channels::identity(2)).matrix()).norm();
    const double elapsed = seconds_since(t0);
    Outcome o;
    o.pass = outside == 0 && frob < kFrobeniusLimit && elapsed < kLimitCriterion8;
    o.detail = std::to_string(compared) + " correlators, " + std::to_string(outside) + " beyond 5 sigma" +
               fmt(" (max %.2f sigma)", worst_z) + fmt(", Frobenius error %.2e", frob) + fmt(", %.1f s", elapsed);
    return o;
}

Pdm random_process_pdm(Rng &rng) {
    const Index d = 2 + static_cast<Index>(uniform01(rng) * 2.0);
    return pdm_closed_form(random_density(d, rng), random_channel(d, d, rng));
}

Outcome criterion9() {
    Rng rng(substream_seed(9, 0));
    const double slack = 1e-9;
    int positivity = 0;
    int convexity = 0;
    int invariance = 0;
    int monotonicity = 0;
    double optimizer_gap = 0.0;
    for (int t = 0; t < 1000; ++t) {
        const Pdm a = random_process_pdm(rng);
        // Positivity: T_p >= 0, and T_p = 0 on density matrices.
        const auto state = random_density(a.d1() * a.d2(), rng);
        const Pdm as_pdm(HermitianMatrix(state.matrix()), a.d1(), a.d2());
        for (double p : {1.0, 2.0}) {
            positivity += si_measure(a, p).value >= -slack ? 0 : 1;
            positivity += si_measure(as_pdm, p).value <= slack ? 0 : 1;
        }

        // Convexity over a random mix of two PDMs of the same shape.
        const Pdm b = pdm_closed_form(random_density(a.d1(), rng), random_channel(a.d1(), a.d2(), rng));
        const double w = uniform01(rng);
        const Pdm mix(HermitianMatrix(Matrix(w * a.matrix() + (1.0 - w) * b.matrix())), a.d1(), a.d2());
        for (double p : {1.0, 2.0}) {
            const double lhs = si_measure(mix, p).value;
            const double rhs = w * si_measure(a, p).value + (1.0 - w) * si_measure(b, p).value;
            convexity += lhs <= rhs + slack ? 0 : 1;
        }

        // Unitary invariance on the joint space.
        const Matrix u = random_unitary(a.d1() * a.d2(), rng);
        const Pdm rotated(HermitianMatrix(Matrix(u * a.matrix() * u.adjoint())), a.d1(), a.d2());
        for (double p : {1.0, 2.0}) {
            invariance += std::abs(si_measure(rotated, p).value - si_measure(a, p).value) <= slack ? 0 : 1;
        }

        // Monotonicity at p = 1 under a CPTP map on the joint space.
        const Index n = a.d1() * a.d2();
        const KrausChannel phi = random_channel(n, n, rng, 1 + t % 4);
        const Pdm mapped(HermitianMatrix(apply_channel(phi, a.matrix()), 1e-10), a.d1(), a.d2());
        monotonicity += si_measure(mapped, 1.0).value <= si_measure(a, 1.0).value + slack ? 0 : 1;

        // Optimizer path against the closed form.
        const Pdm h(random_unit_trace_hermitian(n, rng), a.d1(), a.d2());
        optimizer_gap = std::max(optimizer_gap, std::abs(si_optimize(h, 1.0).value - negativity_oracle(h.matrix())));
    }

    const Pdm id = pdm_closed_form(ket0(), channels::identity(2));
    RealVector lambda(4);
    lambda << 1.0, 0.5, 0.0, -0.5;
    const double oracle_t2 = (lambda - oracle::project_simplex(lambda)).norm();
    const double t2 = si_measure(id, 2.0).value;

    Outcome o;
    o.pass = positivity == 0 && convexity == 0 && invariance == 0 && monotonicity == 0 &&
             optimizer_gap <= kOptimizerTol && std::abs(t2 - std::sqrt(0.375)) <= kOptimizerTol &&
             std::abs(oracle_t2 - std::sqrt(0.375)) <= kOptimizerTol;
    o.detail = "violations: positivity " + std::to_string(positivity) + ", convexity " + std::to_string(convexity) +
               ", invariance " + std::to_string(invariance) + ", monotonicity " + std::to_string(monotonicity) +
               fmt("; optimizer gap %.2e", optimizer_gap) + fmt("; T2 %.17g", t2);
    return o;
}

int run_cli(const std::string &args) {
    const std::string cmd = std::string(PDMWIT_CLI) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path &p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

Outcome criterion10() {
    const auto root = fs::temp_directory_path() / "pdmwit_acceptance_determinism";
    fs::remove_all(root);
    int compared = 0;
    int differing = 0;
    int failed_runs = 0;
    for (const char *file : {"simulate_identity.json", "lg_rotation.json", "paper_example_plus_dephase.json"}) {
        const std::string cfg = std::string(PDMWIT_SCENARIOS) + "/" + file;
        const auto a = root / (std::string(file) + ".a");
        const auto b = root / (std::string(file) + ".b");
        failed_runs += run_cli("run --config " + cfg + " --out " + a.string() + " --seed 20260101") == 0 ? 0 : 1;
        failed_runs += run_cli("run --config " + cfg + " --out " + b.string() + " --seed 20260101") == 0 ? 0 : 1;
        if (!fs::exists(a)) {
            continue;
        }
        for (const auto &e : fs::directory_iterator(a)) {
            ++compared;
            differing += slurp(e.path()) == slurp(b / e.path().filename()) ? 0 : 1;
        }
    }
    fs::remove_all(root);
    Outcome o;
    o.pass = failed_runs == 0 && compared == 6 && differing == 0;
    o.detail = std::to_string(compared) + " files compared, " + std::to_string(differing) + " differ, " +
               std::to_string(failed_runs) + " failed runs";
    return o;
}

} // namespace

int main() {
    const std::vector<std::function<Outcome()>> criteria{criterion1, criterion2, criterion3, criterion4,
                                                         criterion5, criterion6, criterion7, criterion8,
                                                         criterion9, criterion10};
    int failures = 0;
    for (std::size_t k = 0; k < criteria.size(); ++k) {
        Outcome o;
        try {
            o = criteria[k]();
        } catch (const std::exception &e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failures += o.pass ? 0 : 1;
        std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << (k + 1) << ": " << o.detail << std::endl;
    }
    return failures == 0 ? 0 : 1;
}
