#include <gtest/gtest.h>

#include <numbers>

#include "oracles.hpp"
#include "pdmwit/coherence.hpp"
#include "pdmwit/random.hpp"

using namespace pdmwit;

namespace {

const double kSqrtHalf = std::numbers::sqrt2 / 2.0;

KrausChannel plus_minus_readout() {
    Matrix k0 = Matrix::Zero(2, 2);
    Matrix k1 = Matrix::Zero(2, 2);
    k0(0, 0) = k0(1, 0) = kSqrtHalf;
    k1(0, 1) = kSqrtHalf;
    k1(1, 1) = -kSqrtHalf;
    return KrausChannel({k0, k1});
}

RealVector probs(std::initializer_list<double> v) {
    RealVector p(static_cast<Index>(v.size()));
    Index k = 0;
    for (double x : v) {
        p(k++) = x;
    }
    return p;
}

bool oracle_compatible(const RealVector &p, const KrausChannel &ch) {
    const Matrix r = pdm_closed_form(DensityMatrix::diagonal(p), ch).matrix();
    return oracle::min_eig(r) >= -1e-9;
}

// Random input for the block test: Stinespring channels, OI mixtures, and sparse probabilities.
std::pair<RealVector, KrausChannel> lemma_instance(Index d, int t, Rng &rng) {
    RealVector p = random_probabilities(d, rng);
    if (t % 4 == 1) {
        p(static_cast<Index>(uniform01(rng) * static_cast<double>(d))) = 0.0;
        p /= p.sum();
    }
    if (t % 3 == 0) {
        return {p, mixture(random_oi_channel(d, rng), random_channel(d, d, rng), 0.02 * uniform01(rng))};
    }
    return {p, random_channel(d, d, rng, 1 + t % 3)};
}

} // namespace

TEST(Classify, Dephasing) {
    const auto r = classify_channel(channels::dephase(3));
    EXPECT_TRUE(r.is_oi);
    EXPECT_TRUE(r.is_ce);
    EXPECT_TRUE(r.is_ci);
    EXPECT_TRUE(r.is_di);
    EXPECT_TRUE(r.is_ncgd);
    EXPECT_EQ(r.ncgd_mode, "single-channel surrogate");
    for (const auto &[name, res] : r.residuals) {
        EXPECT_LE(res, 1e-15) << name;
    }
}

TEST(Classify, Identity) {
    const auto r = classify_channel(channels::identity(2));
    EXPECT_TRUE(r.is_di);
    EXPECT_TRUE(r.is_ci);
    EXPECT_FALSE(r.is_oi);
    EXPECT_FALSE(r.is_ce);
    EXPECT_NEAR(r.residuals.at("OI"), 1.0, 1e-15);
}

TEST(Classify, KrausPairIsOiButNotCi) {
    const auto ch = plus_minus_readout();
    Matrix plus(2, 2);
    plus << 0.5, 0.5, 0.5, 0.5;
    EXPECT_LE(max_abs_diff(apply_channel(ch, unit(2, 0, 0)), plus), 1e-15);
    const auto r = classify_channel(ch);
    EXPECT_TRUE(r.is_oi);
    EXPECT_TRUE(r.is_di);
    EXPECT_FALSE(r.is_ci);
    EXPECT_FALSE(r.is_ce);
}

TEST(Classify, MatchesActionOnBasisUnits) {
    // Independent route: compare channel actions on every |j><i| instead of superoperators.
    Rng rng(3);
    for (int t = 0; t < 100; ++t) {
        const Index d = 2 + t % 3;
        const auto ch = (t % 2 == 0) ? random_channel(d, d, rng, 1 + t % 3) : random_oi_channel(d, rng);
        const auto r = classify_channel(ch);
        double oi = 0.0;
        double ce = 0.0;
        double ci = 0.0;
        double di = 0.0;
        for (Index i = 0; i < d; ++i) {
            for (Index j = 0; j < d; ++j) {
                const Matrix e = unit(d, j, i);
                const Matrix phi = apply_channel(ch, e);
                const Matrix phi_d = apply_channel(ch, dephase(e));
                oi = std::max(oi, max_abs_diff(phi, phi_d));
                ce = std::max(ce, max_abs_diff(phi, dephase(phi)));
                ci = std::max(ci, max_abs_diff(phi_d, dephase(phi_d)));
                di = std::max(di, max_abs_diff(dephase(phi), dephase(phi_d)));
            }
        }
        EXPECT_NEAR(r.residuals.at("OI"), oi, 1e-12);
        EXPECT_NEAR(r.residuals.at("CE"), ce, 1e-12);
        EXPECT_NEAR(r.residuals.at("CI"), ci, 1e-12);
        EXPECT_NEAR(r.residuals.at("DI"), di, 1e-12);
    }
}

TEST(Classify, HierarchyImplications) {
    Rng rng(5);
    int oi_seen = 0;
    int ce_seen = 0;
    for (int t = 0; t < 300; ++t) {
        const Index d = 2 + t % 3;
        KrausChannel ch = channels::identity(d);
        switch (t % 3) {
        case 0: ch = random_channel(d, d, rng); break;
        case 1: ch = random_oi_channel(d, rng); break;
        default: {
            RealMatrix a(d, d);
            for (Index i = 0; i < d; ++i) {
                a.col(i) = random_probabilities(d, rng);
            }
            ch = build_ce_oi_channel(StochasticMatrix(a));
        }
        }
        const auto r = classify_channel(ch);
        if (r.is_oi) {
            EXPECT_TRUE(r.is_di);
            ++oi_seen;
        }
        if (r.is_ce) {
            EXPECT_TRUE(r.is_ci);
            ++ce_seen;
        }
    }
    EXPECT_GE(oi_seen, 200);
    EXPECT_GE(ce_seen, 100);
}

TEST(Classify, NcgdProbes) {
    // Pure dephasing generator: Delta L = 0, so every split agrees.
    const Matrix z = oracle::pauli('Z');
    const Matrix dephasing = lindblad_generator(Matrix::Zero(2, 2), {Matrix(0.5 * z)});
    const auto r1 = classify_channel(channels::dephase(2), LiouvillianProbe{dephasing});
    EXPECT_TRUE(r1.is_ncgd);
    EXPECT_EQ(r1.ncgd_mode, "NCGD not refuted on grid");

    // Rabi driving creates and then detects coherence.
    const Matrix rabi = lindblad_generator(oracle::pauli('X'), {});
    const auto r2 = classify_channel(channels::identity(2), LiouvillianProbe{rabi});
    EXPECT_FALSE(r2.is_ncgd);
    EXPECT_EQ(r2.ncgd_mode, "NCGD refuted on grid");

    Matrix h(2, 2);
    h << kSqrtHalf, kSqrtHalf, kSqrtHalf, -kSqrtHalf;
    const auto had = channels::unitary(h);
    const auto r3 = classify_channel(had, power_family(had, 4));
    EXPECT_EQ(r3.ncgd_mode, "finite family");
    EXPECT_FALSE(r3.is_ncgd);
    const auto r4 = classify_channel(channels::dephase(2), power_family(channels::dephase(2), 4));
    EXPECT_TRUE(r4.is_ncgd);

    // The surrogate: Hadamard twice is the identity, once dephased in between it is not.
    EXPECT_FALSE(classify_channel(had).is_ncgd);
    EXPECT_THROW((void)classify_channel(channels::identity(2), LiouvillianProbe{identity(9)}),
                 DimensionMismatch);
}

TEST(Classify, RejectsNonSquareChannels) {
    Rng rng(1);
    EXPECT_THROW((void)classify_channel(random_channel(2, 3, rng)), DimensionMismatch);
}

TEST(SuperopExp, LindbladSemigroupMatchesOracle) {
    const Matrix l = lindblad_generator(0.3 * oracle::pauli('Y'), {Matrix(0.7 * unit(2, 0, 1))});
    for (double t : {0.01, 0.5, 3.0}) {
        EXPECT_LE(max_abs_diff(superop_exp(l, t), oracle::expm(t * l)), 1e-10);
    }
}

TEST(BlockTest, IdentityWithPureInputFailsSupport) {
    const auto b = block_positivity_test(probs({1.0, 0.0}), channels::identity(2));
    EXPECT_FALSE(b.compatible);
    ASSERT_TRUE(b.failing_pair.has_value());
    EXPECT_EQ(*b.failing_pair, (std::pair<Index, Index>{0, 1}));
    EXPECT_EQ(b.failure_kind, BlockFailure::support);
    EXPECT_EQ(b.stage, "pairwise");
}

TEST(BlockTest, BlocksFollowDefinition) {
    Rng rng(7);
    const auto ch = random_channel(3, 2, rng);
    const RealVector p = probs({0.2, 0.5, 0.3});
    const auto b = block_decomposition(p, ch);
    for (Index i = 0; i < 3; ++i) {
        for (Index j = 0; j < 3; ++j) {
            EXPECT_LE(max_abs_diff(b.at(i, j), b.at(j, i).adjoint()), 1e-12);
            EXPECT_LE(max_abs_diff(b.at(i, j), 0.5 * (p(i) + p(j)) * apply_channel(ch, unit(3, j, i))), 1e-15);
        }
        EXPECT_GE(oracle::min_eig(b.at(i, i)), -1e-10);
    }
    EXPECT_LE(max_abs_diff(b.assemble(), pdm_closed_form(DensityMatrix::diagonal(p), ch).matrix()), 1e-12);
    EXPECT_THROW((void)block_decomposition(probs({0.5, 0.6}), channels::identity(2)), InvalidArgument);
    EXPECT_THROW((void)block_decomposition(probs({0.5, 0.5}), channels::identity(3)), DimensionMismatch);
}

TEST(BlockTest, OiChannelsAreAlwaysCompatible) {
    Rng rng(11);
    for (int t = 0; t < 200; ++t) {
        const Index d = 2 + t % 3;
        const auto ch = random_oi_channel(d, rng, 1 + t % 3);
        const auto rho = random_incoherent_state(d, rng);
        const RealVector p = rho.matrix().diagonal().real();
        EXPECT_TRUE(block_positivity_test(p, ch).compatible);
        EXPECT_LT(si_measure(pdm_closed_form(rho, ch), 1.0).value, 1e-9);
    }
    EXPECT_TRUE(block_positivity_test(probs({0.3, 0.7}), plus_minus_readout()).compatible);
}

TEST(BlockTest, AgreesWithFullSpectrum) {
    Rng rng(13);
    int incompatible = 0;
    for (Index d : {2, 3, 4}) {
        for (int t = 0; t < 300; ++t) {
            const auto [p, ch] = lemma_instance(d, t, rng);
            const bool expected = oracle_compatible(p, ch);
            const auto got = block_positivity_test(p, ch);
            EXPECT_EQ(got.compatible, expected) << "d=" << d << " t=" << t;
            incompatible += expected ? 0 : 1;
        }
    }
    EXPECT_GT(incompatible, 100);
}

TEST(BlockTest, PairwiseConditionsAloneMissHigherOrderFailures) {
    // 1x1 blocks c_ij / 3 with c = [[1, a, a], [a, 1, -a], [a, -a, 1]]: every 2x2
    // principal submatrix is PSD for a < 1, but c has eigenvalue 1 - 2a < 0.
    const double a = 0.9;
    Matrix c(3, 3);
    c << 1, a, a, a, 1, -a, a, -a, 1;
    EXPECT_LT(oracle::min_eig(c), -0.7);
    BlockDecomposition b;
    b.probs = probs({1.0 / 3, 1.0 / 3, 1.0 / 3});
    b.block_dim = 1;
    b.blocks.assign(3, std::vector<Matrix>(3, Matrix(1, 1)));
    for (Index i = 0; i < 3; ++i) {
        for (Index j = 0; j < 3; ++j) {
            b.blocks[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)](0, 0) = c(i, j) / 3.0;
        }
    }
    EXPECT_TRUE(pairwise_block_conditions(b).compatible);
}

TEST(BlockTest, RecursiveStageCatchesQutritCounterexample) {
    // A Stinespring qutrit channel where the pairwise conditions pass yet R(diag(p), Phi) < 0.
    Rng rng(17);
    bool found = false;
    for (int t = 0; t < 4000 && !found; ++t) {
        const auto [p, ch] = lemma_instance(3, t, rng);
        const auto pair = pairwise_block_conditions(block_decomposition(p, ch));
        if (pair.compatible && !oracle_compatible(p, ch)) {
            const auto full = block_positivity_test(p, ch);
            EXPECT_FALSE(full.compatible);
            EXPECT_EQ(full.stage, "recursive");
            found = true;
        }
    }
    EXPECT_TRUE(found);
}

TEST(StochasticMatrix, Validation) {
    RealMatrix bad(2, 2);
    bad << 0.5, 0.5, 0.4, 0.5;
    EXPECT_THROW(StochasticMatrix{bad}, InvalidArgument);
    RealMatrix neg(2, 2);
    neg << 1.5, 0.0, -0.5, 1.0;
    EXPECT_THROW(StochasticMatrix{neg}, InvalidArgument);
    EXPECT_THROW(StochasticMatrix(RealMatrix::Identity(2, 3)), DimensionMismatch);
}

TEST(CeOiChannel, Examples) {
    const auto delta = build_ce_oi_channel(StochasticMatrix(RealMatrix::Identity(2, 2)));
    EXPECT_TRUE(channels_equal(delta, channels::dephase(2)));
    Matrix expected = Matrix::Zero(4, 4);
    expected(0, 0) = expected(3, 3) = 1.0;
    EXPECT_LE(max_abs_diff(jamiolkowski(delta).mat.matrix(), expected), 1e-15);

    const auto mix = build_ce_oi_channel(StochasticMatrix(RealMatrix::Constant(2, 2, 0.5)));
    const auto r = classify_channel(mix);
    EXPECT_TRUE(r.is_oi);
    EXPECT_TRUE(r.is_ce);
    EXPECT_LE(max_abs_diff(apply_channel(mix, unit(2, 0, 0)), identity(2) / 2.0), 1e-15);
    EXPECT_LE(apply_channel(mix, unit(2, 0, 1)).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Adversarial, DephasingExample) {
    const StochasticMatrix a(RealMatrix::Identity(2, 2));
    const auto adv = adversarial_coherent_state(a, 0, 1, 0, 0.5);
    EXPECT_EQ(adv.block_det, -1.0 / 16.0);
    Matrix plus(2, 2);
    plus << 0.5, 0.5, 0.5, 0.5;
    EXPECT_LE(max_abs_diff(adv.state.matrix(), plus), 1e-15);

    const Pdm r = pdm_closed_form(adv.state, build_ce_oi_channel(a));
    EXPECT_NEAR(oracle::min_eig(r.matrix()), (1.0 - std::numbers::sqrt2) / 4.0, 1e-14);

    // Independent 2x2 block: rows/cols {|00>, |10>} of R, i.e. the k = 0 output block.
    Matrix block(2, 2);
    block << r.matrix()(0, 0), r.matrix()(0, 2), r.matrix()(2, 0), r.matrix()(2, 2);
    EXPECT_NEAR(block.determinant().real(), -1.0 / 16.0, 1e-15);
}

TEST(Adversarial, BlockDeterminantMatchesMatrix) {
    Rng rng(19);
    for (int t = 0; t < 200; ++t) {
        const Index d = 2 + t % 3;
        RealMatrix m(d, d);
        for (Index i = 0; i < d; ++i) {
            m.col(i) = random_probabilities(d, rng);
        }
        const StochasticMatrix a(m);
        const Index i = 0;
        const Index j = 1 + t % (d - 1);
        const Index k = t % d;
        const double p = 0.05 + 0.9 * uniform01(rng);
        const auto adv = adversarial_coherent_state(a, i, j, k, p);
        const Matrix r = pdm_closed_form(adv.state, build_ce_oi_channel(a)).matrix();
        Matrix block(2, 2);
        block << r(i * d + k, i * d + k), r(i * d + k, j * d + k), r(j * d + k, i * d + k),
            r(j * d + k, j * d + k);
        EXPECT_NEAR(block.determinant().real(), adv.block_det, 1e-12);
        EXPECT_GT(si_measure(Pdm(hermitian_part(r), d, d), 1.0).value, 0.0);
    }
}

TEST(Adversarial, Errors) {
    const StochasticMatrix uniform(RealMatrix::Constant(3, 3, 1.0 / 3.0));
    EXPECT_THROW((void)adversarial_coherent_state(uniform), NoAsymmetricColumn);
    EXPECT_THROW((void)adversarial_coherent_state(uniform, 0, 1, 0, 0.5), NoAsymmetricColumn);
    EXPECT_FALSE(find_asymmetric_entry(uniform).has_value());
    const StochasticMatrix id(RealMatrix::Identity(2, 2));
    EXPECT_THROW((void)adversarial_coherent_state(id, 0, 1, 0, 1.0), InvalidArgument);
    EXPECT_THROW((void)adversarial_coherent_state(id, 0, 0, 0, 0.5), InvalidArgument);
    // Identical columns mean every input, coherent or not, gives R >= 0.
    Rng rng(23);
    for (int t = 0; t < 50; ++t) {
        const auto rho = random_density(3, rng);
        EXPECT_EQ(si_measure(pdm_closed_form(rho, build_ce_oi_channel(uniform)), 1.0).value, 0.0);
    }
}

TEST(Adversarial, RandomAsymmetricGivesPositiveSi) {
    Rng rng(29);
    for (int t = 0; t < 1000; ++t) {
        const Index d = 2 + t % 3;
        RealMatrix m(d, d);
        for (Index i = 0; i < d; ++i) {
            m.col(i) = random_probabilities(d, rng);
        }
        const StochasticMatrix a(m);
        const auto adv = adversarial_coherent_state(a, 0.01 + 0.98 * uniform01(rng));
        EXPECT_LT(adv.block_det, 0.0);
        const Matrix r = pdm_closed_form(adv.state, build_ce_oi_channel(a)).matrix();
        EXPECT_LT(oracle::min_eig(r), 0.0);
    }
}
