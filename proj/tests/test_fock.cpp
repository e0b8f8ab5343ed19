#include <gtest/gtest.h>

#include <random>

#include <bose_expand/fock.hpp>
#include <bose_expand/hartree.hpp>

#include "oracles.hpp"

using namespace bose_expand;

namespace {

Eigen::VectorXcd random_vector(std::size_t n, unsigned seed) {
    std::mt19937 rng(seed);
    std::normal_distribution<double> g;
    Eigen::VectorXcd v(static_cast<Eigen::Index>(n));
    for (auto& x : v) x = cplx(g(rng), g(rng));
    return v.normalized();
}

} // namespace

TEST(OccupationBasis, DimensionAndRanking) {
    const ModeSet modes = build_mode_set(1, 2);
    for (int n : {1, 4, 9}) {
        const OccupationBasis b = enumerate_basis(modes, n);
        EXPECT_EQ(static_cast<double>(b.size()), basis_dimension(5, n));
        for (std::size_t i = 0; i < b.size(); ++i) {
            int total = 0;
            for (std::size_t j = 0; j < 5; ++j) total += b.occupation(i)[j];
            EXPECT_EQ(total, n);
            EXPECT_EQ(b.index(b.occupation(i)), i);
        }
    }
}

TEST(OccupationBasis, BudgetIsEnforcedBeforeWork) {
    EXPECT_THROW(enumerate_basis(build_mode_set(1, 3), 60, 1000), CapacityError);
}

TEST(ExcitationBasis, SectorsAndPrefixCompatibility) {
    const ModeSet modes = build_mode_set(1, 2);
    const ExcitationBasis small(modes, 3), big(modes, 6);
    for (std::size_t i = 0; i < small.size(); ++i) {
        EXPECT_EQ(big.index(Occupation(small.occupation(i), small.occupation(i) + small.modes())), i);
        EXPECT_LE(small.sector(i), 3);
    }
    EXPECT_EQ(small.sector_end(0), 1u);
    EXPECT_EQ(small.sector_end(1) - small.sector_begin(1), 4u);
    for (std::size_t j = 0; j < big.modes(); ++j)
        EXPECT_EQ(modes[big.mode_index(big.negation(j))], -modes[big.mode_index(j)]);
}

TEST(Assembly, MatchesFirstPrinciplesFockOracle) {
    for (int n : {2, 3, 5}) {
        const CutoffModel m = benchmark_model(n, 1, 1.7);
        const SparseOperator h = assemble_hamiltonian(m);
        EXPECT_LT(h.hermiticity_deviation(), 1e-14);
        const Eigen::MatrixXd ref = oracle::reference_hamiltonian(m);
        ASSERT_EQ(static_cast<std::size_t>(ref.rows()), h.size());
        const Eigen::VectorXd a = oracle::sorted_spectrum(ref);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h.dense());
        EXPECT_LT((a - es.eigenvalues()).cwiseAbs().maxCoeff(), 1e-11) << "N=" << n;
    }
    const CutoffModel g = make_model(1, 2, PairPotential::gaussian(1.0, 0.3), 2);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(assemble_hamiltonian(g).dense());
    EXPECT_LT((oracle::sorted_spectrum(oracle::reference_hamiltonian(g)) - es.eigenvalues()).cwiseAbs().maxCoeff(), 1e-11);
}

TEST(Assembly, HandComputedTwoBodyMatrix) {
    // N = 2 on {0, +-2pi} with v_hat = 1: the condensate pair couples only to |1,0,1>.
    const CutoffModel m = benchmark_model(2, 1, 1.0);
    const OccupationBasis b = enumerate_basis(m.modes, 2);
    const SparseOperator h = assemble_hamiltonian(m, b);
    const std::size_t cond = b.index(Occupation{0, 2, 0});
    const std::size_t pair = b.index(Occupation{1, 0, 1});
    // <0,2,0|H|0,2,0> = (1/2) v_hat(0) * 2 = 1
    EXPECT_NEAR(h.at(cond, cond).real(), 1.0, 1e-14);
    // <1,0,1|H|0,2,0>: a_0 a_0 gives sqrt(2), the transfers k = +-2pi both land on |1,0,1>, prefactor 1/2
    EXPECT_NEAR(h.at(pair, cond).real(), std::sqrt(2.0), 1e-14);
    // diagonal of |1,0,1>: kinetic 2 (2pi)^2; two direct and two exchange terms at prefactor 1/2
    EXPECT_NEAR(h.at(pair, pair).real(), 2.0 * four_pi_sq + 2.0, 1e-12);
}

TEST(ExcitationMap, RoundTripIsIdentity) {
    const CutoffModel m = benchmark_model(7, 2);
    const OccupationBasis b = enumerate_basis(m.modes, 7);
    const HartreeState hs = minimize_hartree(m);
    const Eigen::VectorXcd psi = random_vector(b.size(), 3);
    const Eigen::VectorXcd chi = excitation_decompose(psi, b, hs, m.modes);
    EXPECT_NEAR(chi.norm(), 1.0, 1e-14);
    const Eigen::VectorXcd back = excitation_reconstruct(chi, ExcitationBasis(m.modes, 7), b, m.modes);
    EXPECT_LT((back - psi).norm(), 1e-13);
}

TEST(ExcitationMap, RejectsSectorsAboveN) {
    const CutoffModel m = benchmark_model(3, 1);
    const OccupationBasis b = enumerate_basis(m.modes, 3);
    const ExcitationBasis ex(m.modes, 5);
    Eigen::VectorXcd chi = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(ex.size()));
    chi[static_cast<Eigen::Index>(ex.sector_begin(4))] = 1.0;
    EXPECT_THROW(excitation_reconstruct(chi, ex, b, m.modes), TruncationError);
}

TEST(ExcitationMap, InhomogeneousCondensateUnsupported) {
    const CutoffModel m = benchmark_model(3, 1);
    const OccupationBasis b = enumerate_basis(m.modes, 3);
    HartreeState hs = minimize_hartree(m);
    hs.phi = Eigen::VectorXcd::Constant(3, 1.0 / std::sqrt(3.0));
    EXPECT_THROW(excitation_decompose(Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(b.size())), b, hs, m.modes),
                 UnsupportedError);
}

TEST(ExcitationHamiltonian, ConjugatesTheNBodyHamiltonian) {
    const CutoffModel m = benchmark_model(6, 2);
    const OccupationBasis b = enumerate_basis(m.modes, 6);
    const HartreeState hs = minimize_hartree(m);
    const ExcitationBasis ex(m.modes, 6);
    const SparseOperator h = assemble_hamiltonian(m, b);
    const Eigen::VectorXcd psi = random_vector(b.size(), 5);
    const Eigen::VectorXcd lhs = excitation_decompose(h.apply(psi) - 6 * hs.energy * psi, b, hs, m.modes, ex);
    const Eigen::VectorXcd rhs = apply_excitation_hamiltonian(m, hs.energy, ex, excitation_decompose(psi, b, hs, m.modes, ex), ex);
    EXPECT_LT((lhs - rhs).norm(), 1e-11);
}

TEST(LadderAlgebra, CanonicalCommutator) {
    const OperatorPoly p = simplify({{1.0, {an(0), cr(0)}}});
    ASSERT_EQ(p.size(), 2u);
    EXPECT_TRUE(p[0].ops.empty());
    EXPECT_NEAR(p[0].coefficient.real(), 1.0, 0);
    EXPECT_EQ(p[1].ops, (std::vector<LadderOp>{cr(0), an(0)}));
    const OperatorPoly q = simplify({{1.0, {an(0), cr(1)}}});
    ASSERT_EQ(q.size(), 1u);
    for (const auto& mono : simplify({{2.0, {an(1), an(0), cr(0), cr(1)}}})) EXPECT_TRUE(is_normal_ordered(mono.ops));
}

TEST(LadderAlgebra, ApplyAgreesWithRealizeAndAdjoint) {
    const ModeSet modes = build_mode_set(1, 2);
    const ExcitationBasis ex(modes, 5);
    const OperatorPoly p = simplify({{cplx(0.3, 0.1), {cr(0), cr(3), an(1)}}, {cplx(-0.7, 0.0), {an(2), an(2)}}, {1.1, {cr(1), an(1)}}});
    const SparseOperator r = realize(p, ex, false);
    const Eigen::VectorXcd x = random_vector(ex.size(), 9), y = random_vector(ex.size(), 10);
    // components leaving the basis are dropped by both, so compare on vectors in the lower sectors
    Eigen::VectorXcd xs = x;
    xs.tail(static_cast<Eigen::Index>(ex.size() - ex.sector_end(2))).setZero();
    EXPECT_LT((apply(p, ex, xs) - r.apply(xs)).norm(), 1e-13);
    Eigen::VectorXcd ys = y;
    ys.tail(static_cast<Eigen::Index>(ex.size() - ex.sector_end(2))).setZero();
    const cplx lhs = ys.dot(apply(p, ex, xs));
    const cplx rhs = apply(adjoint(p), ex, ys).dot(xs);
    EXPECT_LT(std::abs(lhs - rhs), 1e-13);
}

TEST(LadderAlgebra, NumberOperatorCountsSector) {
    const ModeSet modes = build_mode_set(1, 1);
    const ExcitationBasis ex(modes, 4);
    const Eigen::VectorXcd x = random_vector(ex.size(), 2);
    const Eigen::VectorXcd nx = apply(number_operator(ex.modes()), ex, x);
    for (std::size_t i = 0; i < ex.size(); ++i)
        EXPECT_NEAR(std::abs(nx[static_cast<Eigen::Index>(i)] - static_cast<double>(ex.sector(i)) * x[static_cast<Eigen::Index>(i)]), 0.0, 1e-14);
}

TEST(SecondQuantize, OneBodyOperatorMatchesDefinition) {
    const CutoffModel m = benchmark_model(3, 1);
    const OccupationBasis b = enumerate_basis(m.modes, 3);
    Eigen::MatrixXcd one = Eigen::MatrixXcd::Zero(3, 3);
    one(0, 0) = 2.0;
    one(2, 2) = -1.0;
    const SparseOperator op = second_quantize(one, b);
    for (std::size_t i = 0; i < b.size(); ++i)
        EXPECT_NEAR(op.at(i, i).real(), 2.0 * b.occupation(i)[0] - b.occupation(i)[2], 1e-14);
}
