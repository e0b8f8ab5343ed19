#include <gtest/gtest.h>

#include <random>

#include <bose_expand/hartree.hpp>

using namespace bose_expand;

namespace {

Eigen::VectorXcd random_state(std::size_t m, unsigned seed) {
    std::mt19937 rng(seed);
    std::normal_distribution<double> g;
    Eigen::VectorXcd v(static_cast<Eigen::Index>(m));
    for (auto& x : v) x = cplx(g(rng), g(rng));
    return v.normalized();
}

} // namespace

TEST(HartreeTorus, HomogeneousMinimizer) {
    for (int k : {1, 2}) {
        const CutoffModel m = benchmark_model(10, k, 1.3);
        const HartreeState h = minimize_hartree(m);
        EXPECT_TRUE(h.homogeneous(m.modes));
        EXPECT_NEAR(h.energy, 0.65, 1e-15);
        EXPECT_NEAR(h.chemical_potential, 1.3, 1e-15);
        EXPECT_NEAR(h.residual, 0.0, 1e-15);
    }
    const CutoffModel g = make_model(1, 2, PairPotential::gaussian(1.0, 0.3), 10);
    EXPECT_NEAR(minimize_hartree(g).energy, 0.5 * g.vhat({0, 0, 0}), 1e-14);
}

TEST(HartreeTorus, GradientMatchesFiniteDifferences) {
    const CutoffModel m = make_model(1, 2, PairPotential::gaussian(2.0, 0.25), 10);
    const Eigen::VectorXcd phi = random_state(m.modes.size(), 7);
    const Eigen::VectorXcd g = hartree_gradient(phi, m);
    const Eigen::VectorXcd dir = random_state(m.modes.size(), 8);
    const double h = 1e-5;
    const double fd = (hartree_energy_unchecked(phi + h * dir, m) - hartree_energy_unchecked(phi - h * dir, m)) / (2 * h);
    EXPECT_NEAR(fd, 2.0 * g.dot(dir).real(), 1e-7 * std::max(1.0, std::abs(fd)));
}

TEST(HartreeTorus, HomogeneousIsBelowRandomTrials) {
    const CutoffModel m = make_model(1, 2, PairPotential::gaussian(2.0, 0.25), 10);
    const double e = minimize_hartree(m).energy;
    for (unsigned s = 0; s < 20; ++s) EXPECT_GE(hartree_energy(random_state(m.modes.size(), s), m), e - 1e-12);
}

TEST(HartreeTorus, EnergyRequiresNormalization) {
    const CutoffModel m = benchmark_model();
    Eigen::VectorXcd phi = Eigen::VectorXcd::Zero(3);
    phi[1] = 2.0;
    EXPECT_THROW(hartree_energy(phi, m), ValidationError);
}

TEST(HartreeTrap, HarmonicOscillatorGroundEnergy) {
    const TrapGrid grid = TrapGrid::harmonic(1, 6.0, 1601);
    HartreeOptions opt;
    opt.resolution_probe = false;
    const HartreeState h = minimize_hartree(grid, PairPotential::constant(0.0), opt);
    EXPECT_NEAR(h.energy, 1.0, 2e-5);
    EXPECT_NEAR(h.chemical_potential, 1.0, 2e-5);
    EXPECT_LT(h.residual, 1e-6);
}

TEST(HartreeTrap, ContactInteractionRaisesEnergyBelowTrial) {
    const TrapGrid grid = TrapGrid::harmonic(1, 6.0, 801);
    HartreeOptions opt;
    opt.resolution_probe = false;
    const HartreeState free = minimize_hartree(grid, PairPotential::constant(0.0), opt);
    const HartreeState h = minimize_hartree(grid, PairPotential::constant(2.0), opt);
    EXPECT_GT(h.energy, free.energy);
    EXPECT_LT(h.energy, uniform_trial_energy(grid, PairPotential::constant(2.0)));
    // mu = e_H + interaction part for the Hartree functional
    EXPECT_GT(h.chemical_potential, h.energy);
}

TEST(HartreeTrap, CoarseGridWarns) {
    const TrapGrid grid = TrapGrid::harmonic(1, 6.0, 41);
    const HartreeState h = minimize_hartree(grid, PairPotential::constant(0.0));
    EXPECT_FALSE(h.warnings.empty());
}

TEST(HartreeTrap, TwoDimensionalOscillator) {
    const TrapGrid grid = TrapGrid::harmonic(2, 5.0, 81);
    HartreeOptions opt;
    opt.resolution_probe = false;
    EXPECT_NEAR(minimize_hartree(grid, PairPotential::constant(0.0), opt).energy, 2.0, 5e-3);
}
