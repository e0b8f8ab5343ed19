#include <gtest/gtest.h>

#include <bose_expand/dynamics.hpp>

#include "oracles.hpp"

using namespace bose_expand;

namespace {

Eigen::VectorXcd mixed_condensate(std::size_t m) {
    Eigen::VectorXcd phi(static_cast<Eigen::Index>(m));
    for (Eigen::Index i = 0; i < phi.size(); ++i) phi[i] = cplx(1.0 + 0.3 * i, 0.2 * (i % 2));
    return phi.normalized();
}

} // namespace

TEST(HartreeFlow, FreeEvolutionIsAPhase) {
    const CutoffModel model = make_model(1, 2, PairPotential::constant(0.0), 10);
    const Eigen::VectorXcd phi0 = mixed_condensate(model.modes.size());
    HartreeFlowOptions opt;
    opt.gauge = false;
    opt.dt = 1e-2;
    const CondensateTrajectory tr = evolve_hartree(phi0, model, 0.7, opt);
    for (std::size_t i = 0; i < model.modes.size(); ++i) {
        const cplx expected = std::exp(cplx(0.0, -kinetic(model.modes[i]) * 0.7)) * phi0[static_cast<Eigen::Index>(i)];
        EXPECT_LT(std::abs(tr.phi.back()[static_cast<Eigen::Index>(i)] - expected), 1e-11);
    }
}

TEST(HartreeFlow, HomogeneousCondensateIsStationaryInTheGauge) {
    const CutoffModel model = benchmark_model(10, 2, 2.0);
    Eigen::VectorXcd phi0 = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(model.modes.size()));
    phi0[static_cast<Eigen::Index>(model.modes.zero_index())] = 1.0;
    const CondensateTrajectory tr = evolve_hartree(phi0, model, 0.5);
    EXPECT_LT((tr.phi.back() - phi0).norm(), 1e-10);
    EXPECT_NEAR(tr.mu.back(), 2.0, 1e-10);
}

TEST(HartreeFlow, SecondOrderConvergenceAndConservation) {
    const CutoffModel model = make_model(1, 1, PairPotential::gaussian(4.0, 0.8), 10);
    const Eigen::VectorXcd phi0 = mixed_condensate(model.modes.size());
    EXPECT_GE(hartree_convergence_order(phi0, model, 0.5, 0.02), 1.9);
    HartreeFlowOptions opt;
    opt.dt = 1e-3;
    opt.record_every = 10;
    const CondensateTrajectory tr = evolve_hartree(phi0, model, 1.0, opt);
    EXPECT_LT(tr.mass_drift_rate(), 1e-12);
    EXPECT_LT(tr.energy_drift_rate(), 1e-5);
}

TEST(HartreeFlow, RejectsBadInput) {
    const CutoffModel model = benchmark_model(10, 1);
    EXPECT_THROW(evolve_hartree(Eigen::VectorXcd::Ones(3), model, 1.0), ValidationError);
    EXPECT_THROW(evolve_hartree(Eigen::VectorXcd::Ones(2).normalized(), model, 1.0), ValidationError);
}

TEST(BogoliubovFlow, StationaryWithoutQuench) {
    const StaticExpansion s = expand_static(benchmark_model(10, 2, 3.0));
    const ModePropagator prop = evolve_bogoliubov(s.map, s.h0, 0.3);
    EXPECT_LT(prop.symplectic_defect, 1e-10);
    for (const auto& row : prop.uv)
        for (std::size_t j = 0; j < row.size(); ++j) {
            EXPECT_NEAR(std::abs(row[j].first), s.map.u[j], 1e-10);
            EXPECT_NEAR(std::abs(row[j].second), std::abs(s.map.v[j]), 1e-10);
        }
}

TEST(BogoliubovFlow, QuenchFromFreeGasMatchesPairOracle) {
    const CutoffModel free = make_model(1, 1, PairPotential::constant(0.0), 10);
    const StaticExpansion before = expand_static(free);
    const StaticExpansion after = expand_static(free.with_potential(PairPotential::constant(20.0)));
    const double t = 0.3;
    const ModePropagator prop = evolve_bogoliubov(before.map, after.h0, t);
    const double A = after.h0.A[0], B = after.h0.B[0];
    const int cap = 30;
    const Eigen::MatrixXd h = oracle::pair_hamiltonian(A, B, cap);
    Eigen::VectorXcd vac = Eigen::VectorXcd::Zero(h.rows());
    vac[0] = 1.0;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
    Eigen::VectorXcd phase(h.rows());
    for (Eigen::Index i = 0; i < h.rows(); ++i) phase[i] = std::exp(cplx(0.0, -es.eigenvalues()[i] * t));
    const Eigen::VectorXcd psi = es.eigenvectors().cast<cplx>() * (phase.asDiagonal() * (es.eigenvectors().transpose().cast<cplx>() * vac));
    const oracle::ProductFock fock(2, cap);
    double occupation = 0.0;
    for (Eigen::Index s = 0; s < psi.size(); ++s) occupation += std::norm(psi[s]) * fock.occupation(s, 0);
    EXPECT_NEAR(std::norm(prop.U.back()[0](0, 1)), occupation, 1e-9);
    EXPECT_GT(occupation, 1e-3);
}

TEST(ChiOneFlow, NoQuenchOnlyRotatesThePhase) {
    const CutoffModel model = benchmark_model(10, 2, 3.0);
    const double t = 0.2;
    const ExcitationTrajectory tr = excitation_trajectory(model, {model.potential, t});
    const StaticExpansion s = expand_static(model);
    const Eigen::VectorXcd static_chi1 = chi1_vector(s.chi1, s.map, tr.basis, tr.chi0_initial, tr.basis);
    const cplx phase = std::exp(cplx(0.0, -s.map.E0 * t));
    EXPECT_LT((tr.chi1 - phase * static_chi1).norm(), 1e-7 * static_chi1.norm());
    EXPECT_LT((tr.chi0 - phase * tr.chi0_initial).norm(), 1e-9);
}

TEST(ChiOneFlow, BothRoutesAgreeAfterAQuench) {
    const CutoffModel model = benchmark_model(10, 2, 1.0);
    const ExcitationTrajectory tr = excitation_trajectory(model, {PairPotential::constant(2.0), 0.25});
    EXPECT_LT((tr.chi1 - tr.chi1_direct).norm(), 1e-9 * tr.chi1.norm());
    EXPECT_LT(std::abs(tr.chi0.dot(tr.chi1)), 1e-14);
    EXPECT_GT(tr.chi1_dynamic.coefficient_norm(), 0.0);
    for (const auto& mono : tr.chi1_dynamic.generator)
        EXPECT_EQ(monomial_momentum(mono, model.modes), (Momentum{0, 0, 0}));
    EXPECT_LT(tr.propagator.symplectic_defect, 1e-9);
}
