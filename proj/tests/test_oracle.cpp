#include <gtest/gtest.h>

#include <bose_expand/edgeworth.hpp>
#include <bose_expand/oracle.hpp>

#include "oracles.hpp"

using namespace bose_expand;

TEST(Lanczos, MatchesFirstPrinciplesSpectrum) {
    for (const auto& model : {benchmark_model(6, 1), benchmark_model(5, 2, 2.0),
                              make_model(1, 2, PairPotential::gaussian(3.0, 0.7), 4), make_model(1, 1, PairPotential::gaussian(2.0, 1.0), 5)}) {
        const ModelGroundState gs = model_ground_state(model);
        EXPECT_NEAR(gs.state.energy, oracle::lowest_eigenvalue(oracle::reference_hamiltonian(model)), 1e-9);
        EXPECT_LT(gs.state.residual, 1e-8);
        const SparseOperator h = assemble_hamiltonian(model, gs.basis);
        EXPECT_NEAR(dense_ground_state(h).energy, gs.state.energy, 1e-10);
    }
}

TEST(Lanczos, CondensateAmplitudeIsRealPositive) {
    const ModelGroundState gs = model_ground_state(benchmark_model(8, 1));
    const cplx c = gs.state.vector[static_cast<Eigen::Index>(gs.condensate_index)];
    EXPECT_GT(c.real(), 0.9);
    EXPECT_NEAR(c.imag(), 0.0, 1e-12);
}

TEST(Krylov, MatchesDenseExponential) {
    const CutoffModel model = benchmark_model(5, 2, 2.0);
    const OccupationBasis basis = enumerate_basis(model.modes, model.particles);
    const SparseOperator h = assemble_hamiltonian(model, basis);
    Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(basis.size()));
    psi[0] = 1.0;
    psi[3] = cplx(0.0, 0.5);
    psi.normalize();
    const EvolveResult r = evolve(h, psi, 2.0);
    EXPECT_LT((r.state - evolve_dense(h.dense(), psi, 2.0)).norm(), 1e-9);
    EXPECT_LT(r.norm_drift, 1e-12);
    EXPECT_LT(r.energy_drift, 1e-10);
    EXPECT_EQ(evolve(h, Eigen::VectorXcd::Zero(psi.size()), 1.0).state.norm(), 0.0);
}

TEST(Fits, RecoversExactPowerLaw) {
    std::vector<std::pair<double, double>> pts;
    for (int n : {4, 8, 16, 32}) pts.emplace_back(n, -3.0 * std::pow(n, -1.5));
    const ScalingReport r = fit_power_law(pts, -1.5, 0.1);
    EXPECT_NEAR(r.slope, -1.5, 1e-12);
    EXPECT_NEAR(r.prefactor, -3.0, 1e-10);
    EXPECT_LT(r.residual, 1e-12);
    EXPECT_TRUE(r.pass);
}

TEST(Fits, RejectsDegenerateInput) {
    EXPECT_THROW(fit_power_law({{1, 1}, {2, 0.5}, {3, 0.3}}, -1, 0.1), FitError);
    EXPECT_THROW(fit_power_law({{1, 1}, {2, -0.5}, {3, 0.3}, {4, 0.2}}, -1, 0.1), FitError);
    EXPECT_THROW(fit_power_law({{1, 1}, {2, 0.0}, {3, 0.3}, {4, 0.2}}, -1, 0.1), FitError);
    EXPECT_THROW(fit_inverse_powers({{1, 1}, {2, 2}}, 2), FitError);
}

TEST(Fits, ExtrapolatesPolynomialInInverseN) {
    std::vector<std::pair<double, double>> pts;
    for (int n = 10; n <= 40; n += 5) pts.emplace_back(n, 2.0 + 3.0 / n - 1.0 / (n * n));
    const Extrapolation e = extrapolate(pts, 3);
    EXPECT_NEAR(e.value, 2.0, 1e-10);
    EXPECT_NEAR(e.slope_coefficient, 3.0, 1e-7);
}

TEST(Statistics, GivensPathMatchesDenseDiagonalization) {
    const CutoffModel model = benchmark_model(6, 1, 2.0);
    const ModelGroundState gs = model_ground_state(model);
    const Eigen::MatrixXcd b = hopping_observable(model.modes);
    const SpectralSample fast = observable_statistics(gs.state.vector, gs.basis, b);
    const SpectralSample slow = observable_statistics_dense(gs.state.vector, gs.basis, b);
    double total = 0.0;
    for (double w : fast.weights) total += w;
    EXPECT_NEAR(total, 1.0, 1e-12);
    EXPECT_NEAR(fast.mean, slow.mean, 1e-10);
    const auto kf = fast.cumulants(), ks = slow.cumulants();
    for (int i = 0; i < 4; ++i) EXPECT_NEAR(kf[static_cast<std::size_t>(i)], ks[static_cast<std::size_t>(i)], 1e-9);
    EXPECT_NEAR(kf[0], 0.0, 1e-12);
}

TEST(Statistics, MomentsMatchSparseProducts) {
    const CutoffModel model = benchmark_model(5, 2, 2.0);
    const ModelGroundState gs = model_ground_state(model);
    const Eigen::MatrixXcd b = hopping_observable(model.modes);
    const SpectralSample s = observable_statistics(gs.state.vector, gs.basis, b);
    const double m1 = operator_moment(gs.state.vector, gs.basis, b, 1);
    const double m2 = operator_moment(gs.state.vector, gs.basis, b, 2);
    EXPECT_NEAR(s.mean, m1, 1e-10);
    EXPECT_NEAR(s.cumulants()[1] * model.particles, m2 - m1 * m1, 1e-9);
}

TEST(Statistics, RejectsNonHermitianObservable) {
    const CutoffModel model = benchmark_model(4, 1);
    const ModelGroundState gs = model_ground_state(model);
    Eigen::MatrixXcd b = Eigen::MatrixXcd::Zero(3, 3);
    b(0, 1) = 1.0;
    EXPECT_THROW(observable_statistics(gs.state.vector, gs.basis, b), ValidationError);
}

TEST(Density, HasUnitTraceAndIsHermitian) {
    const CutoffModel model = benchmark_model(6, 2, 2.0);
    const ModelGroundState gs = model_ground_state(model);
    const Eigen::MatrixXcd g = one_particle_density(gs.state.vector, gs.basis);
    EXPECT_NEAR(g.trace().real(), 1.0, 1e-12);
    EXPECT_LT((g - g.adjoint()).norm(), 1e-12);
    EXPECT_GT(g(static_cast<Eigen::Index>(model.modes.zero_index()), static_cast<Eigen::Index>(model.modes.zero_index())).real(), 0.9);
}

TEST(EnergyCurve, RejectsInfeasiblePointsUpFront) {
    EXPECT_THROW(energy_curve(benchmark_model(10, 3), {10, 400}), CapacityError);
}
