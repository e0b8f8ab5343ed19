#ifndef BOSE_EXPAND_ORACLE_HPP
#define BOSE_EXPAND_ORACLE_HPP

// Exact-diagonalization reference: Lanczos ground states, energy curves,
// power-law fits, the exact distribution of a symmetrized one-body observable,
// reduced densities and Krylov time evolution.

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>
#include <algorithm>
#include <cmath>
#include <limits>
#include <complex>
#include <map>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "fock.hpp"
#include "model.hpp"
#include "parallel.hpp"

namespace bose_expand {

struct GroundState {
    double energy = 0.0;
    Eigen::VectorXcd vector;
    double residual = 0.0;
    int iterations = 0;
};

struct LanczosOptions {
    double tol = 1e-10;
    int max_iter = 3000;
    int krylov_dim = 120;
    std::size_t start_index = 0;
    unsigned seed = 12345;
    double perturbation = 1e-3;
};

/// Fixes the global phase so that component `index` is real and positive (largest component when it vanishes).
inline void align_phase(Eigen::VectorXcd& v, std::size_t index) {
    Eigen::Index i = static_cast<Eigen::Index>(index);
    if (std::abs(v[i]) < 1e-300) v.cwiseAbs().maxCoeff(&i);
    v *= std::conj(v[i]) / std::abs(v[i]);
}

/// Rotates `v` by a global phase so that <reference, v> is real and non-negative.
inline void align_phase_to(Eigen::VectorXcd& v, const Eigen::VectorXcd& reference) {
    const cplx overlap = reference.dot(v);
    if (std::abs(overlap) > 0.0) v *= std::conj(overlap) / std::abs(overlap);
}

/// Lanczos with full reorthogonalization and explicit restarts from the current Ritz vector.
inline GroundState ground_state(const SparseOperator& h, const LanczosOptions& opt = {}) {
    if (!h.hermitian()) throw ValidationError("ground_state needs a hermitian operator");
    const auto n = static_cast<Eigen::Index>(h.size());
    GroundState gs;
    if (n == 0) throw ValidationError("empty operator");
    if (n == 1) {
        gs.energy = h.at(0, 0).real();
        gs.vector = Eigen::VectorXcd::Ones(1);
        return gs;
    }
    std::mt19937_64 rng(opt.seed);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    Eigen::VectorXcd x(n);
    for (Eigen::Index i = 0; i < n; ++i) x[i] = opt.perturbation * uni(rng);
    x[static_cast<Eigen::Index>(opt.start_index)] += 1.0;
    x.normalize();

    const int m_max = static_cast<int>(std::min<Eigen::Index>(opt.krylov_dim, n));
    int total = 0;
    double residual = 0.0;
    while (true) {
        Eigen::MatrixXcd q(n, m_max);
        std::vector<double> alpha, beta;
        q.col(0) = x;
        int m = 0;
        Eigen::VectorXd ritz;
        Eigen::MatrixXd s;
        for (int j = 0; j < m_max; ++j) {
            Eigen::VectorXcd w = h.apply(q.col(j));
            ++total;
            alpha.push_back(q.col(j).dot(w).real());
            // two passes of classical Gram-Schmidt against every stored vector
            for (int pass = 0; pass < 2; ++pass) w -= q.leftCols(j + 1) * (q.leftCols(j + 1).adjoint() * w);
            const double b = w.norm();
            m = j + 1;
            Eigen::MatrixXd t = Eigen::MatrixXd::Zero(m, m);
            for (int i = 0; i < m; ++i) t(i, i) = alpha[static_cast<std::size_t>(i)];
            for (int i = 0; i + 1 < m; ++i) t(i, i + 1) = t(i + 1, i) = beta[static_cast<std::size_t>(i)];
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t);
            ritz = es.eigenvalues();
            s = es.eigenvectors();
            const double estimate = b * std::abs(s(m - 1, 0));
            if (estimate < 0.1 * opt.tol || b < 1e-14 || j + 1 == m_max || total >= opt.max_iter) break;
            beta.push_back(b);
            q.col(j + 1) = w / b;
        }
        x = q.leftCols(m) * s.col(0).cast<cplx>();
        x.normalize();
        gs.energy = ritz[0];
        residual = (h.apply(x) - gs.energy * x).norm();
        ++total;
        if (residual <= opt.tol) break;
        if (total >= opt.max_iter) throw ConvergenceError("Lanczos hit the iteration limit", residual);
    }
    gs.energy = x.dot(h.apply(x)).real();
    gs.vector = x;
    gs.residual = residual;
    gs.iterations = total;
    align_phase(gs.vector, opt.start_index);
    return gs;
}

/// Dense reference for small operators.
inline GroundState dense_ground_state(const SparseOperator& h) {
    const Eigen::MatrixXcd m = h.dense();
    GroundState gs;
    if (m.imag().cwiseAbs().maxCoeff() == 0.0) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m.real());
        gs.energy = es.eigenvalues()[0];
        gs.vector = es.eigenvectors().col(0).cast<cplx>();
    } else {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m);
        gs.energy = es.eigenvalues()[0];
        gs.vector = es.eigenvectors().col(0);
    }
    gs.residual = (h.apply(gs.vector) - gs.energy * gs.vector).norm();
    return gs;
}

/// Ground state of H_N with the phase aligned to the condensate basis state.
struct ModelGroundState {
    OccupationBasis basis;
    GroundState state;
    std::size_t condensate_index = 0;
};

inline ModelGroundState model_ground_state(const CutoffModel& model, LanczosOptions opt = {},
                                           std::size_t budget = default_dimension_budget) {
    ModelGroundState out;
    out.basis = enumerate_basis(model.modes, model.particles, budget);
    Occupation cond(model.modes.size(), 0);
    cond[model.modes.zero_index()] = static_cast<std::uint16_t>(model.particles);
    out.condensate_index = out.basis.index(cond);
    opt.start_index = out.condensate_index;
    out.state = ground_state(assemble_hamiltonian(model, out.basis), opt);
    return out;
}

struct EnergyPoint {
    int N = 0;
    double energy = 0.0;
    std::size_t dimension = 0;
    double residual = 0.0;
};

/// E(N) for the template model at each N (coupling 1/(N-1)); infeasible N raise CapacityError before any work.
inline std::vector<EnergyPoint> energy_curve(const CutoffModel& model, const std::vector<int>& ns,
                                             const LanczosOptions& opt = {}, int workers = 1,
                                             std::size_t budget = default_dimension_budget) {
    for (int n : ns)
        if (basis_dimension(model.modes.size(), n) > static_cast<double>(budget))
            throw CapacityError("energy curve point N=" + std::to_string(n) + " exceeds the dimension budget",
                                basis_dimension(model.modes.size(), n), static_cast<double>(budget));
    std::vector<EnergyPoint> out(ns.size());
    parallel_for(ns.size(), workers, [&](std::size_t i) {
        const auto gs = model_ground_state(model.with_particles(ns[i]), opt, budget);
        out[i] = {ns[i], gs.state.energy, gs.basis.size(), gs.state.residual};
    });
    return out;
}

// ---------------------------------------------------------------------------
// fits

struct ScalingReport {
    std::vector<std::pair<double, double>> points;
    double slope = 0.0;
    double prefactor = 0.0;
    /// max |fit / value - 1| over the window.
    double residual = 0.0;
    double expected_slope = 0.0;
    double band = 0.0;
    bool pass = false;
};

/// Least squares of log|value| against log N.
inline ScalingReport fit_power_law(const std::vector<std::pair<double, double>>& points, double expected_slope,
                                   double band) {
    if (points.size() < 4) throw FitError("power-law fit needs at least 4 points");
    const bool positive = points.front().second > 0.0;
    for (const auto& [n, v] : points) {
        if (!(n > 0.0)) throw FitError("power-law fit needs positive abscissae");
        if (v == 0.0 || !std::isfinite(v)) throw FitError("power-law fit needs nonzero finite values");
        if ((v > 0.0) != positive) throw FitError("values change sign; fit the absolute value instead");
    }
    const auto k = static_cast<Eigen::Index>(points.size());
    Eigen::MatrixXd a(k, 2);
    Eigen::VectorXd y(k);
    for (Eigen::Index i = 0; i < k; ++i) {
        a(i, 0) = 1.0;
        a(i, 1) = std::log(points[static_cast<std::size_t>(i)].first);
        y[i] = std::log(std::abs(points[static_cast<std::size_t>(i)].second));
    }
    const Eigen::Vector2d c = a.colPivHouseholderQr().solve(y);
    ScalingReport r;
    r.points = points;
    r.slope = c[1];
    r.prefactor = (positive ? 1.0 : -1.0) * std::exp(c[0]);
    for (const auto& [n, v] : points)
        r.residual = std::max(r.residual, std::abs(r.prefactor * std::pow(n, r.slope) / v - 1.0));
    r.expected_slope = expected_slope;
    r.band = band;
    r.pass = std::abs(r.slope - expected_slope) <= band;
    return r;
}

struct PolynomialFit {
    Eigen::VectorXd coefficients; // value ~ sum_i c_i x^i
    double max_residual = 0.0;
};

/// Least-squares polynomial in x = 1/N.
inline PolynomialFit fit_inverse_powers(const std::vector<std::pair<double, double>>& points, int degree) {
    if (static_cast<int>(points.size()) < degree + 1) throw FitError("not enough points for the requested degree");
    const auto k = static_cast<Eigen::Index>(points.size());
    Eigen::MatrixXd a(k, degree + 1);
    Eigen::VectorXd y(k);
    for (Eigen::Index i = 0; i < k; ++i) {
        const double x = 1.0 / points[static_cast<std::size_t>(i)].first;
        for (int d = 0; d <= degree; ++d) a(i, d) = std::pow(x, d);
        y[i] = points[static_cast<std::size_t>(i)].second;
    }
    PolynomialFit f;
    f.coefficients = a.colPivHouseholderQr().solve(y);
    f.max_residual = (a * f.coefficients - y).cwiseAbs().maxCoeff();
    return f;
}

struct Extrapolation {
    double value = 0.0;
    double error = 0.0;
    /// Leading 1/N coefficient of the highest-degree fit.
    double slope_coefficient = 0.0;
};

/// N -> infinity limit from polynomial fits in 1/N of degree `degree` and `degree - 1`; the error bar is their
/// spread plus twice the largest fit residual.
inline Extrapolation extrapolate(const std::vector<std::pair<double, double>>& points, int degree = 3) {
    const PolynomialFit hi = fit_inverse_powers(points, degree);
    const PolynomialFit lo = fit_inverse_powers(points, degree - 1);
    Extrapolation e;
    e.value = hi.coefficients[0];
    e.error = std::abs(hi.coefficients[0] - lo.coefficients[0]) + 2.0 * hi.max_residual;
    e.slope_coefficient = degree >= 1 ? hi.coefficients[1] : 0.0;
    return e;
}

// ---------------------------------------------------------------------------
// observable statistics

struct SpectralSample {
    /// Sorted distinct values of B_N with their probabilities.
    std::vector<double> values;
    std::vector<double> weights;
    /// E[dGamma(B)] subtracted before scaling.
    double mean = 0.0;
    int particles = 0;

    double moment(int k) const {
        double m = 0.0;
        for (std::size_t i = 0; i < values.size(); ++i) m += weights[i] * std::pow(values[i], k);
        return m;
    }
    /// Cumulants kappa_1..kappa_4 of B_N.
    std::array<double, 4> cumulants() const {
        const double m1 = moment(1), m2 = moment(2), m3 = moment(3), m4 = moment(4);
        const double k2 = m2 - m1 * m1;
        const double k3 = m3 - 3 * m2 * m1 + 2 * m1 * m1 * m1;
        const double k4 = m4 - 4 * m3 * m1 - 3 * m2 * m2 + 12 * m2 * m1 * m1 - 6 * m1 * m1 * m1 * m1;
        return {m1, k2, k3, k4};
    }
    cplx characteristic(double k) const {
        cplx z = 0.0;
        for (std::size_t i = 0; i < values.size(); ++i) z += weights[i] * std::exp(cplx(0.0, k * values[i]));
        return z;
    }
    template <class F>
    double expectation(F&& g) const {
        double z = 0.0;
        for (std::size_t i = 0; i < values.size(); ++i) z += weights[i] * g(values[i]);
        return z;
    }
};

namespace detail {

inline void require_hermitian_mode_matrix(const Eigen::MatrixXcd& b) {
    if (b.rows() != b.cols()) throw ValidationError("observable must be a square mode-space matrix");
    if ((b - b.adjoint()).cwiseAbs().maxCoeff() > 1e-12) throw ValidationError("observable is not hermitian");
}

/// exp(theta (a*_j a_i - a*_i a_j)) on the block |n_i = s - t, n_j = t>, t = 0..s.
inline Eigen::MatrixXd two_mode_rotation(int s, double theta) {
    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(s + 1, s + 1);
    for (int t = 0; t < s; ++t) {
        const double w = std::sqrt(static_cast<double>((s - t) * (t + 1)));
        g(t + 1, t) = w;
        g(t, t + 1) = -w;
    }
    return (theta * g).exp();
}

/// Applies Gamma(R) for the plane rotation R = exp(theta (E_ji - E_ij)) to an N-body vector.
inline void apply_givens(const OccupationBasis& basis, std::size_t i, std::size_t j, double theta,
                         Eigen::VectorXcd& psi) {
    if (theta == 0.0) return;
    const int n = basis.particles();
    std::vector<Eigen::MatrixXd> cache(static_cast<std::size_t>(n) + 1);
    Occupation occ(basis.modes());
    std::vector<Eigen::Index> idx;
    Eigen::VectorXcd block;
    for (std::size_t r = 0; r < basis.size(); ++r) {
        const std::uint16_t* o = basis.occupation(r);
        if (o[j] != 0) continue;
        const int s = o[i];
        if (s == 0) continue;
        if (cache[static_cast<std::size_t>(s)].size() == 0) cache[static_cast<std::size_t>(s)] = two_mode_rotation(s, theta);
        std::copy(o, o + basis.modes(), occ.begin());
        idx.resize(static_cast<std::size_t>(s) + 1);
        block.resize(s + 1);
        for (int t = 0; t <= s; ++t) {
            occ[i] = static_cast<std::uint16_t>(s - t);
            occ[j] = static_cast<std::uint16_t>(t);
            idx[static_cast<std::size_t>(t)] = static_cast<Eigen::Index>(basis.index(occ));
            block[t] = psi[idx[static_cast<std::size_t>(t)]];
        }
        const Eigen::VectorXcd rotated = cache[static_cast<std::size_t>(s)].cast<cplx>() * block;
        for (int t = 0; t <= s; ++t) psi[idx[static_cast<std::size_t>(t)]] = rotated[t];
    }
}

inline SpectralSample collect(std::vector<std::pair<double, double>> raw, double mean, int particles) {
    std::sort(raw.begin(), raw.end());
    SpectralSample out;
    out.mean = mean;
    out.particles = particles;
    const double scale = 1.0 / std::sqrt(static_cast<double>(particles));
    double total = 0.0;
    for (const auto& [value, w] : raw) total += w;
    for (const auto& [value, w] : raw) {
        const double x = (value - mean) * scale;
        if (!out.values.empty() && std::abs(x - out.values.back()) <= 1e-10 * std::max(1.0, std::abs(x)))
            out.weights.back() += w / total;
        else {
            out.values.push_back(x);
            out.weights.push_back(w / total);
        }
    }
    return out;
}

} // namespace detail

inline SpectralSample observable_statistics_dense(const Eigen::VectorXcd& psi, const OccupationBasis& basis,
                                                  const Eigen::MatrixXcd& b);

/// Exact distribution of B_N = N^{-1/2} (dGamma(B) - E[dGamma(B)]) in `psi`.
/// Real symmetric B is handled by transforming psi into the eigenbasis of B with
/// two-mode Givens rotations; complex B falls back to dense diagonalization of dGamma(B).
inline SpectralSample observable_statistics(const Eigen::VectorXcd& psi, const OccupationBasis& basis,
                                            const Eigen::MatrixXcd& b, std::size_t dense_limit = 4000) {
    detail::require_hermitian_mode_matrix(b);
    if (static_cast<std::size_t>(b.rows()) != basis.modes()) throw ValidationError("observable size does not match the mode set");
    const int n = basis.particles();
    std::vector<std::pair<double, double>> raw;
    if (b.imag().cwiseAbs().maxCoeff() == 0.0) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(b.real());
        const Eigen::VectorXd lambda = es.eigenvalues();
        Eigen::MatrixXd q = es.eigenvectors().transpose(); // Gamma(W^T) psi gives eigen-mode amplitudes
        const auto m = q.rows();
        Eigen::VectorXcd x = psi / psi.norm();
        // q = G_1 ... G_k D; Gamma(q) psi = Gamma(G_1) ... Gamma(G_k) Gamma(D) psi
        std::vector<std::tuple<Eigen::Index, Eigen::Index, double>> rotations;
        for (Eigen::Index col = 0; col + 1 < m; ++col)
            for (Eigen::Index row = m - 1; row > col; --row) {
                const double xv = q(row - 1, col), yv = q(row, col);
                if (yv == 0.0) continue;
                const double theta = std::atan2(yv, xv);
                const double c = std::cos(theta), s = std::sin(theta);
                for (Eigen::Index k = 0; k < m; ++k) {
                    const double a = q(row - 1, k), bb = q(row, k);
                    q(row - 1, k) = c * a + s * bb;
                    q(row, k) = -s * a + c * bb;
                }
                rotations.emplace_back(row - 1, row, theta);
            }
        for (std::size_t r = 0; r < basis.size(); ++r) {
            const std::uint16_t* o = basis.occupation(r);
            int parity = 0;
            for (Eigen::Index k = 0; k < m; ++k)
                if (q(k, k) < 0.0) parity += o[k];
            if (parity % 2) x[static_cast<Eigen::Index>(r)] = -x[static_cast<Eigen::Index>(r)];
        }
        for (auto it = rotations.rbegin(); it != rotations.rend(); ++it)
            detail::apply_givens(basis, static_cast<std::size_t>(std::get<0>(*it)),
                                 static_cast<std::size_t>(std::get<1>(*it)), std::get<2>(*it), x);
        double mean = 0.0;
        raw.reserve(basis.size());
        for (std::size_t r = 0; r < basis.size(); ++r) {
            const std::uint16_t* o = basis.occupation(r);
            double value = 0.0;
            for (Eigen::Index k = 0; k < m; ++k) value += lambda[k] * o[k];
            const double w = std::norm(x[static_cast<Eigen::Index>(r)]);
            mean += w * value;
            raw.emplace_back(value, w);
        }
        return detail::collect(std::move(raw), mean, n);
    }
    if (basis.size() > dense_limit)
        throw CapacityError("complex observable needs dense diagonalization", static_cast<double>(basis.size()),
                            static_cast<double>(dense_limit));
    return observable_statistics_dense(psi, basis, b);
}

/// Reference path: dense diagonalization of dGamma(B) on the N-body basis.
inline SpectralSample observable_statistics_dense(const Eigen::VectorXcd& psi, const OccupationBasis& basis,
                                                  const Eigen::MatrixXcd& b) {
    detail::require_hermitian_mode_matrix(b);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(second_quantize(b, basis).dense());
    const Eigen::VectorXcd amp = es.eigenvectors().adjoint() * (psi / psi.norm());
    std::vector<std::pair<double, double>> raw;
    double mean = 0.0;
    for (Eigen::Index i = 0; i < amp.size(); ++i) {
        const double w = std::norm(amp[i]);
        mean += w * es.eigenvalues()[i];
        raw.emplace_back(es.eigenvalues()[i], w);
    }
    return detail::collect(std::move(raw), mean, basis.particles());
}

/// <psi, dGamma(B)^k psi> from sparse products, for cross-checking the spectral sample.
inline double operator_moment(const Eigen::VectorXcd& psi, const OccupationBasis& basis, const Eigen::MatrixXcd& b, int k) {
    const SparseOperator op = second_quantize(b, basis);
    Eigen::VectorXcd x = psi;
    for (int i = 0; i < k; ++i) x = op.apply(x);
    return psi.dot(x).real();
}

/// gamma(p, q) = <psi, a*_q a_p psi> / N on the mode space.
inline Eigen::MatrixXcd one_particle_density(const Eigen::VectorXcd& psi, const OccupationBasis& basis) {
    const std::size_t m = basis.modes();
    Eigen::MatrixXcd g = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
    Occupation scratch(m);
    for (std::size_t col = 0; col < basis.size(); ++col) {
        const cplx x = psi[static_cast<Eigen::Index>(col)];
        if (x == 0.0) continue;
        const std::uint16_t* o = basis.occupation(col);
        for (std::size_t p = 0; p < m; ++p) {
            if (o[p] == 0) continue;
            for (std::size_t q = 0; q < m; ++q) {
                std::copy(o, o + m, scratch.begin());
                double f = std::sqrt(static_cast<double>(scratch[p]--));
                f *= std::sqrt(static_cast<double>(++scratch[q]));
                const cplx y = psi[static_cast<Eigen::Index>(basis.index(scratch))];
                g(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(q)) += std::conj(y) * f * x;
            }
        }
    }
    return g / (static_cast<double>(basis.particles()) * psi.squaredNorm());
}

inline double condensate_depletion(const Eigen::MatrixXcd& gamma) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(gamma);
    return 1.0 - es.eigenvalues().maxCoeff();
}

// ---------------------------------------------------------------------------
// Krylov evolution

struct EvolveOptions {
    double tol = 1e-12;
    int krylov_dim = 30;
    int max_steps = 1000000;
};

struct EvolveResult {
    Eigen::VectorXcd state;
    int steps = 0;
    double norm_drift = 0.0;
    double energy_drift = 0.0;
};

/// exp(-i H t) psi by restarted Arnoldi/Lanczos steps; each substep is accepted when the
/// a-posteriori error estimate beta_m |[exp(-i T tau)]_{m,0}| falls below tol * |psi| * tau / t
/// or reaches the rounding level of the last Krylov coefficient.
inline EvolveResult evolve(const SparseOperator& h, const Eigen::VectorXcd& psi, double t, const EvolveOptions& opt = {}) {
    if (!h.hermitian()) throw ValidationError("evolve needs a hermitian operator");
    if (t < 0.0) throw ValidationError("evolution time must be non-negative");
    const auto n = static_cast<Eigen::Index>(h.size());
    EvolveResult res;
    res.state = psi;
    const double norm0 = psi.norm();
    if (norm0 == 0.0) return res;
    const double energy0 = psi.dot(h.apply(psi)).real() / (norm0 * norm0);
    double done = 0.0;
    double tau = t;
    const int m_max = static_cast<int>(std::min<Eigen::Index>(opt.krylov_dim, n));
    while (done < t) {
        const double beta0 = res.state.norm();
        Eigen::MatrixXcd v(n, m_max + 1);
        Eigen::MatrixXd tri = Eigen::MatrixXd::Zero(m_max + 1, m_max + 1);
        v.col(0) = res.state / beta0;
        int m = m_max;
        double hnext = 0.0;
        for (int j = 0; j < m_max; ++j) {
            Eigen::VectorXcd w = h.apply(v.col(j));
            for (int pass = 0; pass < 2; ++pass) {
                const Eigen::VectorXcd c = v.leftCols(j + 1).adjoint() * w;
                w -= v.leftCols(j + 1) * c;
                if (pass == 0) tri(j, j) = c[j].real();
                else tri(j, j) += c[j].real();
            }
            const double b = w.norm();
            if (b < 1e-14 * std::max(1.0, std::abs(tri(j, j)))) {
                m = j + 1;
                hnext = 0.0;
                break;
            }
            if (j + 1 < m_max) {
                tri(j + 1, j) = tri(j, j + 1) = b;
                v.col(j + 1) = w / b;
            } else {
                hnext = b;
                v.col(j + 1) = w / b;
            }
        }
        const Eigen::MatrixXd tm = tri.topLeftCorner(m, m);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(tm);
        const double remaining = t - done;
        tau = std::min(tau * 2.0, remaining);
        Eigen::VectorXcd coeffs;
        while (true) {
            Eigen::VectorXcd phase(m);
            for (int i = 0; i < m; ++i) phase[i] = std::exp(cplx(0.0, -es.eigenvalues()[i] * tau));
            coeffs = es.eigenvectors().cast<cplx>() * (phase.asDiagonal() * es.eigenvectors().row(0).transpose().cast<cplx>());
            const double err = beta0 * hnext * std::abs(coeffs[m - 1]);
            const double floor = 16.0 * std::numeric_limits<double>::epsilon() * beta0 * hnext;
            if (err <= std::max(opt.tol * beta0 * tau / t, floor) || hnext == 0.0) break;
            tau *= 0.5;
            if (tau < 1e-14 * t) throw ConvergenceError("Krylov step size underflow", err);
        }
        res.state = beta0 * (v.leftCols(m) * coeffs);
        done += tau;
        if (++res.steps > opt.max_steps) throw ConvergenceError("Krylov step budget exhausted", t - done);
    }
    res.norm_drift = std::abs(res.state.norm() - norm0);
    res.energy_drift = std::abs(res.state.dot(h.apply(res.state)).real() / res.state.squaredNorm() - energy0);
    return res;
}

/// Dense reference exp(-i H t) psi.
inline Eigen::VectorXcd evolve_dense(const Eigen::MatrixXcd& h, const Eigen::VectorXcd& psi, double t) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
    Eigen::VectorXcd phase(h.rows());
    for (Eigen::Index i = 0; i < h.rows(); ++i) phase[i] = std::exp(cplx(0.0, -es.eigenvalues()[i] * t));
    return es.eigenvectors() * (phase.asDiagonal() * (es.eigenvectors().adjoint() * psi));
}

} // namespace bose_expand

#endif
