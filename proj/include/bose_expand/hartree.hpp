#ifndef BOSE_EXPAND_HARTREE_HPP
#define BOSE_EXPAND_HARTREE_HPP

// Hartree functional: kinetic + trap + (1/2) interaction. On the torus it is
// evaluated in mode space and minimized analytically; on a trap grid it is
// minimized by normalized backward-Euler imaginary-time steps.

#include <Eigen/Dense>
#include <Eigen/IterativeLinearSolvers>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include "errors.hpp"
#include "model.hpp"
#include "terms.hpp"

namespace bose_expand {

using cplx = std::complex<double>;

struct HartreeState {
    bool on_torus = true;
    /// Mode amplitudes (ModeSet order) on the torus, grid samples on a trap grid.
    Eigen::VectorXcd phi;
    double energy = 0.0;
    double chemical_potential = 0.0;
    double residual = 0.0;
    int iterations = 0;
    std::vector<double> energy_history;
    std::vector<std::string> warnings;

    /// True when phi is the zero mode alone (the homogeneous torus condensate).
    bool homogeneous(const ModeSet& modes, double tol = 1e-12) const {
        if (!on_torus || static_cast<std::size_t>(phi.size()) != modes.size()) return false;
        for (Eigen::Index i = 0; i < phi.size(); ++i) {
            const double target = static_cast<std::size_t>(i) == modes.zero_index() ? 1.0 : 0.0;
            if (std::abs(phi[i] - target) > tol) return false;
        }
        return true;
    }
};

struct HartreeOptions {
    double tol = 1e-10;
    int max_iter = 2000;
    double time_step = 5.0;
    bool resolution_probe = true;
    double resolution_tol = 1e-6;
};

namespace detail {

inline void require_normalized(double norm, double tol = 1e-10) {
    if (std::abs(norm - 1.0) > tol)
        throw ValidationError("Hartree energy needs a normalized state, got norm " + std::to_string(norm));
}

inline void fix_phase(Eigen::VectorXcd& phi) {
    for (Eigen::Index i = 0; i < phi.size(); ++i) {
        if (std::abs(phi[i]) > 1e-14) {
            phi *= std::conj(phi[i]) / std::abs(phi[i]);
            phi[i] = std::abs(phi[i]);
            return;
        }
    }
}

} // namespace detail

// ---------------------------------------------------------------------------
// torus (mode space)

/// (-Delta + v * |phi|^2) phi in mode space, i.e. dE/d conj(phi).
inline Eigen::VectorXcd hartree_gradient(const Eigen::VectorXcd& phi, const CutoffModel& model) {
    const auto& modes = model.modes;
    Eigen::VectorXcd g(phi.size());
    for (std::size_t i = 0; i < modes.size(); ++i) g[i] = kinetic(modes[i]) * phi[i];
    for (const auto& t : interaction_terms(model)) {
        const cplx pair = phi[t.a1] * phi[t.a2];
        g[t.c1] += t.amplitude * std::conj(phi[t.c2]) * pair;
        g[t.c2] += t.amplitude * std::conj(phi[t.c1]) * pair;
    }
    return g;
}

inline double hartree_energy_unchecked(const Eigen::VectorXcd& phi, const CutoffModel& model) {
    const auto& modes = model.modes;
    double e = 0.0;
    for (std::size_t i = 0; i < modes.size(); ++i) e += kinetic(modes[i]) * std::norm(phi[i]);
    cplx w = 0.0;
    for (const auto& t : interaction_terms(model))
        w += t.amplitude * std::conj(phi[t.c1] * phi[t.c2]) * phi[t.a1] * phi[t.a2];
    return e + w.real();
}

inline double hartree_energy(const Eigen::VectorXcd& phi, const CutoffModel& model) {
    if (static_cast<std::size_t>(phi.size()) != model.modes.size())
        throw ValidationError("condensate amplitude count does not match the mode set");
    detail::require_normalized(phi.norm());
    return hartree_energy_unchecked(phi, model);
}

inline double hartree_residual(const Eigen::VectorXcd& phi, const CutoffModel& model) {
    const Eigen::VectorXcd g = hartree_gradient(phi, model);
    const double mu = phi.dot(g).real();
    return (g - mu * phi).norm();
}

/// Positive-type potentials make the constant function the minimizer: e_H = v_hat(0)/2, mu = v_hat(0).
inline HartreeState minimize_hartree(const CutoffModel& model) {
    model.validate();
    HartreeState s;
    s.on_torus = true;
    s.phi = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(model.modes.size()));
    s.phi[static_cast<Eigen::Index>(model.modes.zero_index())] = 1.0;
    s.energy = hartree_energy(s.phi, model);
    const Eigen::VectorXcd g = hartree_gradient(s.phi, model);
    s.chemical_potential = s.phi.dot(g).real();
    s.residual = (g - s.chemical_potential * s.phi).norm();
    s.energy_history = {s.energy};
    return s;
}

// ---------------------------------------------------------------------------
// trap grid

namespace detail {

inline double cell_volume(const TrapGrid& g) { return std::pow(g.spacing(), g.dimension); }

inline std::size_t stride(const TrapGrid& g, int axis) {
    std::size_t s = 1;
    for (int a = g.dimension - 1; a > axis; --a) s *= static_cast<std::size_t>(g.points);
    return s;
}

/// -Delta_h phi with second-order central differences and zero Dirichlet data.
inline Eigen::VectorXd neg_laplacian(const TrapGrid& g, const Eigen::VectorXd& phi) {
    const double inv_h2 = 1.0 / (g.spacing() * g.spacing());
    Eigen::VectorXd out = Eigen::VectorXd::Zero(phi.size());
    for (int a = 0; a < g.dimension; ++a) {
        const std::size_t st = stride(g, a);
        for (Eigen::Index i = 0; i < phi.size(); ++i) {
            const auto pos = (static_cast<std::size_t>(i) / st) % static_cast<std::size_t>(g.points);
            double acc = 2.0 * phi[i];
            if (pos > 0) acc -= phi[i - static_cast<Eigen::Index>(st)];
            if (pos + 1 < static_cast<std::size_t>(g.points)) acc -= phi[i + static_cast<Eigen::Index>(st)];
            out[i] += acc * inv_h2;
        }
    }
    return out;
}

/// Mean-field potential (v * |phi|^2)(x_i).
inline Eigen::VectorXd mean_field(const TrapGrid& g, const PairPotential& v, const Eigen::VectorXd& phi) {
    const Eigen::VectorXd rho = phi.array().square();
    if (v.vanishes()) return Eigen::VectorXd::Zero(phi.size());
    switch (v.kind()) {
    case PairPotential::Kind::constant: return v.contact_strength() * rho;
    case PairPotential::Kind::gaussian: {
        // separable kernel: one 1D convolution per axis
        const double h = g.spacing(), w = v.width();
        std::vector<double> kernel(static_cast<std::size_t>(2 * g.points - 1));
        for (int j = -(g.points - 1); j <= g.points - 1; ++j)
            kernel[static_cast<std::size_t>(j + g.points - 1)] = std::exp(-0.5 * (j * h) * (j * h) / (w * w)) * h;
        Eigen::VectorXd cur = rho;
        for (int a = 0; a < g.dimension; ++a) {
            const std::size_t st = stride(g, a);
            Eigen::VectorXd next = Eigen::VectorXd::Zero(cur.size());
            for (Eigen::Index i = 0; i < cur.size(); ++i) {
                const auto pos = static_cast<int>((static_cast<std::size_t>(i) / st) % static_cast<std::size_t>(g.points));
                const Eigen::Index base = i - static_cast<Eigen::Index>(pos * st);
                double acc = 0.0;
                for (int j = 0; j < g.points; ++j)
                    acc += kernel[static_cast<std::size_t>(pos - j + g.points - 1)] * cur[base + static_cast<Eigen::Index>(j * st)];
                next[i] = acc;
            }
            cur = std::move(next);
        }
        return v.amplitude() * v.scale() * cur;
    }
    case PairPotential::Kind::table:
        throw UnsupportedError("tabulated Fourier potentials are torus-only; use constant or gaussian on a trap grid");
    }
    return Eigen::VectorXd::Zero(phi.size());
}

inline double grid_norm(const TrapGrid& g, const Eigen::VectorXd& f) {
    return std::sqrt(f.squaredNorm() * cell_volume(g));
}

inline double grid_energy(const TrapGrid& g, const PairPotential& v, const Eigen::VectorXd& phi) {
    const Eigen::Map<const Eigen::VectorXd> trap(g.values.data(), static_cast<Eigen::Index>(g.values.size()));
    const double kin = phi.dot(neg_laplacian(g, phi));
    const double ext = phi.dot(trap.cwiseProduct(phi));
    const double inter = 0.5 * phi.dot(mean_field(g, v, phi).cwiseProduct(phi));
    return (kin + ext + inter) * cell_volume(g);
}

/// Returns (mu, residual) for h_phi = -Delta + V + v*|phi|^2.
inline std::pair<double, double> grid_residual(const TrapGrid& g, const PairPotential& v, const Eigen::VectorXd& phi) {
    const Eigen::Map<const Eigen::VectorXd> trap(g.values.data(), static_cast<Eigen::Index>(g.values.size()));
    const Eigen::VectorXd hphi = neg_laplacian(g, phi) + (trap + mean_field(g, v, phi)).cwiseProduct(phi);
    const double mu = phi.dot(hphi) * cell_volume(g);
    return {mu, grid_norm(g, hphi - mu * phi)};
}

inline Eigen::SparseMatrix<double> implicit_step_matrix(const TrapGrid& g, const Eigen::VectorXd& diag_potential, double tau) {
    const double inv_h2 = 1.0 / (g.spacing() * g.spacing());
    const auto n = static_cast<Eigen::Index>(g.size());
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<std::size_t>(n) * (1 + 2 * g.dimension));
    for (Eigen::Index i = 0; i < n; ++i) {
        trip.emplace_back(i, i, 1.0 + tau * (2.0 * g.dimension * inv_h2 + diag_potential[i]));
        for (int a = 0; a < g.dimension; ++a) {
            const std::size_t st = stride(g, a);
            const auto pos = (static_cast<std::size_t>(i) / st) % static_cast<std::size_t>(g.points);
            if (pos > 0) trip.emplace_back(i, i - static_cast<Eigen::Index>(st), -tau * inv_h2);
            if (pos + 1 < static_cast<std::size_t>(g.points)) trip.emplace_back(i, i + static_cast<Eigen::Index>(st), -tau * inv_h2);
        }
    }
    Eigen::SparseMatrix<double> m(n, n);
    m.setFromTriplets(trip.begin(), trip.end());
    return m;
}

inline Eigen::VectorXd solve_spd(const Eigen::SparseMatrix<double>& m, const Eigen::VectorXd& rhs) {
    if (m.rows() <= 200000) {
        Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(m);
        if (ldlt.info() != Eigen::Success) throw ConvergenceError("implicit Hartree step factorization failed", 0.0);
        return ldlt.solve(rhs);
    }
    Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper> cg(m);
    cg.setTolerance(1e-14);
    cg.setMaxIterations(20000);
    return cg.solveWithGuess(rhs, rhs);
}

inline HartreeState minimize_on_grid(const TrapGrid& grid, const PairPotential& v, const HartreeOptions& opt) {
    const Eigen::Map<const Eigen::VectorXd> trap(grid.values.data(), static_cast<Eigen::Index>(grid.values.size()));
    Eigen::VectorXd phi = (-0.5 * trap.array()).exp().matrix();
    phi /= grid_norm(grid, phi);
    double energy = grid_energy(grid, v, phi);

    HartreeState s;
    s.on_torus = false;
    s.energy_history.push_back(energy);
    double tau = opt.time_step;
    double residual = grid_residual(grid, v, phi).second;
    int it = 0;
    for (; it < opt.max_iter && residual > opt.tol; ++it) {
        const Eigen::VectorXd pot = trap + mean_field(grid, v, phi);
        for (int attempt = 0;; ++attempt) {
            Eigen::VectorXd next = solve_spd(implicit_step_matrix(grid, pot, tau), phi);
            next /= grid_norm(grid, next);
            const double e_next = grid_energy(grid, v, next);
            if (e_next <= energy + 1e-13 * std::max(1.0, std::abs(energy)) || attempt >= 30) {
                phi = std::move(next);
                energy = std::min(e_next, energy);
                break;
            }
            tau *= 0.5;
        }
        s.energy_history.push_back(energy);
        residual = grid_residual(grid, v, phi).second;
    }
    if (residual > opt.tol)
        throw ConvergenceError("Hartree minimization hit the iteration limit of " + std::to_string(opt.max_iter), residual);

    auto [mu, res] = grid_residual(grid, v, phi);
    s.phi = phi.cast<cplx>();
    detail::fix_phase(s.phi);
    s.energy = grid_energy(grid, v, phi);
    s.chemical_potential = mu;
    s.residual = res;
    s.iterations = it;
    return s;
}

/// Same trap sampled at half the spacing on the same box.
inline TrapGrid refined(const TrapGrid& g) {
    if (g.values.size() != static_cast<std::size_t>(std::pow(g.points, g.dimension)))
        throw ValidationError("cannot refine a malformed trap grid");
    if (g.profile) return TrapGrid::sampled(g.dimension, g.half_width, 2 * g.points - 1, g.profile, g.confinement_threshold);
    TrapGrid r = g;
    r.points = 2 * g.points - 1;
    std::size_t total = 1;
    for (int a = 0; a < g.dimension; ++a) total *= static_cast<std::size_t>(r.points);
    r.values.assign(total, 0.0);
    // multilinear interpolation of the coarse samples
    for (std::size_t idx = 0; idx < total; ++idx) {
        std::size_t rest = idx;
        std::array<int, 3> fine{};
        for (int a = g.dimension - 1; a >= 0; --a) {
            fine[a] = static_cast<int>(rest % static_cast<std::size_t>(r.points));
            rest /= static_cast<std::size_t>(r.points);
        }
        double acc = 0.0;
        const int corners = 1 << g.dimension;
        int count = 0;
        for (int c = 0; c < corners; ++c) {
            std::size_t coarse = 0;
            bool ok = true;
            for (int a = 0; a < g.dimension; ++a) {
                int ci = fine[a] / 2 + (((c >> a) & 1) && (fine[a] % 2) ? 1 : 0);
                if (!(fine[a] % 2) && ((c >> a) & 1)) ok = false;
                coarse = coarse * static_cast<std::size_t>(g.points) + static_cast<std::size_t>(ci);
            }
            if (!ok) continue;
            acc += g.values[coarse];
            ++count;
        }
        r.values[idx] = acc / count;
    }
    return r;
}

} // namespace detail

inline double hartree_energy(const Eigen::VectorXcd& phi, const TrapGrid& grid, const PairPotential& v) {
    const Eigen::VectorXd re = phi.real();
    if (phi.imag().norm() > 1e-12) throw UnsupportedError("trap Hartree energy expects a real condensate");
    detail::require_normalized(detail::grid_norm(grid, re));
    return detail::grid_energy(grid, v, re);
}

inline double hartree_residual(const Eigen::VectorXcd& phi, const TrapGrid& grid, const PairPotential& v) {
    return detail::grid_residual(grid, v, phi.real()).second;
}

/// Trap minimizer. A resolution warning is attached when halving the grid
/// spacing moves e_H by more than opt.resolution_tol.
inline HartreeState minimize_hartree(const TrapGrid& grid, const PairPotential& v, const HartreeOptions& opt = {}) {
    grid.validate();
    if (!(opt.tol > 0.0)) throw ValidationError("Hartree tolerance must be positive");
    HartreeState s = detail::minimize_on_grid(grid, v, opt);
    if (opt.resolution_probe) {
        HartreeOptions probe = opt;
        probe.resolution_probe = false;
        probe.time_step = 0.5 * opt.time_step;
        const HartreeState fine = detail::minimize_on_grid(detail::refined(grid), v, probe);
        const double change = std::abs(fine.energy - s.energy);
        if (change > opt.resolution_tol)
            s.warnings.push_back("trap grid too coarse: e_H changes by " + std::to_string(change) +
                                 " under one refinement");
    }
    return s;
}

/// Energy of the normalized constant function on the trap grid (variational upper bound check).
inline double uniform_trial_energy(const TrapGrid& grid, const PairPotential& v) {
    Eigen::VectorXd phi = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(grid.size()));
    phi /= detail::grid_norm(grid, phi);
    return detail::grid_energy(grid, v, phi);
}

} // namespace bose_expand

#endif
