#ifndef BOSE_EXPAND_DYNAMICS_HPP
#define BOSE_EXPAND_DYNAMICS_HPP

// Quench dynamics on the torus: prepare the ground state for v, evolve under v'.
// Layers: the Hartree flow of the condensate, the Heisenberg flow of the
// quadratic Hamiltonian as per-mode 2x2 systems, the first-order excitation
// correction chi1(t) by a Duhamel integral, and the norm error against exact
// Krylov evolution of the N-body state.

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <complex>
#include <map>
#include <string>
#include <vector>

#include "bogoliubov.hpp"
#include "errors.hpp"
#include "fock.hpp"
#include "hartree.hpp"
#include "model.hpp"
#include "oracle.hpp"
#include "parallel.hpp"
#include "perturbation.hpp"

namespace bose_expand {

// ---------------------------------------------------------------------------
// Hartree flow

/// Mean-field operator (v * |phi|^2) as a hermitian matrix on the mode set.
inline Eigen::MatrixXcd mean_field_matrix(const Eigen::VectorXcd& phi, const CutoffModel& model) {
    const auto m = static_cast<Eigen::Index>(model.modes.size());
    Eigen::MatrixXcd v = Eigen::MatrixXcd::Zero(m, m);
    for (const auto& t : interaction_terms(model)) {
        v(static_cast<Eigen::Index>(t.c1), static_cast<Eigen::Index>(t.a2)) += t.amplitude * std::conj(phi[static_cast<Eigen::Index>(t.c2)]) * phi[static_cast<Eigen::Index>(t.a1)];
        v(static_cast<Eigen::Index>(t.c2), static_cast<Eigen::Index>(t.a1)) += t.amplitude * std::conj(phi[static_cast<Eigen::Index>(t.c1)]) * phi[static_cast<Eigen::Index>(t.a2)];
    }
    return v;
}

struct HartreeFlowOptions {
    double dt = 1e-4;
    /// Subtract mu(t) = <phi, (-Delta + v * |phi|^2) phi> so that stationary states do not rotate.
    bool gauge = true;
    int record_every = 100;
    /// Rerun at dt/2 and require agreement of the final states within this tolerance (0 disables).
    double refinement_tol = 0.0;
};

struct CondensateTrajectory {
    std::vector<double> times;
    std::vector<Eigen::VectorXcd> phi;
    std::vector<double> mu;
    std::vector<double> mass;
    std::vector<double> energy;

    double mass_drift_rate() const {
        const double span = times.back() - times.front();
        double worst = 0.0;
        for (double m : mass) worst = std::max(worst, std::abs(m - mass.front()));
        return span > 0.0 ? worst / span : worst;
    }
    double energy_drift_rate() const {
        const double span = times.back() - times.front();
        double worst = 0.0;
        for (double e : energy) worst = std::max(worst, std::abs(e - energy.front()));
        return span > 0.0 ? worst / span : worst;
    }
};

namespace detail {

inline Eigen::VectorXcd apply_hermitian_exp(const Eigen::MatrixXcd& h, double tau, const Eigen::VectorXcd& x) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
    Eigen::VectorXcd phase(h.rows());
    for (Eigen::Index i = 0; i < h.rows(); ++i) phase[i] = std::exp(cplx(0.0, -es.eigenvalues()[i] * tau));
    return es.eigenvectors() * (phase.asDiagonal() * (es.eigenvectors().adjoint() * x));
}

inline double mean_field_energy(const Eigen::VectorXcd& phi, const CutoffModel& model) {
    return hartree_energy_unchecked(phi, model) / phi.squaredNorm();
}

inline double chemical_potential(const Eigen::VectorXcd& phi, const CutoffModel& model) {
    return phi.dot(hartree_gradient(phi, model)).real() / phi.squaredNorm();
}

inline CondensateTrajectory run_hartree_flow(const Eigen::VectorXcd& phi0, const CutoffModel& model, double t_final,
                                             const HartreeFlowOptions& opt) {
    const auto steps = static_cast<long>(std::ceil(t_final / opt.dt - 1e-9));
    const double dt = steps > 0 ? t_final / static_cast<double>(steps) : 0.0;
    Eigen::VectorXd kin(static_cast<Eigen::Index>(model.modes.size()));
    for (std::size_t i = 0; i < model.modes.size(); ++i) kin[static_cast<Eigen::Index>(i)] = kinetic(model.modes[i]);
    auto half_kinetic = [&](Eigen::VectorXcd& phi) {
        for (Eigen::Index i = 0; i < phi.size(); ++i) phi[i] *= std::exp(cplx(0.0, -0.5 * dt * kin[i]));
    };
    CondensateTrajectory traj;
    Eigen::VectorXcd phi = phi0;
    auto record = [&](double t) {
        traj.times.push_back(t);
        traj.phi.push_back(phi);
        traj.mu.push_back(chemical_potential(phi, model));
        traj.mass.push_back(phi.squaredNorm());
        traj.energy.push_back(mean_field_energy(phi, model));
    };
    record(0.0);
    for (long s = 1; s <= steps; ++s) {
        const double mu = opt.gauge ? chemical_potential(phi, model) : 0.0;
        half_kinetic(phi);
        // exponential midpoint for the nonlinear part
        Eigen::VectorXcd mid = phi;
        for (int it = 0; it < 4; ++it) mid = apply_hermitian_exp(mean_field_matrix(mid, model), 0.5 * dt, phi);
        phi = apply_hermitian_exp(mean_field_matrix(mid, model), dt, phi);
        half_kinetic(phi);
        if (opt.gauge) phi *= std::exp(cplx(0.0, mu * dt));
        if (s % opt.record_every == 0 || s == steps) record(static_cast<double>(s) * dt);
    }
    return traj;
}

} // namespace detail

/// Strang splitting: exact kinetic half steps in mode space around an exponential-midpoint mean-field step.
inline CondensateTrajectory evolve_hartree(const Eigen::VectorXcd& phi0, const CutoffModel& model, double t_final,
                                           const HartreeFlowOptions& opt = {}) {
    if (std::abs(phi0.norm() - 1.0) > 1e-12) throw ValidationError("initial condensate must be normalized");
    if (static_cast<std::size_t>(phi0.size()) != model.modes.size())
        throw ValidationError("condensate amplitude count does not match the mode set");
    if (!(opt.dt > 0.0) || t_final < 0.0) throw ValidationError("need dt > 0 and t >= 0");
    CondensateTrajectory traj = detail::run_hartree_flow(phi0, model, t_final, opt);
    if (opt.refinement_tol > 0.0) {
        HartreeFlowOptions fine = opt;
        fine.dt = 0.5 * opt.dt;
        fine.record_every = 2 * opt.record_every;
        const CondensateTrajectory check = detail::run_hartree_flow(phi0, model, t_final, fine);
        const double diff = (check.phi.back() - traj.phi.back()).norm();
        if (diff > opt.refinement_tol)
            throw ConvergenceError("Hartree flow changes by more than the tolerance under dt/2", diff);
    }
    return traj;
}

/// Observed order log2(|phi_h - phi_{h/2}| / |phi_{h/2} - phi_{h/4}|) at t_final.
inline double hartree_convergence_order(const Eigen::VectorXcd& phi0, const CutoffModel& model, double t_final, double dt,
                                        bool gauge = false) {
    std::array<Eigen::VectorXcd, 3> ends;
    for (int i = 0; i < 3; ++i) {
        HartreeFlowOptions o;
        o.dt = dt / std::pow(2.0, i);
        o.gauge = gauge;
        o.record_every = 1 << 30;
        ends[static_cast<std::size_t>(i)] = evolve_hartree(phi0, model, t_final, o).phi.back();
    }
    return std::log2((ends[0] - ends[1]).norm() / (ends[1] - ends[2]).norm());
}

// ---------------------------------------------------------------------------
// Bogoliubov flow

/// Heisenberg flow of H0' on (a_p, a*_-p): i dU/dt = [[A', B'], [-B', -A']] U.
struct ModePropagator {
    std::vector<double> times;
    /// U[step][mode]
    std::vector<std::vector<Eigen::Matrix2cd>> U;
    /// Composition with the initial map: a_p(t) in terms of the pre-quench quasi-particle frame.
    std::vector<std::vector<std::pair<cplx, cplx>>> uv;
    double symplectic_defect = 0.0;
    std::vector<std::size_t> negation;

    std::size_t modes() const { return negation.size(); }
    /// U(t)^{-1}, the Heisenberg map for -t.
    Eigen::Matrix2cd inverse(std::size_t step, std::size_t mode) const { return U[step][mode].inverse(); }
};

struct BogoliubovFlowOptions {
    double dt_max = 2.5e-5;
    double max_defect = 1e-6;
};

inline ModePropagator evolve_bogoliubov(const BogoliubovMap& map0, const QuadraticHamiltonian& after, double t_final,
                                        const BogoliubovFlowOptions& opt = {}) {
    if (after.size() != map0.size()) throw ValidationError("pre- and post-quench mode sets differ");
    const auto steps = std::max<long>(2, 2 * static_cast<long>(std::ceil(t_final / (2.0 * opt.dt_max))));
    const double dt = t_final / static_cast<double>(steps);
    const std::size_t m = after.size();
    ModePropagator prop;
    prop.negation = after.negation;
    prop.times.reserve(static_cast<std::size_t>(steps) + 1);
    prop.U.reserve(static_cast<std::size_t>(steps) + 1);
    std::vector<Eigen::Matrix2cd> gen(m);
    for (std::size_t j = 0; j < m; ++j) {
        Eigen::Matrix2cd g;
        g << after.A[j], after.B[j], -after.B[j], -after.A[j];
        gen[j] = cplx(0.0, -1.0) * g;
    }
    std::vector<Eigen::Matrix2cd> u(m, Eigen::Matrix2cd::Identity());
    auto store = [&](double t) {
        prop.times.push_back(t);
        prop.U.push_back(u);
        std::vector<std::pair<cplx, cplx>> row(m);
        for (std::size_t j = 0; j < m; ++j) {
            const cplx u11 = u[j](0, 0), u12 = u[j](0, 1);
            row[j] = {u11 * map0.u[j] - u12 * map0.v[j], u12 * map0.u[j] - u11 * map0.v[j]};
            const double defect = std::abs(std::norm(u11) - std::norm(u12) - 1.0);
            prop.symplectic_defect = std::max(prop.symplectic_defect, defect);
        }
        prop.uv.push_back(std::move(row));
    };
    store(0.0);
    for (long s = 1; s <= steps; ++s) {
        for (std::size_t j = 0; j < m; ++j) {
            const Eigen::Matrix2cd& g = gen[j];
            const Eigen::Matrix2cd k1 = g * u[j];
            const Eigen::Matrix2cd k2 = g * (u[j] + 0.5 * dt * k1);
            const Eigen::Matrix2cd k3 = g * (u[j] + 0.5 * dt * k2);
            const Eigen::Matrix2cd k4 = g * (u[j] + dt * k3);
            u[j] += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
        store(static_cast<double>(s) * dt);
    }
    if (prop.symplectic_defect > opt.max_defect)
        throw ConvergenceError("Bogoliubov flow lost the symplectic identity", prop.symplectic_defect);
    return prop;
}

/// Heisenberg images of a ladder operator under a 2x2 map W: a_p -> W11 a_p + W12 a*_-p.
inline std::vector<std::pair<LadderOp, cplx>> heisenberg_op(const Eigen::Matrix2cd& w, std::size_t negation,
                                                            const LadderOp& op) {
    const LadderOp partner{!op.create, static_cast<std::uint16_t>(negation)};
    if (!op.create) return {{op, w(0, 0)}, {partner, w(0, 1)}};
    return {{op, std::conj(w(0, 0))}, {partner, std::conj(w(0, 1))}};
}

// ---------------------------------------------------------------------------
// chi1(t)

struct ChiOneDynamic {
    double time = 0.0;
    /// chi1(t) = C'(t) chi0(t) with C'(t) normal-ordered.
    OperatorPoly generator;
    /// One-operator blocks keyed by pattern +1 (creation) / -1 (annihilation); index = mode.
    std::map<int, std::vector<cplx>> c1;
    /// Three-operator blocks keyed by pattern (+++, ++-, +--, ---); index (p * m + q) * m + r.
    std::map<std::array<int, 3>, std::vector<cplx>> c3;
    std::size_t modes = 0;

    double coefficient_norm() const {
        double s = 0.0;
        for (const auto& [k, v] : c1)
            for (auto x : v) s += std::norm(x);
        for (const auto& [k, v] : c3)
            for (auto x : v) s += std::norm(x);
        return std::sqrt(s);
    }
};

/// int_0^t U0-frame H1'(s) ds as a normal-ordered polynomial, by Simpson's rule on the propagator grid.
inline OperatorPoly integrated_cubic(const OperatorPoly& h1, const ModePropagator& prop) {
    const std::size_t samples = prop.times.size();
    if (samples < 3 || (samples - 1) % 2 != 0) throw ValidationError("Simpson's rule needs an even number of intervals");
    const double h = prop.times[1] - prop.times[0];
    OperatorPoly raw;
    for (const auto& mono : h1) {
        const std::size_t k = mono.ops.size();
        const std::size_t combos = std::size_t{1} << k;
        for (std::size_t mask = 0; mask < combos; ++mask) {
            cplx acc = 0.0;
            std::vector<LadderOp> ops;
            for (std::size_t s = 0; s < samples; ++s) {
                const double w = (s == 0 || s + 1 == samples) ? 1.0 : (s % 2 ? 4.0 : 2.0);
                cplx c = mono.coefficient;
                for (std::size_t i = 0; i < k; ++i) {
                    const auto& op = mono.ops[i];
                    const auto images = heisenberg_op(prop.U[s][op.mode], prop.negation[op.mode], op);
                    c *= images[(mask >> i) & 1u].second;
                }
                acc += w * c;
            }
            for (std::size_t i = 0; i < k; ++i) {
                const auto& op = mono.ops[i];
                ops.push_back(heisenberg_op(prop.U[0][op.mode], prop.negation[op.mode], op)[(mask >> i) & 1u].first);
            }
            raw.push_back({acc * h / 3.0, std::move(ops)});
        }
    }
    return simplify(raw);
}

/// chi1(t) = e^{-i H0' t} (X1 - i int H1'(s) ds) chi0(0), returned as C'(t) with chi1(t) = C'(t) chi0(t).
inline ChiOneDynamic chi1_dynamics(const BogoliubovMap& map0, const ChiOne& chi1_initial, const ModePropagator& prop,
                                   const OperatorPoly& h1_after) {
    const OperatorPoly x1 = chi1_operator(chi1_initial, map0);
    const OperatorPoly duhamel = integrated_cubic(h1_after, prop);
    OperatorPoly total = x1;
    for (const auto& mono : duhamel) total.push_back({cplx(0.0, -1.0) * mono.coefficient, mono.ops});
    total = simplify(total);
    const std::size_t last = prop.times.size() - 1;
    const std::size_t m = prop.modes();
    std::vector<Eigen::Matrix2cd> inv(m);
    for (std::size_t j = 0; j < m; ++j) inv[j] = prop.inverse(last, j);
    ChiOneDynamic out;
    out.time = prop.times[last];
    out.modes = m;
    out.generator = simplify(substitute(total, [&](const LadderOp& op) {
        return heisenberg_op(inv[op.mode], prop.negation[op.mode], op);
    }));
    out.c1[1].assign(m, 0.0);
    out.c1[-1].assign(m, 0.0);
    for (const auto& mono : out.generator) {
        if (mono.ops.size() == 1) {
            out.c1[mono.ops[0].create ? 1 : -1][mono.ops[0].mode] += mono.coefficient;
        } else if (mono.ops.size() == 3) {
            std::array<int, 3> pattern{};
            for (int i = 0; i < 3; ++i) pattern[static_cast<std::size_t>(i)] = mono.ops[static_cast<std::size_t>(i)].create ? 1 : -1;
            auto& block = out.c3[pattern];
            if (block.empty()) block.assign(m * m * m, 0.0);
            block[(mono.ops[0].mode * m + mono.ops[1].mode) * m + mono.ops[2].mode] += mono.coefficient;
        } else if (!mono.ops.empty() || std::abs(mono.coefficient) > 1e-12) {
            throw ValidationError("unexpected monomial of length " + std::to_string(mono.ops.size()) + " in chi1(t)");
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// norm error against the exact evolution

struct QuenchSpec {
    PairPotential after;
    double time = 1.0;
};

struct ExcitationTrajectory {
    ExcitationBasis basis;
    Eigen::VectorXcd chi0_initial;
    Eigen::VectorXcd chi0;
    Eigen::VectorXcd chi1;
    /// Second route for chi1(t): Krylov evolution of the Duhamel vector.
    Eigen::VectorXcd chi1_direct;
    ModePropagator propagator;
    ChiOneDynamic chi1_dynamic;
    CondensateTrajectory condensate;
};

inline SparseOperator shifted(const SparseOperator& h, double shift) {
    std::vector<SparseOperator::Entry> e = h.entries();
    for (std::size_t i = 0; i < h.size(); ++i) e.push_back({i, i, shift});
    return SparseOperator(h.size(), std::move(e), h.hermitian());
}

/// N-independent part of the quench: chi0(t), chi1(t) on a truncated excitation basis.
inline ExcitationTrajectory excitation_trajectory(const CutoffModel& model, const QuenchSpec& quench, int k_max = 16,
                                                  const BogoliubovFlowOptions& flow = {}) {
    const CutoffModel after = model.with_potential(quench.after);
    const StaticExpansion before = expand_static(model);
    const StaticExpansion post = expand_static(after);
    ExcitationTrajectory tr;
    tr.basis = ExcitationBasis(model.modes, k_max);
    const QuasifreeState q0 = chi0_state(before.map, k_max - 4);
    tr.chi0_initial = rebase(q0.coefficients, q0.basis, tr.basis);
    tr.propagator = evolve_bogoliubov(before.map, post.h0, quench.time, flow);
    tr.chi1_dynamic = chi1_dynamics(before.map, before.chi1, tr.propagator, post.orders.H1());

    HartreeFlowOptions hopt;
    hopt.record_every = 1000;
    tr.condensate = evolve_hartree(post.hartree.phi, after, quench.time, hopt);

    const SparseOperator h0 = realize(post.orders.H0(), tr.basis);
    EvolveOptions eopt;
    tr.chi0 = evolve(h0, tr.chi0_initial, quench.time, eopt).state;
    tr.chi1 = apply(tr.chi1_dynamic.generator, tr.basis, tr.chi0, tr.basis);

    OperatorPoly start = chi1_operator(before.chi1, before.map);
    for (const auto& mono : integrated_cubic(post.orders.H1(), tr.propagator))
        start.push_back({cplx(0.0, -1.0) * mono.coefficient, mono.ops});
    const Eigen::VectorXcd duhamel = apply(simplify(start), tr.basis, tr.chi0_initial, tr.basis);
    tr.chi1_direct = evolve(h0, duhamel, quench.time, eopt).state;
    return tr;
}

struct NormErrorPoint {
    int N = 0;
    double error0 = 0.0;
    double error1 = 0.0;
    double norm_drift = 0.0;
};

struct NormErrorReport {
    std::vector<NormErrorPoint> points;
    ScalingReport order0;
    ScalingReport order1;
    bool has_order1 = false;
    double symplectic_defect = 0.0;
    double mass_drift_rate = 0.0;
    double energy_drift_rate = 0.0;
    /// max |<chi0(t), chi1(t)>| and the distance between the two chi1(t) routes.
    double chi1_overlap = 0.0;
    double chi1_route_gap = 0.0;
};

/// ||Psi_N(t) - psi_approx(t)|| for the exact pre-quench ground state evolved under H' - N e_H'.
inline NormErrorPoint norm_error_at(const CutoffModel& model, const QuenchSpec& quench, const ExcitationTrajectory& tr,
                                    int n) {
    const CutoffModel pre = model.with_particles(n);
    const CutoffModel post = pre.with_potential(quench.after);
    const HartreeState h_post = minimize_hartree(post);
    const ModelGroundState gs = model_ground_state(pre);
    const HartreeState h_pre = minimize_hartree(pre);
    const int top = std::min(n, tr.basis.k_max());
    const ExcitationBasis cut(model.modes, top);
    auto lift = [&](const Eigen::VectorXcd& chi) {
        return excitation_reconstruct(rebase(chi, tr.basis, cut), cut, gs.basis, model.modes);
    };
    (void)h_pre;
    Eigen::VectorXcd psi = gs.state.vector;
    align_phase_to(psi, lift(tr.chi0_initial));
    const SparseOperator h = shifted(assemble_hamiltonian(post, gs.basis), -n * h_post.energy);
    const EvolveResult ev = evolve(h, psi, quench.time);
    NormErrorPoint p;
    p.N = n;
    p.norm_drift = ev.norm_drift;
    const Eigen::VectorXcd psi0 = lift(tr.chi0);
    p.error0 = (ev.state - psi0).norm();
    p.error1 = (ev.state - psi0 - lift(tr.chi1) / std::sqrt(static_cast<double>(n))).norm();
    return p;
}

inline NormErrorReport norm_error_report(const CutoffModel& model, const QuenchSpec& quench, const std::vector<int>& ns,
                                         bool order1 = true, int workers = 1) {
    NormErrorReport r;
    const ExcitationTrajectory tr = excitation_trajectory(model, quench);
    r.points.resize(ns.size());
    parallel_for(ns.size(), workers, [&](std::size_t i) { r.points[i] = norm_error_at(model, quench, tr, ns[i]); });
    std::vector<std::pair<double, double>> e0, e1;
    for (const auto& p : r.points) {
        e0.emplace_back(p.N, p.error0);
        e1.emplace_back(p.N, p.error1);
    }
    r.order0 = fit_power_law(e0, -0.5, 0.2);
    if (order1) {
        r.order1 = fit_power_law(e1, -1.0, 0.25);
        r.has_order1 = true;
    }
    r.symplectic_defect = tr.propagator.symplectic_defect;
    r.mass_drift_rate = tr.condensate.mass_drift_rate();
    r.energy_drift_rate = tr.condensate.energy_drift_rate();
    r.chi1_overlap = std::abs(tr.chi0.dot(tr.chi1));
    r.chi1_route_gap = (tr.chi1 - tr.chi1_direct).norm();
    return r;
}

struct ErrorEnvelope {
    std::vector<double> times;
    std::vector<double> errors;
    /// Smallest C with error(t) <= error(0) e^{C t} on the sampled times.
    double rate = 0.0;
};

inline ErrorEnvelope error_envelope(const CutoffModel& model, const PairPotential& after, int n,
                                    const std::vector<double>& times) {
    ErrorEnvelope env;
    for (double t : times) {
        const QuenchSpec q{after, t};
        const ExcitationTrajectory tr = excitation_trajectory(model, q);
        env.times.push_back(t);
        env.errors.push_back(norm_error_at(model, q, tr, n).error0);
    }
    for (std::size_t i = 0; i < times.size(); ++i)
        if (times[i] > 0.0) env.rate = std::max(env.rate, std::log(env.errors[i] / env.errors.front()) / times[i]);
    return env;
}

} // namespace bose_expand

#endif
