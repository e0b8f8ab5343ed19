#ifndef BOSE_EXPAND_BOGOLIUBOV_HPP
#define BOSE_EXPAND_BOGOLIUBOV_HPP

// Quadratic excitation Hamiltonian H0 = sum A n_p + 1/2 sum B (a*_p a*_-p + h.c.)
// for the homogeneous torus condensate, its symplectic diagonalization and the
// squeezed ground state chi0.

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include "errors.hpp"
#include "fock.hpp"
#include "hartree.hpp"
#include "model.hpp"

namespace bose_expand {

/// Coefficients indexed by local excitation mode (ModeSet order with the zero mode removed).
struct QuadraticHamiltonian {
    ModeSet modes;
    std::vector<Momentum> momenta;
    std::vector<std::size_t> negation;
    std::vector<double> A;
    std::vector<double> B;
    int dimension = 1;

    std::size_t size() const { return A.size(); }
};

struct BogoliubovMap {
    QuadraticHamiltonian h0;
    std::vector<double> u, v, epsilon, c;
    double E0 = 0.0;

    std::size_t size() const { return u.size(); }
    std::size_t negation(std::size_t j) const { return h0.negation[j]; }
};

struct QuasifreeState {
    ExcitationBasis basis;
    Eigen::VectorXcd coefficients;
    /// 1 - (mass kept in sectors 0..k_max) of the untruncated state.
    double defect = 0.0;
};

inline constexpr double default_chi0_defect = 1e-8;
inline constexpr int default_chi0_sectors = 12;

inline QuadraticHamiltonian assemble_H0(const CutoffModel& model, const HartreeState& hartree) {
    if (!hartree.on_torus) throw UnsupportedError("the Bogoliubov Hamiltonian is implemented on the torus only");
    detail::require_homogeneous(hartree, model.modes);
    QuadraticHamiltonian h;
    h.modes = model.modes;
    h.dimension = model.modes.dimension();
    const auto nonzero = model.modes.nonzero_indices();
    const std::size_t zero = model.modes.zero_index();
    for (std::size_t idx : nonzero) {
        const Momentum& n = model.modes[idx];
        h.momenta.push_back(n);
        h.A.push_back(kinetic(n) + model.vhat(n));
        h.B.push_back(model.vhat(n));
        const std::size_t neg = model.modes.negation(idx);
        h.negation.push_back(neg < zero ? neg : neg - 1);
    }
    return h;
}

inline BogoliubovMap diagonalize(const QuadraticHamiltonian& h0) {
    BogoliubovMap map;
    map.h0 = h0;
    const std::size_t m = h0.size();
    map.u.resize(m);
    map.v.resize(m);
    map.epsilon.resize(m);
    map.c.resize(m);
    double e0 = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
        const double a = h0.A[j];
        const double b = h0.B[j];
        if (!(a > std::abs(b)))
            throw InstabilityError("A(p) <= |B(p)| at p=" + to_string(h0.momenta[j], h0.dimension));
        const double theta = 0.5 * std::atanh(b / a);
        map.u[j] = std::cosh(theta);
        map.v[j] = std::sinh(theta);
        // (a - b)(a + b) avoids cancellation when b is tiny
        map.epsilon[j] = std::sqrt((a - b) * (a + b));
        map.c[j] = -map.v[j] / map.u[j];
        e0 += map.epsilon[j] - a;
    }
    map.E0 = 0.5 * e0;
    return map;
}

/// Un-normalized pair amplitude prod c_p^{m_p} over pairs (p, -p), or 0 if the occupation is not pair-balanced.
inline double pair_amplitude(const BogoliubovMap& map, const std::uint16_t* occ) {
    double amp = 1.0;
    for (std::size_t j = 0; j < map.size(); ++j) {
        const std::size_t nj = map.negation(j);
        if (occ[j] != occ[nj]) return 0.0;
        if (j < nj) amp *= std::pow(map.c[j], occ[j]);
    }
    return amp;
}

/// chi0 = U0^* Omega on sectors 0..k_max, renormalized over the kept sectors.
inline QuasifreeState chi0_state(const BogoliubovMap& map, int k_max, double max_defect = default_chi0_defect) {
    for (std::size_t j = 0; j < map.size(); ++j)
        if (!(std::abs(map.c[j]) < 1.0)) throw InstabilityError("pair amplitude |c_p| >= 1");
    QuasifreeState s;
    s.basis = ExcitationBasis(map.h0.modes, k_max);
    s.coefficients = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(s.basis.size()));
    double full_norm_sq = 1.0;
    for (std::size_t j = 0; j < map.size(); ++j)
        if (j < map.negation(j)) full_norm_sq /= 1.0 - map.c[j] * map.c[j];
    double kept = 0.0;
    for (int k = 0; k <= k_max; k += 2)
        for (std::size_t i = s.basis.sector_begin(k); i < s.basis.sector_end(k); ++i) {
            const double a = pair_amplitude(map, s.basis.occupation(i));
            s.coefficients[static_cast<Eigen::Index>(i)] = a;
            kept += a * a;
        }
    s.defect = std::max(0.0, 1.0 - kept / full_norm_sq);
    if (s.defect > max_defect)
        throw TruncationError("chi0 sector cutoff " + std::to_string(k_max) + " leaves mass defect " +
                              std::to_string(s.defect));
    s.coefficients /= std::sqrt(kept);
    return s;
}

/// Doubles the sector cutoff from `k_start` until the mass defect drops below `max_defect`.
inline QuasifreeState chi0_state_adaptive(const BogoliubovMap& map, int k_start = default_chi0_sectors,
                                          double max_defect = default_chi0_defect, int k_limit = 96) {
    for (int k = k_start;; k *= 2) {
        try {
            return chi0_state(map, k, max_defect);
        } catch (const TruncationError&) {
            if (2 * k > k_limit) throw;
        }
    }
}

/// <chi, N_perp^order chi> on the kept sectors.
inline double number_moment(const Eigen::VectorXcd& chi, const ExcitationBasis& basis, int order) {
    double m = 0.0;
    for (int k = 0; k <= basis.k_max(); ++k) {
        const double w = chi.segment(static_cast<Eigen::Index>(basis.sector_begin(k)),
                                     static_cast<Eigen::Index>(basis.sector_end(k) - basis.sector_begin(k)))
                             .squaredNorm();
        m += w * std::pow(static_cast<double>(k), order);
    }
    return m;
}

inline double number_moments(const QuasifreeState& s, int order) {
    if (order < 1 || order > 4) throw ValidationError("number moment order must be 1..4");
    return number_moment(s.coefficients, s.basis, order);
}

/// The quadratic Hamiltonian as a ladder polynomial over the local excitation modes.
inline OperatorPoly quadratic_poly(const QuadraticHamiltonian& h0) {
    OperatorPoly p;
    for (std::size_t j = 0; j < h0.size(); ++j) {
        const std::size_t nj = h0.negation[j];
        p.push_back({h0.A[j], {cr(j), an(j)}});
        p.push_back({0.5 * h0.B[j], {cr(j), cr(nj)}});
        p.push_back({0.5 * h0.B[j], {an(j), an(nj)}});
    }
    return simplify(p);
}

/// Images of a ladder operator under X -> U0 X U0^*: a_p -> u a_p - v a*_-p.
inline std::vector<std::pair<LadderOp, cplx>> rotate_op(const BogoliubovMap& map, const LadderOp& op) {
    const std::size_t j = op.mode;
    return {{op, map.u[j]}, {LadderOp{!op.create, static_cast<std::uint16_t>(map.negation(j))}, -map.v[j]}};
}

/// Images under X -> U0^* X U0: a_p -> b_p = u a_p + v a*_-p.
inline std::vector<std::pair<LadderOp, cplx>> unrotate_op(const BogoliubovMap& map, const LadderOp& op) {
    const std::size_t j = op.mode;
    return {{op, map.u[j]}, {LadderOp{!op.create, static_cast<std::uint16_t>(map.negation(j))}, map.v[j]}};
}

inline OperatorPoly rotate(const OperatorPoly& poly, const BogoliubovMap& map) {
    return simplify(substitute(poly, [&](const LadderOp& op) { return rotate_op(map, op); }));
}

inline OperatorPoly unrotate(const OperatorPoly& poly, const BogoliubovMap& map) {
    return simplify(substitute(poly, [&](const LadderOp& op) { return unrotate_op(map, op); }));
}

/// Squeezing generator S with exp(S) Omega proportional to chi0: S = sum_{pairs} theta (a*_p a*_-p - a_p a_-p) with tanh(theta) = c.
inline OperatorPoly squeeze_generator(const BogoliubovMap& map) {
    OperatorPoly s;
    for (std::size_t j = 0; j < map.size(); ++j) {
        const std::size_t nj = map.negation(j);
        if (j > nj) continue;
        const double theta = std::atanh(map.c[j]);
        s.push_back({theta, {cr(j), cr(nj)}});
        s.push_back({-theta, {an(j), an(nj)}});
    }
    return simplify(s);
}

} // namespace bose_expand

#endif
