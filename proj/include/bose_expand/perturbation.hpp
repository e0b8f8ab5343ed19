#ifndef BOSE_EXPAND_PERTURBATION_HPP
#define BOSE_EXPAND_PERTURBATION_HPP

// Large-N expansion of U (H_N - N e_H) U^* for the homogeneous condensate.
//
// Every zero-mode ladder operator becomes a factor sqrt(N - N_perp - d) acting
// to the right of the excitation part. Writing each factor as
// sqrt(N) sqrt(1 - (N_perp + d)/N) and the coupling as N^-1 (1 - 1/N)^-1 gives
// a power series in N^-1/2 whose coefficients are normal-ordered ladder
// polynomials; orders N^0, N^-1/2, N^-1 are H0, H1, H2.

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <map>
#include <vector>

#include "bogoliubov.hpp"
#include "errors.hpp"
#include "fock.hpp"
#include "hartree.hpp"
#include "model.hpp"
#include "terms.hpp"

namespace bose_expand {

/// Coefficients of N^{-m/2} for m = -2..2 (index m + 2).
struct ExpansionOrders {
    std::array<OperatorPoly, 5> by_order;

    const OperatorPoly& order(int m) const { return by_order[static_cast<std::size_t>(m + 2)]; }
    OperatorPoly& order(int m) { return by_order[static_cast<std::size_t>(m + 2)]; }
    const OperatorPoly& H0() const { return order(0); }
    const OperatorPoly& H1() const { return order(1); }
    const OperatorPoly& H2() const { return order(2); }
};

namespace detail {

/// Polynomial in N_perp; entry i is the coefficient of N_perp^i.
using NumberPoly = std::vector<double>;

inline NumberPoly poly_mul(const NumberPoly& a, const NumberPoly& b) {
    NumberPoly r(a.size() + b.size() - 1, 0.0);
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j) r[i + j] += a[i] * b[j];
    return r;
}

/// Series in x = 1/N truncated at x^order with NumberPoly coefficients.
using Series = std::vector<NumberPoly>;

inline Series series_mul(const Series& a, const Series& b, int order) {
    Series r(static_cast<std::size_t>(order) + 1, NumberPoly{0.0});
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size() && i + j <= static_cast<std::size_t>(order); ++j) {
            const NumberPoly prod = poly_mul(a[i], b[j]);
            NumberPoly& dst = r[i + j];
            if (dst.size() < prod.size()) dst.resize(prod.size(), 0.0);
            for (std::size_t k = 0; k < prod.size(); ++k) dst[k] += prod[k];
        }
    return r;
}

/// sqrt(1 - (N_perp + d) x) up to x^order.
inline Series sqrt_factor(int d, int order) {
    Series s;
    double binom = 1.0; // binomial(1/2, j) (-1)^j
    NumberPoly power{1.0};
    for (int j = 0; j <= order; ++j) {
        NumberPoly term = power;
        for (double& c : term) c *= binom;
        s.push_back(term);
        power = poly_mul(power, NumberPoly{static_cast<double>(d), 1.0});
        binom *= -(0.5 - j) / (j + 1);
    }
    return s;
}

inline std::size_t local_mode(const ModeSet& modes, std::size_t idx) {
    return idx < modes.zero_index() ? idx : idx - 1;
}

/// W * N_perp^power as a list of monomials (not yet normal-ordered).
inline void append_with_number_power(OperatorPoly& out, cplx coef, const std::vector<LadderOp>& w, int power,
                                     std::size_t modes) {
    std::vector<std::vector<LadderOp>> strings{w};
    for (int i = 0; i < power; ++i) {
        std::vector<std::vector<LadderOp>> next;
        next.reserve(strings.size() * modes);
        for (const auto& s : strings)
            for (std::size_t q = 0; q < modes; ++q) {
                auto t = s;
                t.push_back(cr(q));
                t.push_back(an(q));
                next.push_back(std::move(t));
            }
        strings = std::move(next);
    }
    for (auto& s : strings) out.push_back({coef, std::move(s)});
}

} // namespace detail

/// Expansion coefficients of U (H_N - N e_H) U^* in powers of N^{-1/2} up to N^{-1}.
inline ExpansionOrders expand_excitation_hamiltonian(const CutoffModel& model, const HartreeState& hartree) {
    if (!hartree.on_torus) throw UnsupportedError("the expansion is implemented on the torus only");
    detail::require_homogeneous(hartree, model.modes);
    const ModeSet& modes = model.modes;
    const std::size_t zero = modes.zero_index();
    const std::size_t m = modes.size() - 1;
    std::array<OperatorPoly, 5> raw;

    for (std::size_t idx : modes.nonzero_indices()) {
        const std::size_t j = detail::local_mode(modes, idx);
        raw[2].push_back({kinetic(modes[idx]), {cr(j), an(j)}});
    }
    raw[0].push_back({-hartree.energy, {}});

    for (const auto& t : interaction_terms(model)) {
        // zero-mode annihilators act first (a2 then a1), creators after
        const std::array<std::size_t, 4> order_ops{t.a2, t.a1, t.c2, t.c1};
        std::vector<int> shifts;
        int removed = 0;
        for (int i = 0; i < 2; ++i)
            if (order_ops[static_cast<std::size_t>(i)] == zero) shifts.push_back(removed++);
        int added = 0;
        for (int i = 2; i < 4; ++i)
            if (order_ops[static_cast<std::size_t>(i)] == zero) {
                ++added;
                shifts.push_back(removed - added);
            }
        const int r = static_cast<int>(shifts.size());
        std::vector<LadderOp> w;
        for (std::size_t c : {t.c1, t.c2})
            if (c != zero) w.push_back(cr(detail::local_mode(modes, c)));
        for (std::size_t a : {t.a1, t.a2})
            if (a != zero) w.push_back(an(detail::local_mode(modes, a)));

        // N^{r/2 - 1} x^j with m = 2 + 2j - r <= 2
        const int jmax = r / 2;
        detail::Series series{detail::NumberPoly{1.0}};
        for (int d : shifts) series = detail::series_mul(series, detail::sqrt_factor(d, jmax), jmax);
        detail::Series coupling;
        for (int j = 0; j <= jmax; ++j) coupling.push_back(detail::NumberPoly{1.0});
        series = detail::series_mul(series, coupling, jmax);
        for (int j = 0; j <= jmax; ++j) {
            const int order = 2 + 2 * j - r;
            if (order > 2) break;
            const auto& p = series[static_cast<std::size_t>(j)];
            for (std::size_t power = 0; power < p.size(); ++power)
                if (p[power] != 0.0)
                    detail::append_with_number_power(raw[static_cast<std::size_t>(order + 2)], t.amplitude * p[power],
                                                     w, static_cast<int>(power), m);
        }
    }
    ExpansionOrders out;
    for (std::size_t i = 0; i < 5; ++i) out.by_order[i] = simplify(raw[i], 1e-12);
    return out;
}

inline OperatorPoly assemble_H1(const CutoffModel& model, const HartreeState& hartree) {
    return expand_excitation_hamiltonian(model, hartree).H1();
}

inline OperatorPoly assemble_H2(const CutoffModel& model, const HartreeState& hartree) {
    return expand_excitation_hamiltonian(model, hartree).H2();
}

/// Momentum carried by a monomial (creators add, annihilators subtract).
inline Momentum monomial_momentum(const Monomial& mono, const ModeSet& modes) {
    const auto nonzero = modes.nonzero_indices();
    Momentum total{0, 0, 0};
    for (const auto& op : mono.ops) {
        const Momentum& n = modes[nonzero[op.mode]];
        total = op.create ? total + n : total - n;
    }
    return total;
}

/// <Omega, U0 H1 U0^* Omega>: the vacuum coefficient of the rotated polynomial.
inline double verify_half_order(const BogoliubovMap& map, const OperatorPoly& h1) {
    const OperatorPoly rotated = rotate(h1, map);
    for (const auto& mono : rotated)
        if (mono.ops.empty()) return mono.coefficient.real();
    return 0.0;
}

struct ChiOne {
    std::size_t modes = 0;
    /// Rotated frame: chi1~ = sum Theta1(p) a*_p Omega + sum Theta3(p,q,r) a*_p a*_q a*_r Omega.
    std::vector<cplx> theta1;
    /// Symmetric tensor, index (p * modes + q) * modes + r.
    std::vector<cplx> theta3;
    /// Sum over states s of |<s, U0 H1 U0^* Omega>|^2 / (sum of mode energies of s).
    double second_order = 0.0;

    cplx t3(std::size_t p, std::size_t q, std::size_t r) const { return theta3[(p * modes + q) * modes + r]; }
};

namespace detail {
inline void require_cubic_free_of_constants(const OperatorPoly& rotated) {
    for (const auto& mono : rotated)
        if (mono.ops.empty() && std::abs(mono.coefficient) > 1e-10)
            throw ValidationError("the cubic coefficient has a nonzero vacuum expectation");
}
} // namespace detail

inline ChiOne compute_chi1(const BogoliubovMap& map, const OperatorPoly& h1) {
    const std::size_t m = map.size();
    for (double e : map.epsilon)
        if (!(e > 0.0)) throw InstabilityError("singular resolvent: zero Bogoliubov mode energy");
    ChiOne chi;
    chi.modes = m;
    chi.theta1.assign(m, 0.0);
    chi.theta3.assign(m * m * m, 0.0);
    const OperatorPoly rotated = rotate(h1, map);
    detail::require_cubic_free_of_constants(rotated);

    std::map<std::array<std::size_t, 3>, cplx> triples;
    for (const auto& mono : rotated) {
        if (!std::all_of(mono.ops.begin(), mono.ops.end(), [](const LadderOp& o) { return o.create; })) continue;
        if (mono.ops.size() == 1) {
            const std::size_t p = mono.ops[0].mode;
            chi.theta1[p] += mono.coefficient / (-map.epsilon[p]);
            chi.second_order += std::norm(mono.coefficient) / map.epsilon[p];
        } else if (mono.ops.size() == 3) {
            std::array<std::size_t, 3> key{mono.ops[0].mode, mono.ops[1].mode, mono.ops[2].mode};
            std::sort(key.begin(), key.end());
            triples[key] += mono.coefficient;
        } else {
            throw ValidationError("unexpected creation string of length " + std::to_string(mono.ops.size()) +
                                  " in the rotated cubic coefficient");
        }
    }
    for (const auto& [key, coef] : triples) {
        const double energy = map.epsilon[key[0]] + map.epsilon[key[1]] + map.epsilon[key[2]];
        // multiplicities: a*_p a*_q a*_r Omega has norm sqrt(prod n!)
        int fact = 1;
        std::map<std::size_t, int> counts;
        for (auto k : key) fact *= ++counts[k];
        chi.second_order += std::norm(coef) * fact / energy;
        const cplx value = coef / (-energy) * static_cast<double>(fact) / 6.0;
        std::array<std::size_t, 3> perm = key;
        do {
            chi.theta3[(perm[0] * m + perm[1]) * m + perm[2]] = value;
        } while (std::next_permutation(perm.begin(), perm.end()));
    }
    return chi;
}

/// chi1~ (rotated frame) as a polynomial acting on Omega.
inline OperatorPoly chi1_rotated_poly(const ChiOne& chi) {
    OperatorPoly p;
    const std::size_t m = chi.modes;
    for (std::size_t a = 0; a < m; ++a)
        if (chi.theta1[a] != 0.0) p.push_back({chi.theta1[a], {cr(a)}});
    for (std::size_t a = 0; a < m; ++a)
        for (std::size_t b = 0; b < m; ++b)
            for (std::size_t c = 0; c < m; ++c) {
                const cplx t = chi.t3(a, b, c);
                if (t != 0.0) p.push_back({t, {cr(a), cr(b), cr(c)}});
            }
    return simplify(p);
}

/// Operator X1 with chi1 = X1 chi0 in the original frame (creators replaced by b*_p).
inline OperatorPoly chi1_operator(const ChiOne& chi, const BogoliubovMap& map) {
    return unrotate(chi1_rotated_poly(chi), map);
}

/// chi1 = U0^* chi1~ on the excitation basis `out`, from chi0 given on `in`.
inline Eigen::VectorXcd chi1_vector(const ChiOne& chi, const BogoliubovMap& map, const ExcitationBasis& in,
                                    const Eigen::VectorXcd& chi0, const ExcitationBasis& out) {
    return apply(chi1_operator(chi, map), in, chi0, out);
}

inline double compute_E1(const BogoliubovMap& map, const OperatorPoly& h1, const OperatorPoly& h2) {
    double vacuum = 0.0;
    for (const auto& mono : rotate(h2, map))
        if (mono.ops.empty()) vacuum = mono.coefficient.real();
    return vacuum - compute_chi1(map, h1).second_order;
}

/// Drops sectors above N so the excitation vector lies in F^{<=N}.
inline Eigen::VectorXcd truncate_sectors(const Eigen::VectorXcd& chi, const ExcitationBasis& basis, int n) {
    Eigen::VectorXcd out = chi;
    if (n < basis.k_max()) {
        const auto begin = static_cast<Eigen::Index>(basis.sector_end(n));
        out.segment(begin, out.size() - begin).setZero();
    }
    return out;
}

/// psi_{N,l} = U^* chi_l on the N-body occupation basis.
inline Eigen::VectorXcd assemble_psi_N_ell(const Eigen::VectorXcd& chi, const ExcitationBasis& basis,
                                           const OccupationBasis& occupation, const ModeSet& modes) {
    return excitation_reconstruct(chi, basis, occupation, modes);
}

/// Bundles everything the static expansion produces for one model.
struct StaticExpansion {
    HartreeState hartree;
    ExpansionOrders orders;
    QuadraticHamiltonian h0;
    BogoliubovMap map;
    ChiOne chi1;
    double E_half = 0.0;
    double E1 = 0.0;
};

inline StaticExpansion expand_static(const CutoffModel& model) {
    StaticExpansion s;
    s.hartree = minimize_hartree(model);
    s.orders = expand_excitation_hamiltonian(model, s.hartree);
    s.h0 = assemble_H0(model, s.hartree);
    s.map = diagonalize(s.h0);
    s.E_half = verify_half_order(s.map, s.orders.H1());
    s.chi1 = compute_chi1(s.map, s.orders.H1());
    s.E1 = compute_E1(s.map, s.orders.H1(), s.orders.H2());
    return s;
}

} // namespace bose_expand

#endif
