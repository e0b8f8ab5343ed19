#ifndef BOSE_EXPAND_FOCK_HPP
#define BOSE_EXPAND_FOCK_HPP

// Occupation-number machinery: N-body bases, excitation Fock bases over the
// nonzero modes, sparse operators, ladder-operator polynomials, and the
// excitation map between the two for the homogeneous condensate.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <map>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "hartree.hpp"
#include "model.hpp"
#include "terms.hpp"

namespace bose_expand {

using Occupation = std::vector<std::uint16_t>;

inline double binomial_double(int n, int k) {
    if (k < 0 || k > n) return 0.0;
    return std::round(std::exp(std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0)));
}

/// Colexicographic ranking of compositions of a total into a fixed number of parts.
class CompositionRanker {
public:
    CompositionRanker() = default;
    CompositionRanker(int parts, int max_total) : parts_(parts), max_total_(max_total) {
        const int rows = max_total + parts + 1;
        table_.assign(static_cast<std::size_t>(rows) * (parts + 1), 0);
        for (int n = 0; n < rows; ++n) {
            at(n, 0) = 1;
            for (int k = 1; k <= std::min(n, parts); ++k)
                at(n, k) = at(n - 1, k - 1) + (k <= n - 1 ? at(n - 1, k) : 0);
        }
    }

    int parts() const { return parts_; }

    /// Number of compositions of `total` into `parts` parts.
    std::uint64_t count(int total, int parts) const {
        if (total < 0) return 0;
        if (parts == 0) return total == 0 ? 1 : 0;
        return at(total + parts - 1, parts - 1);
    }

    std::uint64_t rank(const std::uint16_t* occ, int total) const {
        std::uint64_t r = 0;
        int t = total;
        for (int i = parts_ - 1; i >= 1; --i) {
            r += count(t, i + 1) - count(t - occ[i], i + 1);
            t -= occ[i];
        }
        return r;
    }

private:
    std::uint64_t& at(int n, int k) { return table_[static_cast<std::size_t>(n) * (parts_ + 1) + k]; }
    std::uint64_t at(int n, int k) const { return table_[static_cast<std::size_t>(n) * (parts_ + 1) + k]; }

    int parts_ = 0;
    int max_total_ = 0;
    std::vector<std::uint64_t> table_;
};

namespace detail {

/// Appends all compositions of `total` into `parts` parts in colexicographic order.
inline void append_compositions(int parts, int total, std::vector<std::uint16_t>& out) {
    Occupation occ(static_cast<std::size_t>(parts), 0);
    auto rec = [&](auto&& self, int pos, int remaining) -> void {
        if (pos == 0) {
            occ[0] = static_cast<std::uint16_t>(remaining);
            out.insert(out.end(), occ.begin(), occ.end());
            return;
        }
        for (int a = 0; a <= remaining; ++a) {
            occ[static_cast<std::size_t>(pos)] = static_cast<std::uint16_t>(a);
            self(self, pos - 1, remaining - a);
        }
    };
    if (parts == 0) return;
    rec(rec, parts - 1, total);
}

} // namespace detail

inline constexpr std::size_t default_dimension_budget = 500000;

/// All occupation vectors over the full mode set with sum N.
class OccupationBasis {
public:
    OccupationBasis() = default;
    OccupationBasis(std::size_t modes, int particles)
        : modes_(modes), particles_(particles), ranker_(static_cast<int>(modes), particles) {
        detail::append_compositions(static_cast<int>(modes), particles, occ_);
        dim_ = occ_.size() / modes;
    }

    std::size_t size() const { return dim_; }
    std::size_t modes() const { return modes_; }
    int particles() const { return particles_; }
    const std::uint16_t* occupation(std::size_t i) const { return occ_.data() + i * modes_; }
    std::size_t index(const std::uint16_t* occ) const { return ranker_.rank(occ, particles_); }
    std::size_t index(const Occupation& occ) const { return index(occ.data()); }

private:
    std::size_t modes_ = 0;
    int particles_ = 0;
    std::size_t dim_ = 0;
    CompositionRanker ranker_;
    std::vector<std::uint16_t> occ_;
};

inline double basis_dimension(std::size_t modes, int particles) {
    return binomial_double(particles + static_cast<int>(modes) - 1, static_cast<int>(modes) - 1);
}

inline OccupationBasis enumerate_basis(const ModeSet& modes, int particles,
                                       std::size_t budget = default_dimension_budget) {
    const double dim = basis_dimension(modes.size(), particles);
    if (dim > static_cast<double>(budget))
        throw CapacityError("occupation basis exceeds the dimension budget", dim, static_cast<double>(budget));
    return OccupationBasis(modes.size(), particles);
}

/// Excitation Fock space over the nonzero modes, sectors 0..k_max.
class ExcitationBasis {
public:
    ExcitationBasis() = default;
    ExcitationBasis(const ModeSet& modes, int k_max)
        : mode_index_(modes.nonzero_indices()), k_max_(k_max),
          ranker_(static_cast<int>(mode_index_.size()), k_max) {
        const int m = static_cast<int>(mode_index_.size());
        offsets_.push_back(0);
        for (int k = 0; k <= k_max; ++k) {
            detail::append_compositions(m, k, occ_);
            offsets_.push_back(occ_.size() / mode_index_.size());
        }
        local_of_.assign(modes.size(), -1);
        for (std::size_t j = 0; j < mode_index_.size(); ++j) local_of_[mode_index_[j]] = static_cast<int>(j);
        negation_.resize(mode_index_.size());
        for (std::size_t j = 0; j < mode_index_.size(); ++j)
            negation_[j] = static_cast<std::size_t>(local_of_[modes.negation(mode_index_[j])]);
    }

    std::size_t size() const { return offsets_.back(); }
    std::size_t modes() const { return mode_index_.size(); }
    int k_max() const { return k_max_; }
    /// ModeSet index of local excitation mode j.
    std::size_t mode_index(std::size_t j) const { return mode_index_[j]; }
    /// Local index of -p for local mode j.
    std::size_t negation(std::size_t j) const { return negation_[j]; }
    int local_of(std::size_t mode_set_index) const { return local_of_[mode_set_index]; }
    std::size_t sector_begin(int k) const { return offsets_[static_cast<std::size_t>(k)]; }
    std::size_t sector_end(int k) const { return offsets_[static_cast<std::size_t>(k) + 1]; }
    const std::uint16_t* occupation(std::size_t i) const { return occ_.data() + i * modes(); }
    int sector(std::size_t i) const {
        int k = 0;
        for (std::size_t j = 0; j < modes(); ++j) k += occupation(i)[j];
        return k;
    }
    std::size_t index(const std::uint16_t* occ, int k) const { return offsets_[static_cast<std::size_t>(k)] + ranker_.rank(occ, k); }
    std::size_t index(const Occupation& occ) const {
        int k = 0;
        for (auto n : occ) k += n;
        return index(occ.data(), k);
    }
    std::size_t vacuum() const { return 0; }

private:
    std::vector<std::size_t> mode_index_;
    std::vector<int> local_of_;
    std::vector<std::size_t> negation_;
    int k_max_ = 0;
    CompositionRanker ranker_;
    std::vector<std::uint16_t> occ_;
    std::vector<std::size_t> offsets_;
};

// ---------------------------------------------------------------------------
// sparse operators

/// Coordinate-list operator with deterministic ordering; duplicates are summed at assembly.
class SparseOperator {
public:
    struct Entry {
        std::size_t row, col;
        cplx value;
    };

    SparseOperator() = default;
    SparseOperator(std::size_t dim, std::vector<Entry> entries, bool hermitian)
        : dim_(dim), hermitian_(hermitian) {
        std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
            return std::tie(a.row, a.col) < std::tie(b.row, b.col);
        });
        for (const auto& e : entries) {
            if (!entries_.empty() && entries_.back().row == e.row && entries_.back().col == e.col)
                entries_.back().value += e.value;
            else
                entries_.push_back(e);
        }
        row_start_.assign(dim_ + 1, 0);
        for (const auto& e : entries_) ++row_start_[e.row + 1];
        for (std::size_t r = 0; r < dim_; ++r) row_start_[r + 1] += row_start_[r];
    }

    std::size_t size() const { return dim_; }
    bool hermitian() const { return hermitian_; }
    const std::vector<Entry>& entries() const { return entries_; }

    Eigen::VectorXcd apply(const Eigen::VectorXcd& x) const {
        Eigen::VectorXcd y(static_cast<Eigen::Index>(dim_));
        for (std::size_t r = 0; r < dim_; ++r) {
            cplx acc = 0.0;
            for (std::size_t e = row_start_[r]; e < row_start_[r + 1]; ++e)
                acc += entries_[e].value * x[static_cast<Eigen::Index>(entries_[e].col)];
            y[static_cast<Eigen::Index>(r)] = acc;
        }
        return y;
    }

    Eigen::MatrixXcd dense() const {
        Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(dim_), static_cast<Eigen::Index>(dim_));
        for (const auto& e : entries_) m(static_cast<Eigen::Index>(e.row), static_cast<Eigen::Index>(e.col)) += e.value;
        return m;
    }

    /// max |A - A^dagger| over stored entries.
    double hermiticity_deviation() const {
        double worst = 0.0;
        for (const auto& e : entries_) worst = std::max(worst, std::abs(e.value - std::conj(at(e.col, e.row))));
        return worst;
    }

    cplx at(std::size_t row, std::size_t col) const {
        auto first = entries_.begin() + static_cast<std::ptrdiff_t>(row_start_[row]);
        auto last = entries_.begin() + static_cast<std::ptrdiff_t>(row_start_[row + 1]);
        auto it = std::lower_bound(first, last, col, [](const Entry& e, std::size_t c) { return e.col < c; });
        return (it != last && it->col == col) ? it->value : cplx{0.0};
    }

    /// Debug dump: one "row,col,re,im" line per entry.
    void write_csv(const std::string& path) const {
        std::ofstream out(path);
        out << "row,col,re,im\n" << std::setprecision(17);
        for (const auto& e : entries_) out << e.row << ',' << e.col << ',' << e.value.real() << ',' << e.value.imag() << '\n';
    }

private:
    std::size_t dim_ = 0;
    bool hermitian_ = false;
    std::vector<Entry> entries_;
    std::vector<std::size_t> row_start_;
};

namespace detail {

/// Applies a*_{c1} a*_{c2} a_{a1} a_{a2} in place; returns the ladder factor (0 when annihilated).
inline double apply_quartic(std::uint16_t* occ, const QuarticTerm& t) {
    double f = 1.0;
    if (occ[t.a2] == 0) return 0.0;
    f *= std::sqrt(static_cast<double>(occ[t.a2]--));
    if (occ[t.a1] == 0) return 0.0;
    f *= std::sqrt(static_cast<double>(occ[t.a1]--));
    f *= std::sqrt(static_cast<double>(++occ[t.c2]));
    f *= std::sqrt(static_cast<double>(++occ[t.c1]));
    return f;
}

} // namespace detail

/// Second-quantized H_N on the occupation basis with coupling 1/(N-1).
inline SparseOperator assemble_hamiltonian(const CutoffModel& model, const OccupationBasis& basis) {
    const auto terms = interaction_terms(model);
    const double lambda = model.coupling();
    const std::size_t m = basis.modes();
    std::vector<SparseOperator::Entry> entries;
    entries.reserve(basis.size() * (terms.size() / 4 + 1));
    Occupation scratch(m);
    for (std::size_t col = 0; col < basis.size(); ++col) {
        const std::uint16_t* occ = basis.occupation(col);
        double diag = 0.0;
        for (std::size_t p = 0; p < m; ++p) diag += kinetic(model.modes[p]) * occ[p];
        if (diag != 0.0) entries.push_back({col, col, diag});
        for (const auto& t : terms) {
            std::copy(occ, occ + m, scratch.begin());
            const double f = detail::apply_quartic(scratch.data(), t);
            if (f == 0.0) continue;
            entries.push_back({basis.index(scratch), col, lambda * t.amplitude * f});
        }
    }
    return SparseOperator(basis.size(), std::move(entries), true);
}

inline SparseOperator assemble_hamiltonian(const CutoffModel& model, std::size_t budget = default_dimension_budget) {
    return assemble_hamiltonian(model, enumerate_basis(model.modes, model.particles, budget));
}

/// Second-quantized one-body operator dGamma(B) for a mode-space matrix B.
inline SparseOperator second_quantize(const Eigen::MatrixXcd& b, const OccupationBasis& basis) {
    const std::size_t m = basis.modes();
    std::vector<SparseOperator::Entry> entries;
    Occupation scratch(m);
    for (std::size_t col = 0; col < basis.size(); ++col) {
        const std::uint16_t* occ = basis.occupation(col);
        for (std::size_t q = 0; q < m; ++q) {
            if (occ[q] == 0) continue;
            for (std::size_t p = 0; p < m; ++p) {
                const cplx w = b(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(q));
                if (w == 0.0) continue;
                std::copy(occ, occ + m, scratch.begin());
                double f = std::sqrt(static_cast<double>(scratch[q]--));
                f *= std::sqrt(static_cast<double>(++scratch[p]));
                entries.push_back({basis.index(scratch), col, w * f});
            }
        }
    }
    return SparseOperator(basis.size(), std::move(entries), b.isApprox(b.adjoint(), 1e-14));
}

// ---------------------------------------------------------------------------
// excitation map

namespace detail {
inline void require_homogeneous(const HartreeState& hartree, const ModeSet& modes) {
    if (!hartree.homogeneous(modes))
        throw UnsupportedError("the excitation map is implemented for the homogeneous torus condensate only");
}
} // namespace detail

/// U_{N,phi}: the sector-k component collects the basis states with N-k particles in the condensate.
inline Eigen::VectorXcd excitation_decompose(const Eigen::VectorXcd& psi, const OccupationBasis& basis,
                                             const HartreeState& hartree, const ModeSet& modes,
                                             const ExcitationBasis& target) {
    detail::require_homogeneous(hartree, modes);
    if (target.k_max() < basis.particles())
        throw TruncationError("excitation basis must hold every sector up to N");
    Eigen::VectorXcd chi = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(target.size()));
    Occupation local(target.modes());
    for (std::size_t i = 0; i < basis.size(); ++i) {
        const std::uint16_t* occ = basis.occupation(i);
        for (std::size_t j = 0; j < target.modes(); ++j) local[j] = occ[target.mode_index(j)];
        chi[static_cast<Eigen::Index>(target.index(local))] = psi[static_cast<Eigen::Index>(i)];
    }
    return chi;
}

inline Eigen::VectorXcd excitation_decompose(const Eigen::VectorXcd& psi, const OccupationBasis& basis,
                                             const HartreeState& hartree, const ModeSet& modes) {
    return excitation_decompose(psi, basis, hartree, modes, ExcitationBasis(modes, basis.particles()));
}

/// Inverse of excitation_decompose; amplitudes in sectors above N are a truncation error.
inline Eigen::VectorXcd excitation_reconstruct(const Eigen::VectorXcd& chi, const ExcitationBasis& source,
                                               const OccupationBasis& basis, const ModeSet& modes) {
    const int n = basis.particles();
    for (int k = n + 1; k <= source.k_max(); ++k)
        for (std::size_t i = source.sector_begin(k); i < source.sector_end(k); ++i)
            if (chi[static_cast<Eigen::Index>(i)] != 0.0)
                throw TruncationError("excitation vector populates sector " + std::to_string(k) +
                                      " above N = " + std::to_string(n));
    Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(basis.size()));
    Occupation full(basis.modes(), 0);
    const int top = std::min(n, source.k_max());
    for (std::size_t i = 0; i < source.sector_end(top); ++i) {
        const std::uint16_t* occ = source.occupation(i);
        int k = 0;
        for (std::size_t j = 0; j < source.modes(); ++j) {
            full[source.mode_index(j)] = occ[j];
            k += occ[j];
        }
        full[modes.zero_index()] = static_cast<std::uint16_t>(n - k);
        psi[static_cast<Eigen::Index>(basis.index(full))] = chi[static_cast<Eigen::Index>(i)];
    }
    return psi;
}

/// Copies the components of `chi` into another excitation basis over the same modes; sectors above target.k_max() are dropped.
inline Eigen::VectorXcd rebase(const Eigen::VectorXcd& chi, const ExcitationBasis& from, const ExcitationBasis& to) {
    Eigen::VectorXcd out = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(to.size()));
    const int top = std::min(from.k_max(), to.k_max());
    for (std::size_t i = 0; i < from.sector_end(top); ++i) out[static_cast<Eigen::Index>(i)] = chi[static_cast<Eigen::Index>(i)];
    return out;
}

/// Norm of the components of `chi` in sectors 0..k.
inline double sector_mass(const Eigen::VectorXcd& chi, const ExcitationBasis& basis, int k) {
    return chi.head(static_cast<Eigen::Index>(basis.sector_end(std::min(k, basis.k_max())))).squaredNorm();
}

/// Exact action of U (H_N - N e_H) U^* on excitation vectors; vectors above sector N are mapped to zero.
inline Eigen::VectorXcd apply_excitation_hamiltonian(const CutoffModel& model, double hartree_energy,
                                                     const ExcitationBasis& in, const Eigen::VectorXcd& chi,
                                                     const ExcitationBasis& out) {
    const int n = model.particles;
    const double lambda = model.coupling();
    const auto terms = interaction_terms(model);
    const std::size_t m = model.modes.size();
    const std::size_t zero = model.modes.zero_index();
    Eigen::VectorXcd y = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(out.size()));
    Occupation full(m), scratch(m), local(out.modes());
    const int top = std::min(n, in.k_max());
    for (std::size_t i = 0; i < in.sector_end(top); ++i) {
        const cplx x = chi[static_cast<Eigen::Index>(i)];
        if (x == 0.0) continue;
        const std::uint16_t* occ = in.occupation(i);
        int k = 0;
        double diag = 0.0;
        std::fill(full.begin(), full.end(), 0);
        for (std::size_t j = 0; j < in.modes(); ++j) {
            full[in.mode_index(j)] = occ[j];
            k += occ[j];
            diag += kinetic(model.modes[in.mode_index(j)]) * occ[j];
        }
        full[zero] = static_cast<std::uint16_t>(n - k);
        diag -= n * hartree_energy;
        if (k <= out.k_max()) y[static_cast<Eigen::Index>(out.index(occ, k))] += diag * x;
        for (const auto& t : terms) {
            scratch = full;
            const double f = detail::apply_quartic(scratch.data(), t);
            if (f == 0.0) continue;
            const int k_out = n - scratch[zero];
            if (k_out > out.k_max()) continue;
            for (std::size_t j = 0; j < out.modes(); ++j) local[j] = scratch[out.mode_index(j)];
            y[static_cast<Eigen::Index>(out.index(local.data(), k_out))] += lambda * t.amplitude * f * x;
        }
    }
    return y;
}

// ---------------------------------------------------------------------------
// ladder-operator polynomials over the excitation modes

struct LadderOp {
    bool create;
    std::uint16_t mode; // local excitation-mode index
    auto operator<=>(const LadderOp&) const = default;
};

inline LadderOp cr(std::size_t mode) { return {true, static_cast<std::uint16_t>(mode)}; }
inline LadderOp an(std::size_t mode) { return {false, static_cast<std::uint16_t>(mode)}; }

/// coefficient * ops[0] ops[1] ... ops[n-1]; the rightmost operator acts first.
struct Monomial {
    cplx coefficient;
    std::vector<LadderOp> ops;
};

using OperatorPoly = std::vector<Monomial>;

inline bool is_normal_ordered(const std::vector<LadderOp>& ops) {
    for (std::size_t i = 1; i < ops.size(); ++i)
        if (!ops[i - 1].create && ops[i].create) return false;
    return true;
}

namespace detail {

inline void normal_order_into(cplx coef, std::vector<LadderOp> ops, std::map<std::vector<LadderOp>, cplx>& acc) {
    for (std::size_t i = 0; i + 1 < ops.size(); ++i) {
        if (!ops[i].create && ops[i + 1].create) {
            if (ops[i].mode == ops[i + 1].mode) {
                std::vector<LadderOp> contracted;
                contracted.reserve(ops.size() - 2);
                contracted.insert(contracted.end(), ops.begin(), ops.begin() + static_cast<std::ptrdiff_t>(i));
                contracted.insert(contracted.end(), ops.begin() + static_cast<std::ptrdiff_t>(i + 2), ops.end());
                normal_order_into(coef, std::move(contracted), acc);
            }
            std::swap(ops[i], ops[i + 1]);
            normal_order_into(coef, std::move(ops), acc);
            return;
        }
    }
    // creators commute among themselves, as do annihilators
    auto split = std::find_if(ops.begin(), ops.end(), [](const LadderOp& o) { return !o.create; });
    std::sort(ops.begin(), split);
    std::sort(split, ops.end());
    acc[ops] += coef;
}

} // namespace detail

/// Normal-orders every monomial, merges equal operator strings and drops |coefficient| <= drop_tol.
/// The result is sorted by operator string.
inline OperatorPoly simplify(const OperatorPoly& poly, double drop_tol = 1e-13) {
    std::map<std::vector<LadderOp>, cplx> acc;
    for (const auto& m : poly) detail::normal_order_into(m.coefficient, m.ops, acc);
    OperatorPoly out;
    for (auto& [ops, c] : acc)
        if (std::abs(c) > drop_tol) out.push_back({c, ops});
    return out;
}

inline OperatorPoly adjoint(const OperatorPoly& poly) {
    OperatorPoly out;
    out.reserve(poly.size());
    for (const auto& m : poly) {
        Monomial a{std::conj(m.coefficient), {}};
        for (auto it = m.ops.rbegin(); it != m.ops.rend(); ++it) a.ops.push_back({!it->create, it->mode});
        out.push_back(std::move(a));
    }
    return out;
}

/// Linear substitution op -> sum_i w_i op_i applied to every ladder operator (ordering preserved).
template <class Substitution>
OperatorPoly substitute(const OperatorPoly& poly, Substitution&& sub, double drop_tol = 0.0) {
    OperatorPoly out;
    for (const auto& m : poly) {
        OperatorPoly partial{{m.coefficient, {}}};
        for (const auto& op : m.ops) {
            const std::vector<std::pair<LadderOp, cplx>> images = sub(op);
            OperatorPoly next;
            next.reserve(partial.size() * images.size());
            for (const auto& pm : partial)
                for (const auto& [img, w] : images) {
                    if (w == 0.0) continue;
                    Monomial nm{pm.coefficient * w, pm.ops};
                    nm.ops.push_back(img);
                    next.push_back(std::move(nm));
                }
            partial = std::move(next);
        }
        for (auto& pm : partial)
            if (std::abs(pm.coefficient) > drop_tol) out.push_back(std::move(pm));
    }
    return out;
}

/// Applies `poly` to a vector over `in`; components landing above out.k_max() are dropped.
inline Eigen::VectorXcd apply(const OperatorPoly& poly, const ExcitationBasis& in, const Eigen::VectorXcd& x,
                              const ExcitationBasis& out) {
    Eigen::VectorXcd y = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(out.size()));
    Occupation scratch(in.modes());
    for (std::size_t i = 0; i < in.size(); ++i) {
        const cplx xi = x[static_cast<Eigen::Index>(i)];
        if (xi == 0.0) continue;
        const std::uint16_t* occ = in.occupation(i);
        int k0 = 0;
        for (std::size_t j = 0; j < in.modes(); ++j) k0 += occ[j];
        for (const auto& m : poly) {
            std::copy(occ, occ + in.modes(), scratch.begin());
            int k = k0;
            double f = 1.0;
            for (auto it = m.ops.rbegin(); it != m.ops.rend(); ++it) {
                std::uint16_t& n = scratch[it->mode];
                if (it->create) {
                    f *= std::sqrt(static_cast<double>(++n));
                    ++k;
                } else {
                    if (n == 0) {
                        f = 0.0;
                        break;
                    }
                    f *= std::sqrt(static_cast<double>(n--));
                    --k;
                }
            }
            if (f == 0.0 || k > out.k_max()) continue;
            y[static_cast<Eigen::Index>(out.index(scratch.data(), k))] += m.coefficient * f * xi;
        }
    }
    return y;
}

inline Eigen::VectorXcd apply(const OperatorPoly& poly, const ExcitationBasis& basis, const Eigen::VectorXcd& x) {
    return apply(poly, basis, x, basis);
}

/// Realizes `poly` on the truncated excitation basis; transitions leaving the basis are dropped.
inline SparseOperator realize(const OperatorPoly& poly, const ExcitationBasis& basis, bool hermitian = true) {
    std::vector<SparseOperator::Entry> entries;
    Occupation scratch(basis.modes());
    for (std::size_t col = 0; col < basis.size(); ++col) {
        const std::uint16_t* occ = basis.occupation(col);
        int k0 = 0;
        for (std::size_t j = 0; j < basis.modes(); ++j) k0 += occ[j];
        for (const auto& m : poly) {
            std::copy(occ, occ + basis.modes(), scratch.begin());
            int k = k0;
            double f = 1.0;
            for (auto it = m.ops.rbegin(); it != m.ops.rend(); ++it) {
                std::uint16_t& n = scratch[it->mode];
                if (it->create) {
                    f *= std::sqrt(static_cast<double>(++n));
                    ++k;
                } else {
                    if (n == 0) {
                        f = 0.0;
                        break;
                    }
                    f *= std::sqrt(static_cast<double>(n--));
                    --k;
                }
            }
            if (f == 0.0 || k > basis.k_max()) continue;
            entries.push_back({basis.index(scratch.data(), k), col, m.coefficient * f});
        }
    }
    return SparseOperator(basis.size(), std::move(entries), hermitian);
}

/// Number operator N_perp = sum_p a*_p a_p over the excitation modes.
inline OperatorPoly number_operator(std::size_t modes) {
    OperatorPoly n;
    for (std::size_t j = 0; j < modes; ++j) n.push_back({1.0, {cr(j), an(j)}});
    return n;
}

} // namespace bose_expand

#endif
