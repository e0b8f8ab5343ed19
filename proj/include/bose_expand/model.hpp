#ifndef BOSE_EXPAND_MODEL_HPP
#define BOSE_EXPAND_MODEL_HPP

// Ground-truth cutoff model: momentum modes on the unit torus, the pair
// potential, the particle number, and (for trap problems) a sampled trap.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "errors.hpp"

namespace bose_expand {

inline constexpr double two_pi = 2.0 * std::numbers::pi;
inline constexpr double four_pi_sq = two_pi * two_pi;

/// Integer momentum label n; the physical momentum is 2*pi*n. Unused components are zero.
using Momentum = std::array<int, 3>;

inline Momentum operator+(const Momentum& a, const Momentum& b) {
    return {a[0] + b[0], a[1] + b[1], a[2] + b[2]};
}
inline Momentum operator-(const Momentum& a, const Momentum& b) {
    return {a[0] - b[0], a[1] - b[1], a[2] - b[2]};
}
inline Momentum operator-(const Momentum& a) { return {-a[0], -a[1], -a[2]}; }

inline int norm_sq(const Momentum& n) { return n[0] * n[0] + n[1] * n[1] + n[2] * n[2]; }
inline int sup_norm(const Momentum& n) {
    return std::max({std::abs(n[0]), std::abs(n[1]), std::abs(n[2])});
}
/// |p|^2 = 4 pi^2 |n|^2.
inline double kinetic(const Momentum& n) { return four_pi_sq * norm_sq(n); }

inline std::string to_string(const Momentum& n, int dimension = 3) {
    std::ostringstream os;
    os << '(';
    for (int i = 0; i < dimension; ++i) os << (i ? "," : "") << n[i];
    os << ')';
    return os.str();
}

inline constexpr std::size_t default_mode_budget = 343;

/// Momentum modes {2 pi n : |n|_inf <= K} in lexicographic order of n.
class ModeSet {
public:
    ModeSet() = default;

    int dimension() const { return dimension_; }
    int cutoff() const { return cutoff_; }
    std::size_t size() const { return modes_.size(); }
    const Momentum& operator[](std::size_t i) const { return modes_[i]; }
    const std::vector<Momentum>& modes() const { return modes_; }
    std::size_t zero_index() const { return zero_; }
    /// Index of -p.
    std::size_t negation(std::size_t i) const { return negation_[i]; }

    /// Index of momentum n, or nullopt when n lies outside the cutoff box.
    std::optional<std::size_t> find(const Momentum& n) const {
        for (int a = 0; a < 3; ++a) {
            if (a >= dimension_ && n[a] != 0) return std::nullopt;
            if (a < dimension_ && std::abs(n[a]) > cutoff_) return std::nullopt;
        }
        std::size_t idx = 0;
        const std::size_t side = 2 * cutoff_ + 1;
        for (int a = 0; a < dimension_; ++a) idx = idx * side + static_cast<std::size_t>(n[a] + cutoff_);
        return idx;
    }

    /// Indices of the nonzero modes in mode-set order.
    std::vector<std::size_t> nonzero_indices() const {
        std::vector<std::size_t> out;
        for (std::size_t i = 0; i < size(); ++i)
            if (i != zero_) out.push_back(i);
        return out;
    }

    friend ModeSet build_mode_set(int dimension, int cutoff, std::size_t budget);

private:
    int dimension_ = 1;
    int cutoff_ = 1;
    std::vector<Momentum> modes_;
    std::vector<std::size_t> negation_;
    std::size_t zero_ = 0;
};

inline ModeSet build_mode_set(int dimension, int cutoff, std::size_t budget = default_mode_budget) {
    if (dimension < 1 || dimension > 3)
        throw ValidationError("dimension must be 1, 2 or 3, got " + std::to_string(dimension));
    if (cutoff < 1) throw ValidationError("cutoff must be >= 1, got " + std::to_string(cutoff));
    const double count = std::pow(2.0 * cutoff + 1.0, dimension);
    if (count > static_cast<double>(budget))
        throw CapacityError("mode set exceeds budget", count, static_cast<double>(budget));

    ModeSet set;
    set.dimension_ = dimension;
    set.cutoff_ = cutoff;
    const int side = 2 * cutoff + 1;
    const auto total = static_cast<std::size_t>(count);
    set.modes_.reserve(total);
    for (std::size_t idx = 0; idx < total; ++idx) {
        Momentum n{0, 0, 0};
        std::size_t rest = idx;
        for (int a = dimension - 1; a >= 0; --a) {
            n[a] = static_cast<int>(rest % side) - cutoff;
            rest /= side;
        }
        set.modes_.push_back(n);
    }
    set.zero_ = total / 2;
    set.negation_.resize(total);
    for (std::size_t i = 0; i < total; ++i) set.negation_[i] = total - 1 - i;
    return set;
}

/// Fourier coefficients v_hat(k) of an even pair potential of positive type.
class PairPotential {
public:
    enum class Kind { constant, table, gaussian };

    static PairPotential constant(double value) {
        PairPotential v;
        v.kind_ = Kind::constant;
        v.value_ = value;
        return v;
    }
    /// Entries not listed are zero.
    static PairPotential table(std::map<Momentum, double> entries) {
        PairPotential v;
        v.kind_ = Kind::table;
        v.entries_ = std::move(entries);
        return v;
    }
    /// v(x) = amplitude * exp(-|x|^2 / (2 width^2)).
    static PairPotential gaussian(double amplitude, double width) {
        PairPotential v;
        v.kind_ = Kind::gaussian;
        v.value_ = amplitude;
        v.width_ = width;
        return v;
    }

    Kind kind() const { return kind_; }
    double scale() const { return scale_; }
    double amplitude() const { return value_; }
    double width() const { return width_; }
    const std::map<Momentum, double>& entries() const { return entries_; }

    /// Fourier coefficient at integer momentum n on the unit torus of dimension d.
    double fourier(const Momentum& n, int dimension) const {
        switch (kind_) {
        case Kind::constant: return scale_ * value_;
        case Kind::table: {
            auto it = entries_.find(n);
            return it == entries_.end() ? 0.0 : scale_ * it->second;
        }
        case Kind::gaussian: {
            const double s2 = width_ * width_;
            return scale_ * value_ * std::pow(two_pi * s2, 0.5 * dimension) *
                   std::exp(-0.5 * s2 * kinetic(n));
        }
        }
        return 0.0;
    }

    /// Contact strength c of v = c * delta, valid for the constant kind.
    double contact_strength() const { return scale_ * value_; }

    /// The potential lambda * v.
    PairPotential scaled(double lambda) const {
        PairPotential v = *this;
        v.scale_ *= lambda;
        return v;
    }

    bool vanishes() const {
        if (scale_ == 0.0) return true;
        switch (kind_) {
        case Kind::constant:
        case Kind::gaussian: return value_ == 0.0;
        case Kind::table:
            return std::all_of(entries_.begin(), entries_.end(),
                               [](const auto& e) { return e.second == 0.0; });
        }
        return false;
    }

private:
    Kind kind_ = Kind::constant;
    double value_ = 0.0;
    double width_ = 1.0;
    double scale_ = 1.0;
    std::map<Momentum, double> entries_;
};

/// Checks positivity and evenness of v_hat at every difference of two modes.
inline const PairPotential& validate_potential(const PairPotential& v, const ModeSet& modes) {
    const int d = modes.dimension();
    const int span = 2 * modes.cutoff();
    if (v.kind() == PairPotential::Kind::table) {
        for (const auto& [k, value] : v.entries()) {
            bool inside = sup_norm(k) <= span;
            for (int a = d; a < 3; ++a) inside = inside && k[a] == 0;
            if (!inside)
                throw ValidationError("potential entry at k=" + to_string(k, d) +
                                      " lies outside the representable mode differences");
            if (!std::isfinite(value))
                throw ValidationError("potential entry at k=" + to_string(k, d) + " is not finite");
        }
    }
    if (v.kind() == PairPotential::Kind::gaussian && !(v.width() > 0.0))
        throw ValidationError("gaussian potential width must be positive");
    const ModeSet diffs = build_mode_set(d, span, static_cast<std::size_t>(-1));
    for (const auto& k : diffs.modes()) {
        const double a = v.fourier(k, d);
        const double b = v.fourier(-k, d);
        if (a < 0.0)
            throw ValidationError("positivity violation: v_hat(k) = " + std::to_string(a) +
                                  " < 0 at k=" + to_string(k, d));
        if (std::abs(a - b) > 1e-14 * std::max({1.0, std::abs(a), std::abs(b)}))
            throw ValidationError("evenness violation: v_hat(k) != v_hat(-k) at k=" + to_string(k, d));
    }
    return v;
}

/// Trap sampled on a uniform grid over [-L, L]^d with Dirichlet boundary.
struct TrapGrid {
    int dimension = 1;
    double half_width = 8.0;
    int points = 801;
    std::vector<double> values; // row-major, last axis fastest
    double confinement_threshold = 10.0;
    /// Analytic trap, when known; refinement resamples it instead of interpolating.
    std::function<double(const std::array<double, 3>&)> profile;

    double spacing() const { return 2.0 * half_width / (points - 1); }
    std::size_t size() const { return values.size(); }
    double coordinate(int i) const { return -half_width + i * spacing(); }

    static TrapGrid sampled(int dimension, double half_width, int points,
                            std::function<double(const std::array<double, 3>&)> f, double threshold = 10.0) {
        TrapGrid g;
        g.dimension = dimension;
        g.half_width = half_width;
        g.points = points;
        g.confinement_threshold = threshold;
        g.profile = std::move(f);
        std::size_t total = 1;
        for (int a = 0; a < dimension; ++a) total *= static_cast<std::size_t>(points);
        g.values.resize(total);
        for (std::size_t idx = 0; idx < total; ++idx) {
            std::size_t rest = idx;
            std::array<double, 3> x{0.0, 0.0, 0.0};
            for (int a = dimension - 1; a >= 0; --a) {
                x[a] = g.coordinate(static_cast<int>(rest % static_cast<std::size_t>(points)));
                rest /= static_cast<std::size_t>(points);
            }
            g.values[idx] = g.profile(x);
        }
        return g;
    }

    /// V(x) = |x|^2.
    static TrapGrid harmonic(int dimension, double half_width, int points, double threshold = 10.0) {
        return sampled(dimension, half_width, points,
                       [](const std::array<double, 3>& x) { return x[0] * x[0] + x[1] * x[1] + x[2] * x[2]; },
                       threshold);
    }

    void validate() const {
        if (dimension < 1 || dimension > 3) throw ValidationError("trap dimension must be 1, 2 or 3");
        if (points < 3) throw ValidationError("trap grid needs at least 3 points per axis");
        if (!(half_width > 0.0)) throw ValidationError("trap half-width must be positive");
        std::size_t total = 1;
        for (int a = 0; a < dimension; ++a) total *= static_cast<std::size_t>(points);
        if (values.size() != total)
            throw ValidationError("trap table has " + std::to_string(values.size()) +
                                  " values, expected " + std::to_string(total));
        for (double v : values)
            if (!(v >= 0.0)) throw ValidationError("trap values must be non-negative");
        for (std::size_t idx = 0; idx < total; ++idx) {
            std::size_t rest = idx;
            bool boundary = false;
            for (int a = 0; a < dimension; ++a) {
                const auto i = rest % points;
                rest /= points;
                boundary = boundary || i == 0 || i == static_cast<std::size_t>(points - 1);
            }
            if (boundary && values[idx] < confinement_threshold)
                throw ValidationError("trap value at the box boundary is below the confinement threshold");
        }
    }
};

/// The torus Hamiltonian sum_p |p|^2 n_p + (2(N-1))^-1 sum v_hat(k) a*a*aa restricted to the mode set.
struct CutoffModel {
    ModeSet modes;
    PairPotential potential;
    int particles = 2;

    double coupling() const { return 1.0 / (particles - 1); }
    double vhat(const Momentum& k) const { return potential.fourier(k, modes.dimension()); }

    CutoffModel with_particles(int n) const {
        CutoffModel m = *this;
        m.particles = n;
        m.validate();
        return m;
    }
    CutoffModel with_potential(PairPotential v) const {
        CutoffModel m = *this;
        m.potential = std::move(v);
        m.validate();
        return m;
    }

    void validate() const {
        if (particles < 2) throw ValidationError("particle number must be >= 2");
        validate_potential(potential, modes);
    }
};

inline CutoffModel make_model(int dimension, int cutoff, PairPotential v, int particles) {
    CutoffModel m{build_mode_set(dimension, cutoff), std::move(v), particles};
    m.validate();
    return m;
}

/// d=1, modes {0, +-2 pi}, v_hat = 1.
inline CutoffModel benchmark_model(int particles = 10, int cutoff = 1, double vhat = 1.0) {
    return make_model(1, cutoff, PairPotential::constant(vhat), particles);
}

} // namespace bose_expand

#endif
