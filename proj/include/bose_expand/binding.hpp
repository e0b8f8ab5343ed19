#ifndef BOSE_EXPAND_BINDING_HPP
#define BOSE_EXPAND_BINDING_HPP

// Binding energy Delta E(N) = E(N; v/(N-1)) - E(N-1; v/(N-1)) and its 1/N
// expansion obtained by re-expanding the energy coefficients at the rescaled
// coupling (N-2)/(N-1).

#include <cmath>
#include <string>
#include <vector>

#include "bogoliubov.hpp"
#include "errors.hpp"
#include "hartree.hpp"
#include "model.hpp"
#include "oracle.hpp"
#include "parallel.hpp"
#include "perturbation.hpp"

namespace bose_expand {

struct BindingCoefficients {
    double e0 = 0.0;
    double e1 = 0.0;
    /// Re-expansion value of the N^-2 coefficient (uses a Richardson derivative of E1).
    double e2 = 0.0;
    double e2_error = 0.0;
    /// Closed form e_H + 1/2 <phi, (v * |phi|^2) phi> for cross-checking e0.
    double e0_direct = 0.0;
    /// lambda-derivatives at lambda = 1 of e_H, E0 and E1 under v -> lambda v.
    double de_hartree = 0.0;
    double dE0 = 0.0;
    double d2E0 = 0.0;
    double dE1 = 0.0;
    double E1 = 0.0;
};

/// dE0/dlambda = 1/2 sum (|p|^2 v_hat / eps - v_hat), d2E0/dlambda^2 = -1/2 sum |p|^4 v_hat^2 / eps^3.
inline std::pair<double, double> bogoliubov_energy_derivatives(const BogoliubovMap& map) {
    double d1 = 0.0, d2 = 0.0;
    for (std::size_t j = 0; j < map.size(); ++j) {
        const double vh = map.h0.B[j];
        const double p2 = map.h0.A[j] - vh;
        const double eps = map.epsilon[j];
        d1 += p2 * vh / eps - vh;
        d2 -= p2 * p2 * vh * vh / (eps * eps * eps);
    }
    return {0.5 * d1, 0.5 * d2};
}

struct RichardsonDerivative {
    double value = 0.0;
    double error = 0.0;
    std::vector<double> steps;
    std::vector<double> estimates;
};

/// Central differences at h, h/2, h/4 combined by Richardson extrapolation.
template <class F>
RichardsonDerivative richardson_derivative(F&& f, double x, double h = 0.05, double tol = 1e-6) {
    RichardsonDerivative d;
    std::vector<std::vector<double>> table;
    for (int level = 0; level < 4; ++level) {
        const double step = h / std::pow(2.0, level);
        d.steps.push_back(step);
        std::vector<double> row{(f(x + step) - f(x - step)) / (2.0 * step)};
        for (int k = 1; k <= level; ++k) {
            const double factor = std::pow(4.0, k);
            row.push_back((factor * row[static_cast<std::size_t>(k - 1)] - table.back()[static_cast<std::size_t>(k - 1)]) / (factor - 1.0));
        }
        d.estimates.push_back(row.back());
        table.push_back(std::move(row));
    }
    d.value = d.estimates.back();
    d.error = std::abs(d.estimates.back() - d.estimates[d.estimates.size() - 2]);
    if (d.error > tol * std::max(1.0, std::abs(d.value))) {
        std::string stencil;
        for (std::size_t i = 0; i < d.steps.size(); ++i)
            stencil += " h=" + std::to_string(d.steps[i]) + ":" + std::to_string(d.estimates[i]);
        throw ConvergenceError("lambda-derivative not Richardson-converged;" + stencil, d.error);
    }
    return d;
}

inline BindingCoefficients binding_coefficients(const CutoffModel& model) {
    BindingCoefficients c;
    const StaticExpansion s = expand_static(model);
    const HartreeState& h = s.hartree;
    // <phi, (v * |phi|^2) phi> = 2 x interaction part of the Hartree energy
    double kinetic_part = 0.0;
    for (std::size_t i = 0; i < model.modes.size(); ++i)
        kinetic_part += kinetic(model.modes[i]) * std::norm(h.phi[static_cast<Eigen::Index>(i)]);
    const double interaction = h.energy - kinetic_part;
    c.e0_direct = h.energy + interaction;

    // e_H(lambda v) = lambda e_H(v) on the torus
    c.de_hartree = h.energy;
    // N e_H(v) - (N-1) e_H(kappa v), kappa = (N-2)/(N-1): exact in N
    c.e0 = h.energy + c.de_hartree;
    const auto [d1, d2] = bogoliubov_energy_derivatives(s.map);
    c.dE0 = d1;
    c.d2E0 = d2;
    c.e1 = c.dE0;
    c.E1 = s.E1;
    if (model.potential.vanishes()) return c;
    auto e1_at = [&](double lambda) {
        const StaticExpansion t = expand_static(model.with_potential(model.potential.scaled(lambda)));
        return t.E1;
    };
    const RichardsonDerivative dE1 = richardson_derivative(e1_at, 1.0);
    c.dE1 = dE1.value;
    c.e2 = c.dE0 - 0.5 * c.d2E0 - c.E1 + c.dE1;
    c.e2_error = dE1.error;
    return c;
}

struct BindingPoint {
    int N = 0;
    double energy_N = 0.0;
    double energy_N_minus_1 = 0.0;
    double delta = 0.0;
};

/// Both diagonalizations use the coupling 1/(N-1): the (N-1)-particle system sees v (N-2)/(N-1) in its own convention.
inline std::vector<BindingPoint> binding_oracle(const CutoffModel& model, const std::vector<int>& ns, int workers = 1,
                                                std::size_t budget = default_dimension_budget) {
    for (int n : ns) {
        if (n < 3) throw ValidationError("binding energy needs N >= 3");
        if (basis_dimension(model.modes.size(), n) > static_cast<double>(budget))
            throw CapacityError("binding point N=" + std::to_string(n) + " exceeds the dimension budget",
                                basis_dimension(model.modes.size(), n), static_cast<double>(budget));
    }
    std::vector<BindingPoint> out(ns.size());
    parallel_for(ns.size(), workers, [&](std::size_t i) {
        const int n = ns[i];
        const CutoffModel full = model.with_particles(n);
        const double kappa = static_cast<double>(n - 2) / static_cast<double>(n - 1);
        const CutoffModel removed = model.with_particles(n - 1).with_potential(model.potential.scaled(kappa));
        BindingPoint p;
        p.N = n;
        p.energy_N = model_ground_state(full, {}, budget).state.energy;
        p.energy_N_minus_1 = model_ground_state(removed, {}, budget).state.energy;
        p.delta = p.energy_N - p.energy_N_minus_1;
        out[i] = p;
    });
    return out;
}

struct BindingReport {
    BindingCoefficients coefficients;
    std::vector<BindingPoint> curve;
    ScalingReport residual0;
    ScalingReport residual1;
    /// N^-2 coefficient fitted from the oracle curve, with the spread of two fit degrees.
    double e2_fit = 0.0;
    double e2_fit_error = 0.0;
};

inline BindingReport binding_report(const CutoffModel& model, const std::vector<int>& ns, int workers = 1) {
    BindingReport r;
    r.coefficients = binding_coefficients(model);
    r.curve = binding_oracle(model, ns, workers);
    std::vector<std::pair<double, double>> res0, res1, scaled;
    for (const auto& p : r.curve) {
        const double n = p.N;
        const double a = p.delta - r.coefficients.e0;
        const double b = a - r.coefficients.e1 / n;
        res0.emplace_back(n, std::abs(a));
        res1.emplace_back(n, std::abs(b));
        scaled.emplace_back(n, b * n * n);
    }
    r.residual0 = fit_power_law(res0, -1.0, 0.15);
    r.residual1 = fit_power_law(res1, -2.0, 0.3);
    const Extrapolation e = extrapolate(scaled, 2);
    r.e2_fit = e.value;
    r.e2_fit_error = e.error;
    return r;
}

} // namespace bose_expand

#endif
