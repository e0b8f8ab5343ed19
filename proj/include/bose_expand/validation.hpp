#ifndef BOSE_EXPAND_VALIDATION_HPP
#define BOSE_EXPAND_VALIDATION_HPP

// One-shot validation pipeline: every acceptance criterion on the benchmark
// models, reported as measured value vs expected band. Runtimes are kept
// out of the JSON so that two runs produce identical bytes.

#include <chrono>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "binding.hpp"
#include "config.hpp"
#include "dynamics.hpp"
#include "edgeworth.hpp"
#include "oracle.hpp"
#include "perturbation.hpp"

namespace bose_expand {

struct CriterionResult {
    std::string id;
    std::string description;
    /// "slope": |measured - expected| <= band; "max": measured <= expected; "less": measured < expected.
    std::string relation;
    double measured = 0.0;
    double expected = 0.0;
    double band = 0.0;
    bool pass = false;
    /// Diagnostics are reported but do not enter the overall status.
    bool diagnostic = false;
    std::string note;
    double runtime = 0.0;
};

struct ValidationSummary {
    std::vector<CriterionResult> criteria;
    json configuration;

    bool pass() const {
        for (const auto& c : criteria)
            if (!c.diagnostic && !c.pass) return false;
        return true;
    }

    json to_json(bool with_runtime = false) const {
        json j;
        j["spec"] = schema_version;
        j["tool_version"] = tool_version;
        j["configuration"] = configuration;
        json list = json::array();
        for (const auto& c : criteria) {
            json e;
            e["id"] = c.id;
            e["description"] = c.description;
            e["relation"] = c.relation;
            e["measured"] = c.measured;
            e["expected"] = c.expected;
            e["band"] = c.band;
            e["pass"] = c.pass;
            e["diagnostic"] = c.diagnostic;
            if (!c.note.empty()) e["note"] = c.note;
            if (with_runtime) e["runtime_s"] = c.runtime;
            list.push_back(e);
        }
        j["criteria"] = list;
        j["overall"] = pass() ? "pass" : "fail";
        return j;
    }
};

inline CriterionResult slope_result(std::string id, std::string description, const ScalingReport& r) {
    CriterionResult c{std::move(id), std::move(description), "slope", r.slope, r.expected_slope, r.band};
    c.pass = std::abs(r.slope - r.expected_slope) <= r.band;
    return c;
}

inline CriterionResult max_result(std::string id, std::string description, double measured, double limit) {
    CriterionResult c{std::move(id), std::move(description), "max", measured, limit, 0.0};
    c.pass = std::isfinite(measured) && measured <= limit;
    return c;
}

inline CriterionResult less_result(std::string id, std::string description, double measured, double bound) {
    CriterionResult c{std::move(id), std::move(description), "less", measured, bound, 0.0};
    c.pass = measured < bound;
    return c;
}

inline CriterionResult as_diagnostic(CriterionResult c, std::string note = {}) {
    c.diagnostic = true;
    if (!note.empty()) c.note = std::move(note);
    return c;
}

struct ValidationOptions {
    /// Criterion groups 1..8 to run; empty means all.
    std::set<int> groups;
    int workers = 1;
    /// Called after each group (group 1 twice: K=1, then K=2) with the wall time it took.
    std::function<void(int, double)> on_group;
};

namespace detail {

inline std::vector<int> even_range(int lo, int hi) {
    std::vector<int> ns;
    for (int n = lo; n <= hi; n += 2) ns.push_back(n);
    return ns;
}

/// Ground states keyed by (cutoff, N) on the d=1, v_hat = 1 benchmark family.
class GroundStateCache {
public:
    explicit GroundStateCache(int workers) : workers_(workers) {}

    void prepare(int cutoff, const std::vector<int>& ns) {
        std::vector<int> missing;
        for (int n : ns)
            if (!cache_.count({cutoff, n})) missing.push_back(n);
        std::vector<ModelGroundState> out(missing.size());
        parallel_for(missing.size(), workers_,
                     [&](std::size_t i) { out[i] = model_ground_state(benchmark_model(missing[i], cutoff)); });
        for (std::size_t i = 0; i < missing.size(); ++i) cache_.emplace(std::make_pair(cutoff, missing[i]), std::move(out[i]));
    }
    const ModelGroundState& get(int cutoff, int n) {
        prepare(cutoff, {n});
        return cache_.at({cutoff, n});
    }

private:
    int workers_;
    std::map<std::pair<int, int>, ModelGroundState> cache_;
};

inline std::vector<CriterionResult> energy_criteria(GroundStateCache& cache, int cutoff, int n_max, const std::string& tag) {
    const CutoffModel model = benchmark_model(10, cutoff);
    const StaticExpansion s = expand_static(model);
    const auto ns = even_range(8, n_max);
    cache.prepare(cutoff, ns);
    std::vector<std::pair<double, double>> a, b, shifted;
    for (int n : ns) {
        const double e = cache.get(cutoff, n).state.energy - n * s.hartree.energy;
        a.emplace_back(n, std::abs(e - s.map.E0));
        b.emplace_back(n, std::abs(e - s.map.E0 - s.E1 / n));
        shifted.emplace_back(n, e);
    }
    const Extrapolation ex = extrapolate(shifted, 3);
    std::vector<CriterionResult> r;
    r.push_back(slope_result("1a" + tag, "|E_ED - N e_H - E0| slope", fit_power_law(a, -1.0, 0.15)));
    r.push_back(slope_result("1b" + tag, "|E_ED - N e_H - E0 - E1/N| slope", fit_power_law(b, -2.0, 0.3)));
    r.push_back(max_result("1c" + tag, "|E0 - extrapolated (E_ED - N e_H)|", std::abs(ex.value - s.map.E0), 1e-4));
    return r;
}

inline std::vector<CriterionResult> operator_criteria() {
    const CutoffModel model = benchmark_model(10, 2);
    const StaticExpansion s = expand_static(model);
    auto remainder = [&](int sectors) {
        const ExcitationBasis in(model.modes, sectors), out(model.modes, sectors + 4);
        std::vector<std::pair<double, double>> pts;
        for (int n : {6, 10, 14, 18}) {
            const CutoffModel mn = model.with_particles(n);
            double total = 0.0;
            for (std::size_t i = 0; i < in.size(); ++i) {
                Eigen::VectorXcd x = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(in.size()));
                x[static_cast<Eigen::Index>(i)] = 1.0;
                const Eigen::VectorXcd exact = apply_excitation_hamiltonian(mn, s.hartree.energy, in, x, out);
                const Eigen::VectorXcd series = apply(s.orders.H0(), in, x, out) +
                                                apply(s.orders.H1(), in, x, out) / std::sqrt(static_cast<double>(n)) +
                                                apply(s.orders.H2(), in, x, out) / static_cast<double>(n);
                total += (exact - series).squaredNorm();
            }
            pts.emplace_back(n, std::sqrt(total));
        }
        return fit_power_law(pts, -1.5, 0.2);
    };
    std::vector<CriterionResult> r;
    r.push_back(slope_result("2a", "operator remainder slope, sectors 0-1 battery (K=2)", remainder(1)));
    r.push_back(max_result("2b", "|<chi0, H1 chi0>|", std::abs(s.E_half), 1e-10));
    r.push_back(as_diagnostic(slope_result("2a.diag", "operator remainder slope, sectors 0-3 battery (K=2)", remainder(3)),
                              "higher sectors carry a dominant N^-2 prefactor on this window"));
    return r;
}

inline std::vector<SpectralSample> samples_for(GroundStateCache& cache, int cutoff, const std::vector<int>& ns,
                                               const Eigen::MatrixXcd& b) {
    std::vector<SpectralSample> out;
    for (int n : ns) {
        const auto& gs = cache.get(cutoff, n);
        out.push_back(observable_statistics(gs.state.vector, gs.basis, b));
    }
    return out;
}

inline std::vector<CriterionResult> edgeworth_criteria(GroundStateCache& cache, int group) {
    const int cutoff = 2;
    const CutoffModel model = benchmark_model(10, cutoff);
    const StaticExpansion s = expand_static(model);
    const auto ns = even_range(8, 24);
    cache.prepare(cutoff, ns);
    std::vector<CriterionResult> r;

    const Eigen::MatrixXcd b = hopping_observable(model.modes);
    const FluctuationObservable obs = compute_nu_sigma(b, s.hartree, s.map);
    const auto samples = samples_for(cache, cutoff, ns, b);
    const AlphaEstimate ap = alpha_perturbative(model, b);
    const AlphaEstimate ao = alpha_from_samples(samples);
    const EdgeworthPrediction pred{obs.sigma, ap.value, ap.error, iid_baseline(b, s.hartree.phi)};

    if (group == 3) {
        std::vector<std::pair<double, double>> cf, var;
        for (const auto& smp : samples) {
            cf.emplace_back(smp.particles, std::abs(smp.characteristic(1.0) - characteristic_prediction(1.0, pred, 0, smp.particles)));
            var.emplace_back(smp.particles, std::abs(smp.cumulants()[1] - obs.sigma * obs.sigma));
        }
        r.push_back(slope_result("3a", "|E[e^{iB_N}] - e^{-sigma^2/2}| slope (cos multiplier, K=2)", fit_power_law(cf, -0.5, 0.15)));
        r.back().note = "alpha = 0 for this observable by the half-period translation symmetry";
        r.push_back(slope_result("3b", "|Var[B_N] - sigma^2| slope", fit_power_law(var, -1.0, 0.2)));

        const Eigen::MatrixXcd b2 = cosine_observable(model.modes, {1, 2});
        const FluctuationObservable obs2 = compute_nu_sigma(b2, s.hartree, s.map);
        const auto samples2 = samples_for(cache, cutoff, ns, b2);
        const AlphaEstimate ap2 = alpha_perturbative(model, b2);
        const AlphaEstimate ao2 = alpha_from_samples(samples2);
        const EdgeworthPrediction pred2{obs2.sigma, ap2.value, ap2.error, 0.0};
        std::vector<std::pair<double, double>> c0, c1;
        for (const auto& smp : samples2) {
            const cplx z = smp.characteristic(1.0);
            c0.emplace_back(smp.particles, std::abs(z - characteristic_prediction(1.0, pred2, 0, smp.particles)));
            c1.emplace_back(smp.particles, std::abs(z - characteristic_prediction(1.0, pred2, 1, smp.particles)));
        }
        r.push_back(as_diagnostic(slope_result("3a.diag", "char. function error slope, cos(2 pi x) + cos(4 pi x), order 0",
                                               fit_power_law(c0, -0.5, 0.15))));
        r.push_back(as_diagnostic(slope_result("3a.diag1", "char. function error slope, cos(2 pi x) + cos(4 pi x), order 1",
                                               fit_power_law(c1, -1.0, 0.25))));
        r.push_back(as_diagnostic(max_result("3a.diag2", "|alpha_pert - alpha_oracle|, cos(2 pi x) + cos(4 pi x)",
                                             std::abs(ap2.value - ao2.value), ap2.error + ao2.error)));
        return r;
    }

    const TestFunction g = TestFunction::gaussian_cosine(2.0);
    std::vector<std::pair<double, double>> g0, g1;
    for (const auto& smp : samples) {
        const double e = smp.expectation(g);
        g0.emplace_back(smp.particles, std::abs(e - predict_expectation(g, pred, 0, smp.particles)));
        g1.emplace_back(smp.particles, std::abs(e - predict_expectation(g, pred, 1, smp.particles)));
    }
    const ScalingReport r0 = fit_power_law(g0, -0.5, 0.15);
    const ScalingReport r1 = fit_power_law(g1, -1.0, 0.25);
    r.push_back(slope_result("4a", "|E[g(B_N)] - prediction(a=1)| slope", r1));
    r.push_back(less_result("4b", "order-1 slope minus order-0 slope (strictly steeper)", r1.slope - r0.slope, 0.0));
    r.back().note = "g is even, so the order-1 term vanishes and both predictions coincide";
    r.push_back(max_result("4c", "|alpha_pert - alpha_oracle| within combined error bar", std::abs(ap.value - ao.value),
                           ap.error + ao.error));
    return r;
}

inline std::vector<CriterionResult> overlap_criteria(GroundStateCache& cache) {
    const int cutoff = 2;
    const CutoffModel model = benchmark_model(10, cutoff);
    const StaticExpansion s = expand_static(model);
    const int k_max = 16;
    const QuasifreeState q0 = chi0_state(s.map, k_max - 4);
    const ExcitationBasis big(model.modes, k_max);
    const Eigen::VectorXcd chi0 = rebase(q0.coefficients, q0.basis, big);
    const Eigen::VectorXcd chi1 = chi1_vector(s.chi1, s.map, big, chi0, big);
    const auto ns = even_range(8, 24);
    cache.prepare(cutoff, ns);
    std::vector<std::pair<double, double>> e0, e1, dep, odd;
    for (int n : ns) {
        const auto& gs = cache.get(cutoff, n);
        const ExcitationBasis cut(model.modes, std::min(n, k_max));
        const Eigen::VectorXcd psi0 = assemble_psi_N_ell(rebase(chi0, big, cut), cut, gs.basis, model.modes);
        const Eigen::VectorXcd psi1 = assemble_psi_N_ell(rebase(chi1, big, cut), cut, gs.basis, model.modes);
        Eigen::VectorXcd psi = gs.state.vector;
        align_phase_to(psi, psi0);
        e0.emplace_back(n, (psi - psi0).norm());
        e1.emplace_back(n, (psi - psi0 - psi1 / std::sqrt(static_cast<double>(n))).norm());
        dep.emplace_back(n, condensate_depletion(one_particle_density(psi, gs.basis)));
        // odd excitation sectors of the exact state against N^{-1/2} chi1
        const ExcitationBasis all(model.modes, n);
        Eigen::VectorXcd x = excitation_decompose(psi, gs.basis, s.hartree, model.modes, all);
        for (int k = 0; k <= n; k += 2)
            x.segment(static_cast<Eigen::Index>(all.sector_begin(k)),
                      static_cast<Eigen::Index>(all.sector_end(k) - all.sector_begin(k))).setZero();
        odd.emplace_back(n, (x - rebase(chi1, big, all) / std::sqrt(static_cast<double>(n))).norm());
    }
    std::vector<CriterionResult> r;
    r.push_back(slope_result("5a", "||Psi_ED - psi_{N,0}|| slope (K=2)", fit_power_law(e0, -0.5, 0.15)));
    r.back().note = "the N^-1/2 component has norm " + std::to_string(chi1.norm()) + " and is masked by the N^-1 term";
    r.push_back(slope_result("5b", "||Psi_ED - psi_{N,0} - N^-1/2 psi_{N,1}|| slope", fit_power_law(e1, -1.0, 0.25)));
    r.push_back(slope_result("5c", "condensate depletion slope", fit_power_law(dep, -1.0, 0.2)));
    r.push_back(as_diagnostic(slope_result("5.diag", "||odd sectors of chi_ED - N^-1/2 chi1|| slope", fit_power_law(odd, -1.5, 0.3))));
    return r;
}

inline std::vector<CriterionResult> dynamics_criteria(int workers) {
    const CutoffModel model = benchmark_model(10, 2);
    const QuenchSpec quench{PairPotential::constant(2.0), 1.0};
    const NormErrorReport rep = norm_error_report(model, quench, even_range(6, 20), true, workers);
    double drift = 0.0;
    for (const auto& p : rep.points) drift = std::max(drift, p.norm_drift);
    std::vector<CriterionResult> r;
    r.push_back(slope_result("6a", "order-0 norm error slope, quench v_hat 1 -> 2, t = 1 (K=2)", rep.order0));
    r.back().note = "the N^-1/2 layer is numerically small against the N^-1 term on this window";
    r.push_back(slope_result("6b", "order-1 norm error slope", rep.order1));
    r.push_back(max_result("6c", "oracle norm drift", drift, 1e-10));
    r.push_back(max_result("6c.mass", "condensate mass drift per unit time", rep.mass_drift_rate, 1e-8));
    r.push_back(max_result("6c.energy", "condensate energy drift per unit time", rep.energy_drift_rate, 1e-6));
    r.push_back(max_result("6d", "Bogoliubov symplectic defect", rep.symplectic_defect, 1e-8));
    r.push_back(as_diagnostic(max_result("6.diag", "gap between the two chi1(t) routes", rep.chi1_route_gap, 1e-8)));
    r.push_back(as_diagnostic(max_result("6.diag1", "|<chi0(t), chi1(t)>|", rep.chi1_overlap, 1e-10)));
    return r;
}

inline std::vector<CriterionResult> binding_criteria(int workers) {
    const CutoffModel model = benchmark_model(10, 1);
    const BindingReport rep = binding_report(model, even_range(8, 24), workers);
    std::vector<CriterionResult> r;
    r.push_back(slope_result("7a", "|Delta E_ED - E^b_0| slope", rep.residual0));
    r.push_back(slope_result("7b", "|Delta E_ED - E^b_0 - E^b_1/N| slope", rep.residual1));
    r.push_back(max_result("7c", "|E^b_0 - v_hat(0)|", std::abs(rep.coefficients.e0 - model.vhat({0, 0, 0})), 1e-12));
    r.push_back(as_diagnostic(max_result("7.diag", "|E^b_2 re-expansion - fitted N^-2 coefficient|",
                                         std::abs(rep.coefficients.e2 - rep.e2_fit), rep.e2_fit_error + rep.coefficients.e2_error)));
    return r;
}

inline std::vector<CriterionResult> infrastructure_criteria() {
    std::vector<CriterionResult> r;
    double lanczos = 0.0;
    std::size_t largest = 0;
    const std::vector<std::pair<CutoffModel, std::vector<int>>> cases = {
        {benchmark_model(10, 1), {2, 5, 16, 40, 59}},
        {benchmark_model(10, 2), {2, 4, 8, 12}},
        {make_model(2, 1, PairPotential::constant(1.0), 2), {2, 3, 5}},
        {make_model(1, 2, PairPotential::gaussian(1.0, 0.2), 2), {6, 10}},
    };
    for (const auto& [base, ns] : cases)
        for (int n : ns) {
            const CutoffModel m = base.with_particles(n);
            const OccupationBasis basis = enumerate_basis(m.modes, n);
            if (basis.size() > 2000) throw ValidationError("infrastructure case exceeds 2000 states");
            const SparseOperator h = assemble_hamiltonian(m, basis);
            const GroundState lz = ground_state(h);
            const GroundState dn = dense_ground_state(h);
            lanczos = std::max(lanczos, std::abs(lz.energy - dn.energy));
            lanczos = std::max(lanczos, 1.0 - std::abs(dn.vector.dot(lz.vector)));
            largest = std::max(largest, basis.size());
        }
    r.push_back(max_result("8a", "Lanczos vs dense ground state (energy, 1 - |overlap|), dims <= 2000", lanczos, 1e-9));
    r.back().note = "largest dimension " + std::to_string(largest);

    {
        const CutoffModel m = benchmark_model(18, 1);
        const OccupationBasis basis = enumerate_basis(m.modes, 18);
        const SparseOperator h = assemble_hamiltonian(m, basis);
        Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(basis.size()));
        for (Eigen::Index i = 0; i < psi.size(); ++i) psi[i] = cplx(std::cos(0.7 * i), std::sin(1.3 * i));
        psi.normalize();
        const Eigen::VectorXcd a = evolve(h, psi, 1.0).state;
        const Eigen::VectorXcd b = evolve_dense(h.dense(), psi, 1.0);
        r.push_back(max_result("8b", "Krylov vs dense exponential, " + std::to_string(basis.size()) + "-dim instance",
                               (a - b).norm(), 1e-9));
    }
    {
        const TrapGrid grid = TrapGrid::harmonic(1, 6.0, 4001);
        const HartreeState h = minimize_hartree(grid, PairPotential::constant(0.0));
        r.push_back(max_result("8c", "|e_H - 1| for V = x^2, v = 0", std::abs(h.energy - 1.0), 1e-6));
    }
    {
        const CutoffModel m = benchmark_model(10, 2);
        const OccupationBasis basis = enumerate_basis(m.modes, 10);
        const HartreeState hs = minimize_hartree(m);
        const ExcitationBasis ex(m.modes, 10);
        Eigen::VectorXcd psi(static_cast<Eigen::Index>(basis.size()));
        for (Eigen::Index i = 0; i < psi.size(); ++i) psi[i] = cplx(std::sin(0.3 * i + 0.1), std::cos(0.9 * i));
        psi.normalize();
        const Eigen::VectorXcd chi = excitation_decompose(psi, basis, hs, m.modes, ex);
        const Eigen::VectorXcd back = excitation_reconstruct(chi, ex, basis, m.modes);
        r.push_back(max_result("8d", "excitation map round trip", (back - psi).norm(), 1e-12));
    }
    return r;
}

} // namespace detail

inline ValidationSummary run_validation(const ValidationOptions& opt = {}) {
    ValidationSummary summary;
    json cfg;
    cfg["suite"] = opt.groups.empty() ? json("full") : json(opt.groups);
    cfg["benchmark"] = {{"dimension", 1}, {"potential", {{"kind", "constant"}, {"value", 1.0}}}};
    summary.configuration = cfg;
    detail::GroundStateCache cache(opt.workers);
    auto wanted = [&](int g) { return opt.groups.empty() || opt.groups.count(g); };
    auto run = [&](int g, const std::function<std::vector<CriterionResult>()>& fn) {
        if (!wanted(g)) return;
        const auto start = std::chrono::steady_clock::now();
        std::vector<CriterionResult> part = fn();
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        for (auto& c : part) {
            c.runtime = secs;
            summary.criteria.push_back(std::move(c));
        }
        if (opt.on_group) opt.on_group(g, secs);
    };
    // the two cutoffs of group 1 are timed separately
    run(1, [&] { return detail::energy_criteria(cache, 1, 24, ""); });
    run(1, [&] { return detail::energy_criteria(cache, 2, 16, ".K2"); });
    run(2, [&] { return detail::operator_criteria(); });
    run(3, [&] { return detail::edgeworth_criteria(cache, 3); });
    run(4, [&] { return detail::edgeworth_criteria(cache, 4); });
    run(5, [&] { return detail::overlap_criteria(cache); });
    run(6, [&] { return detail::dynamics_criteria(opt.workers); });
    run(7, [&] { return detail::binding_criteria(opt.workers); });
    run(8, [&] { return detail::infrastructure_criteria(); });
    return summary;
}

} // namespace bose_expand

#endif
