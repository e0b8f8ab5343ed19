#ifndef BOSE_EXPAND_CLI_HPP
#define BOSE_EXPAND_CLI_HPP

// Task dispatch behind the command-line driver. Every task returns a JSON
// report and a CSV table; nothing is written until the task has finished.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include "binding.hpp"
#include "bogoliubov.hpp"
#include "config.hpp"
#include "dynamics.hpp"
#include "edgeworth.hpp"
#include "hartree.hpp"
#include "oracle.hpp"
#include "perturbation.hpp"
#include "validation.hpp"

namespace bose_expand {

enum ExitCode { exit_ok = 0, exit_error = 1, exit_validation = 2, exit_usage = 64 };

struct Report {
    json body;
    std::string csv;
    /// Exit status the driver should return.
    int status = exit_ok;
};

/// Fixed CSV columns per task.
inline const std::map<std::string, std::vector<std::string>>& csv_columns() {
    static const std::map<std::string, std::vector<std::string>> columns = {
        {"solve-hartree", {"index", "momentum", "re", "im"}},
        {"solve-hartree-trap", {"x", "phi"}},
        {"bogoliubov", {"mode", "momentum", "A", "B", "epsilon", "u", "v", "c"}},
        {"expand-energy", {"order", "value"}},
        {"edgeworth", {"N", "oracle_value", "prediction0", "prediction1"}},
        {"binding", {"N", "deltaE", "residual0", "residual1"}},
        {"dynamics", {"N", "error_order0", "error_order1"}},
        {"oracle", {"N", "value", "fit_slope"}},
        {"validate", {"id", "measured", "expected", "band", "pass", "diagnostic"}},
    };
    return columns;
}

class CsvWriter {
public:
    explicit CsvWriter(const std::string& task) {
        out_ << std::setprecision(17);
        const auto& cols = csv_columns().at(task);
        for (std::size_t i = 0; i < cols.size(); ++i) out_ << (i ? "," : "") << cols[i];
        out_ << '\n';
    }
    template <class... T>
    void row(const T&... values) {
        std::size_t i = 0;
        ((out_ << (i++ ? "," : "") << values), ...);
        out_ << '\n';
    }
    std::string str() const { return out_.str(); }

private:
    std::ostringstream out_;
};

inline std::string momentum_label(const Momentum& n, int dimension) { return "\"" + to_string(n, dimension) + "\""; }

namespace detail {

inline json header(const RunConfig& cfg) {
    json j;
    j["spec"] = schema_version;
    j["tool_version"] = tool_version;
    j["task"] = cfg.task;
    j["configuration"] = cfg.resolved();
    return j;
}

inline LanczosOptions lanczos_from(const RunConfig& cfg) {
    LanczosOptions opt;
    opt.seed = cfg.seed;
    if (cfg.tol) opt.tol = *cfg.tol;
    return opt;
}

inline std::vector<int> particle_range(const json& p, int lo, int hi) {
    const int a = p.value("nmin", lo), b = p.value("nmax", hi);
    if (a < 3 || b < a) throw ConfigError("need 3 <= nmin <= nmax");
    std::vector<int> ns;
    for (int n = a; n <= b; n += 2) ns.push_back(n);
    return ns;
}

inline Eigen::MatrixXcd observable_from(const std::string& name, const ModeSet& modes) {
    if (name == "hopping") return hopping_observable(modes);
    if (name == "hopping2") return cosine_observable(modes, {1, 2});
    throw ConfigError("observable must be 'hopping' or 'hopping2', got '" + name + "'");
}

inline PairPotential quench_potential(const json& q, const ModelConfig& model) {
    if (!q.is_object()) throw ConfigError("quench must be a JSON object");
    detail::reject_unknown(q, {"vhat_after", "scale", "potential"}, "quench");
    if (q.size() != 1) throw ConfigError("quench needs exactly one of vhat_after, scale, potential");
    if (q.contains("vhat_after")) {
        if (model.potential.kind() != PairPotential::Kind::constant)
            throw ConfigError("vhat_after applies to constant potentials; use scale or potential");
        return PairPotential::constant(detail::required<double>(q, "vhat_after", "quench"));
    }
    if (q.contains("scale")) return model.potential.scaled(detail::required<double>(q, "scale", "quench"));
    return parse_potential(q.at("potential"), model.dimension);
}

} // namespace detail

inline Report run_solve_hartree(const RunConfig& cfg) {
    Report r;
    r.body = detail::header(cfg);
    if (cfg.model.trap) {
        const TrapGrid grid = cfg.model.trap->grid(cfg.model.dimension);
        HartreeOptions opt;
        if (cfg.tol) opt.tol = *cfg.tol;
        const HartreeState h = minimize_hartree(grid, cfg.model.potential, opt);
        r.body["geometry"] = "trap";
        r.body["e_H"] = h.energy;
        r.body["mu"] = h.chemical_potential;
        r.body["residual"] = h.residual;
        r.body["iterations"] = h.iterations;
        r.body["warnings"] = h.warnings;
        CsvWriter csv("solve-hartree-trap");
        if (grid.dimension == 1)
            for (int i = 0; i < grid.points; ++i) csv.row(grid.coordinate(i), h.phi[i].real());
        r.csv = csv.str();
        return r;
    }
    const CutoffModel model = cfg.model.model();
    const HartreeState h = minimize_hartree(model);
    r.body["geometry"] = "torus";
    r.body["e_H"] = h.energy;
    r.body["mu"] = h.chemical_potential;
    r.body["residual"] = h.residual;
    json amps = json::array();
    CsvWriter csv("solve-hartree");
    for (std::size_t i = 0; i < model.modes.size(); ++i) {
        const cplx a = h.phi[static_cast<Eigen::Index>(i)];
        amps.push_back({{"momentum", to_string(model.modes[i], model.modes.dimension())}, {"re", a.real()}, {"im", a.imag()}});
        csv.row(i, momentum_label(model.modes[i], model.modes.dimension()), a.real(), a.imag());
    }
    r.body["phi"] = amps;
    r.csv = csv.str();
    return r;
}

inline Report run_bogoliubov(const RunConfig& cfg) {
    const CutoffModel model = cfg.model.model();
    const HartreeState h = minimize_hartree(model);
    const BogoliubovMap map = diagonalize(assemble_H0(model, h));
    Report r;
    r.body = detail::header(cfg);
    r.body["E0"] = map.E0;
    json modes = json::array();
    CsvWriter csv("bogoliubov");
    for (std::size_t j = 0; j < map.size(); ++j) {
        const std::string label = to_string(map.h0.momenta[j], model.modes.dimension());
        modes.push_back({{"momentum", label}, {"A", map.h0.A[j]}, {"B", map.h0.B[j]}, {"epsilon", map.epsilon[j]},
                         {"u", map.u[j]}, {"v", map.v[j]}, {"c", map.c[j]}});
        csv.row(j, momentum_label(map.h0.momenta[j], model.modes.dimension()), map.h0.A[j], map.h0.B[j], map.epsilon[j],
                map.u[j], map.v[j], map.c[j]);
    }
    r.body["modes"] = modes;
    r.csv = csv.str();
    return r;
}

inline Report run_expand_energy(const RunConfig& cfg) {
    const int orders = cfg.parameters.value("orders", 1);
    if (orders < 0 || orders > 1) throw ConfigError("expand-energy supports --orders 0 or 1");
    const CutoffModel model = cfg.model.model();
    const StaticExpansion s = expand_static(model);
    Report r;
    r.body = detail::header(cfg);
    r.body["e_H"] = s.hartree.energy;
    r.body["E0"] = s.map.E0;
    CsvWriter csv("expand-energy");
    csv.row(-1, s.hartree.energy);
    csv.row(0, s.map.E0);
    if (orders >= 1) {
        r.body["E1"] = s.E1;
        csv.row(1, s.E1);
    }
    r.body["diagnostics"] = {{"E_half", s.E_half},
                             {"H0_monomials", s.orders.H0().size()},
                             {"H1_monomials", s.orders.H1().size()},
                             {"H2_monomials", s.orders.H2().size()},
                             {"chi1_second_order", s.chi1.second_order}};
    r.csv = csv.str();
    return r;
}

inline Report run_edgeworth(const RunConfig& cfg) {
    const CutoffModel model = cfg.model.model();
    const int orders = cfg.parameters.value("orders", 1);
    if (orders < 0 || orders > 1) throw ConfigError("edgeworth supports --orders 0 or 1");
    const Eigen::MatrixXcd b = detail::observable_from(cfg.parameters.value("observable", std::string("hopping")), model.modes);
    const double omega = cfg.parameters.value("omega", 2.0);
    const auto ns = detail::particle_range(cfg.parameters, 8, 24);
    const StaticExpansion s = expand_static(model);
    const FluctuationObservable obs = compute_nu_sigma(b, s.hartree, s.map);
    std::vector<SpectralSample> samples(ns.size());
    parallel_for(ns.size(), cfg.workers, [&](std::size_t i) {
        const auto gs = model_ground_state(model.with_particles(ns[i]), detail::lanczos_from(cfg));
        samples[i] = observable_statistics(gs.state.vector, gs.basis, b);
    });
    const AlphaEstimate ap = alpha_perturbative(model, b);
    const AlphaEstimate ao = alpha_from_samples(samples);
    const EdgeworthPrediction pred{obs.sigma, ap.value, ap.error, iid_baseline(b, s.hartree.phi)};
    const TestFunction g = TestFunction::gaussian_cosine(omega);
    Report r;
    r.body = detail::header(cfg);
    r.body["sigma"] = obs.sigma;
    r.body["sigma_iid"] = pred.sigma_iid;
    r.body["alpha"] = {{"perturbative", ap.value}, {"perturbative_error", ap.error},
                       {"oracle", ao.value}, {"oracle_error", ao.error}};
    r.body["higher_orders_available"] = false;
    CsvWriter csv("edgeworth");
    std::vector<std::pair<double, double>> res;
    for (const auto& smp : samples) {
        const double e = smp.expectation(g);
        const double p0 = predict_expectation(g, pred, 0, smp.particles);
        const double p1v = orders >= 1 ? predict_expectation(g, pred, 1, smp.particles) : p0;
        res.emplace_back(smp.particles, std::abs(e - p1v));
        csv.row(smp.particles, e, p0, p1v);
    }
    const ScalingReport fit = fit_power_law(res, orders >= 1 ? -1.0 : -0.5, 0.25);
    r.body["residual_slope"] = fit.slope;
    r.csv = csv.str();
    return r;
}

inline Report run_binding(const RunConfig& cfg) {
    const CutoffModel model = cfg.model.model();
    const auto ns = detail::particle_range(cfg.parameters, 8, 24);
    const BindingReport rep = binding_report(model, ns, cfg.workers);
    Report r;
    r.body = detail::header(cfg);
    const auto& c = rep.coefficients;
    r.body["E_binding"] = {{"e0", c.e0}, {"e1", c.e1}, {"e2", c.e2}, {"e2_error", c.e2_error},
                           {"e2_fit", rep.e2_fit}, {"e2_fit_error", rep.e2_fit_error}};
    r.body["slopes"] = {{"residual0", rep.residual0.slope}, {"residual1", rep.residual1.slope}};
    CsvWriter csv("binding");
    for (std::size_t i = 0; i < rep.curve.size(); ++i)
        csv.row(rep.curve[i].N, rep.curve[i].delta, rep.residual0.points[i].second, rep.residual1.points[i].second);
    r.csv = csv.str();
    return r;
}

inline Report run_dynamics(const RunConfig& cfg) {
    const CutoffModel model = cfg.model.model();
    const json q = cfg.parameters.value("quench", json{{"vhat_after", 2.0}});
    const QuenchSpec quench{detail::quench_potential(q, cfg.model), cfg.parameters.value("t", 1.0)};
    if (!(quench.time >= 0.0)) throw ConfigError("evolution time must be non-negative");
    const std::vector<int> orders = cfg.parameters.value("orders", std::vector<int>{0, 1});
    bool order1 = false;
    for (int o : orders) {
        if (o < 0 || o > 1) throw ConfigError("dynamics supports orders 0 and 1");
        order1 = order1 || o == 1;
    }
    const auto ns = detail::particle_range(cfg.parameters, 6, 20);
    const NormErrorReport rep = norm_error_report(model, quench, ns, order1, cfg.workers);
    Report r;
    r.body = detail::header(cfg);
    r.body["slope_order0"] = rep.order0.slope;
    if (order1) r.body["slope_order1"] = rep.order1.slope;
    r.body["symplectic_defect"] = rep.symplectic_defect;
    r.body["condensate"] = {{"mass_drift_rate", rep.mass_drift_rate}, {"energy_drift_rate", rep.energy_drift_rate}};
    r.body["chi1"] = {{"overlap_with_chi0", rep.chi1_overlap}, {"route_gap", rep.chi1_route_gap}};
    CsvWriter csv("dynamics");
    for (const auto& p : rep.points) csv.row(p.N, p.error0, order1 ? p.error1 : p.error0);
    r.csv = csv.str();
    return r;
}

inline Report run_oracle(const RunConfig& cfg) {
    const CutoffModel model = cfg.model.model();
    const std::string mode = cfg.parameters.value("mode", std::string("energy-curve"));
    const auto ns = detail::particle_range(cfg.parameters, 8, 24);
    const StaticExpansion s = expand_static(model);
    Report r;
    r.body = detail::header(cfg);
    r.body["mode"] = mode;
    std::vector<std::pair<double, double>> values, residuals;
    if (mode == "energy-curve") {
        const auto curve = energy_curve(model, ns, detail::lanczos_from(cfg), cfg.workers);
        for (const auto& p : curve) {
            values.emplace_back(p.N, p.energy);
            residuals.emplace_back(p.N, std::abs(p.energy - p.N * s.hartree.energy - s.map.E0));
        }
    } else if (mode == "statistics") {
        const Eigen::MatrixXcd b = detail::observable_from(cfg.parameters.value("observable", std::string("hopping")), model.modes);
        const double sigma = compute_nu_sigma(b, s.hartree, s.map).sigma;
        std::vector<SpectralSample> samples(ns.size());
        parallel_for(ns.size(), cfg.workers, [&](std::size_t i) {
            const auto gs = model_ground_state(model.with_particles(ns[i]), detail::lanczos_from(cfg));
            samples[i] = observable_statistics(gs.state.vector, gs.basis, b);
        });
        json cum = json::array();
        for (const auto& smp : samples) {
            const auto k = smp.cumulants();
            cum.push_back({{"N", smp.particles}, {"kappa", {k[0], k[1], k[2], k[3]}}});
            values.emplace_back(smp.particles, k[1]);
            residuals.emplace_back(smp.particles, std::abs(k[1] - sigma * sigma));
        }
        r.body["sigma"] = sigma;
        r.body["cumulants"] = cum;
    } else if (mode == "evolve") {
        const json q = cfg.parameters.value("quench", json{{"vhat_after", 2.0}});
        const PairPotential after = detail::quench_potential(q, cfg.model);
        const double t = cfg.parameters.value("t", 1.0);
        std::vector<double> drift(ns.size());
        std::vector<std::pair<double, double>> vals(ns.size());
        parallel_for(ns.size(), cfg.workers, [&](std::size_t i) {
            const CutoffModel pre = model.with_particles(ns[i]);
            const auto gs = model_ground_state(pre, detail::lanczos_from(cfg));
            const SparseOperator h = assemble_hamiltonian(pre.with_potential(after), gs.basis);
            const EvolveResult ev = evolve(h, gs.state.vector, t);
            vals[i] = {static_cast<double>(ns[i]), std::abs(gs.state.vector.dot(ev.state))};
            drift[i] = ev.norm_drift;
        });
        values = vals;
        residuals.clear();
        for (const auto& v : vals) residuals.emplace_back(v.first, 1.0 - v.second);
        r.body["norm_drift"] = drift;
    } else {
        throw ConfigError("oracle mode must be energy-curve, statistics or evolve");
    }
    double slope = 0.0;
    try {
        slope = fit_power_law(residuals, -1.0, 1.0).slope;
    } catch (const FitError&) {
        slope = std::numeric_limits<double>::quiet_NaN();
    }
    r.body["fit_slope"] = std::isfinite(slope) ? json(slope) : json(nullptr);
    CsvWriter csv("oracle");
    for (const auto& v : values) csv.row(static_cast<int>(v.first), v.second, slope);
    r.csv = csv.str();
    return r;
}

inline Report run_validate(const RunConfig& cfg) {
    ValidationOptions opt;
    opt.workers = cfg.workers;
    const std::string suite = cfg.parameters.value("suite", std::string("full"));
    if (suite != "full") {
        std::stringstream ss(suite);
        std::string item;
        while (std::getline(ss, item, ',')) {
            try {
                const int g = std::stoi(item);
                if (g < 1 || g > 8) throw std::out_of_range("group");
                opt.groups.insert(g);
            } catch (const std::exception&) {
                throw ConfigError("suite must be 'full' or a comma list of groups 1..8");
            }
        }
    }
    const ValidationSummary summary = run_validation(opt);
    Report r;
    r.body = summary.to_json();
    CsvWriter csv("validate");
    for (const auto& c : summary.criteria)
        csv.row(c.id, c.measured, c.expected, c.band, c.pass ? 1 : 0, c.diagnostic ? 1 : 0);
    r.csv = csv.str();
    r.status = summary.pass() ? exit_ok : exit_validation;
    return r;
}

inline Report run(const RunConfig& cfg) {
    if (cfg.task == "solve-hartree") return run_solve_hartree(cfg);
    if (cfg.task == "bogoliubov") return run_bogoliubov(cfg);
    if (cfg.task == "expand-energy") return run_expand_energy(cfg);
    if (cfg.task == "edgeworth") return run_edgeworth(cfg);
    if (cfg.task == "binding") return run_binding(cfg);
    if (cfg.task == "dynamics") return run_dynamics(cfg);
    if (cfg.task == "oracle") return run_oracle(cfg);
    if (cfg.task == "validate") return run_validate(cfg);
    throw ConfigError("unknown task '" + cfg.task + "'");
}

inline std::string csv_path_for(const std::string& json_path) {
    std::filesystem::path p(json_path);
    p.replace_extension(".csv");
    return p.string();
}

/// Writes via temporary files and renames, so a failure leaves no partial output.
inline void write_report(const Report& r, const std::string& json_path) {
    const std::string csv_path = csv_path_for(json_path);
    const std::string tmp_json = json_path + ".tmp", tmp_csv = csv_path + ".tmp";
    {
        std::ofstream out(tmp_json);
        if (!out) throw Error("cannot write " + json_path);
        out << r.body.dump(2) << '\n';
    }
    {
        std::ofstream out(tmp_csv);
        if (!out) throw Error("cannot write " + csv_path);
        out << r.csv;
    }
    std::filesystem::rename(tmp_json, json_path);
    std::filesystem::rename(tmp_csv, csv_path);
}

} // namespace bose_expand

#endif
