// Command-line driver. Exit codes: 0 success, 2 validation failure, 1 error, 64 usage error.

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>

#include <bose_expand/cli.hpp>

using namespace bose_expand;

namespace {

struct Common {
    std::string config;
    std::string out;
    std::optional<double> tol;
    std::optional<int> workers;
    unsigned seed = 12345;
};

void add_common(CLI::App* app, Common& c, bool needs_config) {
    auto* opt = app->add_option("--config", c.config, "model configuration (JSON)");
    if (needs_config) opt->required()->check(CLI::ExistingFile);
    app->add_option("--out", c.out, "JSON report path; the CSV table goes next to it")->required();
    app->add_option("--tol", c.tol, "tolerance override")->check(CLI::PositiveNumber);
    app->add_option("--workers", c.workers, "worker threads (default: BOSE_EXPAND_WORKERS or core count)")
        ->check(CLI::PositiveNumber);
    app->add_option("--seed", c.seed, "seed for randomized starts");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Large-N expansions for the mean-field Bose gas on a cutoff torus"};
    app.require_subcommand(1);
    Common common;
    json params = json::object();

    auto* hartree = app.add_subcommand("solve-hartree", "minimize the Hartree functional");
    add_common(hartree, common, true);

    auto* bog = app.add_subcommand("bogoliubov", "diagonalize the quadratic Hamiltonian");
    add_common(bog, common, true);

    int orders = 1;
    auto* expand = app.add_subcommand("expand-energy", "energy coefficients e_H, E0, E1");
    add_common(expand, common, true);
    expand->add_option("--orders", orders, "highest order (0 or 1)");

    std::string observable = "hopping";
    double omega = 2.0;
    int nmin = 0, nmax = 0;
    auto* edge = app.add_subcommand("edgeworth", "fluctuation statistics against the Edgeworth prediction");
    add_common(edge, common, true);
    edge->add_option("--observable", observable, "hopping | hopping2");
    edge->add_option("--orders", orders, "highest order (0 or 1)");
    edge->add_option("--omega", omega, "frequency of the test function exp(-x^2/2) cos(omega x)");
    edge->add_option("--nmin", nmin);
    edge->add_option("--nmax", nmax);

    auto* binding = app.add_subcommand("binding", "binding energy expansion against exact diagonalization");
    add_common(binding, common, true);
    binding->add_option("--nmin", nmin);
    binding->add_option("--nmax", nmax);

    std::string quench = R"({"vhat_after": 2.0})";
    double t = 1.0;
    std::string order_list = "0,1";
    auto* dyn = app.add_subcommand("dynamics", "quench dynamics norm errors");
    add_common(dyn, common, true);
    dyn->add_option("--quench", quench, "post-quench potential as JSON");
    dyn->add_option("--t", t, "evolution time");
    dyn->add_option("--orders", order_list, "comma list of orders (0,1)");
    dyn->add_option("--nmin", nmin);
    dyn->add_option("--nmax", nmax);

    std::string oracle_mode;
    auto* oracle = app.add_subcommand("oracle", "exact diagonalization and evolution");
    add_common(oracle, common, true);
    oracle->add_option("mode", oracle_mode, "energy-curve | statistics | evolve")
        ->required()
        ->check(CLI::IsMember({"energy-curve", "statistics", "evolve"}));
    oracle->add_option("--observable", observable);
    oracle->add_option("--quench", quench);
    oracle->add_option("--t", t);
    oracle->add_option("--nmin", nmin);
    oracle->add_option("--nmax", nmax);

    std::string suite = "full";
    auto* validate = app.add_subcommand("validate", "run the acceptance criteria");
    add_common(validate, common, false);
    validate->add_option("--suite", suite, "full or a comma list of groups 1..8");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? exit_ok : exit_usage;
    }

    try {
        RunConfig cfg;
        cfg.task = app.get_subcommands().front()->get_name();
        if (!common.config.empty()) cfg.model = load_model_config(common.config);
        cfg.out = common.out;
        cfg.tol = common.tol;
        cfg.seed = common.seed;
        cfg.workers = common.workers ? *common.workers : default_workers();
        auto ranged = [&] {
            if (nmin > 0) params["nmin"] = nmin;
            if (nmax > 0) params["nmax"] = nmax;
        };
        if (cfg.task == "expand-energy") params["orders"] = orders;
        if (cfg.task == "edgeworth") {
            params["observable"] = observable;
            params["orders"] = orders;
            params["omega"] = omega;
            ranged();
        }
        if (cfg.task == "binding") ranged();
        if (cfg.task == "dynamics" || cfg.task == "oracle") {
            params["quench"] = parse_json_text(quench, "--quench");
            params["t"] = t;
            ranged();
        }
        if (cfg.task == "dynamics") {
            std::vector<int> list;
            std::stringstream ss(order_list);
            std::string item;
            while (std::getline(ss, item, ',')) {
                try {
                    list.push_back(std::stoi(item));
                } catch (const std::exception&) {
                    throw ConfigError("--orders must be a comma list of integers");
                }
            }
            params["orders"] = list;
        }
        if (cfg.task == "oracle") {
            params["mode"] = oracle_mode;
            params["observable"] = observable;
        }
        if (cfg.task == "validate") params["suite"] = suite;
        cfg.parameters = params;

        const Report report = run(cfg);
        write_report(report, cfg.out);
        if (report.status == exit_validation) std::cerr << "validation: one or more criteria failed\n";
        return report.status;
    } catch (const ConfigError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return exit_usage;
    } catch (const ValidationError& e) {
        std::cerr << "validation error: " << e.what() << '\n';
        return exit_validation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_error;
    }
}
