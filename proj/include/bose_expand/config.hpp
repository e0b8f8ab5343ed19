#ifndef BOSE_EXPAND_CONFIG_HPP
#define BOSE_EXPAND_CONFIG_HPP

// JSON model configuration:
//   {"spec": 1, "dimension": 1, "cutoff": 1, "N": 10,
//    "potential": {"kind": "constant", "value": 1.0},
//    "trap": {"L": 6.0, "points": 4001, "kind": "harmonic"}}
// Unknown keys are rejected at every level.

#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>

#include <json.hpp>

#include "errors.hpp"
#include "model.hpp"

namespace bose_expand {

using json = nlohmann::ordered_json;

inline constexpr int schema_version = 1;
inline constexpr const char* tool_version = "1.0.0";

/// Schema violation or malformed input; the CLI maps it to exit code 64.
class ConfigError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

struct TrapConfig {
    std::string kind = "harmonic";
    double half_width = 6.0;
    int points = 4001;
    double threshold = 10.0;
    std::vector<double> values;

    TrapGrid grid(int dimension) const {
        if (kind == "harmonic") return TrapGrid::harmonic(dimension, half_width, points, threshold);
        TrapGrid g;
        g.dimension = dimension;
        g.half_width = half_width;
        g.points = points;
        g.confinement_threshold = threshold;
        g.values = values;
        return g;
    }
};

struct ModelConfig {
    int dimension = 1;
    int cutoff = 1;
    int particles = 10;
    PairPotential potential = PairPotential::constant(1.0);
    std::optional<TrapConfig> trap;
    json source;

    CutoffModel model() const { return make_model(dimension, cutoff, potential, particles); }
};

namespace detail {

inline void reject_unknown(const json& j, const std::set<std::string>& allowed, const std::string& where) {
    if (!j.is_object()) throw ConfigError(where + " must be a JSON object");
    for (const auto& [key, value] : j.items())
        if (!allowed.count(key)) throw ConfigError("unknown key '" + key + "' in " + where);
}

template <class T>
T required(const json& j, const std::string& key, const std::string& where) {
    if (!j.contains(key)) throw ConfigError("missing key '" + key + "' in " + where);
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw ConfigError("key '" + key + "' in " + where + " has the wrong type");
    }
}

template <class T>
T optional_value(const json& j, const std::string& key, T fallback, const std::string& where) {
    return j.contains(key) ? required<T>(j, key, where) : fallback;
}

inline Momentum momentum_from(const json& j, int dimension) {
    if (!j.is_array() || static_cast<int>(j.size()) != dimension)
        throw ConfigError("potential table momentum must be an integer array of length " + std::to_string(dimension));
    Momentum n{0, 0, 0};
    for (int a = 0; a < dimension; ++a) {
        if (!j[static_cast<std::size_t>(a)].is_number_integer()) throw ConfigError("momentum components must be integers");
        n[static_cast<std::size_t>(a)] = j[static_cast<std::size_t>(a)].get<int>();
    }
    return n;
}

} // namespace detail

inline PairPotential parse_potential(const json& j, int dimension) {
    const std::string where = "potential";
    if (!j.is_object()) throw ConfigError("potential must be a JSON object");
    const auto kind = detail::required<std::string>(j, "kind", where);
    if (kind == "constant") {
        detail::reject_unknown(j, {"kind", "value"}, where);
        return PairPotential::constant(detail::required<double>(j, "value", where));
    }
    if (kind == "gaussian") {
        detail::reject_unknown(j, {"kind", "amplitude", "width"}, where);
        return PairPotential::gaussian(detail::required<double>(j, "amplitude", where),
                                       detail::required<double>(j, "width", where));
    }
    if (kind == "table") {
        detail::reject_unknown(j, {"kind", "entries"}, where);
        const json& entries = j.contains("entries") ? j.at("entries") : throw ConfigError("missing key 'entries' in potential");
        if (!entries.is_array()) throw ConfigError("potential entries must be an array");
        std::map<Momentum, double> table;
        for (const auto& e : entries) {
            detail::reject_unknown(e, {"k", "value"}, "potential entry");
            if (!e.contains("k")) throw ConfigError("missing key 'k' in potential entry");
            table[detail::momentum_from(e.at("k"), dimension)] = detail::required<double>(e, "value", "potential entry");
        }
        return PairPotential::table(std::move(table));
    }
    throw ConfigError("potential kind must be constant, gaussian or table, got '" + kind + "'");
}

inline json potential_to_json(const PairPotential& v, int dimension) {
    json j;
    switch (v.kind()) {
    case PairPotential::Kind::constant:
        j["kind"] = "constant";
        j["value"] = v.contact_strength();
        break;
    case PairPotential::Kind::gaussian:
        j["kind"] = "gaussian";
        j["amplitude"] = v.scale() * v.amplitude();
        j["width"] = v.width();
        break;
    case PairPotential::Kind::table: {
        j["kind"] = "table";
        json entries = json::array();
        for (const auto& [k, value] : v.entries()) {
            json kk = json::array();
            for (int a = 0; a < dimension; ++a) kk.push_back(k[static_cast<std::size_t>(a)]);
            entries.push_back({{"k", kk}, {"value", v.scale() * value}});
        }
        j["entries"] = entries;
        break;
    }
    }
    return j;
}

inline ModelConfig parse_model_config(const json& j) {
    detail::reject_unknown(j, {"spec", "dimension", "cutoff", "N", "potential", "trap"}, "model configuration");
    const int spec = detail::required<int>(j, "spec", "model configuration");
    if (spec != schema_version) throw ConfigError("unsupported schema version " + std::to_string(spec));
    ModelConfig c;
    c.dimension = detail::required<int>(j, "dimension", "model configuration");
    c.cutoff = detail::required<int>(j, "cutoff", "model configuration");
    c.particles = detail::required<int>(j, "N", "model configuration");
    if (c.dimension < 1 || c.dimension > 3) throw ConfigError("dimension must be 1, 2 or 3");
    if (c.cutoff < 1) throw ConfigError("cutoff must be >= 1");
    if (c.particles < 2) throw ConfigError("N must be >= 2");
    if (!j.contains("potential")) throw ConfigError("missing key 'potential' in model configuration");
    c.potential = parse_potential(j.at("potential"), c.dimension);
    if (j.contains("trap")) {
        const json& t = j.at("trap");
        detail::reject_unknown(t, {"kind", "L", "points", "threshold", "values"}, "trap");
        TrapConfig trap;
        trap.kind = detail::optional_value<std::string>(t, "kind", "harmonic", "trap");
        trap.half_width = detail::required<double>(t, "L", "trap");
        trap.points = detail::required<int>(t, "points", "trap");
        trap.threshold = detail::optional_value<double>(t, "threshold", 10.0, "trap");
        if (trap.kind == "table") trap.values = detail::required<std::vector<double>>(t, "values", "trap");
        else if (trap.kind != "harmonic") throw ConfigError("trap kind must be harmonic or table");
        else if (t.contains("values")) throw ConfigError("trap values are only accepted for kind 'table'");
        c.trap = trap;
    }
    c.source = j;
    try {
        c.model();
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        throw ConfigError(e.what());
    }
    return c;
}

inline json parse_json_text(const std::string& text, const std::string& origin) {
    try {
        return json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("malformed JSON in " + origin + ": " + e.what());
    }
}

inline ModelConfig load_model_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read configuration file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_model_config(parse_json_text(ss.str(), path));
}

inline json model_config_to_json(const ModelConfig& c) {
    json j;
    j["spec"] = schema_version;
    j["dimension"] = c.dimension;
    j["cutoff"] = c.cutoff;
    j["N"] = c.particles;
    j["potential"] = potential_to_json(c.potential, c.dimension);
    if (c.trap) {
        json t;
        t["kind"] = c.trap->kind;
        t["L"] = c.trap->half_width;
        t["points"] = c.trap->points;
        t["threshold"] = c.trap->threshold;
        if (c.trap->kind == "table") t["values"] = c.trap->values;
        j["trap"] = t;
    }
    return j;
}

/// Resolved run: model, task selector, task parameters, outputs and overrides.
struct RunConfig {
    ModelConfig model;
    std::string task;
    json parameters = json::object();
    std::string out;
    std::optional<double> tol;
    int workers = 1;
    unsigned seed = 12345;

    json resolved() const {
        json j;
        j["model"] = model_config_to_json(model);
        j["task"] = task;
        j["parameters"] = parameters;
        if (tol) j["tol"] = *tol;
        j["seed"] = seed;
        return j;
    }
};

} // namespace bose_expand

#endif
