#pragma once

// Run configuration. The on-disk dialect is JSON:
//
//   {
//     "model":    {"N": 30, "J": 0.3, "Omega": -1.0, "omega": -0.13,
//                  "long_range": [{"d": 2, "J": 0.05}]},
//     "sector":   {"m": 3},
//     "initial":  {"sites": [1, 2, 3]},
//     "grid":     {"t_max": 30, "steps": 2000},
//     "analyses": {"evolve": true, "steady": true, "gobbs": true, "wavefront": true},
//     "output":   {"directory": "out", "csv": true, "json": true, "svg": true, "matrix": false}
//   }
//
// Sites are 1-based in the file. t_max is measured in units of 1/|J|.
// Every key except model.N, sector.m and initial.sites has a default;
// unknown keys are rejected.

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <string>
#include <type_traits>
#include <vector>

#include <nlohmann/json.hpp>

#include "magrelax/basis.hpp"
#include "magrelax/error.hpp"
#include "magrelax/hamiltonian.hpp"

namespace magrelax {

struct GridSpec {
    double t_max = 30.0;  // units of 1/|J|
    std::size_t steps = 2000;
};

struct AnalysisFlags {
    bool evolve = true;
    bool steady = true;
    bool gobbs = true;
    bool wavefront = true;
};

struct OutputSpec {
    std::string directory = "magrelax-out";
    bool csv = true;
    bool json = true;
    bool svg = true;
    bool matrix = false;
};

struct RunConfig {
    ModelParams model;
    int magnons = 0;
    std::vector<int> initial_sites;  // 0-based
    GridSpec grid;
    AnalysisFlags analyses;
    OutputSpec output;

    // Physical end time t_max / |J|.
    double t_end() const { return grid.t_max / std::abs(model.hopping); }

    void validate() const {
        model.validate();
        if (magnons < 0 || magnons > 2 * model.sites)
            throw InvalidArgument("sector.m: must lie in [0, 2N], got " + std::to_string(magnons));
        if (int(initial_sites.size()) != magnons)
            throw InvalidArgument("initial.sites: lists " + std::to_string(initial_sites.size()) +
                                  " excitations, sector.m is " + std::to_string(magnons));
        std::vector<int> count(std::size_t(model.sites), 0);
        for (int s : initial_sites) {
            if (s < 0 || s >= model.sites)
                throw InvalidArgument("initial.sites: site " + std::to_string(s + 1) + " outside [1, N]");
            if (++count[std::size_t(s)] > 2)
                throw InvalidArgument("initial.sites: site " + std::to_string(s + 1) +
                                      " listed three times, but (S^+)^3 = 0");
        }
        if (!(grid.t_max > 0.0) || !std::isfinite(grid.t_max))
            throw InvalidArgument("grid.t_max: must be positive and finite");
        if (grid.steps < 2) throw InvalidArgument("grid.steps: must be >= 2");
        if ((analyses.evolve || analyses.wavefront) && model.hopping == 0.0)
            throw InvalidArgument("model.J: must be nonzero when time evolution is requested (t_max is in 1/J)");
        if (analyses.wavefront && initial_sites.empty())
            throw InvalidArgument("initial.sites: wavefront analysis needs at least one excited site");
    }
};

namespace detail {

inline void reject_unknown(const nlohmann::json& obj, const std::string& where,
                           std::initializer_list<const char*> allowed) {
    if (!obj.is_object()) throw InvalidArgument(where + ": expected an object");
    for (const auto& [key, value] : obj.items()) {
        bool ok = false;
        for (const char* a : allowed) ok = ok || key == a;
        if (!ok) throw InvalidArgument(where + "." + key + ": unknown key");
    }
}

template <typename T>
T field(const nlohmann::json& obj, const std::string& where, const char* key, const T& fallback, bool required) {
    if (!obj.contains(key)) {
        if (required) throw InvalidArgument(where + "." + key + ": required");
        return fallback;
    }
    const auto& v = obj.at(key);
    try {
        if constexpr (std::is_same_v<T, bool>) {
            if (!v.is_boolean()) throw InvalidArgument("");
        } else if constexpr (std::is_integral_v<T>) {
            if (!v.is_number_integer()) throw InvalidArgument("");
        } else if constexpr (std::is_floating_point_v<T>) {
            if (!v.is_number()) throw InvalidArgument("");
        } else {
            if (!v.is_string()) throw InvalidArgument("");
        }
        return v.get<T>();
    } catch (const std::exception&) {
        throw InvalidArgument(where + "." + key + ": wrong type (" + std::string(v.type_name()) + ")");
    }
}

} // namespace detail

inline RunConfig parse_config(const nlohmann::json& j) {
    using detail::field;
    detail::reject_unknown(j, "config", {"model", "sector", "initial", "grid", "analyses", "output"});
    RunConfig c;

    if (!j.contains("model")) throw InvalidArgument("model: required");
    const auto& m = j.at("model");
    detail::reject_unknown(m, "model", {"N", "J", "Omega", "omega", "long_range"});
    c.model.sites = field<int>(m, "model", "N", 0, true);
    c.model.hopping = field<double>(m, "model", "J", 0.3, false);
    c.model.quadratic_zeeman = field<double>(m, "model", "Omega", -1.0, false);
    c.model.linear_zeeman = field<double>(m, "model", "omega", -0.13, false);
    if (m.contains("long_range")) {
        const auto& lr = m.at("long_range");
        if (!lr.is_array()) throw InvalidArgument("model.long_range: expected an array");
        for (std::size_t i = 0; i < lr.size(); ++i) {
            const std::string where = "model.long_range[" + std::to_string(i) + "]";
            detail::reject_unknown(lr[i], where, {"d", "J"});
            c.model.long_range.push_back(
                {field<int>(lr[i], where, "d", 0, true), field<double>(lr[i], where, "J", 0.0, true)});
        }
    }

    if (!j.contains("sector")) throw InvalidArgument("sector: required");
    detail::reject_unknown(j.at("sector"), "sector", {"m"});
    c.magnons = field<int>(j.at("sector"), "sector", "m", 0, true);

    if (!j.contains("initial")) throw InvalidArgument("initial: required");
    const auto& init = j.at("initial");
    detail::reject_unknown(init, "initial", {"sites"});
    if (!init.contains("sites") || !init.at("sites").is_array())
        throw InvalidArgument("initial.sites: required array of 1-based site labels");
    for (const auto& s : init.at("sites")) {
        if (!s.is_number_integer()) throw InvalidArgument("initial.sites: entries must be integers");
        c.initial_sites.push_back(s.get<int>() - 1);
    }

    if (j.contains("grid")) {
        const auto& g = j.at("grid");
        detail::reject_unknown(g, "grid", {"t_max", "steps"});
        c.grid.t_max = field<double>(g, "grid", "t_max", c.grid.t_max, false);
        const auto steps = field<long long>(g, "grid", "steps", (long long)c.grid.steps, false);
        if (steps < 2) throw InvalidArgument("grid.steps: must be >= 2");
        c.grid.steps = std::size_t(steps);
    }
    if (j.contains("analyses")) {
        const auto& a = j.at("analyses");
        detail::reject_unknown(a, "analyses", {"evolve", "steady", "gobbs", "wavefront"});
        c.analyses.evolve = field<bool>(a, "analyses", "evolve", true, false);
        c.analyses.steady = field<bool>(a, "analyses", "steady", true, false);
        c.analyses.gobbs = field<bool>(a, "analyses", "gobbs", true, false);
        c.analyses.wavefront = field<bool>(a, "analyses", "wavefront", true, false);
    }
    if (j.contains("output")) {
        const auto& o = j.at("output");
        detail::reject_unknown(o, "output", {"directory", "csv", "json", "svg", "matrix"});
        c.output.directory = field<std::string>(o, "output", "directory", c.output.directory, false);
        c.output.csv = field<bool>(o, "output", "csv", true, false);
        c.output.json = field<bool>(o, "output", "json", true, false);
        c.output.svg = field<bool>(o, "output", "svg", true, false);
        c.output.matrix = field<bool>(o, "output", "matrix", false, false);
    }
    c.validate();
    return c;
}

inline RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidArgument("cannot open config file " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::parse_error& e) {
        throw InvalidArgument("config " + path + " is not valid JSON: " + e.what());
    }
    return parse_config(j);
}

// Resolved configuration, in the file dialect (1-based sites).
inline nlohmann::ordered_json to_json(const RunConfig& c) {
    nlohmann::ordered_json j;
    j["model"]["N"] = c.model.sites;
    j["model"]["J"] = c.model.hopping;
    j["model"]["Omega"] = c.model.quadratic_zeeman;
    j["model"]["omega"] = c.model.linear_zeeman;
    j["model"]["long_range"] = nlohmann::ordered_json::array();
    for (const auto& lr : c.model.long_range)
        j["model"]["long_range"].push_back({{"d", lr.distance}, {"J", lr.coupling}});
    j["sector"]["m"] = c.magnons;
    j["initial"]["sites"] = nlohmann::ordered_json::array();
    for (int s : c.initial_sites) j["initial"]["sites"].push_back(s + 1);
    j["grid"]["t_max"] = c.grid.t_max;
    j["grid"]["steps"] = c.grid.steps;
    j["analyses"]["evolve"] = c.analyses.evolve;
    j["analyses"]["steady"] = c.analyses.steady;
    j["analyses"]["gobbs"] = c.analyses.gobbs;
    j["analyses"]["wavefront"] = c.analyses.wavefront;
    j["output"]["directory"] = c.output.directory;
    j["output"]["csv"] = c.output.csv;
    j["output"]["json"] = c.output.json;
    j["output"]["svg"] = c.output.svg;
    j["output"]["matrix"] = c.output.matrix;
    return j;
}

} // namespace magrelax
