#pragma once

#include <json.hpp>

#include <cstdint>
#include <fstream>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ocgrad/ballbeam.hpp"
#include "ocgrad/grad_det.hpp"
#include "ocgrad/grad_tree.hpp"
#include "ocgrad/pendulum.hpp"
#include "ocgrad/scenario_tree.hpp"

namespace ocgrad {

/// Raised for malformed or inconsistent configuration input.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {

inline const nlohmann::json& require_field(const nlohmann::json& j, const char* key) {
    auto it = j.find(key);
    if (it == j.end()) throw ConfigError(std::string("config: missing field '") + key + "'");
    return *it;
}

template <typename T>
T get_field(const nlohmann::json& j, const char* key, T fallback) {
    auto it = j.find(key);
    if (it == j.end()) return fallback;
    try {
        return it->get<T>();
    } catch (const nlohmann::json::exception&) {
        throw ConfigError(std::string("config: field '") + key + "' has the wrong type");
    }
}

}  // namespace detail

/// Parses {"modes": [[..],..], "transition": [[..],..], "initial": [..]}.
/// Numbers are read as 64-bit floats; chain invariants are validated.
inline MarkovChain markov_chain_from_json(const nlohmann::json& j) {
    MarkovChain chain;
    try {
        chain.modes = detail::require_field(j, "modes").get<std::vector<std::vector<double>>>();
        chain.transition =
            detail::require_field(j, "transition").get<std::vector<std::vector<double>>>();
        chain.initial = detail::require_field(j, "initial").get<std::vector<double>>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config: bad markov chain: ") + e.what());
    }
    try {
        chain.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    return chain;
}

/// Parses a full tree document: the markov chain fields plus "horizon".
inline ScenarioTree scenario_tree_from_json(const nlohmann::json& j) {
    const MarkovChain chain = markov_chain_from_json(j);
    const auto horizon = detail::require_field(j, "horizon");
    if (!horizon.is_number_integer() || horizon.get<std::int64_t>() < 1)
        throw ConfigError("config: 'horizon' must be a positive integer");
    return build_from_markov(chain, horizon.get<std::size_t>());
}

inline PendulumParams pendulum_params_from_json(const nlohmann::json& j) {
    PendulumParams p;
    p.m = detail::get_field(j, "m", p.m);
    p.M = detail::get_field(j, "M", p.M);
    p.L = detail::get_field(j, "L", p.L);
    p.g = detail::get_field(j, "g", p.g);
    p.Ts = detail::get_field(j, "Ts", p.Ts);
    try {
        p.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    return p;
}

inline BallBeamParams ballbeam_params_from_json(const nlohmann::json& j) {
    BallBeamParams p;
    p.m = detail::get_field(j, "m", p.m);
    p.I = detail::get_field(j, "I", p.I);
    p.g = detail::get_field(j, "g", p.g);
    p.Ts = detail::get_field(j, "Ts", p.Ts);
    try {
        p.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    return p;
}

/// How the control variables are initialised before a run.
struct ControlInit {
    enum class Kind { zeros, constant, random } kind = Kind::zeros;
    double value = 0.0;        // constant fill
    std::uint64_t seed = 0;    // random
    double scale = 1.0;        // random: uniform in [-scale, scale]
};

/// One benchmark/gradient run, as read from the JSON config document.
struct RunConfig {
    std::string system;  // "pendulum" | "ballbeam"
    nlohmann::json params = nlohmann::json::object();
    enum class Mode { deterministic, stochastic } mode = Mode::deterministic;
    std::size_t horizon = 0;
    std::vector<double> initial_state;
    std::optional<MarkovChain> markov;
    ControlInit control_init;
    unsigned workers = 1;
    std::size_t repetitions = 1000;
    std::string output;  // optional path; empty = stdout only
    bool emit_states = false;
};

inline RunConfig run_config_from_json(const nlohmann::json& j) {
    RunConfig cfg;
    cfg.system = detail::require_field(j, "system").get<std::string>();
    if (cfg.system != "pendulum" && cfg.system != "ballbeam")
        throw ConfigError("config: 'system' must be \"pendulum\" or \"ballbeam\"");
    if (j.contains("params")) {
        cfg.params = j.at("params");
        if (!cfg.params.is_object()) throw ConfigError("config: 'params' must be an object");
    }

    const std::string mode = detail::get_field<std::string>(j, "mode", "deterministic");
    if (mode == "deterministic") {
        cfg.mode = RunConfig::Mode::deterministic;
    } else if (mode == "stochastic") {
        cfg.mode = RunConfig::Mode::stochastic;
    } else {
        throw ConfigError("config: 'mode' must be \"deterministic\" or \"stochastic\"");
    }

    const auto& horizon = detail::require_field(j, "horizon");
    if (!horizon.is_number_integer() || horizon.get<std::int64_t>() < 1)
        throw ConfigError("config: 'horizon' must be a positive integer");
    cfg.horizon = horizon.get<std::size_t>();

    try {
        cfg.initial_state = detail::require_field(j, "initial_state").get<std::vector<double>>();
    } catch (const nlohmann::json::exception&) {
        throw ConfigError("config: 'initial_state' must be an array of numbers");
    }

    if (cfg.mode == RunConfig::Mode::stochastic) {
        if (!j.contains("markov"))
            throw ConfigError("config: stochastic mode requires a 'markov' object");
        cfg.markov = markov_chain_from_json(j.at("markov"));
    }

    if (j.contains("control_init")) {
        const auto& ci = j.at("control_init");
        const std::string kind = detail::require_field(ci, "kind").get<std::string>();
        if (kind == "zeros") {
            cfg.control_init.kind = ControlInit::Kind::zeros;
        } else if (kind == "constant") {
            cfg.control_init.kind = ControlInit::Kind::constant;
            cfg.control_init.value = detail::require_field(ci, "value").get<double>();
        } else if (kind == "random") {
            cfg.control_init.kind = ControlInit::Kind::random;
            cfg.control_init.seed = detail::require_field(ci, "seed").get<std::uint64_t>();
            cfg.control_init.scale = detail::get_field(ci, "scale", 1.0);
        } else {
            throw ConfigError("config: control_init.kind must be zeros, constant or random");
        }
    }

    cfg.workers = detail::get_field<unsigned>(j, "workers", 1);
    if (cfg.workers == 0) throw ConfigError("config: 'workers' must be >= 1");
    cfg.repetitions = detail::get_field<std::size_t>(j, "repetitions", 1000);
    if (cfg.repetitions == 0) throw ConfigError("config: 'repetitions' must be >= 1");
    cfg.output = detail::get_field<std::string>(j, "output", "");
    cfg.emit_states = detail::get_field(j, "emit_states", false);
    return cfg;
}

inline RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config: parse error: ") + e.what());
    }
    return run_config_from_json(j);
}

inline void fill_controls(std::span<double> flat, const ControlInit& init) {
    switch (init.kind) {
        case ControlInit::Kind::zeros:
            std::fill(flat.begin(), flat.end(), 0.0);
            break;
        case ControlInit::Kind::constant:
            std::fill(flat.begin(), flat.end(), init.value);
            break;
        case ControlInit::Kind::random: {
            std::mt19937_64 rng(init.seed);
            std::uniform_real_distribution<double> dist(-init.scale, init.scale);
            for (double& v : flat) v = dist(rng);
            break;
        }
    }
}

}  // namespace ocgrad
