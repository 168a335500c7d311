#pragma once

#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "qbm/errors.hpp"
#include "qbm/model.hpp"

// Plain-text key/value configuration: one `key = value` per line, `#` starts
// a comment. Keys: m, omega0, kappa, gamma1, gamma2, T1, T2, regime, s, d.

namespace qbm {

/// Full problem description: physical parameters plus initial-state widths.
struct ParamSet {
    SystemParams sys;
    double s = 1.0;
    double d = 2.0;

    InitialState initial_state() const { return InitialState::from_widths(s, d); }
};

inline Regime parse_regime(const std::string& v) {
    if (v == "high-t" || v == "high" || v == "high-temperature") return Regime::HighTemperature;
    if (v == "weak" || v == "weak-coupling") return Regime::WeakCoupling;
    throw InvalidParams("unknown regime '" + v + "' (expected high-t or weak)");
}

namespace detail {

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

inline double parse_double(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const double x = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw InvalidParams("config key '" + key + "': cannot parse number '" + v + "'");
    }
}

}  // namespace detail

/// Applies one key/value pair to a ParamSet; throws InvalidParams on unknown
/// keys or malformed numbers.
inline void apply_config_entry(ParamSet& ps, const std::string& key, const std::string& value) {
    if (key == "m") ps.sys.m = detail::parse_double(key, value);
    else if (key == "omega0") ps.sys.omega0 = detail::parse_double(key, value);
    else if (key == "kappa") ps.sys.kappa = detail::parse_double(key, value);
    else if (key == "gamma1") ps.sys.gamma1 = detail::parse_double(key, value);
    else if (key == "gamma2") ps.sys.gamma2 = detail::parse_double(key, value);
    else if (key == "T1") ps.sys.T1 = detail::parse_double(key, value);
    else if (key == "T2") ps.sys.T2 = detail::parse_double(key, value);
    else if (key == "s") ps.s = detail::parse_double(key, value);
    else if (key == "d") ps.d = detail::parse_double(key, value);
    else if (key == "regime") ps.sys.regime = parse_regime(value);
    else throw InvalidParams("unknown config key '" + key + "'");
}

inline ParamSet load_config(std::istream& in, ParamSet base = {}) {
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw InvalidParams("config line " + std::to_string(lineno) +
                                ": expected 'key = value'");
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string value = detail::trim(line.substr(eq + 1));
        if (key.empty() || value.empty())
            throw InvalidParams("config line " + std::to_string(lineno) +
                                ": expected 'key = value'");
        apply_config_entry(base, key, value);
    }
    return base;
}

inline ParamSet load_config_file(const std::string& path, ParamSet base = {}) {
    std::ifstream in(path);
    if (!in) throw InvalidParams("cannot open config file '" + path + "'");
    return load_config(in, base);
}

}  // namespace qbm
