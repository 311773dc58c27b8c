#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "conjlab/errors.hpp"
#include "conjlab/families.hpp"

namespace conjlab {

// Diagnostics in dependency order: the conjugacy table feeds everything in
// the middle block, the single-map structure scans come last.
inline const std::vector<std::string>& diagnostic_ids() {
    static const std::vector<std::string> ids = {
        "conjugacy", "multipliers", "lrd", "c1",   "uaa",
        "holder",    "zooming",     "mane", "nice_set", "renormalization"};
    return ids;
}

inline bool is_diagnostic_id(const std::string& name) {
    const auto& ids = diagnostic_ids();
    return std::find(ids.begin(), ids.end(), name) != ids.end();
}

// One experiment: a map pair, a refinement depth, a seed, and the set of
// diagnostics to run.  Per-diagnostic numeric parameters live in `params`
// keyed by diagnostic id.  `outdir` is environment, not experiment, and is
// excluded from the canonical text and the config hash.
struct ScenarioConfig {
    MapFamilyConfig map_f, map_g;
    int depth = 12;
    std::uint64_t seed = 1;
    std::string outdir = "out";
    std::vector<std::string> diagnostics;  // sorted into dependency order
    std::map<std::string, std::map<std::string, double>> params;

    bool wants(const std::string& diag) const {
        return std::find(diagnostics.begin(), diagnostics.end(), diag) != diagnostics.end();
    }
    double param(const std::string& diag, const std::string& key, double fallback) const {
        auto s = params.find(diag);
        if (s == params.end()) return fallback;
        auto it = s->second.find(key);
        return it == s->second.end() ? fallback : it->second;
    }
    bool has_param(const std::string& diag, const std::string& key) const {
        auto s = params.find(diag);
        return s != params.end() && s->second.count(key) > 0;
    }
};

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

inline double parse_number(const std::string& v, const std::string& where) {
    try {
        std::size_t pos = 0;
        double x = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw ConfigError("expected a number for " + where + ", got '" + v + "'");
    }
}

inline bool parse_switch(const std::string& v, const std::string& where) {
    if (v == "on" || v == "true" || v == "yes" || v == "1") return true;
    if (v == "off" || v == "false" || v == "no" || v == "0") return false;
    throw ConfigError("expected on/off for " + where + ", got '" + v + "'");
}

// Fills a MapFamilyConfig from the flat section map; `prefix` is "map_f" or
// "map_g", possibly extended by ".base" chains for conjugate/flip wrappers.
inline void fill_map_config(
    const std::map<std::string, std::map<std::string, std::string>>& sections,
    const std::string& prefix, MapFamilyConfig& out) {
    auto sec = sections.find(prefix);
    if (sec == sections.end())
        throw ConfigError("missing section [" + prefix + "]");
    for (const auto& [key, value] : sec->second) {
        if (key == "family")
            out.family = value;
        else
            out.params[key] = parse_number(value, prefix + "." + key);
    }
    if (out.family.empty())
        throw ConfigError("section [" + prefix + "] has no 'family' key");
    if (sections.count(prefix + ".base")) {
        out.base = std::make_shared<MapFamilyConfig>();
        fill_map_config(sections, prefix + ".base", *out.base);
    } else if (out.family == "conjugate" || out.family == "flip") {
        throw ConfigError("family '" + out.family + "' in [" + prefix +
                          "] needs a [" + prefix + ".base] section");
    }
}

inline void canonical_map_lines(const MapFamilyConfig& cfg, const std::string& prefix,
                                std::vector<std::string>& lines) {
    lines.push_back(prefix + ".family=" + cfg.family);
    for (const auto& [key, value] : cfg.params) {
        char buf[48];
        std::snprintf(buf, sizeof buf, "%.17g", value);
        lines.push_back(prefix + "." + key + "=" + buf);
    }
    if (cfg.base) canonical_map_lines(*cfg.base, prefix + ".base", lines);
}

} // namespace detail

// Key/value text with [section] headers, '#' comments, one assignment per
// line.  Unknown keys and sections are errors; silent acceptance of a typo'd
// diagnostic name would quietly drop it from the run.
inline ScenarioConfig parse_scenario(std::istream& in) {
    std::map<std::string, std::map<std::string, std::string>> sections;
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError("line " + std::to_string(lineno) + ": unterminated section header");
            section = detail::trim(line.substr(1, line.size() - 2));
            if (section.empty())
                throw ConfigError("line " + std::to_string(lineno) + ": empty section name");
            continue;
        }
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
        std::string key = detail::trim(line.substr(0, eq));
        std::string value = detail::trim(line.substr(eq + 1));
        if (key.empty() || value.empty())
            throw ConfigError("line " + std::to_string(lineno) + ": empty key or value");
        if (!sections[section].emplace(key, value).second)
            throw ConfigError("line " + std::to_string(lineno) + ": duplicate key '" + key +
                              "' in section [" + section + "]");
    }

    ScenarioConfig cfg;
    for (const auto& [key, value] : sections[""]) {
        if (key == "depth")
            cfg.depth = static_cast<int>(detail::parse_number(value, "depth"));
        else if (key == "seed")
            cfg.seed = static_cast<std::uint64_t>(detail::parse_number(value, "seed"));
        else if (key == "outdir")
            cfg.outdir = value;
        else
            throw ConfigError("unknown top-level key '" + key + "'");
    }

    detail::fill_map_config(sections, "map_f", cfg.map_f);
    detail::fill_map_config(sections, "map_g", cfg.map_g);

    if (sections.count("diagnostics")) {
        for (const auto& [key, value] : sections.at("diagnostics")) {
            if (!is_diagnostic_id(key))
                throw ConfigError("unknown diagnostic '" + key + "'");
            if (detail::parse_switch(value, "diagnostics." + key))
                cfg.diagnostics.push_back(key);
        }
    }
    // file order is irrelevant; execution follows dependency order
    std::sort(cfg.diagnostics.begin(), cfg.diagnostics.end(),
              [](const std::string& a, const std::string& b) {
                  const auto& ids = diagnostic_ids();
                  return std::find(ids.begin(), ids.end(), a) < std::find(ids.begin(), ids.end(), b);
              });

    for (const auto& [name, body] : sections) {
        if (name.empty() || name == "diagnostics") continue;
        if (name == "map_f" || name == "map_g" || name.rfind("map_f.", 0) == 0 ||
            name.rfind("map_g.", 0) == 0)
            continue;
        if (!is_diagnostic_id(name))
            throw ConfigError("unknown section [" + name + "]");
        for (const auto& [key, value] : body)
            cfg.params[name][key] = detail::parse_number(value, name + "." + key);
    }
    return cfg;
}

inline ScenarioConfig parse_scenario_text(const std::string& text) {
    std::istringstream in(text);
    return parse_scenario(in);
}

inline ScenarioConfig parse_scenario_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open scenario file '" + path + "'");
    return parse_scenario(in);
}

// Semantic checks beyond syntax: map families must construct, the depth must
// be usable, and every requested diagnostic must have its required
// parameters.  Collects all problems before throwing so a bad file is fixed
// in one pass.
inline void validate_scenario(const ScenarioConfig& cfg) {
    std::vector<std::string> problems;
    if (cfg.depth < 1 || cfg.depth > 24)
        problems.push_back("depth " + std::to_string(cfg.depth) + " outside [1, 24]");
    for (const char* side : {"map_f", "map_g"}) {
        const MapFamilyConfig& mc = std::string(side) == "map_f" ? cfg.map_f : cfg.map_g;
        try {
            (void)make_map<double>(mc);
        } catch (const ConfigError& e) {
            problems.push_back(std::string(side) + ": " + e.what());
        }
    }
    static const std::map<std::string, std::vector<std::string>> required = {
        {"zooming", {"point", "alpha"}},
        {"mane", {"gamma"}},
        {"nice_set", {"epsilon"}},
    };
    for (const auto& diag : cfg.diagnostics) {
        auto it = required.find(diag);
        if (it == required.end()) continue;
        for (const auto& key : it->second)
            if (!cfg.has_param(diag, key))
                problems.push_back("diagnostic '" + diag + "' needs parameter '" + key + "'");
    }
    for (const auto& [diag, body] : cfg.params) {
        (void)body;
        if (!cfg.wants(diag))
            problems.push_back("parameter section [" + diag + "] present but diagnostic is off");
    }
    if (!problems.empty()) {
        std::string msg = "invalid scenario:";
        for (const auto& p : problems) msg += "\n  " + p;
        throw ConfigError(msg);
    }
}

// Canonical text: sorted, locale-free, excludes outdir.  Two configs hash
// equal exactly when they describe the same experiment.
inline std::string canonical_scenario_text(const ScenarioConfig& cfg) {
    std::vector<std::string> lines;
    lines.push_back("depth=" + std::to_string(cfg.depth));
    lines.push_back("seed=" + std::to_string(cfg.seed));
    std::string diags = "diagnostics=";
    for (std::size_t i = 0; i < cfg.diagnostics.size(); ++i)
        diags += (i ? "," : "") + cfg.diagnostics[i];
    lines.push_back(diags);
    detail::canonical_map_lines(cfg.map_f, "map_f", lines);
    detail::canonical_map_lines(cfg.map_g, "map_g", lines);
    for (const auto& [diag, body] : cfg.params)
        for (const auto& [key, value] : body) {
            char buf[48];
            std::snprintf(buf, sizeof buf, "%.17g", value);
            lines.push_back(diag + "." + key + "=" + buf);
        }
    std::sort(lines.begin(), lines.end());
    std::string out;
    for (const auto& l : lines) out += l + "\n";
    return out;
}

inline std::string config_hash(const ScenarioConfig& cfg) {
    const std::string text = canonical_scenario_text(cfg);
    std::uint64_t h = 1469598103934665603ull;  // FNV-1a 64
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[32];
    std::snprintf(buf, sizeof buf, "fnv1a64:%016llx", static_cast<unsigned long long>(h));
    return buf;
}

} // namespace conjlab
