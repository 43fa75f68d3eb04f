#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "carnot/budget.hpp"
#include "carnot/group.hpp"
#include "carnot/regions.hpp"

namespace carnot {

inline constexpr const char* kVersion = "carnot 1.0.0";

namespace io {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// JSON documents for groups and regions

inline json to_json(const Vec& v) {
    json a = json::array();
    for (int i = 0; i < v.size(); ++i) a.push_back(v[i]);
    return a;
}

inline Vec vec_from_json(const json& a, const char* what) {
    if (!a.is_array()) throw Error(Errc::ConfigError, std::string(what) + " must be an array");
    Vec v(static_cast<int>(a.size()));
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (!a[i].is_number()) throw Error(Errc::ConfigError, std::string(what) + " must hold numbers");
        v[static_cast<int>(i)] = a[i].get<double>();
    }
    return v;
}

/// {"m": m, "k": k, "J": [[row-major m x m], ...]}
inline json group_to_json(const GroupSpec& G) {
    json j{{"m", G.m()}, {"k", G.k()}, {"name", G.name()}};
    json list = json::array();
    for (int l = 0; l < G.k(); ++l) {
        json row = json::array();
        for (int r = 0; r < G.m(); ++r)
            for (int c = 0; c < G.m(); ++c) row.push_back(G.J(l)(r, c));
        list.push_back(row);
    }
    j["J"] = list;
    return j;
}

inline GroupSpec group_from_json(const json& j) {
    try {
        const int m = j.at("m").get<int>(), k = j.at("k").get<int>();
        const auto& list = j.at("J");
        if (!list.is_array() || static_cast<int>(list.size()) != k)
            throw Error(Errc::ConfigError, "\"J\" must hold k matrices");
        if (m < 1 || m > kMaxHorizontal) throw Error(Errc::ConfigError, "bad \"m\"");
        std::vector<Mat> J;
        for (const auto& flat : list) {
            const Vec v = vec_from_json(flat, "J entry");
            if (v.size() != m * m) throw Error(Errc::ConfigError, "each J matrix needs m*m entries");
            Mat M(m, m);
            for (int r = 0; r < m; ++r)
                for (int c = 0; c < m; ++c) M(r, c) = v[r * m + c];
            J.push_back(M);
        }
        return make_custom(m, k, std::move(J), j.value("name", std::string("custom")));
    } catch (const json::exception& e) {
        throw Error(Errc::ConfigError, std::string("malformed group spec: ") + e.what());
    }
}

inline json region_to_json(const Region& E) {
    return std::visit(
        [](const auto& r) -> json {
            using T = std::decay_t<decltype(r)>;
            if constexpr (std::is_same_v<T, VerticalCylinder>)
                return {{"type", "cylinder"}, {"center", to_json(r.center)}, {"R", r.R}, {"a", to_json(r.a)}, {"b", to_json(r.b)}};
            else if constexpr (std::is_same_v<T, CoordinateBox>)
                return {{"type", "box"}, {"lo", to_json(r.lo)}, {"hi", to_json(r.hi)}};
            else if constexpr (std::is_same_v<T, EuclideanBall>)
                return {{"type", "ball"}, {"center", to_json(r.center)}, {"rho", r.rho}};
            else
                return {{"type", "halfspace"}, {"nu", to_json(r.nu)}, {"c", r.c}};
        },
        E);
}

inline Region region_from_json(const json& j) {
    try {
        const auto type = j.at("type").get<std::string>();
        if (type == "cylinder")
            return VerticalCylinder{vec_from_json(j.at("center"), "center"), j.at("R").get<double>(), vec_from_json(j.at("a"), "a"),
                                    vec_from_json(j.at("b"), "b")};
        if (type == "box") return CoordinateBox{vec_from_json(j.at("lo"), "lo"), vec_from_json(j.at("hi"), "hi")};
        if (type == "ball") return EuclideanBall{vec_from_json(j.at("center"), "center"), j.at("rho").get<double>()};
        if (type == "halfspace") return HorizontalHalfSpace{vec_from_json(j.at("nu"), "nu"), j.at("c").get<double>()};
        throw Error(Errc::ConfigError, "unknown region type '" + type + "'");
    } catch (const json::exception& e) {
        throw Error(Errc::ConfigError, std::string("malformed region: ") + e.what());
    }
}

inline json read_json_file(const std::filesystem::path& p) {
    std::ifstream in(p);
    if (!in) throw Error(Errc::ConfigError, "cannot open '" + p.string() + "'");
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw Error(Errc::ConfigError, "malformed JSON in '" + p.string() + "': " + e.what());
    }
}

/// A builtin name, or a path to a JSON document (relative paths resolve against `base`).
inline GroupSpec resolve_group(const std::string& ref, const std::filesystem::path& base = {}) {
    if (ref.ends_with(".json")) return group_from_json(read_json_file(base / ref));
    return group_from_name(ref);
}

inline Region resolve_region(const std::string& ref, const GroupSpec& G, const std::filesystem::path& base = {}) {
    if (!ref.ends_with(".json")) return region_from_name(ref, G);
    Region E = region_from_json(read_json_file(base / ref));
    try {
        check_region(G, E);
    } catch (const Error& e) {
        throw Error(Errc::ConfigError, e.what());
    }
    return E;
}

// ---------------------------------------------------------------------------
// Flat key = value configuration

/// Lines are `key = value`; `#` starts a comment; `[section]` prefixes the
/// keys that follow with `section.`. Keys are kept sorted so echoes are stable.
class Config {
public:
    static Config parse(const std::string& text) {
        Config c;
        std::istringstream in(text);
        std::string line, section;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
            line = trim(line);
            if (line.empty()) continue;
            if (line.front() == '[') {
                require(line.back() == ']' && line.size() > 2, Errc::ConfigError, "line " + std::to_string(lineno) + ": bad section");
                section = trim(line.substr(1, line.size() - 2)) + ".";
                continue;
            }
            const auto eq = line.find('=');
            require(eq != std::string::npos, Errc::ConfigError, "line " + std::to_string(lineno) + ": expected key = value");
            const std::string key = section + trim(line.substr(0, eq));
            require(!trim(line.substr(0, eq)).empty(), Errc::ConfigError, "line " + std::to_string(lineno) + ": empty key");
            require(!c.kv_.count(key), Errc::ConfigError, "line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
            c.kv_[key] = trim(line.substr(eq + 1));
        }
        return c;
    }

    static Config load(const std::filesystem::path& p) {
        std::ifstream in(p, std::ios::binary);
        require(static_cast<bool>(in), Errc::ConfigError, "cannot open config '" + p.string() + "'");
        std::ostringstream ss;
        ss << in.rdbuf();
        Config c = parse(ss.str());
        c.base_ = p.parent_path();
        return c;
    }

    void set(const std::string& key, const std::string& value) { kv_[key] = value; }
    bool has(const std::string& key) const { return kv_.count(key) > 0; }
    const std::map<std::string, std::string>& entries() const { return kv_; }
    const std::filesystem::path& base() const { return base_; }

    std::string get(const std::string& key, const std::string& fallback = "") const {
        const auto it = kv_.find(key);
        return it == kv_.end() ? fallback : it->second;
    }

    double number(const std::string& key, double fallback) const {
        return has(key) ? to_number(key, get(key)) : fallback;
    }

    std::vector<double> numbers(const std::string& key, const std::vector<double>& fallback = {}) const {
        if (!has(key)) return fallback;
        std::vector<double> out;
        for (const auto& tok : split(get(key))) out.push_back(to_number(key, tok));
        return out;
    }

    std::vector<std::string> list(const std::string& key) const { return has(key) ? split(get(key)) : std::vector<std::string>{}; }

    static std::vector<std::string> split(const std::string& s) {
        std::vector<std::string> out;
        std::string tok;
        std::istringstream in(s);
        while (std::getline(in, tok, ',')) {
            tok = trim(tok);
            if (!tok.empty()) out.push_back(tok);
        }
        return out;
    }

    static double to_number(const std::string& key, const std::string& tok) {
        try {
            std::size_t used = 0;
            const double v = std::stod(tok, &used);
            if (used == tok.size() && std::isfinite(v)) return v;
        } catch (const std::logic_error&) {
        }
        throw Error(Errc::ConfigError, "key '" + key + "': '" + tok + "' is not a number");
    }

private:
    static std::string trim(const std::string& s) {
        const auto a = s.find_first_not_of(" \t\r");
        if (a == std::string::npos) return "";
        return s.substr(a, s.find_last_not_of(" \t\r") - a + 1);
    }

    std::map<std::string, std::string> kv_;
    std::filesystem::path base_;
};

/// Budget keys under `budget.`; `budget.scale` is applied last.
inline QuadratureBudget budget_from(const Config& c) {
    QuadratureBudget b;
    if (c.has("seed")) {
        const std::string s = c.get("seed");
        try {
            std::size_t used = 0;
            b.seed = std::stoull(s, &used, 0);
            require(used == s.size(), Errc::ConfigError, "seed must be an unsigned integer");
        } catch (const std::logic_error&) {
            throw Error(Errc::ConfigError, "seed must be an unsigned integer");
        }
    }
    b.workers = static_cast<int>(c.number("budget.workers", b.workers));
    b.lambda_tol = c.number("budget.lambda_tol", b.lambda_tol);
    b.nodes_per_unit = static_cast<int>(c.number("budget.nodes_per_unit", b.nodes_per_unit));
    b.panel_order = static_cast<int>(c.number("budget.panel_order", b.panel_order));
    b.table_order = static_cast<int>(c.number("budget.table_order", b.table_order));
    b.mc_samples = static_cast<std::size_t>(c.number("budget.mc_samples", static_cast<double>(b.mc_samples)));
    b.t_min = c.number("budget.t_min", b.t_min);
    b.t_max = c.number("budget.t_max", b.t_max);
    b.t_ratio = c.number("budget.t_ratio", b.t_ratio);
    b.collar_c = c.number("budget.collar_c", b.collar_c);
    const double scale = c.number("budget.scale", 1.0);
    require(scale > 0.0, Errc::ConfigError, "budget.scale must be positive");
    if (scale != 1.0) b = b.scaled(scale);
    b.validate();
    return b;
}

// ---------------------------------------------------------------------------
// Formatting

inline std::string fmt(double x) {
    if (!std::isfinite(x)) return std::isnan(x) ? "nan" : (x > 0 ? "inf" : "-inf");
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

inline std::string short_fmt(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", x);
    return buf;
}

} // namespace io
} // namespace carnot
