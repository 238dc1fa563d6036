#pragma once

#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "hypfpp/environment.hpp"
#include "hypfpp/errors.hpp"
#include "hypfpp/group.hpp"

namespace hypfpp {

// ---------------------------------------------------------------------------
// INI-style configuration: [section] headers, key = value lines, # or ;
// comments. Strict by construction: duplicate keys and keys outside any
// section are rejected at parse time, missing or malformed values at access
// time, always with the origin in the message.
// ---------------------------------------------------------------------------

class IniFile {
public:
    static IniFile parse(std::istream& in, const std::string& origin) {
        IniFile ini;
        ini.origin_ = origin;
        std::string line, section;
        int lineno = 0;
        auto fail = [&](const std::string& msg) {
            throw ConfigError(origin + ":" + std::to_string(lineno) + ": " + msg);
        };
        while (std::getline(in, line)) {
            ++lineno;
            std::string s = trim(line);
            if (s.empty() || s[0] == '#' || s[0] == ';') continue;
            if (s.front() == '[') {
                if (s.back() != ']') fail("unterminated section header");
                section = trim(s.substr(1, s.size() - 2));
                if (section.empty()) fail("empty section name");
                ini.sections_[section]; // materialize even if empty
                continue;
            }
            size_t eq = s.find('=');
            if (eq == std::string::npos) fail("expected 'key = value'");
            if (section.empty()) fail("key outside any section");
            std::string key = trim(s.substr(0, eq));
            std::string value = trim(s.substr(eq + 1));
            if (key.empty()) fail("empty key");
            auto& sec = ini.sections_[section];
            if (sec.count(key)) fail("duplicate key '" + key + "'");
            sec[key] = value;
        }
        return ini;
    }

    static IniFile load(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw ConfigError("cannot open config file '" + path + "'");
        return parse(in, path);
    }

    bool has(const std::string& section) const { return sections_.count(section) > 0; }

    bool has(const std::string& section, const std::string& key) const {
        auto it = sections_.find(section);
        return it != sections_.end() && it->second.count(key) > 0;
    }

    const std::string& get(const std::string& section, const std::string& key) const {
        auto it = sections_.find(section);
        if (it == sections_.end())
            throw ConfigError(origin_ + ": missing section [" + section + "]");
        auto kt = it->second.find(key);
        if (kt == it->second.end())
            throw ConfigError(origin_ + ": missing key '" + key + "' in [" + section + "]");
        return kt->second;
    }

    std::string get_or(const std::string& section, const std::string& key,
                       const std::string& fallback) const {
        return has(section, key) ? get(section, key) : fallback;
    }

    int64_t get_int(const std::string& section, const std::string& key) const {
        return parse_int(get(section, key), section, key);
    }

    int64_t get_int_or(const std::string& section, const std::string& key, int64_t fallback) const {
        return has(section, key) ? get_int(section, key) : fallback;
    }

    uint64_t get_u64(const std::string& section, const std::string& key) const {
        const std::string& v = get(section, key);
        try {
            // stoull wraps negative input around instead of failing.
            if (!v.empty() && v[0] == '-') throw std::invalid_argument("");
            size_t pos = 0;
            uint64_t r = std::stoull(v, &pos);
            if (pos != v.size()) throw std::invalid_argument("");
            return r;
        } catch (const std::exception&) {
            throw ConfigError(origin_ + ": [" + section + "] " + key + " = '" + v +
                              "' is not an unsigned integer");
        }
    }

    uint64_t get_u64_or(const std::string& section, const std::string& key,
                        uint64_t fallback) const {
        return has(section, key) ? get_u64(section, key) : fallback;
    }

    double get_double(const std::string& section, const std::string& key) const {
        return parse_double(get(section, key), section, key);
    }

    double get_double_or(const std::string& section, const std::string& key,
                         double fallback) const {
        return has(section, key) ? get_double(section, key) : fallback;
    }

    bool get_bool_or(const std::string& section, const std::string& key, bool fallback) const {
        if (!has(section, key)) return fallback;
        const std::string& v = get(section, key);
        if (v == "true" || v == "yes" || v == "1") return true;
        if (v == "false" || v == "no" || v == "0") return false;
        throw ConfigError(origin_ + ": [" + section + "] " + key + " = '" + v +
                          "' is not a boolean");
    }

    std::vector<int64_t> get_int_list(const std::string& section, const std::string& key) const {
        std::vector<int64_t> out;
        for (const std::string& tok : split_list(get(section, key)))
            out.push_back(parse_int(tok, section, key));
        if (out.empty())
            throw ConfigError(origin_ + ": [" + section + "] " + key + " is an empty list");
        return out;
    }

    std::vector<double> get_double_list(const std::string& section, const std::string& key) const {
        std::vector<double> out;
        for (const std::string& tok : split_list(get(section, key)))
            out.push_back(parse_double(tok, section, key));
        if (out.empty())
            throw ConfigError(origin_ + ": [" + section + "] " + key + " is an empty list");
        return out;
    }

    const std::map<std::string, std::string>& section(const std::string& name) const {
        auto it = sections_.find(name);
        if (it == sections_.end())
            throw ConfigError(origin_ + ": missing section [" + name + "]");
        return it->second;
    }

    const std::string& origin() const { return origin_; }

    // Deterministic digest of the parsed content, recorded in run manifests.
    uint64_t digest() const {
        std::string flat;
        for (const auto& [sec, kv] : sections_) {
            flat += "[" + sec + "]\n";
            for (const auto& [k, v] : kv) flat += k + "=" + v + "\n";
        }
        return fnv1a64(flat);
    }

private:
    static std::string trim(const std::string& s) {
        size_t b = s.find_first_not_of(" \t\r");
        if (b == std::string::npos) return "";
        size_t e = s.find_last_not_of(" \t\r");
        return s.substr(b, e - b + 1);
    }

    static std::vector<std::string> split_list(const std::string& s) {
        std::vector<std::string> out;
        std::string cur;
        std::istringstream is(s);
        while (std::getline(is, cur, ',')) {
            cur = trim(cur);
            if (!cur.empty()) out.push_back(cur);
        }
        return out;
    }

    int64_t parse_int(const std::string& v, const std::string& section,
                      const std::string& key) const {
        try {
            size_t pos = 0;
            int64_t r = std::stoll(v, &pos);
            if (pos != v.size()) throw std::invalid_argument("");
            return r;
        } catch (const std::exception&) {
            throw ConfigError(origin_ + ": [" + section + "] " + key + " = '" + v +
                              "' is not an integer");
        }
    }

    double parse_double(const std::string& v, const std::string& section,
                        const std::string& key) const {
        try {
            size_t pos = 0;
            double r = std::stod(v, &pos);
            if (pos != v.size()) throw std::invalid_argument("");
            return r;
        } catch (const std::exception&) {
            throw ConfigError(origin_ + ": [" + section + "] " + key + " = '" + v +
                              "' is not a number");
        }
    }

    std::map<std::string, std::map<std::string, std::string>> sections_;
    std::string origin_ = "<memory>";
};

// ---------------------------------------------------------------------------
// Section interpreters for the pieces every tool needs.
// ---------------------------------------------------------------------------

inline GroupModel model_from_config(const IniFile& ini) {
    const std::string kind = ini.get("model", "kind");
    if (kind == "free") {
        int64_t rank = ini.get_int_or("model", "rank", 2);
        if (rank < 1) throw ConfigError("free model needs rank >= 1");
        return make_free(uint32_t(rank));
    }
    if (kind == "cyclic-multi") return make_cyclic_multi(ini.get_int("model", "m"));
    if (kind == "free-mixed") return make_free_mixed(ini.get_int_list("model", "powers"));
    if (kind == "automatic") {
        int64_t rank = ini.get_int("model", "rank");
        if (rank < 1) throw ConfigError("automatic model needs rank >= 1");
        std::vector<int64_t> powers(size_t(rank), 1);
        if (ini.has("model", "powers")) {
            powers = ini.get_int_list("model", "powers");
            if (int64_t(powers.size()) != rank)
                throw ConfigError("automatic model: powers list must have one entry per letter");
        }
        return make_automatic(uint32_t(rank), power_generators(uint32_t(rank), powers),
                              ini.get("model", "automaton"));
    }
    throw ConfigError("unknown model kind '" + kind + "'");
}

inline WeightDistribution distribution_from_config(const IniFile& ini) {
    const std::string kind = ini.get("distribution", "kind");
    std::map<std::string, double> params;
    for (const auto& [k, v] : ini.section("distribution")) {
        if (k == "kind") continue;
        params[k] = ini.get_double("distribution", k);
    }
    return make_distribution(kind, params);
}

} // namespace hypfpp
