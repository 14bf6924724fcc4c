#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "qdprobe/errors.hpp"
#include "qdprobe/rng.hpp"

namespace qdprobe {

// Sectioned key/value text config:
//
//   # comment
//   [wafer]
//   die_count = 58
//   [wafer.disorder]
//   random_sigma_vt = 0.058
//
// Nested sections are spelled with dots. Keys are unique per section.
class Config {
public:
    using Section = std::map<std::string, std::string>;

    static Config parse(std::istream& in, const std::string& origin = "<config>") {
        Config cfg;
        std::string line;
        std::string section;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            std::string s = trim(line);
            if (s.empty() || s[0] == '#' || s[0] == ';') continue;
            if (s.front() == '[') {
                if (s.back() != ']')
                    throw validation_error(origin + ":" + std::to_string(lineno) +
                                           ": unterminated section header");
                section = trim(s.substr(1, s.size() - 2));
                if (section.empty())
                    throw validation_error(origin + ":" + std::to_string(lineno) +
                                           ": empty section name");
                cfg.sections_[section];  // allow empty sections
                continue;
            }
            auto eq = s.find('=');
            if (eq == std::string::npos)
                throw validation_error(origin + ":" + std::to_string(lineno) +
                                       ": expected 'key = value'");
            std::string key = trim(s.substr(0, eq));
            std::string value = trim(s.substr(eq + 1));
            if (key.empty())
                throw validation_error(origin + ":" + std::to_string(lineno) + ": empty key");
            cfg.sections_[section][key] = value;
        }
        return cfg;
    }

    static Config parse_string(const std::string& text, const std::string& origin = "<string>") {
        std::istringstream in(text);
        return parse(in, origin);
    }

    static Config load(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw validation_error("cannot open config file: " + path);
        return parse(in, path);
    }

    bool has(const std::string& section, const std::string& key) const {
        auto it = sections_.find(section);
        return it != sections_.end() && it->second.count(key) > 0;
    }

    bool has_section(const std::string& section) const { return sections_.count(section) > 0; }

    std::string get_string(const std::string& section, const std::string& key) const {
        auto it = sections_.find(section);
        if (it == sections_.end() || !it->second.count(key))
            throw validation_error("missing config key [" + section + "] " + key);
        return it->second.at(key);
    }

    std::string get_string(const std::string& section, const std::string& key,
                           const std::string& dflt) const {
        return has(section, key) ? get_string(section, key) : dflt;
    }

    double get_double(const std::string& section, const std::string& key) const {
        return to_double(get_string(section, key), section, key);
    }
    double get_double(const std::string& section, const std::string& key, double dflt) const {
        return has(section, key) ? get_double(section, key) : dflt;
    }

    long long get_int(const std::string& section, const std::string& key) const {
        return to_int(get_string(section, key), section, key);
    }
    long long get_int(const std::string& section, const std::string& key, long long dflt) const {
        return has(section, key) ? get_int(section, key) : dflt;
    }

    std::uint64_t get_u64(const std::string& section, const std::string& key,
                          std::uint64_t dflt) const {
        if (!has(section, key)) return dflt;
        const std::string v = get_string(section, key);
        try {
            size_t pos = 0;
            std::uint64_t r = std::stoull(v, &pos);
            if (pos != v.size()) throw std::invalid_argument(v);
            return r;
        } catch (const std::exception&) {
            throw validation_error("config key [" + section + "] " + key +
                                   ": not an unsigned integer: '" + v + "'");
        }
    }

    bool get_bool(const std::string& section, const std::string& key, bool dflt) const {
        if (!has(section, key)) return dflt;
        std::string v = get_string(section, key);
        if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
        if (v == "false" || v == "0" || v == "no" || v == "off") return false;
        throw validation_error("config key [" + section + "] " + key +
                               ": not a boolean: '" + v + "'");
    }

    void set(const std::string& section, const std::string& key, const std::string& value) {
        sections_[section][key] = value;
    }
    void set_double(const std::string& section, const std::string& key, double v) {
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.17g", v);
        set(section, key, buf);
    }
    void set_int(const std::string& section, const std::string& key, long long v) {
        set(section, key, std::to_string(v));
    }

    const std::map<std::string, Section>& sections() const { return sections_; }

    // Canonical text form (sections and keys sorted). Used for persistence
    // and for the provenance hash.
    std::string to_string() const {
        std::ostringstream out;
        for (const auto& [name, sec] : sections_) {
            out << '[' << name << "]\n";
            for (const auto& [k, v] : sec) out << k << " = " << v << '\n';
            out << '\n';
        }
        return out.str();
    }

    std::uint64_t hash() const {
        const std::string s = to_string();
        return fnv1a64(s.data(), s.size());
    }

    static std::string trim(const std::string& s) {
        size_t a = s.find_first_not_of(" \t\r\n");
        if (a == std::string::npos) return "";
        size_t b = s.find_last_not_of(" \t\r\n");
        return s.substr(a, b - a + 1);
    }

    // "a ; b ; c" -> {"a","b","c"}, empty items dropped
    static std::vector<std::string> split_list(const std::string& s, char sep = ';') {
        std::vector<std::string> out;
        std::string cur;
        std::istringstream in(s);
        while (std::getline(in, cur, sep)) {
            std::string t = trim(cur);
            if (!t.empty()) out.push_back(t);
        }
        return out;
    }

private:
    static double to_double(const std::string& v, const std::string& sec, const std::string& key) {
        try {
            size_t pos = 0;
            double r = std::stod(v, &pos);
            if (pos != v.size()) throw std::invalid_argument(v);
            return r;
        } catch (const std::exception&) {
            throw validation_error("config key [" + sec + "] " + key + ": not a number: '" + v +
                                   "'");
        }
    }
    static long long to_int(const std::string& v, const std::string& sec, const std::string& key) {
        try {
            size_t pos = 0;
            long long r = std::stoll(v, &pos);
            if (pos != v.size()) throw std::invalid_argument(v);
            return r;
        } catch (const std::exception&) {
            throw validation_error("config key [" + sec + "] " + key + ": not an integer: '" + v +
                                   "'");
        }
    }

    std::map<std::string, Section> sections_;
};

}  // namespace qdprobe
