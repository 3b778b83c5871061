// SPDX-License-Identifier: MIT
#include "varorder/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "varorder/error.hpp"
#include "varorder/grid_function.hpp"

namespace varorder {
namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::string unquote(const std::string& s) {
    if (s.size() >= 2 && (s.front() == '"' || s.front() == '\'') && s.back() == s.front())
        return s.substr(1, s.size() - 2);
    return s;
}

}  // namespace

double parse_number(const std::string& text) {
    const std::string t = trim(unquote(trim(text)));
    const auto slash = t.find('/');
    try {
        if (slash == std::string::npos) return parse_double(t);
        const double num = parse_double(trim(t.substr(0, slash)));
        const double den = parse_double(trim(t.substr(slash + 1)));
        if (den == 0.0) throw InputError("zero denominator");
        return num / den;
    } catch (const InputError&) {
        throw InputError("not a number: '" + text + "'");
    }
}

Config Config::parse(std::istream& in, const std::string& origin) {
    Config c;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        const std::string where = origin + ":" + std::to_string(lineno);
        if (eq == std::string::npos) throw InputError(where + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty()) throw InputError(where + ": empty key or value");
        if (c.entries_.count(key)) throw InputError(where + ": duplicate key '" + key + "'");
        c.entries_[key] = value;
    }
    if (!c.has("schema")) throw InputError(origin + ": missing 'schema = 1'");
    if (c.get_int("schema", 0) != kSchema)
        throw InputError(origin + ": unsupported schema " + c.entries_.at("schema"));
    return c;
}

Config Config::parse_string(const std::string& text) {
    std::istringstream in(text);
    return parse(in);
}

Config Config::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open config '" + path + "'");
    return parse(in, path);
}

void Config::set(const std::string& key, const std::string& value) { entries_[key] = value; }

std::string Config::get_string(const std::string& key, const std::string& fallback) const {
    const auto it = entries_.find(key);
    return it == entries_.end() ? fallback : unquote(it->second);
}

double Config::get_double(const std::string& key, double fallback) const {
    const auto it = entries_.find(key);
    if (it == entries_.end()) return fallback;
    try {
        return parse_number(it->second);
    } catch (const InputError& e) {
        throw InputError("key '" + key + "': " + e.what());
    }
}

long Config::get_int(const std::string& key, long fallback) const {
    const double v = get_double(key, static_cast<double>(fallback));
    if (v != std::floor(v) || std::abs(v) > 1e15) throw InputError("key '" + key + "' must be an integer");
    return static_cast<long>(v);
}

std::vector<double> Config::get_list(const std::string& key,
                                     const std::vector<double>& fallback) const {
    const auto it = entries_.find(key);
    if (it == entries_.end()) return fallback;
    std::string body = trim(it->second);
    if (!body.empty() && body.front() == '[') {
        if (body.back() != ']') throw InputError("key '" + key + "': unterminated list");
        body = body.substr(1, body.size() - 2);
    }
    std::vector<double> out;
    std::stringstream ss(body);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (trim(item).empty()) continue;
        try {
            out.push_back(parse_number(item));
        } catch (const InputError& e) {
            throw InputError("key '" + key + "': " + e.what());
        }
    }
    return out;
}

void Config::check_keys(const std::set<std::string>& allowed) const {
    for (const auto& [k, v] : entries_)
        if (k != "schema" && !allowed.count(k)) throw InputError("unknown config key '" + k + "'");
}

}  // namespace varorder
