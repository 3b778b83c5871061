// SPDX-License-Identifier: MIT
#pragma once

#include <istream>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace varorder {

/// Flat `key = value` configuration with dotted keys. `#` starts a comment,
/// values are numbers (fractions such as 1/256 allowed), bare or quoted
/// strings, or bracketed lists of numbers. A `schema = 1` line is required.
class Config {
public:
    static constexpr int kSchema = 1;

    static Config parse(std::istream& in, const std::string& origin = "<config>");
    static Config parse_string(const std::string& text);
    static Config from_file(const std::string& path);

    void set(const std::string& key, const std::string& value);
    bool has(const std::string& key) const { return entries_.count(key) != 0; }

    std::string get_string(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key, double fallback) const;
    long get_int(const std::string& key, long fallback) const;
    std::vector<double> get_list(const std::string& key, const std::vector<double>& fallback) const;

    /// Throws InputError naming the first key outside `allowed`.
    void check_keys(const std::set<std::string>& allowed) const;

    const std::map<std::string, std::string>& entries() const { return entries_; }

private:
    std::map<std::string, std::string> entries_;
};

/// Number with an optional `a/b` fraction form.
double parse_number(const std::string& text);

}  // namespace varorder
