#pragma once

#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "ppcon/errors.hpp"

namespace ppcon {

inline std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

inline std::vector<int> parse_int_list(const std::string& text) {
    std::vector<int> out;
    std::string item;
    std::istringstream in(text);
    while (std::getline(in, item, ',')) {
        item = trim(item);
        if (item.empty()) throw ParseError("empty entry in integer list '" + text + "'");
        std::size_t used = 0;
        int value = 0;
        try {
            value = std::stoi(item, &used);
        } catch (const std::exception&) {
            throw ParseError("bad integer '" + item + "'");
        }
        if (used != item.size()) throw ParseError("bad integer '" + item + "'");
        out.push_back(value);
    }
    if (out.empty()) throw ParseError("empty integer list");
    return out;
}

// Run settings read from a flat `key = value` file. Every field is
// optional; the CLI fills in defaults.
struct FileConfig {
    std::optional<double> alpha;
    std::optional<double> epsilon;
    std::optional<long> round_cap;
    std::optional<std::uint64_t> seed;
    std::optional<int> kappa;
    std::optional<std::vector<int>> default_key; // set when given explicitly
    bool keydist_auto = false;                   // default_key = auto
    std::optional<std::vector<int>> security_degrees;
};

inline FileConfig parse_config(const std::string& text) {
    FileConfig cfg;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ParseError("config line " + std::to_string(line_no) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty())
            throw ParseError("config line " + std::to_string(line_no) + ": expected key = value");
        try {
            if (key == "alpha") cfg.alpha = std::stod(value);
            else if (key == "epsilon") cfg.epsilon = std::stod(value);
            else if (key == "round_cap") cfg.round_cap = std::stol(value);
            else if (key == "seed") cfg.seed = std::stoull(value);
            else if (key == "kappa") cfg.kappa = std::stoi(value);
            else if (key == "default_key") {
                if (value == "auto") cfg.keydist_auto = true;
                else cfg.default_key = parse_int_list(value);
            } else if (key == "security_degrees") cfg.security_degrees = parse_int_list(value);
            else throw ConfigError("unknown config key '" + key + "'");
        } catch (const Error&) {
            throw;
        } catch (const std::exception&) {
            throw ParseError("config line " + std::to_string(line_no) + ": bad value for '" +
                             key + "'");
        }
    }
    return cfg;
}

} // namespace ppcon
