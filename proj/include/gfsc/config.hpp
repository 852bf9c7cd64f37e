#pragma once

#include <fstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "gfsc/data.hpp"
#include "gfsc/errors.hpp"

namespace gfsc {

// Flat key = value file, one pair per line, '#' comments, blank lines allowed.
// Keys are the CLI's long option names; a written report is itself a valid
// config, which is why result/time keys are recognized as ignorable.
struct ConfigFile {
    std::vector<std::pair<std::string, std::string>> entries; // in file order
};

// Keys a report writes that a config load must skip.
inline bool is_report_only_key(const std::string& key) {
    return key == "format" || key == "command" ||
           key.rfind("result.", 0) == 0 || key.rfind("time.", 0) == 0;
}

inline ConfigFile load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    ConfigFile config;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const std::string_view stripped = detail::trim(line);
        if (stripped.empty() || stripped.front() == '#') continue;
        const std::size_t eq = stripped.find('=');
        if (eq == std::string_view::npos)
            throw ParseError(path + ": line " + std::to_string(lineno) +
                             ": expected 'key = value'");
        const std::string key{detail::trim(stripped.substr(0, eq))};
        const std::string value{detail::trim(stripped.substr(eq + 1))};
        if (key.empty())
            throw ParseError(path + ": line " + std::to_string(lineno) + ": empty key");
        config.entries.emplace_back(key, value);
    }
    return config;
}

} // namespace gfsc
