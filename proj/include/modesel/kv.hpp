#pragma once

// Flat `key = value` text format shared by the simulation config and the
// AHP slice data file. '#' starts a comment; blank lines are ignored.

#include <charconv>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "error.hpp"

namespace modesel::kv {

using Table = std::map<std::string, std::string>;

inline std::string_view trim(std::string_view s)
{
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos)
        return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

/// Parses key=value text. Duplicate keys: the later line wins.
inline Table parse(std::string_view text, std::string_view origin = "<text>")
{
    Table out;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        auto eol = text.find('\n', pos);
        if (eol == std::string_view::npos)
            eol = text.size();
        std::string_view line = text.substr(pos, eol - pos);
        pos = eol + 1;
        ++line_no;

        if (const auto hash = line.find('#'); hash != std::string_view::npos)
            line = line.substr(0, hash);
        line = trim(line);
        if (line.empty())
            continue;

        const auto eq = line.find('=');
        if (eq == std::string_view::npos)
            throw config_error(std::string(origin) + ":" + std::to_string(line_no) +
                               ": expected 'key = value', got '" + std::string(line) + "'");
        const auto key = trim(line.substr(0, eq));
        const auto value = trim(line.substr(eq + 1));
        if (key.empty())
            throw config_error(std::string(origin) + ":" + std::to_string(line_no) + ": empty key");
        out[std::string(key)] = std::string(value);
    }
    return out;
}

inline Table parse_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw config_error("cannot open '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str(), path);
}

inline double to_double(std::string_view key, std::string_view value)
{
    double v = 0.0;
    const auto* end = value.data() + value.size();
    const auto [ptr, ec] = std::from_chars(value.data(), end, v);
    if (ec != std::errc{} || ptr != end)
        throw config_error("malformed numeric value for '" + std::string(key) + "': '" +
                           std::string(value) + "'");
    return v;
}

inline std::int64_t to_int(std::string_view key, std::string_view value)
{
    std::int64_t v = 0;
    const auto* end = value.data() + value.size();
    const auto [ptr, ec] = std::from_chars(value.data(), end, v);
    if (ec != std::errc{} || ptr != end)
        throw config_error("malformed integer value for '" + std::string(key) + "': '" +
                           std::string(value) + "'");
    return v;
}

inline bool to_bool(std::string_view key, std::string_view value)
{
    if (value == "true" || value == "1" || value == "yes" || value == "on")
        return true;
    if (value == "false" || value == "0" || value == "no" || value == "off")
        return false;
    throw config_error("malformed boolean value for '" + std::string(key) + "': '" +
                       std::string(value) + "'");
}

inline std::vector<std::string> split(std::string_view s, char sep)
{
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (pos <= s.size()) {
        auto next = s.find(sep, pos);
        if (next == std::string_view::npos)
            next = s.size();
        const auto item = trim(s.substr(pos, next - pos));
        if (!item.empty())
            out.emplace_back(item);
        pos = next + 1;
    }
    return out;
}

/// 64-bit FNV-1a; used to stamp output files with the effective config.
inline std::uint64_t fnv1a(std::string_view data)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::string serialize(const Table& table)
{
    std::string out;
    for (const auto& [k, v] : table)
        out += k + " = " + v + "\n";
    return out;
}

} // namespace modesel::kv
