#pragma once

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace swamp {

/// Flat key = value configuration.
///
/// File syntax: one `key = value` per line, `#` starts a comment, blank lines
/// are ignored. Keys may contain dots (`solver.t_max`). Later assignments
/// (including command-line overrides) replace earlier ones.
class KeyValueConfig {
public:
    static KeyValueConfig parse(std::string_view text, std::string_view origin = "<string>")
    {
        KeyValueConfig cfg;
        std::istringstream in{std::string(text)};
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (auto hash = line.find('#'); hash != std::string::npos)
                line.erase(hash);
            if (trim(line).empty())
                continue;
            try {
                cfg.set_assignment(line);
            } catch (const std::invalid_argument& e) {
                throw std::invalid_argument(std::string(origin) + ":" + std::to_string(lineno) + ": " + e.what());
            }
        }
        return cfg;
    }

    static KeyValueConfig load(const std::string& path)
    {
        std::ifstream in(path);
        if (!in)
            throw std::runtime_error("cannot open config file '" + path + "'");
        std::stringstream buf;
        buf << in.rdbuf();
        return parse(buf.str(), path);
    }

    /// Applies a `key=value` override.
    void set_assignment(std::string_view assignment)
    {
        const auto eq = assignment.find('=');
        if (eq == std::string_view::npos)
            throw std::invalid_argument("expected key=value, got '" + std::string(assignment) + "'");
        const std::string key = trim(assignment.substr(0, eq));
        if (key.empty())
            throw std::invalid_argument("empty key in '" + std::string(assignment) + "'");
        values_[key] = trim(assignment.substr(eq + 1));
    }

    void set(const std::string& key, const std::string& value) { values_[key] = value; }

    bool has(const std::string& key) const { return values_.count(key) != 0; }

    const std::map<std::string, std::string>& entries() const { return values_; }

    /// Throws on any key outside `allowed`.
    void require_known(const std::set<std::string>& allowed) const
    {
        for (const auto& [k, v] : values_)
            if (!allowed.count(k))
                throw std::invalid_argument("unknown config key '" + k + "'");
    }

    std::string get_string(const std::string& key, const std::string& fallback) const
    {
        auto it = values_.find(key);
        return it == values_.end() ? fallback : it->second;
    }

    double get_double(const std::string& key, double fallback) const
    {
        auto it = values_.find(key);
        return it == values_.end() ? fallback : to_double(key, it->second);
    }

    std::size_t get_size(const std::string& key, std::size_t fallback) const
    {
        auto it = values_.find(key);
        return it == values_.end() ? fallback : static_cast<std::size_t>(to_uint(key, it->second));
    }

    std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const
    {
        auto it = values_.find(key);
        return it == values_.end() ? fallback : to_uint(key, it->second);
    }

    bool get_bool(const std::string& key, bool fallback) const
    {
        auto it = values_.find(key);
        if (it == values_.end())
            return fallback;
        const auto& v = it->second;
        if (v == "true" || v == "1" || v == "yes")
            return true;
        if (v == "false" || v == "0" || v == "no")
            return false;
        throw std::invalid_argument("config key '" + key + "': expected a boolean, got '" + v + "'");
    }

    /// Comma-separated list of numbers.
    std::vector<double> get_doubles(const std::string& key, std::vector<double> fallback) const
    {
        auto it = values_.find(key);
        if (it == values_.end())
            return fallback;
        std::vector<double> out;
        for (const auto& item : split(it->second))
            out.push_back(to_double(key, item));
        return out;
    }

    std::vector<std::size_t> get_sizes(const std::string& key, std::vector<std::size_t> fallback) const
    {
        auto it = values_.find(key);
        if (it == values_.end())
            return fallback;
        std::vector<std::size_t> out;
        for (const auto& item : split(it->second))
            out.push_back(static_cast<std::size_t>(to_uint(key, item)));
        return out;
    }

    std::vector<std::string> get_strings(const std::string& key, std::vector<std::string> fallback) const
    {
        auto it = values_.find(key);
        return it == values_.end() ? fallback : split(it->second);
    }

    static std::vector<std::string> split(std::string_view s)
    {
        std::vector<std::string> out;
        std::size_t start = 0;
        while (start <= s.size()) {
            const auto comma = s.find(',', start);
            const auto piece = trim(s.substr(start, comma == std::string_view::npos ? s.size() - start : comma - start));
            if (!piece.empty())
                out.push_back(piece);
            if (comma == std::string_view::npos)
                break;
            start = comma + 1;
        }
        return out;
    }

private:
    static std::string trim(std::string_view s)
    {
        const auto first = s.find_first_not_of(" \t\r\n");
        if (first == std::string_view::npos)
            return {};
        const auto last = s.find_last_not_of(" \t\r\n");
        return std::string(s.substr(first, last - first + 1));
    }

    static double to_double(const std::string& key, const std::string& v)
    {
        try {
            std::size_t used = 0;
            const double d = std::stod(v, &used);
            if (used == v.size())
                return d;
        } catch (const std::exception&) {
        }
        throw std::invalid_argument("config key '" + key + "': expected a number, got '" + v + "'");
    }

    static std::uint64_t to_uint(const std::string& key, const std::string& v)
    {
        std::uint64_t out = 0;
        const auto* end = v.data() + v.size();
        const auto res = std::from_chars(v.data(), end, out);
        if (res.ec != std::errc{} || res.ptr != end)
            throw std::invalid_argument("config key '" + key + "': expected a non-negative integer, got '" + v + "'");
        return out;
    }

    std::map<std::string, std::string> values_;
};

} // namespace swamp
