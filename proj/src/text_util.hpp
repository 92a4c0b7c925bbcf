#pragma once

#include <charconv>
#include <cmath>
#include <string>
#include <string_view>
#include <vector>

#include <fmt/format.h>

#include "mep/error.hpp"

namespace mep::detail {

inline std::string_view trim(std::string_view s)
{
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos)
        return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

inline std::vector<std::string_view> split_whitespace(std::string_view s)
{
    std::vector<std::string_view> out;
    std::size_t pos = 0;
    while (pos < s.size()) {
        const auto start = s.find_first_not_of(" \t\r\n", pos);
        if (start == std::string_view::npos)
            break;
        auto end = s.find_first_of(" \t\r\n", start);
        if (end == std::string_view::npos)
            end = s.size();
        out.push_back(s.substr(start, end - start));
        pos = end;
    }
    return out;
}

inline std::vector<std::string_view> split_on(std::string_view s, char delimiter)
{
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto end = s.find(delimiter, start);
        if (end == std::string_view::npos) {
            out.push_back(s.substr(start));
            return out;
        }
        out.push_back(s.substr(start, end - start));
        start = end + 1;
    }
}

inline bool try_parse_real(std::string_view token, double& value)
{
    if (!token.empty() && token.front() == '+')
        token.remove_prefix(1);
    auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    return ec == std::errc{} && ptr == token.data() + token.size() && !token.empty();
}

inline double parse_real(std::string_view token, std::size_t line)
{
    double value = 0.0;
    if (!try_parse_real(token, value))
        throw InputError(fmt::format("line {}: '{}' is not a number", line, token));
    return value;
}

/// 17 significant digits: enough to restore any double exactly.
inline std::string format_real(double v) { return fmt::format("{:.17g}", v); }

} // namespace mep::detail
