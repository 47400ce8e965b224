#pragma once

#include <charconv>
#include <cstdint>
#include <string>
#include <string_view>

#include "implink/types.hpp"

namespace implink::detail {

// Splits a record into at most max_fields+1 whitespace-separated tokens
// (space or tab; runs collapse). Returns the token count; a count larger than
// max_fields signals excess fields without materializing them all.
inline std::size_t split_fields(std::string_view line, std::string_view* out,
                                std::size_t max_fields) {
    std::size_t count = 0;
    std::size_t pos = 0;
    while (pos < line.size()) {
        while (pos < line.size() && (line[pos] == ' ' || line[pos] == '\t')) ++pos;
        if (pos >= line.size()) break;
        std::size_t start = pos;
        while (pos < line.size() && line[pos] != ' ' && line[pos] != '\t') ++pos;
        if (count < max_fields) out[count] = line.substr(start, pos - start);
        ++count;
        if (count > max_fields) break;
    }
    return count;
}

inline bool is_blank_or_comment(std::string_view line) {
    for (char c : line) {
        if (c == '#') return true;
        if (c != ' ' && c != '\t' && c != '\r') return false;
    }
    return true;
}

inline std::uint64_t parse_u64(std::string_view tok, const std::string& source,
                               std::size_t line_no) {
    std::uint64_t value = 0;
    const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
    if (ec != std::errc{} || ptr != tok.data() + tok.size()) {
        throw parse_error(source, line_no,
                          "expected unsigned integer, got '" + std::string(tok) + "'");
    }
    return value;
}

inline std::int64_t parse_i64(std::string_view tok, const std::string& source,
                              std::size_t line_no) {
    std::int64_t value = 0;
    const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
    if (ec != std::errc{} || ptr != tok.data() + tok.size()) {
        throw parse_error(source, line_no,
                          "expected integer, got '" + std::string(tok) + "'");
    }
    return value;
}

// getline that also strips a trailing '\r' (input files may be CRLF).
inline bool read_line(std::istream& in, std::string& line) {
    if (!std::getline(in, line)) return false;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return true;
}

}  // namespace implink::detail
