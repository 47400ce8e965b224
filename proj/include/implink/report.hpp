#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <string_view>

#include "implink/types.hpp"

namespace implink {

inline std::uint64_t fnv1a64(std::string_view data) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

// Deterministic float formatting for report files ("%.12g"); NaN prints empty.
inline std::string format_double(double v) {
    if (std::isnan(v)) return "";
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

inline std::string format_optional(const std::optional<double>& v) {
    return v ? format_double(*v) : std::string{};
}

// CSV with a one-line JSON provenance comment, then header, then rows.
class CsvWriter {
public:
    CsvWriter(const std::filesystem::path& path, const std::string& provenance_json) {
        out_.open(path);
        if (!out_) {
            throw config_error("cannot open output file " + path.string());
        }
        out_ << "# " << provenance_json << '\n';
    }

    void header(std::string_view line) { out_ << line << '\n'; }

    template <class... Fields>
    void row(const Fields&... fields) {
        bool first = true;
        ((out_ << (first ? "" : ","), first = false, write_field(fields)), ...);
        out_ << '\n';
    }

private:
    void write_field(const std::string& s) { out_ << s; }
    void write_field(const char* s) { out_ << s; }
    void write_field(double v) { out_ << format_double(v); }
    template <class T>
    void write_field(const T& v) { out_ << v; }

    std::ofstream out_;
};

}  // namespace implink
