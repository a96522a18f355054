#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

namespace ssips {

/// 17 significant digits in %g style (trailing zeros dropped); locale independent.
/// NaN and infinities print as "nan", "inf", "-inf".
std::string format_number(double x);
std::string format_number(std::int64_t x);
inline std::string format_number(int x) { return format_number(static_cast<std::int64_t>(x)); }
inline std::string format_number(std::uint64_t x) { return std::to_string(x); }

/// RFC 4180 field quoting: fields containing a comma, quote, CR or LF are
/// wrapped in quotes with embedded quotes doubled.
std::string quote_csv_field(std::string_view field);

/// Writes a header on construction and one row per call; lines end in CRLF.
class CsvWriter {
public:
    CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header);

    template <class... Cells>
    void row(const Cells&... cells) {
        std::vector<std::string> fields;
        fields.reserve(sizeof...(cells));
        (fields.push_back(to_field(cells)), ...);
        write(fields);
    }
    void write(const std::vector<std::string>& fields);
    void close();

    const std::filesystem::path& path() const noexcept { return path_; }

private:
    static std::string to_field(const std::string& s) { return s; }
    static std::string to_field(const char* s) { return s; }
    template <class T>
    static std::string to_field(const T& x) {
        return format_number(x);
    }

    std::filesystem::path path_;
    std::ofstream out_;
    std::size_t columns_;
};

}  // namespace ssips
