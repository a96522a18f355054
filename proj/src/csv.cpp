#include "ssips/csv.hpp"

#include <charconv>
#include <cmath>

#include "ssips/error.hpp"

namespace ssips {

std::string format_number(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 17);
    return {buf, res.ptr};
}

std::string format_number(std::int64_t x) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return {buf, res.ptr};
}

std::string quote_csv_field(std::string_view field) {
    if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

CsvWriter::CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header)
    : path_(path), out_(path, std::ios::binary | std::ios::trunc), columns_(header.size()) {
    if (!out_) throw IoFailure("cannot open " + path.string() + " for writing");
    write(header);
}

void CsvWriter::write(const std::vector<std::string>& fields) {
    if (fields.size() != columns_) throw InvalidArgument("CSV row width does not match the header");
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) out_ << ',';
        out_ << quote_csv_field(fields[i]);
    }
    out_ << "\r\n";
    if (!out_) throw IoFailure("write failed for " + path_.string());
}

void CsvWriter::close() {
    out_.close();
    if (out_.fail()) throw IoFailure("closing " + path_.string() + " failed");
}

}  // namespace ssips
