#include "morphiris/csv.hpp"

#include <charconv>
#include <cmath>

#include "morphiris/errors.hpp"

namespace morphiris::csv {

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

double parse_double(std::string_view field, std::string_view what) {
    double v = 0.0;
    const auto res = std::from_chars(field.data(), field.data() + field.size(), v);
    if (res.ec != std::errc{} || res.ptr != field.data() + field.size() || !std::isfinite(v))
        throw FormatError("cannot parse " + std::string(what) + " from '" + std::string(field) + "'");
    return v;
}

long long parse_int(std::string_view field, std::string_view what) {
    long long v = 0;
    const auto res = std::from_chars(field.data(), field.data() + field.size(), v);
    if (res.ec != std::errc{} || res.ptr != field.data() + field.size())
        throw FormatError("cannot parse " + std::string(what) + " from '" + std::string(field) + "'");
    return v;
}

std::vector<std::string> split_line(std::string_view line) {
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    std::vector<std::string> out;
    std::size_t start = 0;
    for (;;) {
        const auto comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            out.emplace_back(line.substr(start));
            return out;
        }
        out.emplace_back(line.substr(start, comma - start));
        start = comma + 1;
    }
}

Table parse(std::string_view text, const std::vector<std::string>& expected_header) {
    Table table;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
        auto nl = text.find('\n', pos);
        if (nl == std::string_view::npos) nl = text.size();
        const auto line = text.substr(pos, nl - pos);
        pos = nl + 1;
        ++line_no;
        if (line.empty() || line == "\r") continue;
        auto fields = split_line(line);
        if (table.header.empty()) {
            if (fields != expected_header) {
                std::string want;
                for (const auto& h : expected_header) want += (want.empty() ? "" : ",") + h;
                throw FormatError("CSV header mismatch at line " + std::to_string(line_no) + ": expected '" + want + "'");
            }
            table.header = std::move(fields);
            continue;
        }
        if (fields.size() != table.header.size())
            throw FormatError("CSV line " + std::to_string(line_no) + " has " + std::to_string(fields.size()) +
                              " fields, expected " + std::to_string(table.header.size()));
        table.rows.push_back(std::move(fields));
    }
    if (table.header.empty()) throw FormatError("CSV is empty (missing header)");
    return table;
}

}  // namespace morphiris::csv
