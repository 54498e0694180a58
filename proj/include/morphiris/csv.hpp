#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace morphiris::csv {

/// Shortest decimal text that round-trips to the same double.
std::string format_double(double v);
/// Strict parse of the whole field; throws FormatError naming `what`.
double parse_double(std::string_view field, std::string_view what);
long long parse_int(std::string_view field, std::string_view what);

/// Splits one line on commas. Fields are plain (no quoting); a trailing
/// carriage return is dropped.
std::vector<std::string> split_line(std::string_view line);

/// A parsed table: header plus rows, each row checked against the header
/// width. Blank lines are skipped.
struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

Table parse(std::string_view text, const std::vector<std::string>& expected_header);

}  // namespace morphiris::csv
