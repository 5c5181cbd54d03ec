#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace hpcpred::csv {

/// Shortest text that parses back to exactly the same double.
std::string num(double v);

/// Rows of comma-separated fields. No quoting: none of the files this
/// library writes contain commas inside a field.
struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    /// Column index by name; throws InvalidArgument when absent.
    [[nodiscard]] std::size_t column(std::string_view name) const;
    [[nodiscard]] double number(std::size_t row, std::string_view name) const;
};

Table read(std::istream& in);
Table read_file(const std::string& path);

std::vector<std::string> split(std::string_view line, char sep = ',');

} // namespace hpcpred::csv
