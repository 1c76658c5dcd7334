#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace soilspec::csv {

// Splits one CSV line on commas. No quoting support: the file formats used by
// this toolkit are plain numeric tables with simple string ids.
std::vector<std::string> split_line(std::string_view line, char delim = ',');

// Reads a whole CSV file into rows of cells. Accepts LF and CRLF endings,
// skips a trailing empty line. Throws std::invalid_argument when the file
// cannot be opened.
std::vector<std::vector<std::string>> read_file(const std::string& path);

// Strict double parse of a full cell; returns false on trailing garbage,
// empty cells or non-finite values.
bool parse_double(std::string_view cell, double& out);

// Shortest representation that round-trips to the same double, so that CSV
// save/load is bit-exact.
std::string format_double(double v);

void write_file(const std::string& path,
                const std::vector<std::vector<std::string>>& rows);

}  // namespace soilspec::csv
