#pragma once

#include <istream>
#include <string>
#include <string_view>
#include <vector>

namespace batsim::csv {

/// Splits one comma-separated line; no quoting support.
std::vector<std::string> split(std::string_view line, char sep = ',');

/// Next non-empty line with any trailing '\r' removed; false at EOF.
bool read_line(std::istream& in, std::string& line);

/// Parses a whole field as a finite double; throws ParseError naming `what`.
double to_double(std::string_view field, std::string_view what);
long long to_int(std::string_view field, std::string_view what);

std::string trim(std::string_view s);

}  // namespace batsim::csv
