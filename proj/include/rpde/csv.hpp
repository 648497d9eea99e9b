#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace rpde::csv {

/// Shortest-round-trip-safe decimal form (%.17g); "nan"/"inf" for non-finite values.
std::string num(double v);

std::vector<std::string> split(std::string_view line, char sep = ',');

double parse_double(std::string_view field);

}  // namespace rpde::csv
