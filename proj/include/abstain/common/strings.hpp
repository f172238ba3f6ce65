#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace abstain {

// Shortest decimal form that parses back to the identical double.
std::string fmt_double(double value);

std::string trim(std::string_view s);
std::string to_lower(std::string_view s);

std::vector<std::string> split_csv_line(const std::string& line);

}  // namespace abstain
