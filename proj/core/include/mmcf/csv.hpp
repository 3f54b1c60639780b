#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace mmcf {

/// Shortest decimal text that parses back to exactly the same value.
std::string format_number(double v);
std::string format_number(float v);

double parse_double(std::string_view text);
float parse_float(std::string_view text);
long long parse_int(std::string_view text);

/// Splits one CSV line on commas. Fields never contain commas or quotes in
/// any file this project writes.
std::vector<std::string_view> split_csv(std::string_view line);

}  // namespace mmcf
