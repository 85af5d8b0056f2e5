#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace ocelad {

/// Shortest decimal text that round-trips to the same double.
std::string format_double(double v);
/// Fixed-point text with `digits` decimals, locale independent.
std::string format_fixed(double v, int digits);

std::vector<std::string> split_csv_line(std::string_view line);
double parse_double(std::string_view s, const std::string& where);
std::int64_t parse_int(std::string_view s, const std::string& where);

/// 64-bit FNV-1a hash, used for golden-file checks.
std::uint64_t fnv1a64(std::string_view bytes);

}  // namespace ocelad
