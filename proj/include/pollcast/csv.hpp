#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace pollcast::csv {

// Splits one CSV record. Handles double-quoted fields with "" escapes; does
// not handle embedded newlines.
std::vector<std::string> split(std::string_view line);

std::string_view trim(std::string_view s);

// Shortest decimal representation that round-trips to the same double.
std::string format_double(double v);

std::string quote_if_needed(std::string_view field);

}  // namespace pollcast::csv
