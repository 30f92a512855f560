#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace newsclust {

// Quotes a field if it contains a comma, quote, or line break.
std::string csv_field(std::string_view field);

// Splits one CSV record, honouring double-quoted fields. A trailing '\r' is
// dropped.
std::vector<std::string> parse_csv_line(std::string_view line);

// Shortest decimal form that round-trips a double.
std::string format_double(double value);

}  // namespace newsclust
