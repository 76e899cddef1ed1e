#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace memcap {

/// Shortest decimal text that parses back to exactly `v`.
std::string format_number(double v);

/// Quotes a field if it contains a comma, quote or newline.
std::string csv_field(std::string_view s);

void write_csv_row(std::ostream& os, const std::vector<std::string>& fields);

/// Splits one CSV line (no embedded newlines).
std::vector<std::string> split_csv_line(std::string_view line);

} // namespace memcap
