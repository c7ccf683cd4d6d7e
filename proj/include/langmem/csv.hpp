#pragma once

#include <istream>
#include <string>
#include <string_view>
#include <vector>

// Minimal CSV plumbing shared by the module readers and the report writers.
namespace langmem::csv {

using Row = std::vector<std::string>;

/// Splits one line; double-quoted fields may contain commas and "" escapes.
Row split_line(std::string_view line);

/// Reads every non-blank line. Trailing '\r' is stripped.
std::vector<Row> read_all(std::istream& in);

/// Quotes a field only when it contains a comma, quote or newline.
std::string escape(std::string_view field);

std::string join(const Row& row);

/// Strict number parse: the whole (trimmed) field must be consumed.
double parse_double(std::string_view field, std::string_view context);

/// Fixed-point rendering used by every emitted table.
std::string format_number(double value, int precision = 6);

/// Literal rendered for correlation cells that could not be computed.
inline constexpr std::string_view kUndefined = "undefined";

}  // namespace langmem::csv
