#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace naa::text {

// Shortest-roundtrip is not used on purpose: every persisted real is written
// with 17 significant digits so files are stable across library versions.
std::string format_real(double value);

std::optional<double> parse_real(std::string_view field);
std::optional<long long> parse_integer(std::string_view field);

/// Splits on runs of spaces/tabs; a trailing '\r' (CRLF files) is dropped.
std::vector<std::string_view> split_whitespace(std::string_view line);

std::string_view strip_cr(std::string_view line);
std::string_view trim(std::string_view s);

}  // namespace naa::text
