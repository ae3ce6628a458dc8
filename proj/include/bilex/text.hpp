#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace bilex {

/// Fields separated by runs of spaces/tabs; views into `line`.
std::vector<std::string_view> split_whitespace(std::string_view line);

/// Fields separated by single `sep` characters (empty fields preserved).
std::vector<std::string_view> split_on(std::string_view line, char sep);

std::string_view trim(std::string_view s);

bool parse_size(std::string_view s, std::size_t& out);
bool parse_int(std::string_view s, long long& out);
bool parse_double(std::string_view s, double& out);

/// Decimal with 9 significant digits ("%.9g").
std::string format_g9(double v);
/// Shortest decimal that round-trips to the same double.
std::string format_exact(double v);

}  // namespace bilex
