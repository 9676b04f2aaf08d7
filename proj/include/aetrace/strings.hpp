#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace aetrace {

std::string trim(std::string_view s);
std::string to_lower(std::string_view s);
std::string to_upper(std::string_view s);

// Lower-cased, whitespace-trimmed form used for all case-insensitive joins.
std::string norm_key(std::string_view s);

bool starts_with_icase(std::string_view text, std::string_view prefix);
bool equals_icase(std::string_view a, std::string_view b);

std::vector<std::string> split(std::string_view s, char delim);

// Collapses runs of whitespace to single spaces and trims the ends.
std::string collapse_ws(std::string_view s);

std::string join(const std::vector<std::string>& parts, std::string_view sep);

} // namespace aetrace
