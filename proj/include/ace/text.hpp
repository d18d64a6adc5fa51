#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace ace::text {

std::string to_lower(std::string_view s);
std::string trim(std::string_view s);

/// True when `phrase` occurs in `haystack` bounded by non-alphanumerics.
/// Both arguments are expected lowercase.
bool contains_phrase(std::string_view haystack, std::string_view phrase);

/// Splits on ASCII whitespace.
std::vector<std::string> split_ws(std::string_view s);

/// Lowercases and strips leading/trailing punctuation; empty result for
/// punctuation-only tokens.
std::string normalize_token(std::string_view token);

/// Replaces every "{name}" placeholder.
std::string replace_all(std::string s, std::string_view from, std::string_view to);

} // namespace ace::text
