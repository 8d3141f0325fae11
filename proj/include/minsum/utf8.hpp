#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace minsum {

// Decodes UTF-8 into code points. Throws DataError on malformed input.
std::vector<char32_t> utf8_decode(std::string_view s);

std::string utf8_encode(std::span<const char32_t> cps);

std::size_t codepoint_count(std::string_view s);

// First n code points of s (whole string if shorter).
std::string truncate_codepoints(std::string_view s, std::size_t n);

// Whitespace: ASCII space/tab/newline family, NBSP (U+00A0), and the
// ideographic space (U+3000).
bool is_space_cp(char32_t c);

// Punctuation: ASCII punctuation plus the general-punctuation, CJK
// symbol/punctuation, and fullwidth/halfwidth punctuation ranges.
bool is_punct_cp(char32_t c);

// Trims leading/trailing whitespace and collapses internal whitespace runs
// to a single ASCII space.
std::string normalize_whitespace(std::string_view s);

}  // namespace minsum
