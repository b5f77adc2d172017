#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace vihsd::unicode {

/// Lenient UTF-8 decode: each invalid or truncated sequence becomes U+FFFD.
std::u32string decode_utf8(std::string_view bytes);
std::string encode_utf8(std::u32string_view cps);
void append_utf8(std::string& out, char32_t cp);

bool is_punctuation(char32_t cp);    // general category P*
bool is_decimal_digit(char32_t cp);  // general category Nd
bool is_whitespace(char32_t cp);     // White_Space property
char32_t to_lower(char32_t cp);      // simple lowercase mapping

}  // namespace vihsd::unicode
