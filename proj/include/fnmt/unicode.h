#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace fnmt::unicode {

// Decodes UTF-8 into code points; throws InvalidInput on malformed input.
std::u32string decode(std::string_view utf8);
std::string encode(std::u32string_view text);

// Number of Unicode scalar values in a UTF-8 string.
std::size_t length(std::string_view utf8);

// Letter = general category L*.
bool is_letter(char32_t c);
bool is_upper(char32_t c);
bool is_lower(char32_t c);

// Simple (one-to-one) case mappings.
char32_t to_lower(char32_t c);
char32_t to_upper(char32_t c);

std::string to_lower(std::string_view utf8);
std::string to_upper(std::string_view utf8);

}  // namespace fnmt::unicode
