#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace bass::text {

// UTF-8 decoding; malformed bytes decode to U+FFFD.
std::u32string decode_utf8(std::string_view s);
std::string encode_utf8(std::u32string_view s);

bool is_alpha(char32_t c);
bool is_upper(char32_t c);
char32_t to_lower(char32_t c);

// Unicode-aware lowercase of a UTF-8 string.
std::string lowercase(std::string_view s);

std::string trim(std::string_view s);
std::vector<std::string> split_whitespace(std::string_view s);
std::string join(const std::vector<std::string>& parts, std::string_view sep);

// Single-pass {{NAME}} substitution. Values are inserted verbatim and never
// rescanned, so slot values containing braces are safe. Unknown slots are an
// error.
std::string render_template(std::string_view tmpl, const std::map<std::string, std::string>& slots);

}  // namespace bass::text
