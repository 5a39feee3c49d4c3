#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace cefr::utf8 {

// Decodes UTF-8 to code points. Invalid bytes decode as U+FFFD, one
// replacement per offending byte.
std::vector<char32_t> decode(std::string_view text);

// Encodes a single code point as UTF-8, appending to out.
void append(std::string& out, char32_t cp);

std::string encode(const std::vector<char32_t>& cps);

std::size_t count_codepoints(std::string_view text);

}  // namespace cefr::utf8
