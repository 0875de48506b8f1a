#pragma once

#include <initializer_list>
#include <string>
#include <string_view>
#include <utility>

namespace symcode {

std::string_view trim(std::string_view s);

// Longest suffix of s that fits in max_bytes and starts on a UTF-8 code
// point boundary.
std::string_view utf8_tail(std::string_view s, std::size_t max_bytes);

// Longest prefix of s that fits in max_bytes and ends on a code point
// boundary.
std::string_view utf8_head(std::string_view s, std::size_t max_bytes);

// Replaces each {name} with its value in one left-to-right pass, so text
// substituted in is never rescanned for placeholders.
std::string substitute(std::string_view tmpl,
                       std::initializer_list<std::pair<std::string_view, std::string_view>> values);

}  // namespace symcode
