#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace ergkit::utf8 {

/// Decodes UTF-8; every malformed byte becomes U+FFFD so decoding is total.
std::u32string decode(std::string_view text);

std::string encode(char32_t cp);
std::string encode(std::u32string_view cps);

/// Number of code points (malformed bytes count one each).
std::size_t length(std::string_view text);

/// First / last `count` code points of `text`.
std::string prefix(std::string_view text, std::size_t count);
std::string suffix(std::string_view text, std::size_t count);

bool is_space(char32_t cp);

}  // namespace ergkit::utf8
