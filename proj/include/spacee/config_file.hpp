#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace spacee {

struct ConfigEntry {
  std::string key;
  std::string value;
  std::size_t line = 0;
};

// Flat "key = value" text. Blank lines and lines starting with '#' are
// skipped; keys may repeat and are returned in file order.
std::vector<ConfigEntry> parse_key_values(std::string_view text);

std::string read_text_file(const std::string& path);

// Whitespace tokenizer shared by the config and spec parsers.
std::vector<std::string> split_words(std::string_view text);

}  // namespace spacee
