#pragma once

// UTF-8 helpers. Every offset in this project counts Unicode scalar values
// (code points), never bytes.

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace biorefine::text {

class Utf8Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Throws Utf8Error on malformed input (overlongs, surrogates, truncation).
std::u32string decode(std::string_view utf8);
std::string encode(std::u32string_view cps);
void append_utf8(std::string& out, char32_t cp);

// Number of code points in a UTF-8 string.
std::size_t length(std::string_view utf8);

// Simple case folding: ASCII, Latin-1, Latin Extended-A pairs, Greek and
// Cyrillic. Characters outside these blocks are returned unchanged.
char32_t to_lower(char32_t cp);
char32_t to_upper(char32_t cp);
std::string to_lower(std::string_view utf8);

bool is_upper(char32_t cp);
bool is_lower(char32_t cp);
bool is_letter(char32_t cp);
bool is_digit(char32_t cp);
bool is_space(char32_t cp);
bool is_alnum(char32_t cp);

// Trims ASCII and Unicode whitespace from both ends.
std::string trim(std::string_view utf8);

// A UTF-8 string with a code-point index, for repeated slicing.
class IndexedText {
 public:
  IndexedText() = default;
  explicit IndexedText(std::string utf8);

  const std::string& str() const noexcept { return utf8_; }
  std::size_t size() const noexcept { return starts_.size() - 1; }

  // Slice [begin, end) in code points. Requires begin <= end <= size().
  std::string_view slice(std::size_t begin, std::size_t end) const;

 private:
  std::string utf8_;
  std::vector<std::size_t> starts_{0};  // byte offset of each code point + sentinel
};

}  // namespace biorefine::text
