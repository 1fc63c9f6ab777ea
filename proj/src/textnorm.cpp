#include "voxshop/textnorm.hpp"

#include <array>
#include <charconv>

namespace voxshop::textnorm {
namespace {

constexpr std::array<std::string_view, 21> kNumberWords = {
    "zero",    "one",     "two",       "three",    "four",     "five",    "six",
    "seven",   "eight",   "nine",      "ten",      "eleven",   "twelve",  "thirteen",
    "fourteen", "fifteen", "sixteen",  "seventeen", "eighteen", "nineteen", "twenty"};

constexpr std::array<std::string_view, 21> kOrdinalWords = {
    "",           "first",      "second",     "third",       "fourth",     "fifth",
    "sixth",      "seventh",    "eighth",     "ninth",       "tenth",      "eleventh",
    "twelfth",    "thirteenth", "fourteenth", "fifteenth",   "sixteenth",  "seventeenth",
    "eighteenth", "nineteenth", "twentieth"};

bool is_space(unsigned char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

bool is_ascii_punct(unsigned char c) {
  return c < 0x80 && ((c >= 0x21 && c <= 0x2f) || (c >= 0x3a && c <= 0x40) ||
                      (c >= 0x5b && c <= 0x60) || (c >= 0x7b && c <= 0x7e));
}

// Appends one hyphen-free piece of a word: punctuation removed, ASCII
// lowercased, apostrophes trimmed from both ends.
void emit_piece(std::string_view piece, std::size_t word_index,
                std::vector<SourcedToken>& out) {
  std::string token;
  token.reserve(piece.size());
  for (std::size_t i = 0; i < piece.size(); ++i) {
    auto c = static_cast<unsigned char>(piece[i]);
    // U+2019 RIGHT SINGLE QUOTATION MARK folds to an ASCII apostrophe.
    if (c == 0xE2 && i + 2 < piece.size() && static_cast<unsigned char>(piece[i + 1]) == 0x80 &&
        static_cast<unsigned char>(piece[i + 2]) == 0x99) {
      token += '\'';
      i += 2;
      continue;
    }
    if (c == '\'') {
      token += '\'';
    } else if (is_ascii_punct(c)) {
      continue;
    } else if (c >= 'A' && c <= 'Z') {
      token += static_cast<char>(c - 'A' + 'a');
    } else {
      token += static_cast<char>(c);
    }
  }
  std::size_t first = token.find_first_not_of('\'');
  if (first == std::string::npos) return;
  std::size_t last = token.find_last_not_of('\'');
  out.push_back({token.substr(first, last - first + 1), word_index});
}

}  // namespace

std::vector<std::string_view> split_words(std::string_view raw) {
  std::vector<std::string_view> words;
  std::size_t i = 0;
  while (i < raw.size()) {
    while (i < raw.size() && is_space(static_cast<unsigned char>(raw[i]))) ++i;
    std::size_t start = i;
    while (i < raw.size() && !is_space(static_cast<unsigned char>(raw[i]))) ++i;
    if (i > start) words.push_back(raw.substr(start, i - start));
  }
  return words;
}

std::vector<SourcedToken> normalize_sourced(std::string_view raw) {
  std::vector<SourcedToken> out;
  auto words = split_words(raw);
  for (std::size_t w = 0; w < words.size(); ++w) {
    std::string_view word = words[w];
    std::size_t start = 0;
    for (std::size_t i = 0; i <= word.size(); ++i) {
      if (i == word.size() || word[i] == '-') {
        if (i > start) emit_piece(word.substr(start, i - start), w, out);
        start = i + 1;
      }
    }
  }
  return out;
}

TokenSeq normalize(std::string_view raw) {
  TokenSeq tokens;
  for (auto& t : normalize_sourced(raw)) tokens.push_back(std::move(t.text));
  return tokens;
}

std::string join(const TokenSeq& tokens, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i > 0) out += sep;
    out += tokens[i];
  }
  return out;
}

std::optional<std::int64_t> parse_quantity(std::string_view token) {
  if (token.empty()) return std::nullopt;
  if (token.size() <= 9 && token.find_first_not_of("0123456789") == std::string_view::npos) {
    std::int64_t value = 0;
    std::from_chars(token.data(), token.data() + token.size(), value);
    return value;
  }
  for (std::size_t i = 0; i < kNumberWords.size(); ++i) {
    if (token == kNumberWords[i]) return static_cast<std::int64_t>(i);
  }
  return std::nullopt;
}

std::optional<std::int64_t> parse_ordinal(std::string_view token) {
  for (std::size_t i = 1; i < kOrdinalWords.size(); ++i) {
    if (token == kOrdinalWords[i]) return static_cast<std::int64_t>(i);
  }
  if (token.size() < 3) return std::nullopt;
  std::string_view digits = token.substr(0, token.size() - 2);
  std::string_view suffix = token.substr(token.size() - 2);
  if (digits.size() > 9 || digits.find_first_not_of("0123456789") != std::string_view::npos) {
    return std::nullopt;
  }
  std::int64_t value = 0;
  std::from_chars(digits.data(), digits.data() + digits.size(), value);
  if (value == 0) return std::nullopt;
  std::int64_t tens = value % 100;
  std::string_view expected = "th";
  if (tens < 11 || tens > 13) {
    if (value % 10 == 1) expected = "st";
    else if (value % 10 == 2) expected = "nd";
    else if (value % 10 == 3) expected = "rd";
  }
  if (suffix != expected) return std::nullopt;
  return value;
}

}  // namespace voxshop::textnorm
