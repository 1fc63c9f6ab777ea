#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace voxshop::textnorm {

/// Lowercase word tokens. Tokens are never empty and never contain
/// whitespace.
using TokenSeq = std::vector<std::string>;

/// A normalized token together with the index of the whitespace-separated
/// source word it came from. Lets per-word provider confidences follow the
/// tokens through normalization.
struct SourcedToken {
  std::string text;
  std::size_t word_index = 0;
};

/// Lowercases ASCII letters, drops punctuation (apostrophes survive only in
/// the interior of a token), splits on whitespace and hyphens. Non-ASCII
/// bytes pass through unchanged.
TokenSeq normalize(std::string_view raw);

std::vector<SourcedToken> normalize_sourced(std::string_view raw);

/// Whitespace-separated words, without any other processing.
std::vector<std::string_view> split_words(std::string_view raw);

std::string join(const TokenSeq& tokens, std::string_view sep = " ");

/// Digits ("3", "12") or a number word "zero".."twenty".
std::optional<std::int64_t> parse_quantity(std::string_view token);

/// "first".."twentieth" or "1st", "2nd", "3rd", "4th", ...
std::optional<std::int64_t> parse_ordinal(std::string_view token);

}  // namespace voxshop::textnorm
