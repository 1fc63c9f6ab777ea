#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "voxshop/rational.hpp"
#include "voxshop/textnorm.hpp"

namespace voxshop::command {

using textnorm::TokenSeq;

/// How much of the input a trigger may cover and whether slots are filled.
enum class SpeechMode {
  kIsolated,     // the whole input is one single-word trigger
  kConnected,    // the whole input is exactly one trigger phrase
  kContinuous,   // triggers spotted anywhere in running speech
  kSpontaneous,  // continuous spotting plus slot extraction
};

enum class VocabClass { kSmall, kMedium, kLarge, kVeryLarge };

enum class SlotKind { kFreeText, kQuantity, kOrdinal };

std::string_view to_string(SpeechMode mode);
std::string_view to_string(VocabClass vocab);
std::string_view to_string(SlotKind kind);

struct SlotSpec {
  std::string name;
  SlotKind kind = SlotKind::kFreeText;
};

/// A trigger phrase split at its gap markers. "add … to my cart" has the
/// anchors [add] and [to, my, cart] with one gap between them; each gap
/// binds one FREE_TEXT slot of the owning intent, in declaration order.
struct TriggerPhrase {
  std::vector<TokenSeq> anchors;
  std::vector<std::string> gap_slots;
  std::string text;  // canonical form, anchors joined by " … "

  bool is_single_word() const { return anchors.size() == 1 && anchors.front().size() == 1; }
};

struct Intent {
  std::string name;
  std::vector<TriggerPhrase> triggers;
  std::vector<SlotSpec> slots;
  std::string description;

  const SlotSpec* find_slot(std::string_view slot_name) const;
};

struct CommandGrammar {
  std::vector<Intent> intents;  // sorted by name
  SpeechMode mode = SpeechMode::kSpontaneous;
  Rational confidence_threshold{1, 2};
  VocabClass vocab_class = VocabClass::kSmall;
  std::size_t distinct_phrase_count = 0;

  const Intent* find(std::string_view intent_name) const;
};

/// Vocabulary size classes: 1-100 small, 101-1000 medium, 1001-10000 large,
/// anything above very large. Zero is an invalid-grammar error.
VocabClass classify_vocabulary(std::int64_t distinct_phrase_count);

/// Builds a grammar from its JSON document:
///   { mode, confidence_threshold, intents: [ { name, triggers, slots, description } ] }
/// Trigger strings use "…" or "..." as the gap marker.
CommandGrammar compile_grammar(const nlohmann::json& spec);
CommandGrammar load_grammar(const std::filesystem::path& path);

struct SlotValue {
  TokenSeq tokens;
  std::optional<std::int64_t> number;  // set for QUANTITY and ORDINAL slots

  bool operator==(const SlotValue&) const = default;
};

struct KeywordSpot {
  std::string intent;
  std::string trigger;  // canonical text of the matched trigger phrase
  std::size_t begin = 0;
  std::size_t end = 0;  // exclusive
  Rational confidence{1};
  std::map<std::string, SlotValue> slot_values;

  std::size_t length() const { return end - begin; }
  bool operator==(const KeywordSpot&) const = default;
};

/// Finds trigger phrases in `tokens` according to the grammar's mode.
/// `confidences` is either empty (every word counts as 1) or has one entry
/// per token. Spots are non-overlapping and in ascending position order.
std::vector<KeywordSpot> spot(const TokenSeq& tokens, const std::vector<Rational>& confidences,
                              const CommandGrammar& grammar);

enum class Outcome { kMatched, kNoMatch, kLowConfidence };
std::string_view to_string(Outcome outcome);

struct CommandDecision {
  Outcome outcome = Outcome::kNoMatch;
  std::optional<KeywordSpot> spot;  // the matched or tentative spot
  std::optional<std::string> speech_fallback;  // set iff outcome != kMatched
  std::string utterance;  // normalized input, for echoing

  bool operator==(const CommandDecision&) const = default;
};

/// Picks the single best spot (highest confidence, then leftmost, then
/// longest, then intent name) and applies the confidence threshold.
CommandDecision interpret(const TokenSeq& tokens, const std::vector<Rational>& confidences,
                          const CommandGrammar& grammar);

nlohmann::ordered_json to_json(const KeywordSpot& spot);
nlohmann::ordered_json to_json(const CommandDecision& decision);

}  // namespace voxshop::command
