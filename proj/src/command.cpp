#include "voxshop/command.hpp"

#include <algorithm>
#include <set>

#include <fmt/format.h>

#include "voxshop/error.hpp"
#include "voxshop/json_util.hpp"

namespace voxshop::command {
namespace {

using nlohmann::json;

constexpr std::string_view kGapMarker = "\xE2\x80\xA6";  // "…"

std::string upper(std::string_view s) {
  std::string out(s);
  for (auto& c : out) {
    if (c >= 'a' && c <= 'z') c = static_cast<char>(c - 'a' + 'A');
  }
  return out;
}

SpeechMode parse_mode(const std::string& text, const std::string& path) {
  std::string u = upper(text);
  if (u == "ISOLATED") return SpeechMode::kIsolated;
  if (u == "CONNECTED") return SpeechMode::kConnected;
  if (u == "CONTINUOUS") return SpeechMode::kContinuous;
  if (u == "SPONTANEOUS") return SpeechMode::kSpontaneous;
  json_util::schema_error(path, "unknown mode '" + text + "'");
}

SlotKind parse_slot_kind(const std::string& text, const std::string& path) {
  std::string u = upper(text);
  if (u == "FREE_TEXT") return SlotKind::kFreeText;
  if (u == "QUANTITY") return SlotKind::kQuantity;
  if (u == "ORDINAL") return SlotKind::kOrdinal;
  json_util::schema_error(path, "unknown slot kind '" + text + "'");
}

// Splits a trigger string at "…" / "..." gap markers.
std::vector<std::string> split_gaps(const std::string& raw) {
  std::vector<std::string> parts;
  std::string current;
  for (std::size_t i = 0; i < raw.size();) {
    if (raw.compare(i, kGapMarker.size(), kGapMarker) == 0) {
      parts.push_back(std::move(current));
      current.clear();
      i += kGapMarker.size();
    } else if (raw.compare(i, 3, "...") == 0) {
      parts.push_back(std::move(current));
      current.clear();
      i += 3;
    } else {
      current += raw[i++];
    }
  }
  parts.push_back(std::move(current));
  return parts;
}

TriggerPhrase compile_trigger(const std::string& raw, const Intent& intent, const std::string& path) {
  TriggerPhrase phrase;
  std::vector<std::string> texts;
  for (const auto& part : split_gaps(raw)) {
    TokenSeq anchor = textnorm::normalize(part);
    if (anchor.empty()) {
      throw Error(ErrorCode::kInvalidGrammar,
                  fmt::format("{}: trigger '{}' has an empty anchor around a gap", path, raw));
    }
    texts.push_back(textnorm::join(anchor));
    phrase.anchors.push_back(std::move(anchor));
  }
  std::size_t gaps = phrase.anchors.size() - 1;
  for (const auto& slot : intent.slots) {
    if (phrase.gap_slots.size() == gaps) break;
    if (slot.kind == SlotKind::kFreeText) phrase.gap_slots.push_back(slot.name);
  }
  if (phrase.gap_slots.size() != gaps) {
    throw Error(ErrorCode::kInvalidGrammar,
                fmt::format("{}: trigger '{}' has {} gap(s) but intent '{}' declares fewer FREE_TEXT slots",
                            path, raw, gaps, intent.name));
  }
  for (std::size_t i = 0; i < texts.size(); ++i) {
    if (i > 0) phrase.text += " \xE2\x80\xA6 ";
    phrase.text += texts[i];
  }
  return phrase;
}

bool anchor_at(const TokenSeq& tokens, std::size_t pos, const TokenSeq& anchor) {
  if (pos + anchor.size() > tokens.size()) return false;
  return std::equal(anchor.begin(), anchor.end(), tokens.begin() + static_cast<std::ptrdiff_t>(pos));
}

struct Candidate {
  const Intent* intent;
  std::size_t trigger_index;
  std::size_t begin;
  std::size_t end;
  std::vector<std::pair<std::size_t, std::size_t>> gaps;  // [begin, end) per gap
};

// Matches a trigger starting at `start`. Each gap takes at least one token
// and ends at the earliest occurrence of the following anchor.
std::optional<Candidate> match_at(const TokenSeq& tokens, std::size_t start, const Intent& intent,
                                  std::size_t trigger_index) {
  const TriggerPhrase& trigger = intent.triggers[trigger_index];
  if (!anchor_at(tokens, start, trigger.anchors.front())) return std::nullopt;
  Candidate c{&intent, trigger_index, start, start + trigger.anchors.front().size(), {}};
  for (std::size_t k = 1; k < trigger.anchors.size(); ++k) {
    const TokenSeq& anchor = trigger.anchors[k];
    std::size_t pos = c.end + 1;
    while (pos + anchor.size() <= tokens.size() && !anchor_at(tokens, pos, anchor)) ++pos;
    if (pos + anchor.size() > tokens.size()) return std::nullopt;
    c.gaps.emplace_back(c.end, pos);
    c.end = pos + anchor.size();
  }
  return c;
}

Rational mean_confidence(const std::vector<Rational>& confidences, std::size_t begin, std::size_t end) {
  if (confidences.empty()) return Rational(1);
  Rational sum(0);
  for (std::size_t i = begin; i < end; ++i) sum += confidences[i];
  return sum / Rational(static_cast<std::int64_t>(end - begin));
}

TokenSeq slice(const TokenSeq& tokens, std::size_t begin, std::size_t end) {
  return TokenSeq(tokens.begin() + static_cast<std::ptrdiff_t>(begin),
                  tokens.begin() + static_cast<std::ptrdiff_t>(end));
}

std::optional<std::int64_t> ordinal_at(const TokenSeq& tokens, std::size_t pos) {
  if (auto n = textnorm::parse_ordinal(tokens[pos])) return n;
  const std::string& t = tokens[pos];
  if (!t.empty() && t.find_first_not_of("0123456789") == std::string::npos) {
    return textnorm::parse_quantity(t);
  }
  if (pos > 0 && tokens[pos - 1] == "number") return textnorm::parse_quantity(t);
  return std::nullopt;
}

// Fills QUANTITY/ORDINAL slots from the nearest parseable token inside
// [window_begin, window_end) outside the trigger's anchors, and a trailing
// FREE_TEXT slot from the tokens after the trigger.
void extract_window_slots(const TokenSeq& tokens, const Candidate& c, std::size_t window_begin,
                          std::size_t window_end, KeywordSpot& spot) {
  const Intent& intent = *c.intent;
  const TriggerPhrase& trigger = intent.triggers[c.trigger_index];

  auto in_anchor = [&](std::size_t pos) {
    if (pos < c.begin || pos >= c.end) return false;
    for (const auto& [gb, ge] : c.gaps) {
      if (pos >= gb && pos < ge) return false;
    }
    return true;
  };
  auto distance = [&](std::size_t pos) -> std::size_t {
    if (pos < c.begin) return c.begin - pos;
    if (pos >= c.end) return pos - c.end + 1;
    return 0;
  };

  std::optional<std::pair<std::size_t, std::size_t>> trailing;
  for (const auto& slot : intent.slots) {
    if (slot.kind != SlotKind::kFreeText) continue;
    if (std::find(trigger.gap_slots.begin(), trigger.gap_slots.end(), slot.name) != trigger.gap_slots.end()) {
      continue;
    }
    if (c.end < window_end) {
      spot.slot_values[slot.name] = SlotValue{slice(tokens, c.end, window_end), std::nullopt};
      trailing = std::make_pair(c.end, window_end);
    }
    break;
  }

  std::set<std::size_t> used;
  for (const auto& slot : intent.slots) {
    if (slot.kind == SlotKind::kFreeText) continue;
    std::optional<std::pair<std::size_t, std::int64_t>> best;  // position, value
    std::size_t best_distance = 0;
    for (std::size_t pos = window_begin; pos < window_end; ++pos) {
      if (in_anchor(pos) || used.count(pos) != 0) continue;
      std::optional<std::int64_t> value = slot.kind == SlotKind::kQuantity
                                              ? textnorm::parse_quantity(tokens[pos])
                                              : ordinal_at(tokens, pos);
      if (!value) continue;
      std::size_t d = distance(pos);
      if (!best || d < best_distance) {
        best = std::make_pair(pos, *value);
        best_distance = d;
      }
    }
    if (!best) continue;
    used.insert(best->first);
    spot.slot_values[slot.name] = SlotValue{{tokens[best->first]}, best->second};
  }

  // A number consumed by a QUANTITY/ORDINAL slot is not part of the
  // free-text phrase it sits in ("add two red shoes" -> product [red, shoes]).
  auto strip = [&](const std::string& slot_name, std::size_t begin, std::size_t end) {
    TokenSeq kept;
    for (std::size_t pos = begin; pos < end; ++pos) {
      if (used.count(pos) == 0) kept.push_back(tokens[pos]);
    }
    if (kept.empty()) spot.slot_values.erase(slot_name);
    else spot.slot_values[slot_name].tokens = std::move(kept);
  };
  if (used.empty()) return;
  for (std::size_t g = 0; g < c.gaps.size(); ++g) strip(trigger.gap_slots[g], c.gaps[g].first, c.gaps[g].second);
  if (trailing) {
    for (const auto& slot : intent.slots) {
      if (slot.kind == SlotKind::kFreeText &&
          std::find(trigger.gap_slots.begin(), trigger.gap_slots.end(), slot.name) == trigger.gap_slots.end()) {
        strip(slot.name, trailing->first, trailing->second);
        break;
      }
    }
  }
}

std::string speakable(std::string_view intent_name) {
  std::string out(intent_name);
  std::replace(out.begin(), out.end(), '_', ' ');
  return out;
}

}  // namespace

std::string_view to_string(SpeechMode mode) {
  switch (mode) {
    case SpeechMode::kIsolated: return "ISOLATED";
    case SpeechMode::kConnected: return "CONNECTED";
    case SpeechMode::kContinuous: return "CONTINUOUS";
    case SpeechMode::kSpontaneous: return "SPONTANEOUS";
  }
  return "?";
}

std::string_view to_string(VocabClass vocab) {
  switch (vocab) {
    case VocabClass::kSmall: return "SMALL";
    case VocabClass::kMedium: return "MEDIUM";
    case VocabClass::kLarge: return "LARGE";
    case VocabClass::kVeryLarge: return "VERY_LARGE";
  }
  return "?";
}

std::string_view to_string(SlotKind kind) {
  switch (kind) {
    case SlotKind::kFreeText: return "FREE_TEXT";
    case SlotKind::kQuantity: return "QUANTITY";
    case SlotKind::kOrdinal: return "ORDINAL";
  }
  return "?";
}

std::string_view to_string(Outcome outcome) {
  switch (outcome) {
    case Outcome::kMatched: return "MATCHED";
    case Outcome::kNoMatch: return "NO_MATCH";
    case Outcome::kLowConfidence: return "LOW_CONFIDENCE";
  }
  return "?";
}

const SlotSpec* Intent::find_slot(std::string_view slot_name) const {
  for (const auto& s : slots) {
    if (s.name == slot_name) return &s;
  }
  return nullptr;
}

const Intent* CommandGrammar::find(std::string_view intent_name) const {
  auto it = std::lower_bound(intents.begin(), intents.end(), intent_name,
                             [](const Intent& i, std::string_view n) { return i.name < n; });
  if (it == intents.end() || it->name != intent_name) return nullptr;
  return &*it;
}

VocabClass classify_vocabulary(std::int64_t distinct_phrase_count) {
  if (distinct_phrase_count <= 0) {
    throw Error(ErrorCode::kInvalidGrammar, "a grammar needs at least one trigger phrase");
  }
  if (distinct_phrase_count <= 100) return VocabClass::kSmall;
  if (distinct_phrase_count <= 1000) return VocabClass::kMedium;
  if (distinct_phrase_count <= 10000) return VocabClass::kLarge;
  return VocabClass::kVeryLarge;
}

CommandGrammar compile_grammar(const json& spec) {
  using namespace json_util;
  require_object(spec, "$");
  CommandGrammar grammar;
  if (auto mode = get_optional_string(spec, "mode", "$")) grammar.mode = parse_mode(*mode, "$.mode");
  if (auto threshold = get_optional_number(spec, "confidence_threshold", "$")) {
    if (*threshold < 0.0 || *threshold > 1.0) schema_error("$.confidence_threshold", "must be within [0, 1]");
    grammar.confidence_threshold = Rational::from_double(*threshold);
  }

  const json& intents = require_array(field(spec, "intents", "$"), "$.intents");
  if (intents.empty()) throw Error(ErrorCode::kInvalidGrammar, "grammar declares no intents");

  std::map<std::string, std::string> phrase_owner;  // canonical trigger -> intent
  std::set<std::string> intent_names;
  for (std::size_t i = 0; i < intents.size(); ++i) {
    const std::string path = fmt::format("$.intents[{}]", i);
    const json& ji = require_object(intents[i], path);
    Intent intent;
    intent.name = get_string(ji, "name", path);
    if (intent.name.empty()) schema_error(path + ".name", "must not be empty");
    if (!intent_names.insert(intent.name).second) {
      throw Error(ErrorCode::kConflict, fmt::format("intent '{}' is declared twice", intent.name));
    }
    intent.description = get_optional_string(ji, "description", path).value_or("");

    if (const json* slots = optional_field(ji, "slots")) {
      require_array(*slots, path + ".slots");
      std::set<std::string> slot_names;
      for (std::size_t s = 0; s < slots->size(); ++s) {
        const std::string spath = fmt::format("{}.slots[{}]", path, s);
        const json& js = require_object((*slots)[s], spath);
        SlotSpec slot{get_string(js, "name", spath), parse_slot_kind(get_string(js, "kind", spath), spath + ".kind")};
        if (!slot_names.insert(slot.name).second) {
          throw Error(ErrorCode::kInvalidGrammar,
                      fmt::format("intent '{}' declares slot '{}' twice", intent.name, slot.name));
        }
        intent.slots.push_back(std::move(slot));
      }
    }

    const json& triggers = require_array(field(ji, "triggers", path), path + ".triggers");
    if (triggers.empty()) {
      throw Error(ErrorCode::kInvalidGrammar, fmt::format("intent '{}' has no trigger phrases", intent.name));
    }
    for (std::size_t t = 0; t < triggers.size(); ++t) {
      const std::string tpath = fmt::format("{}.triggers[{}]", path, t);
      if (!triggers[t].is_string()) schema_error(tpath, "expected string");
      TriggerPhrase phrase = compile_trigger(triggers[t].get<std::string>(), intent, tpath);
      auto [it, inserted] = phrase_owner.emplace(phrase.text, intent.name);
      if (!inserted) {
        throw Error(ErrorCode::kConflict, fmt::format("trigger phrase '{}' is claimed by both '{}' and '{}'",
                                                      phrase.text, it->second, intent.name));
      }
      intent.triggers.push_back(std::move(phrase));
    }
    grammar.intents.push_back(std::move(intent));
  }

  std::sort(grammar.intents.begin(), grammar.intents.end(),
            [](const Intent& a, const Intent& b) { return a.name < b.name; });
  grammar.distinct_phrase_count = phrase_owner.size();
  grammar.vocab_class = classify_vocabulary(static_cast<std::int64_t>(grammar.distinct_phrase_count));
  return grammar;
}

CommandGrammar load_grammar(const std::filesystem::path& path) {
  return compile_grammar(json_util::parse_file(path));
}

std::vector<KeywordSpot> spot(const TokenSeq& tokens, const std::vector<Rational>& confidences,
                              const CommandGrammar& grammar) {
  if (!confidences.empty() && confidences.size() != tokens.size()) {
    throw Error(ErrorCode::kContractViolation,
                fmt::format("{} confidences for {} tokens", confidences.size(), tokens.size()));
  }
  const std::size_t n = tokens.size();
  const SpeechMode mode = grammar.mode;

  std::vector<Candidate> candidates;
  for (std::size_t start = 0; start < n; ++start) {
    for (const auto& intent : grammar.intents) {
      for (std::size_t t = 0; t < intent.triggers.size(); ++t) {
        auto c = match_at(tokens, start, intent, t);
        if (!c) continue;
        bool whole = c->begin == 0 && c->end == n;
        if (mode == SpeechMode::kIsolated && !(whole && intent.triggers[t].is_single_word())) continue;
        if (mode == SpeechMode::kConnected && !whole) continue;
        candidates.push_back(std::move(*c));
      }
    }
  }

  // Longest match first, then leftmost; grammar order settles the rest.
  std::stable_sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
    std::size_t la = a.end - a.begin;
    std::size_t lb = b.end - b.begin;
    if (la != lb) return la > lb;
    return a.begin < b.begin;
  });
  std::vector<const Candidate*> chosen;
  for (const auto& c : candidates) {
    bool overlaps = std::any_of(chosen.begin(), chosen.end(), [&](const Candidate* o) {
      return c.begin < o->end && o->begin < c.end;
    });
    if (!overlaps) chosen.push_back(&c);
  }
  std::sort(chosen.begin(), chosen.end(), [](const Candidate* a, const Candidate* b) { return a->begin < b->begin; });

  std::vector<KeywordSpot> spots;
  for (std::size_t k = 0; k < chosen.size(); ++k) {
    const Candidate& c = *chosen[k];
    const TriggerPhrase& trigger = c.intent->triggers[c.trigger_index];
    KeywordSpot s;
    s.intent = c.intent->name;
    s.trigger = trigger.text;
    s.begin = c.begin;
    s.end = c.end;
    s.confidence = mean_confidence(confidences, c.begin, c.end);
    for (std::size_t g = 0; g < c.gaps.size(); ++g) {
      s.slot_values[trigger.gap_slots[g]] = SlotValue{slice(tokens, c.gaps[g].first, c.gaps[g].second), std::nullopt};
    }
    if (mode == SpeechMode::kSpontaneous) {
      std::size_t window_begin = k == 0 ? 0 : chosen[k - 1]->end;
      std::size_t window_end = k + 1 == chosen.size() ? n : chosen[k + 1]->begin;
      extract_window_slots(tokens, c, window_begin, window_end, s);
    }
    spots.push_back(std::move(s));
  }
  return spots;
}

CommandDecision interpret(const TokenSeq& tokens, const std::vector<Rational>& confidences,
                          const CommandGrammar& grammar) {
  CommandDecision decision;
  decision.utterance = textnorm::join(tokens);
  auto spots = spot(tokens, confidences, grammar);
  if (spots.empty()) {
    decision.outcome = Outcome::kNoMatch;
    decision.speech_fallback =
        tokens.empty() ? std::string("Sorry, I didn't catch that. Say help to hear what you can do.")
                       : fmt::format("Sorry, I couldn't find a command in \"{}\". Say help to hear what you can do.",
                                     decision.utterance);
    return decision;
  }

  auto better = [](const KeywordSpot& a, const KeywordSpot& b) {
    if (a.confidence != b.confidence) return a.confidence > b.confidence;
    if (a.begin != b.begin) return a.begin < b.begin;
    if (a.length() != b.length()) return a.length() > b.length();
    return a.intent < b.intent;
  };
  const KeywordSpot* best = &spots.front();
  for (const auto& s : spots) {
    if (better(s, *best)) best = &s;
  }
  decision.spot = *best;
  if (best->confidence < grammar.confidence_threshold) {
    decision.outcome = Outcome::kLowConfidence;
    decision.speech_fallback =
        fmt::format("I think you want to {}, but I'm not sure I heard \"{}\" correctly. Please say it again.",
                    speakable(best->intent), decision.utterance);
  } else {
    decision.outcome = Outcome::kMatched;
  }
  return decision;
}

nlohmann::ordered_json to_json(const KeywordSpot& spot) {
  nlohmann::ordered_json slots = nlohmann::ordered_json::object();
  for (const auto& [name, value] : spot.slot_values) {
    nlohmann::ordered_json v = {{"tokens", value.tokens}};
    if (value.number) v["number"] = *value.number;
    slots[name] = std::move(v);
  }
  return {{"intent", spot.intent},
          {"trigger", spot.trigger},
          {"span", {spot.begin, spot.end}},
          {"confidence", spot.confidence.to_double()},
          {"slots", std::move(slots)}};
}

nlohmann::ordered_json to_json(const CommandDecision& decision) {
  nlohmann::ordered_json j = {{"outcome", to_string(decision.outcome)}, {"utterance", decision.utterance}};
  j["spot"] = decision.spot ? to_json(*decision.spot) : nlohmann::ordered_json(nullptr);
  if (decision.speech_fallback) j["speech_fallback"] = *decision.speech_fallback;
  return j;
}

}  // namespace voxshop::command
