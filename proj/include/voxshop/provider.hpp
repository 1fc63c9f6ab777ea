#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "voxshop/rational.hpp"
#include "voxshop/textnorm.hpp"

namespace voxshop::provider {

struct TranscriptEvent {
  std::string session_id;
  std::int64_t seq = 0;
  std::string text;
  bool is_final = true;
  // One per whitespace-separated word of `text`; absent means all 1.
  std::optional<std::vector<Rational>> word_confidences;
  // Reserved for recognizers that report spotted keywords alongside text.
  std::optional<std::vector<std::string>> keyword_hints;

  bool operator==(const TranscriptEvent&) const = default;
};

/// Type-checks an event record. `path` prefixes schema error messages.
/// Does not check the confidence count against the text; see validate().
TranscriptEvent event_from_json(const nlohmann::json& j, const std::string& path = "$");
nlohmann::ordered_json to_json(const TranscriptEvent& event);

/// Confidence count matches the word count and every value lies in [0, 1].
void validate(const TranscriptEvent& event, const std::string& path = "$");

/// Normalized tokens with the confidence of the word each came from.
struct PreparedUtterance {
  textnorm::TokenSeq tokens;
  std::vector<Rational> confidences;  // empty when the event carries none
};
PreparedUtterance prepare(const TranscriptEvent& event);

struct ScriptedEvent {
  TranscriptEvent event;
  std::int64_t delay_ms = 0;
};

struct ProviderScript {
  std::vector<ScriptedEvent> events;
};

/// JSONL, one event per line; blank lines are skipped. The whole file is
/// validated up front: a bad record is a schema error naming its line, and
/// a script may not end on a partial.
ProviderScript parse_script(std::string_view text);
ProviderScript load_script(const std::filesystem::path& path);

/// Streaming speech-to-text boundary. next_event() returns nullopt at the
/// end of the stream and throws on provider failure.
class TranscriptProvider {
 public:
  virtual ~TranscriptProvider() = default;
  virtual void open_session(const std::string& session_id) = 0;
  virtual std::optional<TranscriptEvent> next_event() = 0;
  virtual void close() = 0;
};

/// Replays a script. Events without a session id take the opened one.
class ScriptedProvider : public TranscriptProvider {
 public:
  explicit ScriptedProvider(ProviderScript script, bool honor_delays = false);

  void open_session(const std::string& session_id) override;
  std::optional<TranscriptEvent> next_event() override;
  void close() override;

 private:
  ProviderScript script_;
  bool honor_delays_;
  bool open_ = false;
  std::string session_id_;
  std::size_t next_ = 0;
};

struct Synthesis {
  std::string text;
  std::optional<std::vector<std::uint8_t>> audio;
};

class Synthesizer {
 public:
  virtual ~Synthesizer() = default;
  virtual Synthesis synthesize(std::string_view speech) = 0;
};

/// Returns the text unchanged and no audio; the client does the speaking.
class PassthroughSynthesizer : public Synthesizer {
 public:
  Synthesis synthesize(std::string_view speech) override;
};

enum class PartialPolicy {
  kFinalOnly,  // partials are acknowledged and ignored
  kEager,      // partials are interpreted for a preview, never applied
};

}  // namespace voxshop::provider
