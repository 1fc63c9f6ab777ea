#include "voxshop/provider.hpp"

#include <chrono>
#include <thread>

#include <fmt/format.h>

#include "voxshop/error.hpp"
#include "voxshop/json_util.hpp"

namespace voxshop::provider {

using nlohmann::json;

TranscriptEvent event_from_json(const json& j, const std::string& path) {
  using namespace json_util;
  require_object(j, path);
  TranscriptEvent e;
  e.session_id = get_optional_string(j, "session_id", path).value_or("");
  e.seq = get_integer(j, "seq", path);
  e.text = get_string(j, "text", path);
  e.is_final = get_bool(j, "is_final", path);
  if (const json* wc = optional_field(j, "word_confidences")) {
    require_array(*wc, path + ".word_confidences");
    std::vector<Rational> values;
    for (std::size_t i = 0; i < wc->size(); ++i) {
      const json& v = (*wc)[i];
      if (!v.is_number()) schema_error(fmt::format("{}.word_confidences[{}]", path, i), "expected number");
      double d = v.get<double>();
      if (!(d >= 0.0 && d <= 1.0)) schema_error(fmt::format("{}.word_confidences[{}]", path, i), "must be within [0, 1]");
      values.push_back(Rational::from_double(d));
    }
    e.word_confidences = std::move(values);
  }
  if (const json* hints = optional_field(j, "keyword_hints")) {
    require_array(*hints, path + ".keyword_hints");
    std::vector<std::string> values;
    for (std::size_t i = 0; i < hints->size(); ++i) {
      if (!(*hints)[i].is_string()) schema_error(fmt::format("{}.keyword_hints[{}]", path, i), "expected string");
      values.push_back((*hints)[i].get<std::string>());
    }
    e.keyword_hints = std::move(values);
  }
  return e;
}

nlohmann::ordered_json to_json(const TranscriptEvent& e) {
  nlohmann::ordered_json j = {{"session_id", e.session_id}, {"seq", e.seq}, {"text", e.text}, {"is_final", e.is_final}};
  if (e.word_confidences) {
    auto arr = nlohmann::ordered_json::array();
    for (const auto& c : *e.word_confidences) arr.push_back(c.to_double());
    j["word_confidences"] = std::move(arr);
  }
  if (e.keyword_hints) j["keyword_hints"] = *e.keyword_hints;
  return j;
}

void validate(const TranscriptEvent& e, const std::string& path) {
  if (!e.word_confidences) return;
  std::size_t words = textnorm::split_words(e.text).size();
  if (e.word_confidences->size() != words) {
    json_util::schema_error(path + ".word_confidences",
                            fmt::format("{} confidences for {} words", e.word_confidences->size(), words));
  }
  for (const auto& c : *e.word_confidences) {
    if (c < Rational(0) || c > Rational(1)) json_util::schema_error(path + ".word_confidences", "must be within [0, 1]");
  }
}

PreparedUtterance prepare(const TranscriptEvent& e) {
  PreparedUtterance out;
  for (auto& t : textnorm::normalize_sourced(e.text)) {
    if (e.word_confidences) out.confidences.push_back(e.word_confidences->at(t.word_index));
    out.tokens.push_back(std::move(t.text));
  }
  return out;
}

ProviderScript parse_script(std::string_view text) {
  ProviderScript script;
  std::size_t line_no = 0;
  while (!text.empty()) {
    std::size_t nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.find_first_not_of(" \t") == std::string_view::npos) continue;

    const std::string where = fmt::format("line {}", line_no);
    json j = json_util::parse(line, where);
    ScriptedEvent se;
    se.event = event_from_json(j, where);
    validate(se.event, where);
    if (auto delay = json_util::get_optional_integer(j, "delay_ms", where)) {
      if (*delay < 0) json_util::schema_error(where + ".delay_ms", "must be >= 0");
      se.delay_ms = *delay;
    }
    script.events.push_back(std::move(se));
  }
  if (!script.events.empty() && !script.events.back().event.is_final) {
    throw Error(ErrorCode::kSchema, "script ends with a partial event; every utterance needs a final");
  }
  return script;
}

ProviderScript load_script(const std::filesystem::path& path) {
  try {
    return parse_script(json_util::read_file(path));
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kSchema) throw;
    throw Error(ErrorCode::kSchema, path.string() + ": " + e.what());
  }
}

ScriptedProvider::ScriptedProvider(ProviderScript script, bool honor_delays)
    : script_(std::move(script)), honor_delays_(honor_delays) {}

void ScriptedProvider::open_session(const std::string& session_id) {
  session_id_ = session_id;
  next_ = 0;
  open_ = true;
}

std::optional<TranscriptEvent> ScriptedProvider::next_event() {
  if (!open_) throw Error(ErrorCode::kContractViolation, "provider session is not open");
  if (next_ >= script_.events.size()) return std::nullopt;
  const ScriptedEvent& se = script_.events[next_++];
  if (honor_delays_ && se.delay_ms > 0) std::this_thread::sleep_for(std::chrono::milliseconds(se.delay_ms));
  TranscriptEvent e = se.event;
  if (e.session_id.empty()) e.session_id = session_id_;
  return e;
}

void ScriptedProvider::close() { open_ = false; }

Synthesis PassthroughSynthesizer::synthesize(std::string_view speech) {
  if (speech.empty()) throw Error(ErrorCode::kContractViolation, "nothing to synthesize");
  return {std::string(speech), std::nullopt};
}

}  // namespace voxshop::provider
