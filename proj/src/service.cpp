#include "voxshop/service.hpp"

#include <fmt/format.h>

#include "voxshop/json_util.hpp"

namespace voxshop::service {

namespace {

std::size_t utf8_length(std::string_view s) {
  std::size_t n = 0;
  for (unsigned char c : s) {
    if ((c & 0xC0) != 0x80) ++n;
  }
  return n;
}

}  // namespace

nlohmann::ordered_json error_json(ErrorCode code, std::string_view message) {
  return {{"error", {{"code", to_string(code)}, {"message", message}}}};
}

nlohmann::ordered_json state_snapshot(const shop::Session& s) {
  nlohmann::ordered_json j = {{"session_id", s.id},
                              {"page", shop::to_json(s.page)},
                              {"cart", shop::to_json(s.cart)},
                              {"event_seq", nullptr},
                              {"history_depth", s.history.size()},
                              {"orders_placed", s.orders_placed}};
  if (s.event_seq) j["event_seq"] = *s.event_seq;
  return j;
}

nlohmann::ordered_json to_json(const CommandOutcome& o) {
  nlohmann::ordered_json j = {{"session_id", o.session_id},
                              {"seq", o.seq},
                              {"decision", o.decision},
                              {"intent", nullptr},
                              {"speech", o.speech},
                              {"display", {{"page", o.display.page}, {"payload", o.display.payload}}},
                              {"state", o.state}};
  if (o.intent) j["intent"] = *o.intent;
  if (o.preview) j["preview"] = *o.preview;
  return j;
}

ShopService::ShopService(shop::Catalog catalog, command::CommandGrammar grammar, ServiceConfig config)
    : catalog_(std::move(catalog)), grammar_(std::move(grammar)), config_(std::move(config)) {}

std::string ShopService::create_session() {
  expire_idle();
  std::lock_guard lock(sessions_mutex_);
  auto entry = std::make_shared<Entry>();
  entry->session.id = fmt::format("session-{}", next_session_++);
  entry->last_active = config_.clock();
  std::string id = entry->session.id;
  sessions_.emplace(id, std::move(entry));
  return id;
}

std::shared_ptr<ShopService::Entry> ShopService::find(const std::string& session_id) {
  expire_idle();
  std::lock_guard lock(sessions_mutex_);
  auto it = sessions_.find(session_id);
  if (it == sessions_.end()) throw Error(ErrorCode::kNotFound, fmt::format("no session '{}'", session_id));
  return it->second;
}

std::size_t ShopService::expire_idle() {
  const auto now = config_.clock();
  std::lock_guard lock(sessions_mutex_);
  std::size_t dropped = 0;
  for (auto it = sessions_.begin(); it != sessions_.end();) {
    // try_lock: a session mid-event is by definition not idle.
    std::unique_lock entry_lock(it->second->mutex, std::try_to_lock);
    if (entry_lock.owns_lock() && now - it->second->last_active > config_.idle_expiry) {
      entry_lock.unlock();
      it = sessions_.erase(it);
      ++dropped;
    } else {
      ++it;
    }
  }
  return dropped;
}

std::size_t ShopService::session_count() {
  std::lock_guard lock(sessions_mutex_);
  return sessions_.size();
}

CommandOutcome ShopService::ingest(const std::string& session_id, const provider::TranscriptEvent& event) {
  auto entry = find(session_id);
  std::lock_guard lock(entry->mutex);
  return ingest_locked(*entry, event);
}

CommandOutcome ShopService::ingest_json(const std::string& session_id, const nlohmann::json& body) {
  auto entry = find(session_id);
  provider::TranscriptEvent event = provider::event_from_json(body);
  std::lock_guard lock(entry->mutex);
  return ingest_locked(*entry, event);
}

CommandOutcome ShopService::ingest_locked(Entry& entry, const provider::TranscriptEvent& event) {
  shop::Session& s = entry.session;
  if (utf8_length(event.text) > config_.max_text_chars) {
    throw Error(ErrorCode::kRejected,
                fmt::format("transcript text exceeds {} characters", config_.max_text_chars));
  }
  provider::validate(event);
  if (!event.session_id.empty() && event.session_id != s.id) {
    json_util::schema_error("$.session_id", fmt::format("event names session '{}' but was sent to '{}'",
                                                        event.session_id, s.id));
  }
  if (s.event_seq && event.seq <= *s.event_seq) {
    throw Error(ErrorCode::kOrdering,
                fmt::format("seq {} is not after the last processed seq {}", event.seq, *s.event_seq));
  }
  entry.last_active = config_.clock();

  CommandOutcome out;
  out.session_id = s.id;
  out.seq = event.seq;

  if (!event.is_final) {
    s.event_seq = event.seq;
    out.decision = "DEFERRED";
    out.speech = "Listening.";
    out.display = shop::display_for(s, catalog_);
    if (config_.partial_policy == provider::PartialPolicy::kEager) {
      auto prepared = provider::prepare(event);
      auto decision = command::interpret(prepared.tokens, prepared.confidences, grammar_);
      if (decision.spot) out.preview = decision.spot->intent;
    }
    out.state = state_snapshot(s);
    return out;
  }

  auto prepared = provider::prepare(event);
  auto decision = command::interpret(prepared.tokens, prepared.confidences, grammar_);
  auto result = shop::apply(s, decision, catalog_);
  s = std::move(result.session);
  s.event_seq = event.seq;

  switch (decision.outcome) {
    case command::Outcome::kMatched: out.decision = decision.spot->intent; break;
    case command::Outcome::kNoMatch: out.decision = "NO_MATCH"; break;
    case command::Outcome::kLowConfidence: out.decision = "LOW_CONFIDENCE"; break;
  }
  if (decision.spot) out.intent = decision.spot->intent;
  out.speech = std::move(result.response.speech);
  out.display = std::move(result.response.display);
  out.state = state_snapshot(s);
  return out;
}

shop::Session ShopService::session(const std::string& session_id) {
  auto entry = find(session_id);
  std::lock_guard lock(entry->mutex);
  return entry->session;
}

nlohmann::ordered_json ShopService::get_state(const std::string& session_id) {
  return state_snapshot(session(session_id));
}

nlohmann::ordered_json ShopService::search_products(const std::string& query, std::size_t page) const {
  return shop::to_json(shop::search(catalog_, textnorm::normalize(query), page));
}

nlohmann::ordered_json ShopService::get_product(const std::string& product_id) const {
  const shop::Product* p = catalog_.find(product_id);
  if (p == nullptr) throw Error(ErrorCode::kNotFound, fmt::format("no product '{}'", product_id));
  return shop::to_json(*p);
}

nlohmann::ordered_json ShopService::health() const {
  return {{"status", "ok"},
          {"vocab_class", command::to_string(grammar_.vocab_class)},
          {"mode", command::to_string(grammar_.mode)},
          {"intents", grammar_.intents.size()},
          {"trigger_phrases", grammar_.distinct_phrase_count},
          {"products", catalog_.size()}};
}

std::vector<nlohmann::ordered_json> replay(const provider::ProviderScript& script, ShopService& service) {
  std::vector<nlohmann::ordered_json> records;
  const std::string id = service.create_session();
  provider::ScriptedProvider source(script);
  source.open_session(id);
  while (auto event = source.next_event()) {
    nlohmann::ordered_json record = {{"event", provider::to_json(*event)}};
    try {
      record["outcome"] = to_json(service.ingest(id, *event));
    } catch (const Error& e) {
      record["error"] = error_json(e.code(), e.what())["error"];
    }
    records.push_back(std::move(record));
  }
  source.close();
  return records;
}

}  // namespace voxshop::service
