#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "voxshop/command.hpp"
#include "voxshop/error.hpp"
#include "voxshop/provider.hpp"
#include "voxshop/shop.hpp"

namespace voxshop::service {

using Clock = std::chrono::steady_clock;

struct ServiceConfig {
  provider::PartialPolicy partial_policy = provider::PartialPolicy::kFinalOnly;
  std::chrono::seconds idle_expiry{30 * 60};
  std::size_t max_text_chars = 10000;
  std::function<Clock::time_point()> clock = [] { return Clock::now(); };
};

struct CommandOutcome {
  std::string session_id;
  std::int64_t seq = 0;
  std::string decision;               // intent name, NO_MATCH, LOW_CONFIDENCE or DEFERRED
  std::optional<std::string> intent;  // matched or tentative intent
  std::string speech;
  shop::Display display;
  nlohmann::ordered_json state;       // snapshot after the event
  std::optional<std::string> preview; // eager partials: what the final would trigger
};

nlohmann::ordered_json to_json(const CommandOutcome& outcome);

/// Page, cart and sequence position of one session.
nlohmann::ordered_json state_snapshot(const shop::Session& session);

/// Sessions plus the normalize -> interpret -> apply pipeline. Thread-safe:
/// events for one session are serialized, sessions are independent.
class ShopService {
 public:
  ShopService(shop::Catalog catalog, command::CommandGrammar grammar, ServiceConfig config = {});

  std::string create_session();

  /// Errors, checked in this order: NOT_FOUND (unknown or expired session),
  /// REJECTED (text too long), SCHEMA (bad confidences or a session id that
  /// disagrees), ORDERING (seq not above the last processed one). A failed
  /// event changes nothing.
  CommandOutcome ingest(const std::string& session_id, const provider::TranscriptEvent& event);
  /// Same, from a request body. The session is looked up before the body is
  /// type-checked.
  CommandOutcome ingest_json(const std::string& session_id, const nlohmann::json& body);

  shop::Session session(const std::string& session_id);
  nlohmann::ordered_json get_state(const std::string& session_id);

  nlohmann::ordered_json search_products(const std::string& query, std::size_t page) const;
  nlohmann::ordered_json get_product(const std::string& product_id) const;
  nlohmann::ordered_json health() const;

  /// Drops sessions idle for longer than the configured expiry.
  std::size_t expire_idle();
  std::size_t session_count();

  const shop::Catalog& catalog() const { return catalog_; }
  const command::CommandGrammar& grammar() const { return grammar_; }

 private:
  struct Entry {
    std::mutex mutex;
    shop::Session session;
    Clock::time_point last_active;
  };

  std::shared_ptr<Entry> find(const std::string& session_id);
  CommandOutcome ingest_locked(Entry& entry, const provider::TranscriptEvent& event);

  const shop::Catalog catalog_;
  const command::CommandGrammar grammar_;
  const ServiceConfig config_;

  std::mutex sessions_mutex_;
  std::map<std::string, std::shared_ptr<Entry>> sessions_;
  std::uint64_t next_session_ = 1;
};

/// Drives a script through the service in a fresh session. One record per
/// event: {"event", "outcome"} or {"event", "error": {code, message}}.
std::vector<nlohmann::ordered_json> replay(const provider::ProviderScript& script, ShopService& service);

/// Error body shared by every transport: {"error": {"code", "message"}}.
nlohmann::ordered_json error_json(ErrorCode code, std::string_view message);

}  // namespace voxshop::service
