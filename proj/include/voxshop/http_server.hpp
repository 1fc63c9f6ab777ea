#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include <json.hpp>

#include "voxshop/error.hpp"
#include "voxshop/service.hpp"

namespace voxshop::http {

struct Reply {
  unsigned status = 200;
  nlohmann::ordered_json body;
};

unsigned status_for(ErrorCode code);

/// Transport-independent request handling for the REST routes:
///   GET  /health
///   POST /api/sessions
///   POST /api/sessions/{id}/events
///   GET  /api/sessions/{id}/state
///   GET  /api/products?q=&page=
///   GET  /api/products/{id}
Reply route(service::ShopService& service, std::string_view method, std::string_view target,
            std::string_view body);

/// Session id named by a streaming-socket path /api/sessions/{id}/stream.
std::optional<std::string> stream_session(std::string_view target);

/// Reply to one streaming message: a CommandOutcome or an error body.
nlohmann::ordered_json stream_reply(service::ShopService& service, const std::string& session_id,
                                    std::string_view message);

std::string percent_decode(std::string_view s);

/// Blocking HTTP/1.1 + WebSocket server, one thread per connection. The
/// port is bound in the constructor; port 0 picks a free one.
class Server {
 public:
  Server(service::ShopService& service, const std::string& address, std::uint16_t port);
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  std::uint16_t port() const;
  void start();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace voxshop::http
