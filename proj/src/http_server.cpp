#include "voxshop/http_server.hpp"

#include <sys/socket.h>

#include <atomic>
#include <charconv>
#include <list>
#include <mutex>
#include <thread>

#include <boost/asio/ip/tcp.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>
#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "voxshop/json_util.hpp"

namespace voxshop::http {

namespace beast = boost::beast;
namespace bhttp = boost::beast::http;
namespace websocket = boost::beast::websocket;
namespace net = boost::asio;
using tcp = net::ip::tcp;

namespace {

std::string_view sv(beast::string_view s) { return {s.data(), s.size()}; }

std::vector<std::string_view> split_path(std::string_view path) {
  std::vector<std::string_view> parts;
  while (!path.empty()) {
    if (path.front() == '/') {
      path.remove_prefix(1);
      continue;
    }
    std::size_t slash = path.find('/');
    parts.push_back(path.substr(0, slash));
    path = slash == std::string_view::npos ? std::string_view{} : path.substr(slash);
  }
  return parts;
}

std::optional<std::string> query_param(std::string_view query, std::string_view key) {
  while (!query.empty()) {
    std::size_t amp = query.find('&');
    std::string_view pair = query.substr(0, amp);
    query = amp == std::string_view::npos ? std::string_view{} : query.substr(amp + 1);
    std::size_t eq = pair.find('=');
    if (percent_decode(pair.substr(0, eq)) == key) {
      return eq == std::string_view::npos ? std::string() : percent_decode(pair.substr(eq + 1));
    }
  }
  return std::nullopt;
}

Reply error_reply(ErrorCode code, std::string_view message) {
  return {status_for(code), service::error_json(code, message)};
}

Reply dispatch(service::ShopService& svc, std::string_view method, std::string_view path, std::string_view query,
               std::string_view body) {
  auto parts = split_path(path);
  auto no_route = [&] { return error_reply(ErrorCode::kNotFound, fmt::format("no route for {} {}", method, path)); };

  if (parts.size() == 1 && parts[0] == "health") {
    return method == "GET" ? Reply{200, svc.health()} : no_route();
  }
  if (parts.empty() || parts[0] != "api") return no_route();

  if (parts.size() >= 2 && parts[1] == "sessions") {
    if (parts.size() == 2 && method == "POST") return {201, {{"session_id", svc.create_session()}}};
    if (parts.size() == 4 && parts[3] == "events" && method == "POST") {
      std::string id = percent_decode(parts[2]);
      // Unknown session wins over a malformed body.
      svc.session(id);
      auto doc = json_util::parse(body, "request body");
      return {200, service::to_json(svc.ingest_json(id, doc))};
    }
    if (parts.size() == 4 && parts[3] == "state" && method == "GET") {
      return {200, svc.get_state(percent_decode(parts[2]))};
    }
    return no_route();
  }

  if (parts.size() >= 2 && parts[1] == "products" && method == "GET") {
    if (parts.size() == 3) return {200, svc.get_product(percent_decode(parts[2]))};
    if (parts.size() != 2) return no_route();
    std::string q = query_param(query, "q").value_or("");
    std::size_t page = 0;
    if (auto p = query_param(query, "page"); p && !p->empty()) {
      auto [end, ec] = std::from_chars(p->data(), p->data() + p->size(), page);
      if (ec != std::errc() || end != p->data() + p->size()) {
        json_util::schema_error("page", "expected a non-negative integer");
      }
    }
    return {200, svc.search_products(q, page)};
  }
  return no_route();
}

}  // namespace

unsigned status_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kNotFound: return 404;
    case ErrorCode::kOrdering: return 409;
    case ErrorCode::kConflict: return 409;
    case ErrorCode::kSchema: return 400;
    case ErrorCode::kRejected: return 413;
    case ErrorCode::kUndefinedMetric: return 422;
    case ErrorCode::kInvalidGrammar:
    case ErrorCode::kContractViolation:
    case ErrorCode::kIo: return 500;
  }
  return 500;
}

std::string percent_decode(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '+') {
      out += ' ';
    } else if (s[i] == '%' && i + 2 < s.size()) {
      unsigned v = 0;
      auto [end, ec] = std::from_chars(s.data() + i + 1, s.data() + i + 3, v, 16);
      if (ec == std::errc() && end == s.data() + i + 3) {
        out += static_cast<char>(v);
        i += 2;
      } else {
        out += '%';
      }
    } else {
      out += s[i];
    }
  }
  return out;
}

Reply route(service::ShopService& svc, std::string_view method, std::string_view target, std::string_view body) {
  std::size_t qmark = target.find('?');
  std::string_view path = target.substr(0, qmark);
  std::string_view query = qmark == std::string_view::npos ? std::string_view{} : target.substr(qmark + 1);
  try {
    return dispatch(svc, method, path, query, body);
  } catch (const Error& e) {
    return error_reply(e.code(), e.what());
  }
}

std::optional<std::string> stream_session(std::string_view target) {
  auto parts = split_path(target.substr(0, target.find('?')));
  if (parts.size() == 4 && parts[0] == "api" && parts[1] == "sessions" && parts[3] == "stream") {
    return percent_decode(parts[2]);
  }
  return std::nullopt;
}

nlohmann::ordered_json stream_reply(service::ShopService& svc, const std::string& session_id,
                                    std::string_view message) {
  try {
    auto doc = json_util::parse(message, "message");
    return service::to_json(svc.ingest_json(session_id, doc));
  } catch (const Error& e) {
    return service::error_json(e.code(), e.what());
  }
}

struct Server::Impl {
  struct Connection {
    std::thread thread;
    int fd = -1;
    std::atomic<bool> done{false};
  };

  service::ShopService& svc;
  net::io_context ioc;
  tcp::acceptor acceptor;
  std::thread accept_thread;
  std::atomic<bool> stopping{false};
  std::mutex mutex;
  std::list<Connection> connections;

  Impl(service::ShopService& s, const std::string& address, std::uint16_t port) : svc(s), acceptor(ioc) {
    beast::error_code ec;
    auto addr = net::ip::make_address(address, ec);
    if (ec) throw Error(ErrorCode::kIo, fmt::format("bad listen address '{}'", address));
    tcp::endpoint ep(addr, port);
    acceptor.open(ep.protocol(), ec);
    if (!ec) acceptor.set_option(net::socket_base::reuse_address(true), ec);
    if (!ec) acceptor.bind(ep, ec);
    if (!ec) acceptor.listen(net::socket_base::max_listen_connections, ec);
    if (ec) throw Error(ErrorCode::kIo, fmt::format("cannot listen on {}:{}: {}", address, port, ec.message()));
  }

  void reap() {
    std::lock_guard lock(mutex);
    for (auto it = connections.begin(); it != connections.end();) {
      if (it->done) {
        it->thread.join();
        it = connections.erase(it);
      } else {
        ++it;
      }
    }
  }

  void accept_loop() {
    while (!stopping) {
      tcp::socket socket(ioc);
      beast::error_code ec;
      acceptor.accept(socket, ec);
      if (stopping) break;
      if (ec) {
        spdlog::warn("accept failed: {}", ec.message());
        continue;
      }
      reap();
      std::lock_guard lock(mutex);
      auto& conn = connections.emplace_back();
      conn.fd = socket.native_handle();
      conn.thread = std::thread([this, &conn, s = std::move(socket)]() mutable {
        serve(std::move(s));
        conn.done = true;
      });
    }
  }

  void serve(tcp::socket socket) {
    beast::flat_buffer buffer;
    beast::error_code ec;
    for (;;) {
      bhttp::request<bhttp::string_body> req;
      bhttp::read(socket, buffer, req, ec);
      if (ec) return;

      if (websocket::is_upgrade(req)) {
        auto id = stream_session(sv(req.target()));
        bool known = false;
        if (id) {
          try {
            svc.session(*id);
            known = true;
          } catch (const Error&) {
          }
        }
        if (known) {
          stream(std::move(socket), req, *id);
          return;
        }
        Reply r = error_reply(ErrorCode::kNotFound, "no streaming session at this path");
        write(socket, req, r, ec);
        return;
      }

      if (req.method() == bhttp::verb::options) {
        bhttp::response<bhttp::string_body> res{bhttp::status::no_content, req.version()};
        cors(res);
        res.keep_alive(req.keep_alive());
        bhttp::write(socket, res, ec);
      } else {
        Reply r = route(svc, sv(req.method_string()), sv(req.target()), req.body());
        spdlog::debug("{} {} -> {}", sv(req.method_string()), sv(req.target()), r.status);
        write(socket, req, r, ec);
      }
      if (ec || !req.keep_alive()) break;
    }
    socket.shutdown(tcp::socket::shutdown_send, ec);
  }

  template <class Res>
  static void cors(Res& res) {
    res.set(bhttp::field::access_control_allow_origin, "*");
    res.set(bhttp::field::access_control_allow_methods, "GET, POST, OPTIONS");
    res.set(bhttp::field::access_control_allow_headers, "Content-Type");
  }

  static void write(tcp::socket& socket, const bhttp::request<bhttp::string_body>& req, const Reply& r,
                    beast::error_code& ec) {
    bhttp::response<bhttp::string_body> res{static_cast<bhttp::status>(r.status), req.version()};
    res.set(bhttp::field::content_type, "application/json");
    cors(res);
    res.keep_alive(req.keep_alive());
    res.body() = r.body.dump();
    res.prepare_payload();
    bhttp::write(socket, res, ec);
  }

  void stream(tcp::socket socket, const bhttp::request<bhttp::string_body>& req, const std::string& id) {
    websocket::stream<tcp::socket> ws(std::move(socket));
    beast::error_code ec;
    ws.accept(req, ec);
    if (ec) return;
    for (;;) {
      beast::flat_buffer buffer;
      ws.read(buffer, ec);
      if (ec) return;
      std::string reply = stream_reply(svc, id, beast::buffers_to_string(buffer.data())).dump();
      ws.text(true);
      ws.write(net::buffer(reply), ec);
      if (ec) return;
    }
  }
};

Server::Server(service::ShopService& service, const std::string& address, std::uint16_t port)
    : impl_(std::make_unique<Impl>(service, address, port)) {}

Server::~Server() { stop(); }

std::uint16_t Server::port() const { return impl_->acceptor.local_endpoint().port(); }

void Server::start() {
  if (impl_->accept_thread.joinable()) return;
  impl_->accept_thread = std::thread([this] { impl_->accept_loop(); });
}

void Server::stop() {
  if (impl_->stopping.exchange(true)) return;
  // shutdown(2) wakes threads blocked in accept/read on these descriptors.
  ::shutdown(impl_->acceptor.native_handle(), SHUT_RDWR);
  if (impl_->accept_thread.joinable()) impl_->accept_thread.join();
  std::lock_guard lock(impl_->mutex);
  for (auto& c : impl_->connections) ::shutdown(c.fd, SHUT_RDWR);
  for (auto& c : impl_->connections) c.thread.join();
  impl_->connections.clear();
  beast::error_code ec;
  impl_->acceptor.close(ec);
}

}  // namespace voxshop::http
