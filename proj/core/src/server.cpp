#include "ocv2/server.hpp"

#include <chrono>
#include <deque>
#include <map>
#include <thread>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>

namespace ocv2 {

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
using tcp = asio::ip::tcp;

namespace {

class WsSession;

// Live sockets per (session, seat). Only touched from the io thread.
struct Hub {
  std::map<std::pair<std::string, int>, std::weak_ptr<WsSession>> seats;
  void dispatch(const std::string& id, const std::vector<Outgoing>& msgs);
};

struct Shared {
  SessionManager manager;
  Hub hub;
  std::chrono::steady_clock::time_point epoch = std::chrono::steady_clock::now();

  explicit Shared(std::string replay_dir) : manager(std::move(replay_dir)) {}
  std::int64_t now_ms() const {
    return std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - epoch).count();
  }
};

class WsSession : public std::enable_shared_from_this<WsSession> {
 public:
  WsSession(tcp::socket socket, Shared& shared, std::string id, int seat)
      : ws_(std::move(socket)), shared_(shared), id_(std::move(id)), seat_(seat) {}

  void run(http::request<http::string_body> req) {
    ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
    ws_.async_accept(req, [self = shared_from_this()](beast::error_code ec) { self->on_accept(ec); });
  }

  void send(std::string text) {
    queue_.push_back(std::move(text));
    if (queue_.size() == 1) write_next();
  }

 private:
  void on_accept(beast::error_code ec) {
    if (ec) return;
    std::vector<Outgoing> msgs;
    try {
      msgs = shared_.manager.connect(id_, seat_, shared_.now_ms());
    } catch (const Error& e) {
      closing_ = true;
      send(Json{{"type", "error"}, {"reason", e.what()}}.dump());
      return;
    }
    joined_ = true;
    shared_.hub.seats[{id_, seat_}] = weak_from_this();
    shared_.hub.dispatch(id_, msgs);
    read();
  }

  void read() {
    ws_.async_read(buffer_, [self = shared_from_this()](beast::error_code ec, std::size_t) { self->on_read(ec); });
  }

  void on_read(beast::error_code ec) {
    if (ec) {
      leave();
      return;
    }
    const std::string text = beast::buffers_to_string(buffer_.data());
    buffer_.consume(buffer_.size());
    try {
      shared_.hub.dispatch(id_, shared_.manager.handle(id_, seat_, text, shared_.now_ms()));
    } catch (const std::exception& e) {
      send(Json{{"type", "error"}, {"reason", e.what()}}.dump());
    }
    read();
  }

  void write_next() {
    ws_.text(true);
    ws_.async_write(asio::buffer(queue_.front()), [self = shared_from_this()](beast::error_code ec, std::size_t) {
      self->queue_.pop_front();
      if (ec) {
        self->leave();
        return;
      }
      if (!self->queue_.empty()) {
        self->write_next();
      } else if (self->closing_) {
        self->ws_.async_close(websocket::close_code::policy_error, [self](beast::error_code) {});
      }
    });
  }

  void leave() {
    if (!joined_) return;
    joined_ = false;
    shared_.hub.seats.erase({id_, seat_});
    try {
      shared_.hub.dispatch(id_, shared_.manager.disconnect(id_, seat_, shared_.now_ms()));
    } catch (const Error&) {
    }
  }

  websocket::stream<beast::tcp_stream> ws_;
  beast::flat_buffer buffer_;
  Shared& shared_;
  std::string id_;
  int seat_;
  std::deque<std::string> queue_;
  bool joined_ = false;
  bool closing_ = false;
};

void Hub::dispatch(const std::string& id, const std::vector<Outgoing>& msgs) {
  for (const auto& m : msgs) {
    const auto it = seats.find({id, m.seat});
    if (it == seats.end()) continue;
    if (auto ws = it->second.lock()) ws->send(m.message.dump());
  }
}

std::vector<std::string> split_path(const std::string& path) {
  std::vector<std::string> parts;
  std::string cur;
  for (char c : path) {
    if (c == '/') {
      if (!cur.empty()) parts.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) parts.push_back(cur);
  return parts;
}

std::string query_param(const std::string& query, const std::string& key) {
  std::size_t pos = 0;
  while (pos <= query.size()) {
    const std::size_t end = std::min(query.find('&', pos), query.size());
    const std::string kv = query.substr(pos, end - pos);
    const std::size_t eq = kv.find('=');
    if (eq != std::string::npos && kv.substr(0, eq) == key) return kv.substr(eq + 1);
    pos = end + 1;
  }
  return {};
}

class HttpSession : public std::enable_shared_from_this<HttpSession> {
 public:
  HttpSession(tcp::socket socket, Shared& shared) : stream_(std::move(socket)), shared_(shared) {}

  void run() { read(); }

 private:
  void read() {
    req_ = {};
    stream_.expires_after(std::chrono::seconds(30));
    http::async_read(stream_, buffer_, req_,
                     [self = shared_from_this()](beast::error_code ec, std::size_t) { self->on_read(ec); });
  }

  void on_read(beast::error_code ec) {
    if (ec) {
      stream_.socket().shutdown(tcp::socket::shutdown_send, ec);
      return;
    }
    const std::string target(req_.target());
    const std::size_t q = target.find('?');
    const std::string path = target.substr(0, q);
    const std::string query = q == std::string::npos ? "" : target.substr(q + 1);
    const auto parts = split_path(path);

    if (websocket::is_upgrade(req_)) {
      if (parts.size() == 3 && parts[0] == "sessions" && parts[2] == "ws") {
        int seat = 0;
        try {
          const std::string s = query_param(query, "seat");
          seat = s.empty() ? 0 : std::stoi(s);
        } catch (const std::exception&) {
          seat = -1;
        }
        stream_.expires_never();
        std::make_shared<WsSession>(stream_.release_socket(), shared_, parts[1], seat)->run(std::move(req_));
        return;
      }
      respond(http::status::not_found, Json{{"error", "no websocket endpoint at " + path}}.dump());
      return;
    }
    route(parts);
  }

  void route(const std::vector<std::string>& parts) {
    const auto method = req_.method();
    if (method == http::verb::options) return respond(http::status::no_content, "");
    try {
      if (method == http::verb::get && parts.size() == 1 && parts[0] == "layouts") {
        return respond(http::status::ok, SessionManager::layouts_json().dump());
      }
      if (method == http::verb::get && parts.size() == 1 && parts[0] == "schema") {
        return respond(http::status::ok, SessionManager::schema_json().dump());
      }
      if (method == http::verb::post && parts.size() == 1 && parts[0] == "sessions") {
        Json body;
        try {
          body = req_.body().empty() ? Json::object() : Json::parse(req_.body());
        } catch (const nlohmann::json::exception&) {
          return respond(http::status::bad_request, Json{{"error", "request body is not JSON"}}.dump());
        }
        return respond(http::status::created, shared_.manager.create(body).dump());
      }
      if (method == http::verb::get && parts.size() == 2 && parts[0] == "sessions") {
        return respond(http::status::ok, shared_.manager.info(parts[1]).dump());
      }
      if (method == http::verb::get && parts.size() == 3 && parts[0] == "sessions" && parts[2] == "replay") {
        return respond(http::status::ok, shared_.manager.replay(parts[1]), "application/x-ndjson");
      }
    } catch (const Error& e) {
      const bool missing = std::string(e.what()).rfind("unknown session", 0) == 0;
      return respond(missing ? http::status::not_found : http::status::bad_request, Json{{"error", e.what()}}.dump());
    } catch (const std::exception& e) {
      return respond(http::status::internal_server_error, Json{{"error", e.what()}}.dump());
    }
    respond(http::status::not_found, Json{{"error", "not found"}}.dump());
  }

  void respond(http::status status, std::string body, const char* type = "application/json") {
    auto res = std::make_shared<http::response<http::string_body>>(status, req_.version());
    res->set(http::field::server, "ocv2");
    res->set(http::field::content_type, type);
    res->set(http::field::access_control_allow_origin, "*");
    res->set(http::field::access_control_allow_headers, "Content-Type");
    res->set(http::field::access_control_allow_methods, "GET, POST, OPTIONS");
    res->keep_alive(req_.keep_alive());
    res->body() = std::move(body);
    res->prepare_payload();
    http::async_write(stream_, *res, [self = shared_from_this(), res](beast::error_code ec, std::size_t) {
      if (ec) return;
      if (!res->keep_alive()) {
        self->stream_.socket().shutdown(tcp::socket::shutdown_send, ec);
        return;
      }
      self->read();
    });
  }

  beast::tcp_stream stream_;
  beast::flat_buffer buffer_;
  http::request<http::string_body> req_;
  Shared& shared_;
};

}  // namespace

struct Server::Impl {
  ServerOptions options;
  asio::io_context io{1};
  tcp::acceptor acceptor{io};
  asio::steady_timer timer{io};
  Shared shared;
  std::thread thread;

  explicit Impl(ServerOptions o) : options(std::move(o)), shared(options.replay_dir) {
    const tcp::endpoint ep(asio::ip::make_address(options.host), options.port);
    acceptor.open(ep.protocol());
    acceptor.set_option(asio::socket_base::reuse_address(true));
    acceptor.bind(ep);
    acceptor.listen();
    accept();
    schedule();
  }

  void accept() {
    acceptor.async_accept(asio::make_strand(io), [this](beast::error_code ec, tcp::socket socket) {
      if (ec) return;
      std::make_shared<HttpSession>(std::move(socket), shared)->run();
      accept();
    });
  }

  void schedule() {
    timer.expires_after(std::chrono::milliseconds(std::max(options.poll_ms, 1)));
    timer.async_wait([this](beast::error_code ec) {
      if (ec) return;
      for (auto& [id, msg] : shared.manager.poll(shared.now_ms())) shared.hub.dispatch(id, {msg});
      schedule();
    });
  }
};

Server::Server(ServerOptions options) {
  try {
    impl_ = std::make_unique<Impl>(std::move(options));
  } catch (const boost::system::system_error& e) {
    throw InvalidArgument(std::string("cannot listen: ") + e.what());
  }
}

Server::~Server() { stop(); }

unsigned short Server::port() const { return impl_->acceptor.local_endpoint().port(); }

SessionManager& Server::sessions() { return impl_->shared.manager; }

void Server::run() { impl_->io.run(); }

void Server::start() {
  impl_->thread = std::thread([this] { impl_->io.run(); });
}

void Server::stop() {
  if (!impl_) return;
  impl_->io.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace ocv2
