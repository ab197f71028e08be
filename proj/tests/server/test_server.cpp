#include <gtest/gtest.h>

#include <boost/asio/connect.hpp>
#include <boost/asio/ip/tcp.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>

#include "ocv2/server.hpp"

using namespace ocv2;
namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
using tcp = boost::asio::ip::tcp;

namespace {

class ServerTest : public ::testing::Test {
 protected:
  void SetUp() override {
    ServerOptions o;
    o.port = 0;
    o.poll_ms = 5;
    server_ = std::make_unique<Server>(o);
    server_->start();
  }
  void TearDown() override { server_->stop(); }

  http::response<http::string_body> request(http::verb verb, const std::string& target, const std::string& body = "") {
    boost::asio::io_context io;
    beast::tcp_stream stream(io);
    stream.connect(tcp::endpoint(boost::asio::ip::make_address("127.0.0.1"), server_->port()));
    http::request<http::string_body> req(verb, target, 11);
    req.set(http::field::host, "127.0.0.1");
    req.set(http::field::content_type, "application/json");
    req.body() = body;
    req.prepare_payload();
    http::write(stream, req);
    beast::flat_buffer buf;
    http::response<http::string_body> res;
    http::read(stream, buf, res);
    beast::error_code ec;
    stream.socket().shutdown(tcp::socket::shutdown_both, ec);
    return res;
  }

  struct Client {
    boost::asio::io_context io;
    websocket::stream<tcp::socket> ws{io};

    Client(unsigned short port, const std::string& target) {
      ws.next_layer().connect(tcp::endpoint(boost::asio::ip::make_address("127.0.0.1"), port));
      ws.handshake("127.0.0.1", target);
    }
    Json recv() {
      beast::flat_buffer buf;
      ws.read(buf);
      return Json::parse(beast::buffers_to_string(buf.data()));
    }
    void send(const Json& j) { ws.write(boost::asio::buffer(j.dump())); }
  };

  std::string create(const Json& req) {
    const auto res = request(http::verb::post, "/sessions", req.dump());
    EXPECT_EQ(res.result(), http::status::created) << res.body();
    return Json::parse(res.body()).at("id");
  }

  std::unique_ptr<Server> server_;
};

}  // namespace

TEST_F(ServerTest, HttpRoutes) {
  auto res = request(http::verb::get, "/layouts");
  EXPECT_EQ(res.result(), http::status::ok);
  EXPECT_EQ(res[http::field::access_control_allow_origin], "*");
  EXPECT_EQ(Json::parse(res.body()).size(), builtin_names().size());
  EXPECT_EQ(Json::parse(request(http::verb::get, "/schema").body()).at("frame").at("schema"), "ocv2.frame");
  EXPECT_EQ(request(http::verb::get, "/nowhere").result(), http::status::not_found);
  EXPECT_EQ(request(http::verb::get, "/sessions/zzz").result(), http::status::not_found);
  EXPECT_EQ(request(http::verb::post, "/sessions", "{not json").result(), http::status::bad_request);
  EXPECT_EQ(request(http::verb::post, "/sessions", R"({"layout":"atlantis"})").result(), http::status::bad_request);
  EXPECT_EQ(request(http::verb::options, "/sessions").result(), http::status::no_content);

  const std::string id = create(Json{{"layout", "cramped_room"}});
  const Json info = Json::parse(request(http::verb::get, "/sessions/" + id).body());
  EXPECT_EQ(info.at("status"), "waiting");
}

TEST_F(ServerTest, WebSocketPlaysAndReplayVerifies) {
  const std::string id = create(Json{{"layout", "cramped_room"}, {"seats", {"human", "greedy"}}, {"seed", 3}});
  Client c(server_->port(), "/sessions/" + id + "/ws?seat=0");
  Json first = c.recv();
  EXPECT_EQ(first.at("type"), "frame");
  EXPECT_EQ(first.at("status"), "running");
  for (int k = 0; k < 5; ++k) {
    c.send(Json{{"type", "act"}, {"action", k % 2 ? "interact" : "left"}});
    const Json f = c.recv();
    EXPECT_EQ(f.at("frame").at("t"), k + 1);
  }
  c.send(Json{{"type", "act"}, {"action", "fly"}});
  EXPECT_EQ(c.recv().at("type"), "error");

  const auto res = request(http::verb::get, "/sessions/" + id + "/replay");
  EXPECT_EQ(res.result(), http::status::ok);
  const VerifyResult v = verify_replay_text(res.body());
  EXPECT_TRUE(v.ok) << v.message;
  EXPECT_EQ(replay_from_string(res.body()).size(), 5u);
  c.ws.close(websocket::close_code::normal);
}

TEST_F(ServerTest, TwoHumansLockStep) {
  const std::string id = create(Json{{"layout", "cramped_room"}, {"seats", {"human", "human"}}});
  Client a(server_->port(), "/sessions/" + id + "/ws?seat=0");
  EXPECT_EQ(a.recv().at("status"), "waiting");
  Client b(server_->port(), "/sessions/" + id + "/ws?seat=1");
  EXPECT_EQ(a.recv().at("status"), "running");
  EXPECT_EQ(b.recv().at("status"), "running");
  a.send(Json{{"type", "act"}, {"action", "up"}});
  a.send(Json{{"type", "act"}, {"action", "up"}});
  EXPECT_EQ(a.recv().at("reason"), "awaiting tick");
  b.send(Json{{"type", "act"}, {"action", "stay"}});
  EXPECT_EQ(a.recv().at("frame").at("t"), 1);
  EXPECT_EQ(b.recv().at("frame").at("t"), 1);

  b.ws.close(websocket::close_code::normal);
  EXPECT_EQ(a.recv().at("status"), "paused");
  a.ws.close(websocket::close_code::normal);
}

TEST_F(ServerTest, SeatErrorsCloseSocket) {
  const std::string id = create(Json{{"layout", "cramped_room"}});
  Client c(server_->port(), "/sessions/" + id + "/ws?seat=1");
  const Json e = c.recv();
  EXPECT_EQ(e.at("type"), "error");
  EXPECT_NE(e.at("reason").get<std::string>().find("policy seat"), std::string::npos);
}

TEST(Server, BusyPortIsReported) {
  ServerOptions o;
  o.port = 0;
  Server first(o);
  o.port = first.port();
  EXPECT_THROW(Server second(o), InvalidArgument);
}
