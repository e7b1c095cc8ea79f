#pragma once

// In-process live server plus a blocking WebSocket client for tests.

#include <chrono>
#include <condition_variable>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include <boost/asio/connect.hpp>
#include <boost/asio/ip/tcp.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>
#include <nlohmann/json.hpp>

#include "dtmfdrive/server.hpp"

namespace live {

namespace asio = boost::asio;
namespace beast = boost::beast;
using tcp = asio::ip::tcp;

class Harness {
 public:
  explicit Harness(dtmfdrive::server::ServeOptions opts) {
    opts.port = 0;
    opts.on_session_end = [this](const dtmfdrive::server::SessionLog& log) {
      std::lock_guard lock(mu_);
      logs_.push_back(log);
      cv_.notify_all();
    };
    server_ = std::make_unique<dtmfdrive::server::Server>(std::move(opts));
    thread_ = std::thread([this] { server_->run(); });
  }

  ~Harness() {
    server_->stop();
    thread_.join();
  }

  unsigned short port() const { return server_->port(); }

  // Blocks until at least n sessions have ended, or the timeout passes.
  std::vector<dtmfdrive::server::SessionLog> wait_logs(std::size_t n,
                                                       std::chrono::milliseconds timeout = std::chrono::seconds(10)) {
    std::unique_lock lock(mu_);
    cv_.wait_for(lock, timeout, [&] { return logs_.size() >= n; });
    return logs_;
  }

 private:
  std::unique_ptr<dtmfdrive::server::Server> server_;
  std::thread thread_;
  std::mutex mu_;
  std::condition_variable cv_;
  std::vector<dtmfdrive::server::SessionLog> logs_;
};

class Client {
 public:
  explicit Client(unsigned short port) : ws_(ioc_) {
    tcp::resolver resolver(ioc_);
    asio::connect(ws_.next_layer(), resolver.resolve("127.0.0.1", std::to_string(port)));
    ws_.handshake("127.0.0.1", "/");
  }

  void send(const nlohmann::json& msg) { send_text(msg.dump()); }
  void send_text(const std::string& text) {
    ws_.text(true);
    ws_.write(asio::buffer(text));
  }

  nlohmann::json read() {
    beast::flat_buffer buf;
    ws_.read(buf);
    return nlohmann::json::parse(beast::buffers_to_string(buf.data()));
  }

  // Next message of the given type, skipping others.
  nlohmann::json read_type(const std::string& type) {
    for (;;) {
      auto msg = read();
      if (msg.value("type", "") == type) return msg;
    }
  }

  // True when the server has closed the connection.
  bool closed_by_peer() {
    beast::flat_buffer buf;
    beast::error_code ec;
    ws_.read(buf, ec);
    return ec == beast::websocket::error::closed || ec == asio::error::eof ||
           ec == asio::error::connection_reset;
  }

  void close() {
    beast::error_code ec;
    ws_.close(beast::websocket::close_code::normal, ec);
  }

 private:
  asio::io_context ioc_;
  beast::websocket::stream<tcp::socket> ws_;
};

struct HttpReply {
  unsigned status;
  std::string body;
};

inline HttpReply http_get(unsigned short port, const std::string& target) {
  asio::io_context ioc;
  tcp::socket sock(ioc);
  tcp::resolver resolver(ioc);
  asio::connect(sock, resolver.resolve("127.0.0.1", std::to_string(port)));
  beast::http::request<beast::http::empty_body> req(beast::http::verb::get, target, 11);
  req.set(beast::http::field::host, "127.0.0.1");
  beast::http::write(sock, req);
  beast::flat_buffer buf;
  beast::http::response<beast::http::string_body> res;
  beast::http::read(sock, buf, res);
  return {res.result_int(), res.body()};
}

}  // namespace live
