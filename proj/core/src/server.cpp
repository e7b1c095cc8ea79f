#include "dtmfdrive/server.hpp"

#include <chrono>
#include <deque>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string_view>
#include <utility>

#include <boost/asio.hpp>
#include <boost/beast.hpp>
#include <boost/beast/websocket.hpp>
#include <nlohmann/json.hpp>

#include "dtmfdrive/error.hpp"

namespace dtmfdrive::server {

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
using tcp = asio::ip::tcp;
using json = nlohmann::json;

namespace {

std::string error_message(std::string_view code) {
  return json{{"type", "error"}, {"code", code}}.dump();
}

std::string_view mime_type(const std::filesystem::path& path) {
  const auto ext = path.extension().string();
  if (ext == ".html" || ext == ".htm") return "text/html";
  if (ext == ".js" || ext == ".mjs") return "text/javascript";
  if (ext == ".css") return "text/css";
  if (ext == ".json") return "application/json";
  if (ext == ".svg") return "image/svg+xml";
  if (ext == ".png") return "image/png";
  if (ext == ".ico") return "image/x-icon";
  return "application/octet-stream";
}

// Client messages after parsing; validated enough to be applied blindly
// except for set_config, whose result depends on the config at apply time.
struct Command {
  enum class Kind { key_down, key_up, reset, set_config } kind;
  std::optional<signal::DtmfKey> key;
  json config;
};

}  // namespace

class WsSession;

struct detail::ServerCore {
  explicit ServerCore(ServeOptions opts);

  void accept();
  void on_upgrade(tcp::socket socket, http::request<http::string_body> req);
  void attach(const std::shared_ptr<WsSession>& ws);
  void detach(const WsSession* ws);
  std::optional<std::string> receive(std::string_view text);
  void start_epoch();
  void end_epoch();
  void schedule_tick();
  void tick();

  ServeOptions opts;
  asio::io_context ioc{1};
  tcp::acceptor acceptor{ioc};
  asio::steady_timer timer{ioc};
  std::chrono::steady_clock::time_point next_tick;
  std::chrono::nanoseconds period{};

  std::shared_ptr<WsSession> active;
  std::deque<Command> queue;
  session::SimulationConfig config;
  std::optional<session::Simulator> sim;
  std::optional<signal::DtmfKey> held;
  std::vector<session::KeyChange> changes;
  std::string trace;
  std::int64_t answered_frames = 0;
  int epoch = 0;
};

class WsSession : public std::enable_shared_from_this<WsSession> {
 public:
  WsSession(tcp::socket socket, detail::ServerCore& server, bool busy)
      : ws_(std::move(socket)), server_(server), busy_(busy) {}

  void start(http::request<http::string_body> req) {
    ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
    ws_.async_accept(req, [self = shared_from_this()](beast::error_code ec) {
      if (ec) return self->finish();
      if (self->busy_) {
        self->send(error_message("busy"));
        self->closing_ = true;
        return;
      }
      self->server_.attach(self);
      self->read();
    });
  }

  void send(std::string text) {
    if (closed_) return;
    // A client that stops reading loses state frames rather than stalling
    // the tick loop.
    if (outbox_.size() > 64) return;
    outbox_.push_back(std::move(text));
    if (outbox_.size() == 1) write_next();
  }

  void close() {
    if (closed_) return;
    closing_ = true;
    if (outbox_.empty()) do_close();
  }

 private:
  void read() {
    ws_.async_read(buffer_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
      if (ec) return self->finish();
      const auto text = beast::buffers_to_string(self->buffer_.data());
      self->buffer_.consume(self->buffer_.size());
      if (auto err = self->server_.receive(text)) self->send(*err);
      self->read();
    });
  }

  void write_next() {
    ws_.text(true);
    ws_.async_write(asio::buffer(outbox_.front()),
                    [self = shared_from_this()](beast::error_code ec, std::size_t) {
                      if (ec) return self->finish();
                      self->outbox_.pop_front();
                      if (!self->outbox_.empty()) {
                        self->write_next();
                      } else if (self->closing_) {
                        self->do_close();
                      }
                    });
  }

  void do_close() {
    closed_ = true;
    ws_.async_close(websocket::close_code::normal,
                    [self = shared_from_this()](beast::error_code) { self->finish(); });
  }

  void finish() {
    closed_ = true;
    outbox_.clear();
    server_.detach(this);
  }

  websocket::stream<beast::tcp_stream> ws_;
  beast::flat_buffer buffer_;
  detail::ServerCore& server_;
  std::deque<std::string> outbox_;
  bool busy_;
  bool closing_ = false;
  bool closed_ = false;
};

// Plain HTTP: either hands the socket to a WebSocket session or serves one
// static file and closes.
class HttpSession : public std::enable_shared_from_this<HttpSession> {
 public:
  HttpSession(tcp::socket socket, detail::ServerCore& server)
      : stream_(std::move(socket)), server_(server) {}

  void start() {
    stream_.expires_after(std::chrono::seconds(30));
    http::async_read(stream_, buffer_, req_,
                     [self = shared_from_this()](beast::error_code ec, std::size_t) {
                       if (!ec) self->handle();
                     });
  }

 private:
  void handle() {
    if (websocket::is_upgrade(req_)) {
      stream_.expires_never();
      server_.on_upgrade(stream_.release_socket(), std::move(req_));
      return;
    }
    if (req_.method() != http::verb::get && req_.method() != http::verb::head) {
      return reply_text(http::status::method_not_allowed, "method not allowed\n");
    }
    if (server_.opts.static_dir.empty()) {
      return reply_text(http::status::ok, "dtmfdrive live service; connect with a WebSocket\n");
    }
    std::string target(req_.target());
    target = target.substr(0, target.find('?'));
    if (target.empty() || target.front() != '/' || target.find("..") != std::string::npos) {
      return reply_text(http::status::bad_request, "bad path\n");
    }
    if (target.back() == '/') target += "index.html";
    const auto path = std::filesystem::path(server_.opts.static_dir) / target.substr(1);

    beast::error_code ec;
    http::file_body::value_type body;
    body.open(path.string().c_str(), beast::file_mode::scan, ec);
    if (ec) return reply_text(http::status::not_found, "not found\n");
    const auto size = body.size();
    auto res = std::make_shared<http::response<http::file_body>>(
        std::piecewise_construct, std::make_tuple(std::move(body)),
        std::make_tuple(http::status::ok, req_.version()));
    res->set(http::field::content_type, std::string(mime_type(path)));
    res->content_length(size);
    res->keep_alive(false);
    http::async_write(stream_, *res,
                      [self = shared_from_this(), res](beast::error_code, std::size_t) {
                        self->stream_.socket().shutdown(tcp::socket::shutdown_send);
                      });
  }

  void reply_text(http::status status, std::string text) {
    auto res = std::make_shared<http::response<http::string_body>>(status, req_.version());
    res->set(http::field::content_type, "text/plain");
    res->body() = std::move(text);
    res->prepare_payload();
    res->keep_alive(false);
    http::async_write(stream_, *res,
                      [self = shared_from_this(), res](beast::error_code, std::size_t) {
                        self->stream_.socket().shutdown(tcp::socket::shutdown_send);
                      });
  }

  beast::tcp_stream stream_;
  beast::flat_buffer buffer_;
  http::request<http::string_body> req_;
  detail::ServerCore& server_;
};

detail::ServerCore::ServerCore(ServeOptions o) : opts(std::move(o)), config(opts.defaults) {
  config.validate();
  if (opts.frame_every_ticks < 1) throw ConfigError("frame cadence must be at least one tick");
  if (!(opts.speed > 0.0)) throw ConfigError("speed must be positive");

  beast::error_code ec;
  const auto addr = asio::ip::make_address(opts.address, ec);
  if (ec) throw ConfigError("bad bind address '" + opts.address + "'");
  const tcp::endpoint endpoint(addr, opts.port);
  acceptor.open(endpoint.protocol());
  acceptor.set_option(asio::socket_base::reuse_address(true));
  acceptor.bind(endpoint, ec);
  if (ec) throw ConfigError("cannot bind " + opts.address + ":" + std::to_string(opts.port) + ": " +
                            ec.message());
  acceptor.listen();
}

void detail::ServerCore::accept() {
  acceptor.async_accept([this](beast::error_code ec, tcp::socket socket) {
    if (ec) return;  // acceptor closed
    std::make_shared<HttpSession>(std::move(socket), *this)->start();
    accept();
  });
}

void detail::ServerCore::on_upgrade(tcp::socket socket, http::request<http::string_body> req) {
  std::make_shared<WsSession>(std::move(socket), *this, active != nullptr)->start(std::move(req));
}

void detail::ServerCore::attach(const std::shared_ptr<WsSession>& ws) {
  if (active) {
    ws->send(error_message("busy"));
    ws->close();
    return;
  }
  active = ws;
  start_epoch();
  period = std::chrono::duration_cast<std::chrono::nanoseconds>(
      std::chrono::duration<double, std::milli>(config.tick_ms() / opts.speed));
  next_tick = std::chrono::steady_clock::now();
  schedule_tick();
}

void detail::ServerCore::detach(const WsSession* ws) {
  if (active.get() != ws) return;
  timer.cancel();
  end_epoch();
  active.reset();
  queue.clear();
  config = opts.defaults;
}

std::optional<std::string> detail::ServerCore::receive(std::string_view text) {
  const auto doc = json::parse(text, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) return error_message("bad_message");
  const auto type = doc.find("type");
  if (type == doc.end() || !type->is_string()) return error_message("bad_message");
  const auto& name = type->get_ref<const std::string&>();

  if (name == "key_down") {
    const auto key = doc.find("key");
    if (key == doc.end() || !key->is_string()) return error_message("bad_key");
    const auto& s = key->get_ref<const std::string&>();
    const auto parsed = s.size() == 1 ? signal::DtmfKey::from_symbol(s[0]) : std::nullopt;
    if (!parsed) return error_message("bad_key");
    queue.push_back({Command::Kind::key_down, parsed, {}});
  } else if (name == "key_up") {
    queue.push_back({Command::Kind::key_up, std::nullopt, {}});
  } else if (name == "reset") {
    queue.push_back({Command::Kind::reset, std::nullopt, {}});
  } else if (name == "set_config") {
    queue.push_back({Command::Kind::set_config, std::nullopt, doc});
  } else {
    return error_message("bad_message");
  }
  return std::nullopt;
}

void detail::ServerCore::start_epoch() {
  sim.emplace(config);
  held.reset();
  changes.clear();
  trace.assign(session::kTraceHeader);
  trace += '\n';
  answered_frames = 0;
}

void detail::ServerCore::end_epoch() {
  if (!sim) return;
  SessionLog log{config, std::move(changes), sim->ticks(), std::move(trace)};
  sim.reset();
  ++epoch;
  if (!opts.log_dir.empty()) {
    const auto base = std::filesystem::path(opts.log_dir) / ("session-" + std::to_string(epoch));
    std::ofstream(base.string() + ".json")
        << session::to_json(session::replay_scenario(log.config, log.changes, log.ticks)).dump(2)
        << '\n';
    std::ofstream(base.string() + ".csv", std::ios::binary) << log.trace_csv;
  }
  if (opts.on_session_end) opts.on_session_end(log);
}

void detail::ServerCore::schedule_tick() {
  next_tick += period;
  timer.expires_at(next_tick);
  timer.async_wait([this](beast::error_code ec) {
    if (ec || !active) return;
    tick();
    schedule_tick();
  });
}

void detail::ServerCore::tick() {
  auto desired = held;
  while (!queue.empty()) {
    auto cmd = std::move(queue.front());
    queue.pop_front();
    switch (cmd.kind) {
      case Command::Kind::key_down:
        desired = cmd.key;
        break;
      case Command::Kind::key_up:
        desired.reset();
        break;
      case Command::Kind::reset:
        end_epoch();
        start_epoch();
        desired.reset();
        break;
      case Command::Kind::set_config: {
        auto next = config;
        try {
          session::apply_config_overrides(next, cmd.config);
          next.validate();
        } catch (const Error&) {
          active->send(error_message("bad_config"));
          break;
        }
        end_epoch();
        config = next;
        start_epoch();
        desired.reset();
        break;
      }
    }
  }
  if (desired != held) {
    changes.push_back({sim->ticks(), desired});
    held = desired;
  }

  const auto frame = sim->tick(held);
  trace += session::trace_row(frame.record);
  trace += '\n';
  if (frame.record.call == session::CallState::answered &&
      answered_frames++ % opts.frame_every_ticks == 0) {
    active->send(session::state_message(frame).dump());
  }
}

Server::Server(ServeOptions options) : impl_(std::make_unique<detail::ServerCore>(std::move(options))) {}

Server::~Server() = default;

unsigned short Server::port() const { return impl_->acceptor.local_endpoint().port(); }

void Server::run() {
  impl_->accept();
  impl_->ioc.run();
}

void Server::stop() {
  asio::post(impl_->ioc, [impl = impl_.get()] {
    beast::error_code ec;
    impl->acceptor.close(ec);
    impl->timer.cancel();
    if (impl->active) impl->detach(impl->active.get());
    impl->ioc.stop();
  });
}

}  // namespace dtmfdrive::server
