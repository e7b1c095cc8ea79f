#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "dtmfdrive/session.hpp"

namespace dtmfdrive::server {

namespace detail {
struct ServerCore;
}

// One uninterrupted run of the simulator: from connect, reset or
// set_config until the next of those or until the client leaves.
struct SessionLog {
  session::SimulationConfig config;
  std::vector<session::KeyChange> changes;
  std::int64_t ticks = 0;
  std::string trace_csv;
};

struct ServeOptions {
  std::string address = "127.0.0.1";
  unsigned short port = 8080;  // 0 picks an ephemeral port
  session::SimulationConfig defaults;
  int frame_every_ticks = 4;
  double speed = 1.0;      // simulated time per wall-clock time
  std::string static_dir;  // served over plain HTTP GET when set
  std::string log_dir;     // session-N.json / session-N.csv when set
  std::function<void(const SessionLog&)> on_session_end;
};

// WebSocket teleoperation endpoint. The listening socket is bound by the
// constructor; run() blocks until stop() is called from any thread.
class Server {
 public:
  explicit Server(ServeOptions options);
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  unsigned short port() const;
  void run();
  void stop();

 private:
  std::unique_ptr<detail::ServerCore> impl_;
};

}  // namespace dtmfdrive::server
