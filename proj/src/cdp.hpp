#pragma once

#include <chrono>
#include <deque>
#include <functional>
#include <memory>
#include <optional>
#include <string>

#include <boost/asio/io_context.hpp>
#include <boost/asio/ip/tcp.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>
#include <nlohmann/json.hpp>

namespace websynth {

// One WebSocket connection to a browser's remote-debugging endpoint.
// Not thread-safe; each session owns its own connection.
class CdpConnection {
 public:
  CdpConnection(const std::string& ws_url, std::chrono::milliseconds call_timeout);
  ~CdpConnection();
  CdpConnection(const CdpConnection&) = delete;
  CdpConnection& operator=(const CdpConnection&) = delete;

  // Sends a command and waits for its reply. Throws EnvError on protocol
  // errors, timeouts, or a dropped connection.
  nlohmann::json call(const std::string& method, const nlohmann::json& params = nlohmann::json::object(),
                      const std::string& session_id = {});

  // Pops buffered events, then waits up to `wait` for the next one.
  std::optional<nlohmann::json> next_event(std::chrono::milliseconds wait);

  void close();

 private:
  void start_read();
  bool pump_until(const std::function<bool()>& done, std::chrono::steady_clock::time_point deadline);

  boost::asio::io_context ioc_;
  boost::beast::websocket::stream<boost::asio::ip::tcp::socket> ws_;
  boost::beast::flat_buffer buffer_;
  std::deque<nlohmann::json> events_;
  std::deque<nlohmann::json> replies_;
  boost::system::error_code read_error_;
  std::chrono::milliseconds timeout_;
  std::uint64_t next_id_ = 1;
  bool open_ = false;
};

struct WsEndpoint {
  std::string host;
  std::string port;
  std::string target;
};

WsEndpoint parse_ws_url(const std::string& url);

}  // namespace websynth
