#include "cdp.hpp"

#include <boost/asio/connect.hpp>

#include "websynth/environment.hpp"

namespace websynth {

namespace beast = boost::beast;
namespace websocket = boost::beast::websocket;
using tcp = boost::asio::ip::tcp;

WsEndpoint parse_ws_url(const std::string& url) {
  const std::string prefix = "ws://";
  if (url.rfind(prefix, 0) != 0) throw EnvError(EnvErrorKind::kProtocolError, "not a ws:// url: " + url);
  auto rest = url.substr(prefix.size());
  auto slash = rest.find('/');
  auto authority = rest.substr(0, slash);
  WsEndpoint ep;
  ep.target = slash == std::string::npos ? "/" : rest.substr(slash);
  auto colon = authority.rfind(':');
  ep.host = authority.substr(0, colon);
  ep.port = colon == std::string::npos ? "80" : authority.substr(colon + 1);
  return ep;
}

CdpConnection::CdpConnection(const std::string& ws_url, std::chrono::milliseconds call_timeout)
    : ws_(ioc_), timeout_(call_timeout) {
  auto ep = parse_ws_url(ws_url);
  try {
    tcp::resolver resolver(ioc_);
    auto results = resolver.resolve(ep.host, ep.port);
    boost::asio::connect(ws_.next_layer(), results);
    ws_.set_option(websocket::stream_base::decorator(
        [](websocket::request_type& req) { req.set(beast::http::field::user_agent, "websynth"); }));
    ws_.read_message_max(256 * 1024 * 1024);
    ws_.handshake(ep.host + ":" + ep.port, ep.target);
  } catch (const boost::system::system_error& e) {
    throw EnvError(EnvErrorKind::kSessionLost, "cannot connect to " + ws_url + ": " + e.what());
  }
  open_ = true;
  start_read();
}

CdpConnection::~CdpConnection() { close(); }

void CdpConnection::start_read() {
  ws_.async_read(buffer_, [this](beast::error_code ec, std::size_t) {
    if (ec) {
      read_error_ = ec;
      return;
    }
    auto msg = nlohmann::json::parse(beast::buffers_to_string(buffer_.data()), nullptr, false);
    buffer_.consume(buffer_.size());
    if (!msg.is_discarded()) {
      if (msg.contains("id")) {
        replies_.push_back(std::move(msg));
      } else if (msg.contains("method")) {
        events_.push_back(std::move(msg));
      }
    }
    start_read();
  });
}

bool CdpConnection::pump_until(const std::function<bool()>& done,
                               std::chrono::steady_clock::time_point deadline) {
  while (!done()) {
    if (read_error_) {
      throw EnvError(EnvErrorKind::kSessionLost, "connection dropped: " + read_error_.message());
    }
    auto now = std::chrono::steady_clock::now();
    if (now >= deadline) return false;
    if (ioc_.stopped()) ioc_.restart();
    ioc_.run_one_for(deadline - now);
  }
  return true;
}

nlohmann::json CdpConnection::call(const std::string& method, const nlohmann::json& params,
                                   const std::string& session_id) {
  if (!open_) throw EnvError(EnvErrorKind::kSessionLost, "connection closed");
  const auto id = next_id_++;
  nlohmann::json msg = {{"id", id}, {"method", method}, {"params", params}};
  if (!session_id.empty()) msg["sessionId"] = session_id;
  try {
    ws_.text(true);
    ws_.write(boost::asio::buffer(msg.dump()));
  } catch (const boost::system::system_error& e) {
    throw EnvError(EnvErrorKind::kSessionLost, method + ": " + e.what());
  }
  std::optional<nlohmann::json> reply;
  auto take = [&] {
    for (auto it = replies_.begin(); it != replies_.end(); ++it) {
      if ((*it)["id"] == id) {
        reply = std::move(*it);
        replies_.erase(it);
        return true;
      }
    }
    return false;
  };
  if (!pump_until(take, std::chrono::steady_clock::now() + timeout_)) {
    throw EnvError(EnvErrorKind::kNavigationTimeout, method + " timed out");
  }
  if (reply->contains("error")) {
    throw EnvError(EnvErrorKind::kProtocolError, method + ": " + (*reply)["error"].dump());
  }
  return reply->value("result", nlohmann::json::object());
}

std::optional<nlohmann::json> CdpConnection::next_event(std::chrono::milliseconds wait) {
  pump_until([&] { return !events_.empty(); }, std::chrono::steady_clock::now() + wait);
  if (events_.empty()) return std::nullopt;
  auto e = std::move(events_.front());
  events_.pop_front();
  return e;
}

void CdpConnection::close() {
  if (!open_) return;
  open_ = false;
  beast::error_code ec;
  ws_.next_layer().shutdown(tcp::socket::shutdown_both, ec);
  ws_.next_layer().close(ec);
  // Let the pending read observe the closed socket so its handler is released.
  ioc_.restart();
  ioc_.poll();
}

}  // namespace websynth
