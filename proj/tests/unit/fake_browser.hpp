#pragma once

// In-process stand-in for a browser's remote-debugging endpoint. Pages come
// from a fixture site; clicks are hit-tested against element boxes and follow
// hrefs or the manifest's transitions, which play the role of page scripts.

#include <algorithm>
#include <atomic>
#include <map>
#include <memory>
#include <mutex>
#include <set>
#include <thread>
#include <vector>

#include <boost/asio/ip/tcp.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>
#include <nlohmann/json.hpp>

#include "websynth/environment.hpp"
#include "websynth/url.hpp"
#include "websynth/util.hpp"

namespace websynth::testkit {

class FakeBrowser {
 public:
  explicit FakeBrowser(std::shared_ptr<const FixtureSite> site)
      : site_(std::move(site)), acceptor_(ioc_, {boost::asio::ip::address_v4::loopback(), 0}) {
    acceptor_.non_blocking(true);
    port_ = acceptor_.local_endpoint().port();
    accept_thread_ = std::thread([this] { accept_loop(); });
  }

  ~FakeBrowser() { stop(); }

  void stop() {
    if (stopping_.exchange(true)) return;
    accept_thread_.join();
    drop_connections();
    std::vector<std::thread> threads;
    {
      std::lock_guard lock(mu_);
      threads.swap(conn_threads_);
    }
    for (auto& t : threads) t.join();
  }

  // Closes every open connection from the browser side.
  void drop_connections() {
    std::lock_guard lock(mu_);
    for (auto& s : sockets_) {
      boost::system::error_code ec;
      s->shutdown(boost::asio::ip::tcp::socket::shutdown_both, ec);
    }
  }

  std::string ws_url() const { return "ws://127.0.0.1:" + std::to_string(port_) + "/devtools/browser/fake"; }
  int connections() const { return connections_.load(); }

  std::size_t contexts() {
    std::lock_guard lock(mu_);
    return contexts_.size();
  }

  // Fault injection.
  void never_reply_to(const std::string& method) {
    std::lock_guard lock(mu_);
    silent_.insert(method);
  }
  void fail_method(const std::string& method) {
    std::lock_guard lock(mu_);
    failing_.insert(method);
  }
  void report_failure(bool on) { report_fail_ = on; }
  void hang_loads(bool on) { hang_loads_ = on; }

  std::vector<std::string> methods_seen() {
    std::lock_guard lock(mu_);
    return seen_;
  }

 private:
  using json = nlohmann::json;
  using tcp = boost::asio::ip::tcp;

  struct Tab {
    std::string context;
    std::string target;
    const FixturePage* page = nullptr;
    int scroll = 0;
    std::string focused;
    std::string typed;
  };

  void accept_loop() {
    while (!stopping_) {
      auto sock = std::make_shared<tcp::socket>(ioc_);
      boost::system::error_code ec;
      acceptor_.accept(*sock, ec);
      if (ec) {
        std::this_thread::sleep_for(std::chrono::milliseconds(2));
        continue;
      }
      sock->non_blocking(false);
      ++connections_;
      std::lock_guard lock(mu_);
      sockets_.push_back(sock);
      conn_threads_.emplace_back([this, sock] { serve(sock); });
    }
  }

  void serve(std::shared_ptr<tcp::socket> sock) {
    namespace websocket = boost::beast::websocket;
    try {
      websocket::stream<tcp::socket&> ws(*sock);
      ws.accept();
      while (true) {
        boost::beast::flat_buffer buf;
        ws.read(buf);
        auto msg = json::parse(boost::beast::buffers_to_string(buf.data()));
        std::vector<json> out;
        handle(msg, out);
        for (const auto& m : out) {
          ws.text(true);
          ws.write(boost::asio::buffer(m.dump()));
        }
      }
    } catch (const std::exception&) {
      // Client went away or the connection was dropped.
    }
  }

  static std::string quoted_after(const std::string& expr, const std::string& marker) {
    auto at = expr.find(marker);
    if (at == std::string::npos) return {};
    auto start = at + marker.size();
    auto end = start + 1;
    while (end < expr.size() && expr[end] != '"') end += expr[end] == '\\' ? 2 : 1;
    return json::parse(expr.substr(start, end + 1 - start)).get<std::string>();
  }

  const FixturePage* lookup(const std::string& url) const {
    if (const auto* p = site_->find_by_url(url)) return p;
    auto u = parse_url(url);
    if (!u) return nullptr;
    u->query.clear();
    return site_->find_by_url(u->str());
  }

  A11ySnapshot snapshot(const Tab& t) const {
    if (!t.page) return A11ySnapshot{};
    return build_a11y(*t.page->doc, Viewport{}, t.scroll, t.page->url);
  }

  int max_scroll(const Tab& t) const { return t.page ? std::max(0, t.page->height() - 720) : 0; }

  void navigate(Tab& t, const FixturePage* page, const std::string& session, std::vector<json>& out) {
    t.page = page;
    t.scroll = 0;
    t.focused.clear();
    t.typed.clear();
    auto ev = [&](const std::string& method, json params) {
      out.push_back({{"method", method}, {"params", std::move(params)}, {"sessionId", session}});
    };
    const std::string rid = "req-" + std::to_string(++requests_);
    ev("Page.frameStartedLoading", {{"frameId", "main"}});
    ev("Network.requestWillBeSent", {{"requestId", rid}});
    ev("Network.loadingFinished", {{"requestId", rid}});
    if (!hang_loads_) ev("Page.loadEventFired", json::object());
  }

  // Page-script behaviour: manifest transition first, then href navigation.
  void activate(Tab& t, const std::string& canonical, const ElementNode* el, const std::string& session,
                std::vector<json>& out) {
    auto it = t.page->transitions.find(canonical);
    if (it != t.page->transitions.end()) {
      navigate(t, &site_->page(it->second), session, out);
      return;
    }
    if (!el) return;
    const auto* node = html::find_by_locator(*t.page->doc->root, el->source_ref);
    for (; node; node = node->parent) {
      if (node->is_element("a") && node->has_attr("href")) break;
    }
    if (!node) return;
    auto base = parse_url(t.page->url);
    auto target = base ? resolve_url(*base, *node->attr("href")) : std::nullopt;
    if (const auto* p = target ? lookup(target->str()) : nullptr) navigate(t, p, session, out);
  }

  json evaluate(Tab& t, const std::string& expr, const std::string& session, std::vector<json>& out) {
    auto value = [](const json& v) { return json{{"result", {{"type", "string"}, {"value", v.dump()}}}}; };
    if (expr.rfind("/*ws:state*/", 0) == 0) {
      return value({{"url", t.page ? t.page->url : "about:blank"},
                    {"scrollY", t.scroll},
                    {"html", t.page ? t.page->html : "<html><head></head><body></body></html>"}});
    }
    if (expr.rfind("/*ws:enumerate*/", 0) == 0) {
      if (report_fail_) return value({{"ok", false}, {"error", "enumerate_elements threw"}});
      json elements = json::array();
      for (const auto& e : snapshot(t).elements) {
        json r = {{"index", e.index.value},
                  {"role", e.role},
                  {"name", e.name},
                  {"bbox", {{"x", e.bbox.x}, {"y", e.bbox.y - t.scroll}, {"w", e.bbox.w}, {"h", e.bbox.h}}},
                  {"interactable", e.interactable},
                  {"locator", e.source_ref}};
        if (!e.options.empty()) r["options"] = e.options;
        elements.push_back(std::move(r));
      }
      return value({{"ok", true}, {"elements", elements}});
    }
    if (expr.rfind("/*ws:scroll*/", 0) == 0) {
      const bool up = expr.find("-window.innerHeight") != std::string::npos;
      t.scroll = std::clamp(t.scroll + (up ? -720 : 720), 0, max_scroll(t));
      return {{"result", {{"type", "number"}, {"value", 0}}}};
    }
    if (expr.rfind("/*ws:element*/", 0) == 0) {
      auto locator = quoted_after(expr, "const el = __wsResolve(");
      auto snap = snapshot(t);
      const ElementNode* el = nullptr;
      for (const auto& e : snap.elements) {
        if (e.source_ref == locator) el = &e;
      }
      if (!el) return value({{"found", false}});
      if (expr.find("getBoundingClientRect") != std::string::npos) {
        if (el->bbox.y < t.scroll || el->bbox.y + el->bbox.h > t.scroll + 720) {
          t.scroll = std::clamp(el->bbox.y + el->bbox.h / 2 - 360, 0, max_scroll(t));
        }
        return value({{"found", true},
                      {"x", el->bbox.x + el->bbox.w / 2.0},
                      {"y", el->bbox.y + el->bbox.h / 2.0 - t.scroll}});
      }
      if (expr.find("selectedIndex") != std::string::npos) {
        auto want = quoted_after(expr, "const want = ");
        for (const auto& o : el->options) {
          if (to_lower(trim(o)) == want) {
            activate(t, render_action(act::Select{el->index, o}), el, session, out);
            return value({{"found", true}, {"selected", true}});
          }
        }
        return value({{"found", true}, {"selected", false}});
      }
      if (expr.find("el.focus()") != std::string::npos) {
        t.focused = locator;
        t.typed.clear();
        return value({{"found", true}});
      }
      return value({{"found", true}});
    }
    return {{"result", {{"type", "undefined"}}}};
  }

  void click_at(Tab& t, double x, double y, const std::string& session, std::vector<json>& out) {
    auto snap = snapshot(t);
    const ElementNode* hit = nullptr;
    const int px = static_cast<int>(x);
    const int py = static_cast<int>(y) + t.scroll;
    for (const auto& e : snap.elements) {
      if (!e.interactable) continue;
      if (px < e.bbox.x || px >= e.bbox.x + e.bbox.w || py < e.bbox.y || py >= e.bbox.y + e.bbox.h) continue;
      if (!hit || e.bbox.area() < hit->bbox.area()) hit = &e;
    }
    if (hit) activate(t, render_action(act::Click{hit->index}), hit, session, out);
  }

  void handle(const json& msg, std::vector<json>& out) {
    const auto id = msg.at("id");
    const auto method = msg.at("method").get<std::string>();
    const auto params = msg.value("params", json::object());
    const auto session = msg.value("sessionId", std::string{});
    std::lock_guard lock(mu_);
    seen_.push_back(method);
    if (silent_.count(method)) return;
    auto reply = [&](json result) {
      json r = {{"id", id}, {"result", std::move(result)}};
      if (!session.empty()) r["sessionId"] = session;
      out.insert(out.begin(), std::move(r));
    };
    auto error = [&](const std::string& message) {
      out.insert(out.begin(), json{{"id", id}, {"error", {{"code", -32000}, {"message", message}}}});
    };
    if (failing_.count(method)) return error("injected failure");

    if (method == "Target.createBrowserContext") {
      auto ctx = "ctx-" + std::to_string(++ids_);
      contexts_.insert(ctx);
      return reply({{"browserContextId", ctx}});
    }
    if (method == "Target.disposeBrowserContext") {
      if (!contexts_.erase(params.value("browserContextId", std::string{}))) return error("no such context");
      return reply(json::object());
    }
    if (method == "Target.getBrowserContexts") {
      return reply({{"browserContextIds", std::vector<std::string>(contexts_.begin(), contexts_.end())}});
    }
    if (method == "Target.createTarget") {
      auto ctx = params.value("browserContextId", std::string{});
      if (!contexts_.count(ctx)) return error("no such context");
      auto target = "tgt-" + std::to_string(++ids_);
      targets_[target] = ctx;
      return reply({{"targetId", target}});
    }
    if (method == "Target.attachToTarget") {
      auto target = params.value("targetId", std::string{});
      if (!targets_.count(target)) return error("no such target");
      auto sid = "sess-" + std::to_string(++ids_);
      tabs_[sid] = Tab{targets_[target], target};
      return reply({{"sessionId", sid}});
    }
    if (method == "Target.closeTarget") {
      auto target = params.value("targetId", std::string{});
      targets_.erase(target);
      for (auto it = tabs_.begin(); it != tabs_.end();) it = it->second.target == target ? tabs_.erase(it) : std::next(it);
      return reply({{"success", true}});
    }

    auto tab_it = tabs_.find(session);
    if (tab_it == tabs_.end()) return error("unknown method or session: " + method);
    Tab& t = tab_it->second;
    std::vector<json> events;

    if (method == "Page.enable" || method == "Network.enable" || method == "Runtime.enable" ||
        method == "Emulation.setDeviceMetricsOverride") {
      return reply(json::object());
    }
    if (method == "Page.navigate") {
      const auto* page = lookup(params.value("url", std::string{}));
      if (!page) return reply({{"frameId", "main"}, {"errorText", "net::ERR_NAME_NOT_RESOLVED"}});
      navigate(t, page, session, events);
      reply({{"frameId", "main"}});
    } else if (method == "Runtime.evaluate") {
      reply(evaluate(t, params.value("expression", std::string{}), session, events));
    } else if (method == "Page.captureScreenshot") {
      Image shot = t.page && t.page->full_screenshot ? t.page->full_screenshot->crop(0, t.scroll, 1280, 720)
                                                     : Image(1280, 720);
      reply({{"data", base64_encode(encode_png(shot))}});
    } else if (method == "Input.dispatchMouseEvent") {
      if (params.value("type", std::string{}) == "mouseReleased") {
        click_at(t, params.value("x", 0.0), params.value("y", 0.0), session, events);
      }
      reply(json::object());
    } else if (method == "Input.insertText") {
      t.typed += params.value("text", std::string{});
      reply(json::object());
    } else if (method == "Input.dispatchKeyEvent") {
      if (params.value("type", std::string{}) == "keyDown" && params.value("key", std::string{}) == "Enter" &&
          !t.focused.empty()) {
        auto snap = snapshot(t);
        for (const auto& e : snap.elements) {
          if (e.source_ref != t.focused) continue;
          auto exact = render_action(act::Type{e.index, t.typed});
          if (t.page->transitions.count(exact)) {
            activate(t, exact, nullptr, session, events);
          } else {
            activate(t, render_action(act::Type{e.index, "*"}), nullptr, session, events);
          }
          break;
        }
      }
      reply(json::object());
    } else {
      return error("unknown method: " + method);
    }
    out.insert(out.end(), events.begin(), events.end());
  }

  std::shared_ptr<const FixtureSite> site_;
  boost::asio::io_context ioc_;
  tcp::acceptor acceptor_;
  unsigned short port_ = 0;
  std::thread accept_thread_;
  std::atomic<bool> stopping_{false};
  std::atomic<int> connections_{0};
  std::atomic<bool> report_fail_{false};
  std::atomic<bool> hang_loads_{false};

  std::mutex mu_;
  std::vector<std::shared_ptr<tcp::socket>> sockets_;
  std::vector<std::thread> conn_threads_;
  std::set<std::string> contexts_;
  std::map<std::string, std::string> targets_;  // target -> context
  std::map<std::string, Tab> tabs_;             // session -> tab
  std::set<std::string> silent_;
  std::set<std::string> failing_;
  std::vector<std::string> seen_;
  std::uint64_t ids_ = 0;
  std::uint64_t requests_ = 0;
};

}  // namespace websynth::testkit
