#include <httplib.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <thread>

#include "cdp.hpp"
#include "websynth/environment.hpp"
#include "websynth/url.hpp"
#include "websynth/util.hpp"

namespace websynth {

std::vector<PageElementReport> parse_page_report(const nlohmann::json& report) {
  if (!report.is_object()) throw EnvError(EnvErrorKind::kProtocolError, "page report is not an object");
  if (!report.value("ok", false)) {
    throw EnvError(EnvErrorKind::kProtocolError, "page script failed: " + report.value("error", std::string("unknown")));
  }
  std::vector<PageElementReport> out;
  for (const auto& e : report.at("elements")) {
    PageElementReport r;
    r.index = e.at("index").get<std::uint32_t>();
    r.role = e.at("role").get<std::string>();
    r.name = e.value("name", std::string{});
    const auto& b = e.at("bbox");
    auto coord = [&](const char* k) {
      double v = b.at(k).get<double>();
      if (!std::isfinite(v)) throw EnvError(EnvErrorKind::kProtocolError, "non-finite bbox coordinate");
      return static_cast<int>(std::lround(v));
    };
    r.bbox = {coord("x"), coord("y"), coord("w"), coord("h")};
    r.interactable = e.value("interactable", true);
    if (e.contains("options")) r.options = e.at("options").get<std::vector<std::string>>();
    r.locator = e.value("locator", std::string{});
    if (r.index != out.size()) throw EnvError(EnvErrorKind::kProtocolError, "page report indices not contiguous");
    out.push_back(std::move(r));
  }
  return out;
}

std::size_t reconcile(A11ySnapshot& host, const std::vector<PageElementReport>& page) {
  std::map<std::string, const PageElementReport*> by_locator;
  for (const auto& r : page) by_locator.emplace(r.locator, &r);
  std::set<std::string> used;
  const int vw = host.viewport.width;
  const int top = host.scroll_y;
  const int bottom = host.scroll_y + host.viewport.height;
  for (auto& el : host.elements) {
    auto it = by_locator.find(el.source_ref);
    if (it == by_locator.end()) continue;
    used.insert(it->first);
    const auto& r = *it->second;
    el.bbox = {r.bbox.x, r.bbox.y + host.scroll_y, r.bbox.w, r.bbox.h};
    el.interactable = el.interactable && r.interactable;
    el.in_viewport = el.bbox.area() > 0 && el.bbox.x < vw && el.bbox.x + el.bbox.w > 0 && el.bbox.y < bottom &&
                     el.bbox.y + el.bbox.h > top;
  }
  std::size_t dropped = 0;
  for (const auto& r : page) dropped += used.count(r.locator) ? 0 : 1;
  return dropped;
}

namespace {

// Each expression starts with a marker comment naming its purpose.
constexpr const char* kResolveFn = R"JS(
const __wsResolve = (locator) => {
  let cur = document;
  for (const part of locator.split('/')) {
    const m = /^([^\[]+)\[(\d+)\]$/.exec(part);
    if (!m) return null;
    let n = Number(m[2]);
    let next = null;
    for (const child of cur.children) {
      if (child.localName === m[1] && n-- === 0) { next = child; break; }
    }
    if (!next) return null;
    cur = next;
  }
  return cur;
};)JS";

std::string js_string(const std::string& s) { return nlohmann::json(s).dump(); }

std::string discover_ws_url(const std::string& endpoint) {
  if (endpoint.rfind("ws://", 0) == 0) return endpoint;
  httplib::Client client(endpoint);
  client.set_connection_timeout(std::chrono::seconds(5));
  auto res = client.Get("/json/version");
  if (!res || res->status != 200) {
    throw EnvError(EnvErrorKind::kSessionLost, "cannot reach browser endpoint " + endpoint);
  }
  auto j = nlohmann::json::parse(res->body, nullptr, false);
  if (j.is_discarded() || !j.contains("webSocketDebuggerUrl")) {
    throw EnvError(EnvErrorKind::kProtocolError, "no webSocketDebuggerUrl at " + endpoint);
  }
  return j["webSocketDebuggerUrl"].get<std::string>();
}

class LiveSession final : public Session {
 public:
  LiveSession(LiveDriver* driver, Viewport vp, std::string id)
      : driver_(driver),
        viewport_(vp),
        id_(std::move(id)),
        cdp_(driver->websocket_url(), driver->options().call_timeout) {
    try {
      context_id_ = cdp_.call("Target.createBrowserContext", {{"disposeOnDetach", true}})
                        .at("browserContextId")
                        .get<std::string>();
      target_id_ = cdp_.call("Target.createTarget", {{"url", "about:blank"}, {"browserContextId", context_id_}})
                       .at("targetId")
                       .get<std::string>();
      session_ = cdp_.call("Target.attachToTarget", {{"targetId", target_id_}, {"flatten", true}})
                     .at("sessionId")
                     .get<std::string>();
      cmd("Page.enable");
      cmd("Network.enable");
      cmd("Runtime.enable");
      cmd("Emulation.setDeviceMetricsOverride",
          {{"width", vp.width}, {"height", vp.height}, {"deviceScaleFactor", 1}, {"mobile", false}});
    } catch (...) {
      close();
      throw;
    }
  }

  ~LiveSession() override { close(); }

  const std::string& id() const override { return id_; }
  Viewport viewport() const override { return viewport_; }
  std::string url() const override { return url_; }
  int scroll_y() const override { return scroll_y_; }
  bool finished() const override { return finished_; }
  std::string digest() const override { return digest_; }

  void navigate(const std::string& url) {
    ensure_open();
    auto r = cmd("Page.navigate", {{"url", url}});
    if (r.contains("errorText") && !r["errorText"].get<std::string>().empty()) {
      throw EnvError(EnvErrorKind::kNavigationTimeout, url + ": " + r["errorText"].get<std::string>());
    }
    wait_settled(true);
    values_.clear();
    refresh();
  }

  PageObservation observe() override {
    ensure_open();
    refresh();
    PageObservation obs;
    obs.url = url_;
    obs.html = html_;
    obs.a11y = build_a11y(html_, viewport_, scroll_y_, url_);
    auto report = eval_json(std::string("/*ws:enumerate*/(() => { if (!globalThis.__websynth) {\n") +
                            driver_->page_script() + "\n}\nreturn JSON.stringify(globalThis.__websynth.enumerate_elements()); })()");
    reconcile(obs.a11y, parse_page_report(report));
    auto shot_b64 = cmd("Page.captureScreenshot", {{"format", "png"}, {"fromSurface", true}}).at("data").get<std::string>();
    auto raw = decode_png(base64_decode(shot_b64));
    auto shot = std::make_shared<Image>(raw.width() == viewport_.width && raw.height() == viewport_.height
                                            ? std::move(raw)
                                            : raw.crop(0, 0, viewport_.width, viewport_.height));
    obs.som_screenshot = std::make_shared<Image>(annotate_som(*shot, viewport_elements(obs.a11y)));
    obs.screenshot = std::move(shot);
    obs.digest = digest_;
    last_ = obs.a11y;
    return obs;
  }

  ActionResult execute(const Action& action) override {
    ensure_open();
    auto start = std::chrono::steady_clock::now();
    if (!last_) observe();
    auto before = digest_;
    ActionResult r;
    try {
      r = finished_ ? fail(EnvErrorKind::kSessionFinished, "session already stopped")
                    : std::visit([&](const auto& a) { return apply(a); }, action.variant());
      if (r.ok) {
        refresh();
        r.page_changed = digest_ != before;
      }
    } catch (const EnvError& e) {
      if (e.kind() == EnvErrorKind::kSessionLost) throw;
      r = fail(e.kind(), e.what());
    }
    r.latency = std::chrono::duration_cast<std::chrono::microseconds>(std::chrono::steady_clock::now() - start);
    return r;
  }

  void close() override {
    if (closed_) return;
    closed_ = true;
    try {
      if (!target_id_.empty()) cdp_.call("Target.closeTarget", {{"targetId", target_id_}});
      if (!context_id_.empty()) cdp_.call("Target.disposeBrowserContext", {{"browserContextId", context_id_}});
    } catch (const EnvError&) {
      // The browser may already be gone; nothing left to release.
    }
    cdp_.close();
  }

 private:
  static ActionResult fail(EnvErrorKind kind, std::string detail) {
    ActionResult r;
    r.ok = false;
    r.error = kind;
    r.detail = std::move(detail);
    return r;
  }

  void ensure_open() const {
    if (closed_) throw EnvError(EnvErrorKind::kSessionLost, "session " + id_ + " is closed");
  }

  nlohmann::json cmd(const std::string& method, const nlohmann::json& params = nlohmann::json::object()) {
    return cdp_.call(method, params, session_);
  }

  nlohmann::json eval(const std::string& expression) {
    auto r = cmd("Runtime.evaluate", {{"expression", expression}, {"returnByValue", true}, {"awaitPromise", true}});
    if (r.contains("exceptionDetails")) {
      throw EnvError(EnvErrorKind::kProtocolError, "script exception: " + r["exceptionDetails"].dump());
    }
    return r.at("result").value("value", nlohmann::json());
  }

  nlohmann::json eval_json(const std::string& expression) {
    auto v = eval(expression);
    if (!v.is_string()) throw EnvError(EnvErrorKind::kProtocolError, "expected a JSON string result");
    return nlohmann::json::parse(v.get<std::string>());
  }

  void refresh() {
    auto state = eval_json(
        "/*ws:state*/JSON.stringify({url: location.href, scrollY: Math.round(window.scrollY), "
        "html: document.documentElement ? document.documentElement.outerHTML : ''})");
    auto url = state.at("url").get<std::string>();
    // Form values belong to the page they were entered on.
    if (url != url_) values_.clear();
    url_ = std::move(url);
    scroll_y_ = state.at("scrollY").get<int>();
    html_ = state.at("html").get<std::string>();
    digest_ = page_digest(html::parse(html_), values_, scroll_y_);
  }

  // Network-idle wait: no requests in flight for `network_idle`, plus the load
  // event when a navigation started, capped at `load_cap`.
  void wait_settled(bool expect_load) {
    const auto& opt = driver_->options();
    const auto cap = std::chrono::steady_clock::now() + opt.load_cap;
    std::set<std::string> inflight;
    bool loading = expect_load;
    auto last_activity = std::chrono::steady_clock::now();
    while (true) {
      auto now = std::chrono::steady_clock::now();
      if (!loading && inflight.empty() && now - last_activity >= opt.network_idle) return;
      if (now >= cap) {
        if (expect_load && loading) throw EnvError(EnvErrorKind::kNavigationTimeout, "page did not finish loading");
        return;
      }
      auto ev = cdp_.next_event(std::chrono::milliseconds(50));
      if (!ev) continue;
      if (ev->value("sessionId", std::string{}) != session_) continue;
      const auto method = ev->value("method", std::string{});
      const auto& params = (*ev)["params"];
      if (method == "Network.requestWillBeSent") {
        inflight.insert(params.value("requestId", std::string{}));
      } else if (method == "Network.loadingFinished" || method == "Network.loadingFailed") {
        inflight.erase(params.value("requestId", std::string{}));
      } else if (method == "Page.frameStartedLoading") {
        loading = true;
      } else if (method == "Page.loadEventFired") {
        loading = false;
      } else {
        continue;
      }
      last_activity = std::chrono::steady_clock::now();
    }
  }

  const ElementNode* element(ElementId id) {
    const auto* el = last_ ? last_->find(id) : nullptr;
    if (!el) throw EnvError(EnvErrorKind::kStaleElement, "no element " + std::to_string(id.value));
    return el;
  }

  nlohmann::json on_element(const ElementNode& el, const std::string& body) {
    auto v = eval_json(std::string("/*ws:element*/(() => {") + kResolveFn + "\nconst el = __wsResolve(" +
                       js_string(el.source_ref) + ");\nif (!el) return JSON.stringify({found: false});\n" + body +
                       "\n})()");
    if (!v.value("found", true)) throw EnvError(EnvErrorKind::kStaleElement, "element vanished: " + el.source_ref);
    return v;
  }

  ActionResult apply(const act::Click& a) {
    const auto* el = element(a.elem);
    auto rect = on_element(*el,
                           "el.scrollIntoView({block: 'center', inline: 'center'});\n"
                           "const r = el.getBoundingClientRect();\n"
                           "return JSON.stringify({found: true, x: r.x + r.width / 2, y: r.y + r.height / 2});");
    const double x = rect.at("x").get<double>();
    const double y = rect.at("y").get<double>();
    cmd("Input.dispatchMouseEvent", {{"type", "mouseMoved"}, {"x", x}, {"y", y}});
    cmd("Input.dispatchMouseEvent",
        {{"type", "mousePressed"}, {"x", x}, {"y", y}, {"button", "left"}, {"clickCount", 1}});
    cmd("Input.dispatchMouseEvent",
        {{"type", "mouseReleased"}, {"x", x}, {"y", y}, {"button", "left"}, {"clickCount", 1}});
    wait_settled(false);
    return {};
  }

  ActionResult apply(const act::Type& a) {
    const auto* el = element(a.elem);
    on_element(*el,
               "el.scrollIntoView({block: 'center'});\nel.focus();\n"
               "if ('value' in el) { el.value = ''; } else if (el.isContentEditable) { el.textContent = ''; }\n"
               "el.dispatchEvent(new Event('input', {bubbles: true}));\nreturn JSON.stringify({found: true});");
    cmd("Input.insertText", {{"text", a.text}});
    values_[el->source_ref] = a.text;
    nlohmann::json enter = {{"key", "Enter"}, {"code", "Enter"}, {"windowsVirtualKeyCode", 13},
                            {"nativeVirtualKeyCode", 13}};
    auto down = enter;
    down["type"] = "keyDown";
    down["text"] = "\r";
    auto up = enter;
    up["type"] = "keyUp";
    cmd("Input.dispatchKeyEvent", down);
    cmd("Input.dispatchKeyEvent", up);
    wait_settled(false);
    return {};
  }

  ActionResult apply(const act::Select& a) {
    const auto* el = element(a.elem);
    auto idx = match_option(el->options, a.option);
    if (!idx) return fail(EnvErrorKind::kNoSuchOption, a.option);
    const auto& text = el->options[*idx];
    auto r = on_element(*el, "const want = " + js_string(to_lower(trim(text))) +
                                 ";\nconst opts = Array.from(el.options || []);\n"
                                 "const i = opts.findIndex(o => o.text.trim().toLowerCase() === want);\n"
                                 "if (i < 0) return JSON.stringify({found: true, selected: false});\n"
                                 "el.selectedIndex = i;\n"
                                 "el.dispatchEvent(new Event('input', {bubbles: true}));\n"
                                 "el.dispatchEvent(new Event('change', {bubbles: true}));\n"
                                 "return JSON.stringify({found: true, selected: true});");
    if (!r.value("selected", false)) return fail(EnvErrorKind::kNoSuchOption, a.option);
    values_[el->source_ref] = text;
    wait_settled(false);
    return {};
  }

  ActionResult apply(const act::Goto& a) {
    if (!driver_->safety().allows(a.url)) return fail(EnvErrorKind::kBlockedUrl, a.url);
    navigate(a.url);
    return {};
  }

  ActionResult apply(const act::SearchGoogle& a) {
    navigate(driver_->options().search_url + url_encode_component(a.query));
    return {};
  }

  ActionResult apply(const act::Scroll& a) {
    eval(std::string("/*ws:scroll*/window.scrollBy(0, ") +
         (a.direction == ScrollDirection::kDown ? "" : "-") + "window.innerHeight); 0");
    wait_settled(false);
    return {};
  }

  ActionResult apply(const act::Stop&) {
    finished_ = true;
    return {};
  }

  LiveDriver* driver_;
  Viewport viewport_;
  std::string id_;
  CdpConnection cdp_;
  std::string context_id_;
  std::string target_id_;
  std::string session_;
  std::string url_;
  std::string html_;
  std::string digest_;
  int scroll_y_ = 0;
  std::map<std::string, std::string> values_;
  std::optional<A11ySnapshot> last_;
  bool finished_ = false;
  bool closed_ = false;
};

std::atomic<std::uint64_t> g_live_ids{0};

}  // namespace

LiveDriver::LiveDriver(LiveDriverOptions options) : options_(std::move(options)) {
  if (!options_.page_script.empty()) script_ = read_file(options_.page_script);
  if (script_.empty()) throw std::invalid_argument("live driver needs a page-script bundle");
  ws_url_ = discover_ws_url(options_.endpoint);
}

LiveDriver::~LiveDriver() = default;

std::unique_ptr<Session> LiveDriver::open(const std::string& url, Viewport viewport) {
  safety_.check(url);
  auto s = std::make_unique<LiveSession>(this, viewport, "live-" + std::to_string(g_live_ids.fetch_add(1)));
  s->navigate(url);
  return s;
}

std::size_t LiveDriver::browser_context_count() {
  CdpConnection conn(ws_url_, options_.call_timeout);
  auto r = conn.call("Target.getBrowserContexts");
  return r.value("browserContextIds", nlohmann::json::array()).size();
}

}  // namespace websynth
