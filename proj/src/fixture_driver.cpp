#include <algorithm>
#include <thread>

#include "websynth/environment.hpp"
#include "websynth/url.hpp"
#include "websynth/util.hpp"

namespace websynth {

namespace {

std::string page_key(std::string_view url) {
  auto u = parse_url(url);
  if (!u) return std::string(url);
  u->fragment.clear();
  if (u->path.size() > 1 && u->path.back() == '/') u->path.pop_back();
  return u->without_fragment();
}

std::string rehost(const std::string& url, const std::string& host) {
  auto u = parse_url(url);
  if (!u) throw std::invalid_argument("fixture page url is not absolute: " + url);
  u->host = host;
  u->port.clear();
  return u->str();
}

}  // namespace

std::shared_ptr<const FixtureSite> FixtureSite::load(const std::filesystem::path& dir,
                                                     std::optional<std::string> host) {
  auto manifest = nlohmann::json::parse(read_file(dir / "manifest.json"));
  return from_json(manifest, dir, std::move(host));
}

std::shared_ptr<const FixtureSite> FixtureSite::from_json(const nlohmann::json& m,
                                                          const std::filesystem::path& base,
                                                          std::optional<std::string> host) {
  auto site = std::make_shared<FixtureSite>();
  site->name_ = m.at("site").get<std::string>();
  site->entry_ = m.at("entry").get<std::string>();
  for (const auto& p : m.at("pages")) {
    FixturePage page;
    page.id = p.at("id").get<std::string>();
    page.url = p.at("url").get<std::string>();
    if (host) page.url = rehost(page.url, *host);
    page.html_file = base / p.at("html").get<std::string>();
    page.html = read_file(page.html_file);
    page.doc = std::make_shared<html::Document>(html::parse(page.html));
    if (p.contains("screenshot")) {
      page.screenshot_file = base / p.at("screenshot").get<std::string>();
      page.full_screenshot = std::make_shared<Image>(read_png(page.screenshot_file));
    }
    if (p.contains("transitions")) {
      for (const auto& [k, v] : p.at("transitions").items()) {
        // Keys are stored in canonical form so authoring variations still match.
        page.transitions[render_action(parse_action(k))] = v.get<std::string>();
      }
    }
    auto id = page.id;
    if (!site->pages_.emplace(id, std::move(page)).second) {
      throw std::invalid_argument("duplicate fixture page id: " + id);
    }
  }
  if (!site->pages_.count(site->entry_)) throw std::invalid_argument("fixture entry page missing: " + site->entry_);
  for (const auto& [id, page] : site->pages_) {
    for (const auto& [action, target] : page.transitions) {
      if (!site->pages_.count(target)) {
        throw std::invalid_argument("transition " + id + " --" + action + "--> unknown page " + target);
      }
    }
    build_a11y(*page.doc, Viewport{}, 0, page.url);
  }
  if (m.contains("search_results")) {
    for (const auto& [q, target] : m.at("search_results").items()) {
      auto t = target.get<std::string>();
      if (!site->pages_.count(t)) throw std::invalid_argument("search result targets unknown page " + t);
      site->search_results_[to_lower(collapse_whitespace(q))] = t;
    }
  }
  auto entry_url = parse_url(site->pages_.at(site->entry_).url);
  site->host_ = entry_url ? entry_url->host : site->name_;
  return site;
}

const FixturePage& FixtureSite::page(const std::string& id) const {
  auto it = pages_.find(id);
  if (it == pages_.end()) throw EnvError(EnvErrorKind::kNoSuchFixturePage, id);
  return it->second;
}

const FixturePage* FixtureSite::find_by_url(std::string_view url) const {
  auto key = page_key(url);
  for (const auto& [_, page] : pages_) {
    if (page_key(page.url) == key) return &page;
  }
  return nullptr;
}

std::optional<std::string> FixtureSite::search(std::string_view query) const {
  auto it = search_results_.find(to_lower(collapse_whitespace(query)));
  if (it != search_results_.end()) return it->second;
  it = search_results_.find("*");
  if (it != search_results_.end()) return it->second;
  return std::nullopt;
}

class FixtureSession final : public Session {
 public:
  FixtureSession(FixtureDriver* driver, std::shared_ptr<const FixtureSite> site, const FixturePage* page,
                 Viewport vp, std::string id)
      : driver_(driver), site_(std::move(site)), page_(page), viewport_(vp), id_(std::move(id)) {}

  ~FixtureSession() override { close(); }

  const std::string& id() const override { return id_; }
  Viewport viewport() const override { return viewport_; }
  std::string url() const override { return page_->url; }
  int scroll_y() const override { return scroll_y_; }
  bool finished() const override { return finished_; }

  std::string digest() const override { return page_digest(*page_->doc, values_, scroll_y_); }

  PageObservation observe() override {
    ensure_open();
    PageObservation obs;
    obs.url = page_->url;
    obs.html = page_->html;
    obs.a11y = snapshot();
    auto shot = std::make_shared<Image>(
        page_->full_screenshot ? page_->full_screenshot->crop(0, scroll_y_, viewport_.width, viewport_.height)
                               : Image(viewport_.width, viewport_.height));
    obs.som_screenshot = std::make_shared<Image>(annotate_som(*shot, viewport_elements(obs.a11y)));
    obs.screenshot = std::move(shot);
    obs.digest = digest();
    return obs;
  }

  ActionResult execute(const Action& action) override {
    ensure_open();
    auto start = std::chrono::steady_clock::now();
    if (driver_->options_.action_latency.count() > 0) std::this_thread::sleep_for(driver_->options_.action_latency);
    auto before = digest();
    ActionResult r;
    if (finished_) {
      r = fail(EnvErrorKind::kSessionFinished, "session already stopped");
    } else {
      r = std::visit([&](const auto& a) { return apply(a); }, action.variant());
    }
    if (r.ok) r.page_changed = digest() != before;
    r.latency = std::chrono::duration_cast<std::chrono::microseconds>(std::chrono::steady_clock::now() - start);
    return r;
  }

  void close() override {
    if (closed_) return;
    closed_ = true;
    driver_->session_closed();
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

  A11ySnapshot snapshot() const { return build_a11y(*page_->doc, viewport_, scroll_y_, page_->url); }

  void navigate(const FixturePage* target) {
    page_ = target;
    scroll_y_ = 0;
    values_.clear();
  }

  bool follow(const std::string& canonical) {
    auto it = page_->transitions.find(canonical);
    if (it == page_->transitions.end()) return false;
    navigate(&site_->page(it->second));
    return true;
  }

  const ElementNode* element(ElementId id, const A11ySnapshot& snap, ActionResult& err) {
    const auto* el = snap.find(id);
    if (!el) err = fail(EnvErrorKind::kStaleElement, "no element " + std::to_string(id.value));
    return el;
  }

  ActionResult apply(const act::Click& a) {
    auto snap = snapshot();
    ActionResult r;
    const auto* el = element(a.elem, snap, r);
    if (!el) return r;
    if (follow(render_action(a))) return r;
    const auto* node = html::find_by_locator(*page_->doc->root, el->source_ref);
    for (; node; node = node->parent) {
      if (node->is_element("a") && node->has_attr("href")) break;
    }
    if (node) {
      auto base = parse_url(page_->url);
      auto target = base ? resolve_url(*base, *node->attr("href")) : std::nullopt;
      if (target) {
        if (!driver_->safety_.allows(target->str())) return fail(EnvErrorKind::kBlockedUrl, target->str());
        if (const auto* p = site_->find_by_url(target->str())) navigate(p);
      }
    }
    return r;
  }

  ActionResult apply(const act::Type& a) {
    auto snap = snapshot();
    ActionResult r;
    const auto* el = element(a.elem, snap, r);
    if (!el) return r;
    values_[el->source_ref] = a.text;
    if (!follow(render_action(a))) follow(render_action(act::Type{a.elem, "*"}));
    return r;
  }

  ActionResult apply(const act::Select& a) {
    auto snap = snapshot();
    ActionResult r;
    const auto* el = element(a.elem, snap, r);
    if (!el) return r;
    auto idx = match_option(el->options, a.option);
    if (!idx) return fail(EnvErrorKind::kNoSuchOption, a.option);
    const auto& chosen = el->options[*idx];
    values_[el->source_ref] = chosen;
    if (!follow(render_action(act::Select{a.elem, chosen}))) follow(render_action(act::Select{a.elem, "*"}));
    return r;
  }

  ActionResult apply(const act::Goto& a) {
    if (!driver_->safety_.allows(a.url)) return fail(EnvErrorKind::kBlockedUrl, a.url);
    const auto* p = site_->find_by_url(a.url);
    if (!p) {
      auto u = parse_url(a.url);
      const auto* other = u ? driver_->site_for_host(u->host) : nullptr;
      if (other) p = other->find_by_url(a.url);
      if (p) site_ = driver_->sites_.at(u->host);
    }
    if (!p) return fail(EnvErrorKind::kNoSuchFixturePage, a.url);
    navigate(p);
    return {};
  }

  ActionResult apply(const act::SearchGoogle& a) {
    auto target = site_->search(a.query);
    if (!target) return fail(EnvErrorKind::kNoSuchFixturePage, "no search results page for: " + a.query);
    navigate(&site_->page(*target));
    return {};
  }

  ActionResult apply(const act::Scroll& a) {
    const int max_y = std::max(0, page_->height() - viewport_.height);
    const int step = a.direction == ScrollDirection::kDown ? viewport_.height : -viewport_.height;
    scroll_y_ = std::clamp(scroll_y_ + step, 0, max_y);
    return {};
  }

  ActionResult apply(const act::Stop&) {
    finished_ = true;
    return {};
  }

  FixtureDriver* driver_;
  std::shared_ptr<const FixtureSite> site_;
  const FixturePage* page_;
  Viewport viewport_;
  std::string id_;
  int scroll_y_ = 0;
  std::map<std::string, std::string> values_;
  bool finished_ = false;
  bool closed_ = false;
};

FixtureDriver::FixtureDriver(FixtureDriverOptions options) : options_(options) {
  safety_.allow_scheme("fixture");
}

void FixtureDriver::load(const std::filesystem::path& dir) {
  if (std::filesystem::exists(dir / "manifest.json")) {
    add_site(FixtureSite::load(dir));
    return;
  }
  std::vector<std::filesystem::path> subdirs;
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    if (e.is_directory() && std::filesystem::exists(e.path() / "manifest.json")) subdirs.push_back(e.path());
  }
  if (subdirs.empty()) throw std::runtime_error("no fixture manifest under " + dir.string());
  std::sort(subdirs.begin(), subdirs.end());
  for (const auto& d : subdirs) add_site(FixtureSite::load(d));
}

void FixtureDriver::add_site(std::shared_ptr<const FixtureSite> site) {
  auto host = site->host();
  sites_[host] = std::move(site);
}

const FixtureSite* FixtureDriver::site_for_host(const std::string& host) const {
  auto it = sites_.find(host);
  return it == sites_.end() ? nullptr : it->second.get();
}

std::unique_ptr<Session> FixtureDriver::open(const std::string& url, Viewport viewport) {
  safety_.check(url);
  auto u = parse_url(url);
  auto it = u ? sites_.find(u->host) : sites_.end();
  if (it == sites_.end()) throw EnvError(EnvErrorKind::kNoSuchFixturePage, url);
  const auto* page = it->second->find_by_url(url);
  if (!page) throw EnvError(EnvErrorKind::kNoSuchFixturePage, url);
  auto id = "fx-" + std::to_string(next_id_.fetch_add(1));
  int now = open_sessions_.fetch_add(1) + 1;
  int peak = peak_sessions_.load();
  while (now > peak && !peak_sessions_.compare_exchange_weak(peak, now)) {
  }
  return std::make_unique<FixtureSession>(this, it->second, page, viewport, std::move(id));
}

void FixtureDriver::session_closed() { open_sessions_.fetch_sub(1); }

}  // namespace websynth
