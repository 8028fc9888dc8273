#pragma once

#include <atomic>
#include <chrono>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "websynth/action.hpp"
#include "websynth/html.hpp"
#include "websynth/image.hpp"
#include "websynth/page.hpp"

namespace websynth {

enum class EnvErrorKind {
  kBlockedUrl,
  kNavigationTimeout,
  kNoSuchFixturePage,
  kSessionLost,
  kStaleElement,
  kNoSuchOption,
  kSessionFinished,
  kProtocolError,
};

std::string_view to_string(EnvErrorKind kind);

class EnvError : public std::runtime_error {
 public:
  EnvError(EnvErrorKind kind, const std::string& detail)
      : std::runtime_error(std::string(to_string(kind)) + ": " + detail), kind_(kind) {}
  EnvErrorKind kind() const { return kind_; }

 private:
  EnvErrorKind kind_;
};

struct ActionResult {
  bool ok = true;
  bool page_changed = false;
  std::optional<EnvErrorKind> error;
  std::string detail;
  std::chrono::microseconds latency{0};
};

// Domain blocklist plus scheme allowlist. A blocked entry matches the host
// itself and every subdomain of it.
class SafetyPolicy {
 public:
  SafetyPolicy() = default;
  SafetyPolicy(std::set<std::string> blocked, std::set<std::string> schemes)
      : blocked_(std::move(blocked)), schemes_(std::move(schemes)) {}

  // One domain per line; blank lines and '#' comments ignored.
  static SafetyPolicy from_file(const std::filesystem::path& path);

  bool allows(std::string_view url) const;
  bool blocks_host(std::string_view host) const;
  // Throws EnvError(kBlockedUrl).
  void check(std::string_view url) const;

  void block(std::string domain);
  void allow_scheme(std::string scheme) { schemes_.insert(std::move(scheme)); }
  const std::set<std::string>& blocked() const { return blocked_; }
  const std::set<std::string>& schemes() const { return schemes_; }

 private:
  std::set<std::string> blocked_;
  std::set<std::string> schemes_ = {"http", "https"};
};

class Session {
 public:
  virtual ~Session() = default;
  virtual const std::string& id() const = 0;
  virtual Viewport viewport() const = 0;
  virtual std::string url() const = 0;
  virtual int scroll_y() const = 0;
  virtual std::string digest() const = 0;

  // Throws EnvError(kSessionLost) after close().
  virtual PageObservation observe() = 0;
  // Action-level failures come back in the result; a closed session throws.
  virtual ActionResult execute(const Action& action) = 0;
  // Idempotent.
  virtual void close() = 0;
  virtual bool finished() const = 0;
};

class Driver {
 public:
  virtual ~Driver() = default;
  // Checks the safety policy before anything else.
  virtual std::unique_ptr<Session> open(const std::string& url, Viewport viewport) = 0;
  virtual SafetyPolicy& safety() = 0;
};

// Option matching for select controls: case-insensitive exact match first,
// then a unique case-insensitive substring match. Index into `options`.
std::optional<std::size_t> match_option(const std::vector<std::string>& options, std::string_view wanted);

// Digest of a page state: normalized DOM, form values, and scroll offset.
std::string page_digest(const html::Document& doc, const std::map<std::string, std::string>& values,
                        int scroll_y);

// ---------------------------------------------------------------------------
// Fixture sites

struct FixturePage {
  std::string id;
  std::string url;
  std::string html;  // file bytes
  std::filesystem::path html_file;
  std::filesystem::path screenshot_file;
  std::map<std::string, std::string> transitions;  // canonical action -> page id
  std::shared_ptr<const html::Document> doc;
  std::shared_ptr<const Image> full_screenshot;    // full-page render, viewport width
  int height() const { return full_screenshot ? full_screenshot->height() : 0; }
};

class FixtureSite {
 public:
  // Reads `manifest.json` in `dir`. When `host` is given every page URL is
  // rehosted onto it, which lets one site stand in for several domains.
  static std::shared_ptr<const FixtureSite> load(const std::filesystem::path& dir,
                                                 std::optional<std::string> host = std::nullopt);
  static std::shared_ptr<const FixtureSite> from_json(const nlohmann::json& manifest,
                                                      const std::filesystem::path& base_dir,
                                                      std::optional<std::string> host = std::nullopt);

  const std::string& name() const { return name_; }
  const std::string& host() const { return host_; }
  const std::string& entry() const { return entry_; }
  const FixturePage& page(const std::string& id) const;
  const FixturePage* find_by_url(std::string_view url) const;
  std::optional<std::string> search(std::string_view query) const;
  const std::map<std::string, FixturePage>& pages() const { return pages_; }

 private:
  std::string name_;
  std::string host_;
  std::string entry_;
  std::map<std::string, FixturePage> pages_;
  std::map<std::string, std::string> search_results_;  // lowercase query -> page id
};

struct FixtureDriverOptions {
  // Artificial delay per execute(); lets concurrency tests observe overlap.
  std::chrono::milliseconds action_latency{0};
};

class FixtureDriver final : public Driver {
 public:
  explicit FixtureDriver(FixtureDriverOptions options = {});

  // A directory holding manifest.json, or a directory of such directories.
  void load(const std::filesystem::path& dir);
  void add_site(std::shared_ptr<const FixtureSite> site);
  const FixtureSite* site_for_host(const std::string& host) const;

  std::unique_ptr<Session> open(const std::string& url, Viewport viewport) override;
  SafetyPolicy& safety() override { return safety_; }

  int open_sessions() const { return open_sessions_.load(); }
  int peak_sessions() const { return peak_sessions_.load(); }

 private:
  friend class FixtureSession;
  void session_closed();

  FixtureDriverOptions options_;
  SafetyPolicy safety_;
  std::map<std::string, std::shared_ptr<const FixtureSite>> sites_;  // by host
  std::atomic<int> open_sessions_{0};
  std::atomic<int> peak_sessions_{0};
  std::atomic<std::uint64_t> next_id_{0};
};

// ---------------------------------------------------------------------------
// Live browser driver (remote debugging protocol over WebSocket)

struct PageElementReport {
  std::uint32_t index = 0;
  std::string role;
  std::string name;
  BBox bbox;  // viewport pixels
  bool interactable = true;
  std::vector<std::string> options;
  std::string locator;
};

// Parses the page-script report: {"ok":true,"elements":[...]} or
// {"ok":false,"error":"..."}. Throws EnvError(kProtocolError) on error reports.
std::vector<PageElementReport> parse_page_report(const nlohmann::json& report);

// Host ordering wins; boxes and interactability come from the page report
// matched by locator. Returns the number of page-only elements dropped.
std::size_t reconcile(A11ySnapshot& host, const std::vector<PageElementReport>& page);

struct LiveDriverOptions {
  // ws://host:port/devtools/browser/<id>, or http://host:port to discover it.
  std::string endpoint;
  std::filesystem::path page_script;  // compiled page-script bundle
  std::chrono::milliseconds network_idle{500};
  std::chrono::milliseconds load_cap{30000};
  std::chrono::milliseconds call_timeout{30000};
  std::string search_url = "https://www.google.com/search?q=";
};

class CdpConnection;

class LiveDriver final : public Driver {
 public:
  explicit LiveDriver(LiveDriverOptions options);
  ~LiveDriver() override;

  std::unique_ptr<Session> open(const std::string& url, Viewport viewport) override;
  SafetyPolicy& safety() override { return safety_; }

  // Browser contexts currently alive, as reported by the browser.
  std::size_t browser_context_count();
  const LiveDriverOptions& options() const { return options_; }
  const std::string& page_script() const { return script_; }
  std::string websocket_url() const { return ws_url_; }

 private:
  LiveDriverOptions options_;
  SafetyPolicy safety_;
  std::string script_;
  std::string ws_url_;
};

}  // namespace websynth
