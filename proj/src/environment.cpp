#include <algorithm>
#include <sstream>

#include "websynth/environment.hpp"
#include "websynth/url.hpp"
#include "websynth/util.hpp"

namespace websynth {

std::string_view to_string(EnvErrorKind kind) {
  switch (kind) {
    case EnvErrorKind::kBlockedUrl: return "BlockedUrl";
    case EnvErrorKind::kNavigationTimeout: return "NavigationTimeout";
    case EnvErrorKind::kNoSuchFixturePage: return "NoSuchFixturePage";
    case EnvErrorKind::kSessionLost: return "SessionLost";
    case EnvErrorKind::kStaleElement: return "StaleElement";
    case EnvErrorKind::kNoSuchOption: return "NoSuchOption";
    case EnvErrorKind::kSessionFinished: return "SessionFinished";
    case EnvErrorKind::kProtocolError: return "ProtocolError";
  }
  return "EnvError";
}

SafetyPolicy SafetyPolicy::from_file(const std::filesystem::path& path) {
  SafetyPolicy p;
  for (const auto& raw : split_lines(read_file(path))) {
    auto line = trim(raw);
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = trim(line.substr(0, hash));
    if (!line.empty()) p.block(std::string(line));
  }
  return p;
}

void SafetyPolicy::block(std::string domain) {
  auto d = to_lower(trim(domain));
  while (!d.empty() && d.front() == '.') d.erase(d.begin());
  if (!d.empty()) blocked_.insert(std::move(d));
}

bool SafetyPolicy::blocks_host(std::string_view host) const {
  std::string h = to_lower(host);
  while (true) {
    if (blocked_.count(h)) return true;
    auto dot = h.find('.');
    if (dot == std::string::npos) return false;
    h = h.substr(dot + 1);
  }
}

bool SafetyPolicy::allows(std::string_view url) const {
  auto u = parse_url(url);
  if (!u) return false;
  if (!schemes_.count(u->scheme)) return false;
  return !blocks_host(u->host);
}

void SafetyPolicy::check(std::string_view url) const {
  if (!allows(url)) throw EnvError(EnvErrorKind::kBlockedUrl, std::string(url));
}

std::optional<std::size_t> match_option(const std::vector<std::string>& options, std::string_view wanted) {
  auto w = to_lower(trim(wanted));
  for (std::size_t i = 0; i < options.size(); ++i) {
    if (to_lower(trim(options[i])) == w) return i;
  }
  if (w.empty()) return std::nullopt;
  std::optional<std::size_t> hit;
  for (std::size_t i = 0; i < options.size(); ++i) {
    if (to_lower(options[i]).find(w) != std::string::npos) {
      if (hit) return std::nullopt;
      hit = i;
    }
  }
  return hit;
}

std::string page_digest(const html::Document& doc, const std::map<std::string, std::string>& values,
                        int scroll_y) {
  std::string material = html::serialize_normalized(*doc.root);
  material += "\n--values--\n";
  for (const auto& [k, v] : values) {
    material += k;
    material += '\x1f';
    material += v;
    material += '\x1e';
  }
  material += "\n--scroll--\n" + std::to_string(scroll_y);
  return sha256_hex(material);
}

}  // namespace websynth
