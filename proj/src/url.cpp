#include "websynth/url.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <vector>

#include "websynth/util.hpp"

namespace websynth {

std::string Url::without_fragment() const {
  std::string out = scheme + "://" + host;
  if (!port.empty()) out += ":" + port;
  out += path.empty() ? "/" : path;
  if (!query.empty()) out += "?" + query;
  return out;
}

std::string Url::str() const {
  auto out = without_fragment();
  if (!fragment.empty()) out += "#" + fragment;
  return out;
}

std::optional<Url> parse_url(std::string_view text) {
  text = trim(text);
  auto sep = text.find("://");
  if (sep == std::string_view::npos || sep == 0) return std::nullopt;
  Url u;
  for (char c : text.substr(0, sep)) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '+' && c != '-' && c != '.') {
      return std::nullopt;
    }
  }
  if (!std::isalpha(static_cast<unsigned char>(text[0]))) return std::nullopt;
  u.scheme = to_lower(text.substr(0, sep));
  auto rest = text.substr(sep + 3);
  for (char c : rest) {
    if (static_cast<unsigned char>(c) <= 0x20) return std::nullopt;
  }
  if (auto hash = rest.find('#'); hash != std::string_view::npos) {
    u.fragment = std::string(rest.substr(hash + 1));
    rest = rest.substr(0, hash);
  }
  if (auto q = rest.find('?'); q != std::string_view::npos) {
    u.query = std::string(rest.substr(q + 1));
    rest = rest.substr(0, q);
  }
  auto slash = rest.find('/');
  auto authority = rest.substr(0, slash);
  u.path = slash == std::string_view::npos ? "/" : std::string(rest.substr(slash));
  if (auto at = authority.rfind('@'); at != std::string_view::npos) authority = authority.substr(at + 1);
  if (auto colon = authority.rfind(':'); colon != std::string_view::npos &&
                                         authority.find(']') == std::string_view::npos) {
    u.port = std::string(authority.substr(colon + 1));
    authority = authority.substr(0, colon);
    if (!std::all_of(u.port.begin(), u.port.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); })) {
      return std::nullopt;
    }
  }
  if (authority.empty()) return std::nullopt;
  u.host = to_lower(authority);
  return u;
}

namespace {

std::string normalize_path(const std::string& path) {
  std::vector<std::string> parts;
  std::size_t i = 0;
  while (i <= path.size()) {
    auto j = path.find('/', i);
    if (j == std::string::npos) j = path.size();
    auto seg = path.substr(i, j - i);
    if (seg == "..") {
      if (!parts.empty()) parts.pop_back();
    } else if (seg != "." && !seg.empty()) {
      parts.push_back(seg);
    }
    i = j + 1;
  }
  std::string out;
  for (const auto& p : parts) out += "/" + p;
  if (out.empty() || (!path.empty() && path.back() == '/')) out += "/";
  return out;
}

}  // namespace

std::optional<Url> resolve_url(const Url& base, std::string_view ref) {
  ref = trim(ref);
  if (ref.find("://") != std::string_view::npos) return parse_url(ref);
  Url u = base;
  u.fragment.clear();
  if (ref.empty()) return u;
  if (ref.substr(0, 2) == "//") return parse_url(base.scheme + ":" + std::string(ref));
  if (ref.front() == '#') {
    u.fragment = std::string(ref.substr(1));
    return u;
  }
  std::string r(ref);
  if (auto hash = r.find('#'); hash != std::string::npos) {
    u.fragment = r.substr(hash + 1);
    r.resize(hash);
  }
  u.query.clear();
  if (auto q = r.find('?'); q != std::string::npos) {
    u.query = r.substr(q + 1);
    r.resize(q);
  }
  if (r.empty()) {
    if (u.query.empty()) u.query = base.query;
    return u;
  }
  if (r.front() == '/') {
    u.path = normalize_path(r);
  } else {
    auto dir = base.path.substr(0, base.path.rfind('/') + 1);
    u.path = normalize_path(dir + r);
  }
  return u;
}

std::string registrable_domain(std::string_view host) {
  static constexpr std::array<std::string_view, 24> kTwoPart = {
      "co.uk", "org.uk", "ac.uk", "gov.uk", "com.au", "net.au", "org.au", "co.jp",
      "ne.jp", "or.jp",  "com.br", "com.cn", "co.in", "co.kr", "co.nz", "com.mx",
      "com.tr", "co.za", "com.sg", "com.hk", "com.tw", "com.ar", "co.id", "com.my"};
  std::string h = to_lower(host);
  while (!h.empty() && h.back() == '.') h.pop_back();
  if (h.empty()) return h;
  bool ipv4 = std::all_of(h.begin(), h.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)) || c == '.'; });
  if (ipv4 || h.front() == '[') return h;
  std::vector<std::size_t> dots;
  for (std::size_t i = 0; i < h.size(); ++i) {
    if (h[i] == '.') dots.push_back(i);
  }
  if (dots.empty()) return h;
  std::size_t labels = 2;
  if (dots.size() >= 2) {
    auto suffix = std::string_view(h).substr(dots[dots.size() - 2] + 1);
    if (std::find(kTwoPart.begin(), kTwoPart.end(), suffix) != kTwoPart.end()) labels = 3;
  }
  if (dots.size() < labels) return h;
  return h.substr(dots[dots.size() - labels] + 1);
}

std::string url_encode_component(std::string_view s) {
  static constexpr char kHex[] = "0123456789ABCDEF";
  std::string out;
  for (unsigned char c : s) {
    if (std::isalnum(c) || c == '-' || c == '_' || c == '.' || c == '~') {
      out.push_back(static_cast<char>(c));
    } else if (c == ' ') {
      out.push_back('+');
    } else {
      out.push_back('%');
      out.push_back(kHex[c >> 4]);
      out.push_back(kHex[c & 15]);
    }
  }
  return out;
}

}  // namespace websynth
