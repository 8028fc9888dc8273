#include "websynth/prompts.hpp"

#include <stdexcept>
#include <utility>

#include "websynth/util.hpp"

namespace websynth::prompts {

namespace detail {
std::pair<const std::pair<std::string_view, std::string_view>*, std::size_t> all();
}  // namespace detail

std::string_view get(std::string_view name) {
  auto [data, n] = detail::all();
  for (std::size_t i = 0; i < n; ++i) {
    if (data[i].first == name) return data[i].second;
  }
  throw std::out_of_range("unknown prompt template: " + std::string(name));
}

std::vector<std::string_view> names() {
  auto [data, n] = detail::all();
  std::vector<std::string_view> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(data[i].first);
  return out;
}

const std::string& version() {
  static const std::string kVersion = [] {
    auto [data, n] = detail::all();
    std::string material;
    for (std::size_t i = 0; i < n; ++i) {
      material += data[i].first;
      material += '\0';
      material += data[i].second;
      material += '\0';
    }
    return "tpl-" + sha256_hex(material).substr(0, 12);
  }();
  return kVersion;
}

std::string fill(std::string_view tmpl, const std::map<std::string, std::string>& vars) {
  std::string out;
  out.reserve(tmpl.size());
  std::size_t i = 0;
  while (i < tmpl.size()) {
    if (tmpl[i] == '{') {
      auto close = tmpl.find('}', i + 1);
      if (close != std::string_view::npos) {
        auto it = vars.find(std::string(tmpl.substr(i + 1, close - i - 1)));
        if (it != vars.end()) {
          out += it->second;
          i = close + 1;
          continue;
        }
      }
    }
    out.push_back(tmpl[i]);
    ++i;
  }
  return out;
}

}  // namespace websynth::prompts
