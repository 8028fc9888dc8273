#pragma once

#include <random>
#include <string>

#include "websynth/action.hpp"

namespace websynth::testkit {

// Random argument text: printable ASCII without double quotes plus a few
// multi-byte characters; never empty, never padded with spaces.
inline std::string random_text(std::mt19937_64& rng) {
  static const char* kWide[] = {"\xC3\xA9", "\xE4\xB8\xAD", "\xF0\x9F\x9B\x8B", "\xC3\x9F"};
  std::uniform_int_distribution<int> len(1, 24);
  std::uniform_int_distribution<int> ch(0x20, 0x7e);
  std::uniform_int_distribution<int> pick(0, 19);
  std::string s;
  const int n = len(rng);
  for (int i = 0; i < n; ++i) {
    int p = pick(rng);
    if (p == 0) {
      s += kWide[rng() % 4];
    } else if (p == 1) {
      s += (rng() & 1) ? "] [" : "[";
    } else {
      char c = static_cast<char>(ch(rng));
      if (c == '"') c = '\'';
      s.push_back(c);
    }
  }
  while (!s.empty() && s.front() == ' ') s.erase(s.begin());
  while (!s.empty() && s.back() == ' ') s.pop_back();
  if (s.empty()) s = "x";
  return s;
}

inline Action random_action(std::mt19937_64& rng) {
  std::uniform_int_distribution<std::uint32_t> idx(0, 100000);
  switch (rng() % 7) {
    case 0: return act::Click{ElementId{idx(rng)}};
    case 1: return act::Type{ElementId{idx(rng)}, random_text(rng)};
    case 2: return act::Select{ElementId{idx(rng)}, random_text(rng)};
    case 3: return act::Goto{"https://example.com/" + random_text(rng)};
    case 4: return act::SearchGoogle{random_text(rng)};
    case 5: return act::Scroll{(rng() & 1) ? ScrollDirection::kUp : ScrollDirection::kDown};
    default: return act::Stop{};
  }
}

// Arbitrary bytes, biased toward grammar fragments so the parser's deeper
// branches are reached.
inline std::string random_bytes(std::mt19937_64& rng) {
  static const char* kFragments[] = {"click", "type", "select", "goto", "scroll", "stop", "search_google",
                                     "google_search", "[", "]", " ", "\"", "'", "\n", "up", "down", "123",
                                     "-1", "99999999999999999999", "\xE2\x80\x9C", "\xE2\x80"};
  std::uniform_int_distribution<int> len(0, 40);
  std::string s;
  const int n = len(rng);
  for (int i = 0; i < n; ++i) {
    if (rng() % 3 == 0) {
      s += kFragments[rng() % (sizeof(kFragments) / sizeof(kFragments[0]))];
    } else {
      s.push_back(static_cast<char>(rng() & 0xff));
    }
  }
  return s;
}

}  // namespace websynth::testkit
