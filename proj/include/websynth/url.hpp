#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace websynth {

struct Url {
  std::string scheme;  // lowercase
  std::string host;    // lowercase, no port
  std::string port;
  std::string path;    // "/" when empty
  std::string query;   // without '?'
  std::string fragment;

  // Serialization without the fragment.
  std::string without_fragment() const;
  std::string str() const;
};

// Scheme-qualified URLs only ("scheme://host..."). Empty optional otherwise.
std::optional<Url> parse_url(std::string_view text);

// Resolves `ref` against `base` the way a browser resolves an href.
std::optional<Url> resolve_url(const Url& base, std::string_view ref);

// Last two host labels, or three under a known two-part public suffix
// (co.uk, com.au, ...). Single-label hosts and IPv4 literals return as is.
std::string registrable_domain(std::string_view host);

std::string url_encode_component(std::string_view s);

}  // namespace websynth
