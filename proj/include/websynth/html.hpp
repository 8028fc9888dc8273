#pragma once

#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace websynth::html {

class UnparseableDocument : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Node {
  enum class Kind { kElement, kText };

  Kind kind = Kind::kElement;
  std::string tag;  // lowercase; empty for text nodes and the document root
  std::vector<std::pair<std::string, std::string>> attrs;
  std::string text;  // decoded character data for text nodes
  std::vector<std::unique_ptr<Node>> children;
  Node* parent = nullptr;

  bool is_element() const { return kind == Kind::kElement; }
  bool is_element(std::string_view name) const { return kind == Kind::kElement && tag == name; }
  const std::string* attr(std::string_view name) const;
  bool has_attr(std::string_view name) const { return attr(name) != nullptr; }
};

struct Document {
  std::unique_ptr<Node> root;  // synthetic container, tag ""
  const Node* body() const;    // <body> if present, else root
};

// Lenient HTML parser: unknown or unbalanced markup is repaired rather than
// rejected. Throws UnparseableDocument only for input that cannot be an HTML
// document at all (embedded NUL bytes, nesting deeper than kMaxDepth).
Document parse(std::string_view source);

inline constexpr std::size_t kMaxDepth = 1024;

bool is_void_element(std::string_view tag);
std::string decode_entities(std::string_view text);

// Concatenated descendant text; <img alt> contributes its alt text.
// Whitespace is collapsed.
std::string text_content(const Node& node);

// Deterministic serialization used for page digests: tags, sorted attributes,
// and collapsed text. Script and style bodies are kept verbatim.
std::string serialize_normalized(const Node& node);

// Structural locator "html/body/div[2]/a[0]" (child element positions by tag).
std::string locator_of(const Node& node);
const Node* find_by_locator(const Node& root, std::string_view locator);

}  // namespace websynth::html
