#include "websynth/html.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <unordered_map>

#include "websynth/util.hpp"

namespace websynth::html {

namespace {

constexpr std::array<std::string_view, 14> kVoidElements = {
    "area", "base", "br", "col", "embed", "hr", "img", "input", "link", "meta", "param", "source",
    "track", "wbr"};

bool is_raw_text_element(std::string_view tag) {
  return tag == "script" || tag == "style" || tag == "textarea" || tag == "title" ||
         tag == "noscript" || tag == "xmp";
}

// Elements whose start tag implicitly closes an open <p>.
bool closes_paragraph(std::string_view tag) {
  static constexpr std::array<std::string_view, 27> kTags = {
      "address", "article", "aside", "blockquote", "details", "div", "dl", "fieldset",
      "figcaption", "figure", "footer", "form", "h1", "h2", "h3", "h4", "h5", "h6", "header",
      "hr", "main", "nav", "ol", "p", "pre", "section", "table"};
  return std::find(kTags.begin(), kTags.end(), tag) != kTags.end() || tag == "ul";
}

void append_utf8(std::string& out, std::uint32_t cp) {
  if (cp == 0 || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) cp = 0xFFFD;
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

const std::unordered_map<std::string_view, std::uint32_t>& named_entities() {
  static const std::unordered_map<std::string_view, std::uint32_t> kEntities = {
      {"amp", '&'},      {"lt", '<'},       {"gt", '>'},       {"quot", '"'},
      {"apos", '\''},    {"nbsp", 0xA0},    {"copy", 0xA9},    {"reg", 0xAE},
      {"trade", 0x2122}, {"hellip", 0x2026}, {"mdash", 0x2014}, {"ndash", 0x2013},
      {"lsquo", 0x2018}, {"rsquo", 0x2019}, {"ldquo", 0x201C}, {"rdquo", 0x201D},
      {"euro", 0x20AC},  {"pound", 0xA3},   {"yen", 0xA5},     {"cent", 0xA2},
      {"times", 0xD7},   {"divide", 0xF7},  {"deg", 0xB0},     {"middot", 0xB7},
      {"laquo", 0xAB},   {"raquo", 0xBB},   {"bull", 0x2022},  {"star", 0x2606},
  };
  return kEntities;
}

struct Tokenizer {
  std::string_view src;
  std::size_t pos = 0;

  bool at_end() const { return pos >= src.size(); }
  char peek(std::size_t ahead = 0) const {
    return pos + ahead < src.size() ? src[pos + ahead] : '\0';
  }
  void skip_space() {
    while (!at_end() && std::isspace(static_cast<unsigned char>(src[pos]))) ++pos;
  }
};

class TreeBuilder {
 public:
  TreeBuilder() {
    doc_.root = std::make_unique<Node>();
    stack_.push_back(doc_.root.get());
  }

  void text(std::string data) {
    if (data.empty()) return;
    Node* cur = stack_.back();
    if (!cur->children.empty() && cur->children.back()->kind == Node::Kind::kText) {
      cur->children.back()->text += data;
      return;
    }
    auto node = std::make_unique<Node>();
    node->kind = Node::Kind::kText;
    node->text = std::move(data);
    node->parent = cur;
    cur->children.push_back(std::move(node));
  }

  Node* start(std::string tag, std::vector<std::pair<std::string, std::string>> attrs,
              bool self_closing) {
    apply_implicit_closes(tag);
    auto node = std::make_unique<Node>();
    node->tag = std::move(tag);
    node->attrs = std::move(attrs);
    Node* parent = stack_.back();
    node->parent = parent;
    Node* raw = node.get();
    parent->children.push_back(std::move(node));
    if (!self_closing && !is_void_element(raw->tag)) {
      if (stack_.size() > kMaxDepth) throw UnparseableDocument("element nesting exceeds limit");
      stack_.push_back(raw);
    }
    return raw;
  }

  void end(std::string_view tag) {
    for (std::size_t i = stack_.size(); i-- > 1;) {
      if (stack_[i]->tag == tag) {
        stack_.resize(i);
        return;
      }
      // A stray end tag never closes anything outside the nearest open table.
      if (tag != "table" && (stack_[i]->tag == "table")) return;
    }
  }

  Document finish() { return std::move(doc_); }

 private:
  bool open(std::string_view tag) const {
    return std::any_of(stack_.begin(), stack_.end(), [&](const Node* n) { return n->tag == tag; });
  }
  void close_if_current(std::initializer_list<std::string_view> tags) {
    while (stack_.size() > 1) {
      auto& cur = stack_.back()->tag;
      if (std::find(tags.begin(), tags.end(), cur) == tags.end()) return;
      stack_.pop_back();
    }
  }
  void close_through(std::string_view tag, std::initializer_list<std::string_view> barrier) {
    for (std::size_t i = stack_.size(); i-- > 1;) {
      if (stack_[i]->tag == tag) {
        stack_.resize(i);
        return;
      }
      if (std::find(barrier.begin(), barrier.end(), stack_[i]->tag) != barrier.end()) return;
    }
  }

  void apply_implicit_closes(std::string_view tag) {
    if (closes_paragraph(tag) && open("p")) close_through("p", {"div", "td", "th", "li", "button"});
    if (tag == "li") close_through("li", {"ul", "ol"});
    if (tag == "dt" || tag == "dd") {
      close_through("dt", {"dl"});
      close_through("dd", {"dl"});
    }
    if (tag == "option") close_if_current({"option"});
    if (tag == "optgroup") close_if_current({"option", "optgroup"});
    if (tag == "tr") close_through("tr", {"table", "tbody", "thead", "tfoot"});
    if (tag == "td" || tag == "th") {
      close_through("td", {"tr", "table"});
      close_through("th", {"tr", "table"});
    }
    if (tag == "tbody" || tag == "thead" || tag == "tfoot") {
      close_through("tbody", {"table"});
      close_through("thead", {"table"});
      close_through("tfoot", {"table"});
    }
  }

  Document doc_;
  std::vector<Node*> stack_;
};

std::string lower_ascii(std::string_view s) { return to_lower(s); }

std::string read_name(Tokenizer& t) {
  std::size_t start = t.pos;
  while (!t.at_end()) {
    char c = t.src[t.pos];
    if (std::isspace(static_cast<unsigned char>(c)) || c == '>' || c == '/' || c == '=') break;
    ++t.pos;
  }
  return lower_ascii(t.src.substr(start, t.pos - start));
}

std::vector<std::pair<std::string, std::string>> read_attributes(Tokenizer& t, bool& self_closing) {
  std::vector<std::pair<std::string, std::string>> attrs;
  self_closing = false;
  while (!t.at_end()) {
    t.skip_space();
    char c = t.peek();
    if (c == '>') {
      ++t.pos;
      return attrs;
    }
    if (c == '/') {
      ++t.pos;
      if (t.peek() == '>') {
        self_closing = true;
        ++t.pos;
        return attrs;
      }
      continue;
    }
    auto name = read_name(t);
    if (name.empty()) {
      ++t.pos;
      continue;
    }
    t.skip_space();
    std::string value;
    if (t.peek() == '=') {
      ++t.pos;
      t.skip_space();
      char q = t.peek();
      if (q == '"' || q == '\'') {
        ++t.pos;
        auto close = t.src.find(q, t.pos);
        if (close == std::string_view::npos) close = t.src.size();
        value = decode_entities(t.src.substr(t.pos, close - t.pos));
        t.pos = std::min(close + 1, t.src.size());
      } else {
        std::size_t start = t.pos;
        while (!t.at_end() && !std::isspace(static_cast<unsigned char>(t.peek())) && t.peek() != '>') {
          ++t.pos;
        }
        value = decode_entities(t.src.substr(start, t.pos - start));
      }
    }
    bool duplicate = std::any_of(attrs.begin(), attrs.end(),
                                 [&](const auto& kv) { return kv.first == name; });
    if (!duplicate) attrs.emplace_back(std::move(name), std::move(value));
  }
  return attrs;
}

}  // namespace

const std::string* Node::attr(std::string_view name) const {
  for (const auto& [k, v] : attrs) {
    if (k == name) return &v;
  }
  return nullptr;
}

const Node* Document::body() const {
  std::vector<const Node*> pending{root.get()};
  while (!pending.empty()) {
    const Node* n = pending.back();
    pending.pop_back();
    if (n->is_element("body")) return n;
    for (auto it = n->children.rbegin(); it != n->children.rend(); ++it) pending.push_back(it->get());
  }
  return root.get();
}

bool is_void_element(std::string_view tag) {
  return std::find(kVoidElements.begin(), kVoidElements.end(), tag) != kVoidElements.end();
}

std::string decode_entities(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] != '&') {
      out.push_back(text[i]);
      continue;
    }
    auto semi = text.find(';', i + 1);
    if (semi == std::string_view::npos || semi - i > 12) {
      out.push_back('&');
      continue;
    }
    auto name = text.substr(i + 1, semi - i - 1);
    if (!name.empty() && name[0] == '#') {
      std::uint32_t cp = 0;
      const char* first = name.data() + 1;
      const char* last = name.data() + name.size();
      int base = 10;
      if (name.size() > 1 && (name[1] == 'x' || name[1] == 'X')) {
        ++first;
        base = 16;
      }
      auto [ptr, ec] = std::from_chars(first, last, cp, base);
      if (ec == std::errc{} && ptr == last && first != last) {
        append_utf8(out, cp);
        i = semi;
        continue;
      }
    } else if (auto it = named_entities().find(name); it != named_entities().end()) {
      append_utf8(out, it->second);
      i = semi;
      continue;
    }
    out.push_back('&');
  }
  return out;
}

Document parse(std::string_view source) {
  if (source.find('\0') != std::string_view::npos) {
    throw UnparseableDocument("document contains NUL bytes");
  }
  Tokenizer t{source};
  TreeBuilder builder;
  std::string pending_text;

  auto flush_text = [&] {
    if (!pending_text.empty()) {
      builder.text(decode_entities(pending_text));
      pending_text.clear();
    }
  };

  while (!t.at_end()) {
    char c = t.peek();
    if (c != '<') {
      pending_text.push_back(c);
      ++t.pos;
      continue;
    }
    // Comment.
    if (t.src.compare(t.pos, 4, "<!--") == 0) {
      flush_text();
      auto close = t.src.find("-->", t.pos + 4);
      t.pos = close == std::string_view::npos ? t.src.size() : close + 3;
      continue;
    }
    // Doctype, CDATA, processing instructions.
    if (t.peek(1) == '!' || t.peek(1) == '?') {
      flush_text();
      auto close = t.src.find('>', t.pos);
      t.pos = close == std::string_view::npos ? t.src.size() : close + 1;
      continue;
    }
    if (t.peek(1) == '/') {
      if (!std::isalpha(static_cast<unsigned char>(t.peek(2)))) {
        // "</>" or "</ " is not an end tag; skip to '>'.
        flush_text();
        auto close = t.src.find('>', t.pos);
        t.pos = close == std::string_view::npos ? t.src.size() : close + 1;
        continue;
      }
      flush_text();
      t.pos += 2;
      auto name = read_name(t);
      auto close = t.src.find('>', t.pos);
      t.pos = close == std::string_view::npos ? t.src.size() : close + 1;
      builder.end(name);
      continue;
    }
    if (!std::isalpha(static_cast<unsigned char>(t.peek(1)))) {
      pending_text.push_back(c);
      ++t.pos;
      continue;
    }
    flush_text();
    ++t.pos;
    auto name = read_name(t);
    bool self_closing = false;
    auto attrs = read_attributes(t, self_closing);
    Node* node = builder.start(name, std::move(attrs), self_closing);
    if (is_raw_text_element(name) && !self_closing) {
      // Raw text runs to the matching end tag, case-insensitively.
      std::string closing = "</" + name;
      std::size_t end = t.pos;
      while (true) {
        end = t.src.find("</", end);
        if (end == std::string_view::npos) break;
        if (starts_with_ci(t.src.substr(end), closing)) break;
        end += 2;
      }
      auto body = t.src.substr(t.pos, (end == std::string_view::npos ? t.src.size() : end) - t.pos);
      if (name == "textarea" || name == "title") {
        builder.text(decode_entities(body));
      } else {
        builder.text(std::string(body));
      }
      (void)node;
      if (end == std::string_view::npos) {
        t.pos = t.src.size();
        builder.end(name);
      } else {
        auto close = t.src.find('>', end);
        t.pos = close == std::string_view::npos ? t.src.size() : close + 1;
        builder.end(name);
      }
    }
  }
  flush_text();
  return builder.finish();
}

namespace {

bool is_inline_element(std::string_view tag) {
  static constexpr std::array<std::string_view, 16> kInline = {
      "a", "abbr", "b", "bdi", "cite", "code", "em", "i", "kbd", "mark", "q", "s", "small",
      "span", "strong", "u"};
  return std::find(kInline.begin(), kInline.end(), tag) != kInline.end() || tag == "sub" ||
         tag == "sup" || tag == "label" || tag == "font";
}

void gather_text(const Node& n, std::string& raw) {
  if (n.kind == Node::Kind::kText) {
    raw += n.text;
    return;
  }
  if (n.tag == "script" || n.tag == "style" || n.tag == "template") return;
  if (n.tag == "img") {
    if (auto* alt = n.attr("alt")) {
      raw.push_back(' ');
      raw += *alt;
      raw.push_back(' ');
    }
    return;
  }
  bool boundary = !n.tag.empty() && !is_inline_element(n.tag);
  if (boundary) raw.push_back(' ');
  for (const auto& child : n.children) gather_text(*child, raw);
  if (boundary) raw.push_back(' ');
}

}  // namespace

std::string text_content(const Node& node) {
  std::string raw;
  gather_text(node, raw);
  return collapse_whitespace(raw);
}

namespace {

void serialize_into(const Node& n, std::string& out) {
  if (n.kind == Node::Kind::kText) {
    auto collapsed = collapse_whitespace(n.text);
    if (!collapsed.empty()) {
      out += collapsed;
      out.push_back('\n');
    }
    return;
  }
  if (!n.tag.empty()) {
    out += '<' + n.tag;
    auto attrs = n.attrs;
    std::sort(attrs.begin(), attrs.end());
    for (const auto& [k, v] : attrs) out += ' ' + k + "=\"" + v + '"';
    out += ">\n";
  }
  for (const auto& child : n.children) serialize_into(*child, out);
  if (!n.tag.empty() && !is_void_element(n.tag)) out += "</" + n.tag + ">\n";
}

}  // namespace

std::string serialize_normalized(const Node& node) {
  std::string out;
  serialize_into(node, out);
  return out;
}

std::string locator_of(const Node& node) {
  std::vector<std::string> parts;
  for (const Node* n = &node; n != nullptr && n->parent != nullptr; n = n->parent) {
    std::size_t ordinal = 0;
    for (const auto& sibling : n->parent->children) {
      if (sibling.get() == n) break;
      if (sibling->is_element(n->tag)) ++ordinal;
    }
    parts.push_back(n->tag + "[" + std::to_string(ordinal) + "]");
  }
  std::string out;
  for (auto it = parts.rbegin(); it != parts.rend(); ++it) {
    if (!out.empty()) out.push_back('/');
    out += *it;
  }
  return out;
}

const Node* find_by_locator(const Node& root, std::string_view locator) {
  const Node* cur = &root;
  while (!locator.empty()) {
    auto slash = locator.find('/');
    auto part = locator.substr(0, slash);
    locator = slash == std::string_view::npos ? std::string_view{} : locator.substr(slash + 1);
    auto open = part.find('[');
    if (open == std::string_view::npos || part.back() != ']') return nullptr;
    auto tag = part.substr(0, open);
    std::size_t ordinal = 0;
    auto digits = part.substr(open + 1, part.size() - open - 2);
    if (std::from_chars(digits.data(), digits.data() + digits.size(), ordinal).ec != std::errc{}) {
      return nullptr;
    }
    const Node* next = nullptr;
    for (const auto& child : cur->children) {
      if (child->is_element(tag) && ordinal-- == 0) {
        next = child.get();
        break;
      }
    }
    if (next == nullptr) return nullptr;
    cur = next;
  }
  return cur;
}

}  // namespace websynth::html
