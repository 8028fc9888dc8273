#include "websynth/action.hpp"

#include <cctype>
#include <charconv>
#include <limits>

#include "websynth/util.hpp"

namespace websynth {

namespace {

constexpr std::uint32_t kMaxElementIndex = std::numeric_limits<std::int32_t>::max();

[[noreturn]] void fail(ActionErrorKind kind, const std::string& detail) {
  throw ActionError(kind, detail);
}

bool is_double_quote(std::string_view s, std::size_t i, std::size_t* width) {
  if (s[i] == '"') {
    *width = 1;
    return true;
  }
  // U+201C / U+201D curly double quotes.
  if (i + 2 < s.size() && static_cast<unsigned char>(s[i]) == 0xE2 &&
      static_cast<unsigned char>(s[i + 1]) == 0x80 &&
      (static_cast<unsigned char>(s[i + 2]) == 0x9C ||
       static_cast<unsigned char>(s[i + 2]) == 0x9D)) {
    *width = 3;
    return true;
  }
  return false;
}

bool contains_double_quote(std::string_view s) {
  std::size_t w = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (is_double_quote(s, i, &w)) return true;
  }
  return false;
}

// Removes one layer of matching quotes (", ', `, or curly doubles) around the
// whole candidate.
std::string_view strip_outer_quotes(std::string_view s) {
  if (s.size() >= 2) {
    char f = s.front();
    char b = s.back();
    if ((f == '"' || f == '\'' || f == '`') && f == b) return trim(s.substr(1, s.size() - 2));
  }
  std::size_t w1 = 0;
  std::size_t w2 = 0;
  if (s.size() >= 6 && is_double_quote(s, 0, &w1) && w1 == 3 &&
      is_double_quote(s, s.size() - 3, &w2) && w2 == 3) {
    return trim(s.substr(3, s.size() - 6));
  }
  return s;
}

ElementId parse_index(std::string_view raw) {
  auto s = trim(raw);
  if (s.empty()) fail(ActionErrorKind::kMissingArgument, "empty element index");
  std::uint64_t value = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    fail(ActionErrorKind::kBadIndex, "element index is not a non-negative integer: " +
                                         std::string(s));
  }
  if (value > kMaxElementIndex) fail(ActionErrorKind::kBadIndex, "element index out of range");
  return ElementId{static_cast<std::uint32_t>(value)};
}

std::string checked_text(std::string_view raw, std::string_view what) {
  auto s = trim(raw);
  if (s.empty()) fail(ActionErrorKind::kMissingArgument, "empty " + std::string(what));
  return std::string(s);
}

// Splits "[a] [b...]" into a and b, where b extends to the final ']'.
// `rest` starts at the first '['.
std::pair<std::string_view, std::string_view> split_index_and_text(std::string_view rest) {
  // rest[0] == '['
  auto close = rest.find(']');
  if (close == std::string_view::npos) fail(ActionErrorKind::kMalformedBrackets, "unclosed '['");
  auto index_part = rest.substr(1, close - 1);
  auto after = rest.substr(close + 1);
  auto after_trimmed = trim(after);
  if (after_trimmed.empty()) fail(ActionErrorKind::kMissingArgument, "missing second argument");
  if (after_trimmed.front() != '[') {
    fail(ActionErrorKind::kMalformedBrackets, "second argument must be bracket-delimited");
  }
  if (after_trimmed.back() != ']' || after_trimmed.size() < 2) {
    fail(ActionErrorKind::kMalformedBrackets, "second argument is not closed by ']'");
  }
  return {index_part, after_trimmed.substr(1, after_trimmed.size() - 2)};
}

// Single "[...]" argument spanning to the final ']'.
std::string_view single_argument(std::string_view rest) {
  if (rest.empty()) fail(ActionErrorKind::kMissingArgument, "missing argument");
  if (rest.front() != '[') fail(ActionErrorKind::kMalformedBrackets, "argument must be in '[...]'");
  if (rest.size() < 2 || rest.back() != ']') {
    fail(ActionErrorKind::kMalformedBrackets, "argument is not closed by ']'");
  }
  return rest.substr(1, rest.size() - 2);
}

bool has_control_chars(std::string_view s) {
  for (char c : s) {
    auto u = static_cast<unsigned char>(c);
    if (u < 0x20 || u == 0x7f) return true;
  }
  return false;
}

}  // namespace

std::string_view to_string(ActionErrorKind kind) {
  switch (kind) {
    case ActionErrorKind::kUnknownVerb: return "UnknownVerb";
    case ActionErrorKind::kMalformedBrackets: return "MalformedBrackets";
    case ActionErrorKind::kBadIndex: return "BadIndex";
    case ActionErrorKind::kMissingArgument: return "MissingArgument";
    case ActionErrorKind::kInvalidArgument: return "InvalidArgument";
    case ActionErrorKind::kQuotationMark: return "QuotationMark";
    case ActionErrorKind::kNotSingleLine: return "NotSingleLine";
  }
  return "Unknown";
}

std::optional<ElementId> Action::element() const {
  if (auto* c = get_if<act::Click>()) return c->elem;
  if (auto* t = get_if<act::Type>()) return t->elem;
  if (auto* s = get_if<act::Select>()) return s->elem;
  return std::nullopt;
}

std::string_view Action::verb() const {
  struct Visitor {
    std::string_view operator()(const act::Click&) const { return "click"; }
    std::string_view operator()(const act::Type&) const { return "type"; }
    std::string_view operator()(const act::Select&) const { return "select"; }
    std::string_view operator()(const act::Goto&) const { return "goto"; }
    std::string_view operator()(const act::SearchGoogle&) const { return "search_google"; }
    std::string_view operator()(const act::Scroll&) const { return "scroll"; }
    std::string_view operator()(const act::Stop&) const { return "stop"; }
  };
  return std::visit(Visitor{}, v_);
}

Action parse_action(std::string_view text) {
  auto s = trim(text);
  if (s.find('\n') != std::string_view::npos || s.find('\r') != std::string_view::npos) {
    fail(ActionErrorKind::kNotSingleLine, "action must be a single line");
  }
  s = strip_outer_quotes(s);
  if (contains_double_quote(s)) {
    fail(ActionErrorKind::kQuotationMark, "quotation marks are not allowed in actions");
  }
  if (s.empty()) fail(ActionErrorKind::kUnknownVerb, "empty action");

  std::size_t verb_end = 0;
  while (verb_end < s.size() &&
         (std::isalpha(static_cast<unsigned char>(s[verb_end])) || s[verb_end] == '_')) {
    ++verb_end;
  }
  if (verb_end == 0) fail(ActionErrorKind::kUnknownVerb, "action does not start with a verb");
  const std::string verb = to_lower(s.substr(0, verb_end));
  const auto rest = trim(s.substr(verb_end));

  if (verb == "click") {
    auto arg = single_argument(rest);
    if (arg.find('[') != std::string_view::npos || arg.find(']') != std::string_view::npos) {
      fail(ActionErrorKind::kMalformedBrackets, "click takes exactly one argument");
    }
    return act::Click{parse_index(arg)};
  }
  if (verb == "type" || verb == "select") {
    if (rest.empty()) fail(ActionErrorKind::kMissingArgument, verb + " needs two arguments");
    if (rest.front() != '[') fail(ActionErrorKind::kMalformedBrackets, "arguments must be in '[...]'");
    auto [index_part, text_part] = split_index_and_text(rest);
    auto elem = parse_index(index_part);
    if (verb == "type") return act::Type{elem, checked_text(text_part, "text")};
    return act::Select{elem, checked_text(text_part, "option")};
  }
  if (verb == "goto") {
    return act::Goto{checked_text(single_argument(rest), "url")};
  }
  if (verb == "search_google" || verb == "google_search") {
    return act::SearchGoogle{checked_text(single_argument(rest), "query")};
  }
  if (verb == "scroll") {
    auto dir = to_lower(trim(single_argument(rest)));
    if (dir == "up") return act::Scroll{ScrollDirection::kUp};
    if (dir == "down") return act::Scroll{ScrollDirection::kDown};
    if (dir.empty()) fail(ActionErrorKind::kMissingArgument, "scroll needs a direction");
    fail(ActionErrorKind::kInvalidArgument, "scroll direction must be up or down");
  }
  if (verb == "stop") {
    // Completions sometimes write "stop [N/A]" or "stop []"; the argument is ignored.
    if (!rest.empty()) single_argument(rest);
    return act::Stop{};
  }
  fail(ActionErrorKind::kUnknownVerb, "unknown verb '" + verb + "'");
}

std::string render_action(const Action& action) {
  struct Visitor {
    std::string operator()(const act::Click& a) const {
      return "click [" + std::to_string(a.elem.value) + "]";
    }
    std::string operator()(const act::Type& a) const {
      return "type [" + std::to_string(a.elem.value) + "] [" + a.text + "]";
    }
    std::string operator()(const act::Select& a) const {
      return "select [" + std::to_string(a.elem.value) + "] [" + a.option + "]";
    }
    std::string operator()(const act::Goto& a) const { return "goto [" + a.url + "]"; }
    std::string operator()(const act::SearchGoogle& a) const {
      return "search_google [" + a.query + "]";
    }
    std::string operator()(const act::Scroll& a) const {
      return a.direction == ScrollDirection::kUp ? "scroll [up]" : "scroll [down]";
    }
    std::string operator()(const act::Stop&) const { return "stop"; }
  };
  return std::visit(Visitor{}, action.variant());
}

bool is_valid(const Action& action) {
  auto text_ok = [](const std::string& s) {
    return !s.empty() && trim(s).size() == s.size() && !has_control_chars(s) &&
           !contains_double_quote(s);
  };
  if (auto e = action.element(); e && e->value > kMaxElementIndex) return false;
  if (auto* t = action.get_if<act::Type>()) return text_ok(t->text);
  if (auto* s = action.get_if<act::Select>()) return text_ok(s->option);
  if (auto* g = action.get_if<act::Goto>()) return text_ok(g->url);
  if (auto* q = action.get_if<act::SearchGoogle>()) return text_ok(q->query);
  return true;
}

std::optional<std::string> last_fenced_block(std::string_view text) {
  std::vector<std::size_t> fences;
  for (auto pos = text.find("```"); pos != std::string_view::npos; pos = text.find("```", pos + 3)) {
    fences.push_back(pos);
  }
  if (fences.size() < 2) return std::nullopt;
  // Fences pair up in order; an odd trailing fence is unterminated.
  std::size_t pairs = fences.size() / 2;
  auto open = fences[2 * (pairs - 1)];
  auto close = fences[2 * (pairs - 1) + 1];
  auto body = text.substr(open + 3, close - open - 3);
  // Drop a language tag such as "json" directly after the opening fence.
  auto newline = body.find('\n');
  if (newline != std::string_view::npos) {
    auto tag = trim(body.substr(0, newline));
    bool is_tag = !tag.empty() && tag.size() <= 16;
    for (char c : tag) {
      if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '-') is_tag = false;
    }
    if (is_tag) body = body.substr(newline + 1);
  }
  return std::string(trim(body));
}

namespace {

// Start offsets and lengths of every balanced {...} span, respecting JSON
// string literals, in order of their opening brace.
std::optional<nlohmann::json> first_json_object(std::string_view text) {
  for (std::size_t start = text.find('{'); start != std::string_view::npos;
       start = text.find('{', start + 1)) {
    int depth = 0;
    bool in_string = false;
    bool escaped = false;
    for (std::size_t i = start; i < text.size(); ++i) {
      char c = text[i];
      if (in_string) {
        if (escaped) {
          escaped = false;
        } else if (c == '\\') {
          escaped = true;
        } else if (c == '"') {
          in_string = false;
        }
        continue;
      }
      if (c == '"') {
        in_string = true;
      } else if (c == '{') {
        ++depth;
      } else if (c == '}') {
        if (--depth == 0) {
          auto candidate = text.substr(start, i - start + 1);
          auto parsed = nlohmann::json::parse(candidate, nullptr, false);
          if (!parsed.is_discarded() && parsed.is_object()) return parsed;
          break;
        }
      }
    }
  }
  return std::nullopt;
}

std::string required_string(const nlohmann::json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end() || !it->is_string()) {
    throw PayloadError(PayloadErrorKind::kMissingKey, std::string("missing key: ") + key);
  }
  auto value = std::string(trim(it->get<std::string>()));
  if (value.empty()) {
    throw PayloadError(PayloadErrorKind::kMissingKey, std::string("empty value for key: ") + key);
  }
  return value;
}

}  // namespace

AgentPayload parse_agent_payload(std::string_view response) {
  std::optional<nlohmann::json> obj;
  if (auto block = last_fenced_block(response)) {
    obj = first_json_object(*block);
  } else {
    obj = first_json_object(response);
  }
  if (!obj) throw PayloadError(PayloadErrorKind::kNoPayloadFound, "no JSON payload in response");

  AgentPayload payload;
  payload.task = required_string(*obj, "task");
  payload.action_nl = required_string(*obj, "action_in_natural_language");
  auto grounded = required_string(*obj, "grounded_action");
  try {
    payload.grounded = parse_action(grounded);
  } catch (const ActionError& e) {
    throw PayloadError(PayloadErrorKind::kGroundedActionUnparseable,
                       "grounded_action '" + grounded + "': " + e.what(), e.kind());
  }
  return payload;
}

namespace {

ElementId training_index(const nlohmann::json& obj) {
  auto it = obj.find("idx");
  if (it == obj.end() || it->is_null()) fail(ActionErrorKind::kMissingArgument, "missing key: idx");
  if (it->is_number_integer()) {
    auto v = it->get<std::int64_t>();
    if (v < 0 || v > static_cast<std::int64_t>(kMaxElementIndex)) {
      fail(ActionErrorKind::kBadIndex, "idx out of range");
    }
    return ElementId{static_cast<std::uint32_t>(v)};
  }
  if (it->is_string()) return parse_index(it->get<std::string>());
  fail(ActionErrorKind::kBadIndex, "idx must be a non-negative integer");
}

std::string training_value(const nlohmann::json& obj) {
  auto it = obj.find("value");
  if (it == obj.end() || !it->is_string()) {
    fail(ActionErrorKind::kMissingArgument, "missing key: value");
  }
  return checked_text(it->get<std::string>(), "value");
}

}  // namespace

Action parse_training_action(const nlohmann::json& obj) {
  if (!obj.is_object()) fail(ActionErrorKind::kMissingArgument, "training action must be an object");
  auto it = obj.find("action");
  if (it == obj.end() || !it->is_string()) fail(ActionErrorKind::kMissingArgument, "missing key: action");
  auto verb = to_lower(collapse_whitespace(it->get<std::string>()));

  if (verb == "click") return act::Click{training_index(obj)};
  if (verb == "type") return act::Type{training_index(obj), training_value(obj)};
  if (verb == "select") return act::Select{training_index(obj), training_value(obj)};
  if (verb == "goto") return act::Goto{training_value(obj)};
  if (verb == "google_search" || verb == "search_google") return act::SearchGoogle{training_value(obj)};
  if (verb == "scroll [up]") return act::Scroll{ScrollDirection::kUp};
  if (verb == "scroll [down]") return act::Scroll{ScrollDirection::kDown};
  if (verb == "stop") return act::Stop{};
  fail(ActionErrorKind::kUnknownVerb, "unknown training action '" + verb + "'");
}

nlohmann::json to_training_action(const Action& action, std::string_view action_nl) {
  nlohmann::json out;
  struct Visitor {
    nlohmann::json& out;
    void operator()(const act::Click& a) const {
      out["action"] = "click";
      out["idx"] = a.elem.value;
    }
    void operator()(const act::Type& a) const {
      out["action"] = "type";
      out["idx"] = a.elem.value;
      out["value"] = a.text;
    }
    void operator()(const act::Select& a) const {
      out["action"] = "select";
      out["idx"] = a.elem.value;
      out["value"] = a.option;
    }
    void operator()(const act::Goto& a) const {
      out["action"] = "goto";
      out["value"] = a.url;
    }
    void operator()(const act::SearchGoogle& a) const {
      out["action"] = "google_search";
      out["value"] = a.query;
    }
    void operator()(const act::Scroll& a) const {
      out["action"] = a.direction == ScrollDirection::kUp ? "scroll [up]" : "scroll [down]";
    }
    void operator()(const act::Stop&) const { out["action"] = "stop"; }
  };
  std::visit(Visitor{out}, action.variant());
  out["action_natural_language"] = std::string(action_nl);
  return out;
}

}  // namespace websynth
