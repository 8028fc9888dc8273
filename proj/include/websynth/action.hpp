#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>

#include <nlohmann/json.hpp>

namespace websynth {

// Index of an element in an accessibility snapshot.
struct ElementId {
  std::uint32_t value = 0;
  friend bool operator==(ElementId, ElementId) = default;
  friend auto operator<=>(ElementId, ElementId) = default;
};

enum class ScrollDirection { kUp, kDown };

namespace act {
struct Click {
  ElementId elem;
  friend bool operator==(const Click&, const Click&) = default;
};
struct Type {
  ElementId elem;
  std::string text;
  friend bool operator==(const Type&, const Type&) = default;
};
struct Select {
  ElementId elem;
  std::string option;
  friend bool operator==(const Select&, const Select&) = default;
};
struct Goto {
  std::string url;
  friend bool operator==(const Goto&, const Goto&) = default;
};
struct SearchGoogle {
  std::string query;
  friend bool operator==(const SearchGoogle&, const SearchGoogle&) = default;
};
struct Scroll {
  ScrollDirection direction = ScrollDirection::kDown;
  friend bool operator==(const Scroll&, const Scroll&) = default;
};
struct Stop {
  friend bool operator==(const Stop&, const Stop&) = default;
};
}  // namespace act

// One grounded action from the seven-verb web navigation vocabulary.
class Action {
 public:
  using Variant = std::variant<act::Click, act::Type, act::Select, act::Goto, act::SearchGoogle,
                               act::Scroll, act::Stop>;

  Action() : v_(act::Stop{}) {}
  template <typename T>
    requires std::is_constructible_v<Variant, T>
  Action(T alt) : v_(std::move(alt)) {}  // NOLINT(google-explicit-constructor)

  const Variant& variant() const { return v_; }
  template <typename T>
  bool is() const {
    return std::holds_alternative<T>(v_);
  }
  template <typename T>
  const T* get_if() const {
    return std::get_if<T>(&v_);
  }

  // Element this action targets, for click/type/select.
  std::optional<ElementId> element() const;
  bool is_stop() const { return is<act::Stop>(); }
  bool is_scroll() const { return is<act::Scroll>(); }
  // Lowercase verb as written in canonical form ("click", "search_google", ...).
  std::string_view verb() const;

  friend bool operator==(const Action&, const Action&) = default;

 private:
  Variant v_;
};

enum class ActionErrorKind {
  kUnknownVerb,
  kMalformedBrackets,
  kBadIndex,
  kMissingArgument,
  kInvalidArgument,
  kQuotationMark,
  kNotSingleLine,
};

std::string_view to_string(ActionErrorKind kind);

class ActionError : public std::runtime_error {
 public:
  ActionError(ActionErrorKind kind, const std::string& detail)
      : std::runtime_error(std::string(to_string(kind)) + ": " + detail), kind_(kind) {}
  ActionErrorKind kind() const { return kind_; }

 private:
  ActionErrorKind kind_;
};

// Parses one canonical action string such as "click [127]" or
// "type [43] [content to type]". Verbs are case-insensitive and
// "google_search" is accepted as an alias of "search_google".
Action parse_action(std::string_view text);

// Canonical lowercase rendering, e.g. "select [5] [Large]".
std::string render_action(const Action& action);

// True when the action satisfies the grammar invariants, i.e. when
// parse_action(render_action(a)) == a.
bool is_valid(const Action& action);

struct AgentPayload {
  std::string task;
  std::string action_nl;
  Action grounded;
  friend bool operator==(const AgentPayload&, const AgentPayload&) = default;
};

enum class PayloadErrorKind { kNoPayloadFound, kMissingKey, kGroundedActionUnparseable };

class PayloadError : public std::runtime_error {
 public:
  PayloadError(PayloadErrorKind kind, const std::string& detail,
               std::optional<ActionErrorKind> cause = std::nullopt)
      : std::runtime_error(detail), kind_(kind), cause_(cause) {}
  PayloadErrorKind kind() const { return kind_; }
  // Set when kind() is kGroundedActionUnparseable.
  std::optional<ActionErrorKind> action_error() const { return cause_; }

 private:
  PayloadErrorKind kind_;
  std::optional<ActionErrorKind> cause_;
};

// Extracts the JSON object a proposer/refiner completion was asked to put
// inside a ``` fence. Prefers the last fenced block; without any fence, the
// first balanced-brace object that is valid JSON is used.
AgentPayload parse_agent_payload(std::string_view response);

// Finds the body of the last ``` fenced block, with any language tag line
// removed. Empty optional when the text contains no complete fence.
std::optional<std::string> last_fenced_block(std::string_view text);

// Training-prompt action schema:
//   {"action": "click", "action_natural_language": str, "idx": N}
//   {"action": "type", ..., "idx": N, "value": str}
//   {"action": "scroll [up]", ...}
Action parse_training_action(const nlohmann::json& obj);
nlohmann::json to_training_action(const Action& action, std::string_view action_nl);

}  // namespace websynth
