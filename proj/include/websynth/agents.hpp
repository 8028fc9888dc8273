#pragma once

#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "websynth/action.hpp"
#include "websynth/llm.hpp"
#include "websynth/page.hpp"

namespace websynth {

struct HistoryEntry {
  std::string action_nl;
  Action grounded;
  std::string pre_digest;  // page digest of the observation the action was chosen on
};

struct TaskState {
  std::string current_task;
  std::vector<HistoryEntry> history;

  std::vector<std::string> nl_actions() const;
};

enum class VerdictStatus { kSuccess, kFailure };
std::string_view to_string(VerdictStatus s);

struct Verdict {
  std::string thoughts;
  VerdictStatus status = VerdictStatus::kFailure;
  friend bool operator==(const Verdict&, const Verdict&) = default;
};

enum class AgentErrorKind { kPolicyHalt, kRepeatActionRejected, kMalformedVerdict, kGroundingMismatch };
std::string_view to_string(AgentErrorKind kind);

class AgentError : public std::runtime_error {
 public:
  AgentError(AgentErrorKind kind, const std::string& detail,
             std::optional<AgentPayload> payload = std::nullopt)
      : std::runtime_error(std::string(to_string(kind)) + ": " + detail),
        kind_(kind),
        payload_(std::move(payload)) {}
  AgentErrorKind kind() const { return kind_; }
  // The parsed payload that triggered the error, when there was one.
  const std::optional<AgentPayload>& payload() const { return payload_; }

 private:
  AgentErrorKind kind_;
  std::optional<AgentPayload> payload_;
};

struct AgentConfig {
  std::size_t a11y_limit = 200;    // lines of the serialized tree sent per call
  std::size_t max_screenshots = 8; // step screenshots sent to summarizer/verifier
};

struct Summary {
  std::string text;
  std::vector<std::string> warnings;
};

using ImageList = std::vector<std::shared_ptr<const Image>>;

class Agents {
 public:
  Agents(LlmClient& client, AgentConfig config = {}) : client_(&client), config_(config) {}

  const AgentConfig& config() const { return config_; }

  // Throws AgentError(kPolicyHalt) carrying the payload when the model stops
  // on the homepage.
  AgentPayload propose(const PageObservation& obs, const std::string& url);

  // Appends the payload to state.history and adopts its task.
  AgentPayload refine(TaskState& state, const PageObservation& obs, const std::string& url);

  // `screenshots` ends with the final page; earlier entries are step shots.
  Summary summarize(const std::vector<std::string>& actions, const ImageList& screenshots,
                    const std::string& url);

  Verdict verify(const std::string& task, const std::vector<std::string>& history,
                 const ImageList& screenshots, const std::string& final_markdown);

  std::string generate_reasoning(const Action& action, const std::string& task,
                                 const PageObservation& obs, const std::vector<std::string>& history);

 private:
  void check_grounding(const AgentPayload& payload, const PageObservation& obs) const;
  std::string tree_text(const PageObservation& obs) const;
  ImageList cap_images(const ImageList& screenshots) const;

  LlmClient* client_;
  AgentConfig config_;
};

TaskState initial_state(const AgentPayload& proposal, const std::string& pre_digest);

// "1. first\n2. second"; "None" when empty.
std::string render_history(const std::vector<std::string>& actions);

// Parses the Thoughts/Status reply. Throws AgentError(kMalformedVerdict).
Verdict parse_verdict(std::string_view text);

// Answer inside the last ``` fence. Throws PayloadError(kNoPayloadFound).
std::string parse_summary(std::string_view text);

// Non-fatal problems with a task summary.
std::vector<std::string> validate_summary(std::string_view summary);

}  // namespace websynth
