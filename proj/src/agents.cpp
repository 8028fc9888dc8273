#include "websynth/agents.hpp"

#include <algorithm>
#include <regex>

#include "websynth/prompts.hpp"
#include "websynth/util.hpp"

namespace websynth {

std::vector<std::string> TaskState::nl_actions() const {
  std::vector<std::string> out;
  out.reserve(history.size());
  for (const auto& h : history) out.push_back(h.action_nl);
  return out;
}

std::string_view to_string(VerdictStatus s) {
  return s == VerdictStatus::kSuccess ? "success" : "failure";
}

std::string_view to_string(AgentErrorKind kind) {
  switch (kind) {
    case AgentErrorKind::kPolicyHalt: return "PolicyHalt";
    case AgentErrorKind::kRepeatActionRejected: return "RepeatActionRejected";
    case AgentErrorKind::kMalformedVerdict: return "MalformedVerdict";
    case AgentErrorKind::kGroundingMismatch: return "GroundingMismatch";
  }
  return "AgentError";
}

TaskState initial_state(const AgentPayload& proposal, const std::string& pre_digest) {
  TaskState s;
  s.current_task = proposal.task;
  s.history.push_back({proposal.action_nl, proposal.grounded, pre_digest});
  return s;
}

std::string render_history(const std::vector<std::string>& actions) {
  if (actions.empty()) return "None";
  std::string out;
  for (std::size_t i = 0; i < actions.size(); ++i) {
    if (i) out += '\n';
    out += std::to_string(i + 1) + ". " + actions[i];
  }
  return out;
}

std::string Agents::tree_text(const PageObservation& obs) const {
  return serialize_a11y(obs.a11y, config_.a11y_limit);
}

void Agents::check_grounding(const AgentPayload& payload, const PageObservation& obs) const {
  auto id = payload.grounded.element();
  if (!id) return;
  const auto n = std::min(config_.a11y_limit, obs.a11y.elements.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (obs.a11y.elements[i].index == *id) return;
  }
  throw AgentError(AgentErrorKind::kGroundingMismatch,
                   "element " + std::to_string(id->value) + " not in the snapshot shown", payload);
}

ImageList Agents::cap_images(const ImageList& screenshots) const {
  if (screenshots.empty()) return {};
  const std::size_t steps = screenshots.size() - 1;
  const std::size_t keep = std::min(steps, config_.max_screenshots);
  ImageList out(screenshots.begin() + static_cast<std::ptrdiff_t>(steps - keep), screenshots.end());
  return out;
}

namespace {

ChatRequest page_request(std::string system, const std::string& url, const std::string& tree,
                         const PageObservation& obs) {
  ChatRequest req;
  req.system = std::move(system);
  req.user_parts.push_back(ChatPart::text(
      prompts::fill(prompts::get("page_user"), {{"INIT_URL", url}, {"A11Y_TREE", tree}})));
  if (obs.som_screenshot) req.user_parts.push_back(ChatPart::image(obs.som_screenshot));
  return req;
}

void add_images(ChatRequest& req, const ImageList& images) {
  for (const auto& img : images) {
    if (img) req.user_parts.push_back(ChatPart::image(img));
  }
}

std::string strip_decorations(std::string_view v) {
  std::string s(trim(v));
  s.erase(std::remove_if(s.begin(), s.end(), [](char c) { return c == '*' || c == '_' || c == '`'; }),
          s.end());
  std::string_view t = trim(s);
  auto strip_quote = [&](std::string_view q) {
    if (t.size() >= 2 * q.size() && t.substr(0, q.size()) == q && t.substr(t.size() - q.size()) == q) {
      t = trim(t.substr(q.size(), t.size() - 2 * q.size()));
      return true;
    }
    return false;
  };
  bool changed = true;
  while (changed) {
    changed = false;
    while (!t.empty() && (t.back() == '.' || t.back() == '!')) {
      t.remove_suffix(1);
      changed = true;
    }
    t = trim(t);
    changed = strip_quote("\"") || strip_quote("'") || strip_quote("\xE2\x80\x9C") || changed;
    if (t.size() >= 6 && t.substr(0, 3) == "\xE2\x80\x9C" && t.substr(t.size() - 3) == "\xE2\x80\x9D") {
      t = trim(t.substr(3, t.size() - 6));
      changed = true;
    }
  }
  return to_lower(t);
}

// Label text before ':' with markdown markers removed, lowercased.
std::optional<std::pair<std::string, std::string>> labelled_line(std::string_view line) {
  auto colon = line.find(':');
  if (colon == std::string_view::npos) return std::nullopt;
  std::string label;
  for (char c : line.substr(0, colon)) {
    if (c == '*' || c == '_' || c == '#' || c == '-' || c == '>') continue;
    label.push_back(c);
  }
  label = to_lower(trim(label));
  std::string_view rest = line.substr(colon + 1);
  // "**Status:** success" leaves closing markers after the colon.
  while (!rest.empty() && (rest.front() == '*' || rest.front() == '_')) rest.remove_prefix(1);
  return std::make_pair(label, std::string(trim(rest)));
}

}  // namespace

AgentPayload Agents::propose(const PageObservation& obs, const std::string& url) {
  auto req = page_request(std::string(prompts::get("proposer_system")), url, tree_text(obs), obs);
  auto resp = client_->complete(req, Stage::kProposal);
  auto payload = parse_agent_payload(resp.text);
  check_grounding(payload, obs);
  if (payload.grounded.is_stop()) {
    throw AgentError(AgentErrorKind::kPolicyHalt, "stop issued on the homepage", payload);
  }
  return payload;
}

AgentPayload Agents::refine(TaskState& state, const PageObservation& obs, const std::string& url) {
  if (state.history.empty()) throw std::invalid_argument("refine requires a proposal in history");
  auto system = prompts::fill(prompts::get("refiner_system"),
                              {{"OVERALL_TASK", state.current_task},
                               {"PREV_ACTION_LIST", render_history(state.nl_actions())}});
  auto req = page_request(std::move(system), url, tree_text(obs), obs);
  auto resp = client_->complete(req, Stage::kRefinement);
  auto payload = parse_agent_payload(resp.text);
  check_grounding(payload, obs);
  const auto& prev = state.history.back();
  if (!payload.grounded.is_stop() && payload.grounded == prev.grounded && prev.pre_digest == obs.digest) {
    throw AgentError(AgentErrorKind::kRepeatActionRejected,
                     "repeated " + render_action(payload.grounded) + " on an unchanged page", payload);
  }
  state.current_task = payload.task;
  state.history.push_back({payload.action_nl, payload.grounded, obs.digest});
  return payload;
}

std::string parse_summary(std::string_view text) {
  auto block = last_fenced_block(text);
  if (!block) throw PayloadError(PayloadErrorKind::kNoPayloadFound, "no fenced summary in response");
  auto s = collapse_whitespace(*block);
  if (s.empty()) throw PayloadError(PayloadErrorKind::kNoPayloadFound, "empty fenced summary");
  return s;
}

std::vector<std::string> validate_summary(std::string_view summary) {
  std::vector<std::string> warnings;
  bool quote = summary.find('"') != std::string_view::npos ||
               summary.find("\xE2\x80\x9C") != std::string_view::npos ||
               summary.find("\xE2\x80\x9D") != std::string_view::npos ||
               summary.find("\xE2\x80\x98") != std::string_view::npos;
  for (std::size_t i = 0; i < summary.size() && !quote; ++i) {
    if (summary[i] != '\'') continue;
    auto alpha = [&](std::size_t j) {
      return j < summary.size() && std::isalpha(static_cast<unsigned char>(summary[j]));
    };
    // Apostrophes inside words ("IKEA's", "don't") are not quotation marks.
    if (!(i > 0 && alpha(i - 1) && alpha(i + 1))) quote = true;
  }
  if (quote) warnings.emplace_back("summary contains quotation marks");
  static const std::regex kWebsiteClause(R"(\b(on|from|at|via|using)\s+[^,;]+$)", std::regex::icase);
  std::string s(trim(summary));
  while (!s.empty() && (s.back() == '.' || s.back() == '!')) s.pop_back();
  if (!std::regex_search(s, kWebsiteClause)) warnings.emplace_back("summary lacks a trailing website clause");
  return warnings;
}

Summary Agents::summarize(const std::vector<std::string>& actions, const ImageList& screenshots,
                          const std::string& url) {
  if (actions.empty()) throw std::invalid_argument("summarize requires at least one action");
  ChatRequest req;
  req.system = prompts::fill(prompts::get("summarizer_system"),
                             {{"WEBSITE_URL", url}, {"ACTION_LIST", render_history(actions)}});
  req.user_parts.push_back(ChatPart::text(std::string(prompts::get("summarizer_user"))));
  add_images(req, cap_images(screenshots));
  auto resp = client_->complete(req, Stage::kSummarization);
  Summary out;
  out.text = parse_summary(resp.text);
  out.warnings = validate_summary(out.text);
  return out;
}

Verdict parse_verdict(std::string_view text) {
  std::optional<std::string> status;
  std::string thoughts;
  for (const auto& line : split_lines(text)) {
    auto lab = labelled_line(line);
    if (!lab) continue;
    if (lab->first == "thoughts" || lab->first == "thought") thoughts = lab->second;
    if (lab->first == "status") status = strip_decorations(lab->second);
  }
  if (!status) throw AgentError(AgentErrorKind::kMalformedVerdict, "no Status line");
  Verdict v;
  v.thoughts = std::move(thoughts);
  if (*status == "success") {
    v.status = VerdictStatus::kSuccess;
  } else if (*status == "failure") {
    v.status = VerdictStatus::kFailure;
  } else {
    throw AgentError(AgentErrorKind::kMalformedVerdict, "unrecognized status: " + *status);
  }
  return v;
}

Verdict Agents::verify(const std::string& task, const std::vector<std::string>& history,
                       const ImageList& screenshots, const std::string& final_markdown) {
  if (task.empty() || history.empty()) throw std::invalid_argument("verify requires a task and history");
  ChatRequest req;
  req.system = std::string(prompts::get("verifier_system"));
  req.user_parts.push_back(ChatPart::text(prompts::fill(
      prompts::get("verifier_user"),
      {{"TASK", task}, {"ACTION_HISTORY", render_history(history)}, {"FINAL_MARKDOWN", final_markdown}})));
  add_images(req, cap_images(screenshots));
  auto resp = client_->complete(req, Stage::kVerification);
  return parse_verdict(resp.text);
}

std::string Agents::generate_reasoning(const Action& action, const std::string& task,
                                       const PageObservation& obs,
                                       const std::vector<std::string>& history) {
  ChatRequest req;
  req.system = std::string(prompts::get("reasoning_system"));
  req.user_parts.push_back(ChatPart::text(
      prompts::fill(prompts::get("reasoning_user"), {{"TASK", task},
                                                      {"PREVIOUS_ACTIONS", render_history(history)},
                                                      {"A11Y_TREE", tree_text(obs)},
                                                      {"ACTION", render_action(action)}})));
  if (obs.screenshot) req.user_parts.push_back(ChatPart::image(obs.screenshot));
  auto resp = client_->complete(req, Stage::kReasoning);
  return std::string(trim(resp.text));
}

}  // namespace websynth
