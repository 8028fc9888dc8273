#include "websynth/llm.hpp"

#include <algorithm>
#include <thread>

#include "websynth/util.hpp"

namespace websynth {

std::string_view to_string(Stage stage) {
  switch (stage) {
    case Stage::kProposal: return "proposal";
    case Stage::kRefinement: return "refinement";
    case Stage::kSummarization: return "summarization";
    case Stage::kVerification: return "verification";
    case Stage::kReasoning: return "reasoning";
  }
  return "unknown";
}

Stage stage_from_string(std::string_view name) {
  for (auto s : kAllStages) {
    if (to_string(s) == name) return s;
  }
  throw std::invalid_argument("unknown stage: " + std::string(name));
}

ChatPart ChatPart::image(std::shared_ptr<const Image> img) {
  ImagePart part;
  part.digest = img->digest();
  part.image = std::move(img);
  return ChatPart{std::move(part)};
}

std::size_t ChatRequest::image_count() const {
  return static_cast<std::size_t>(
      std::count_if(user_parts.begin(), user_parts.end(), [](const ChatPart& p) { return !p.is_text(); }));
}

std::string ChatRequest::key(Stage stage) const {
  std::string material = std::string(to_string(stage)) + "\n" + sha256_hex(system) + "\n";
  for (const auto& part : user_parts) {
    if (const auto* text = std::get_if<std::string>(&part.content)) {
      material += "t:" + sha256_hex(*text) + "\n";
    } else {
      material += "i:" + std::get<ImagePart>(part.content).digest + "\n";
    }
  }
  return sha256_hex(material);
}

Usage& Usage::operator+=(const Usage& other) {
  calls += other.calls;
  prompt_tokens += other.prompt_tokens;
  completion_tokens += other.completion_tokens;
  images += other.images;
  return *this;
}

nlohmann::json to_json(const Usage& u) {
  return {{"calls", u.calls},
          {"prompt_tokens", u.prompt_tokens},
          {"completion_tokens", u.completion_tokens},
          {"images", u.images}};
}

Usage usage_from_json(const nlohmann::json& j) {
  Usage u;
  u.calls = j.value("calls", std::uint64_t{1});
  u.prompt_tokens = j.value("prompt_tokens", std::uint64_t{0});
  u.completion_tokens = j.value("completion_tokens", std::uint64_t{0});
  u.images = j.value("images", std::uint64_t{0});
  return u;
}

UsageMeter::UsageMeter(const UsageMeter& other) : tallies_(other.snapshot()) {}

UsageMeter& UsageMeter::operator=(const UsageMeter& other) {
  if (this != &other) {
    auto copy = other.snapshot();
    std::lock_guard lock(mu_);
    tallies_ = std::move(copy);
  }
  return *this;
}

void UsageMeter::record(Stage stage, const Usage& usage) {
  std::lock_guard lock(mu_);
  tallies_[stage] += usage;
}

void UsageMeter::merge(const UsageMeter& other) {
  for (const auto& [stage, usage] : other.snapshot()) record(stage, usage);
}

Usage UsageMeter::get(Stage stage) const {
  std::lock_guard lock(mu_);
  auto it = tallies_.find(stage);
  return it == tallies_.end() ? Usage{} : it->second;
}

Usage UsageMeter::total() const {
  std::lock_guard lock(mu_);
  Usage sum;
  for (const auto& [_, u] : tallies_) sum += u;
  return sum;
}

std::map<Stage, Usage> UsageMeter::snapshot() const {
  std::lock_guard lock(mu_);
  return tallies_;
}

ChatResponse LlmClient::complete(const ChatRequest& request, Stage stage) {
  auto response = backend_->complete(request, stage);
  meter_->record(stage, response.usage);
  return response;
}

nlohmann::json to_json(const TranscriptEntry& e) {
  return {{"stage", to_string(e.stage)},
          {"key", e.key},
          {"text", e.text},
          {"usage", to_json(e.usage)},
          {"template_version", e.template_version}};
}

TranscriptEntry transcript_entry_from_json(const nlohmann::json& j) {
  TranscriptEntry e;
  e.stage = stage_from_string(j.at("stage").get<std::string>());
  e.key = j.at("key").get<std::string>();
  e.text = j.at("text").get<std::string>();
  if (j.contains("usage")) e.usage = usage_from_json(j.at("usage"));
  e.usage.calls = 1;
  e.template_version = j.value("template_version", std::string{});
  return e;
}

ScriptedBackend::ScriptedBackend(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) {
    throw std::runtime_error("transcript directory not found: " + dir.string());
  }
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.path().extension() == ".json") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& file : files) {
    auto j = nlohmann::json::parse(read_file(file));
    if (j.is_array()) {
      for (const auto& item : j) add(transcript_entry_from_json(item));
    } else {
      add(transcript_entry_from_json(j));
    }
  }
}

void ScriptedBackend::add(TranscriptEntry entry) {
  auto key = entry.key;
  entries_[key] = std::move(entry);
}

ChatResponse ScriptedBackend::complete(const ChatRequest& request, Stage stage) {
  auto key = request.key(stage);
  auto it = entries_.find(key);
  if (it == entries_.end() || it->second.stage != stage) {
    throw BackendError(BackendErrorKind::kReplayMiss,
                       "no transcript for " + std::string(to_string(stage)) + " request " + key +
                           " (prompt templates or fixture pages may have changed)");
  }
  ChatResponse r;
  r.text = it->second.text;
  r.usage = it->second.usage;
  r.usage.calls = 1;
  return r;
}

void QueueBackend::push(Stage stage, std::string text, std::optional<Usage> usage) {
  std::lock_guard lock(mu_);
  queues_[stage].emplace_back(std::move(text), usage);
}

ChatResponse QueueBackend::complete(const ChatRequest& request, Stage stage) {
  std::pair<std::string, std::optional<Usage>> next;
  {
    std::lock_guard lock(mu_);
    auto& q = queues_[stage];
    if (q.empty()) {
      throw BackendError(BackendErrorKind::kReplayMiss,
                         "no queued response for stage " + std::string(to_string(stage)));
    }
    next = std::move(q.front());
    q.pop_front();
  }
  ChatResponse r;
  r.usage = next.second.value_or(estimate_usage(request, next.first));
  r.usage.calls = 1;
  r.text = std::move(next.first);
  return r;
}

std::size_t QueueBackend::pending(Stage stage) const {
  std::lock_guard lock(mu_);
  auto it = queues_.find(stage);
  return it == queues_.end() ? 0 : it->second.size();
}

void QueueBackend::clear() {
  std::lock_guard lock(mu_);
  queues_.clear();
}

ChatResponse RecordingBackend::complete(const ChatRequest& request, Stage stage) {
  auto response = inner_->complete(request, stage);
  TranscriptEntry e;
  e.stage = stage;
  e.key = request.key(stage);
  e.text = response.text;
  e.usage = response.usage;
  e.template_version = template_version_;
  std::lock_guard lock(mu_);
  entries_.push_back(std::move(e));
  return response;
}

std::vector<TranscriptEntry> RecordingBackend::entries() const {
  std::lock_guard lock(mu_);
  return entries_;
}

void RecordingBackend::write(const std::filesystem::path& dir) const {
  std::filesystem::create_directories(dir);
  for (const auto& e : entries()) {
    auto name = std::string(to_string(e.stage)) + "-" + e.key.substr(0, 16) + ".json";
    write_file_atomic(dir / name, to_json(e).dump(2) + "\n");
  }
}

Usage estimate_usage(const ChatRequest& request, std::string_view completion) {
  Usage u;
  u.calls = 1;
  u.prompt_tokens = count_tokens(request.system);
  for (const auto& part : request.user_parts) {
    if (const auto* text = std::get_if<std::string>(&part.content)) u.prompt_tokens += count_tokens(*text);
  }
  u.images = request.image_count();
  u.completion_tokens = count_tokens(completion);
  return u;
}

}  // namespace websynth
