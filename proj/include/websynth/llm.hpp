#pragma once

#include <array>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "websynth/image.hpp"

namespace websynth {

enum class Stage { kProposal, kRefinement, kSummarization, kVerification, kReasoning };

inline constexpr std::array<Stage, 5> kAllStages = {Stage::kProposal, Stage::kRefinement,
                                                    Stage::kSummarization, Stage::kVerification,
                                                    Stage::kReasoning};

std::string_view to_string(Stage stage);
Stage stage_from_string(std::string_view name);

struct ImagePart {
  std::shared_ptr<const Image> image;
  std::string digest;  // Image::digest() of *image
};

struct ChatPart {
  std::variant<std::string, ImagePart> content;

  static ChatPart text(std::string t) { return ChatPart{std::move(t)}; }
  static ChatPart image(std::shared_ptr<const Image> img);
  bool is_text() const { return std::holds_alternative<std::string>(content); }
};

struct ChatRequest {
  std::string system;
  std::vector<ChatPart> user_parts;

  std::size_t image_count() const;
  // Stable replay key: stage plus digests of the system text, each text part,
  // and each image's pixel digest.
  std::string key(Stage stage) const;
};

struct Usage {
  std::uint64_t calls = 0;
  std::uint64_t prompt_tokens = 0;
  std::uint64_t completion_tokens = 0;
  std::uint64_t images = 0;

  std::uint64_t text_tokens() const { return prompt_tokens + completion_tokens; }
  Usage& operator+=(const Usage& other);
  friend bool operator==(const Usage&, const Usage&) = default;
};

nlohmann::json to_json(const Usage& u);
Usage usage_from_json(const nlohmann::json& j);

struct ChatResponse {
  std::string text;
  Usage usage;  // calls is always 1 for a single completion
};

// Per-stage usage tallies. Thread-safe; tallies only grow.
class UsageMeter {
 public:
  UsageMeter() = default;
  UsageMeter(const UsageMeter& other);
  UsageMeter& operator=(const UsageMeter& other);

  void record(Stage stage, const Usage& usage);
  void merge(const UsageMeter& other);
  Usage get(Stage stage) const;
  Usage total() const;
  std::map<Stage, Usage> snapshot() const;

 private:
  mutable std::mutex mu_;
  std::map<Stage, Usage> tallies_;
};

enum class BackendErrorKind { kBackendUnavailable, kContextTooLarge, kReplayMiss };

class BackendError : public std::runtime_error {
 public:
  BackendError(BackendErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  BackendErrorKind kind() const { return kind_; }

 private:
  BackendErrorKind kind_;
};

class ChatBackend {
 public:
  virtual ~ChatBackend() = default;
  // Must be safe to call concurrently.
  virtual ChatResponse complete(const ChatRequest& request, Stage stage) = 0;
};

// Backend plus the meter its calls are charged to.
class LlmClient {
 public:
  LlmClient(ChatBackend& backend, UsageMeter& meter) : backend_(&backend), meter_(&meter) {}
  ChatResponse complete(const ChatRequest& request, Stage stage);
  UsageMeter& meter() { return *meter_; }

 private:
  ChatBackend* backend_;
  UsageMeter* meter_;
};

struct TranscriptEntry {
  Stage stage = Stage::kProposal;
  std::string key;
  std::string text;
  Usage usage;
  std::string template_version;
};

nlohmann::json to_json(const TranscriptEntry& e);
TranscriptEntry transcript_entry_from_json(const nlohmann::json& j);

// Replays stored completions keyed by ChatRequest::key. A transcript
// directory holds *.json files, each one entry or an array of entries.
class ScriptedBackend final : public ChatBackend {
 public:
  ScriptedBackend() = default;
  explicit ScriptedBackend(const std::filesystem::path& dir);

  void add(TranscriptEntry entry);
  std::size_t size() const { return entries_.size(); }
  ChatResponse complete(const ChatRequest& request, Stage stage) override;

 private:
  std::unordered_map<std::string, TranscriptEntry> entries_;
};

// Returns queued responses per stage in FIFO order, whatever the request.
// Used to author transcripts and in tests.
class QueueBackend final : public ChatBackend {
 public:
  void push(Stage stage, std::string text, std::optional<Usage> usage = std::nullopt);
  ChatResponse complete(const ChatRequest& request, Stage stage) override;
  std::size_t pending(Stage stage) const;
  void clear();

 private:
  mutable std::mutex mu_;
  std::map<Stage, std::deque<std::pair<std::string, std::optional<Usage>>>> queues_;
};

// Wraps another backend and keeps every (key, response) it served.
class RecordingBackend final : public ChatBackend {
 public:
  RecordingBackend(ChatBackend& inner, std::string template_version)
      : inner_(&inner), template_version_(std::move(template_version)) {}
  ChatResponse complete(const ChatRequest& request, Stage stage) override;
  std::vector<TranscriptEntry> entries() const;
  // One file per entry: <stage>-<key prefix>.json
  void write(const std::filesystem::path& dir) const;

 private:
  ChatBackend* inner_;
  std::string template_version_;
  mutable std::mutex mu_;
  std::vector<TranscriptEntry> entries_;
};

// Usage estimate for a request/response pair when no metered count exists:
// pinned-tokenizer token counts of all text plus the image count.
Usage estimate_usage(const ChatRequest& request, std::string_view completion);

struct HttpBackendConfig {
  std::string base_url = "https://api.openai.com";
  std::string path = "/v1/chat/completions";
  std::string model = "gpt-4o";
  std::string api_key;
  double temperature = 1.0;
  int max_concurrency = 16;
  // Retry delays after a transport or rate-limit failure; one retry per entry.
  std::vector<std::chrono::milliseconds> backoff = {std::chrono::seconds(1), std::chrono::seconds(4),
                                                    std::chrono::seconds(16)};
  std::chrono::seconds timeout{120};
  std::size_t max_prompt_chars = 2'000'000;
};

// Chat-completions client over HTTP(S) with image attachments as PNG data URLs.
class HttpBackend final : public ChatBackend {
 public:
  using Sleeper = std::function<void(std::chrono::milliseconds)>;

  explicit HttpBackend(HttpBackendConfig config, Sleeper sleeper = {});
  ChatResponse complete(const ChatRequest& request, Stage stage) override;

  nlohmann::json build_body(const ChatRequest& request) const;
  int peak_in_flight() const;

 private:
  HttpBackendConfig config_;
  Sleeper sleeper_;
  mutable std::mutex mu_;
  std::condition_variable cv_;
  int in_flight_ = 0;
  int peak_in_flight_ = 0;
};

}  // namespace websynth
