#include <httplib.h>

#include <thread>

#include "websynth/llm.hpp"
#include "websynth/util.hpp"

namespace websynth {

namespace {

bool is_retryable_status(int status) {
  return status == 408 || status == 429 || status == 500 || status == 502 || status == 503 ||
         status == 504;
}

bool mentions_context_limit(const std::string& body) {
  return body.find("context_length_exceeded") != std::string::npos ||
         body.find("maximum context length") != std::string::npos;
}

}  // namespace

HttpBackend::HttpBackend(HttpBackendConfig config, Sleeper sleeper)
    : config_(std::move(config)), sleeper_(std::move(sleeper)) {
  if (!sleeper_) sleeper_ = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
  if (config_.max_concurrency < 1) config_.max_concurrency = 1;
}

nlohmann::json HttpBackend::build_body(const ChatRequest& request) const {
  nlohmann::json content = nlohmann::json::array();
  for (const auto& part : request.user_parts) {
    if (const auto* text = std::get_if<std::string>(&part.content)) {
      content.push_back({{"type", "text"}, {"text", *text}});
    } else {
      const auto& img = std::get<ImagePart>(part.content);
      auto png = encode_png(*img.image);
      content.push_back({{"type", "image_url"},
                         {"image_url", {{"url", "data:image/png;base64," + base64_encode(png)}}}});
    }
  }
  return {{"model", config_.model},
          {"temperature", config_.temperature},
          {"messages",
           {{{"role", "system"}, {"content", request.system}}, {{"role", "user"}, {"content", content}}}}};
}

int HttpBackend::peak_in_flight() const {
  std::lock_guard lock(mu_);
  return peak_in_flight_;
}

ChatResponse HttpBackend::complete(const ChatRequest& request, Stage /*stage*/) {
  std::size_t prompt_chars = request.system.size();
  for (const auto& part : request.user_parts) {
    if (const auto* text = std::get_if<std::string>(&part.content)) prompt_chars += text->size();
  }
  if (prompt_chars > config_.max_prompt_chars) {
    throw BackendError(BackendErrorKind::kContextTooLarge, "prompt exceeds configured size limit");
  }
  const auto body = build_body(request).dump();

  {
    std::unique_lock lock(mu_);
    cv_.wait(lock, [&] { return in_flight_ < config_.max_concurrency; });
    ++in_flight_;
    peak_in_flight_ = std::max(peak_in_flight_, in_flight_);
  }
  struct Release {
    HttpBackend* self;
    ~Release() {
      {
        std::lock_guard lock(self->mu_);
        --self->in_flight_;
      }
      self->cv_.notify_one();
    }
  } release{this};

  httplib::Client client(config_.base_url);
  client.set_connection_timeout(std::chrono::seconds(10));
  client.set_read_timeout(config_.timeout);
  client.set_write_timeout(config_.timeout);
  httplib::Headers headers;
  if (!config_.api_key.empty()) headers.emplace("Authorization", "Bearer " + config_.api_key);

  std::string last_error;
  for (std::size_t attempt = 0; attempt <= config_.backoff.size(); ++attempt) {
    if (attempt > 0) sleeper_(config_.backoff[attempt - 1]);
    auto res = client.Post(config_.path, headers, body, "application/json");
    if (!res) {
      last_error = "transport error: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status == 200) {
      auto j = nlohmann::json::parse(res->body, nullptr, false);
      if (j.is_discarded() || !j.contains("choices") || j["choices"].empty()) {
        throw BackendError(BackendErrorKind::kBackendUnavailable, "malformed completion response");
      }
      ChatResponse out;
      const auto& message = j["choices"][0]["message"];
      out.text = message.value("content", std::string{});
      out.usage.calls = 1;
      if (j.contains("usage")) {
        out.usage.prompt_tokens = j["usage"].value("prompt_tokens", std::uint64_t{0});
        out.usage.completion_tokens = j["usage"].value("completion_tokens", std::uint64_t{0});
      }
      out.usage.images = request.image_count();
      return out;
    }
    if (res->status == 400 && mentions_context_limit(res->body)) {
      throw BackendError(BackendErrorKind::kContextTooLarge, "context too large: " + res->body);
    }
    if (!is_retryable_status(res->status)) {
      throw BackendError(BackendErrorKind::kBackendUnavailable,
                         "HTTP " + std::to_string(res->status) + ": " + res->body);
    }
    last_error = "HTTP " + std::to_string(res->status);
  }
  throw BackendError(BackendErrorKind::kBackendUnavailable, "retries exhausted: " + last_error);
}

}  // namespace websynth
