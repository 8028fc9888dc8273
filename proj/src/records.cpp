#include "websynth/records.hpp"

#include "websynth/util.hpp"

namespace websynth {

std::string_view to_string(SeedSource s) {
  switch (s) {
    case SeedSource::kToplist: return "toplist";
    case SeedSource::kHeadlist: return "headlist";
    case SeedSource::kCustom: return "custom";
  }
  return "custom";
}

SeedSource seed_source_from_string(std::string_view s) {
  if (s == "toplist") return SeedSource::kToplist;
  if (s == "headlist") return SeedSource::kHeadlist;
  if (s == "custom") return SeedSource::kCustom;
  throw std::invalid_argument("unknown seed source: " + std::string(s));
}

std::string_view to_string(TrajectoryStatus s) {
  switch (s) {
    case TrajectoryStatus::kSuccess: return "success";
    case TrajectoryStatus::kFailure: return "failure";
    case TrajectoryStatus::kHalted: return "halted";
    case TrajectoryStatus::kMalformed: return "malformed";
    case TrajectoryStatus::kEnvError: return "env_error";
  }
  return "env_error";
}

TrajectoryStatus status_from_string(std::string_view s) {
  for (auto st : {TrajectoryStatus::kSuccess, TrajectoryStatus::kFailure, TrajectoryStatus::kHalted,
                  TrajectoryStatus::kMalformed, TrajectoryStatus::kEnvError}) {
    if (to_string(st) == s) return st;
  }
  throw std::invalid_argument("unknown trajectory status: " + std::string(s));
}

namespace {

bool same_image(const std::shared_ptr<const Image>& a, const std::shared_ptr<const Image>& b) {
  if (!a || !b) return !a && !b;
  return *a == *b;
}

}  // namespace

bool operator==(const StepRecord& a, const StepRecord& b) {
  return a.ordinal == b.ordinal && a.url == b.url && a.refined_task == b.refined_task &&
         a.action_nl == b.action_nl && a.grounded == b.grounded && a.reasoning == b.reasoning &&
         a.pre_digest == b.pre_digest && a.post_digest == b.post_digest && same_image(a.screenshot, b.screenshot) &&
         same_image(a.som_screenshot, b.som_screenshot) && a.html == b.html && a.a11y == b.a11y &&
         a.a11y_text == b.a11y_text && a.artifacts == b.artifacts;
}

bool operator==(const TrajectoryRecord& a, const TrajectoryRecord& b) {
  return a.id == b.id && a.seed == b.seed && a.status == b.status && a.initial_task == b.initial_task &&
         a.steps == b.steps && a.summary_task == b.summary_task && a.summary_warnings == b.summary_warnings &&
         a.verdict == b.verdict && a.usage == b.usage && a.error == b.error && a.visited_urls == b.visited_urls &&
         a.template_version == b.template_version && same_image(a.final_screenshot, b.final_screenshot) &&
         a.final_markdown == b.final_markdown && a.timings == b.timings;
}

std::string record_id_for(const SeedSpec& seed) { return sha256_hex(seed.url).substr(0, 16); }

nlohmann::json manifest_json(const TrajectoryRecord& rec, const std::map<std::string, std::string>& digests) {
  nlohmann::json steps = nlohmann::json::array();
  for (const auto& s : rec.steps) {
    nlohmann::json j = {{"ordinal", s.ordinal},
                        {"url", s.url},
                        {"refined_task", s.refined_task},
                        {"action_nl", s.action_nl},
                        {"grounded", render_action(s.grounded)},
                        {"pre_digest", s.pre_digest},
                        {"post_digest", s.post_digest},
                        {"artifacts",
                         {{"screenshot", s.artifacts.screenshot},
                          {"som_screenshot", s.artifacts.som_screenshot},
                          {"html", s.artifacts.html},
                          {"a11y_text", s.artifacts.a11y_text},
                          {"a11y_json", s.artifacts.a11y_json}}}};
    if (s.reasoning) {
      j["reasoning"] = *s.reasoning;
      j["artifacts"]["reasoning"] = s.artifacts.reasoning;
    }
    steps.push_back(std::move(j));
  }
  nlohmann::json usage = nlohmann::json::object();
  for (const auto& [stage, u] : rec.usage) usage[std::string(to_string(stage))] = to_json(u);
  nlohmann::json m = {
      {"schema_version", kManifestSchemaVersion},
      {"id", rec.id},
      {"seed",
       {{"url", rec.seed.url}, {"source", to_string(rec.seed.source)}, {"navigate_via_search", rec.seed.navigate_via_search}}},
      {"status", to_string(rec.status)},
      {"initial_task", rec.initial_task},
      {"summary_task", rec.summary_task},
      {"summary_warnings", rec.summary_warnings},
      {"verdict", rec.verdict ? nlohmann::json{{"thoughts", rec.verdict->thoughts},
                                               {"status", to_string(rec.verdict->status)}}
                              : nlohmann::json()},
      {"usage", usage},
      {"error", rec.error},
      {"visited_urls", rec.visited_urls},
      {"template_version", rec.template_version},
      {"steps", steps},
      {"final",
       {{"screenshot", rec.final_screenshot ? "final.png" : ""}, {"markdown", "final.md"}}},
      {"artifact_digests", digests},
      {"timings",
       {{"session_open_us", rec.timings.session_open_us},
        {"session_close_us", rec.timings.session_close_us},
        {"total_us", rec.timings.total_us}}},
  };
  return m;
}

std::string manifest_digest(const nlohmann::json& manifest) {
  auto copy = manifest;
  copy.erase("timings");
  return sha256_hex(copy.dump());
}

}  // namespace websynth
