#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "websynth/action.hpp"
#include "websynth/agents.hpp"
#include "websynth/llm.hpp"
#include "websynth/page.hpp"

namespace websynth {

enum class SeedSource { kToplist, kHeadlist, kCustom };
std::string_view to_string(SeedSource s);
SeedSource seed_source_from_string(std::string_view s);

struct SeedSpec {
  std::string url;
  SeedSource source = SeedSource::kCustom;
  bool navigate_via_search = false;
  friend bool operator==(const SeedSpec&, const SeedSpec&) = default;
};

enum class TrajectoryStatus { kSuccess, kFailure, kHalted, kMalformed, kEnvError };
std::string_view to_string(TrajectoryStatus s);
TrajectoryStatus status_from_string(std::string_view s);

// Paths are relative to the record directory.
struct StepArtifacts {
  std::string screenshot;
  std::string som_screenshot;
  std::string html;
  std::string a11y_text;
  std::string a11y_json;
  std::string reasoning;  // empty when absent
  friend bool operator==(const StepArtifacts&, const StepArtifacts&) = default;
};

struct StepRecord {
  std::size_t ordinal = 0;
  std::string url;
  std::string refined_task;
  std::string action_nl;
  Action grounded;
  std::optional<std::string> reasoning;
  std::string pre_digest;
  std::string post_digest;

  // Observation the action was chosen on.
  std::shared_ptr<const Image> screenshot;
  std::shared_ptr<const Image> som_screenshot;
  std::string html;
  A11ySnapshot a11y;
  std::string a11y_text;

  StepArtifacts artifacts;  // filled by persist/load
};

bool operator==(const StepRecord& a, const StepRecord& b);

struct Timings {
  std::int64_t session_open_us = 0;   // steady clock
  std::int64_t session_close_us = 0;  // steady clock
  std::int64_t total_us = 0;
  friend bool operator==(const Timings&, const Timings&) = default;
};

struct TrajectoryRecord {
  std::string id;
  SeedSpec seed;
  TrajectoryStatus status = TrajectoryStatus::kEnvError;
  std::string initial_task;
  std::vector<StepRecord> steps;
  std::string summary_task;
  std::vector<std::string> summary_warnings;
  std::optional<Verdict> verdict;
  std::map<Stage, Usage> usage;
  std::string error;  // what ended the run early, if anything
  std::vector<std::string> visited_urls;
  std::string template_version;

  std::shared_ptr<const Image> final_screenshot;
  std::string final_markdown;

  Timings timings;
};

bool operator==(const TrajectoryRecord& a, const TrajectoryRecord& b);

inline constexpr int kManifestSchemaVersion = 1;

// Deterministic id: prefix of the seed URL digest.
std::string record_id_for(const SeedSpec& seed);

// Manifest JSON. Artifact digests are included when `artifact_digests` is
// given (persist supplies them).
nlohmann::json manifest_json(const TrajectoryRecord& rec,
                             const std::map<std::string, std::string>& artifact_digests = {});

// Digest of the manifest with timings removed.
std::string manifest_digest(const nlohmann::json& manifest);

}  // namespace websynth
