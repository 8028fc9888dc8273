#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "websynth/agents.hpp"
#include "websynth/datastore.hpp"
#include "websynth/environment.hpp"
#include "websynth/llm.hpp"
#include "websynth/records.hpp"

namespace websynth {

struct RunConfig {
  int max_steps = 15;
  int parallelism = 60;
  Viewport viewport;
  int domain_cap = 2;
  std::string blocklist;  // path, optional
  bool reasoning = false;
  std::size_t a11y_limit = 200;
  std::size_t max_screenshots = 8;
  CostRates rates;

  void validate() const;  // throws std::invalid_argument
};

RunConfig run_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const RunConfig& c);

struct SeedFilterResult {
  std::vector<SeedSpec> seeds;
  std::size_t malformed = 0;
  std::size_t blocked = 0;
  std::size_t bad_scheme = 0;
  std::size_t duplicates = 0;
};

// Each line is either JSON ({"url":..., "source":..., "navigate_via_search":...})
// or "<url> [toplist|headlist|custom] [search]". Blank and '#' lines are ignored.
// Deduplicates by registrable domain plus path.
SeedFilterResult filter_seeds(const std::vector<std::string>& lines, const SafetyPolicy& policy,
                              SeedSource default_source = SeedSource::kCustom);

// Never throws; failures are reflected in the record's status and error.
TrajectoryRecord run_trajectory(const SeedSpec& seed, const RunConfig& cfg, Driver& driver, ChatBackend& backend);

struct BatchReport {
  std::size_t total = 0;
  std::map<TrajectoryStatus, std::size_t> by_status;
  std::vector<std::string> ids;  // in seed order
  int peak_concurrency = 0;
  std::int64_t wall_us = 0;
  std::map<Stage, Usage> usage;
  CostLedger cost;
};

nlohmann::json to_json(const BatchReport& r);

using RecordCallback = std::function<void(const TrajectoryRecord&)>;

// Runs every seed with at most cfg.parallelism trajectories in flight and at
// most cfg.domain_cap sessions per registrable domain. Throws DatastoreError
// only when the store itself fails.
BatchReport run_batch(const std::vector<SeedSpec>& seeds, const RunConfig& cfg, Driver& driver, ChatBackend& backend,
                      Datastore& store, const RecordCallback& on_record = {});

}  // namespace websynth
