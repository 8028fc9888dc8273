#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "websynth/records.hpp"

namespace websynth {

enum class DatastoreErrorKind { kDatastoreUnavailable, kCorruptManifest, kMissingArtifact, kEmptySelection };
std::string_view to_string(DatastoreErrorKind kind);

class DatastoreError : public std::runtime_error {
 public:
  DatastoreError(DatastoreErrorKind kind, const std::string& detail)
      : std::runtime_error(std::string(to_string(kind)) + ": " + detail), kind_(kind) {}
  DatastoreErrorKind kind() const { return kind_; }

 private:
  DatastoreErrorKind kind_;
};

// One directory per trajectory under `root`:
//   <id>/manifest.json
//   <id>/steps/NNN.{png,som.png,html,a11y.txt,a11y.json,reasoning.txt}
//   <id>/final.{png,md}
class Datastore {
 public:
  // Creates `root` if needed. Throws kDatastoreUnavailable when it cannot.
  explicit Datastore(std::filesystem::path root);

  const std::filesystem::path& root() const { return root_; }

  // Writes artifacts, then the manifest. Returns the id actually used, which
  // gains a numeric suffix when the record id is already taken.
  std::string persist(TrajectoryRecord& rec);
  TrajectoryRecord load(const std::string& id) const;
  std::vector<std::string> ids() const;

 private:
  std::filesystem::path root_;
  std::mutex claim_mu_;
};

TrajectoryRecord load_record(const std::filesystem::path& dir);
// Manifest only; verifies the schema version and that artifacts exist.
nlohmann::json load_manifest(const std::filesystem::path& dir);

// ---------------------------------------------------------------------------

struct Histogram {
  double lo = 0;
  double width = 0;
  std::vector<std::uint64_t> counts;
  std::uint64_t p90 = 0;  // nearest-rank 90th percentile of the values
};

Histogram token_histogram(const std::vector<std::uint64_t>& values, std::size_t bins = 20);
std::string histogram_csv(const Histogram& h);

enum class StatsScope { kAll, kSuccessOnly };

struct DatasetStats {
  std::uint64_t n_total = 0;
  std::uint64_t n_success = 0;
  std::uint64_t n_corrupt = 0;
  std::uint64_t n_counted = 0;  // records inside the scope
  std::uint64_t unique_urls = 0;
  double avg_steps = 0;
  double avg_elements_per_image = 0;
  std::uint64_t tokens = 0;
  std::uint64_t elements = 0;
  std::uint64_t images = 0;
  std::vector<std::uint64_t> tokens_per_trajectory;
  Histogram histogram;
};

DatasetStats compute_stats(const std::filesystem::path& dataset, StatsScope scope);
nlohmann::json to_json(const DatasetStats& s);

// Success records with at most `max_scrolls` grounded scroll actions; sorted ids.
std::vector<std::string> filter_training(const std::filesystem::path& dataset, std::size_t max_scrolls = 2);

// ---------------------------------------------------------------------------

using Micros = std::int64_t;

// Rates in integer micro-dollars.
struct CostRates {
  Micros per_million_tokens = 2'500'000;
  Micros per_image = 2'800;
  // Flat cost per call for a stage; overrides token pricing for that stage.
  std::map<Stage, Micros> per_call;
};

CostRates cost_rates_from_json(const nlohmann::json& j);
nlohmann::json to_json(const CostRates& r);

struct StageCost {
  std::uint64_t calls = 0;
  std::uint64_t text_tokens = 0;
  std::uint64_t images = 0;
  Micros dollars = 0;
};

struct CostLedger {
  std::map<Stage, StageCost> stages;
  StageCost totals;
  std::uint64_t n_total = 0;
  std::uint64_t n_success = 0;
  Micros cost_per_trajectory = 0;
  std::optional<Micros> cost_per_success;
};

CostLedger cost_report(const std::map<Stage, Usage>& usage, const CostRates& rates, std::uint64_t n_total,
                       std::uint64_t n_success);
nlohmann::json to_json(const CostLedger& l);

// a/b rounded half up, for non-negative a and positive b.
Micros div_round(Micros a, std::uint64_t b);
// "0.148" style rendering with `decimals` places (half up).
std::string format_dollars(Micros m, int decimals = 3);

// ---------------------------------------------------------------------------

enum class SamplingStrategy { kTrajectoryThenStep, kUniformStep };
std::string_view to_string(SamplingStrategy s);
SamplingStrategy sampling_strategy_from_string(std::string_view s);

struct TrainingInstance {
  std::string trajectory_id;
  std::size_t step = 0;
  std::string system;
  std::string user;
  nlohmann::json target;
  std::string image;  // relative to the dataset root
};

nlohmann::json to_json(const TrainingInstance& t);

// Uniform integer in [0, n) by rejection; identical on every platform.
std::uint64_t bounded_draw(std::uint64_t n, std::mt19937_64& rng);

struct ExportOptions {
  SamplingStrategy strategy = SamplingStrategy::kTrajectoryThenStep;
  std::uint64_t seed = 0;
  std::size_t draws = 0;  // 0 means one draw per available step
  std::size_t candidates = 50;
};

// Training instances drawn with replacement. Throws kEmptySelection when the
// selected trajectories hold no steps.
std::vector<TrainingInstance> export_training(const std::filesystem::path& dataset,
                                              const std::vector<std::string>& ids, const ExportOptions& opts);

// Draw sequence only: (trajectory position, step) per draw, given step counts.
std::vector<std::pair<std::size_t, std::size_t>> sample_steps(const std::vector<std::size_t>& steps_per_trajectory,
                                                             SamplingStrategy strategy, std::uint64_t seed,
                                                             std::size_t draws);

}  // namespace websynth
