#pragma once

#include <cstdint>
#include <filesystem>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace websynth::metrics {

class EmptyInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class RaggedMatrix : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct KeyNodeResult {
  std::string task_id;
  std::uint64_t total = 1;
  std::uint64_t completed = 0;
};

struct KeyNodeMetrics {
  double avg_step_sr = 0;      // macro
  double completion_rate = 0;  // micro
  double task_sr = 0;          // tasks missing at most `tolerance` nodes
};

KeyNodeMetrics keynode_metrics(const std::vector<KeyNodeResult>& results, std::uint64_t tolerance = 0);

struct StepEvalRecord {
  std::string step_id;
  std::string predicted_element;
  std::set<std::string> gold_elements;
  std::string predicted_op;
  std::string gold_op;
};

struct StepMetrics {
  double element_accuracy = 0;
  double operation_f1 = 0;
  double step_sr = 0;
};

// Lowercased whitespace tokens.
std::vector<std::string> op_tokens(std::string_view op);
// Multiset token F1; 1.0 when both sides are empty.
double token_f1(std::string_view predicted, std::string_view gold);

StepMetrics step_metrics(const std::vector<StepEvalRecord>& records);

// Mean over tasks of the mean over runs.
double run_average(const std::vector<std::vector<int>>& outcomes);

// Line-delimited JSON readers. Blank lines are skipped; malformed lines throw
// std::runtime_error naming the line number.
std::vector<KeyNodeResult> read_keynode_jsonl(const std::filesystem::path& path);
std::vector<StepEvalRecord> read_steps_jsonl(const std::filesystem::path& path);
std::vector<std::vector<int>> read_runs_jsonl(const std::filesystem::path& path);

nlohmann::json to_json(const KeyNodeMetrics& m, std::uint64_t tolerance);
nlohmann::json to_json(const StepMetrics& m);

}  // namespace websynth::metrics
