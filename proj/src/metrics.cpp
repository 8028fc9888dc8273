#include "websynth/metrics.hpp"

#include <map>

#include "websynth/util.hpp"

namespace websynth::metrics {

KeyNodeMetrics keynode_metrics(const std::vector<KeyNodeResult>& results, std::uint64_t tolerance) {
  if (results.empty()) throw EmptyInput("keynode_metrics: no results");
  double macro = 0;
  std::uint64_t done = 0, total = 0, passed = 0;
  for (const auto& r : results) {
    if (r.total == 0 || r.completed > r.total) {
      throw std::invalid_argument("key node counts out of range for task " + r.task_id);
    }
    macro += static_cast<double>(r.completed) / static_cast<double>(r.total);
    done += r.completed;
    total += r.total;
    if (r.total - r.completed <= tolerance) ++passed;
  }
  const auto n = static_cast<double>(results.size());
  return {macro / n, static_cast<double>(done) / static_cast<double>(total), static_cast<double>(passed) / n};
}

std::vector<std::string> op_tokens(std::string_view op) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : op) {
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v') {
      if (!cur.empty()) out.push_back(to_lower(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) out.push_back(to_lower(cur));
  return out;
}

double token_f1(std::string_view predicted, std::string_view gold) {
  auto p = op_tokens(predicted);
  auto g = op_tokens(gold);
  if (p.empty() && g.empty()) return 1.0;
  if (p.empty() || g.empty()) return 0.0;
  std::map<std::string, std::size_t> gold_counts;
  for (const auto& t : g) ++gold_counts[t];
  std::size_t common = 0;
  for (const auto& t : p) {
    auto it = gold_counts.find(t);
    if (it != gold_counts.end() && it->second > 0) {
      --it->second;
      ++common;
    }
  }
  if (common == 0) return 0.0;
  const double precision = static_cast<double>(common) / static_cast<double>(p.size());
  const double recall = static_cast<double>(common) / static_cast<double>(g.size());
  return 2 * precision * recall / (precision + recall);
}

StepMetrics step_metrics(const std::vector<StepEvalRecord>& records) {
  if (records.empty()) throw EmptyInput("step_metrics: no records");
  std::size_t correct = 0, success = 0;
  double f1_sum = 0;
  for (const auto& r : records) {
    const bool element_ok = r.gold_elements.count(r.predicted_element) > 0;
    const double f1 = token_f1(r.predicted_op, r.gold_op);
    correct += element_ok ? 1 : 0;
    f1_sum += f1;
    success += (element_ok && f1 == 1.0) ? 1 : 0;
  }
  const auto n = static_cast<double>(records.size());
  return {static_cast<double>(correct) / n, f1_sum / n, static_cast<double>(success) / n};
}

double run_average(const std::vector<std::vector<int>>& outcomes) {
  if (outcomes.empty()) throw EmptyInput("run_average: no tasks");
  const auto runs = outcomes.front().size();
  if (runs == 0) throw RaggedMatrix("run_average: task without runs");
  double sum = 0;
  for (const auto& row : outcomes) {
    if (row.size() != runs) throw RaggedMatrix("run_average: tasks have different run counts");
    double task = 0;
    for (int v : row) task += v;
    sum += task / static_cast<double>(runs);
  }
  return sum / static_cast<double>(outcomes.size());
}

namespace {

template <typename Fn>
void for_each_json_line(const std::filesystem::path& path, Fn&& fn) {
  std::size_t n = 0;
  for (const auto& line : split_lines(read_file(path))) {
    ++n;
    if (trim(line).empty()) continue;
    try {
      fn(nlohmann::json::parse(line));
    } catch (const std::exception& e) {
      throw std::runtime_error(path.string() + ":" + std::to_string(n) + ": " + e.what());
    }
  }
}

std::string element_key(const nlohmann::json& v) { return v.is_string() ? v.get<std::string>() : v.dump(); }

}  // namespace

std::vector<KeyNodeResult> read_keynode_jsonl(const std::filesystem::path& path) {
  std::vector<KeyNodeResult> out;
  for_each_json_line(path, [&](const nlohmann::json& j) {
    KeyNodeResult r;
    r.task_id = j.contains("task_id") ? element_key(j["task_id"]) : std::to_string(out.size());
    r.total = j.at("key_nodes_total").get<std::uint64_t>();
    r.completed = j.at("key_nodes_completed").get<std::uint64_t>();
    if (r.total == 0 || r.completed > r.total) throw std::invalid_argument("key node counts out of range");
    out.push_back(std::move(r));
  });
  return out;
}

std::vector<StepEvalRecord> read_steps_jsonl(const std::filesystem::path& path) {
  std::vector<StepEvalRecord> out;
  for_each_json_line(path, [&](const nlohmann::json& j) {
    StepEvalRecord r;
    r.step_id = j.contains("step_id") ? element_key(j["step_id"]) : std::to_string(out.size());
    r.predicted_element = element_key(j.at("predicted_element"));
    for (const auto& g : j.at("gold_elements")) r.gold_elements.insert(element_key(g));
    if (r.gold_elements.empty()) throw std::invalid_argument("gold_elements is empty");
    r.predicted_op = j.at("predicted_op").get<std::string>();
    r.gold_op = j.at("gold_op").get<std::string>();
    if (trim(r.predicted_op).empty() || trim(r.gold_op).empty()) throw std::invalid_argument("empty op string");
    out.push_back(std::move(r));
  });
  return out;
}

std::vector<std::vector<int>> read_runs_jsonl(const std::filesystem::path& path) {
  std::vector<std::vector<int>> out;
  for_each_json_line(path, [&](const nlohmann::json& j) {
    const auto& arr = j.is_array() ? j : j.at("outcomes");
    std::vector<int> row;
    for (const auto& v : arr) {
      int x = v.is_boolean() ? (v.get<bool>() ? 1 : 0) : v.get<int>();
      if (x != 0 && x != 1) throw std::invalid_argument("outcomes must be binary");
      row.push_back(x);
    }
    out.push_back(std::move(row));
  });
  return out;
}

nlohmann::json to_json(const KeyNodeMetrics& m, std::uint64_t tolerance) {
  return {{"avg_step_sr", m.avg_step_sr},
          {"completion_rate", m.completion_rate},
          {"task_sr", m.task_sr},
          {"tolerance", tolerance}};
}

nlohmann::json to_json(const StepMetrics& m) {
  return {{"element_accuracy", m.element_accuracy}, {"operation_f1", m.operation_f1}, {"step_sr", m.step_sr}};
}

}  // namespace websynth::metrics
