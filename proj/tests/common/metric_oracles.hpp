#pragma once

// Brute-force reference scorers, written independently of the library: token
// multisets are compared by sorting, sums are taken in long double, and the
// token F1 uses the 2c/(p+g) form.

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "websynth/metrics.hpp"

namespace websynth::testkit {

inline std::vector<std::string> oracle_tokens(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
  }
  if (!cur.empty()) out.push_back(cur);
  std::sort(out.begin(), out.end());
  return out;
}

inline long double oracle_f1(const std::string& p, const std::string& g) {
  auto a = oracle_tokens(p);
  auto b = oracle_tokens(g);
  if (a.empty() && b.empty()) return 1.0L;
  std::size_t i = 0, j = 0, common = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] == b[j]) {
      ++common, ++i, ++j;
    } else if (a[i] < b[j]) {
      ++i;
    } else {
      ++j;
    }
  }
  return 2.0L * static_cast<long double>(common) / static_cast<long double>(a.size() + b.size());
}

struct OracleKeyNode {
  long double macro, micro, sr;
};

inline OracleKeyNode oracle_keynode(const std::vector<metrics::KeyNodeResult>& rs, std::uint64_t tol) {
  long double macro = 0, done = 0, total = 0, passed = 0;
  for (const auto& r : rs) {
    macro += static_cast<long double>(r.completed) / static_cast<long double>(r.total);
    done += static_cast<long double>(r.completed);
    total += static_cast<long double>(r.total);
    if (r.completed + tol >= r.total) passed += 1;
  }
  const auto n = static_cast<long double>(rs.size());
  return {macro / n, done / total, passed / n};
}

struct OracleSteps {
  long double ele_acc, op_f1, step_sr;
};

inline OracleSteps oracle_steps(const std::vector<metrics::StepEvalRecord>& rs) {
  long double ele = 0, f1 = 0, sr = 0;
  for (const auto& r : rs) {
    bool hit = false;
    for (const auto& g : r.gold_elements) hit = hit || g == r.predicted_element;
    const bool op_exact = oracle_tokens(r.predicted_op) == oracle_tokens(r.gold_op);
    ele += hit ? 1 : 0;
    f1 += oracle_f1(r.predicted_op, r.gold_op);
    sr += hit && op_exact ? 1 : 0;
  }
  const auto n = static_cast<long double>(rs.size());
  return {ele / n, f1 / n, sr / n};
}

inline long double oracle_run_average(const std::vector<std::vector<int>>& m) {
  // Column-major accumulation: sum every cell once, divide by the cell count.
  long double total = 0;
  for (std::size_t c = 0; c < m.front().size(); ++c) {
    for (const auto& row : m) total += row[c];
  }
  return total / static_cast<long double>(m.size() * m.front().size());
}

// Random synthetic inputs.

inline std::vector<metrics::KeyNodeResult> random_keynodes(std::mt19937_64& rng) {
  std::vector<metrics::KeyNodeResult> out(1 + rng() % 40);
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i].task_id = "t" + std::to_string(i);
    out[i].total = 1 + rng() % 12;
    out[i].completed = rng() % (out[i].total + 1);
  }
  return out;
}

inline std::string random_op(std::mt19937_64& rng) {
  static const std::vector<std::string> words = {"click", "CLICK", "type", "select", "sofa", "Blue", "blue",
                                                 "2",     "large", "add",  "cart",   "the"};
  std::string s;
  const auto n = rng() % 5;
  for (std::uint64_t i = 0; i < n; ++i) {
    s += words[rng() % words.size()];
    s += (rng() % 4 == 0) ? "  \t" : " ";
  }
  return s;
}

inline std::vector<metrics::StepEvalRecord> random_steps(std::mt19937_64& rng) {
  std::vector<metrics::StepEvalRecord> out(1 + rng() % 40);
  for (auto& r : out) {
    r.predicted_element = "e" + std::to_string(rng() % 6);
    const auto golds = 1 + rng() % 3;
    for (std::uint64_t i = 0; i < golds; ++i) r.gold_elements.insert("e" + std::to_string(rng() % 6));
    r.gold_op = random_op(rng);
    r.predicted_op = rng() % 3 == 0 ? r.gold_op : random_op(rng);
  }
  return out;
}

inline std::vector<std::vector<int>> random_runs(std::mt19937_64& rng) {
  const auto tasks = 1 + rng() % 30;
  const auto runs = 1 + rng() % 6;
  std::vector<std::vector<int>> m(tasks, std::vector<int>(runs));
  for (auto& row : m) {
    for (auto& v : row) v = static_cast<int>(rng() % 2);
  }
  return m;
}

}  // namespace websynth::testkit
