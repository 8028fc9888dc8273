#include <gtest/gtest.h>

#include <fstream>

#include "../common/metric_oracles.hpp"
#include "test_support.hpp"
#include "websynth/metrics.hpp"

using namespace websynth;
using namespace websynth::metrics;

TEST(KeyNode, WorkedExample) {
  auto m = keynode_metrics({{"a", 3, 2}, {"b", 2, 1}});
  EXPECT_NEAR(m.avg_step_sr, 0.5833, 5e-5);
  EXPECT_DOUBLE_EQ(m.completion_rate, 0.6);
  EXPECT_DOUBLE_EQ(m.task_sr, 0.0);
  EXPECT_DOUBLE_EQ(keynode_metrics({{"a", 3, 2}, {"b", 2, 1}}, 1).task_sr, 1.0);
}

TEST(KeyNode, InputValidation) {
  EXPECT_THROW(keynode_metrics({}), EmptyInput);
  EXPECT_THROW(keynode_metrics({{"a", 0, 0}}), std::invalid_argument);
  EXPECT_THROW(keynode_metrics({{"a", 2, 3}}), std::invalid_argument);
}

TEST(KeyNode, MatchesOracle) {
  std::mt19937_64 rng(101);
  for (int i = 0; i < 300; ++i) {
    auto rs = testkit::random_keynodes(rng);
    const std::uint64_t tol = rng() % 3;
    auto got = keynode_metrics(rs, tol);
    auto want = testkit::oracle_keynode(rs, tol);
    ASSERT_NEAR(got.avg_step_sr, static_cast<double>(want.macro), 1e-12);
    ASSERT_NEAR(got.completion_rate, static_cast<double>(want.micro), 1e-12);
    ASSERT_NEAR(got.task_sr, static_cast<double>(want.sr), 1e-12);
  }
}

TEST(TokenF1, Cases) {
  EXPECT_DOUBLE_EQ(token_f1("TYPE sofa", "type  sofa"), 1.0);
  EXPECT_DOUBLE_EQ(token_f1("", ""), 1.0);
  EXPECT_DOUBLE_EQ(token_f1("click", ""), 0.0);
  EXPECT_DOUBLE_EQ(token_f1("a a b", "a b b"), 2.0 / 3.0);
  EXPECT_EQ(op_tokens(" Select\t2 "), (std::vector<std::string>{"select", "2"}));
}

TEST(StepMetrics, SmallExample) {
  std::vector<StepEvalRecord> rs = {
      {"1", "e1", {"e1", "e2"}, "click", "CLICK"},
      {"2", "e3", {"e1"}, "type sofa", "type sofa"},
      {"3", "e1", {"e1"}, "type blue sofa", "type sofa"},
  };
  auto m = step_metrics(rs);
  EXPECT_DOUBLE_EQ(m.element_accuracy, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(m.operation_f1, (1.0 + 1.0 + 0.8) / 3.0);
  EXPECT_DOUBLE_EQ(m.step_sr, 1.0 / 3.0);
  EXPECT_THROW(step_metrics({}), EmptyInput);
}

TEST(StepMetrics, MatchesOracle) {
  std::mt19937_64 rng(202);
  for (int i = 0; i < 300; ++i) {
    auto rs = testkit::random_steps(rng);
    auto got = step_metrics(rs);
    auto want = testkit::oracle_steps(rs);
    ASSERT_NEAR(got.element_accuracy, static_cast<double>(want.ele_acc), 1e-12);
    ASSERT_NEAR(got.operation_f1, static_cast<double>(want.op_f1), 1e-12);
    ASSERT_NEAR(got.step_sr, static_cast<double>(want.step_sr), 1e-12);
  }
}

TEST(RunAverage, ValuesAndErrors) {
  EXPECT_DOUBLE_EQ(run_average({{1, 0}, {1, 1}}), 0.75);
  EXPECT_THROW(run_average({}), EmptyInput);
  EXPECT_THROW(run_average({{1, 0}, {1}}), RaggedMatrix);
  EXPECT_THROW(run_average({{}}), RaggedMatrix);
  std::mt19937_64 rng(303);
  for (int i = 0; i < 300; ++i) {
    auto m = testkit::random_runs(rng);
    ASSERT_NEAR(run_average(m), static_cast<double>(testkit::oracle_run_average(m)), 1e-12);
  }
}

TEST(Jsonl, ReadersAndLineNumbers) {
  testkit::TempDir tmp;
  std::ofstream(tmp / "k.jsonl") << "{\"task_id\":\"a\",\"key_nodes_total\":3,\"key_nodes_completed\":2}\n\n"
                                    "{\"key_nodes_total\":2,\"key_nodes_completed\":1}\n";
  auto k = read_keynode_jsonl(tmp / "k.jsonl");
  ASSERT_EQ(k.size(), 2u);
  EXPECT_EQ(k[1].task_id, "1");

  std::ofstream(tmp / "s.jsonl") << "{\"predicted_element\":5,\"gold_elements\":[5,6],\"predicted_op\":\"click\","
                                    "\"gold_op\":\"click\"}\n";
  auto s = read_steps_jsonl(tmp / "s.jsonl");
  ASSERT_EQ(s.size(), 1u);
  EXPECT_EQ(s[0].predicted_element, "5");
  EXPECT_DOUBLE_EQ(step_metrics(s).step_sr, 1.0);

  std::ofstream(tmp / "r.jsonl") << "[1,0,1]\n[0,0,1]\n";
  EXPECT_NEAR(run_average(read_runs_jsonl(tmp / "r.jsonl")), 0.5, 1e-15);

  std::ofstream(tmp / "bad.jsonl") << "{\"key_nodes_total\":1,\"key_nodes_completed\":1}\n{oops\n";
  try {
    read_keynode_jsonl(tmp / "bad.jsonl");
    FAIL();
  } catch (const std::runtime_error& e) {
    EXPECT_NE(std::string(e.what()).find(":2:"), std::string::npos) << e.what();
  }
}
