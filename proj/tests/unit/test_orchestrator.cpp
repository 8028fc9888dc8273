#include <gtest/gtest.h>

#include <fstream>

#include "test_support.hpp"
#include "websynth/orchestrator.hpp"

using namespace websynth;
using websynth::testkit::fixtures;

namespace {

std::string payload(const std::string& task, const std::string& nl, const std::string& grounded) {
  return "Thoughts.\n```json\n" +
         nlohmann::json{{"task", task}, {"action_in_natural_language", nl}, {"grounded_action", grounded}}.dump() +
         "\n```\n";
}

const std::map<std::string, Stage> kStageNames = {{"proposal", Stage::kProposal},
                                                  {"refinement", Stage::kRefinement},
                                                  {"summarization", Stage::kSummarization},
                                                  {"verification", Stage::kVerification},
                                                  {"reasoning", Stage::kReasoning}};

// Queues the scripted shop trajectory.
RunConfig queue_e2e(QueueBackend& q) {
  std::ifstream in(fixtures() / "scripts" / "shop_e2e.json");
  auto script = nlohmann::json::parse(in);
  for (const auto& [name, stage] : kStageNames) {
    for (const auto& text : script["trajectories"][0]["responses"][name]) q.push(stage, text.get<std::string>());
  }
  return run_config_from_json(script["config"]);
}

std::unique_ptr<FixtureDriver> shop(FixtureDriverOptions opts = {}) {
  auto d = std::make_unique<FixtureDriver>(opts);
  d->load(fixtures() / "shop");
  return d;
}

const SeedSpec kHome{"fixture://shop/home", SeedSource::kCustom, false};

void queue_short(QueueBackend& q, const std::string& verdict = "success") {
  q.push(Stage::kProposal, payload("Browse living room", "Click Living Room", "click [1]"));
  q.push(Stage::kRefinement, payload("Browse living room", "Stop", "stop"));
  q.push(Stage::kSummarization, "```\nBrowse the living room furniture\n```");
  q.push(Stage::kVerification, "Thoughts: fine\nStatus: " + verdict);
}

}  // namespace

TEST(SeedFilter, ParsesCountsAndDeduplicates) {
  SafetyPolicy policy;
  policy.block("bad.com");
  const std::vector<std::string> lines = {
      "# comment",
      "",
      "https://example.com/a toplist",
      "https://www.example.com/a/",
      R"({"url":"https://shop.org/","source":"headlist","navigate_via_search":true})",
      "https://news.org/x search",
      "https://cdn.bad.com/page",
      "ftp://files.org/",
      "{not json",
      "https://ok.org/ weird",
      "not a url",
  };
  auto r = filter_seeds(lines, policy);
  ASSERT_EQ(r.seeds.size(), 3u);
  EXPECT_EQ(r.seeds[0], (SeedSpec{"https://example.com/a", SeedSource::kToplist, false}));
  EXPECT_EQ(r.seeds[1], (SeedSpec{"https://shop.org/", SeedSource::kHeadlist, true}));
  EXPECT_EQ(r.seeds[2], (SeedSpec{"https://news.org/x", SeedSource::kCustom, true}));
  EXPECT_EQ(r.duplicates, 1u);
  EXPECT_EQ(r.blocked, 1u);
  EXPECT_EQ(r.bad_scheme, 1u);
  EXPECT_EQ(r.malformed, 3u);
}

TEST(RunConfig, ValidationAndJson) {
  RunConfig c;
  EXPECT_NO_THROW(c.validate());
  for (auto bad : {R"({"max_steps":0})", R"({"parallelism":0})", R"({"domain_cap":0})",
                   R"({"viewport":{"width":0}})"}) {
    EXPECT_THROW(run_config_from_json(nlohmann::json::parse(bad)), std::invalid_argument) << bad;
  }
  c.max_steps = 3;
  c.reasoning = true;
  c.viewport.height = 600;
  auto back = run_config_from_json(to_json(c));
  EXPECT_EQ(to_json(back), to_json(c));
  EXPECT_EQ(back.max_steps, 3);
  EXPECT_TRUE(back.reasoning);
}

TEST(Trajectory, ScriptedShopSuccess) {
  auto d = shop();
  QueueBackend q;
  auto cfg = queue_e2e(q);
  auto rec = run_trajectory(kHome, cfg, *d, q);
  ASSERT_EQ(rec.status, TrajectoryStatus::kSuccess) << rec.error;
  EXPECT_TRUE(rec.error.empty());
  EXPECT_EQ(rec.id, record_id_for(kHome));
  EXPECT_EQ(rec.initial_task, "Browse the living room furniture");
  ASSERT_EQ(rec.steps.size(), 4u);
  EXPECT_EQ(render_action(rec.steps[2].grounded), "select [6] [Dark Grey]");
  for (const auto& s : rec.steps) {
    ASSERT_TRUE(s.reasoning.has_value());
    EXPECT_NE(s.pre_digest, s.post_digest);
    EXPECT_TRUE(s.screenshot && s.som_screenshot);
  }
  EXPECT_EQ(rec.visited_urls.front(), "fixture://shop/home");
  EXPECT_EQ(rec.visited_urls.back(), "fixture://shop/cart");
  EXPECT_EQ(rec.summary_task, "Add a dark grey UPPLAND sofa to the cart on the Fixture Home Furnishings site");
  ASSERT_TRUE(rec.verdict.has_value());
  EXPECT_TRUE(rec.final_screenshot);
  EXPECT_FALSE(rec.final_markdown.empty());
  EXPECT_EQ(rec.usage.size(), 5u);
  for (const auto& [name, stage] : kStageNames) EXPECT_EQ(q.pending(stage), 0u) << name;
  EXPECT_EQ(d->open_sessions(), 0);

  // Replaying the stored transcripts reproduces the same manifest.
  ScriptedBackend replay(fixtures() / "transcripts" / "shop");
  auto again = run_trajectory(kHome, cfg, *d, replay);
  ASSERT_EQ(again.status, TrajectoryStatus::kSuccess) << again.error;
  EXPECT_EQ(manifest_digest(manifest_json(again)), manifest_digest(manifest_json(rec)));
}

TEST(Trajectory, StopOnProposalHalts) {
  auto d = shop();
  QueueBackend q;
  q.push(Stage::kProposal, payload("Nothing to do", "Stop", "stop"));
  auto rec = run_trajectory(kHome, RunConfig{}, *d, q);
  EXPECT_EQ(rec.status, TrajectoryStatus::kHalted);
  EXPECT_EQ(rec.initial_task, "Nothing to do");
  EXPECT_TRUE(rec.steps.empty());
  EXPECT_TRUE(rec.final_screenshot);
  EXPECT_FALSE(rec.verdict.has_value());
  EXPECT_EQ(d->open_sessions(), 0);
}

TEST(Trajectory, UnparseableProposalIsMalformed) {
  auto d = shop();
  QueueBackend q;
  q.push(Stage::kProposal, "I cannot decide.");
  auto rec = run_trajectory(kHome, RunConfig{}, *d, q);
  EXPECT_EQ(rec.status, TrajectoryStatus::kMalformed);
  EXPECT_NE(rec.error.find("proposal"), std::string::npos) << rec.error;
}

TEST(Trajectory, MaxStepsBoundsRefinement) {
  auto d = shop();
  QueueBackend q;
  RunConfig cfg;
  cfg.max_steps = 2;
  q.push(Stage::kProposal, payload("Look around", "Scroll down", "scroll [down]"));
  q.push(Stage::kRefinement, payload("Look around", "Scroll up", "scroll [up]"));
  q.push(Stage::kRefinement, payload("Look around", "Scroll down", "scroll [down]"));
  q.push(Stage::kRefinement, payload("Look around", "Scroll up", "scroll [up]"));
  q.push(Stage::kSummarization, "```\nLook around the home page\n```");
  q.push(Stage::kVerification, "Thoughts: nothing achieved\nStatus: failure");
  auto rec = run_trajectory(kHome, cfg, *d, q);
  EXPECT_EQ(rec.status, TrajectoryStatus::kFailure) << rec.error;
  EXPECT_EQ(rec.steps.size(), 3u);
  EXPECT_EQ(q.pending(Stage::kRefinement), 1u);
}

TEST(Trajectory, VerificationRetriedOnce) {
  auto d = shop();
  {
    QueueBackend q2;
    q2.push(Stage::kProposal, payload("Browse living room", "Click Living Room", "click [1]"));
    q2.push(Stage::kRefinement, payload("Browse living room", "Stop", "stop"));
    q2.push(Stage::kSummarization, "```\nBrowse the living room furniture\n```");
    q2.push(Stage::kVerification, "no verdict here");
    q2.push(Stage::kVerification, "Thoughts: fine\nStatus: success");
    auto rec = run_trajectory(kHome, RunConfig{}, *d, q2);
    EXPECT_EQ(rec.status, TrajectoryStatus::kSuccess) << rec.error;
  }
  QueueBackend q;
  q.push(Stage::kProposal, payload("Browse living room", "Click Living Room", "click [1]"));
  q.push(Stage::kRefinement, payload("Browse living room", "Stop", "stop"));
  q.push(Stage::kSummarization, "```\nBrowse the living room furniture\n```");
  q.push(Stage::kVerification, "no verdict here");
  q.push(Stage::kVerification, "still nothing");
  auto rec = run_trajectory(kHome, RunConfig{}, *d, q);
  EXPECT_EQ(rec.status, TrajectoryStatus::kMalformed);
  EXPECT_NE(rec.error.find("verification"), std::string::npos) << rec.error;
}

TEST(Trajectory, BackendExhaustionIsEnvError) {
  auto d = shop();
  QueueBackend q;
  auto rec = run_trajectory(kHome, RunConfig{}, *d, q);
  EXPECT_EQ(rec.status, TrajectoryStatus::kEnvError);
  EXPECT_NE(rec.error.find("proposal"), std::string::npos) << rec.error;
}

TEST(Trajectory, BlockedSeedNeverOpens) {
  auto d = shop();
  d->safety().block("shop");
  QueueBackend q;
  queue_short(q);
  auto rec = run_trajectory(kHome, RunConfig{}, *d, q);
  EXPECT_EQ(rec.status, TrajectoryStatus::kEnvError);
  EXPECT_TRUE(rec.steps.empty());
  EXPECT_TRUE(rec.visited_urls.empty());
  EXPECT_EQ(q.pending(Stage::kProposal), 1u);
  EXPECT_EQ(d->peak_sessions(), 0);
}

TEST(Trajectory, SearchSeedStartsWithSearch) {
  auto d = shop();
  QueueBackend q;
  queue_short(q);
  SeedSpec seed = kHome;
  seed.navigate_via_search = true;
  auto rec = run_trajectory(seed, RunConfig{}, *d, q);
  ASSERT_EQ(rec.status, TrajectoryStatus::kSuccess) << rec.error;
  ASSERT_EQ(rec.steps.size(), 1u);
  EXPECT_EQ(render_action(rec.steps[0].grounded), "search_google [Browse living room]");
  EXPECT_EQ(rec.steps[0].action_nl, "Search Google for Browse living room");
}

TEST(Batch, CountsStatusesAndPersists) {
  auto d = shop();
  QueueBackend q;
  for (int i = 0; i < 3; ++i) queue_short(q);
  q.push(Stage::kProposal, payload("Nothing", "Stop", "stop"));
  testkit::TempDir tmp;
  Datastore store(tmp / "ds");
  RunConfig cfg;
  cfg.parallelism = 1;
  std::vector<SeedSpec> seeds(4, kHome);
  int callbacks = 0;
  auto report = run_batch(seeds, cfg, *d, q, store, [&](const TrajectoryRecord&) { ++callbacks; });
  EXPECT_EQ(report.total, 4u);
  EXPECT_EQ(report.by_status[TrajectoryStatus::kSuccess], 3u);
  EXPECT_EQ(report.by_status[TrajectoryStatus::kHalted], 1u);
  EXPECT_EQ(callbacks, 4);
  EXPECT_EQ(report.peak_concurrency, 1);
  EXPECT_EQ(store.ids().size(), 4u);
  EXPECT_EQ(report.ids[0], record_id_for(kHome));
  EXPECT_EQ(report.ids[1], record_id_for(kHome) + "-1");
  auto j = to_json(report);
  EXPECT_EQ(j["by_status"]["success"], 3);
  EXPECT_EQ(j["by_status"]["env_error"], 0);
  EXPECT_EQ(report.cost.n_total, 4u);
  EXPECT_EQ(report.cost.n_success, 3u);
}

TEST(Batch, EmptyBatch) {
  auto d = shop();
  QueueBackend q;
  testkit::TempDir tmp;
  Datastore store(tmp / "ds");
  auto report = run_batch({}, RunConfig{}, *d, q, store);
  EXPECT_EQ(report.total, 0u);
  EXPECT_TRUE(report.ids.empty());
  EXPECT_EQ(report.peak_concurrency, 0);
}

TEST(Batch, DomainCapSerializesSessions) {
  FixtureDriverOptions opts;
  opts.action_latency = std::chrono::milliseconds(20);
  FixtureDriver d(opts);
  d.add_site(FixtureSite::load(fixtures() / "shop", "shop-a"));
  d.add_site(FixtureSite::load(fixtures() / "shop", "shop-b"));
  QueueBackend q;
  std::vector<SeedSpec> seeds;
  for (int i = 0; i < 3; ++i) {
    for (const char* host : {"shop-a", "shop-b"}) {
      seeds.push_back({std::string("fixture://") + host + "/home"});
      queue_short(q);
    }
  }
  testkit::TempDir tmp;
  Datastore store(tmp / "ds");
  RunConfig cfg;
  cfg.parallelism = 4;
  cfg.domain_cap = 1;
  std::mutex mu;
  std::map<std::string, std::vector<std::pair<std::int64_t, std::int64_t>>> spans;
  auto report = run_batch(seeds, cfg, d, q, store, [&](const TrajectoryRecord& r) {
    std::lock_guard lock(mu);
    spans[r.seed.url].push_back({r.timings.session_open_us, r.timings.session_close_us});
  });
  EXPECT_EQ(report.by_status[TrajectoryStatus::kSuccess], 6u);
  EXPECT_LE(report.peak_concurrency, 2);
  EXPECT_LE(d.peak_sessions(), 2);
  for (auto& [url, v] : spans) {
    ASSERT_EQ(v.size(), 3u);
    std::sort(v.begin(), v.end());
    for (std::size_t i = 1; i < v.size(); ++i) EXPECT_LE(v[i - 1].second, v[i].first) << url;
  }
}

TEST(Batch, StoreFailureSurfaces) {
  auto d = shop();
  QueueBackend q;
  q.push(Stage::kProposal, payload("Nothing", "Stop", "stop"));
  testkit::TempDir tmp;
  Datastore store(tmp / "ds");
  std::filesystem::remove_all(tmp / "ds");
  std::ofstream(tmp / "ds") << "not a directory";
  try {
    run_batch({kHome}, RunConfig{}, *d, q, store);
    FAIL() << "expected a datastore error";
  } catch (const DatastoreError& e) {
    EXPECT_EQ(e.kind(), DatastoreErrorKind::kDatastoreUnavailable);
  }
}
