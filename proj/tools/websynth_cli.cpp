#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>

#include "websynth/datastore.hpp"
#include "websynth/environment.hpp"
#include "websynth/llm.hpp"
#include "websynth/metrics.hpp"
#include "websynth/orchestrator.hpp"
#include "websynth/prompts.hpp"
#include "websynth/util.hpp"

namespace fs = std::filesystem;
using namespace websynth;

namespace {

nlohmann::json read_json(const fs::path& p) { return nlohmann::json::parse(read_file(p)); }

void apply_blocklist(Driver& driver, const std::string& path) {
  if (path.empty()) return;
  auto loaded = SafetyPolicy::from_file(path);
  for (const auto& d : loaded.blocked()) driver.safety().block(d);
}

HttpBackendConfig http_config(const nlohmann::json& cfg) {
  HttpBackendConfig hc;
  if (cfg.contains("backend")) {
    const auto& b = cfg["backend"];
    hc.base_url = b.value("base_url", hc.base_url);
    hc.path = b.value("path", hc.path);
    hc.model = b.value("model", hc.model);
    hc.temperature = b.value("temperature", hc.temperature);
    hc.max_concurrency = b.value("max_concurrency", hc.max_concurrency);
  }
  if (const char* key = std::getenv("OPENAI_API_KEY")) hc.api_key = key;
  return hc;
}

struct GenerateArgs {
  std::string seeds, config, out, fixture, browser, page_script, transcripts, blocklist;
  int parallelism = 0;
  int max_steps = 0;
  bool reasoning = false;
};

int cmd_generate(const GenerateArgs& a) {
  nlohmann::json cfg_json = a.config.empty() ? nlohmann::json::object() : read_json(a.config);
  auto cfg = run_config_from_json(cfg_json);
  if (a.parallelism > 0) cfg.parallelism = a.parallelism;
  if (a.max_steps > 0) cfg.max_steps = a.max_steps;
  if (a.reasoning) cfg.reasoning = true;
  if (!a.blocklist.empty()) cfg.blocklist = a.blocklist;
  cfg.validate();

  std::unique_ptr<Driver> driver;
  if (!a.fixture.empty()) {
    auto fd = std::make_unique<FixtureDriver>();
    fd->load(a.fixture);
    driver = std::move(fd);
  } else {
    LiveDriverOptions lo;
    lo.endpoint = a.browser;
    lo.page_script = a.page_script;
    driver = std::make_unique<LiveDriver>(lo);
  }
  apply_blocklist(*driver, cfg.blocklist);

  std::unique_ptr<ChatBackend> backend;
  if (!a.transcripts.empty()) {
    backend = std::make_unique<ScriptedBackend>(a.transcripts);
  } else {
    backend = std::make_unique<HttpBackend>(http_config(cfg_json));
  }

  auto filtered = filter_seeds(split_lines(read_file(a.seeds)), driver->safety());
  std::cerr << "seeds: " << filtered.seeds.size() << " kept, " << filtered.malformed << " malformed, "
            << filtered.bad_scheme << " bad scheme, " << filtered.blocked << " blocked, " << filtered.duplicates
            << " duplicate\n";

  Datastore store(a.out);
  auto report = run_batch(filtered.seeds, cfg, *driver, *backend, store, [](const TrajectoryRecord& r) {
    std::cerr << r.id << " " << to_string(r.status) << (r.error.empty() ? "" : " (" + r.error + ")") << "\n";
  });
  auto j = to_json(report);
  j["seed_filter"] = {{"kept", filtered.seeds.size()},
                      {"malformed", filtered.malformed},
                      {"bad_scheme", filtered.bad_scheme},
                      {"blocked", filtered.blocked},
                      {"duplicates", filtered.duplicates}};
  std::cout << j.dump(2) << "\n";
  return 0;
}

// Runs scripted trajectories against fixtures with queued responses and saves
// the keyed transcripts so `generate --transcripts` can replay them.
int cmd_author(const std::string& script_path, const std::string& transcripts, const std::string& out) {
  auto script = read_json(script_path);
  auto base = fs::path(script_path).parent_path();
  auto cfg = run_config_from_json(script.value("config", nlohmann::json::object()));
  cfg.parallelism = 1;
  FixtureDriver driver;
  for (const auto& dir : script.at("fixtures")) driver.load(base / dir.get<std::string>());

  std::unique_ptr<Datastore> store;
  if (!out.empty()) store = std::make_unique<Datastore>(out);

  int failures = 0;
  for (const auto& t : script.at("trajectories")) {
    QueueBackend queue;
    for (auto stage : kAllStages) {
      auto name = std::string(to_string(stage));
      if (!t.at("responses").contains(name)) continue;
      for (const auto& text : t["responses"][name]) queue.push(stage, text.get<std::string>());
    }
    RecordingBackend recorder(queue, prompts::version());
    SeedSpec seed;
    const auto& s = t.at("seed");
    seed.url = s.is_string() ? s.get<std::string>() : s.at("url").get<std::string>();
    if (s.is_object()) {
      seed.navigate_via_search = s.value("navigate_via_search", false);
      if (s.contains("source")) seed.source = seed_source_from_string(s["source"].get<std::string>());
    }
    auto rec = run_trajectory(seed, cfg, driver, recorder);
    auto expected = status_from_string(t.value("expect", std::string("success")));
    std::size_t leftover = 0;
    for (auto stage : kAllStages) leftover += queue.pending(stage);
    std::cerr << seed.url << ": " << to_string(rec.status) << ", " << rec.steps.size() << " steps"
              << (rec.error.empty() ? "" : " (" + rec.error + ")") << "\n";
    if (rec.status != expected || leftover != 0) {
      std::cerr << "  expected " << to_string(expected) << ", " << leftover << " unused responses\n";
      ++failures;
      continue;
    }
    if (!transcripts.empty()) recorder.write(transcripts);
    if (store) store->persist(rec);
  }
  return failures == 0 ? 0 : 1;
}

int cmd_eval(const std::string& kind, const std::string& in, std::uint64_t tolerance) {
  nlohmann::json j;
  if (kind == "keynode") {
    j = metrics::to_json(metrics::keynode_metrics(metrics::read_keynode_jsonl(in), tolerance), tolerance);
  } else if (kind == "steps") {
    j = metrics::to_json(metrics::step_metrics(metrics::read_steps_jsonl(in)));
  } else {
    j = {{"run_average", metrics::run_average(metrics::read_runs_jsonl(in))}};
  }
  std::cout << j.dump(2) << "\n";
  return 0;
}

int cmd_stats(const std::string& dataset, bool all, const std::string& csv) {
  auto s = compute_stats(dataset, all ? StatsScope::kAll : StatsScope::kSuccessOnly);
  if (!csv.empty()) write_file_atomic(csv, histogram_csv(s.histogram));
  std::cout << to_json(s).dump(2) << "\n";
  return 0;
}

int cmd_filter(const std::string& dataset, std::size_t max_scrolls) {
  for (const auto& id : filter_training(dataset, max_scrolls)) std::cout << id << "\n";
  return 0;
}

int cmd_export(const std::string& dataset, const std::string& ids_file, const std::string& strategy,
               std::uint64_t seed, std::size_t draws, const std::string& out) {
  std::vector<std::string> ids;
  if (ids_file.empty()) {
    ids = filter_training(dataset);
  } else {
    for (const auto& line : split_lines(read_file(ids_file))) {
      auto t = trim(line);
      if (!t.empty()) ids.emplace_back(t);
    }
  }
  ExportOptions opts;
  opts.strategy = sampling_strategy_from_string(strategy);
  opts.seed = seed;
  opts.draws = draws;
  std::string body;
  for (const auto& inst : export_training(dataset, ids, opts)) body += to_json(inst).dump() + "\n";
  if (out.empty()) {
    std::cout << body;
  } else {
    write_file_atomic(out, body);
  }
  return 0;
}

// Input: {"usage": {"<stage>": {calls, prompt_tokens, ...}}, "rates": {...},
// "n_total": N, "n_success": M}
int cmd_cost(const std::string& in, int decimals) {
  auto j = read_json(in);
  std::map<Stage, Usage> usage;
  for (const auto& [name, u] : j.at("usage").items()) usage[stage_from_string(name)] = usage_from_json(u);
  auto rates = cost_rates_from_json(j.value("rates", nlohmann::json::object()));
  auto ledger = cost_report(usage, rates, j.at("n_total").get<std::uint64_t>(),
                            j.value("n_success", std::uint64_t{0}));
  auto out = to_json(ledger);
  out["formatted"] = {{"cost_per_trajectory", format_dollars(ledger.cost_per_trajectory, decimals)},
                      {"cost_per_success", ledger.cost_per_success
                                               ? nlohmann::json(format_dollars(*ledger.cost_per_success, decimals))
                                               : nlohmann::json(nullptr)}};
  std::cout << out.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"websynth: synthetic web-agent trajectory generation"};
  app.require_subcommand(1);

  GenerateArgs gen;
  auto* generate = app.add_subcommand("generate", "run the trajectory pipeline over a seed list");
  generate->add_option("--seeds", gen.seeds, "seed list file")->required()->check(CLI::ExistingFile);
  generate->add_option("--config", gen.config, "run config JSON")->check(CLI::ExistingFile);
  generate->add_option("--out", gen.out, "dataset directory")->required();
  generate->add_option("--parallelism", gen.parallelism);
  generate->add_option("--max-steps", gen.max_steps);
  auto* fixture_opt = generate->add_option("--fixture", gen.fixture, "fixture site directory");
  auto* browser_opt = generate->add_option("--browser", gen.browser, "remote debugging endpoint");
  fixture_opt->excludes(browser_opt);
  generate->add_option("--page-script", gen.page_script, "page-script bundle for --browser");
  generate->add_option("--transcripts", gen.transcripts, "replay transcripts instead of a live model");
  generate->add_option("--blocklist", gen.blocklist, "blocked domains, one per line");
  generate->add_flag("--reasoning", gen.reasoning, "generate per-step reasoning");

  std::string script, author_transcripts, author_out;
  auto* author = app.add_subcommand("author", "record transcripts from a scripted response file");
  author->add_option("--script", script)->required()->check(CLI::ExistingFile);
  author->add_option("--transcripts", author_transcripts);
  author->add_option("--out", author_out, "also persist the records here");

  auto* eval = app.add_subcommand("eval", "score recorded predictions");
  eval->require_subcommand(1);
  std::string eval_in;
  std::uint64_t tolerance = 0;
  auto* keynode = eval->add_subcommand("keynode");
  keynode->add_option("--in", eval_in)->required()->check(CLI::ExistingFile);
  keynode->add_option("--tolerance", tolerance);
  auto* steps = eval->add_subcommand("steps");
  steps->add_option("--in", eval_in)->required()->check(CLI::ExistingFile);
  auto* runs = eval->add_subcommand("runs");
  runs->add_option("--in", eval_in)->required()->check(CLI::ExistingFile);

  std::string dataset, csv;
  bool scope_all = false;
  auto* stats = app.add_subcommand("stats", "dataset statistics");
  stats->add_option("--dataset", dataset)->required()->check(CLI::ExistingDirectory);
  stats->add_flag("--all", scope_all, "include non-success records");
  stats->add_option("--histogram-csv", csv);

  std::size_t max_scrolls = 2;
  auto* filter = app.add_subcommand("filter", "list training-eligible record ids");
  filter->add_option("--dataset", dataset)->required()->check(CLI::ExistingDirectory);
  filter->add_option("--max-scrolls", max_scrolls);

  std::string ids_file, strategy = "trajectory-then-step", export_out;
  std::uint64_t seed = 0;
  std::size_t draws = 0;
  auto* exp = app.add_subcommand("export", "write training instances as JSON lines");
  exp->add_option("--dataset", dataset)->required()->check(CLI::ExistingDirectory);
  exp->add_option("--ids", ids_file, "id list (default: filter output)");
  exp->add_option("--strategy", strategy)->check(CLI::IsMember({"trajectory-then-step", "uniform-step"}));
  exp->add_option("--seed", seed);
  exp->add_option("--draws", draws);
  exp->add_option("--out", export_out);

  std::string cost_in;
  int decimals = 3;
  auto* cost = app.add_subcommand("cost", "cost ledger from usage totals");
  cost->add_option("--in", cost_in)->required()->check(CLI::ExistingFile);
  cost->add_option("--decimals", decimals);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*generate) {
      if (gen.fixture.empty() == gen.browser.empty()) {
        std::cerr << "exactly one of --fixture or --browser is required\n";
        return 2;
      }
      return cmd_generate(gen);
    }
    if (*author) return cmd_author(script, author_transcripts, author_out);
    if (*eval) {
      if (*keynode) return cmd_eval("keynode", eval_in, tolerance);
      if (*steps) return cmd_eval("steps", eval_in, 0);
      return cmd_eval("runs", eval_in, 0);
    }
    if (*stats) return cmd_stats(dataset, scope_all, csv);
    if (*filter) return cmd_filter(dataset, max_scrolls);
    if (*exp) return cmd_export(dataset, ids_file, strategy, seed, draws, export_out);
    if (*cost) return cmd_cost(cost_in, decimals);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
