#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "websynth/datastore.hpp"
#include "websynth/metrics.hpp"
#include "websynth/orchestrator.hpp"
#include "websynth/prompts.hpp"

namespace py = pybind11;
using namespace websynth;

namespace {

// Structured results cross the boundary as JSON text; the Python package
// decodes them.
std::string dump(const nlohmann::json& j) { return j.dump(); }

std::string run_fixture(const std::filesystem::path& fixtures, const std::string& seed_url,
                        const std::filesystem::path& transcripts, const std::string& config_json,
                        const std::filesystem::path& store_dir, bool via_search) {
  FixtureDriver driver;
  driver.load(fixtures);
  ScriptedBackend backend(transcripts);
  const auto cfg = run_config_from_json(nlohmann::json::parse(config_json.empty() ? "{}" : config_json));
  if (!cfg.blocklist.empty()) {
    for (const auto& d : SafetyPolicy::from_file(cfg.blocklist).blocked()) driver.safety().block(d);
  }
  SeedSpec seed{seed_url, SeedSource::kCustom, via_search};
  auto rec = run_trajectory(seed, cfg, driver, backend);
  if (store_dir.empty()) return dump(manifest_json(rec));
  Datastore store(store_dir);
  const auto id = store.persist(rec);
  return dump(load_manifest(store.root() / id));
}

}  // namespace

PYBIND11_MODULE(_websynth, m) {
  m.doc() = "Native core of the websynth trajectory toolkit";

  py::register_exception<ActionError>(m, "ActionError", PyExc_ValueError);
  py::register_exception<PayloadError>(m, "PayloadError", PyExc_ValueError);
  py::register_exception<DatastoreError>(m, "DatastoreError", PyExc_RuntimeError);
  py::register_exception<EnvError>(m, "EnvError", PyExc_RuntimeError);
  py::register_exception<BackendError>(m, "BackendError", PyExc_RuntimeError);
  py::register_exception<metrics::EmptyInput>(m, "EmptyInput", PyExc_ValueError);
  py::register_exception<metrics::RaggedMatrix>(m, "RaggedMatrix", PyExc_ValueError);

  m.def("template_version", [] { return std::string(prompts::version()); });

  // Action grammar
  m.def("canonicalize_action", [](const std::string& text) { return render_action(parse_action(text)); });
  m.def("action_to_training", [](const std::string& text, const std::string& nl) {
    return dump(to_training_action(parse_action(text), nl));
  });
  m.def("action_from_training",
        [](const std::string& j) { return render_action(parse_training_action(nlohmann::json::parse(j))); });
  m.def("parse_agent_payload", [](const std::string& response) {
    auto p = parse_agent_payload(response);
    return dump({{"task", p.task}, {"action_in_natural_language", p.action_nl},
                 {"grounded_action", render_action(p.grounded)}});
  });

  // Metrics
  m.def(
      "keynode_metrics",
      [](const std::vector<std::tuple<std::string, std::uint64_t, std::uint64_t>>& rows, std::uint64_t tolerance) {
        std::vector<metrics::KeyNodeResult> rs;
        for (const auto& [id, total, done] : rows) rs.push_back({id, total, done});
        return dump(metrics::to_json(metrics::keynode_metrics(rs, tolerance), tolerance));
      },
      py::arg("rows"), py::arg("tolerance") = 0);
  m.def("step_metrics",
        [](const std::vector<std::tuple<std::string, std::set<std::string>, std::string, std::string>>& rows) {
          std::vector<metrics::StepEvalRecord> rs;
          std::size_t i = 0;
          for (const auto& [pred, gold, pop, gop] : rows) rs.push_back({std::to_string(i++), pred, gold, pop, gop});
          return dump(metrics::to_json(metrics::step_metrics(rs)));
        });
  m.def("run_average", &metrics::run_average);
  m.def("token_f1", [](const std::string& a, const std::string& b) { return metrics::token_f1(a, b); });

  // Datastore
  m.def("compute_stats", [](const std::filesystem::path& dataset, bool success_only) {
    return dump(to_json(compute_stats(dataset, success_only ? StatsScope::kSuccessOnly : StatsScope::kAll)));
  });
  m.def("filter_training", &filter_training, py::arg("dataset"), py::arg("max_scrolls") = 2);
  m.def("cost_report", [](const std::string& usage_json, const std::string& rates_json, std::uint64_t n_total,
                          std::uint64_t n_success) {
    std::map<Stage, Usage> usage;
    const auto parsed = nlohmann::json::parse(usage_json);
    for (const auto& [stage, u] : parsed.items()) usage[stage_from_string(stage)] = usage_from_json(u);
    auto rates = rates_json.empty() ? CostRates{} : cost_rates_from_json(nlohmann::json::parse(rates_json));
    return dump(to_json(cost_report(usage, rates, n_total, n_success)));
  });
  m.def("format_dollars", &format_dollars, py::arg("micros"), py::arg("decimals") = 3);
  m.def("sample_steps", [](const std::vector<std::size_t>& steps, const std::string& strategy, std::uint64_t seed,
                           std::size_t draws) {
    return sample_steps(steps, sampling_strategy_from_string(strategy), seed, draws);
  });
  m.def("export_training", [](const std::filesystem::path& dataset, const std::vector<std::string>& ids,
                              const std::string& strategy, std::uint64_t seed, std::size_t draws) {
    ExportOptions opts;
    opts.strategy = sampling_strategy_from_string(strategy);
    opts.seed = seed;
    opts.draws = draws;
    nlohmann::json out = nlohmann::json::array();
    for (const auto& t : export_training(dataset, ids, opts)) out.push_back(to_json(t));
    return dump(out);
  });
  m.def("load_manifest", [](const std::filesystem::path& dir) { return dump(load_manifest(dir)); });

  // Orchestration
  m.def("filter_seeds", [](const std::vector<std::string>& lines, const std::vector<std::string>& blocked,
                           const std::vector<std::string>& extra_schemes) {
    SafetyPolicy policy;
    for (const auto& b : blocked) policy.block(b);
    for (const auto& s : extra_schemes) policy.allow_scheme(s);
    auto r = filter_seeds(lines, policy);
    nlohmann::json seeds = nlohmann::json::array();
    for (const auto& s : r.seeds) {
      seeds.push_back({{"url", s.url}, {"source", to_string(s.source)}, {"navigate_via_search", s.navigate_via_search}});
    }
    return dump({{"seeds", seeds},
                 {"malformed", r.malformed},
                 {"blocked", r.blocked},
                 {"bad_scheme", r.bad_scheme},
                 {"duplicates", r.duplicates}});
  });
  m.def("run_fixture_trajectory", &run_fixture, py::arg("fixtures"), py::arg("seed_url"), py::arg("transcripts"),
        py::arg("config_json") = "", py::arg("store_dir") = std::filesystem::path{}, py::arg("via_search") = false,
        py::call_guard<py::gil_scoped_release>());
}
