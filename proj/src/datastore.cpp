#include "websynth/datastore.hpp"

#include <algorithm>
#include <cstdio>
#include <set>

#include "websynth/prompts.hpp"
#include "websynth/url.hpp"
#include "websynth/util.hpp"

namespace websynth {

namespace fs = std::filesystem;

std::string_view to_string(DatastoreErrorKind kind) {
  switch (kind) {
    case DatastoreErrorKind::kDatastoreUnavailable: return "DatastoreUnavailable";
    case DatastoreErrorKind::kCorruptManifest: return "CorruptManifest";
    case DatastoreErrorKind::kMissingArtifact: return "MissingArtifact";
    case DatastoreErrorKind::kEmptySelection: return "EmptySelection";
  }
  return "DatastoreError";
}

namespace {

std::string ordinal_name(std::size_t n) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%03zu", n);
  return buf;
}

}  // namespace

Datastore::Datastore(fs::path root) : root_(std::move(root)) {
  std::error_code ec;
  fs::create_directories(root_, ec);
  if (ec || !fs::is_directory(root_)) {
    throw DatastoreError(DatastoreErrorKind::kDatastoreUnavailable, root_.string() + ": " + ec.message());
  }
  auto probe = root_ / ".write-probe";
  try {
    write_file_atomic(probe, "ok");
    fs::remove(probe);
  } catch (const std::exception& e) {
    throw DatastoreError(DatastoreErrorKind::kDatastoreUnavailable, e.what());
  }
}

std::string Datastore::persist(TrajectoryRecord& rec) {
  const std::string base = rec.id.empty() ? record_id_for(rec.seed) : rec.id;
  fs::path dir;
  try {
    std::lock_guard lock(claim_mu_);
    for (int n = 0;; ++n) {
      auto candidate = n == 0 ? base : base + "-" + std::to_string(n);
      if (fs::create_directory(root_ / candidate)) {
        rec.id = candidate;
        dir = root_ / candidate;
        break;
      }
    }
    fs::create_directories(dir / "steps");
  } catch (const fs::filesystem_error& e) {
    throw DatastoreError(DatastoreErrorKind::kDatastoreUnavailable, e.what());
  }

  std::map<std::string, std::string> digests;
  auto put = [&](const std::string& rel, std::string_view data) {
    write_file_atomic(dir / rel, data);
    digests[rel] = sha256_hex(data);
  };
  auto put_png = [&](const std::string& rel, const Image& img) {
    auto png = encode_png(img);
    put(rel, std::string_view(reinterpret_cast<const char*>(png.data()), png.size()));
  };

  try {
    for (auto& s : rec.steps) {
      const auto stem = "steps/" + ordinal_name(s.ordinal);
      s.artifacts = {};
      s.artifacts.screenshot = stem + ".png";
      s.artifacts.som_screenshot = stem + ".som.png";
      s.artifacts.html = stem + ".html";
      s.artifacts.a11y_text = stem + ".a11y.txt";
      s.artifacts.a11y_json = stem + ".a11y.json";
      put_png(s.artifacts.screenshot, s.screenshot ? *s.screenshot : Image(s.a11y.viewport.width, s.a11y.viewport.height));
      put_png(s.artifacts.som_screenshot,
              s.som_screenshot ? *s.som_screenshot : Image(s.a11y.viewport.width, s.a11y.viewport.height));
      put(s.artifacts.html, s.html);
      put(s.artifacts.a11y_text, s.a11y_text);
      put(s.artifacts.a11y_json, to_json(s.a11y).dump());
      if (s.reasoning) {
        s.artifacts.reasoning = stem + ".reasoning.txt";
        put(s.artifacts.reasoning, *s.reasoning);
      }
    }
    if (rec.final_screenshot) put_png("final.png", *rec.final_screenshot);
    put("final.md", rec.final_markdown);
    write_file_atomic(dir / "manifest.json", manifest_json(rec, digests).dump(2) + "\n");
  } catch (const std::exception& e) {
    throw DatastoreError(DatastoreErrorKind::kDatastoreUnavailable, dir.string() + ": " + e.what());
  }
  return rec.id;
}

TrajectoryRecord Datastore::load(const std::string& id) const { return load_record(root_ / id); }

std::vector<std::string> Datastore::ids() const {
  std::vector<std::string> out;
  for (const auto& e : fs::directory_iterator(root_)) {
    if (e.is_directory() && fs::exists(e.path() / "manifest.json")) out.push_back(e.path().filename().string());
  }
  std::sort(out.begin(), out.end());
  return out;
}

nlohmann::json load_manifest(const fs::path& dir) {
  const auto path = dir / "manifest.json";
  if (!fs::exists(path)) throw DatastoreError(DatastoreErrorKind::kCorruptManifest, "no manifest in " + dir.string());
  auto m = nlohmann::json::parse(read_file(path), nullptr, false);
  if (m.is_discarded() || !m.is_object()) {
    throw DatastoreError(DatastoreErrorKind::kCorruptManifest, "unparseable " + path.string());
  }
  if (m.value("schema_version", -1) != kManifestSchemaVersion) {
    throw DatastoreError(DatastoreErrorKind::kCorruptManifest, "unsupported schema version in " + path.string());
  }
  try {
    for (const auto& s : m.at("steps")) {
      for (const auto& [_, rel] : s.at("artifacts").items()) {
        auto r = rel.get<std::string>();
        if (!r.empty() && !fs::exists(dir / r)) {
          throw DatastoreError(DatastoreErrorKind::kMissingArtifact, (dir / r).string());
        }
      }
    }
    for (const auto& [_, rel] : m.at("final").items()) {
      auto r = rel.get<std::string>();
      if (!r.empty() && !fs::exists(dir / r)) throw DatastoreError(DatastoreErrorKind::kMissingArtifact, (dir / r).string());
    }
  } catch (const nlohmann::json::exception& e) {
    throw DatastoreError(DatastoreErrorKind::kCorruptManifest, path.string() + ": " + e.what());
  }
  return m;
}

TrajectoryRecord load_record(const fs::path& dir) {
  auto m = load_manifest(dir);
  const auto digests = m.value("artifact_digests", std::map<std::string, std::string>{});
  auto read_checked = [&](const std::string& rel) {
    auto data = read_file(dir / rel);
    auto it = digests.find(rel);
    if (it != digests.end() && it->second != sha256_hex(data)) {
      throw DatastoreError(DatastoreErrorKind::kCorruptManifest, "digest mismatch for " + (dir / rel).string());
    }
    return data;
  };
  auto read_image = [&](const std::string& rel) {
    auto data = read_checked(rel);
    return std::make_shared<const Image>(
        decode_png(std::span(reinterpret_cast<const std::uint8_t*>(data.data()), data.size())));
  };
  try {
    TrajectoryRecord rec;
    rec.id = m.at("id").get<std::string>();
    const auto& seed = m.at("seed");
    rec.seed.url = seed.at("url").get<std::string>();
    rec.seed.source = seed_source_from_string(seed.at("source").get<std::string>());
    rec.seed.navigate_via_search = seed.value("navigate_via_search", false);
    rec.status = status_from_string(m.at("status").get<std::string>());
    rec.initial_task = m.at("initial_task").get<std::string>();
    rec.summary_task = m.at("summary_task").get<std::string>();
    rec.summary_warnings = m.at("summary_warnings").get<std::vector<std::string>>();
    if (!m.at("verdict").is_null()) {
      Verdict v;
      v.thoughts = m["verdict"].at("thoughts").get<std::string>();
      v.status = m["verdict"].at("status").get<std::string>() == "success" ? VerdictStatus::kSuccess
                                                                            : VerdictStatus::kFailure;
      rec.verdict = v;
    }
    for (const auto& [stage, u] : m.at("usage").items()) rec.usage[stage_from_string(stage)] = usage_from_json(u);
    rec.error = m.at("error").get<std::string>();
    rec.visited_urls = m.at("visited_urls").get<std::vector<std::string>>();
    rec.template_version = m.at("template_version").get<std::string>();
    for (const auto& s : m.at("steps")) {
      StepRecord st;
      st.ordinal = s.at("ordinal").get<std::size_t>();
      st.url = s.at("url").get<std::string>();
      st.refined_task = s.at("refined_task").get<std::string>();
      st.action_nl = s.at("action_nl").get<std::string>();
      st.grounded = parse_action(s.at("grounded").get<std::string>());
      if (s.contains("reasoning")) st.reasoning = s["reasoning"].get<std::string>();
      st.pre_digest = s.at("pre_digest").get<std::string>();
      st.post_digest = s.at("post_digest").get<std::string>();
      const auto& a = s.at("artifacts");
      st.artifacts.screenshot = a.at("screenshot").get<std::string>();
      st.artifacts.som_screenshot = a.at("som_screenshot").get<std::string>();
      st.artifacts.html = a.at("html").get<std::string>();
      st.artifacts.a11y_text = a.at("a11y_text").get<std::string>();
      st.artifacts.a11y_json = a.at("a11y_json").get<std::string>();
      st.artifacts.reasoning = a.value("reasoning", std::string{});
      st.screenshot = read_image(st.artifacts.screenshot);
      st.som_screenshot = read_image(st.artifacts.som_screenshot);
      st.html = read_checked(st.artifacts.html);
      st.a11y_text = read_checked(st.artifacts.a11y_text);
      st.a11y = snapshot_from_json(nlohmann::json::parse(read_checked(st.artifacts.a11y_json)));
      if (st.reasoning && !st.artifacts.reasoning.empty() && read_checked(st.artifacts.reasoning) != *st.reasoning) {
        throw DatastoreError(DatastoreErrorKind::kCorruptManifest, "reasoning text disagrees with its artifact");
      }
      rec.steps.push_back(std::move(st));
    }
    const auto final_png = m.at("final").at("screenshot").get<std::string>();
    if (!final_png.empty()) rec.final_screenshot = read_image(final_png);
    rec.final_markdown = read_checked(m.at("final").at("markdown").get<std::string>());
    const auto& t = m.at("timings");
    rec.timings.session_open_us = t.at("session_open_us").get<std::int64_t>();
    rec.timings.session_close_us = t.at("session_close_us").get<std::int64_t>();
    rec.timings.total_us = t.at("total_us").get<std::int64_t>();
    return rec;
  } catch (const nlohmann::json::exception& e) {
    throw DatastoreError(DatastoreErrorKind::kCorruptManifest, dir.string() + ": " + e.what());
  } catch (const std::invalid_argument& e) {
    throw DatastoreError(DatastoreErrorKind::kCorruptManifest, dir.string() + ": " + e.what());
  } catch (const ActionError& e) {
    throw DatastoreError(DatastoreErrorKind::kCorruptManifest, dir.string() + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------

Histogram token_histogram(const std::vector<std::uint64_t>& values, std::size_t bins) {
  Histogram h;
  if (values.empty() || bins == 0) return h;
  auto sorted = values;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t rank = (9 * sorted.size() + 9) / 10;  // ceil(0.9 n)
  h.p90 = sorted[rank - 1];
  double lo = static_cast<double>(sorted.front());
  double hi = static_cast<double>(sorted.back());
  if (hi == lo) hi = lo + 1;
  h.lo = lo;
  h.width = (hi - lo) / static_cast<double>(bins);
  h.counts.assign(bins, 0);
  for (auto v : values) {
    auto idx = static_cast<std::size_t>((static_cast<double>(v) - lo) / h.width);
    h.counts[std::min(idx, bins - 1)]++;
  }
  return h;
}

std::string histogram_csv(const Histogram& h) {
  std::string out = "bin_start,bin_end,count\n";
  char buf[128];
  for (std::size_t i = 0; i < h.counts.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.3f,%.3f,%llu\n", h.lo + h.width * static_cast<double>(i),
                  h.lo + h.width * static_cast<double>(i + 1), static_cast<unsigned long long>(h.counts[i]));
    out += buf;
  }
  return out;
}

namespace {

std::vector<fs::path> record_dirs(const fs::path& dataset) {
  std::vector<fs::path> dirs;
  if (!fs::is_directory(dataset)) return dirs;
  for (const auto& e : fs::directory_iterator(dataset)) {
    if (e.is_directory() && fs::exists(e.path() / "manifest.json")) dirs.push_back(e.path());
  }
  std::sort(dirs.begin(), dirs.end());
  return dirs;
}

std::size_t count_elements(std::string_view a11y_text) {
  std::size_t n = 0;
  for (const auto& line : split_lines(a11y_text)) n += trim(line).empty() ? 0 : 1;
  return n;
}

std::string strip_fragment(const std::string& url) {
  auto u = parse_url(url);
  return u ? u->without_fragment() : url.substr(0, url.find('#'));
}

}  // namespace

DatasetStats compute_stats(const fs::path& dataset, StatsScope scope) {
  DatasetStats st;
  std::set<std::string> urls;
  std::uint64_t steps = 0;
  for (const auto& dir : record_dirs(dataset)) {
    nlohmann::json m;
    std::uint64_t rec_tokens = 0, rec_elements = 0, rec_images = 0, rec_steps = 0;
    std::vector<std::string> rec_urls;
    try {
      m = load_manifest(dir);
      const bool success = m.at("status").get<std::string>() == "success";
      st.n_total++;
      st.n_success += success ? 1 : 0;
      if (scope == StatsScope::kSuccessOnly && !success) continue;
      rec_urls.push_back(strip_fragment(m.at("seed").at("url").get<std::string>()));
      for (const auto& u : m.at("visited_urls")) rec_urls.push_back(strip_fragment(u.get<std::string>()));
      for (const auto& s : m.at("steps")) {
        const auto a11y = read_file(dir / s.at("artifacts").at("a11y_text").get<std::string>());
        rec_elements += count_elements(a11y);
        rec_images += 1;
        rec_tokens += count_tokens(a11y) + count_tokens(s.at("grounded").get<std::string>()) +
                      count_tokens(s.at("action_nl").get<std::string>());
        rec_steps++;
      }
    } catch (const std::exception&) {
      if (!m.is_null()) {
        // Manifest parsed but was not usable; undo its totals.
        st.n_total--;
        if (m.value("status", std::string{}) == "success") st.n_success--;
      }
      st.n_corrupt++;
      continue;
    }
    st.n_counted++;
    steps += rec_steps;
    st.tokens += rec_tokens;
    st.elements += rec_elements;
    st.images += rec_images;
    st.tokens_per_trajectory.push_back(rec_tokens);
    urls.insert(rec_urls.begin(), rec_urls.end());
  }
  st.unique_urls = urls.size();
  st.avg_steps = st.n_counted ? static_cast<double>(steps) / static_cast<double>(st.n_counted) : 0.0;
  st.avg_elements_per_image = st.images ? static_cast<double>(st.elements) / static_cast<double>(st.images) : 0.0;
  st.histogram = token_histogram(st.tokens_per_trajectory);
  return st;
}

nlohmann::json to_json(const DatasetStats& s) {
  return {{"n_total", s.n_total},
          {"n_success", s.n_success},
          {"n_corrupt", s.n_corrupt},
          {"n_counted", s.n_counted},
          {"unique_urls", s.unique_urls},
          {"avg_steps", s.avg_steps},
          {"avg_elements_per_image", s.avg_elements_per_image},
          {"tokens", s.tokens},
          {"elements", s.elements},
          {"images", s.images},
          {"tokens_per_trajectory", s.tokens_per_trajectory},
          {"histogram",
           {{"lo", s.histogram.lo}, {"width", s.histogram.width}, {"counts", s.histogram.counts}, {"p90", s.histogram.p90}}}};
}

std::vector<std::string> filter_training(const fs::path& dataset, std::size_t max_scrolls) {
  std::vector<std::string> out;
  for (const auto& dir : record_dirs(dataset)) {
    try {
      auto m = load_manifest(dir);
      if (m.at("status").get<std::string>() != "success") continue;
      std::size_t scrolls = 0;
      for (const auto& s : m.at("steps")) scrolls += parse_action(s.at("grounded").get<std::string>()).is_scroll() ? 1 : 0;
      if (scrolls <= max_scrolls) out.push_back(m.at("id").get<std::string>());
    } catch (const std::exception&) {
      continue;
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

// ---------------------------------------------------------------------------

Micros div_round(Micros a, std::uint64_t b) {
  if (b == 0) throw std::invalid_argument("division by zero");
  const auto ub = static_cast<Micros>(b);
  return (a + ub / 2) / ub;
}

std::string format_dollars(Micros m, int decimals) {
  decimals = std::clamp(decimals, 0, 6);
  Micros scale = 1;
  for (int i = 0; i < 6 - decimals; ++i) scale *= 10;
  const Micros q = div_round(m, static_cast<std::uint64_t>(scale));
  Micros unit = 1;
  for (int i = 0; i < decimals; ++i) unit *= 10;
  std::string out = std::to_string(q / unit);
  if (decimals > 0) {
    auto frac = std::to_string(q % unit);
    out += "." + std::string(static_cast<std::size_t>(decimals) - frac.size(), '0') + frac;
  }
  return out;
}

CostRates cost_rates_from_json(const nlohmann::json& j) {
  CostRates r;
  auto micros = [](double usd) { return static_cast<Micros>(usd * 1e6 + 0.5); };
  if (j.contains("usd_per_million_tokens")) r.per_million_tokens = micros(j["usd_per_million_tokens"].get<double>());
  if (j.contains("usd_per_image")) r.per_image = micros(j["usd_per_image"].get<double>());
  if (j.contains("usd_per_call")) {
    for (const auto& [stage, v] : j["usd_per_call"].items()) r.per_call[stage_from_string(stage)] = micros(v.get<double>());
  }
  return r;
}

nlohmann::json to_json(const CostRates& r) {
  nlohmann::json per_call = nlohmann::json::object();
  for (const auto& [stage, m] : r.per_call) per_call[std::string(to_string(stage))] = static_cast<double>(m) / 1e6;
  return {{"usd_per_million_tokens", static_cast<double>(r.per_million_tokens) / 1e6},
          {"usd_per_image", static_cast<double>(r.per_image) / 1e6},
          {"usd_per_call", per_call}};
}

CostLedger cost_report(const std::map<Stage, Usage>& usage, const CostRates& rates, std::uint64_t n_total,
                       std::uint64_t n_success) {
  if (n_success > n_total) throw std::invalid_argument("n_success exceeds n_total");
  CostLedger l;
  l.n_total = n_total;
  l.n_success = n_success;
  for (auto stage : kAllStages) {
    auto it = usage.find(stage);
    const Usage u = it == usage.end() ? Usage{} : it->second;
    StageCost c;
    c.calls = u.calls;
    c.text_tokens = u.text_tokens();
    c.images = u.images;
    if (auto flat = rates.per_call.find(stage); flat != rates.per_call.end()) {
      c.dollars = static_cast<Micros>(c.calls) * flat->second;
    } else {
      const __int128 token_cost = static_cast<__int128>(c.text_tokens) * rates.per_million_tokens;
      c.dollars = static_cast<Micros>((token_cost + 500'000) / 1'000'000) + static_cast<Micros>(c.images) * rates.per_image;
    }
    l.stages[stage] = c;
    l.totals.calls += c.calls;
    l.totals.text_tokens += c.text_tokens;
    l.totals.images += c.images;
    l.totals.dollars += c.dollars;
  }
  l.cost_per_trajectory = n_total ? div_round(l.totals.dollars, n_total) : 0;
  if (n_success) l.cost_per_success = div_round(l.totals.dollars, n_success);
  return l;
}

nlohmann::json to_json(const CostLedger& l) {
  auto stage_json = [](const StageCost& c) {
    return nlohmann::json{{"calls", c.calls},
                          {"text_tokens", c.text_tokens},
                          {"images", c.images},
                          {"micro_usd", c.dollars},
                          {"usd", format_dollars(c.dollars, 6)}};
  };
  nlohmann::json stages = nlohmann::json::object();
  for (const auto& [stage, c] : l.stages) stages[std::string(to_string(stage))] = stage_json(c);
  nlohmann::json j = {{"stages", stages},
                      {"totals", stage_json(l.totals)},
                      {"n_total", l.n_total},
                      {"n_success", l.n_success},
                      {"cost_per_trajectory_micro_usd", l.cost_per_trajectory},
                      {"cost_per_trajectory", format_dollars(l.cost_per_trajectory)}};
  if (l.cost_per_success) {
    j["cost_per_success_micro_usd"] = *l.cost_per_success;
    j["cost_per_success"] = format_dollars(*l.cost_per_success);
  }
  return j;
}

// ---------------------------------------------------------------------------

std::string_view to_string(SamplingStrategy s) {
  return s == SamplingStrategy::kTrajectoryThenStep ? "trajectory-then-step" : "uniform-step";
}

SamplingStrategy sampling_strategy_from_string(std::string_view s) {
  if (s == "trajectory-then-step") return SamplingStrategy::kTrajectoryThenStep;
  if (s == "uniform-step") return SamplingStrategy::kUniformStep;
  throw std::invalid_argument("unknown sampling strategy: " + std::string(s));
}

std::uint64_t bounded_draw(std::uint64_t n, std::mt19937_64& rng) {
  if (n == 0) throw std::invalid_argument("bounded_draw over an empty range");
  const std::uint64_t threshold = (0 - n) % n;  // 2^64 mod n
  while (true) {
    const std::uint64_t x = rng();
    if (x >= threshold) return x % n;
  }
}

std::vector<std::pair<std::size_t, std::size_t>> sample_steps(const std::vector<std::size_t>& steps,
                                                             SamplingStrategy strategy, std::uint64_t seed,
                                                             std::size_t draws) {
  std::vector<std::size_t> nonempty;
  std::size_t total = 0;
  for (std::size_t i = 0; i < steps.size(); ++i) {
    if (steps[i] > 0) nonempty.push_back(i);
    total += steps[i];
  }
  if (total == 0) throw DatastoreError(DatastoreErrorKind::kEmptySelection, "no steps to sample");
  std::mt19937_64 rng(seed);
  std::vector<std::pair<std::size_t, std::size_t>> out;
  out.reserve(draws);
  for (std::size_t d = 0; d < draws; ++d) {
    if (strategy == SamplingStrategy::kTrajectoryThenStep) {
      const auto t = nonempty[bounded_draw(nonempty.size(), rng)];
      out.emplace_back(t, bounded_draw(steps[t], rng));
    } else {
      auto k = bounded_draw(total, rng);
      std::size_t t = 0;
      while (k >= steps[t]) k -= steps[t++];
      out.emplace_back(t, k);
    }
  }
  return out;
}

nlohmann::json to_json(const TrainingInstance& t) {
  return {{"trajectory_id", t.trajectory_id}, {"step", t.step},     {"system", t.system},
          {"user", t.user},                   {"target", t.target}, {"image", t.image}};
}

std::vector<TrainingInstance> export_training(const fs::path& dataset, const std::vector<std::string>& ids,
                                              const ExportOptions& opts) {
  std::vector<nlohmann::json> manifests;
  std::vector<std::size_t> counts;
  for (const auto& id : ids) {
    manifests.push_back(load_manifest(dataset / id));
    counts.push_back(manifests.back().at("steps").size());
  }
  std::size_t total = 0;
  for (auto c : counts) total += c;
  if (total == 0) throw DatastoreError(DatastoreErrorKind::kEmptySelection, "selected trajectories hold no steps");
  const auto draws = sample_steps(counts, opts.strategy, opts.seed, opts.draws ? opts.draws : total);

  const std::string system(prompts::get("training_system"));
  std::vector<TrainingInstance> out;
  out.reserve(draws.size());
  for (const auto& [t, k] : draws) {
    const auto& m = manifests[t];
    const auto& steps = m.at("steps");
    const auto& s = steps[k];
    const auto dir = dataset / ids[t];
    auto snapshot = snapshot_from_json(nlohmann::json::parse(read_file(dir / s.at("artifacts").at("a11y_json").get<std::string>())));
    const auto grounded = parse_action(s.at("grounded").get<std::string>());
    auto candidates = select_candidates(snapshot, default_rank_score, opts.candidates, grounded.element());
    std::vector<std::string> history;
    for (std::size_t i = 0; i < k; ++i) history.push_back(steps[i].at("action_nl").get<std::string>());
    auto task = m.at("summary_task").get<std::string>();
    if (task.empty()) task = m.at("initial_task").get<std::string>();
    TrainingInstance inst;
    inst.trajectory_id = ids[t];
    inst.step = k;
    inst.system = system;
    inst.user = prompts::fill(prompts::get("training_user"), {{"TASK_DESCRIPTION", task},
                                                               {"PREVIOUS_ACTIONS", render_history(history)},
                                                               {"ACCESSIBILITY_TREE", serialize_a11y(candidates)}});
    inst.target = to_training_action(grounded, s.at("action_nl").get<std::string>());
    inst.image = ids[t] + "/" + s.at("artifacts").at("som_screenshot").get<std::string>();
    out.push_back(std::move(inst));
  }
  return out;
}

}  // namespace websynth
