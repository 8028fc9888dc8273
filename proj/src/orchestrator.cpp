#include "websynth/orchestrator.hpp"

#include <algorithm>
#include <condition_variable>
#include <deque>
#include <set>
#include <sstream>
#include <thread>

#include "websynth/prompts.hpp"
#include "websynth/url.hpp"
#include "websynth/util.hpp"

namespace websynth {

namespace {

std::int64_t now_us() {
  return std::chrono::duration_cast<std::chrono::microseconds>(std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

}  // namespace

void RunConfig::validate() const {
  if (max_steps < 1) throw std::invalid_argument("max_steps must be at least 1");
  if (parallelism < 1) throw std::invalid_argument("parallelism must be at least 1");
  if (domain_cap < 1) throw std::invalid_argument("domain_cap must be at least 1");
  if (viewport.width < 1 || viewport.height < 1) throw std::invalid_argument("viewport must be positive");
}

RunConfig run_config_from_json(const nlohmann::json& j) {
  RunConfig c;
  c.max_steps = j.value("max_steps", c.max_steps);
  c.parallelism = j.value("parallelism", c.parallelism);
  if (j.contains("viewport")) {
    c.viewport.width = j["viewport"].value("width", c.viewport.width);
    c.viewport.height = j["viewport"].value("height", c.viewport.height);
  }
  c.domain_cap = j.value("domain_cap", c.domain_cap);
  c.blocklist = j.value("blocklist", c.blocklist);
  c.reasoning = j.value("reasoning", c.reasoning);
  c.a11y_limit = j.value("a11y_limit", c.a11y_limit);
  c.max_screenshots = j.value("max_screenshots", c.max_screenshots);
  if (j.contains("rates")) c.rates = cost_rates_from_json(j["rates"]);
  c.validate();
  return c;
}

nlohmann::json to_json(const RunConfig& c) {
  return {{"max_steps", c.max_steps},
          {"parallelism", c.parallelism},
          {"viewport", {{"width", c.viewport.width}, {"height", c.viewport.height}}},
          {"domain_cap", c.domain_cap},
          {"blocklist", c.blocklist},
          {"reasoning", c.reasoning},
          {"a11y_limit", c.a11y_limit},
          {"max_screenshots", c.max_screenshots},
          {"rates", to_json(c.rates)}};
}

SeedFilterResult filter_seeds(const std::vector<std::string>& lines, const SafetyPolicy& policy,
                              SeedSource default_source) {
  SeedFilterResult out;
  std::set<std::string> seen;
  for (const auto& raw : lines) {
    auto line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    SeedSpec seed;
    seed.source = default_source;
    try {
      if (line.front() == '{') {
        auto j = nlohmann::json::parse(line);
        seed.url = j.at("url").get<std::string>();
        if (j.contains("source")) seed.source = seed_source_from_string(j["source"].get<std::string>());
        seed.navigate_via_search = j.value("navigate_via_search", false);
      } else {
        std::istringstream in{std::string(line)};
        std::string tok;
        in >> seed.url;
        while (in >> tok) {
          if (tok == "search") {
            seed.navigate_via_search = true;
          } else {
            seed.source = seed_source_from_string(tok);
          }
        }
      }
    } catch (const std::exception&) {
      ++out.malformed;
      continue;
    }
    auto u = parse_url(seed.url);
    if (!u) {
      ++out.malformed;
      continue;
    }
    if (!policy.schemes().count(u->scheme)) {
      ++out.bad_scheme;
      continue;
    }
    if (policy.blocks_host(u->host)) {
      ++out.blocked;
      continue;
    }
    auto path = u->path;
    while (path.size() > 1 && path.back() == '/') path.pop_back();
    if (!seen.insert(registrable_domain(u->host) + path).second) {
      ++out.duplicates;
      continue;
    }
    out.seeds.push_back(std::move(seed));
  }
  return out;
}

namespace {

class TrajectoryRun {
 public:
  TrajectoryRun(const SeedSpec& seed, const RunConfig& cfg, Driver& driver, ChatBackend& backend)
      : seed_(seed),
        cfg_(cfg),
        driver_(driver),
        client_(backend, meter_),
        agents_(client_, AgentConfig{cfg.a11y_limit, cfg.max_screenshots}) {
    rec_.id = record_id_for(seed);
    rec_.seed = seed;
    rec_.template_version = prompts::version();
  }

  TrajectoryRecord run() {
    const auto start = now_us();
    try {
      body();
    } catch (const std::exception& e) {
      // Anything unexpected still yields a record.
      rec_.status = TrajectoryStatus::kEnvError;
      note(std::string("unexpected: ") + e.what());
    }
    if (session_) {
      session_->close();
      rec_.timings.session_close_us = now_us();
    }
    rec_.usage = meter_.snapshot();
    rec_.timings.total_us = now_us() - start;
    return std::move(rec_);
  }

 private:
  void note(const std::string& e) {
    if (rec_.error.empty()) rec_.error = e;
  }

  void visit(const std::string& url) {
    if (rec_.visited_urls.empty() || rec_.visited_urls.back() != url) rec_.visited_urls.push_back(url);
  }

  bool observe() {
    try {
      current_ = session_->observe();
      fresh_ = true;
      visit(current_.url);
      return true;
    } catch (const EnvError& e) {
      note(e.what());
      return false;
    }
  }

  bool step(const std::string& task, const std::string& nl, const Action& action) {
    const auto pre = current_;
    auto r = session_->execute(action);
    fresh_ = false;
    if (!r.ok) {
      note("execute " + render_action(action) + ": " + std::string(to_string(*r.error)) + " " + r.detail);
      return false;
    }
    StepRecord st;
    st.ordinal = rec_.steps.size();
    st.url = pre.url;
    st.refined_task = task;
    st.action_nl = nl;
    st.grounded = action;
    st.pre_digest = pre.digest;
    st.post_digest = session_->digest();
    st.screenshot = pre.screenshot;
    st.som_screenshot = pre.som_screenshot;
    st.html = pre.html;
    st.a11y = pre.a11y;
    st.a11y_text = serialize_a11y(pre.a11y, cfg_.a11y_limit);
    if (cfg_.reasoning) {
      // History before this action: the recorded steps so far.
      std::vector<std::string> prior;
      for (const auto& s : rec_.steps) prior.push_back(s.action_nl);
      try {
        st.reasoning = agents_.generate_reasoning(action, task, pre, prior);
      } catch (const BackendError&) {
        // The step is kept without a trace.
      }
    }
    rec_.steps.push_back(std::move(st));
    return true;
  }

  void body() {
    try {
      session_ = driver_.open(seed_.url, cfg_.viewport);
    } catch (const EnvError& e) {
      rec_.status = TrajectoryStatus::kEnvError;
      note(e.what());
      return;
    }
    rec_.timings.session_open_us = now_us();
    if (!observe()) {
      rec_.status = TrajectoryStatus::kEnvError;
      return;
    }

    AgentPayload proposal;
    try {
      proposal = agents_.propose(current_, seed_.url);
    } catch (const AgentError& e) {
      if (e.payload()) rec_.initial_task = e.payload()->task;
      note(e.what());
      rec_.status = e.kind() == AgentErrorKind::kPolicyHalt ? TrajectoryStatus::kHalted : TrajectoryStatus::kMalformed;
      finish_without_summary();
      return;
    } catch (const PayloadError& e) {
      note(std::string("proposal: ") + e.what());
      rec_.status = TrajectoryStatus::kMalformed;
      finish_without_summary();
      return;
    } catch (const BackendError& e) {
      note(std::string("proposal: ") + e.what());
      rec_.status = TrajectoryStatus::kEnvError;
      finish_without_summary();
      return;
    }
    rec_.initial_task = proposal.task;
    if (seed_.navigate_via_search) {
      proposal.grounded = act::SearchGoogle{proposal.task};
      proposal.action_nl = "Search Google for " + proposal.task;
    }
    state_ = initial_state(proposal, current_.digest);

    if (!step(state_.current_task, proposal.action_nl, proposal.grounded)) {
      rec_.status = TrajectoryStatus::kEnvError;
      finish_without_summary();
      return;
    }

    for (int refines = 0; refines < cfg_.max_steps; ++refines) {
      if (!observe()) break;
      AgentPayload next;
      try {
        next = agents_.refine(state_, current_, seed_.url);
      } catch (const std::exception& e) {
        note(std::string("refinement: ") + e.what());
        break;
      }
      if (next.grounded.is_stop()) break;
      if (!step(next.task, next.action_nl, next.grounded)) break;
    }
    summarize_and_verify();
  }

  void capture_final() {
    if (!fresh_) observe();
    rec_.final_screenshot = current_.screenshot;
    try {
      rec_.final_markdown = render_markdown(current_.html);
    } catch (const html::UnparseableDocument&) {
      rec_.final_markdown.clear();
    }
  }

  void finish_without_summary() { capture_final(); }

  void summarize_and_verify() {
    capture_final();
    std::vector<std::string> actions;
    ImageList shots;
    for (const auto& s : rec_.steps) {
      actions.push_back(s.action_nl);
      shots.push_back(s.screenshot);
    }
    shots.push_back(rec_.final_screenshot);
    try {
      auto summary = agents_.summarize(actions, shots, seed_.url);
      rec_.summary_task = summary.text;
      rec_.summary_warnings = summary.warnings;
    } catch (const PayloadError& e) {
      note(std::string("summarization: ") + e.what());
      rec_.status = TrajectoryStatus::kMalformed;
      return;
    } catch (const BackendError& e) {
      note(std::string("summarization: ") + e.what());
      rec_.status = TrajectoryStatus::kEnvError;
      return;
    }
    for (int attempt = 0; attempt < 2; ++attempt) {
      try {
        rec_.verdict = agents_.verify(rec_.summary_task, actions, shots, rec_.final_markdown);
        break;
      } catch (const AgentError& e) {
        if (attempt == 1) {
          note(std::string("verification: ") + e.what());
          rec_.status = TrajectoryStatus::kMalformed;
          return;
        }
      } catch (const BackendError& e) {
        note(std::string("verification: ") + e.what());
        rec_.status = TrajectoryStatus::kEnvError;
        return;
      }
    }
    rec_.status = rec_.verdict->status == VerdictStatus::kSuccess ? TrajectoryStatus::kSuccess
                                                                   : TrajectoryStatus::kFailure;
  }

  const SeedSpec& seed_;
  const RunConfig& cfg_;
  Driver& driver_;
  UsageMeter meter_;
  LlmClient client_;
  Agents agents_;
  TrajectoryRecord rec_;
  std::unique_ptr<Session> session_;
  PageObservation current_;
  bool fresh_ = false;
  TaskState state_;
};

// Hands out seeds so that no domain exceeds its session cap.
class AdmissionGate {
 public:
  AdmissionGate(const std::vector<SeedSpec>& seeds, int cap) : cap_(cap) {
    for (std::size_t i = 0; i < seeds.size(); ++i) {
      auto u = parse_url(seeds[i].url);
      pending_.push_back({i, u ? registrable_domain(u->host) : seeds[i].url});
    }
  }

  std::optional<std::pair<std::size_t, std::string>> acquire() {
    std::unique_lock lock(mu_);
    while (true) {
      if (pending_.empty() || stopped_) return std::nullopt;
      for (auto it = pending_.begin(); it != pending_.end(); ++it) {
        if (active_[it->second] < cap_) {
          auto item = *it;
          pending_.erase(it);
          ++active_[item.second];
          return item;
        }
      }
      cv_.wait(lock);
    }
  }

  void release(const std::string& domain) {
    {
      std::lock_guard lock(mu_);
      --active_[domain];
    }
    cv_.notify_all();
  }

  void stop() {
    {
      std::lock_guard lock(mu_);
      stopped_ = true;
    }
    cv_.notify_all();
  }

 private:
  int cap_;
  std::mutex mu_;
  std::condition_variable cv_;
  std::deque<std::pair<std::size_t, std::string>> pending_;
  std::map<std::string, int> active_;
  bool stopped_ = false;
};

}  // namespace

TrajectoryRecord run_trajectory(const SeedSpec& seed, const RunConfig& cfg, Driver& driver, ChatBackend& backend) {
  return TrajectoryRun(seed, cfg, driver, backend).run();
}

BatchReport run_batch(const std::vector<SeedSpec>& seeds, const RunConfig& cfg, Driver& driver, ChatBackend& backend,
                      Datastore& store, const RecordCallback& on_record) {
  cfg.validate();
  BatchReport report;
  const auto start = now_us();
  AdmissionGate gate(seeds, cfg.domain_cap);
  std::mutex mu;
  std::vector<std::string> ids(seeds.size());
  std::vector<TrajectoryStatus> statuses(seeds.size(), TrajectoryStatus::kEnvError);
  std::vector<bool> done(seeds.size(), false);
  UsageMeter usage;
  int active = 0;
  std::exception_ptr fatal;

  auto worker = [&] {
    while (auto item = gate.acquire()) {
      const auto [index, domain] = *item;
      {
        std::lock_guard lock(mu);
        report.peak_concurrency = std::max(report.peak_concurrency, ++active);
      }
      auto rec = run_trajectory(seeds[index], cfg, driver, backend);
      {
        std::lock_guard lock(mu);
        --active;
      }
      gate.release(domain);
      try {
        store.persist(rec);
      } catch (const DatastoreError&) {
        std::lock_guard lock(mu);
        if (!fatal) fatal = std::current_exception();
        gate.stop();
        return;
      }
      for (const auto& [stage, u] : rec.usage) usage.record(stage, u);
      {
        std::lock_guard lock(mu);
        ids[index] = rec.id;
        statuses[index] = rec.status;
        done[index] = true;
        if (on_record) on_record(rec);
      }
    }
  };

  const auto n_workers = std::min<std::size_t>(static_cast<std::size_t>(cfg.parallelism), seeds.size());
  std::vector<std::thread> pool;
  for (std::size_t i = 0; i < n_workers; ++i) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (fatal) std::rethrow_exception(fatal);

  for (std::size_t i = 0; i < seeds.size(); ++i) {
    if (!done[i]) continue;
    report.total++;
    report.by_status[statuses[i]]++;
    report.ids.push_back(ids[i]);
  }
  report.usage = usage.snapshot();
  report.wall_us = now_us() - start;
  report.cost = cost_report(report.usage, cfg.rates, report.total, report.by_status[TrajectoryStatus::kSuccess]);
  return report;
}

nlohmann::json to_json(const BatchReport& r) {
  nlohmann::json by_status = nlohmann::json::object();
  for (auto s : {TrajectoryStatus::kSuccess, TrajectoryStatus::kFailure, TrajectoryStatus::kHalted,
                 TrajectoryStatus::kMalformed, TrajectoryStatus::kEnvError}) {
    auto it = r.by_status.find(s);
    by_status[std::string(to_string(s))] = it == r.by_status.end() ? 0 : it->second;
  }
  return {{"total", r.total},
          {"by_status", by_status},
          {"ids", r.ids},
          {"peak_concurrency", r.peak_concurrency},
          {"wall_ms", static_cast<double>(r.wall_us) / 1000.0},
          {"cost", to_json(r.cost)}};
}

}  // namespace websynth
