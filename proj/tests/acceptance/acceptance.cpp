// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero if any fails.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "dom/dom.hpp"
#include "dom/selector.hpp"
#include "eval/evaluator.hpp"
#include "harness/agents.hpp"
#include "harness/episode.hpp"
#include "harness/service.hpp"
#include "harness/suite.hpp"
#include "metrics/metrics.hpp"
#include "perturb/perturb.hpp"
#include "perturb/rng.hpp"
#include "site/kernel.hpp"
#include "support/catalog.hpp"
#include "support/oracles.hpp"

namespace {

using namespace webstress;
using harness::RunRecord;
using harness::TerminalStatus;
using nlohmann::json;
using perturb::Mode;
using site::ActionType;
using testing::bundled_catalog;

struct Verdict {
  bool pass = true;
  std::string detail;

  void require(bool cond, const std::string& what) {
    if (!cond && pass) {
      pass = false;
      detail = what;
    }
  }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

perturb::PerturbConfig config(Mode m, std::uint64_t seed) {
  perturb::PerturbConfig c;
  c.mode = m;
  c.seed = seed;
  return c;
}

const std::vector<std::string>& task_ids() {
  static const auto ids = bundled_catalog().task_ids();
  return ids;
}

std::vector<Mode> all_modes() { return {perturb::kAllModes.begin(), perturb::kAllModes.end()}; }

// 1 -------------------------------------------------------------------------------
Verdict oracle_completeness() {
  Verdict v;
  harness::SuiteConfig c;
  c.agents = {"oracle"};
  const auto t0 = std::chrono::steady_clock::now();
  const auto records = harness::run_suite(bundled_catalog(), c);
  const double secs = seconds_since(t0);
  const auto summary = metrics::summarize(records);
  const auto& row = summary.agents.at("oracle");
  for (Mode m : perturb::kAllModes) {
    const auto& cell = row.modes.at(m);
    v.require(cell.passed == cell.total && cell.episodes == task_ids().size(),
              std::string(perturb::to_string(m)) + " ckpt% " + metrics::format_one_decimal(cell.ckpt));
  }
  v.require(secs < 60.0, "suite took " + fmt("%.1f s", secs));
  if (v.pass) {
    v.detail = std::to_string(records.size()) + " episodes, ckpt% 100.0 in every mode, " + fmt("%.2f s", secs);
  }
  return v;
}

// 2 -------------------------------------------------------------------------------
Verdict oracle_step_ordering() {
  Verdict v;
  std::map<Mode, long long> steps;
  long long extra = 0, affected = 0;
  std::map<std::string, long long> clean_steps;
  std::map<std::string, long long> failable;
  for (const auto& id : task_ids()) {
    long long n = 0;
    for (const auto& a : testing::bundled_task(id).golden) {
      n += a.type == ActionType::click || a.type == ActionType::fill || a.type == ActionType::type;
    }
    failable[id] = n;
  }
  const int kSeeds = 100;
  for (int seed = 1; seed <= kSeeds; ++seed) {
    harness::SuiteConfig c;
    c.agents = {"oracle"};
    c.seed = static_cast<std::uint64_t>(seed);
    const auto records = harness::run_suite(bundled_catalog(), c);
    for (const auto& r : records) {
      steps[r.mode()] += r.steps_used;
      v.require(r.all_passed(), r.task_id + " failed under " + std::string(perturb::to_string(r.mode())));
      if (r.mode() == Mode::clean) clean_steps[r.task_id] = r.steps_used;
    }
    for (const auto& r : records) {
      if (r.mode() != Mode::failure) continue;
      extra += r.steps_used - clean_steps.at(r.task_id);
      affected += failable.at(r.task_id);
    }
  }
  const double episodes = static_cast<double>(kSeeds) * static_cast<double>(task_ids().size());
  auto mean = [&](Mode m) { return static_cast<double>(steps[m]) / episodes; };
  v.require(steps[Mode::clean] == steps[Mode::chaos] && steps[Mode::chaos] == steps[Mode::noise],
            "clean/chaos/noise differ");
  v.require(steps[Mode::noise] < steps[Mode::remap], "noise !< remap");
  v.require(steps[Mode::remap] <= steps[Mode::remap_explicit], "remap !<= remapE");
  v.require(steps[Mode::remap_explicit] < steps[Mode::popup], "remapE !< popup");
  v.require(steps[Mode::popup] < steps[Mode::failure], "popup !< failure");
  const double per_action = static_cast<double>(extra) / static_cast<double>(affected);
  v.require(per_action >= 0.45 && per_action <= 0.65, "extra per affected action " + fmt("%.3f", per_action));
  std::ostringstream d;
  d << "mean steps clean " << fmt("%.3f", mean(Mode::clean)) << " chaos " << fmt("%.3f", mean(Mode::chaos))
    << " noise " << fmt("%.3f", mean(Mode::noise)) << " remap " << fmt("%.3f", mean(Mode::remap)) << " remapE "
    << fmt("%.3f", mean(Mode::remap_explicit)) << " popup " << fmt("%.3f", mean(Mode::popup)) << " failure "
    << fmt("%.3f", mean(Mode::failure)) << "; failure extra/affected action " << fmt("%.3f", per_action);
  if (v.pass) v.detail = d.str();
  else v.detail += " (" + d.str() + ")";
  return v;
}

// 3 -------------------------------------------------------------------------------
Verdict failure_calibration() {
  Verdict v;
  const auto c = config(Mode::failure, 2024);
  const int kDraws = 10000;
  int dropped = 0;
  for (int i = 0; i < kDraws; ++i) {
    const auto& id = task_ids()[static_cast<std::size_t>(i) % task_ids().size()];
    const perturb::StreamKey key{c.seed, perturb::fnv1a(id), static_cast<std::uint64_t>(i)};
    dropped += perturb::inject_failure(key, c, ActionType::click);
  }
  const double frac = static_cast<double>(dropped) / kDraws;
  v.require(frac >= 0.34 && frac <= 0.36, "drop fraction " + fmt("%.4f", frac));
  if (v.pass) v.detail = "drop fraction " + fmt("%.4f", frac) + " over 10000 draws";
  return v;
}

// 4 -------------------------------------------------------------------------------
std::string suite_file(const std::filesystem::path& path) {
  harness::SuiteConfig c;
  c.agents = {"oracle", "random", "always-done", "wait"};
  c.seed = 31337;
  c.parallel = 2;
  {
    std::ofstream out(path, std::ios::binary);
    harness::write_records(out, harness::run_suite(bundled_catalog(), c));
  }
  return testing::read_file(path.string());
}

Verdict determinism() {
  Verdict v;
  const auto dir = std::filesystem::temp_directory_path();
  const auto a = suite_file(dir / "webstress_accept_a.jsonl");
  const auto b = suite_file(dir / "webstress_accept_b.jsonl");
  std::filesystem::remove(dir / "webstress_accept_a.jsonl");
  std::filesystem::remove(dir / "webstress_accept_b.jsonl");
  const auto ha = std::hash<std::string>{}(a), hb = std::hash<std::string>{}(b);
  v.require(!a.empty(), "empty record file");
  v.require(ha == hb && a == b, "record files differ");
  if (v.pass) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "%zu bytes, hash %016zx on both runs", a.size(), ha);
    v.detail = buf;
  }
  return v;
}

// 5 -------------------------------------------------------------------------------
Verdict ground_truth_isolation() {
  Verdict v;
  int compared = 0;
  for (const auto& id : task_ids()) {
    const auto& task = testing::bundled_task(id);
    const auto& spec = bundled_catalog().site_for(task);
    std::vector<site::EntityStore> finals;
    for (Mode m : {Mode::clean, Mode::chaos, Mode::noise}) {
      for (std::uint64_t seed : {1u, 2u, 3u}) {
        harness::Episode ep(spec, task, config(m, seed));
        for (const auto& a : task.golden) ep.act(harness::OracleAgent::message_for(a).to_json());
        finals.push_back(ep.state().store);
      }
    }
    for (const auto& s : finals) v.require(s == finals.front(), id + ": final stores differ");
    compared += static_cast<int>(finals.size());
  }
  if (v.pass) v.detail = std::to_string(task_ids().size()) + " golden sequences, " + std::to_string(compared) +
                         " final stores equal field-for-field";
  return v;
}

// 6 -------------------------------------------------------------------------------
// Reference model of the double-click rule: an eligible trigger fires on the
// second of two consecutive clicks on the same (element, entity); any other
// click resets the pair.
Verdict remap_semantics() {
  Verdict v;
  std::mt19937_64 rng(6);
  int fires = 0, suppressed = 0, pages_checked = 0;
  std::map<std::string, std::set<std::string>> routes;
  for (const char* site_id : {"shop", "notes", "calendar"}) {
    std::string task_id;
    for (const auto& id : task_ids()) {
      if (testing::bundled_task(id).site_id == site_id) {
        task_id = id;
        break;
      }
    }
    const auto& task = testing::bundled_task(task_id);
    const auto& spec = testing::bundled_site(site_id);
    for (Mode m : {Mode::remap, Mode::remap_explicit}) {
      for (int seq = 0; seq < 60; ++seq) {
        harness::EpisodeOptions o;
        o.max_steps = 1000;
        harness::Episode ep(spec, task, config(m, static_cast<std::uint64_t>(seq)), o);
        std::optional<site::Selection> pending;
        std::string last;
        for (int i = 0; i < 24; ++i) {
          const bool banner = !dom::query(ep.view().tree, dom::parse_selector("#interaction-notice")).empty();
          v.require(banner == (m == Mode::remap_explicit), "banner wrong on " + ep.state().route);
          ++pages_checked;
          routes[site_id].insert(ep.state().route);

          // Candidates: every element with an id on the current page.
          std::vector<std::pair<std::string, int>> ids;
          const dom::DomIndex index(ep.page().tree);
          for (const auto* n : index.preorder()) {
            if (const std::string* a = n->attr("id"); a && *a != "interaction-notice") ids.push_back({*a, n->id});
          }
          if (ids.empty()) break;
          std::string pick;
          if (!last.empty() && rng() % 2 == 0 &&
              std::any_of(ids.begin(), ids.end(), [&](const auto& p) { return p.first == last; })) {
            pick = last;
          } else {
            pick = ids[rng() % ids.size()].first;
          }
          last = pick;

          const auto sel = dom::parse_selector("#" + pick);
          const auto resolved = site::resolve(ep.page(), sel).resolved;
          site::EnvState base = ep.state();
          base.ui.selected.reset();
          std::optional<site::Selection> here;
          if (resolved && resolved->target && resolved->target->kind == site::Target::Kind::trigger &&
              spec.remap_eligible(resolved->target->element_key)) {
            here = site::Selection{resolved->target->element_key, resolved->target->entity_id};
          }
          bool expect_fire;
          if (here) {
            expect_fire = pending && *pending == *here;
            pending = expect_fire ? std::nullopt : here;
          } else {
            expect_fire = true;
            pending.reset();
          }
          const auto expected =
              expect_fire ? site::transition(spec, base, {ActionType::click, resolved, {}, {}}).state : base;
          ep.act(harness::click("#" + pick).to_json());
          const std::string after = site::content_digest(ep.state());
          v.require(after == site::content_digest(expected),
                    std::string(site_id) + ": click #" + pick + (expect_fire ? " should fire" : " should not fire"));
          v.require(ep.state().ui.selected == pending, std::string(site_id) + ": selection mismatch after #" + pick);
          if (here) ++(expect_fire ? fires : suppressed);
        }
      }
    }
  }
  v.require(fires > 0 && suppressed > 0, "no remapped clicks exercised");
  for (const auto& [s, r] : routes) v.require(r.size() >= 2, std::string(s) + " walk stayed on one route");
  if (v.pass) {
    v.detail = std::to_string(fires) + " paired fires, " + std::to_string(suppressed) + " single clicks held, " +
               std::to_string(pages_checked) + " pages checked for the banner";
  }
  return v;
}

// 7 -------------------------------------------------------------------------------
Verdict parser_and_selectors() {
  Verdict v;
  const auto files = testing::fixture_files(WEBSTRESS_FIXTURE_DIR "/html", ".html");
  v.require(files.size() >= 20, "fixture corpus too small");
  for (const auto& f : files) {
    const auto first = dom::parse_html(testing::read_file(f));
    const std::string canonical = dom::serialize(first);
    const auto second = dom::parse_html(canonical);
    v.require(dom::structurally_equal(first, second) && dom::serialize(second) == canonical, "not a fixed point: " + f);
  }
  std::mt19937_64 rng(7);
  const int kCases = 500;
  for (int i = 0; i < kCases; ++i) {
    const auto tree = dom::parse_html(testing::random_html(rng));
    const auto sel = testing::random_selector(rng);
    v.require(dom::query(tree, sel) == testing::brute_force_query(tree, sel), "query mismatch for " + dom::to_string(sel));
  }
  if (v.pass) {
    v.detail = std::to_string(files.size()) + " fixtures at a fixed point, " + std::to_string(kCases) +
               " query cases agree with the brute-force scan";
  }
  return v;
}

// 8 -------------------------------------------------------------------------------
Verdict evaluator_mode_independence() {
  Verdict v;
  int replays = 0;
  for (const auto& id : task_ids()) {
    const auto& task = testing::bundled_task(id);
    const auto& spec = bundled_catalog().site_for(task);
    std::optional<std::vector<std::string>> reference_digests;
    std::optional<std::vector<eval::CheckpointResult>> reference_results;
    for (Mode m : perturb::kAllModes) {
      harness::EpisodeOptions o;
      o.keep_trace = true;
      harness::Episode ep(spec, task, config(m, 11), o);
      harness::OracleAgent agent(task);
      while (!ep.finished()) ep.act(agent.next_action(ep.observe()));
      v.require(ep.record().all_passed(), id + " oracle failed in " + std::string(perturb::to_string(m)));

      // Collapse steps that left the canonical content unchanged.
      std::vector<std::string> digests;
      std::vector<const site::EnvState*> states;
      for (const auto& s : ep.trace()) {
        const std::string d = site::content_digest(s);
        if (!digests.empty() && digests.back() == d) {
          states.back() = &s;
          continue;
        }
        digests.push_back(d);
        states.push_back(&s);
      }
      auto progress = eval::start_progress(task);
      for (std::size_t i = 0; i < states.size(); ++i) eval::evaluate_step(*states[i], task, progress, static_cast<int>(i));
      const auto results = eval::evaluate_final(*states.back(), task, progress, static_cast<int>(states.size()) - 1);
      ++replays;

      // Pass/fail of the recorded run agrees with the replay.
      for (std::size_t i = 0; i < results.size(); ++i) {
        v.require(results[i].passed == ep.record().checkpoints[i].passed, id + ": replay disagrees with record");
      }
      if (!reference_digests) {
        reference_digests = digests;
        reference_results = results;
        continue;
      }
      v.require(digests == *reference_digests,
                id + ": canonical sequence differs in " + std::string(perturb::to_string(m)));
      v.require(results == *reference_results,
                id + ": checkpoint results differ in " + std::string(perturb::to_string(m)));
    }
  }
  if (v.pass) v.detail = std::to_string(replays) + " replays, identical results per task across 7 modes";
  return v;
}

// 9 -------------------------------------------------------------------------------
RunRecord scored(Mode mode, std::vector<bool> results) {
  RunRecord r = testing::synthetic_record("fixture", mode, {});
  for (std::size_t i = 0; i < results.size(); ++i) {
    r.checkpoints.push_back({"c" + std::to_string(i), eval::Stage::final_stage, results[i], std::nullopt});
  }
  r.status = TerminalStatus::done_claimed;
  return r;
}

Verdict metrics_oracles() {
  Verdict v;
  std::mt19937_64 rng(9);
  const std::vector<json> vocab{json::parse(R"({"action_type":"CLICK","parameters":{"selector":"#a"}})"),
                                json::parse(R"({"action_type":"CLICK","parameters":{"selector":"#b"}})"),
                                json::parse(R"({"action_type":"WAIT","parameters":{}})")};
  std::vector<RunRecord> trajectories;
  std::size_t with_repeat = 0, total = 0, max_run = 0;
  for (int t = 0; t < 1000; ++t) {
    std::vector<json> actions;
    std::vector<std::string> identities;
    const std::size_t len = rng() % 15;
    for (std::size_t i = 0; i < len; ++i) {
      actions.push_back(vocab[rng() % vocab.size()]);
      identities.push_back(harness::action_identity(actions.back()).dump());
    }
    const auto s = testing::rle_stats(identities);
    with_repeat += s.any_repeat;
    total += s.total_repeats;
    max_run = std::max(max_run, s.max_run);
    trajectories.push_back(testing::synthetic_record("rle", Mode::clean, actions));
  }
  const auto rep = metrics::repetition(trajectories).at("rle").at(Mode::clean);
  v.require(rep.trajectories == 1000 && rep.with_repeat == with_repeat && rep.total_repeats == total &&
                rep.max_run == max_run,
            "repetition disagrees with run-length encoding");

  harness::SuiteConfig c;
  c.agents = {"always-done"};
  const auto done = harness::run_suite(bundled_catalog(), c);
  const auto cal = metrics::calibration(done);
  for (Mode m : perturb::kAllModes) {
    const auto& e = cal.at("always-done").at(m);
    std::size_t actual = 0;
    for (const auto& r : done) {
      if (r.mode() != m) continue;
      bool all = !r.checkpoints.empty();
      for (const auto& ck : r.checkpoints) all = all && ck.passed;
      actual += all;
    }
    v.require(e.claimed == task_ids().size(), "claimed != task count");
    v.require(e.actual == actual, "actual not computed from checkpoints");
  }

  const auto summary = metrics::summarize({scored(Mode::clean, {true, false}), scored(Mode::clean, {true, true, true, true})});
  const std::string micro = metrics::format_one_decimal(summary.agents.at("fixture").modes.at(Mode::clean).ckpt);
  v.require(micro == "83.3", "micro-average " + micro);
  if (v.pass) {
    v.detail = "RLE agrees on 1000 trajectories; always-DONE claimed " + std::to_string(task_ids().size()) +
               " per mode, actual " + std::to_string(cal.at("always-done").at(Mode::clean).actual) +
               "; micro-average " + micro;
  }
  return v;
}

// 10 ------------------------------------------------------------------------------
Verdict protocol_cardinality() {
  Verdict v;
  std::vector<std::string> ids;
  for (int i = 0; i < 149; ++i) ids.push_back("synthetic-" + std::to_string(i));
  const auto plan = harness::plan_suite(ids, all_modes(), {"oracle"}, 1, 0);
  v.require(plan.size() == 1043, "planned " + std::to_string(plan.size()));
  if (v.pass) v.detail = "149 tasks x 7 modes -> 1043 episodes";
  return v;
}

// 11 ------------------------------------------------------------------------------
Verdict interface_equivalence() {
  Verdict v;
  harness::SessionService service(bundled_catalog());
  harness::HttpServer http(service);
  const int port = http.bind("127.0.0.1", 0);
  if (port <= 0) {
    v.require(false, "cannot bind a local port");
    return v;
  }
  std::thread server([&] { http.listen(); });
  http.wait_until_ready();
  httplib::Client client("127.0.0.1", port);
  int compared = 0;
  for (const auto& id : task_ids()) {
    const auto& task = testing::bundled_task(id);
    for (Mode m : perturb::kAllModes) {
      const std::uint64_t seed = harness::episode_seed(5, id, m, 0);
      const json create{{"task", id}, {"mode", std::string(perturb::to_string(m))}, {"seed", seed}, {"agent_id", "oracle"}};
      auto res = client.Post("/sessions", create.dump(), "application/json");
      if (!res || res->status != 201) {
        v.require(false, "create failed for " + id);
        continue;
      }
      const std::string sid = json::parse(res->body).at("session_id");
      harness::OracleAgent remote(task);
      for (int guard = 0; guard < 200; ++guard) {
        auto obs = client.Get("/sessions/" + sid + "/observation");
        if (!obs || obs->status != 200) break;
        const auto body = json::parse(obs->body);
        if (body.at("terminated").get<bool>()) break;
        const json action = remote.next_action(harness::Observation::from_json(body));
        auto act = client.Post("/sessions/" + sid + "/act", action.dump(), "application/json");
        if (!act || act->status != 200) break;
      }
      auto result = client.Get("/sessions/" + sid + "/result");
      if (!result || result->status != 200) {
        v.require(false, "result failed for " + id);
        continue;
      }
      const auto networked = RunRecord::from_json(json::parse(result->body).at("record"));
      harness::OracleAgent local(task);
      const auto in_process = harness::run_episode(bundled_catalog().site_for(task), task, config(m, seed), local);
      v.require(networked == in_process, id + " differs over HTTP in " + std::string(perturb::to_string(m)));
      client.Delete("/sessions/" + sid);
      ++compared;
    }
  }
  http.stop();
  server.join();
  if (v.pass) v.detail = std::to_string(compared) + " networked records identical to in-process records";
  return v;
}

// 12 ------------------------------------------------------------------------------
Verdict budget_rule() {
  Verdict v;
  harness::SuiteConfig c;
  c.agents = {"wait"};
  const auto records = harness::run_suite(bundled_catalog(), c);
  for (const auto& r : records) {
    v.require(r.status == TerminalStatus::budget_exhausted && r.steps_used == 100 && r.steps.size() == 100,
              r.task_id + " in " + std::string(perturb::to_string(r.mode())));
  }
  if (v.pass) v.detail = std::to_string(records.size()) + " episodes ended budget_exhausted at 100 steps";
  return v;
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Verdict()>>> criteria{
      {"oracle completeness", oracle_completeness},
      {"oracle step ordering", oracle_step_ordering},
      {"failure-rate calibration", failure_calibration},
      {"determinism", determinism},
      {"ground-truth isolation", ground_truth_isolation},
      {"remap semantics", remap_semantics},
      {"parser and selector correctness", parser_and_selectors},
      {"evaluator mode-independence", evaluator_mode_independence},
      {"metrics oracles", metrics_oracles},
      {"protocol cardinality", protocol_cardinality},
      {"interface equivalence", interface_equivalence},
      {"budget rule", budget_rule},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    failed += !v.pass;
    std::printf("%s %2zu %s: %s\n", v.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, v.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
