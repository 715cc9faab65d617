// Command-line front end over the C interface.

#include <csignal>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "webstress/webstress.h"

#ifndef WEBSTRESS_DEFAULT_CATALOG
#define WEBSTRESS_DEFAULT_CATALOG "catalog"
#endif

namespace {

using nlohmann::json;

int report_error(ws_status st) {
  std::cerr << "error (" << ws_status_name(st) << "): " << ws_last_error() << '\n';
  return st == WS_ERR_ARGUMENT ? 2 : 1;
}

// Owns a string returned by the library.
struct Owned {
  char* p = nullptr;
  ~Owned() { ws_string_free(p); }
  std::string str() const { return p ? p : ""; }
};

struct CatalogArgs {
  std::string sites = std::string(WEBSTRESS_DEFAULT_CATALOG) + "/sites";
  std::string tasks = std::string(WEBSTRESS_DEFAULT_CATALOG) + "/tasks";
};

void add_catalog_options(CLI::App* cmd, CatalogArgs& args) {
  cmd->add_option("--sites", args.sites, "Directory of site definitions")->capture_default_str();
  cmd->add_option("--tasks", args.tasks, "Directory of task definitions")->capture_default_str();
}

struct Intensity {
  std::optional<double> fail_prob, popup_freq, chaos, noise_density;

  void apply(json& j) const {
    if (fail_prob) j["failure_p"] = *fail_prob;
    if (popup_freq) j["popup_f"] = *popup_freq;
    if (chaos) j["chaos_magnitude"] = *chaos;
    if (noise_density) j["noise_density"] = *noise_density;
  }
};

void add_intensity_options(CLI::App* cmd, Intensity& in) {
  auto unit = CLI::Range(0.0, 1.0);
  cmd->add_option("--fail-prob", in.fail_prob, "Failure probability per action (default 0.35)")->check(unit);
  cmd->add_option("--popup-freq", in.popup_freq, "Pop-up probability per state change (default 0.30)")->check(unit);
  cmd->add_option("--chaos", in.chaos, "Chaos magnitude (default 0.5)")->check(unit);
  cmd->add_option("--noise-density", in.noise_density, "Noise density (default 0.5)")->check(unit);
}

ws_catalog* open_catalog(const CatalogArgs& args, int& rc) {
  ws_catalog* c = nullptr;
  ws_status st = ws_catalog_load(args.sites.c_str(), args.tasks.c_str(), &c);
  if (st != WS_OK) rc = report_error(st);
  return c;
}

std::string slurp(const std::string& path) {
  if (path == "-") {
    std::ostringstream ss;
    ss << std::cin.rdbuf();
    return ss.str();
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ws_server* g_server = nullptr;

extern "C" void on_signal(int) {
  if (g_server) ws_server_stop(g_server);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Deterministic web-environment simulator and stress harness for web agents"};
  app.require_subcommand(1);
  app.set_version_flag("--version", ws_version());

  // run
  CatalogArgs run_cat;
  Intensity run_int;
  std::vector<std::string> run_modes{"all"}, run_agents{"oracle"}, run_task_ids;
  std::uint64_t run_seed = 0;
  int run_max_steps = 100, run_parallel = 1, run_reps = 1;
  std::string run_out = "records.jsonl", run_agent_cmd;
  auto* run = app.add_subcommand("run", "Run agents over tasks and perturbation modes");
  add_catalog_options(run, run_cat);
  run->add_option("--mode", run_modes, "Modes: clean chaos noise failure popup remapE remap, or all")
      ->delimiter(',')
      ->capture_default_str();
  run->add_option("--agent", run_agents, "Agents: oracle random always-done wait external")
      ->delimiter(',')
      ->capture_default_str();
  run->add_option("--task", run_task_ids, "Restrict to these task ids")->delimiter(',');
  run->add_option("--seed", run_seed, "Suite seed")->capture_default_str();
  run->add_option("--max-steps", run_max_steps, "Step budget per episode")->check(CLI::PositiveNumber)->capture_default_str();
  run->add_option("--parallel", run_parallel, "Worker threads")->check(CLI::PositiveNumber)->capture_default_str();
  run->add_option("--reps", run_reps, "Repetitions per (task, mode, agent)")->check(CLI::PositiveNumber)->capture_default_str();
  run->add_option("--out", run_out, "Record file (JSON lines)")->capture_default_str();
  run->add_option("--agent-cmd", run_agent_cmd, "Command for the external agent");
  add_intensity_options(run, run_int);

  // report
  std::string rep_records, rep_format = "table", rep_analysis = "all";
  auto* rep = app.add_subcommand("report", "Compute metrics over a record file");
  rep->add_option("--records", rep_records, "Record file")->required();
  rep->add_option("--format", rep_format, "table or csv")
      ->check(CLI::IsMember({"table", "csv"}))
      ->capture_default_str();
  rep->add_option("--analysis", rep_analysis, "summary, retention, calibration, repetition or all")
      ->check(CLI::IsMember({"summary", "retention", "calibration", "repetition", "all"}))
      ->capture_default_str();

  // serve
  CatalogArgs srv_cat;
  std::string srv_host = "127.0.0.1";
  int srv_port = 8080, srv_max_steps = 100;
  auto* srv = app.add_subcommand("serve", "Serve sessions over HTTP");
  add_catalog_options(srv, srv_cat);
  srv->add_option("--host", srv_host)->capture_default_str();
  srv->add_option("--port", srv_port, "0 picks a free port")->capture_default_str();
  srv->add_option("--max-steps", srv_max_steps)->check(CLI::PositiveNumber)->capture_default_str();

  // validate
  CatalogArgs val_cat;
  auto* val = app.add_subcommand("validate", "Load and check every site and task");
  add_catalog_options(val, val_cat);

  // dom
  auto* dom = app.add_subcommand("dom", "HTML subset utilities");
  dom->require_subcommand(1);
  std::string canon_file;
  auto* canon = dom->add_subcommand("canonicalize", "Print the canonical serialization of an HTML file");
  canon->add_option("file", canon_file, "HTML file, or - for stdin")->required();
  std::string query_file, query_sel;
  auto* qry = dom->add_subcommand("query", "Print elements matching a selector");
  qry->add_option("file", query_file, "HTML file, or - for stdin")->required();
  qry->add_option("selector", query_sel)->required();
  CatalogArgs render_cat;
  Intensity render_int;
  std::string render_task, render_mode = "clean";
  std::uint64_t render_seed = 0;
  auto* rnd = dom->add_subcommand("render", "Print a task's initial page as an agent sees it");
  add_catalog_options(rnd, render_cat);
  rnd->add_option("--task", render_task)->required();
  rnd->add_option("--mode", render_mode)->capture_default_str();
  rnd->add_option("--seed", render_seed)->capture_default_str();
  add_intensity_options(rnd, render_int);

  CLI11_PARSE(app, argc, argv);

  int rc = 0;
  try {
    if (*run) {
      ws_catalog* cat = open_catalog(run_cat, rc);
      if (!cat) return rc;
      json cfg{{"agents", run_agents}, {"seed", run_seed}, {"max_steps", run_max_steps},
               {"parallel", run_parallel}, {"reps", run_reps}};
      if (!(run_modes.size() == 1 && run_modes[0] == "all")) cfg["modes"] = run_modes;
      if (!run_task_ids.empty()) cfg["tasks"] = run_task_ids;
      if (!run_agent_cmd.empty()) cfg["agent_command"] = run_agent_cmd;
      run_int.apply(cfg);
      ws_status st = ws_run_suite(cat, cfg.dump().c_str(), run_out.c_str(), nullptr);
      ws_catalog_free(cat);
      if (st != WS_OK) return report_error(st);
      std::cerr << "records written to " << run_out << '\n';
    } else if (*rep) {
      Owned text;
      ws_status st = ws_report(rep_records.c_str(), rep_analysis.c_str(), rep_format.c_str(), &text.p);
      if (st != WS_OK) return report_error(st);
      std::cout << text.str();
    } else if (*srv) {
      ws_catalog* cat = open_catalog(srv_cat, rc);
      if (!cat) return rc;
      int port = 0;
      ws_status st = ws_server_start(cat, srv_host.c_str(), srv_port, srv_max_steps, &g_server, &port);
      if (st != WS_OK) {
        ws_catalog_free(cat);
        return report_error(st);
      }
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      std::cerr << "listening on http://" << srv_host << ":" << port << '\n';
      ws_server_wait(g_server);
      ws_server_free(g_server);
      g_server = nullptr;
      ws_catalog_free(cat);
    } else if (*val) {
      ws_catalog* cat = open_catalog(val_cat, rc);
      if (!cat) return rc;
      Owned ids;
      ws_catalog_tasks(cat, &ids.p);
      std::cout << "ok: " << json::parse(ids.str()).size() << " tasks\n";
      ws_catalog_free(cat);
    } else if (*canon) {
      Owned out;
      ws_status st = ws_html_canonicalize(slurp(canon_file).c_str(), &out.p);
      if (st != WS_OK) return report_error(st);
      std::cout << out.str() << '\n';
    } else if (*qry) {
      Owned out;
      ws_status st = ws_query(slurp(query_file).c_str(), query_sel.c_str(), &out.p);
      if (st != WS_OK) return report_error(st);
      for (const auto& s : json::parse(out.str())) std::cout << s.get<std::string>() << '\n';
    } else if (*rnd) {
      ws_catalog* cat = open_catalog(render_cat, rc);
      if (!cat) return rc;
      json cfg{{"task", render_task}, {"mode", render_mode}, {"seed", render_seed}};
      render_int.apply(cfg);
      Owned out;
      ws_status st = ws_render(cat, cfg.dump().c_str(), &out.p);
      ws_catalog_free(cat);
      if (st != WS_OK) return report_error(st);
      std::cout << out.str() << '\n';
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return rc;
}
