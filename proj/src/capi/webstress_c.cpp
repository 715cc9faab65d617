#include "webstress/webstress.h"

#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>
#include <thread>

#include <json.hpp>

#include "dom/dom.hpp"
#include "dom/selector.hpp"
#include "harness/agents.hpp"
#include "harness/catalog.hpp"
#include "harness/episode.hpp"
#include "harness/service.hpp"
#include "harness/suite.hpp"
#include "metrics/metrics.hpp"
#include "site/kernel.hpp"

using nlohmann::json;
namespace h = webstress::harness;

struct ws_catalog {
  h::Catalog catalog;
};

struct ws_session {
  std::unique_ptr<h::Episode> episode;
};

struct ws_server {
  std::unique_ptr<h::SessionService> service;
  std::unique_ptr<h::HttpServer> http;
  std::thread thread;
};

namespace {

thread_local std::string g_last_error;

ws_status fail(ws_status status, const std::string& message) {
  g_last_error = message;
  return status;
}

char* dup(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out) std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

ws_status put(char** out, const std::string& s) {
  if (!out) return WS_OK;
  *out = dup(s);
  return *out ? WS_OK : fail(WS_ERR_INTERNAL, "out of memory");
}

// Runs `body`, translating exceptions into status codes.
template <class F>
ws_status guarded(F&& body) {
  g_last_error.clear();
  try {
    return body();
  } catch (const webstress::dom::ParseError& e) {
    return fail(WS_ERR_PARSE, e.what());
  } catch (const webstress::dom::SelectorError& e) {
    return fail(WS_ERR_PARSE, e.what());
  } catch (const json::exception& e) {
    return fail(WS_ERR_ARGUMENT, e.what());
  } catch (const std::invalid_argument& e) {
    return fail(WS_ERR_ARGUMENT, e.what());
  } catch (const h::EpisodeFinished& e) {
    return fail(WS_ERR_STATE, e.what());
  } catch (const std::exception& e) {
    return fail(WS_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(WS_ERR_INTERNAL, "unknown error");
  }
}

json parse_object(const char* text, const char* what) {
  json j = (text && *text) ? json::parse(text) : json::object();
  if (!j.is_object()) throw std::invalid_argument(std::string(what) + " must be a JSON object");
  return j;
}

}  // namespace

extern "C" {

const char* ws_version(void) { return "1.0.0"; }

const char* ws_status_name(ws_status status) {
  switch (status) {
    case WS_OK: return "ok";
    case WS_ERR_ARGUMENT: return "argument";
    case WS_ERR_NOT_FOUND: return "not_found";
    case WS_ERR_PARSE: return "parse";
    case WS_ERR_CATALOG: return "catalog";
    case WS_ERR_STATE: return "state";
    case WS_ERR_IO: return "io";
    case WS_ERR_INTERNAL: return "internal";
  }
  return "unknown";
}

const char* ws_last_error(void) { return g_last_error.c_str(); }

void ws_string_free(char* s) { std::free(s); }

ws_status ws_catalog_load(const char* sites_dir, const char* tasks_dir, ws_catalog** out) {
  if (!sites_dir || !tasks_dir || !out) return fail(WS_ERR_ARGUMENT, "null argument");
  *out = nullptr;
  return guarded([&] {
    for (const char* d : {sites_dir, tasks_dir}) {
      if (!std::filesystem::is_directory(d)) return fail(WS_ERR_NOT_FOUND, std::string("not a directory: ") + d);
    }
    try {
      auto c = std::make_unique<ws_catalog>(ws_catalog{h::Catalog::load(sites_dir, tasks_dir)});
      *out = c.release();
    } catch (const std::runtime_error& e) {
      return fail(WS_ERR_CATALOG, e.what());
    }
    return WS_OK;
  });
}

void ws_catalog_free(ws_catalog* catalog) { delete catalog; }

ws_status ws_catalog_tasks(const ws_catalog* catalog, char** out_json) {
  if (!catalog || !out_json) return fail(WS_ERR_ARGUMENT, "null argument");
  return guarded([&] { return put(out_json, json(catalog->catalog.task_ids()).dump()); });
}

ws_status ws_session_create(const ws_catalog* catalog, const char* config_json, ws_session** out) {
  if (!catalog || !out) return fail(WS_ERR_ARGUMENT, "null argument");
  *out = nullptr;
  return guarded([&] {
    const json req = parse_object(config_json, "session config");
    const std::string task_id = req.value("task", std::string());
    const auto* task = catalog->catalog.task(task_id);
    if (!task) return fail(WS_ERR_NOT_FOUND, "unknown task '" + task_id + "'");
    h::EpisodeOptions eo;
    eo.max_steps = req.value("max_steps", h::kDefaultMaxSteps);
    eo.agent_id = req.value("agent_id", std::string("external"));
    const auto config = h::session_config(req, {});
    auto s = std::make_unique<ws_session>();
    s->episode = std::make_unique<h::Episode>(catalog->catalog.site_for(*task), *task, config, eo);
    *out = s.release();
    return WS_OK;
  });
}

void ws_session_free(ws_session* session) { delete session; }

ws_status ws_session_observe(const ws_session* session, char** out_json) {
  if (!session || !out_json) return fail(WS_ERR_ARGUMENT, "null argument");
  return guarded([&] {
    json body = session->episode->observe().to_json();
    body["terminated"] = session->episode->finished();
    return put(out_json, body.dump());
  });
}

ws_status ws_session_act(ws_session* session, const char* message_json, char** out_json) {
  if (!session || !message_json) return fail(WS_ERR_ARGUMENT, "null argument");
  return guarded([&] {
    h::Episode& ep = *session->episode;
    if (ep.finished()) return fail(WS_ERR_STATE, "session has terminated");
    // Non-JSON input still consumes a step as a malformed action.
    json message = json::parse(message_json, nullptr, false);
    if (message.is_discarded()) message = std::string(message_json);
    const auto r = ep.act(message);
    json out{{"outcome", r.reported}, {"terminal", r.terminal}, {"step", ep.state().step}};
    if (r.terminal) out["status"] = std::string(h::to_string(ep.record().status));
    return put(out_json, out.dump());
  });
}

ws_status ws_session_result(const ws_session* session, char** out_json) {
  if (!session || !out_json) return fail(WS_ERR_ARGUMENT, "null argument");
  return guarded([&] { return put(out_json, session->episode->record().to_json().dump()); });
}

ws_status ws_run_suite(const ws_catalog* catalog, const char* suite_json, const char* out_path, char** out_jsonl) {
  if (!catalog) return fail(WS_ERR_ARGUMENT, "null argument");
  return guarded([&] {
    const json req = parse_object(suite_json, "suite config");
    h::SuiteConfig cfg;
    cfg.task_ids = req.value("tasks", std::vector<std::string>{});
    for (const auto& id : cfg.task_ids) {
      if (!catalog->catalog.task(id)) return fail(WS_ERR_NOT_FOUND, "unknown task '" + id + "'");
    }
    if (req.contains("modes")) {
      cfg.modes.clear();
      for (const auto& name : req.at("modes").get<std::vector<std::string>>()) {
        auto m = webstress::perturb::parse_mode(name);
        if (!m) return fail(WS_ERR_ARGUMENT, "unknown mode '" + name + "'");
        cfg.modes.push_back(*m);
      }
    }
    cfg.agents = req.value("agents", cfg.agents);
    for (const auto& a : cfg.agents) {
      if (!h::is_known_agent(a)) return fail(WS_ERR_ARGUMENT, "unknown agent '" + a + "'");
    }
    cfg.reps = req.value("reps", cfg.reps);
    cfg.seed = req.value("seed", cfg.seed);
    cfg.max_steps = req.value("max_steps", cfg.max_steps);
    cfg.parallel = req.value("parallel", cfg.parallel);
    cfg.agent_command = req.value("agent_command", cfg.agent_command);
    if (cfg.reps < 1 || cfg.max_steps < 1 || cfg.parallel < 1) {
      return fail(WS_ERR_ARGUMENT, "reps, max_steps and parallel must be positive");
    }
    json probs = req;
    probs["mode"] = "clean";
    cfg.intensity = h::session_config(probs, {});

    const auto records = h::run_suite(catalog->catalog, cfg);
    std::ostringstream text;
    h::write_records(text, records);
    if (out_path) {
      std::ofstream f(out_path, std::ios::binary | std::ios::trunc);
      if (!f) return fail(WS_ERR_IO, std::string("cannot write ") + out_path);
      f << text.str();
      if (!f) return fail(WS_ERR_IO, std::string("write failed: ") + out_path);
    }
    return put(out_jsonl, text.str());
  });
}

ws_status ws_report(const char* records_path, const char* analysis, const char* format, char** out_text) {
  if (!records_path || !analysis || !format || !out_text) return fail(WS_ERR_ARGUMENT, "null argument");
  return guarded([&] {
    auto a = webstress::metrics::parse_analysis(analysis);
    if (!a) return fail(WS_ERR_ARGUMENT, std::string("unknown analysis '") + analysis + "'");
    auto f = webstress::metrics::parse_format(format);
    if (!f) return fail(WS_ERR_ARGUMENT, std::string("unknown format '") + format + "'");
    std::ifstream in(records_path, std::ios::binary);
    if (!in) return fail(WS_ERR_NOT_FOUND, std::string("cannot read ") + records_path);
    std::vector<h::RunRecord> records;
    try {
      records = h::read_records(in);
    } catch (const std::exception& e) {
      return fail(WS_ERR_PARSE, e.what());
    }
    return put(out_text, webstress::metrics::emit_report(records, *a, *f));
  });
}

ws_status ws_server_start(const ws_catalog* catalog, const char* host, int port, int max_steps, ws_server** out,
                          int* out_port) {
  if (!catalog || !host || !out) return fail(WS_ERR_ARGUMENT, "null argument");
  *out = nullptr;
  return guarded([&] {
    h::ServiceOptions options;
    if (max_steps > 0) options.max_steps = max_steps;
    auto s = std::make_unique<ws_server>();
    s->service = std::make_unique<h::SessionService>(catalog->catalog, options);
    s->http = std::make_unique<h::HttpServer>(*s->service);
    const int bound = s->http->bind(host, port);
    if (bound < 0) return fail(WS_ERR_IO, "cannot bind " + std::string(host) + ":" + std::to_string(port));
    s->thread = std::thread([srv = s->http.get()] { srv->listen(); });
    s->http->wait_until_ready();
    if (out_port) *out_port = bound;
    *out = s.release();
    return WS_OK;
  });
}

void ws_server_wait(ws_server* server) {
  if (server && server->thread.joinable()) server->thread.join();
}

void ws_server_stop(ws_server* server) {
  if (server) server->http->stop();
}

void ws_server_free(ws_server* server) {
  if (!server) return;
  server->http->stop();
  if (server->thread.joinable()) server->thread.join();
  delete server;
}

ws_status ws_html_canonicalize(const char* html, char** out_html) {
  if (!html || !out_html) return fail(WS_ERR_ARGUMENT, "null argument");
  return guarded([&] { return put(out_html, webstress::dom::serialize(webstress::dom::parse_html(html))); });
}

ws_status ws_query(const char* html, const char* selector, char** out_json) {
  if (!html || !selector || !out_json) return fail(WS_ERR_ARGUMENT, "null argument");
  return guarded([&] {
    const auto tree = webstress::dom::parse_html(html);
    const auto sel = webstress::dom::parse_selector(selector);
    const webstress::dom::DomIndex index(tree);
    json out = json::array();
    for (int id : webstress::dom::query(tree, sel)) out.push_back(webstress::dom::serialize(*index.node(id)));
    return put(out_json, out.dump());
  });
}

ws_status ws_render(const ws_catalog* catalog, const char* config_json, char** out_html) {
  if (!catalog || !out_html) return fail(WS_ERR_ARGUMENT, "null argument");
  ws_session* s = nullptr;
  ws_status st = ws_session_create(catalog, config_json, &s);
  if (st != WS_OK) return st;
  std::unique_ptr<ws_session> owner(s);
  return guarded([&] { return put(out_html, s->episode->observe().dom); });
}

}  // extern "C"
