#include "harness/service.hpp"

#include <cstdio>

#include <httplib.h>

#include "harness/record.hpp"

namespace webstress::harness {

using nlohmann::json;

namespace {

Reply error(int status, const std::string& message) { return {status, json{{"error", message}}}; }

}  // namespace

perturb::PerturbConfig session_config(const json& req, const perturb::PerturbConfig& defaults) {
  perturb::PerturbConfig config = defaults;
  const std::string mode_name = req.value("mode", std::string("clean"));
  auto mode = perturb::parse_mode(mode_name);
  if (!mode) throw std::invalid_argument("unknown mode '" + mode_name + "'");
  config.mode = *mode;
  config.seed = req.value("seed", std::uint64_t{0});
  config.failure_p = req.value("failure_p", config.failure_p);
  config.popup_f = req.value("popup_f", config.popup_f);
  config.chaos_magnitude = req.value("chaos_magnitude", config.chaos_magnitude);
  config.noise_density = req.value("noise_density", config.noise_density);
  config.validate();
  return config;
}

SessionService::SessionService(const Catalog& catalog, ServiceOptions options)
    : catalog_(catalog), options_(std::move(options)) {}

std::size_t SessionService::session_count() const {
  std::lock_guard lock(registry_mutex_);
  return sessions_.size();
}

void SessionService::purge_idle() {
  const auto now = std::chrono::steady_clock::now();
  for (auto it = sessions_.begin(); it != sessions_.end();) {
    std::unique_lock session_lock(it->second->mutex, std::try_to_lock);
    if (session_lock.owns_lock() && now - it->second->last_used > options_.idle_ttl) {
      session_lock.unlock();
      it = sessions_.erase(it);
    } else {
      ++it;
    }
  }
}

std::shared_ptr<SessionService::Session> SessionService::find(const std::string& id) {
  std::lock_guard lock(registry_mutex_);
  auto it = sessions_.find(id);
  if (it == sessions_.end()) return nullptr;
  return it->second;
}

Reply SessionService::create(const std::string& body) {
  json req;
  try {
    req = json::parse(body);
  } catch (const json::parse_error& e) {
    return error(400, std::string("request body is not JSON: ") + e.what());
  }
  if (!req.is_object()) return error(400, "request body must be an object");

  try {
    const std::string task_id = req.value("task", std::string());
    const eval::TaskSpec* task = catalog_.task(task_id);
    if (!task) return error(404, "unknown task '" + task_id + "'");

    const perturb::PerturbConfig config = session_config(req, options_.intensity);

    EpisodeOptions eo;
    eo.max_steps = req.value("max_steps", options_.max_steps);
    eo.agent_id = req.value("agent_id", std::string("external"));

    auto session = std::make_shared<Session>();
    session->episode = std::make_unique<Episode>(catalog_.site_for(*task), *task, config, eo);
    session->last_used = std::chrono::steady_clock::now();

    std::string id;
    {
      std::lock_guard lock(registry_mutex_);
      purge_idle();
      char buf[32];
      std::snprintf(buf, sizeof buf, "s%06llu", static_cast<unsigned long long>(next_id_++));
      id = buf;
      sessions_.emplace(id, session);
    }
    return {201, json{{"session_id", id},
                      {"task_id", task_id},
                      {"config", config_to_json(config)},
                      {"max_steps", eo.max_steps}}};
  } catch (const json::exception& e) {
    return error(400, std::string("bad request: ") + e.what());
  } catch (const std::invalid_argument& e) {
    return error(400, e.what());
  }
}

Reply SessionService::observe(const std::string& id) {
  auto s = find(id);
  if (!s) return error(404, "unknown session '" + id + "'");
  std::unique_lock lock(s->mutex, std::try_to_lock);
  if (!lock.owns_lock()) return error(409, "session busy");
  s->last_used = std::chrono::steady_clock::now();
  json body = s->episode->observe().to_json();
  body["terminated"] = s->episode->finished();
  return {200, body};
}

Reply SessionService::act(const std::string& id, const std::string& body, std::optional<int> expected_step) {
  auto s = find(id);
  if (!s) return error(404, "unknown session '" + id + "'");
  std::unique_lock lock(s->mutex, std::try_to_lock);
  if (!lock.owns_lock()) return error(409, "session busy: one action at a time");
  s->last_used = std::chrono::steady_clock::now();
  Episode& ep = *s->episode;
  if (ep.finished()) return error(409, "session has terminated");
  if (expected_step && *expected_step != ep.state().step) {
    return error(409, "out-of-order action: session is at step " + std::to_string(ep.state().step));
  }
  json message;
  try {
    message = json::parse(body);
  } catch (const json::parse_error& e) {
    return error(400, std::string("request body is not JSON: ") + e.what());
  }
  const auto parsed = parse_agent_message(message);
  const ActResult r = ep.act(message);
  json out{{"outcome", r.reported}, {"terminal", r.terminal}, {"step", ep.state().step}};
  if (!parsed.message) out["error"] = parsed.error;
  if (r.terminal) out["status"] = std::string(to_string(ep.record().status));
  return {200, out};
}

Reply SessionService::result(const std::string& id) {
  auto s = find(id);
  if (!s) return error(404, "unknown session '" + id + "'");
  std::unique_lock lock(s->mutex, std::try_to_lock);
  if (!lock.owns_lock()) return error(409, "session busy");
  s->last_used = std::chrono::steady_clock::now();
  const RunRecord& rec = s->episode->record();
  json body = rec.to_json();
  return {200, json{{"terminated", s->episode->finished()},
                    {"status", body["status"]},
                    {"checkpoints", body["checkpoints"]},
                    {"record", body}}};
}

Reply SessionService::remove(const std::string& id) {
  std::shared_ptr<Session> s;
  {
    std::lock_guard lock(registry_mutex_);
    auto it = sessions_.find(id);
    if (it == sessions_.end()) return error(404, "unknown session '" + id + "'");
    s = it->second;
    sessions_.erase(it);
  }
  return {200, json{{"deleted", id}}};
}

// --- HTTP --------------------------------------------------------------------

struct HttpServer::Impl {
  SessionService& service;
  httplib::Server server;

  explicit Impl(SessionService& s) : service(s) {
    auto send = [](httplib::Response& res, const Reply& r) {
      res.status = r.status;
      res.set_content(r.body.dump(), "application/json");
    };
    server.Post("/sessions", [this, send](const httplib::Request& req, httplib::Response& res) {
      send(res, service.create(req.body));
    });
    server.Get(R"(/sessions/([^/]+)/observation)", [this, send](const httplib::Request& req, httplib::Response& res) {
      send(res, service.observe(req.matches[1]));
    });
    server.Post(R"(/sessions/([^/]+)/act)", [this, send](const httplib::Request& req, httplib::Response& res) {
      std::optional<int> step;
      if (req.has_param("step")) {
        try {
          step = std::stoi(req.get_param_value("step"));
        } catch (const std::exception&) {
          send(res, error(400, "step must be an integer"));
          return;
        }
      }
      send(res, service.act(req.matches[1], req.body, step));
    });
    server.Get(R"(/sessions/([^/]+)/result)", [this, send](const httplib::Request& req, httplib::Response& res) {
      send(res, service.result(req.matches[1]));
    });
    server.Delete(R"(/sessions/([^/]+))", [this, send](const httplib::Request& req, httplib::Response& res) {
      send(res, service.remove(req.matches[1]));
    });
  }
};

HttpServer::HttpServer(SessionService& service) : impl_(std::make_unique<Impl>(service)) {}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
  if (port == 0) return impl_->server.bind_to_any_port(host.c_str());
  return impl_->server.bind_to_port(host.c_str(), port) ? port : -1;
}

bool HttpServer::listen() { return impl_->server.listen_after_bind(); }

void HttpServer::wait_until_ready() const { impl_->server.wait_until_ready(); }

void HttpServer::stop() {
  if (impl_) impl_->server.stop();
}

}  // namespace webstress::harness
