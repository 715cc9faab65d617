#pragma once

#include <chrono>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include <json.hpp>

#include "harness/catalog.hpp"
#include "harness/episode.hpp"

namespace webstress::harness {

struct ServiceOptions {
  int max_steps = kDefaultMaxSteps;
  std::chrono::seconds idle_ttl{1800};  // idle sessions are dropped after this
  perturb::PerturbConfig intensity;     // defaults for probabilities not given on create
};

struct Reply {
  int status = 200;
  nlohmann::json body;
};

// Perturbation config from a create-session body: mode, seed and optional
// probability overrides. Throws std::invalid_argument.
perturb::PerturbConfig session_config(const nlohmann::json& request, const perturb::PerturbConfig& defaults);

// Session lifecycle behind the HTTP endpoints (docs/wire-protocol.md). The
// handlers are transport-independent so they can be exercised directly.
class SessionService {
 public:
  explicit SessionService(const Catalog& catalog, ServiceOptions options = {});

  Reply create(const std::string& body);
  Reply observe(const std::string& id);
  // `expected_step`, when given, must equal the session's current step.
  Reply act(const std::string& id, const std::string& body, std::optional<int> expected_step = std::nullopt);
  Reply result(const std::string& id);
  Reply remove(const std::string& id);

  std::size_t session_count() const;

 private:
  struct Session {
    std::mutex mutex;
    std::unique_ptr<Episode> episode;
    std::chrono::steady_clock::time_point last_used;
  };

  std::shared_ptr<Session> find(const std::string& id);
  void purge_idle();

  const Catalog& catalog_;
  ServiceOptions options_;
  mutable std::mutex registry_mutex_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
  std::uint64_t next_id_ = 1;
};

// HTTP binding. Blocks in listen() until stop() is called from another
// thread.
class HttpServer {
 public:
  explicit HttpServer(SessionService& service);
  ~HttpServer();

  // Returns the bound port, or -1. Port 0 picks a free port.
  int bind(const std::string& host, int port);
  bool listen();
  // Blocks until listen() is accepting connections.
  void wait_until_ready() const;
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace webstress::harness
