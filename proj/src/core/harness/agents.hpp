#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "eval/task.hpp"
#include "harness/protocol.hpp"
#include "perturb/perturb.hpp"

namespace webstress::harness {

class Agent {
 public:
  virtual ~Agent() = default;
  virtual std::string id() const = 0;
  // Total: every observation gets an answer, well-formed or not.
  virtual nlohmann::json next_action(const Observation& observation) = 0;
};

// Mode-aware reference policy built from the task's golden trajectory. It
// dismisses any modal first, re-issues the previous action while its expected
// post-condition is missing from the DOM (covering silent drops and the
// select-then-fire double click), and claims DONE once the last golden
// action has visibly taken effect.
class OracleAgent : public Agent {
 public:
  explicit OracleAgent(const eval::TaskSpec& task);
  std::string id() const override { return "oracle"; }
  nlohmann::json next_action(const Observation& observation) override;

  // The message for golden action `a`.
  static AgentMessage message_for(const eval::GoldenAction& a);

 private:
  const eval::TaskSpec& task_;
  std::size_t next_ = 0;
  std::optional<std::size_t> pending_;
};

// Uniformly picks actions over elements visible in the DOM.
class RandomAgent : public Agent {
 public:
  explicit RandomAgent(std::uint64_t seed);
  std::string id() const override { return "random"; }
  nlohmann::json next_action(const Observation& observation) override;

 private:
  std::uint64_t seed_;
};

class AlwaysDoneAgent : public Agent {
 public:
  std::string id() const override { return "always-done"; }
  nlohmann::json next_action(const Observation&) override;
};

class WaitAgent : public Agent {
 public:
  std::string id() const override { return "wait"; }
  nlohmann::json next_action(const Observation&) override;
};

// Talks to a subprocess over JSON lines: one observation per line on its
// stdin, one agent message per line on its stdout.
class ProcessAgent : public Agent {
 public:
  explicit ProcessAgent(std::string command, std::string id = "external");
  ~ProcessAgent() override;
  ProcessAgent(const ProcessAgent&) = delete;
  ProcessAgent& operator=(const ProcessAgent&) = delete;

  std::string id() const override { return id_; }
  nlohmann::json next_action(const Observation& observation) override;

 private:
  void start();
  void stop();

  std::string command_;
  std::string id_;
  int pid_ = -1;
  int to_child_ = -1;
  int from_child_ = -1;
  std::string buffer_;
};

struct AgentContext {
  const eval::TaskSpec* task = nullptr;
  std::uint64_t seed = 0;
  std::string command;  // external agents
};

// Names: oracle, random, always-done, wait, external.
std::unique_ptr<Agent> make_agent(const std::string& name, const AgentContext& context);
bool is_known_agent(const std::string& name);

}  // namespace webstress::harness
