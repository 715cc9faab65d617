#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "eval/evaluator.hpp"
#include "eval/task.hpp"
#include "harness/protocol.hpp"
#include "harness/record.hpp"
#include "perturb/perturb.hpp"
#include "site/kernel.hpp"

namespace webstress::harness {

inline constexpr int kDefaultMaxSteps = 100;

struct EpisodeOptions {
  int max_steps = kDefaultMaxSteps;
  std::string agent_id = "anonymous";
  bool keep_trace = false;  // retain the canonical state after every step
};

struct ActResult {
  std::string reported;
  bool terminal = false;
};

class EpisodeFinished : public std::logic_error {
 public:
  EpisodeFinished() : std::logic_error("episode has terminated") {}
};

// One run of one task under one perturbation config. Used both by the
// in-process loop and by the session service.
class Episode {
 public:
  Episode(const site::SiteSpec& spec, const eval::TaskSpec& task, const perturb::PerturbConfig& config,
          EpisodeOptions options = {});

  Observation observe() const;
  // Consumes one step. Throws EpisodeFinished after termination.
  ActResult act(const nlohmann::json& message);

  bool finished() const { return record_.status != TerminalStatus::running; }
  const RunRecord& record() const { return record_; }
  const site::EnvState& state() const { return state_; }
  const site::RenderedPage& page() const { return page_; }
  const perturb::PerturbedDom& view() const { return view_; }
  // Canonical state after each step; trace()[0] is the reset state.
  const std::vector<site::EnvState>& trace() const { return trace_; }

  // Marks the episode as failed by a harness-side error.
  void abort(const std::string& error);

 private:
  perturb::StreamKey key() const;
  void prepare_view();
  site::TransitionResult step_once(const AgentMessage& m);
  void finish(TerminalStatus status);

  const site::SiteSpec& spec_;
  const eval::TaskSpec& task_;
  perturb::PerturbConfig config_;
  EpisodeOptions options_;
  std::uint64_t episode_key_;

  site::EnvState state_;
  site::RenderedPage page_;
  perturb::PerturbedDom view_;
  eval::Progress progress_;
  std::vector<HistoryEntry> history_;
  std::vector<site::EnvState> trace_;
  RunRecord record_;
};

class Agent;

// Drives `agent` until the episode terminates. Agent exceptions end the
// episode with status "error"; they never propagate.
RunRecord run_episode(const site::SiteSpec& spec, const eval::TaskSpec& task, const perturb::PerturbConfig& config,
                      Agent& agent, int max_steps = kDefaultMaxSteps);

}  // namespace webstress::harness
