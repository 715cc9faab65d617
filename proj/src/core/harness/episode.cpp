#include "harness/episode.hpp"

#include "harness/agents.hpp"

namespace webstress::harness {

using site::ActionOutcome;
using site::ActionType;
using site::RejectReason;

Episode::Episode(const site::SiteSpec& spec, const eval::TaskSpec& task, const perturb::PerturbConfig& config,
                 EpisodeOptions options)
    : spec_(spec),
      task_(task),
      config_(config),
      options_(std::move(options)),
      episode_key_(perturb::fnv1a(task.task_id)) {
  config_.validate();
  if (options_.max_steps <= 0) throw std::invalid_argument("max_steps must be positive");
  state_ = site::reset(spec_, task_.data_overlay);
  progress_ = eval::start_progress(task_);
  record_.task_id = task_.task_id;
  record_.site_id = spec_.site_id;
  record_.agent_id = options_.agent_id;
  record_.config = config_;
  record_.max_steps = options_.max_steps;
  if (options_.keep_trace) trace_.push_back(state_);
  prepare_view();
}

perturb::StreamKey Episode::key() const {
  return {config_.seed, episode_key_, static_cast<std::uint64_t>(state_.step)};
}

void Episode::prepare_view() {
  site::RenderOptions ro;
  ro.rule_banner = config_.mode == perturb::Mode::remap_explicit;
  page_ = site::render(spec_, state_, ro);
  view_ = perturb::perturb_dom(page_.tree, config_, key());
}

Observation Episode::observe() const {
  Observation o;
  o.instruction = task_.instruction;
  o.step = state_.step;
  o.remaining = options_.max_steps - state_.step;
  o.dom = view_.serialize();
  o.history = history_;
  return o;
}

site::TransitionResult Episode::step_once(const AgentMessage& m) {
  const bool remap = perturb::is_remap(config_.mode);
  site::KernelAction action;
  action.type = m.action_type;
  action.text = m.text.value_or("");
  action.keys = m.keys.value_or("");

  if (m.action_type == ActionType::click || m.action_type == ActionType::fill) {
    dom::Selector selector;
    try {
      selector = dom::parse_selector(*m.selector);
    } catch (const dom::SelectorError&) {
      return {state_, ActionOutcome::rejected(RejectReason::malformed_action)};
    }
    auto resolution = site::resolve(page_, view_.tree, view_.origin, selector);
    if (!resolution.resolved) return {state_, ActionOutcome::rejected(*resolution.rejection)};
    action.target = resolution.resolved;
  }

  site::EnvState before = state_;
  if (remap && m.action_type == ActionType::click && !state_.ui.modal) {
    switch (perturb::remap_gate(spec_, state_, *action.target)) {
      case perturb::GateDecision::select: {
        site::EnvState next = state_;
        next.ui.selected = site::Selection{action.target->target->element_key, action.target->target->entity_id};
        return {std::move(next), ActionOutcome::executed()};
      }
      case perturb::GateDecision::fire:
      case perturb::GateDecision::pass:
        // Any other resolved click drops a pending selection.
        before.ui.selected.reset();
        break;
    }
  }

  if (perturb::inject_failure(key(), config_, m.action_type)) return {state_, ActionOutcome::dropped()};

  auto result = site::transition(spec_, before, action);
  if (!(before == state_) && result.outcome.kind == site::OutcomeKind::no_effect) {
    result.outcome = ActionOutcome::executed();
  }
  if (remap && m.action_type != ActionType::click && result.outcome.kind == site::OutcomeKind::executed) {
    result.state.ui.selected.reset();
  }
  if (result.outcome.kind == site::OutcomeKind::executed && !result.state.terminated &&
      !site::same_interaction_state(state_, result.state)) {
    if (auto modal = perturb::maybe_spawn_popup(result.state, config_, key())) result.state.ui.modal = std::move(modal);
  }
  return result;
}

ActResult Episode::act(const nlohmann::json& message) {
  if (finished()) throw EpisodeFinished();

  auto parsed = parse_agent_message(message);
  site::TransitionResult result{state_, ActionOutcome::rejected(RejectReason::malformed_action)};
  if (parsed.message) result = step_once(*parsed.message);

  const int step = state_.step + 1;
  state_ = std::move(result.state);
  state_.step = step;

  StepEntry entry;
  entry.step = step;
  entry.action = message;
  entry.reported = result.outcome.reported();
  entry.outcome = result.outcome.label();
  entry.digest = site::content_digest(state_);
  entry.events = eval::evaluate_step(state_, task_, progress_, step);
  record_.steps.push_back(entry);
  history_.push_back({message, entry.reported});
  if (options_.keep_trace) trace_.push_back(state_);

  if (state_.terminated) {
    finish(state_.claim == site::Claim::done ? TerminalStatus::done_claimed : TerminalStatus::fail_claimed);
  } else if (step >= options_.max_steps) {
    finish(TerminalStatus::budget_exhausted);
  } else {
    prepare_view();
  }
  return {entry.reported, finished()};
}

void Episode::finish(TerminalStatus status) {
  record_.status = status;
  record_.steps_used = state_.step;
  record_.checkpoints = eval::evaluate_final(state_, task_, progress_, state_.step);
}

void Episode::abort(const std::string& error) {
  if (finished()) return;
  finish(TerminalStatus::error);
  record_.error = error;
}

RunRecord run_episode(const site::SiteSpec& spec, const eval::TaskSpec& task, const perturb::PerturbConfig& config,
                      Agent& agent, int max_steps) {
  EpisodeOptions options;
  options.max_steps = max_steps;
  options.agent_id = agent.id();
  Episode episode(spec, task, config, options);
  while (!episode.finished()) {
    nlohmann::json message;
    try {
      message = agent.next_action(episode.observe());
    } catch (const std::exception& e) {
      episode.abort(std::string("agent error: ") + e.what());
      break;
    }
    episode.act(message);
  }
  return episode.record();
}

}  // namespace webstress::harness
