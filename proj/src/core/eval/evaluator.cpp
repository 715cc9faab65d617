#include "eval/evaluator.hpp"

namespace webstress::eval {

Progress start_progress(const TaskSpec& task) {
  Progress p;
  p.passed_at.assign(task.checkpoints.size(), std::nullopt);
  return p;
}

std::vector<std::string> evaluate_step(const site::EnvState& state, const TaskSpec& task, Progress& progress,
                                       int step) {
  std::vector<std::string> credited;
  if (progress.passed_at.size() != task.checkpoints.size()) progress.passed_at.resize(task.checkpoints.size());
  // Milestones precede finals, so the milestone index is the checkpoint index.
  while (progress.next_milestone < task.checkpoints.size()) {
    const Checkpoint& c = task.checkpoints[progress.next_milestone];
    if (c.stage != Stage::milestone || !holds(c.predicate, state)) break;
    progress.passed_at[progress.next_milestone] = step;
    credited.push_back(c.id);
    ++progress.next_milestone;
  }
  return credited;
}

std::vector<CheckpointResult> evaluate_final(const site::EnvState& terminal, const TaskSpec& task,
                                             const Progress& progress, int terminal_step) {
  std::vector<CheckpointResult> out;
  out.reserve(task.checkpoints.size());
  for (std::size_t i = 0; i < task.checkpoints.size(); ++i) {
    const Checkpoint& c = task.checkpoints[i];
    CheckpointResult r{c.id, c.stage, false, std::nullopt};
    if (c.stage == Stage::milestone) {
      if (i < progress.passed_at.size() && progress.passed_at[i]) {
        r.passed = true;
        r.first_pass_step = progress.passed_at[i];
      }
    } else if (holds(c.predicate, terminal)) {
      r.passed = true;
      r.first_pass_step = terminal_step;
    }
    out.push_back(std::move(r));
  }
  return out;
}

double task_score(const std::vector<CheckpointResult>& results) {
  if (results.empty()) return 0.0;
  std::size_t passed = 0;
  for (const auto& r : results) passed += r.passed ? 1 : 0;
  return static_cast<double>(passed) / static_cast<double>(results.size());
}

}  // namespace webstress::eval
