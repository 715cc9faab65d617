#pragma once

#include <optional>
#include <string>
#include <vector>

#include "eval/task.hpp"
#include "site/state.hpp"

namespace webstress::eval {

struct CheckpointResult {
  std::string checkpoint_id;
  Stage stage = Stage::milestone;
  bool passed = false;
  std::optional<int> first_pass_step;

  bool operator==(const CheckpointResult&) const = default;
};

// Per-episode matching state. Milestones are credited strictly in order.
struct Progress {
  std::size_t next_milestone = 0;           // index into the task's milestone list
  std::vector<std::optional<int>> passed_at;  // per checkpoint, milestones only
};

Progress start_progress(const TaskSpec& task);

// Call once per accepted agent action with the post-action state. Returns the
// ids of milestones credited at this step.
std::vector<std::string> evaluate_step(const site::EnvState& state, const TaskSpec& task, Progress& progress,
                                       int step);

// Results for every checkpoint, in task order. Finals are judged on the
// terminal state and carry `terminal_step` when they pass.
std::vector<CheckpointResult> evaluate_final(const site::EnvState& terminal, const TaskSpec& task,
                                             const Progress& progress, int terminal_step);

// Fraction of checkpoints passed.
double task_score(const std::vector<CheckpointResult>& results);

}  // namespace webstress::eval
