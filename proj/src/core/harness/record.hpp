#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "eval/evaluator.hpp"
#include "perturb/perturb.hpp"

namespace webstress::harness {

enum class TerminalStatus { running, done_claimed, fail_claimed, budget_exhausted, error };

std::string_view to_string(TerminalStatus s);
std::optional<TerminalStatus> parse_terminal_status(std::string_view s);

struct StepEntry {
  int step = 0;  // 1-based
  nlohmann::json action;
  std::string reported;
  std::string outcome;  // internal label; may be "silently_dropped"
  std::string digest;   // canonical content after the step
  std::vector<std::string> events;

  bool operator==(const StepEntry&) const = default;
};

inline constexpr int kRecordVersion = 1;

struct RunRecord {
  std::string task_id;
  std::string site_id;
  std::string agent_id;
  perturb::PerturbConfig config;  // mode and episode seed live here
  int max_steps = 100;
  std::vector<StepEntry> steps;
  TerminalStatus status = TerminalStatus::running;
  int steps_used = 0;
  std::vector<eval::CheckpointResult> checkpoints;
  std::string error;

  perturb::Mode mode() const { return config.mode; }
  std::size_t passed() const;
  bool all_passed() const;

  nlohmann::json to_json() const;
  static RunRecord from_json(const nlohmann::json& j);
  bool operator==(const RunRecord&) const = default;
};

// One compact JSON document per line.
void write_records(std::ostream& out, const std::vector<RunRecord>& records);
std::vector<RunRecord> read_records(std::istream& in);

nlohmann::json config_to_json(const perturb::PerturbConfig& c);
perturb::PerturbConfig config_from_json(const nlohmann::json& j);

}  // namespace webstress::harness
