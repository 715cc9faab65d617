#include "harness/record.hpp"

#include <istream>
#include <ostream>
#include <stdexcept>

namespace webstress::harness {

using nlohmann::json;

std::string_view to_string(TerminalStatus s) {
  switch (s) {
    case TerminalStatus::running: return "running";
    case TerminalStatus::done_claimed: return "done_claimed";
    case TerminalStatus::fail_claimed: return "fail_claimed";
    case TerminalStatus::budget_exhausted: return "budget_exhausted";
    case TerminalStatus::error: return "error";
  }
  return "running";
}

std::optional<TerminalStatus> parse_terminal_status(std::string_view s) {
  for (auto t : {TerminalStatus::running, TerminalStatus::done_claimed, TerminalStatus::fail_claimed,
                 TerminalStatus::budget_exhausted, TerminalStatus::error}) {
    if (to_string(t) == s) return t;
  }
  return std::nullopt;
}

std::size_t RunRecord::passed() const {
  std::size_t n = 0;
  for (const auto& c : checkpoints) n += c.passed ? 1 : 0;
  return n;
}

bool RunRecord::all_passed() const { return !checkpoints.empty() && passed() == checkpoints.size(); }

json config_to_json(const perturb::PerturbConfig& c) {
  return json{{"mode", std::string(perturb::to_string(c.mode))},
              {"seed", c.seed},
              {"failure_p", c.failure_p},
              {"popup_f", c.popup_f},
              {"chaos_magnitude", c.chaos_magnitude},
              {"noise_density", c.noise_density}};
}

perturb::PerturbConfig config_from_json(const json& j) {
  perturb::PerturbConfig c;
  auto mode = perturb::parse_mode(j.at("mode").get<std::string>());
  if (!mode) throw std::invalid_argument("unknown mode '" + j.at("mode").get<std::string>() + "'");
  c.mode = *mode;
  c.seed = j.at("seed").get<std::uint64_t>();
  c.failure_p = j.value("failure_p", c.failure_p);
  c.popup_f = j.value("popup_f", c.popup_f);
  c.chaos_magnitude = j.value("chaos_magnitude", c.chaos_magnitude);
  c.noise_density = j.value("noise_density", c.noise_density);
  return c;
}

json RunRecord::to_json() const {
  json steps_json = json::array();
  for (const auto& s : steps) {
    steps_json.push_back({{"step", s.step},
                          {"action", s.action},
                          {"reported", s.reported},
                          {"outcome", s.outcome},
                          {"digest", s.digest},
                          {"events", s.events}});
  }
  json cps = json::array();
  for (const auto& c : checkpoints) {
    cps.push_back({{"id", c.checkpoint_id},
                   {"stage", std::string(eval::to_string(c.stage))},
                   {"passed", c.passed},
                   {"first_pass_step", c.first_pass_step ? json(*c.first_pass_step) : json(nullptr)}});
  }
  json j{{"version", kRecordVersion},
         {"task_id", task_id},
         {"site_id", site_id},
         {"agent_id", agent_id},
         {"mode", std::string(perturb::to_string(config.mode))},
         {"seed", config.seed},
         {"config", config_to_json(config)},
         {"max_steps", max_steps},
         {"steps", steps_json},
         {"status", std::string(to_string(status))},
         {"steps_used", steps_used},
         {"checkpoints", cps}};
  if (!error.empty()) j["error"] = error;
  return j;
}

RunRecord RunRecord::from_json(const json& j) {
  RunRecord r;
  r.task_id = j.at("task_id").get<std::string>();
  r.site_id = j.at("site_id").get<std::string>();
  r.agent_id = j.at("agent_id").get<std::string>();
  r.config = config_from_json(j.at("config"));
  r.max_steps = j.at("max_steps").get<int>();
  for (const auto& s : j.at("steps")) {
    StepEntry e;
    e.step = s.at("step").get<int>();
    e.action = s.at("action");
    e.reported = s.at("reported").get<std::string>();
    e.outcome = s.at("outcome").get<std::string>();
    e.digest = s.at("digest").get<std::string>();
    e.events = s.at("events").get<std::vector<std::string>>();
    r.steps.push_back(std::move(e));
  }
  auto status = parse_terminal_status(j.at("status").get<std::string>());
  if (!status) throw std::invalid_argument("unknown terminal status");
  r.status = *status;
  r.steps_used = j.at("steps_used").get<int>();
  for (const auto& c : j.at("checkpoints")) {
    eval::CheckpointResult cr;
    cr.checkpoint_id = c.at("id").get<std::string>();
    cr.stage = c.at("stage").get<std::string>() == "final" ? eval::Stage::final_stage : eval::Stage::milestone;
    cr.passed = c.at("passed").get<bool>();
    if (!c.at("first_pass_step").is_null()) cr.first_pass_step = c.at("first_pass_step").get<int>();
    r.checkpoints.push_back(std::move(cr));
  }
  r.error = j.value("error", std::string());
  return r;
}

void write_records(std::ostream& out, const std::vector<RunRecord>& records) {
  for (const auto& r : records) out << r.to_json().dump() << '\n';
}

std::vector<RunRecord> read_records(std::istream& in) {
  std::vector<RunRecord> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(RunRecord::from_json(json::parse(line)));
    } catch (const std::exception& e) {
      throw std::runtime_error("record line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace webstress::harness
