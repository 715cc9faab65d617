#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "harness/catalog.hpp"
#include "harness/record.hpp"
#include "perturb/perturb.hpp"

namespace webstress::harness {

struct SuiteConfig {
  std::vector<std::string> task_ids;  // empty: every catalog task
  std::vector<perturb::Mode> modes{perturb::kAllModes.begin(), perturb::kAllModes.end()};
  std::vector<std::string> agents{"oracle"};
  int reps = 1;
  std::uint64_t seed = 0;
  int max_steps = 100;
  int parallel = 1;
  perturb::PerturbConfig intensity;  // probabilities; mode and seed are ignored
  std::string agent_command;         // for the external agent
};

struct EpisodePlan {
  std::size_t index = 0;
  std::string task_id;
  perturb::Mode mode = perturb::Mode::clean;
  std::string agent;
  int rep = 0;
  std::uint64_t seed = 0;
};

// Episode seed from the suite seed and the episode's (task, mode, rep)
// coordinates. Agents do not enter the derivation, so every agent in a suite
// faces the same perturbation draws.
std::uint64_t episode_seed(std::uint64_t suite_seed, const std::string& task_id, perturb::Mode mode, int rep);

// Tasks outermost, then modes, agents, reps.
std::vector<EpisodePlan> plan_suite(const std::vector<std::string>& task_ids, const std::vector<perturb::Mode>& modes,
                                    const std::vector<std::string>& agents, int reps, std::uint64_t suite_seed);

// Runs one planned episode; harness errors are captured in the record.
RunRecord run_planned(const Catalog& catalog, const SuiteConfig& config, const EpisodePlan& plan);

// Records in plan order, independent of `parallel`.
std::vector<RunRecord> run_suite(const Catalog& catalog, const SuiteConfig& config);

}  // namespace webstress::harness
