#include "harness/suite.hpp"

#include <atomic>
#include <stdexcept>
#include <thread>

#include "harness/agents.hpp"
#include "harness/episode.hpp"
#include "perturb/rng.hpp"

namespace webstress::harness {

std::uint64_t episode_seed(std::uint64_t suite_seed, const std::string& task_id, perturb::Mode mode, int rep) {
  std::uint64_t h = perturb::mix64(suite_seed ^ 0x5851f42d4c957f2dULL);
  h = perturb::mix64(h ^ perturb::fnv1a(task_id));
  h = perturb::mix64(h ^ perturb::fnv1a(perturb::to_string(mode)));
  return perturb::mix64(h ^ static_cast<std::uint64_t>(rep));
}

std::vector<EpisodePlan> plan_suite(const std::vector<std::string>& task_ids, const std::vector<perturb::Mode>& modes,
                                    const std::vector<std::string>& agents, int reps, std::uint64_t suite_seed) {
  if (reps < 1) throw std::invalid_argument("reps must be at least 1");
  std::vector<EpisodePlan> plan;
  plan.reserve(task_ids.size() * modes.size() * agents.size() * static_cast<std::size_t>(reps));
  for (const auto& task : task_ids) {
    for (perturb::Mode mode : modes) {
      for (const auto& agent : agents) {
        for (int rep = 0; rep < reps; ++rep) {
          plan.push_back({plan.size(), task, mode, agent, rep, episode_seed(suite_seed, task, mode, rep)});
        }
      }
    }
  }
  return plan;
}

RunRecord run_planned(const Catalog& catalog, const SuiteConfig& config, const EpisodePlan& plan) {
  perturb::PerturbConfig pc = config.intensity;
  pc.mode = plan.mode;
  pc.seed = plan.seed;
  try {
    const eval::TaskSpec* task = catalog.task(plan.task_id);
    if (!task) throw std::runtime_error("unknown task '" + plan.task_id + "'");
    AgentContext ctx{task, plan.seed, config.agent_command};
    auto agent = make_agent(plan.agent, ctx);
    return run_episode(catalog.site_for(*task), *task, pc, *agent, config.max_steps);
  } catch (const std::exception& e) {
    RunRecord r;
    r.task_id = plan.task_id;
    if (const auto* t = catalog.task(plan.task_id)) r.site_id = t->site_id;
    r.agent_id = plan.agent;
    r.config = pc;
    r.max_steps = config.max_steps;
    r.status = TerminalStatus::error;
    r.error = e.what();
    return r;
  }
}

std::vector<RunRecord> run_suite(const Catalog& catalog, const SuiteConfig& config) {
  config.intensity.validate();
  const auto ids = config.task_ids.empty() ? catalog.task_ids() : config.task_ids;
  const auto plan = plan_suite(ids, config.modes, config.agents, config.reps, config.seed);
  std::vector<RunRecord> records(plan.size());

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < plan.size(); i = next++) records[i] = run_planned(catalog, config, plan[i]);
  };
  const int threads = std::max(1, std::min<int>(config.parallel, static_cast<int>(plan.size())));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  return records;
}

}  // namespace webstress::harness
