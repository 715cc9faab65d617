#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "eval/task.hpp"
#include "site/types.hpp"

namespace webstress::harness {

// Sites and tasks loaded together. Read-only once built; shared freely
// between threads.
class Catalog {
 public:
  // Every *.json under `sites_dir` is a site; every *.json under `tasks_dir`
  // is a task. Files load in name order. Throws std::runtime_error listing all
  // problems across files.
  static Catalog load(const std::filesystem::path& sites_dir, const std::filesystem::path& tasks_dir);

  void add_site(site::SiteSpec spec);
  // The task's site must already be present.
  void add_task(eval::TaskSpec task);

  const site::SiteSpec* site(const std::string& site_id) const;
  const eval::TaskSpec* task(const std::string& task_id) const;
  const site::SiteSpec& site_for(const eval::TaskSpec& task) const;

  const std::map<std::string, site::SiteSpec>& sites() const { return sites_; }
  // Sorted by task id.
  std::vector<std::string> task_ids() const;

 private:
  std::map<std::string, site::SiteSpec> sites_;
  std::map<std::string, eval::TaskSpec> tasks_;
};

}  // namespace webstress::harness
