#include "harness/catalog.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "site/loader.hpp"

namespace webstress::harness {

namespace fs = std::filesystem;

namespace {

std::vector<fs::path> json_files(const fs::path& dir) {
  std::vector<fs::path> out;
  if (!fs::is_directory(dir)) throw std::runtime_error("not a directory: " + dir.string());
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") out.push_back(entry.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

Catalog Catalog::load(const fs::path& sites_dir, const fs::path& tasks_dir) {
  Catalog c;
  std::vector<std::string> problems;
  for (const auto& p : json_files(sites_dir)) {
    try {
      c.add_site(site::load_site_file(p));
    } catch (const std::exception& e) {
      problems.push_back(p.filename().string() + ": " + e.what());
    }
  }
  for (const auto& p : json_files(tasks_dir)) {
    try {
      const auto doc = nlohmann::json::parse(slurp(p));
      const std::string site_id = eval::task_site_id(doc);
      const auto* spec = c.site(site_id);
      if (!spec) throw std::runtime_error("unknown site '" + site_id + "'");
      c.add_task(eval::load_task(doc, *spec));
    } catch (const std::exception& e) {
      problems.push_back(p.filename().string() + ": " + e.what());
    }
  }
  if (!problems.empty()) {
    std::string msg = "catalog errors:";
    for (const auto& p : problems) msg += "\n  " + p;
    throw std::runtime_error(msg);
  }
  return c;
}

void Catalog::add_site(site::SiteSpec spec) {
  const std::string id = spec.site_id;
  if (!sites_.emplace(id, std::move(spec)).second) throw std::runtime_error("duplicate site id '" + id + "'");
}

void Catalog::add_task(eval::TaskSpec task) {
  if (!site(task.site_id)) throw std::runtime_error("unknown site '" + task.site_id + "'");
  const std::string id = task.task_id;
  if (!tasks_.emplace(id, std::move(task)).second) throw std::runtime_error("duplicate task id '" + id + "'");
}

const site::SiteSpec* Catalog::site(const std::string& site_id) const {
  auto it = sites_.find(site_id);
  return it == sites_.end() ? nullptr : &it->second;
}

const eval::TaskSpec* Catalog::task(const std::string& task_id) const {
  auto it = tasks_.find(task_id);
  return it == tasks_.end() ? nullptr : &it->second;
}

const site::SiteSpec& Catalog::site_for(const eval::TaskSpec& task) const {
  const auto* s = site(task.site_id);
  if (!s) throw std::runtime_error("unknown site '" + task.site_id + "'");
  return *s;
}

std::vector<std::string> Catalog::task_ids() const {
  std::vector<std::string> out;
  for (const auto& [id, _] : tasks_) out.push_back(id);
  return out;
}

}  // namespace webstress::harness
