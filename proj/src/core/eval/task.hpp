#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

#include "site/state.hpp"
#include "site/types.hpp"

namespace webstress::eval {

// One equality test on an entity. The field name "id" addresses the entity id.
struct Condition {
  std::string field;
  site::Value value;

  bool operator==(const Condition&) const = default;
};

struct OnPage {
  std::string route;
};
struct EntityExists {
  std::string type;
  std::vector<Condition> where;
};
struct EntityFieldEquals {
  std::string type;
  std::vector<Condition> where;  // an "id" condition pins a single record
  std::string field;
  site::Value value;
};
struct EntityCount {
  std::string type;
  std::vector<Condition> where;
  std::int64_t expected = 0;
};
struct FlagSet {
  std::string type;
  std::vector<Condition> where;
  std::string field;
};

using Predicate = std::variant<OnPage, EntityExists, EntityFieldEquals, EntityCount, FlagSet>;

enum class Stage { milestone, final_stage };

std::string_view to_string(Stage s);

struct Checkpoint {
  std::string id;
  Stage stage = Stage::milestone;
  Predicate predicate;
  std::string description;
};

// An abstract step of the reference solution. `key` names the trigger's
// element key or an input as "form.field"; `selector` is how an agent
// addresses the same element; `expect` is a selector that matches once the
// action has taken effect.
struct GoldenAction {
  site::ActionType type = site::ActionType::click;
  std::string key;
  std::string entity;
  std::string selector;
  std::string text;
  std::string keys;
  std::string expect;
};

struct TaskSpec {
  std::string task_id;
  std::string site_id;
  std::string instruction;
  std::vector<site::Entity> data_overlay;
  std::vector<Checkpoint> checkpoints;
  std::vector<GoldenAction> golden;

  std::size_t final_count() const;
};

class TaskError : public std::runtime_error {
 public:
  explicit TaskError(std::vector<std::string> problems);
  const std::vector<std::string>& problems() const { return problems_; }

 private:
  std::vector<std::string> problems_;
};

// Reads the "site" member of a task document without validating the rest.
std::string task_site_id(const nlohmann::json& doc);

// Parses a task document (docs/task-format.md) and validates it against its
// site. Throws TaskError listing every problem.
TaskSpec load_task(const nlohmann::json& doc, const site::SiteSpec& spec);
TaskSpec load_task(std::string_view document, const site::SiteSpec& spec);

bool holds(const Predicate& predicate, const site::EnvState& state);

}  // namespace webstress::eval
