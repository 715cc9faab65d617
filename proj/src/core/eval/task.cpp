#include "eval/task.hpp"

#include <algorithm>

#include "dom/selector.hpp"
#include "site/loader.hpp"

namespace webstress::eval {

using nlohmann::json;
using site::ActionType;

namespace {

std::string join(const std::vector<std::string>& parts) {
  std::string out;
  for (const auto& p : parts) {
    if (!out.empty()) out += "; ";
    out += p;
  }
  return out;
}

class TaskBuilder {
 public:
  TaskBuilder(const json& doc, const site::SiteSpec& spec) : doc_(doc), spec_(spec) {}

  TaskSpec build() {
    if (!doc_.is_object()) throw TaskError({"task document must be an object"});
    task_.task_id = string_member(doc_, "id", "task");
    task_.site_id = string_member(doc_, "site", "task");
    task_.instruction = string_member(doc_, "instruction", "task");
    if (!task_.site_id.empty() && task_.site_id != spec_.site_id) {
      problem("task targets site '" + task_.site_id + "' but was loaded against '" + spec_.site_id + "'");
    }
    if (auto it = doc_.find("overlay"); it != doc_.end()) read_overlay(*it);
    if (auto it = doc_.find("checkpoints"); it != doc_.end() && it->is_array()) {
      for (const auto& c : *it) read_checkpoint(c);
    } else {
      problem("task: 'checkpoints' must be an array");
    }
    if (auto it = doc_.find("golden"); it != doc_.end() && it->is_array()) {
      for (std::size_t i = 0; i < it->size(); ++i) read_golden((*it)[i], i);
    } else {
      problem("task: 'golden' must be an array");
    }
    check_order();
    if (!problems_.empty()) throw TaskError(problems_);
    return std::move(task_);
  }

 private:
  void problem(std::string p) { problems_.push_back(task_.task_id.empty() ? p : task_.task_id + ": " + p); }

  std::string string_member(const json& j, const char* key, const std::string& where) {
    auto it = j.find(key);
    if (it == j.end() || !it->is_string()) {
      problem(where + ": missing string '" + key + "'");
      return {};
    }
    return it->get<std::string>();
  }

  void read_overlay(const json& arr) {
    if (!arr.is_array()) {
      problem("'overlay' must be an array");
      return;
    }
    for (const auto& e : arr) {
      try {
        site::Entity entity = site::entity_from_json(e, spec_);
        for (auto& p : site::check_entity(spec_, entity)) problem("overlay: " + p);
        task_.data_overlay.push_back(std::move(entity));
      } catch (const std::exception& ex) {
        problem(std::string("overlay: ") + ex.what());
      }
    }
  }

  const site::EntitySchema* schema(const std::string& type, const std::string& where) {
    const auto* s = spec_.schema(type);
    if (!s) problem(where + ": unknown entity type '" + type + "'");
    return s;
  }

  std::optional<site::Value> value_for(const site::EntitySchema& s, const std::string& field, const json& v,
                                       const std::string& where) {
    if (field == "id") {
      if (!v.is_string()) {
        problem(where + ": id must be a string");
        return std::nullopt;
      }
      return site::Value{v.get<std::string>()};
    }
    const auto* f = s.field(field);
    if (!f) {
      problem(where + ": type '" + s.type + "' has no field '" + field + "'");
      return std::nullopt;
    }
    try {
      return site::value_from_json(v, *f);
    } catch (const std::exception& ex) {
      problem(where + ": " + ex.what());
      return std::nullopt;
    }
  }

  std::vector<Condition> conditions(const site::EntitySchema& s, const json& body, const std::string& where) {
    std::vector<Condition> out;
    auto it = body.find("where");
    if (it == body.end()) return out;
    if (!it->is_object()) {
      problem(where + ": 'where' must be an object");
      return out;
    }
    for (const auto& [field, v] : it->items()) {
      if (auto value = value_for(s, field, v, where)) out.push_back({field, *value});
    }
    return out;
  }

  void read_checkpoint(const json& c) {
    Checkpoint cp;
    const std::string where = "checkpoint";
    if (!c.is_object()) {
      problem("checkpoint must be an object");
      return;
    }
    cp.id = string_member(c, "id", where);
    const std::string ctx = "checkpoint '" + cp.id + "'";
    const std::string stage = c.value("stage", std::string());
    if (stage == "milestone") {
      cp.stage = Stage::milestone;
    } else if (stage == "final") {
      cp.stage = Stage::final_stage;
    } else {
      problem(ctx + ": stage must be 'milestone' or 'final'");
    }
    cp.description = c.value("description", std::string());

    int kinds = 0;
    if (auto it = c.find("on_page"); it != c.end()) {
      ++kinds;
      if (!it->is_string() || !spec_.page(it->get<std::string>())) {
        problem(ctx + ": on_page names an unknown route");
      } else {
        cp.predicate = OnPage{it->get<std::string>()};
      }
    }
    if (auto it = c.find("entity_exists"); it != c.end()) {
      ++kinds;
      const std::string type = it->value("type", std::string());
      if (const auto* s = schema(type, ctx)) cp.predicate = EntityExists{type, conditions(*s, *it, ctx)};
    }
    if (auto it = c.find("entity_count"); it != c.end()) {
      ++kinds;
      const std::string type = it->value("type", std::string());
      auto n = it->find("count");
      if (n == it->end() || !n->is_number_integer() || n->get<std::int64_t>() < 0) {
        problem(ctx + ": entity_count needs a non-negative integer 'count'");
      } else if (const auto* s = schema(type, ctx)) {
        cp.predicate = EntityCount{type, conditions(*s, *it, ctx), n->get<std::int64_t>()};
      }
    }
    if (auto it = c.find("entity_field_equals"); it != c.end()) {
      ++kinds;
      const std::string type = it->value("type", std::string());
      const std::string field = it->value("field", std::string());
      if (const auto* s = schema(type, ctx)) {
        auto v = it->find("value");
        if (v == it->end()) {
          problem(ctx + ": entity_field_equals needs 'value'");
        } else if (auto value = value_for(*s, field, *v, ctx)) {
          cp.predicate = EntityFieldEquals{type, conditions(*s, *it, ctx), field, *value};
        }
      }
    }
    if (auto it = c.find("flag_set"); it != c.end()) {
      ++kinds;
      const std::string type = it->value("type", std::string());
      const std::string field = it->value("field", std::string());
      if (const auto* s = schema(type, ctx)) {
        const auto* f = s->field(field);
        if (!f || f->kind != site::FieldKind::boolean) {
          problem(ctx + ": flag_set field '" + field + "' is not a boolean field of '" + type + "'");
        } else {
          cp.predicate = FlagSet{type, conditions(*s, *it, ctx), field};
        }
      }
    }
    if (kinds != 1) problem(ctx + ": exactly one predicate is required");
    task_.checkpoints.push_back(std::move(cp));
  }

  bool is_input_key(const std::string& key) const {
    const auto dot = key.find('.');
    if (dot == std::string::npos) return false;
    const auto* form = spec_.form(key.substr(0, dot));
    if (!form) return false;
    const std::string field = key.substr(dot + 1);
    return std::find(form->fields.begin(), form->fields.end(), field) != form->fields.end();
  }

  void check_selector(const std::string& text, const std::string& ctx, const char* what) {
    try {
      dom::parse_selector(text);
    } catch (const dom::SelectorError& e) {
      problem(ctx + ": bad " + what + " selector '" + text + "': " + e.what());
    }
  }

  void read_golden(const json& g, std::size_t index) {
    const std::string ctx = "golden[" + std::to_string(index) + "]";
    if (!g.is_object()) {
      problem(ctx + " must be an object");
      return;
    }
    GoldenAction a;
    auto type = site::parse_action_type(g.value("action", std::string()));
    if (!type) {
      problem(ctx + ": unknown action");
      return;
    }
    a.type = *type;
    a.key = g.value("key", std::string());
    a.entity = g.value("entity", std::string());
    a.selector = g.value("selector", std::string());
    a.text = g.value("text", std::string());
    a.keys = g.value("keys", std::string());
    a.expect = g.value("expect", std::string());

    switch (a.type) {
      case ActionType::click:
        if (!spec_.behavior(a.key) && !is_input_key(a.key)) problem(ctx + ": CLICK key '" + a.key + "' is not a trigger or input");
        break;
      case ActionType::fill:
        if (!is_input_key(a.key)) problem(ctx + ": FILL key '" + a.key + "' is not an input");
        break;
      case ActionType::type:
        if (a.text.empty()) problem(ctx + ": TYPE needs text");
        break;
      case ActionType::hotkey:
        if (a.keys.empty()) problem(ctx + ": HOTKEY needs keys");
        break;
      case ActionType::wait: break;
      case ActionType::done:
      case ActionType::fail: problem(ctx + ": terminal actions are implied, not listed"); break;
    }
    if (a.type == ActionType::click || a.type == ActionType::fill) {
      if (a.selector.empty()) {
        problem(ctx + ": selector is required");
      } else {
        check_selector(a.selector, ctx, "target");
      }
    }
    if (a.type == ActionType::click || a.type == ActionType::fill || a.type == ActionType::type) {
      if (a.expect.empty()) problem(ctx + ": expect is required");
    }
    if (!a.expect.empty()) check_selector(a.expect, ctx, "expect");
    task_.golden.push_back(std::move(a));
  }

  void check_order() {
    bool seen_final = false;
    for (const auto& c : task_.checkpoints) {
      if (c.stage == Stage::final_stage) {
        seen_final = true;
      } else if (seen_final) {
        problem("milestone '" + c.id + "' follows a final checkpoint");
      }
    }
    if (!seen_final) problem("at least one final checkpoint is required");
    std::vector<std::string> ids;
    for (const auto& c : task_.checkpoints) ids.push_back(c.id);
    std::sort(ids.begin(), ids.end());
    if (std::adjacent_find(ids.begin(), ids.end()) != ids.end()) problem("checkpoint ids must be unique");
    if (task_.golden.empty()) problem("golden trajectory is empty");
  }

  const json& doc_;
  const site::SiteSpec& spec_;
  TaskSpec task_;
  std::vector<std::string> problems_;
};

bool matches(const site::Entity& e, const std::vector<Condition>& where) {
  for (const auto& c : where) {
    if (c.field == "id") {
      if (site::Value{e.id} != c.value) return false;
      continue;
    }
    auto it = e.fields.find(c.field);
    if (it == e.fields.end() || it->second != c.value) return false;
  }
  return true;
}

std::vector<const site::Entity*> select(const site::EnvState& state, const std::string& type,
                                        const std::vector<Condition>& where) {
  std::vector<const site::Entity*> out;
  for (const auto* e : state.store.of_type(type)) {
    if (matches(*e, where)) out.push_back(e);
  }
  return out;
}

}  // namespace

std::string_view to_string(Stage s) { return s == Stage::milestone ? "milestone" : "final"; }

std::size_t TaskSpec::final_count() const {
  return static_cast<std::size_t>(std::count_if(checkpoints.begin(), checkpoints.end(),
                                                [](const Checkpoint& c) { return c.stage == Stage::final_stage; }));
}

TaskError::TaskError(std::vector<std::string> problems)
    : std::runtime_error("invalid task: " + join(problems)), problems_(std::move(problems)) {}

std::string task_site_id(const json& doc) {
  if (!doc.is_object()) return {};
  return doc.value("site", std::string());
}

TaskSpec load_task(const json& doc, const site::SiteSpec& spec) { return TaskBuilder(doc, spec).build(); }

TaskSpec load_task(std::string_view document, const site::SiteSpec& spec) {
  json doc;
  try {
    doc = json::parse(document);
  } catch (const json::parse_error& e) {
    throw TaskError({std::string("parse error: ") + e.what()});
  }
  return load_task(doc, spec);
}

bool holds(const Predicate& predicate, const site::EnvState& state) {
  return std::visit(
      [&](const auto& p) -> bool {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, OnPage>) {
          return state.route == p.route;
        } else if constexpr (std::is_same_v<T, EntityExists>) {
          return !select(state, p.type, p.where).empty();
        } else if constexpr (std::is_same_v<T, EntityCount>) {
          return static_cast<std::int64_t>(select(state, p.type, p.where).size()) == p.expected;
        } else if constexpr (std::is_same_v<T, EntityFieldEquals>) {
          for (const auto* e : select(state, p.type, p.where)) {
            auto it = e->fields.find(p.field);
            if (it != e->fields.end() && it->second == p.value) return true;
          }
          return false;
        } else {
          for (const auto* e : select(state, p.type, p.where)) {
            auto it = e->fields.find(p.field);
            if (it != e->fields.end() && it->second == site::Value{true}) return true;
          }
          return false;
        }
      },
      predicate);
}

}  // namespace webstress::eval
