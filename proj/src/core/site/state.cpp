#include "site/state.hpp"

#include <algorithm>
#include <cstdio>

namespace webstress::site {

namespace {

void fnv_mix(std::uint64_t& h, std::string_view s) {
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  h ^= 0xff;
  h *= 0x100000001b3ULL;
}

}  // namespace

std::string value_to_string(const Value& v) {
  if (const auto* b = std::get_if<bool>(&v)) return *b ? "true" : "false";
  if (const auto* i = std::get_if<std::int64_t>(&v)) return std::to_string(*i);
  return std::get<std::string>(v);
}

const FieldDef* EntitySchema::field(std::string_view name) const {
  for (const auto& f : fields) {
    if (f.name == name) return &f;
  }
  return nullptr;
}

const Entity* EntityStore::find(std::string_view id) const {
  for (const auto& e : records_) {
    if (e.id == id) return &e;
  }
  return nullptr;
}

Entity* EntityStore::find(std::string_view id) {
  for (auto& e : records_) {
    if (e.id == id) return &e;
  }
  return nullptr;
}

std::vector<const Entity*> EntityStore::of_type(std::string_view type) const {
  std::vector<const Entity*> out;
  for (const auto& e : records_) {
    if (e.type == type) out.push_back(&e);
  }
  return out;
}

std::size_t EntityStore::count(std::string_view type) const {
  return static_cast<std::size_t>(
      std::count_if(records_.begin(), records_.end(), [&](const Entity& e) { return e.type == type; }));
}

void EntityStore::put(Entity entity) {
  if (Entity* existing = find(entity.id)) {
    *existing = std::move(entity);
    return;
  }
  auto& serial = serial_[entity.type];
  serial = std::max<std::int64_t>(serial, static_cast<std::int64_t>(count(entity.type)) + 1);
  records_.push_back(std::move(entity));
}

bool EntityStore::erase(std::string_view id) {
  auto it = std::find_if(records_.begin(), records_.end(), [&](const Entity& e) { return e.id == id; });
  if (it == records_.end()) return false;
  records_.erase(it);
  return true;
}

std::string EntityStore::allocate_id(const std::string& type) {
  auto& serial = serial_[type];
  for (;;) {
    ++serial;
    std::string id = type + "-" + std::to_string(serial);
    if (!find(id)) return id;
  }
}

std::string_view to_string(ModalVariant v) {
  switch (v) {
    case ModalVariant::confirm_ok: return "confirm_ok";
    case ModalVariant::decline_offer: return "decline_offer";
    case ModalVariant::close_icon: return "close_icon";
  }
  return "confirm_ok";
}

bool same_content(const EnvState& a, const EnvState& b) {
  return a.route == b.route && a.store.records() == b.store.records() && a.form_buffer == b.form_buffer;
}

bool same_interaction_state(const EnvState& a, const EnvState& b) {
  return same_content(a, b) && a.focused == b.focused && a.ui.selected == b.ui.selected &&
         a.ui.replace_on_type == b.ui.replace_on_type;
}

std::string content_digest(const EnvState& state) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  fnv_mix(h, state.route);
  for (const auto& e : state.store.records()) {
    fnv_mix(h, e.type);
    fnv_mix(h, e.id);
    for (const auto& [name, value] : e.fields) {
      fnv_mix(h, name);
      fnv_mix(h, std::to_string(value.index()));
      fnv_mix(h, value_to_string(value));
    }
  }
  for (const auto& [ref, text] : state.form_buffer) {
    fnv_mix(h, ref.str());
    fnv_mix(h, text);
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string_view to_string(ActionType t) {
  switch (t) {
    case ActionType::click: return "CLICK";
    case ActionType::type: return "TYPE";
    case ActionType::fill: return "FILL";
    case ActionType::hotkey: return "HOTKEY";
    case ActionType::wait: return "WAIT";
    case ActionType::done: return "DONE";
    case ActionType::fail: return "FAIL";
  }
  return "WAIT";
}

std::optional<ActionType> parse_action_type(std::string_view s) {
  for (auto t : {ActionType::click, ActionType::type, ActionType::fill, ActionType::hotkey, ActionType::wait,
                 ActionType::done, ActionType::fail}) {
    if (to_string(t) == s) return t;
  }
  return std::nullopt;
}

std::string_view to_string(RejectReason r) {
  switch (r) {
    case RejectReason::selector_no_match: return "selector_no_match";
    case RejectReason::ambiguous_match: return "ambiguous_match";
    case RejectReason::invalid_target: return "invalid_target";
    case RejectReason::malformed_action: return "malformed_action";
  }
  return "malformed_action";
}

std::string ActionOutcome::label() const {
  switch (kind) {
    case OutcomeKind::executed: return "executed";
    case OutcomeKind::no_effect: return "no_effect";
    case OutcomeKind::silently_dropped: return "silently_dropped";
    case OutcomeKind::rejected: return "rejected:" + std::string(to_string(*reason));
  }
  return "executed";
}

std::string ActionOutcome::reported() const {
  if (kind == OutcomeKind::rejected) return label();
  return "executed";
}

}  // namespace webstress::site
