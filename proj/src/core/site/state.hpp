#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "site/types.hpp"

namespace webstress::site {

class EntityStore {
 public:
  const std::vector<Entity>& records() const { return records_; }

  const Entity* find(std::string_view id) const;
  Entity* find(std::string_view id);
  std::vector<const Entity*> of_type(std::string_view type) const;
  std::size_t count(std::string_view type) const;

  // Inserts or replaces by id.
  void put(Entity entity);
  bool erase(std::string_view id);
  // Next unused id of the form "<type>-<n>".
  std::string allocate_id(const std::string& type);

  bool operator==(const EntityStore&) const = default;

 private:
  std::vector<Entity> records_;
  std::map<std::string, std::int64_t> serial_;
};

enum class ModalVariant { confirm_ok, decline_offer, close_icon };

std::string_view to_string(ModalVariant v);

struct ModalDescriptor {
  ModalVariant variant = ModalVariant::confirm_ok;
  std::string prompt;
  std::string dismiss_key;

  bool operator==(const ModalDescriptor&) const = default;
};

struct Selection {
  std::string element_key;
  std::string entity_id;

  bool operator==(const Selection&) const = default;
};

struct UiState {
  std::optional<Selection> selected;
  std::optional<ModalDescriptor> modal;
  bool replace_on_type = false;  // set by Ctrl+A

  bool operator==(const UiState&) const = default;
};

enum class Claim { none, done, fail };

struct EnvState {
  std::string route = "/";
  EntityStore store;
  std::map<FieldRef, std::string> form_buffer;
  std::optional<FieldRef> focused;
  UiState ui;
  int step = 0;
  bool terminated = false;
  Claim claim = Claim::none;

  bool operator==(const EnvState&) const = default;
};

// Route, store and form contents: the part of the state checkpoints can see.
bool same_content(const EnvState& a, const EnvState& b);
// Content plus focus and selection; modal and step are excluded.
bool same_interaction_state(const EnvState& a, const EnvState& b);

// Hex FNV-1a digest of route, store and form buffer.
std::string content_digest(const EnvState& state);

enum class ActionType { click, type, fill, hotkey, wait, done, fail };

std::string_view to_string(ActionType t);
std::optional<ActionType> parse_action_type(std::string_view s);

enum class OutcomeKind { executed, no_effect, rejected, silently_dropped };
enum class RejectReason { selector_no_match, ambiguous_match, invalid_target, malformed_action };

std::string_view to_string(RejectReason r);

struct ActionOutcome {
  OutcomeKind kind = OutcomeKind::executed;
  std::optional<RejectReason> reason;

  static ActionOutcome executed() { return {OutcomeKind::executed, std::nullopt}; }
  static ActionOutcome no_effect() { return {OutcomeKind::no_effect, std::nullopt}; }
  static ActionOutcome dropped() { return {OutcomeKind::silently_dropped, std::nullopt}; }
  static ActionOutcome rejected(RejectReason r) { return {OutcomeKind::rejected, r}; }

  // Internal label, e.g. "rejected:selector_no_match".
  std::string label() const;
  // What the agent is told: silent drops and no-ops read as "executed".
  std::string reported() const;

  bool operator==(const ActionOutcome&) const = default;
};

// What a rendered node means to the kernel.
struct Target {
  enum class Kind { trigger, input, modal_dismiss, modal_inert };
  Kind kind = Kind::trigger;
  std::string element_key;
  std::string entity_id;  // bound list entity, if any
  FieldRef field;         // inputs

  bool operator==(const Target&) const = default;
};

EnvState reset(const SiteSpec& spec, std::span<const Entity> overlay);

}  // namespace webstress::site
