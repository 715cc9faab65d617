#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "site/state.hpp"

namespace webstress::harness {

// {"action_type": ..., "parameters": {...}, "reasoning": ...}
struct AgentMessage {
  site::ActionType action_type = site::ActionType::wait;
  std::optional<std::string> selector;
  std::optional<std::string> text;
  std::optional<std::string> keys;
  std::string reasoning;

  nlohmann::json to_json() const;
  bool operator==(const AgentMessage&) const = default;
};

struct MessageParse {
  std::optional<AgentMessage> message;
  std::string error;  // set when message is empty
};

// Validates parameter presence against the action type. Coordinate-only
// clicks are malformed: there is no layout to resolve them against.
MessageParse parse_agent_message(const nlohmann::json& j);

// Convenience constructors.
AgentMessage click(std::string selector);
AgentMessage fill(std::string selector, std::string text);
AgentMessage type_text(std::string text);
AgentMessage hotkey(std::string keys);
AgentMessage simple(site::ActionType t);

// Action identity used by the repetition analysis: type plus parameters.
nlohmann::json action_identity(const nlohmann::json& action);

struct HistoryEntry {
  nlohmann::json action;
  std::string reported;  // "executed" or "rejected:<reason>"

  bool operator==(const HistoryEntry&) const = default;
};

inline constexpr int kObservationVersion = 1;

struct Observation {
  std::string instruction;
  int step = 0;
  int remaining = 0;
  std::string dom;
  std::vector<HistoryEntry> history;

  nlohmann::json to_json() const;
  static Observation from_json(const nlohmann::json& j);
  bool operator==(const Observation&) const = default;
};

}  // namespace webstress::harness
