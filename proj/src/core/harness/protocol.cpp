#include "harness/protocol.hpp"

#include <array>

namespace webstress::harness {

using nlohmann::json;
using site::ActionType;

namespace {

constexpr std::array kCoordinateKeys = {"x", "y", "coordinate", "coordinates", "position"};

std::optional<std::string> string_param(const json& params, const char* key, std::string& error) {
  auto it = params.find(key);
  if (it == params.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) {
    error = std::string("parameter '") + key + "' must be a string";
    return std::nullopt;
  }
  return it->get<std::string>();
}

}  // namespace

json AgentMessage::to_json() const {
  json params = json::object();
  if (selector) params["selector"] = *selector;
  if (text) params["text"] = *text;
  if (keys) params["keys"] = *keys;
  return json{{"action_type", std::string(site::to_string(action_type))}, {"parameters", params}, {"reasoning", reasoning}};
}

MessageParse parse_agent_message(const json& j) {
  if (!j.is_object()) return {std::nullopt, "message must be a JSON object"};
  auto type_it = j.find("action_type");
  if (type_it == j.end() || !type_it->is_string()) return {std::nullopt, "missing action_type"};
  auto type = site::parse_action_type(type_it->get<std::string>());
  if (!type) return {std::nullopt, "unknown action_type '" + type_it->get<std::string>() + "'"};

  AgentMessage m;
  m.action_type = *type;
  if (auto r = j.find("reasoning"); r != j.end() && r->is_string()) m.reasoning = r->get<std::string>();

  json params = json::object();
  if (auto p = j.find("parameters"); p != j.end() && !p->is_null()) {
    if (!p->is_object()) return {std::nullopt, "parameters must be an object"};
    params = *p;
  }
  std::string error;
  m.selector = string_param(params, "selector", error);
  m.text = string_param(params, "text", error);
  m.keys = string_param(params, "keys", error);
  if (!error.empty()) return {std::nullopt, error};

  bool coordinates = false;
  for (const char* k : kCoordinateKeys) coordinates = coordinates || params.contains(k);

  switch (m.action_type) {
    case ActionType::click:
      if (!m.selector || m.selector->empty()) {
        return {std::nullopt, coordinates ? "coordinate clicks are not supported; use a selector" : "CLICK needs a selector"};
      }
      break;
    case ActionType::fill:
      if (!m.selector || m.selector->empty()) return {std::nullopt, "FILL needs a selector"};
      if (!m.text) return {std::nullopt, "FILL needs text"};
      break;
    case ActionType::type:
      if (!m.text) return {std::nullopt, "TYPE needs text"};
      break;
    case ActionType::hotkey:
      if (!m.keys || m.keys->empty()) return {std::nullopt, "HOTKEY needs keys"};
      break;
    case ActionType::wait:
    case ActionType::done:
    case ActionType::fail: break;
  }
  return {m, {}};
}

AgentMessage click(std::string selector) {
  AgentMessage m;
  m.action_type = ActionType::click;
  m.selector = std::move(selector);
  return m;
}

AgentMessage fill(std::string selector, std::string text) {
  AgentMessage m;
  m.action_type = ActionType::fill;
  m.selector = std::move(selector);
  m.text = std::move(text);
  return m;
}

AgentMessage type_text(std::string text) {
  AgentMessage m;
  m.action_type = ActionType::type;
  m.text = std::move(text);
  return m;
}

AgentMessage hotkey(std::string keys) {
  AgentMessage m;
  m.action_type = ActionType::hotkey;
  m.keys = std::move(keys);
  return m;
}

AgentMessage simple(ActionType t) {
  AgentMessage m;
  m.action_type = t;
  return m;
}

json action_identity(const json& action) {
  if (!action.is_object()) return action;
  json id = json::object();
  if (auto t = action.find("action_type"); t != action.end()) id["action_type"] = *t;
  if (auto p = action.find("parameters"); p != action.end()) id["parameters"] = *p;
  return id;
}

json Observation::to_json() const {
  json h = json::array();
  for (const auto& e : history) h.push_back({{"action", e.action}, {"outcome", e.reported}});
  return json{{"version", kObservationVersion}, {"instruction", instruction}, {"step", step},
              {"remaining", remaining}, {"dom", dom}, {"history", h}};
}

Observation Observation::from_json(const json& j) {
  Observation o;
  o.instruction = j.at("instruction").get<std::string>();
  o.step = j.at("step").get<int>();
  o.remaining = j.at("remaining").get<int>();
  o.dom = j.at("dom").get<std::string>();
  for (const auto& e : j.at("history")) o.history.push_back({e.at("action"), e.at("outcome").get<std::string>()});
  return o;
}

}  // namespace webstress::harness
