#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "dom/dom.hpp"
#include "perturb/rng.hpp"
#include "site/kernel.hpp"
#include "site/state.hpp"

namespace webstress::perturb {

// Table order: clean, two perception modes, two execution modes, two semantic
// modes.
enum class Mode { clean, chaos, noise, failure, popup, remap_explicit, remap };

inline constexpr std::array kAllModes = {Mode::clean,  Mode::chaos,          Mode::noise, Mode::failure,
                                         Mode::popup,  Mode::remap_explicit, Mode::remap};

std::string_view to_string(Mode m);
std::optional<Mode> parse_mode(std::string_view s);
bool is_remap(Mode m);

struct PerturbConfig {
  Mode mode = Mode::clean;
  std::uint64_t seed = 0;
  double failure_p = 0.35;
  double popup_f = 0.30;
  double chaos_magnitude = 0.5;
  double noise_density = 0.5;

  // Throws std::invalid_argument when a probability is outside [0, 1].
  void validate() const;
  bool operator==(const PerturbConfig&) const = default;
};

struct NoiseStats {
  int decoys = 0;
  int fragments = 0;     // text nodes split
  int encoded = 0;       // text nodes over-encoded
  int chaos_styled = 0;  // elements restyled by chaos
  // "<canonical id>:<attribute>" for every attribute added or rewritten.
  std::set<std::string> perturbed_attributes;
};

// The agent-visible tree. origin[id] maps each node back to the canonical
// page (see site::kInserted / site::kInert).
struct PerturbedDom {
  dom::DomTree tree;
  std::vector<int> origin;
  std::unordered_set<int> over_encoded;
  NoiseStats stats;

  std::string serialize() const;
};

// Perception stage. Identity for every mode except chaos and noise.
PerturbedDom perturb_dom(const dom::DomTree& canonical, const PerturbConfig& config, const StreamKey& key);

// Execution stage: whether this step's CLICK/FILL/TYPE is silently dropped.
bool inject_failure(const StreamKey& key, const PerturbConfig& config, site::ActionType action);

site::ModalDescriptor make_modal(site::ModalVariant variant);

// Execution stage: a pop-up drawn after a state-changing transition.
std::optional<site::ModalDescriptor> maybe_spawn_popup(const site::EnvState& state, const PerturbConfig& config,
                                                       const StreamKey& key);

enum class GateDecision {
  pass,    // not a remapped trigger; the click behaves normally
  select,  // first click: record the selection, suppress the effect
  fire,    // second consecutive click: clear selection, run the effect
};

// Semantic stage: double-click gate for remap-eligible triggers.
GateDecision remap_gate(const site::SiteSpec& spec, const site::EnvState& state, const site::ResolvedTarget& click);

}  // namespace webstress::perturb
