#pragma once

#include <optional>
#include <span>
#include <string>
#include <unordered_map>

#include "dom/dom.hpp"
#include "dom/selector.hpp"
#include "site/state.hpp"
#include "site/types.hpp"

namespace webstress::site {

struct RenderOptions {
  // Adds the notice describing the double-click rule at the top of <body>.
  bool rule_banner = false;
};

struct RenderedPage {
  dom::DomTree tree;
  std::unordered_map<int, Target> targets;  // keyed by node id
  int modal_root = 0;                       // 0 when no modal is open
  int banner = 0;                           // 0 when absent
};

// Pure function of (spec, state, options).
RenderedPage render(const SiteSpec& spec, const EnvState& state, const RenderOptions& options = {});

// Where an agent-visible node came from. Positive values are canonical node
// ids; kInserted marks wrapper nodes that defer to their parent; kInert marks
// decoys that never reach a target.
inline constexpr int kInserted = 0;
inline constexpr int kInert = -1;

struct ResolvedTarget {
  int canonical_node = 0;
  std::optional<Target> target;
  bool in_modal = false;
};

struct Resolution {
  std::optional<ResolvedTarget> resolved;
  std::optional<RejectReason> rejection;
};

// Evaluates `selector` on the agent-visible tree and maps the first match back
// to the canonical page. `origin[id]` is the provenance of view node `id`.
Resolution resolve(const RenderedPage& canonical, const dom::DomTree& view, std::span<const int> origin,
                   const dom::Selector& selector);

// Resolution against the canonical page itself (identity provenance).
Resolution resolve(const RenderedPage& canonical, const dom::Selector& selector);

// Looks a target up by element key and bound entity on the canonical page.
std::optional<ResolvedTarget> find_target(const RenderedPage& canonical, std::string_view element_key,
                                          std::string_view entity_id = {});

struct KernelAction {
  ActionType type = ActionType::wait;
  std::optional<ResolvedTarget> target;  // CLICK and FILL
  std::string text;                      // FILL and TYPE
  std::string keys;                      // HOTKEY
};

struct TransitionResult {
  EnvState state;
  ActionOutcome outcome;
};

// Pure. Leaves state.step untouched; the episode loop owns the step counter.
TransitionResult transition(const SiteSpec& spec, const EnvState& state, const KernelAction& action);

// Applies a trigger's behavior directly. Returns nullopt if any effect fails.
std::optional<EnvState> apply_behavior(const SiteSpec& spec, const EnvState& state, std::string_view element_key,
                                       std::string_view bound_entity);

}  // namespace webstress::site
