#include "site/kernel.hpp"

#include <algorithm>
#include <cctype>

#include "site/loader.hpp"
#include "site/placeholder.hpp"

namespace webstress::site {

using dom::DomNode;

namespace {

constexpr const char* kBannerText =
    "Notice: this site uses a modified interaction rule. A single click on a button or link only "
    "selects it. Click the same element a second time in a row to activate it.";

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

bool value_less(const Value& a, const Value& b) {
  if (a.index() != b.index()) return a.index() < b.index();
  return a < b;
}

// --- value sources -----------------------------------------------------------

std::optional<Value> evaluate_source(const ValueSource& src, const EnvState& state, const Entity* bound) {
  return std::visit(
      [&](const auto& s) -> std::optional<Value> {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Literal>) {
          return s.value;
        } else if constexpr (std::is_same_v<T, FormValue>) {
          auto it = state.form_buffer.find(s.field);
          return Value{it == state.form_buffer.end() ? std::string() : it->second};
        } else if constexpr (std::is_same_v<T, BoundId>) {
          if (!bound) return std::nullopt;
          return Value{bound->id};
        } else if constexpr (std::is_same_v<T, BoundField>) {
          if (!bound) return std::nullopt;
          auto it = bound->fields.find(s.field);
          if (it == bound->fields.end()) return std::nullopt;
          return it->second;
        } else if constexpr (std::is_same_v<T, EntityField>) {
          const Entity* e = state.store.find(s.id);
          if (!e) return std::nullopt;
          auto it = e->fields.find(s.field);
          if (it == e->fields.end()) return std::nullopt;
          return it->second;
        } else {
          return Value{static_cast<std::int64_t>(state.store.count(s.type))};
        }
      },
      src);
}

std::optional<Value> coerce(const Value& v, const FieldDef& field, const EnvState& state) {
  switch (field.kind) {
    case FieldKind::string: return Value{value_to_string(v)};
    case FieldKind::integer:
      if (std::holds_alternative<std::int64_t>(v)) return v;
      if (const auto* s = std::get_if<std::string>(&v)) {
        try {
          return value_from_json(nlohmann::json(*s), field);
        } catch (const std::invalid_argument&) {
          return std::nullopt;
        }
      }
      return std::nullopt;
    case FieldKind::boolean:
      if (std::holds_alternative<bool>(v)) return v;
      if (const auto* s = std::get_if<std::string>(&v)) {
        if (*s == "true") return Value{true};
        if (*s == "false") return Value{false};
      }
      return std::nullopt;
    case FieldKind::reference: {
      const std::string id = value_to_string(v);
      const Entity* target = state.store.find(id);
      if (!target || target->type != field.ref_type) return std::nullopt;
      return Value{id};
    }
  }
  return std::nullopt;
}

std::string entity_field_string(const Entity& e, const std::string& field) {
  if (field == "id") return e.id;
  auto it = e.fields.find(field);
  return it == e.fields.end() ? std::string() : value_to_string(it->second);
}

// --- rendering ---------------------------------------------------------------

struct Mark {
  std::optional<Target> target;
  bool modal_root = false;
  bool banner = false;
};

class Renderer {
 public:
  Renderer(const SiteSpec& spec, const EnvState& state) : spec_(spec), state_(state) {}

  RenderedPage run(const RenderOptions& options) {
    const PageTemplate* page = spec_.page(state_.route);
    DomNode body = DomNode::element("body");
    if (options.rule_banner) {
      DomNode banner = DomNode::element("div", {{"id", "interaction-notice"}, {"role", "note"}, {"class", "notice"}},
                                        {DomNode::text_node(kBannerText)});
      mark(banner, Mark{std::nullopt, false, true});
      body.children.push_back(std::move(banner));
    }
    DomNode header = DomNode::element("header", {{"id", "site-header"}});
    for (const auto& c : spec_.layout) emit(c, nullptr, header.children);
    body.children.push_back(std::move(header));

    DomNode main = DomNode::element("main", {{"id", "main"}, {"data-route", state_.route}});
    if (page) {
      for (const auto& c : page->components) emit(c, nullptr, main.children);
    }
    body.children.push_back(std::move(main));
    if (state_.ui.modal) body.children.push_back(render_modal(*state_.ui.modal));

    const std::string title = spec_.title + (page && !page->title.empty() ? " | " + page->title : "");
    DomNode head = DomNode::element("head", {}, {DomNode::element("title", {}, {DomNode::text_node(title)})});
    DomNode html = DomNode::element("html", {}, {std::move(head), std::move(body)});

    RenderedPage out;
    out.tree.roots.push_back(std::move(html));
    int next = 1;
    number(out.tree.roots.front(), next, out);
    return out;
  }

 private:
  void mark(DomNode& node, Mark m) {
    marks_.push_back(std::move(m));
    node.id = -static_cast<int>(marks_.size());
  }

  void number(DomNode& node, int& next, RenderedPage& out) {
    const int placeholder = node.id;
    node.id = next++;
    if (placeholder < 0) {
      const Mark& m = marks_[static_cast<std::size_t>(-placeholder - 1)];
      if (m.target) out.targets.emplace(node.id, *m.target);
      if (m.modal_root) out.modal_root = node.id;
      if (m.banner) out.banner = node.id;
    }
    for (auto& child : node.children) number(child, next, out);
  }

  std::string expand(const std::string& text, const Entity* bound) const {
    if (text.find('{') == std::string::npos) return text;
    std::string out;
    for (const auto& part : parse_template(text)) {
      switch (part.kind) {
        case TemplatePart::Kind::literal: out += part.a; break;
        case TemplatePart::Kind::id:
          if (bound) out += bound->id;
          break;
        case TemplatePart::Kind::field:
          if (bound) out += entity_field_string(*bound, part.a);
          break;
        case TemplatePart::Kind::deref:
          if (bound) {
            const Entity* ref = state_.store.find(entity_field_string(*bound, part.a));
            if (ref) out += entity_field_string(*ref, part.b);
          }
          break;
        case TemplatePart::Kind::count: out += std::to_string(state_.store.count(part.a)); break;
      }
    }
    return out;
  }

  DomNode element_for(const Component& c, const Entity* bound) const {
    DomNode node = DomNode::element(c.tag);
    for (const auto& [k, v] : c.attrs) node.attributes[k] = expand(v, bound);
    if (!c.text.empty()) node.children.push_back(DomNode::text_node(expand(c.text, bound)));
    return node;
  }

  void emit(const Component& c, const Entity* bound, std::vector<DomNode>& out) {
    switch (c.kind) {
      case Component::Kind::static_html:
        for (const auto& n : c.html) out.push_back(n);
        return;
      case Component::Kind::element:
      case Component::Kind::form: {
        DomNode node = element_for(c, bound);
        for (const auto& child : c.children) emit(child, bound, node.children);
        if (!c.element_key.empty()) {
          Target t{Target::Kind::trigger, c.element_key, bound ? bound->id : std::string(), {}};
          if (state_.ui.selected && state_.ui.selected->element_key == t.element_key &&
              state_.ui.selected->entity_id == t.entity_id) {
            node.attributes["data-selected"] = "true";
          }
          mark(node, Mark{t});
        }
        out.push_back(std::move(node));
        return;
      }
      case Component::Kind::input: {
        DomNode node = DomNode::element(c.tag);
        for (const auto& [k, v] : c.attrs) node.attributes[k] = expand(v, bound);
        node.attributes["name"] = c.field;
        const FieldRef ref{c.form, c.field};
        auto it = state_.form_buffer.find(ref);
        const std::string value = it == state_.form_buffer.end() ? std::string() : it->second;
        if (c.tag == "textarea") {
          if (!value.empty()) node.children.push_back(DomNode::text_node(value));
        } else {
          node.attributes["value"] = value;
          node.attributes.emplace("type", "text");
        }
        if (state_.focused && *state_.focused == ref) node.attributes["data-focused"] = "true";
        mark(node, Mark{Target{Target::Kind::input, ref.str(), {}, ref}});
        out.push_back(std::move(node));
        return;
      }
      case Component::Kind::list: {
        DomNode node = element_for(c, bound);
        for (const auto& child : c.children) emit(child, bound, node.children);
        std::vector<const Entity*> items;
        for (const Entity* e : state_.store.of_type(c.entity_type)) {
          if (passes_filters(c, *e, bound)) items.push_back(e);
        }
        if (c.sort) {
          const std::string& field = c.sort->field;
          const bool desc = c.sort->descending;
          std::stable_sort(items.begin(), items.end(), [&](const Entity* a, const Entity* b) {
            auto fa = a->fields.find(field);
            auto fb = b->fields.find(field);
            const bool ha = fa != a->fields.end();
            const bool hb = fb != b->fields.end();
            if (!ha || !hb) return desc ? ha && !hb : !ha && hb;
            return desc ? value_less(fb->second, fa->second) : value_less(fa->second, fb->second);
          });
        }
        if (items.empty()) {
          for (const auto& n : c.html) node.children.push_back(n);
        } else {
          for (const Entity* e : items) emit(c.item.front(), e, node.children);
        }
        out.push_back(std::move(node));
        return;
      }
    }
  }

  bool passes_filters(const Component& c, const Entity& e, const Entity* outer) const {
    for (const auto& f : c.filters) {
      auto wanted = evaluate_source(f.value, state_, outer);
      const std::string needle = wanted ? value_to_string(*wanted) : std::string();
      const std::string have = entity_field_string(e, f.field);
      if (f.op == ListFilter::Op::contains) {
        if (!needle.empty() && lower(have).find(lower(needle)) == std::string::npos) return false;
      } else if (!wanted || have != needle) {
        return false;
      }
    }
    return true;
  }

  DomNode render_modal(const ModalDescriptor& modal) {
    DomNode box = DomNode::element("div", {{"class", "modal-box"}},
                                   {DomNode::element("p", {{"class", "modal-prompt"}}, {DomNode::text_node(modal.prompt)})});
    auto button = [&](const std::string& id, const std::string& label, bool dismiss,
                      std::map<std::string, std::string> extra = {}) {
      extra["id"] = id;
      extra["type"] = "button";
      DomNode b = DomNode::element("button", std::move(extra), {DomNode::text_node(label)});
      mark(b, Mark{Target{dismiss ? Target::Kind::modal_dismiss : Target::Kind::modal_inert, id, {}, {}}});
      box.children.push_back(std::move(b));
    };
    switch (modal.variant) {
      case ModalVariant::confirm_ok: button(modal.dismiss_key, "OK", true); break;
      case ModalVariant::decline_offer:
        button("modal-accept", "Yes, subscribe", false);
        button(modal.dismiss_key, "No thanks", true);
        break;
      case ModalVariant::close_icon:
        button(modal.dismiss_key, "\xC3\x97", true, {{"aria-label", "Close"}});
        button("modal-survey", "Start survey", false);
        break;
    }
    DomNode overlay = DomNode::element(
        "div", {{"id", "modal-overlay"}, {"class", "modal-overlay"}, {"role", "dialog"}, {"aria-modal", "true"}},
        {std::move(box)});
    mark(overlay, Mark{std::nullopt, true, false});
    return overlay;
  }

  const SiteSpec& spec_;
  const EnvState& state_;
  std::vector<Mark> marks_;
};

// --- transitions -----------------------------------------------------------------

class EffectRunner {
 public:
  EffectRunner(const SiteSpec& spec, EnvState& state, std::string bound)
      : spec_(spec), state_(state), bound_(std::move(bound)) {}

  bool run(const Behavior& behavior) {
    for (const auto& e : behavior) {
      if (!std::visit([&](const auto& x) { return apply(x); }, e)) return false;
    }
    return true;
  }

 private:
  const Entity* bound_entity() const { return bound_.empty() ? nullptr : state_.store.find(bound_); }

  std::optional<std::vector<std::string>> select(const EntitySelector& sel) const {
    std::vector<std::string> ids;
    switch (sel.mode) {
      case EntitySelector::Mode::bound:
        if (!bound_entity()) return std::nullopt;
        ids.push_back(bound_);
        break;
      case EntitySelector::Mode::by_id: {
        const Entity* e = state_.store.find(sel.id);
        if (!e || e->type != sel.type) return std::nullopt;
        ids.push_back(sel.id);
        break;
      }
      case EntitySelector::Mode::where:
      case EntitySelector::Mode::all:
        for (const Entity* e : state_.store.of_type(sel.type)) {
          bool ok = true;
          for (const auto& w : sel.where) {
            auto v = evaluate_source(w.value, state_, bound_entity());
            if (!v || entity_field_string(*e, w.field) != value_to_string(*v)) ok = false;
          }
          if (ok) ids.push_back(e->id);
        }
        break;
    }
    if (ids.empty()) return std::nullopt;
    return ids;
  }

  bool assign(Entity& e, const std::string& field, const ValueSource& src) {
    const EntitySchema* schema = spec_.schema(e.type);
    const FieldDef* def = schema ? schema->field(field) : nullptr;
    if (!def) return false;
    auto raw = evaluate_source(src, state_, bound_entity());
    if (!raw) return false;
    auto v = coerce(*raw, *def, state_);
    if (!v) return false;
    e.fields[field] = std::move(*v);
    return true;
  }

  void clear_form(const std::string& form) {
    if (form.empty()) return;
    for (auto it = state_.form_buffer.begin(); it != state_.form_buffer.end();) {
      it = it->first.form == form ? state_.form_buffer.erase(it) : std::next(it);
    }
    if (state_.focused && state_.focused->form == form) {
      state_.focused.reset();
      state_.ui.replace_on_type = false;
    }
  }

  bool apply(const Navigate& n) {
    state_.route = n.route;
    return true;
  }

  bool apply(const SubmitForm& s) {
    if (s.create) {
      Entity e;
      e.type = s.entity_type;
      e.id = state_.store.allocate_id(s.entity_type);
      for (const auto& f : s.fields) {
        if (!assign(e, f.field, f.value)) return false;
      }
      if (!check_entity(spec_, e).empty()) return false;
      clear_form(s.form);
      state_.store.put(std::move(e));
      return true;
    }
    auto ids = select(s.target);
    if (!ids) return false;
    for (const auto& id : *ids) {
      Entity e = *state_.store.find(id);
      for (const auto& f : s.fields) {
        if (!assign(e, f.field, f.value)) return false;
      }
      if (!check_entity(spec_, e).empty()) return false;
      state_.store.put(std::move(e));
    }
    clear_form(s.form);
    return true;
  }

  bool apply(const SetField& s) {
    auto ids = select(s.target);
    if (!ids) return false;
    for (const auto& id : *ids) {
      Entity e = *state_.store.find(id);
      if (!assign(e, s.field, s.value)) return false;
      if (!check_entity(spec_, e).empty()) return false;
      state_.store.put(std::move(e));
    }
    return true;
  }

  bool apply(const DeleteEntity& d) {
    auto ids = select(d.target);
    if (!ids) return false;
    for (const auto& id : *ids) state_.store.erase(id);
    return true;
  }

  bool apply(const ToggleFlag& t) {
    auto ids = select(t.target);
    if (!ids) return false;
    for (const auto& id : *ids) {
      Entity* e = state_.store.find(id);
      auto it = e->fields.find(t.field);
      const bool current = it != e->fields.end() && std::holds_alternative<bool>(it->second) && std::get<bool>(it->second);
      e->fields[t.field] = !current;
    }
    return true;
  }

  bool apply(const FocusInput& f) {
    if (state_.focused != f.field) state_.ui.replace_on_type = false;
    state_.focused = f.field;
    return true;
  }

  bool apply(const NoOp&) { return true; }

  const SiteSpec& spec_;
  EnvState& state_;
  std::string bound_;
};

void drop_offscreen_focus(const SiteSpec& spec, EnvState& state) {
  if (state.focused && !spec.form_on_route(state.focused->form, state.route)) {
    state.focused.reset();
    state.ui.replace_on_type = false;
  }
}

std::string normalize_keys(std::string_view keys) {
  std::string out;
  for (char c : keys) {
    if (c != ' ') out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  if (out == "control+a" || out == "meta+a" || out == "cmd+a") return "ctrl+a";
  if (out == "return") return "enter";
  return out;
}

TransitionResult unchanged(const EnvState& state, ActionOutcome outcome) { return {state, outcome}; }

TransitionResult settle(const EnvState& before, EnvState after) {
  const bool changed = !(after == before);
  return {std::move(after), changed ? ActionOutcome::executed() : ActionOutcome::no_effect()};
}

}  // namespace

EnvState reset(const SiteSpec& spec, std::span<const Entity> overlay) {
  EnvState state;
  state.route = "/";
  for (const auto& e : spec.initial_data) state.store.put(e);
  for (const auto& e : overlay) {
    auto problems = check_entity(spec, e);
    if (!problems.empty()) throw SiteError(problems);
    state.store.put(e);
  }
  return state;
}

RenderedPage render(const SiteSpec& spec, const EnvState& state, const RenderOptions& options) {
  return Renderer(spec, state).run(options);
}

Resolution resolve(const RenderedPage& canonical, const dom::DomTree& view, std::span<const int> origin,
                   const dom::Selector& selector) {
  const auto matches = dom::query(view, selector);
  if (matches.empty()) return {std::nullopt, RejectReason::selector_no_match};

  ResolvedTarget resolved;
  const dom::DomIndex view_index(view);
  int id = matches.front();
  while (id > 0) {
    const int o = static_cast<std::size_t>(id) < origin.size() ? origin[id] : kInert;
    if (o == kInert) return {resolved, std::nullopt};
    if (o > 0) {
      resolved.canonical_node = o;
      break;
    }
    id = view_index.parent(id);
  }
  if (resolved.canonical_node == 0) return {resolved, std::nullopt};

  const dom::DomIndex index(canonical.tree);
  for (int n = resolved.canonical_node; n > 0; n = index.parent(n)) {
    auto it = canonical.targets.find(n);
    if (it != canonical.targets.end()) {
      resolved.target = it->second;
      break;
    }
  }
  resolved.in_modal = canonical.modal_root != 0 && index.is_ancestor_or_self(canonical.modal_root, resolved.canonical_node);
  return {resolved, std::nullopt};
}

Resolution resolve(const RenderedPage& canonical, const dom::Selector& selector) {
  std::vector<int> identity(canonical.tree.size() + 1);
  for (std::size_t i = 0; i < identity.size(); ++i) identity[i] = static_cast<int>(i);
  return resolve(canonical, canonical.tree, identity, selector);
}

std::optional<ResolvedTarget> find_target(const RenderedPage& canonical, std::string_view element_key,
                                          std::string_view entity_id) {
  std::optional<ResolvedTarget> best;
  for (const auto& [node, target] : canonical.targets) {
    if (target.element_key != element_key || target.entity_id != entity_id) continue;
    if (best && best->canonical_node < node) continue;
    best = ResolvedTarget{node, target, false};
  }
  if (best && canonical.modal_root) {
    const dom::DomIndex index(canonical.tree);
    best->in_modal = index.is_ancestor_or_self(canonical.modal_root, best->canonical_node);
  }
  return best;
}

std::optional<EnvState> apply_behavior(const SiteSpec& spec, const EnvState& state, std::string_view element_key,
                                       std::string_view bound_entity) {
  const Behavior* behavior = spec.behavior(element_key);
  if (!behavior) return std::nullopt;
  EnvState next = state;
  if (!EffectRunner(spec, next, std::string(bound_entity)).run(*behavior)) return std::nullopt;
  drop_offscreen_focus(spec, next);
  return next;
}

TransitionResult transition(const SiteSpec& spec, const EnvState& state, const KernelAction& action) {
  if (state.terminated) return unchanged(state, ActionOutcome::rejected(RejectReason::invalid_target));

  if (action.type == ActionType::done || action.type == ActionType::fail) {
    EnvState next = state;
    next.terminated = true;
    next.claim = action.type == ActionType::done ? Claim::done : Claim::fail;
    return {std::move(next), ActionOutcome::executed()};
  }

  // An open modal swallows everything except a click on its dismiss control.
  if (state.ui.modal) {
    if (action.type == ActionType::click && action.target && action.target->target &&
        action.target->target->kind == Target::Kind::modal_dismiss) {
      EnvState next = state;
      next.ui.modal.reset();
      return {std::move(next), ActionOutcome::executed()};
    }
    return unchanged(state, ActionOutcome::no_effect());
  }

  switch (action.type) {
    case ActionType::click: {
      if (!action.target || !action.target->target) return unchanged(state, ActionOutcome::no_effect());
      const Target& t = *action.target->target;
      if (t.kind == Target::Kind::input) {
        EnvState next = state;
        if (next.focused != t.field) next.ui.replace_on_type = false;
        next.focused = t.field;
        return settle(state, std::move(next));
      }
      if (t.kind != Target::Kind::trigger) return unchanged(state, ActionOutcome::no_effect());
      auto next = apply_behavior(spec, state, t.element_key, t.entity_id);
      if (!next) return unchanged(state, ActionOutcome::no_effect());
      return settle(state, std::move(*next));
    }
    case ActionType::fill: {
      if (!action.target || !action.target->target || action.target->target->kind != Target::Kind::input) {
        return unchanged(state, ActionOutcome::rejected(RejectReason::invalid_target));
      }
      EnvState next = state;
      const FieldRef& ref = action.target->target->field;
      next.form_buffer[ref] = action.text;
      if (next.focused != ref) next.ui.replace_on_type = false;
      next.focused = ref;
      return settle(state, std::move(next));
    }
    case ActionType::type: {
      if (!state.focused) return unchanged(state, ActionOutcome::rejected(RejectReason::invalid_target));
      EnvState next = state;
      auto& buf = next.form_buffer[*state.focused];
      if (next.ui.replace_on_type) {
        buf = action.text;
        next.ui.replace_on_type = false;
      } else {
        buf += action.text;
      }
      return settle(state, std::move(next));
    }
    case ActionType::hotkey: {
      const std::string keys = normalize_keys(action.keys);
      if (keys == "ctrl+a") {
        if (!state.focused) return unchanged(state, ActionOutcome::no_effect());
        EnvState next = state;
        next.ui.replace_on_type = true;
        return settle(state, std::move(next));
      }
      if (keys == "enter") {
        if (!state.focused) return unchanged(state, ActionOutcome::no_effect());
        const FormInfo* form = spec.form(state.focused->form);
        if (!form || form->submit_key.empty()) return unchanged(state, ActionOutcome::no_effect());
        auto next = apply_behavior(spec, state, form->submit_key, {});
        if (!next) return unchanged(state, ActionOutcome::no_effect());
        return settle(state, std::move(*next));
      }
      return unchanged(state, ActionOutcome::no_effect());
    }
    case ActionType::wait:
    case ActionType::done:
    case ActionType::fail: break;
  }
  return unchanged(state, ActionOutcome::no_effect());
}

}  // namespace webstress::site
