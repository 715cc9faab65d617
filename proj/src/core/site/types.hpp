#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "dom/dom.hpp"

namespace webstress::site {

using Value = std::variant<bool, std::int64_t, std::string>;

std::string value_to_string(const Value& v);

enum class FieldKind { string, integer, boolean, reference };

struct FieldDef {
  std::string name;
  FieldKind kind = FieldKind::string;
  std::string ref_type;  // for references
  bool required = false;
};

struct EntitySchema {
  std::string type;
  std::vector<FieldDef> fields;

  const FieldDef* field(std::string_view name) const;
};

struct Entity {
  std::string type;
  std::string id;
  std::map<std::string, Value> fields;

  bool operator==(const Entity&) const = default;
};

struct FieldRef {
  std::string form;
  std::string field;

  auto operator<=>(const FieldRef&) const = default;
  std::string str() const { return form + "." + field; }
};

// --- value sources used by effects and list filters -------------------------

struct Literal {
  Value value;
};
struct FormValue {
  FieldRef field;
};
struct BoundId {};
struct BoundField {
  std::string field;
};
struct EntityField {
  std::string type;
  std::string id;
  std::string field;
};
struct CountOf {
  std::string type;
};
using ValueSource = std::variant<Literal, FormValue, BoundId, BoundField, EntityField, CountOf>;

struct FieldBinding {
  std::string field;
  ValueSource value;
};

struct EntitySelector {
  enum class Mode { bound, by_id, where, all };
  Mode mode = Mode::bound;
  std::string type;
  std::string id;
  std::vector<FieldBinding> where;
};

// --- effects -----------------------------------------------------------------

struct Navigate {
  std::string route;
};
struct SubmitForm {
  std::string form;  // cleared after a successful submit; may be empty
  std::string entity_type;
  std::vector<FieldBinding> fields;
  bool create = true;
  EntitySelector target;  // update mode only
};
struct SetField {
  EntitySelector target;
  std::string field;
  ValueSource value;
};
struct DeleteEntity {
  EntitySelector target;
};
struct ToggleFlag {
  EntitySelector target;
  std::string field;
};
struct FocusInput {
  FieldRef field;
};
struct NoOp {};

using Effect = std::variant<Navigate, SubmitForm, SetField, DeleteEntity, ToggleFlag, FocusInput, NoOp>;

// A trigger's behavior: effects applied in order, all or nothing.
using Behavior = std::vector<Effect>;

// --- page templates ------------------------------------------------------------

struct ListFilter {
  std::string field;  // "id" addresses the entity id
  enum class Op { equals, contains } op = Op::equals;
  ValueSource value;
};

struct SortSpec {
  std::string field;
  bool descending = false;
};

struct Component {
  enum class Kind { static_html, element, list, form, input };
  Kind kind = Kind::element;

  std::vector<dom::DomNode> html;  // static_html; list empty-state

  // element / list container / form / input
  std::string tag;
  std::map<std::string, std::string> attrs;  // values may contain {placeholders}
  std::string text;
  std::vector<Component> children;
  std::string element_key;  // trigger when non-empty

  // list
  std::string entity_type;
  std::vector<ListFilter> filters;
  std::optional<SortSpec> sort;
  std::vector<Component> item;  // exactly one template

  // form / input
  std::string form;
  std::string submit_key;
  std::string field;
};

struct PageTemplate {
  std::string route;
  std::string title;
  std::vector<Component> components;
};

struct FormInfo {
  std::string name;
  std::string route;  // empty when the form lives in the shared layout
  std::string submit_key;
  std::vector<std::string> fields;
};

struct SiteSpec {
  std::string site_id;
  std::string title;
  std::vector<EntitySchema> schemas;
  std::vector<Component> layout;
  std::vector<PageTemplate> pages;
  std::map<std::string, Behavior> behaviors;
  std::vector<Entity> initial_data;
  std::optional<std::vector<std::string>> remap_set;
  std::map<std::string, FormInfo> forms;

  const PageTemplate* page(std::string_view route) const;
  const EntitySchema* schema(std::string_view type) const;
  const Behavior* behavior(std::string_view key) const;
  const FormInfo* form(std::string_view name) const;
  // True when `key` needs a double click under semantic remapping. Defaults to
  // every trigger whose behavior navigates or submits.
  bool remap_eligible(std::string_view key) const;
  // Whether the form's inputs are rendered on `route`.
  bool form_on_route(std::string_view form, std::string_view route) const;
};

class SiteError : public std::runtime_error {
 public:
  explicit SiteError(std::vector<std::string> problems);
  const std::vector<std::string>& problems() const { return problems_; }

 private:
  std::vector<std::string> problems_;
};

}  // namespace webstress::site
