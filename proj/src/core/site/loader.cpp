#include "site/loader.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "site/placeholder.hpp"

namespace webstress::site {

using nlohmann::json;

namespace {

std::string describe(const json& j) { return j.dump(); }

// Collects problems instead of stopping at the first one.
class SiteBuilder {
 public:
  SiteSpec build(const json& doc) {
    if (!doc.is_object()) {
      fail("site definition must be a JSON object");
      throw SiteError(problems_);
    }
    spec_.site_id = doc.value("site_id", "");
    if (spec_.site_id.empty()) fail("site_id is missing");
    spec_.title = doc.value("title", spec_.site_id);

    read_schemas(doc);
    read_pages(doc);
    read_behaviors(doc);
    read_initial_data(doc);
    read_remap_set(doc);
    validate_components();
    validate_behaviors();

    if (!problems_.empty()) throw SiteError(problems_);
    return std::move(spec_);
  }

 private:
  struct TriggerSite {
    int count = 0;
    std::string bound_type;
  };

  void fail(std::string msg) { problems_.push_back(std::move(msg)); }

  void read_schemas(const json& doc) {
    const json schemas = doc.value("schemas", json::object());
    if (!schemas.is_object()) {
      fail("schemas must be an object");
      return;
    }
    for (const auto& [type, fields] : schemas.items()) {
      EntitySchema schema;
      schema.type = type;
      if (!fields.is_array()) {
        fail("schema '" + type + "' must be a list of fields");
        continue;
      }
      std::set<std::string> seen;
      for (const auto& f : fields) {
        FieldDef def;
        def.name = f.value("name", "");
        const std::string kind = f.value("kind", "string");
        def.required = f.value("required", false);
        if (def.name.empty() || def.name == "id") {
          fail("schema '" + type + "' has an invalid field name " + describe(f));
          continue;
        }
        if (!seen.insert(def.name).second) fail("schema '" + type + "' repeats field '" + def.name + "'");
        if (kind == "string") {
          def.kind = FieldKind::string;
        } else if (kind == "integer") {
          def.kind = FieldKind::integer;
        } else if (kind == "boolean") {
          def.kind = FieldKind::boolean;
        } else if (kind == "reference") {
          def.kind = FieldKind::reference;
          def.ref_type = f.value("ref", "");
        } else {
          fail("schema '" + type + "' field '" + def.name + "' has unknown kind '" + kind + "'");
        }
        schema.fields.push_back(std::move(def));
      }
      spec_.schemas.push_back(std::move(schema));
    }
    for (const auto& schema : spec_.schemas) {
      for (const auto& f : schema.fields) {
        if (f.kind == FieldKind::reference && !spec_.schema(f.ref_type)) {
          fail("field '" + schema.type + "." + f.name + "' references unknown entity type '" + f.ref_type + "'");
        }
      }
    }
  }

  std::vector<dom::DomNode> parse_fragment(const std::string& html, const std::string& where) {
    try {
      dom::DomTree t = dom::parse_html(html);
      return std::move(t.roots);
    } catch (const dom::ParseError& e) {
      fail(where + ": " + e.what());
      return {};
    }
  }

  Component read_component(const json& j, const std::string& where, const std::string& form_ctx) {
    Component c;
    if (!j.is_object()) {
      fail(where + ": component must be an object");
      return c;
    }
    if (j.contains("attrs")) {
      if (!j["attrs"].is_object()) {
        fail(where + ": attrs must be an object");
      } else {
        for (const auto& [k, v] : j["attrs"].items()) {
          c.attrs[k] = v.is_string() ? v.get<std::string>() : v.dump();
        }
      }
    }
    c.text = j.value("text", "");
    c.element_key = j.value("key", "");

    if (j.contains("html")) {
      c.kind = Component::Kind::static_html;
      c.html = parse_fragment(j.value("html", ""), where);
      return c;
    }
    if (j.contains("list")) {
      c.kind = Component::Kind::list;
      c.entity_type = j.value("list", "");
      c.tag = j.value("tag", "div");
      for (const auto& f : j.value("filter", json::array())) {
        ListFilter filter;
        filter.field = f.value("field", "");
        if (f.contains("contains")) {
          filter.op = ListFilter::Op::contains;
          filter.value = read_value_source(f["contains"], where);
        } else if (f.contains("equals")) {
          filter.value = read_value_source(f["equals"], where);
        } else {
          fail(where + ": filter needs 'equals' or 'contains'");
        }
        c.filters.push_back(std::move(filter));
      }
      if (j.contains("sort")) {
        const auto& s = j["sort"];
        SortSpec sort;
        sort.field = s.value("field", "");
        sort.descending = s.value("order", "asc") == "desc";
        c.sort = sort;
      }
      if (!j.contains("item")) {
        fail(where + ": list needs an item template");
      } else {
        c.item.push_back(read_component(j["item"], where + "/item", form_ctx));
      }
      if (j.contains("empty")) c.html = parse_fragment(j.value("empty", ""), where + "/empty");
      read_children(j, c, where, form_ctx);
      return c;
    }
    if (j.contains("form")) {
      c.kind = Component::Kind::form;
      c.form = j.value("form", "");
      c.tag = j.value("tag", "form");
      c.submit_key = j.value("submit", "");
      if (!form_ctx.empty()) fail(where + ": forms cannot nest");
      read_children(j, c, where, c.form);
      return c;
    }
    if (j.contains("input")) {
      c.kind = Component::Kind::input;
      c.field = j.value("input", "");
      c.form = form_ctx;
      c.tag = j.value("tag", "input");
      if (form_ctx.empty()) fail(where + ": input '" + c.field + "' is outside a form");
      if (c.tag != "input" && c.tag != "textarea") fail(where + ": input tag must be input or textarea");
      return c;
    }
    c.kind = Component::Kind::element;
    c.tag = j.value("tag", "");
    if (c.tag.empty() || !dom::is_known_tag(c.tag)) fail(where + ": unsupported tag '" + c.tag + "'");
    read_children(j, c, where, form_ctx);
    return c;
  }

  void read_children(const json& j, Component& c, const std::string& where, const std::string& form_ctx) {
    if (!j.contains("children")) return;
    int i = 0;
    for (const auto& child : j["children"]) {
      c.children.push_back(read_component(child, where + "/" + std::to_string(i++), form_ctx));
    }
  }

  ValueSource read_value_source(const json& j, const std::string& where) {
    if (j.is_boolean()) return Literal{j.get<bool>()};
    if (j.is_number_integer()) return Literal{j.get<std::int64_t>()};
    if (j.is_string()) return Literal{j.get<std::string>()};
    if (j.is_object()) {
      if (j.contains("literal")) return read_value_source(j["literal"], where);
      if (j.contains("form")) return FormValue{parse_field_ref(j.value("form", ""))};
      if (j.contains("bound")) {
        const std::string f = j.value("bound", "");
        if (f == "id") return BoundId{};
        return BoundField{f};
      }
      if (j.contains("count")) return CountOf{j.value("count", "")};
      if (j.contains("entity")) return EntityField{j.value("type", ""), j.value("entity", ""), j.value("field", "")};
    }
    fail(where + ": unrecognized value " + describe(j));
    return Literal{std::string()};
  }

  EntitySelector read_selector(const json& j, const std::string& where) {
    EntitySelector sel;
    if (j.is_string() && j.get<std::string>() == "bound") {
      sel.mode = EntitySelector::Mode::bound;
      return sel;
    }
    if (!j.is_object()) {
      fail(where + ": unrecognized entity selector " + describe(j));
      return sel;
    }
    sel.type = j.value("type", "");
    if (j.contains("id")) {
      sel.mode = EntitySelector::Mode::by_id;
      sel.id = j.value("id", "");
    } else if (j.contains("where")) {
      sel.mode = EntitySelector::Mode::where;
      for (const auto& [field, v] : j["where"].items()) {
        sel.where.push_back({field, read_value_source(v, where)});
      }
    } else if (j.value("all", false)) {
      sel.mode = EntitySelector::Mode::all;
    } else {
      fail(where + ": entity selector needs id, where or all");
    }
    return sel;
  }

  std::vector<FieldBinding> read_bindings(const json& j, const std::string& where) {
    std::vector<FieldBinding> out;
    if (!j.is_object()) return out;
    for (const auto& [field, v] : j.items()) out.push_back({field, read_value_source(v, where)});
    return out;
  }

  Effect read_effect(const json& j, const std::string& where) {
    if (j.contains("navigate")) return Navigate{j.value("navigate", "")};
    if (j.contains("create") || j.contains("update")) {
      const bool create = j.contains("create");
      const json& body = create ? j["create"] : j["update"];
      SubmitForm s;
      s.create = create;
      s.entity_type = body.value("entity", "");
      s.form = body.value("form", "");
      s.fields = read_bindings(body.value("fields", json::object()), where);
      if (!create) {
        if (body.contains("target")) {
          s.target = read_selector(body["target"], where);
        } else {
          fail(where + ": update needs a target");
        }
      }
      return s;
    }
    if (j.contains("set")) {
      const json& body = j["set"];
      return SetField{read_selector(body.value("target", json()), where), body.value("field", ""),
                      read_value_source(body.value("value", json()), where)};
    }
    if (j.contains("delete")) return DeleteEntity{read_selector(j["delete"], where)};
    if (j.contains("toggle")) {
      const json& body = j["toggle"];
      return ToggleFlag{read_selector(body.value("target", json()), where), body.value("field", "")};
    }
    if (j.contains("focus")) return FocusInput{parse_field_ref(j.value("focus", ""))};
    if (j.contains("noop")) return NoOp{};
    fail(where + ": unrecognized effect " + describe(j));
    return NoOp{};
  }

  void read_pages(const json& doc) {
    int i = 0;
    for (const auto& c : doc.value("layout", json::array())) {
      spec_.layout.push_back(read_component(c, "layout/" + std::to_string(i++), ""));
    }
    const json pages = doc.value("pages", json::array());
    if (!pages.is_array() || pages.empty()) {
      fail("site has no pages; at least the root route '/' is required");
      return;
    }
    std::set<std::string> routes;
    for (const auto& p : pages) {
      PageTemplate page;
      page.route = p.value("route", "");
      page.title = p.value("title", page.route);
      if (page.route.empty() || page.route[0] != '/') fail("page route '" + page.route + "' must start with '/'");
      if (!routes.insert(page.route).second) fail("duplicate route '" + page.route + "'");
      int k = 0;
      for (const auto& c : p.value("components", json::array())) {
        page.components.push_back(read_component(c, "page " + page.route + "/" + std::to_string(k++), ""));
      }
      spec_.pages.push_back(std::move(page));
    }
    if (!routes.count("/")) fail("site has no root route '/'");
  }

  void read_behaviors(const json& doc) {
    const json behaviors = doc.value("behaviors", json::object());
    for (const auto& [key, body] : behaviors.items()) {
      Behavior b;
      const std::string where = "behavior '" + key + "'";
      if (body.is_array()) {
        for (const auto& e : body) b.push_back(read_effect(e, where));
      } else {
        b.push_back(read_effect(body, where));
      }
      spec_.behaviors.emplace(key, std::move(b));
    }
  }

  void read_initial_data(const json& doc) {
    std::set<std::string> ids;
    for (const auto& rec : doc.value("initial_data", json::array())) {
      try {
        Entity e = entity_from_json(rec, spec_);
        if (!ids.insert(e.id).second) fail("duplicate entity id '" + e.id + "'");
        for (auto& p : check_entity(spec_, e)) fail(std::move(p));
        spec_.initial_data.push_back(std::move(e));
      } catch (const std::exception& ex) {
        fail(std::string("initial_data: ") + ex.what());
      }
    }
  }

  void read_remap_set(const json& doc) {
    if (!doc.contains("remap_set")) return;
    spec_.remap_set = doc["remap_set"].get<std::vector<std::string>>();
  }

  // --- validation -------------------------------------------------------------

  void check_template(const std::string& text, const std::string& bound_type, const std::string& where) {
    std::vector<TemplatePart> parts;
    try {
      parts = parse_template(text);
    } catch (const std::invalid_argument& e) {
      fail(where + ": " + e.what());
      return;
    }
    const EntitySchema* schema = bound_type.empty() ? nullptr : spec_.schema(bound_type);
    for (const auto& p : parts) {
      switch (p.kind) {
        case TemplatePart::Kind::literal: break;
        case TemplatePart::Kind::count:
          if (!spec_.schema(p.a)) fail(where + ": {count:" + p.a + "} names an unknown entity type");
          break;
        case TemplatePart::Kind::id:
          if (!schema) fail(where + ": {id} used outside a list item");
          break;
        case TemplatePart::Kind::field:
          if (!schema || !schema->field(p.a)) fail(where + ": unknown entity field {" + p.a + "}");
          break;
        case TemplatePart::Kind::deref: {
          const FieldDef* f = schema ? schema->field(p.a) : nullptr;
          const EntitySchema* target = f && f->kind == FieldKind::reference ? spec_.schema(f->ref_type) : nullptr;
          if (!target || !target->field(p.b)) fail(where + ": unknown entity field {" + p.a + "." + p.b + "}");
          break;
        }
      }
    }
  }

  void walk(const Component& c, const std::string& route, const std::string& bound_type, const std::string& where) {
    check_template(c.text, bound_type, where);
    for (const auto& [k, v] : c.attrs) check_template(v, bound_type, where + " attr " + k);
    if (!c.element_key.empty()) {
      auto& site = triggers_[c.element_key];
      ++site.count;
      site.bound_type = bound_type;
    }
    switch (c.kind) {
      case Component::Kind::static_html:
      case Component::Kind::element: break;
      case Component::Kind::list: {
        const EntitySchema* schema = spec_.schema(c.entity_type);
        if (!schema) {
          fail(where + ": list over unknown entity type '" + c.entity_type + "'");
          return;
        }
        for (const auto& f : c.filters) {
          if (f.field != "id" && !schema->field(f.field)) {
            fail(where + ": unknown entity field '" + c.entity_type + "." + f.field + "' in filter");
          }
          pending_sources_.push_back({f.value, bound_type, where});
        }
        if (c.sort && !schema->field(c.sort->field)) {
          fail(where + ": unknown entity field '" + c.entity_type + "." + c.sort->field + "' in sort");
        }
        for (const auto& item : c.item) walk(item, route, c.entity_type, where + "/item");
        break;
      }
      case Component::Kind::form: {
        if (c.form.empty()) fail(where + ": form needs a name");
        if (spec_.forms.count(c.form)) fail(where + ": duplicate form '" + c.form + "'");
        FormInfo info;
        info.name = c.form;
        info.route = route;
        info.submit_key = c.submit_key;
        spec_.forms[c.form] = info;
        break;
      }
      case Component::Kind::input: {
        auto it = spec_.forms.find(c.form);
        if (it != spec_.forms.end()) {
          auto& fields = it->second.fields;
          if (std::find(fields.begin(), fields.end(), c.field) != fields.end()) {
            fail(where + ": duplicate field '" + c.field + "' in form '" + c.form + "'");
          }
          fields.push_back(c.field);
        }
        break;
      }
    }
    for (const auto& child : c.children) walk(child, route, bound_type, where);
  }

  void validate_components() {
    for (const auto& c : spec_.layout) walk(c, "", "", "layout");
    for (const auto& page : spec_.pages) {
      for (const auto& c : page.components) walk(c, page.route, "", "page " + page.route);
    }
    for (const auto& p : pending_sources_) check_source(p.value, p.bound_type, p.where);
    for (const auto& [name, info] : spec_.forms) {
      if (!info.submit_key.empty() && !spec_.behaviors.count(info.submit_key)) {
        fail("form '" + name + "' submits through unknown behavior '" + info.submit_key + "'");
      }
    }
  }

  void check_field(const std::string& type, const std::string& field, const std::string& where) {
    const EntitySchema* schema = spec_.schema(type);
    if (!schema) {
      fail(where + ": unknown entity type '" + type + "'");
    } else if (!schema->field(field)) {
      fail(where + ": unknown entity field '" + type + "." + field + "'");
    }
  }

  void check_form_ref(const FieldRef& ref, const std::string& where) {
    auto it = spec_.forms.find(ref.form);
    if (it == spec_.forms.end()) {
      fail(where + ": unknown form '" + ref.form + "'");
      return;
    }
    const auto& fields = it->second.fields;
    if (std::find(fields.begin(), fields.end(), ref.field) == fields.end()) {
      fail(where + ": unknown form field '" + ref.str() + "'");
    }
  }

  void check_source(const ValueSource& v, const std::string& bound_type, const std::string& where) {
    std::visit(
        [&](const auto& s) {
          using T = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<T, FormValue>) {
            check_form_ref(s.field, where);
          } else if constexpr (std::is_same_v<T, BoundId>) {
            if (bound_type.empty()) fail(where + ": bound id used outside a list item");
          } else if constexpr (std::is_same_v<T, BoundField>) {
            if (bound_type.empty()) {
              fail(where + ": bound field used outside a list item");
            } else {
              check_field(bound_type, s.field, where);
            }
          } else if constexpr (std::is_same_v<T, EntityField>) {
            check_field(s.type, s.field, where);
            const Entity* e = nullptr;
            for (const auto& rec : spec_.initial_data) {
              if (rec.id == s.id) e = &rec;
            }
            if (!e || e->type != s.type) fail(where + ": unknown entity '" + s.id + "'");
          } else if constexpr (std::is_same_v<T, CountOf>) {
            if (!spec_.schema(s.type)) fail(where + ": unknown entity type '" + s.type + "'");
          }
        },
        v);
  }

  std::string check_selector(const EntitySelector& sel, const std::string& bound_type, const std::string& where) {
    if (sel.mode == EntitySelector::Mode::bound) {
      if (bound_type.empty()) fail(where + ": 'bound' target used by a trigger outside a list");
      return bound_type;
    }
    if (!spec_.schema(sel.type)) {
      fail(where + ": unknown entity type '" + sel.type + "'");
      return {};
    }
    for (const auto& w : sel.where) {
      if (w.field != "id") check_field(sel.type, w.field, where);
      check_source(w.value, bound_type, where);
    }
    return sel.type;
  }

  void validate_behaviors() {
    for (const auto& [key, site] : triggers_) {
      if (!spec_.behaviors.count(key)) fail("trigger '" + key + "' has no behavior");
      if (site.count > 1) fail("duplicate element_key '" + key + "'");
    }
    for (const auto& [key, behavior] : spec_.behaviors) {
      const std::string where = "behavior '" + key + "'";
      auto t = triggers_.find(key);
      if (t == triggers_.end()) {
        fail(where + " is not attached to any trigger");
        for (const auto& effect : behavior) {
          if (const auto* nav = std::get_if<Navigate>(&effect); nav && !spec_.page(nav->route))
            fail(where + ": navigates to missing route '" + nav->route + "'");
        }
        continue;
      }
      const std::string& bound = t->second.bound_type;
      for (const auto& effect : behavior) {
        std::visit(
            [&](const auto& e) {
              using T = std::decay_t<decltype(e)>;
              if constexpr (std::is_same_v<T, Navigate>) {
                if (!spec_.page(e.route)) fail(where + ": navigates to missing route '" + e.route + "'");
              } else if constexpr (std::is_same_v<T, SubmitForm>) {
                std::string type = e.entity_type;
                if (!e.create) {
                  const std::string target = check_selector(e.target, bound, where);
                  if (type.empty()) type = target;
                }
                if (!e.form.empty() && !spec_.forms.count(e.form)) fail(where + ": unknown form '" + e.form + "'");
                for (const auto& f : e.fields) {
                  check_field(type, f.field, where);
                  check_source(f.value, bound, where);
                }
              } else if constexpr (std::is_same_v<T, SetField>) {
                const std::string type = check_selector(e.target, bound, where);
                if (!type.empty()) check_field(type, e.field, where);
                check_source(e.value, bound, where);
              } else if constexpr (std::is_same_v<T, DeleteEntity>) {
                check_selector(e.target, bound, where);
              } else if constexpr (std::is_same_v<T, ToggleFlag>) {
                const std::string type = check_selector(e.target, bound, where);
                if (!type.empty()) {
                  check_field(type, e.field, where);
                  const FieldDef* f = spec_.schema(type) ? spec_.schema(type)->field(e.field) : nullptr;
                  if (f && f->kind != FieldKind::boolean) fail(where + ": toggled field '" + e.field + "' is not boolean");
                }
              } else if constexpr (std::is_same_v<T, FocusInput>) {
                check_form_ref(e.field, where);
              }
            },
            effect);
      }
    }
    if (spec_.remap_set) {
      for (const auto& key : *spec_.remap_set) {
        if (!spec_.behaviors.count(key)) fail("remap_set names unknown element_key '" + key + "'");
      }
    }
  }

  SiteSpec spec_;
  std::vector<std::string> problems_;
  std::map<std::string, TriggerSite> triggers_;
  struct PendingSource {
    ValueSource value;
    std::string bound_type;
    std::string where;
  };
  std::vector<PendingSource> pending_sources_;
};

}  // namespace

SiteError::SiteError(std::vector<std::string> problems)
    : std::runtime_error([&] {
        std::string msg = "invalid site definition:";
        for (const auto& p : problems) msg += "\n  - " + p;
        return msg;
      }()),
      problems_(std::move(problems)) {}

FieldRef parse_field_ref(std::string_view s) {
  const auto dot = s.find('.');
  if (dot == std::string_view::npos) return {std::string(s), {}};
  return {std::string(s.substr(0, dot)), std::string(s.substr(dot + 1))};
}

SiteSpec load_site(std::string_view document) {
  json doc;
  try {
    doc = json::parse(document);
  } catch (const json::parse_error& e) {
    throw SiteError({std::string("parse error: ") + e.what()});
  }
  return SiteBuilder().build(doc);
}

SiteSpec load_site_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw SiteError({"cannot open " + path.string()});
  std::stringstream ss;
  ss << in.rdbuf();
  return load_site(ss.str());
}

json to_json(const Value& v) {
  return std::visit([](const auto& x) { return json(x); }, v);
}

json to_json(const Entity& e) {
  json fields = json::object();
  for (const auto& [k, v] : e.fields) fields[k] = to_json(v);
  return {{"type", e.type}, {"id", e.id}, {"fields", fields}};
}

Value value_from_json(const json& j, const FieldDef& field) {
  switch (field.kind) {
    case FieldKind::boolean:
      if (j.is_boolean()) return j.get<bool>();
      if (j.is_string() && (j == "true" || j == "false")) return j == "true";
      break;
    case FieldKind::integer:
      if (j.is_number_integer()) return j.get<std::int64_t>();
      if (j.is_string()) {
        const std::string s = j.get<std::string>();
        std::size_t used = 0;
        try {
          const long long v = std::stoll(s, &used);
          if (used == s.size()) return static_cast<std::int64_t>(v);
        } catch (const std::exception&) {
        }
      }
      break;
    case FieldKind::string:
    case FieldKind::reference:
      if (j.is_string()) return j.get<std::string>();
      if (j.is_number_integer() && field.kind == FieldKind::string) return std::to_string(j.get<std::int64_t>());
      break;
  }
  throw std::invalid_argument("value " + j.dump() + " does not fit field '" + field.name + "'");
}

Entity entity_from_json(const json& j, const SiteSpec& spec) {
  Entity e;
  e.type = j.value("type", "");
  e.id = j.value("id", "");
  const EntitySchema* schema = spec.schema(e.type);
  if (!schema) throw std::invalid_argument("unknown entity type '" + e.type + "'");
  if (e.id.empty()) throw std::invalid_argument("entity of type '" + e.type + "' has no id");
  const json fields = j.value("fields", json::object());
  for (const auto& [name, v] : fields.items()) {
    const FieldDef* f = schema->field(name);
    if (!f) throw std::invalid_argument("unknown entity field '" + e.type + "." + name + "'");
    e.fields[name] = value_from_json(v, *f);
  }
  return e;
}

std::vector<std::string> check_entity(const SiteSpec& spec, const Entity& entity) {
  std::vector<std::string> problems;
  const EntitySchema* schema = spec.schema(entity.type);
  if (!schema) {
    problems.push_back("unknown entity type '" + entity.type + "'");
    return problems;
  }
  for (const auto& [name, value] : entity.fields) {
    const FieldDef* f = schema->field(name);
    if (!f) {
      problems.push_back("unknown entity field '" + entity.type + "." + name + "'");
      continue;
    }
    const bool ok = (f->kind == FieldKind::boolean && std::holds_alternative<bool>(value)) ||
                    (f->kind == FieldKind::integer && std::holds_alternative<std::int64_t>(value)) ||
                    ((f->kind == FieldKind::string || f->kind == FieldKind::reference) &&
                     std::holds_alternative<std::string>(value));
    if (!ok) problems.push_back("field '" + entity.type + "." + name + "' has the wrong kind");
  }
  for (const auto& f : schema->fields) {
    if (!f.required) continue;
    auto it = entity.fields.find(f.name);
    if (it == entity.fields.end() ||
        (std::holds_alternative<std::string>(it->second) && std::get<std::string>(it->second).empty())) {
      problems.push_back("required field '" + entity.type + "." + f.name + "' is empty");
    }
  }
  return problems;
}

// --- SiteSpec lookups -----------------------------------------------------------

const PageTemplate* SiteSpec::page(std::string_view route) const {
  for (const auto& p : pages) {
    if (p.route == route) return &p;
  }
  return nullptr;
}

const EntitySchema* SiteSpec::schema(std::string_view type) const {
  for (const auto& s : schemas) {
    if (s.type == type) return &s;
  }
  return nullptr;
}

const Behavior* SiteSpec::behavior(std::string_view key) const {
  auto it = behaviors.find(std::string(key));
  return it == behaviors.end() ? nullptr : &it->second;
}

const FormInfo* SiteSpec::form(std::string_view name) const {
  auto it = forms.find(std::string(name));
  return it == forms.end() ? nullptr : &it->second;
}

bool SiteSpec::remap_eligible(std::string_view key) const {
  if (remap_set) return std::find(remap_set->begin(), remap_set->end(), key) != remap_set->end();
  const Behavior* b = behavior(key);
  if (!b) return false;
  return std::any_of(b->begin(), b->end(), [](const Effect& e) {
    return std::holds_alternative<Navigate>(e) || std::holds_alternative<SubmitForm>(e);
  });
}

bool SiteSpec::form_on_route(std::string_view name, std::string_view route) const {
  const FormInfo* f = form(name);
  return f && (f->route.empty() || f->route == route);
}

}  // namespace webstress::site
