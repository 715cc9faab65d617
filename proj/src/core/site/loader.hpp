#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "site/types.hpp"

namespace webstress::site {

// Parses and validates a site definition document (docs/site-format.md).
// Throws SiteError listing every problem found.
SiteSpec load_site(std::string_view document);
SiteSpec load_site_file(const std::filesystem::path& path);

nlohmann::json to_json(const Value& v);
nlohmann::json to_json(const Entity& e);

// Reads {"type", "id", "fields"}; field values are coerced by the schema.
Entity entity_from_json(const nlohmann::json& j, const SiteSpec& spec);

// Coerces a JSON scalar to the field's kind. Throws std::invalid_argument.
Value value_from_json(const nlohmann::json& j, const FieldDef& field);

// Schema problems with `entity`; empty when valid.
std::vector<std::string> check_entity(const SiteSpec& spec, const Entity& entity);

// Splits "form.field".
FieldRef parse_field_ref(std::string_view s);

}  // namespace webstress::site
