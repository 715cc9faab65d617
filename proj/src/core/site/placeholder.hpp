#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace webstress::site {

// Piece of a text or attribute template: literal text, {id}, {field},
// {field.subfield} (follows a reference) or {count:type}.
struct TemplatePart {
  enum class Kind { literal, id, field, deref, count };
  Kind kind = Kind::literal;
  std::string a;
  std::string b;
};

// Throws std::invalid_argument on an unterminated or empty placeholder.
std::vector<TemplatePart> parse_template(std::string_view text);

}  // namespace webstress::site
