#include "site/placeholder.hpp"

#include <stdexcept>

namespace webstress::site {

std::vector<TemplatePart> parse_template(std::string_view text) {
  std::vector<TemplatePart> parts;
  std::string literal;
  std::size_t i = 0;
  while (i < text.size()) {
    if (text[i] != '{') {
      literal += text[i++];
      continue;
    }
    const auto close = text.find('}', i);
    if (close == std::string_view::npos) {
      throw std::invalid_argument("unterminated placeholder in \"" + std::string(text) + "\"");
    }
    const std::string_view body = text.substr(i + 1, close - i - 1);
    if (body.empty()) throw std::invalid_argument("empty placeholder in \"" + std::string(text) + "\"");
    if (!literal.empty()) {
      parts.push_back({TemplatePart::Kind::literal, std::move(literal), {}});
      literal.clear();
    }
    TemplatePart part;
    if (body == "id") {
      part.kind = TemplatePart::Kind::id;
    } else if (body.substr(0, 6) == "count:") {
      part.kind = TemplatePart::Kind::count;
      part.a = std::string(body.substr(6));
    } else if (const auto dot = body.find('.'); dot != std::string_view::npos) {
      part.kind = TemplatePart::Kind::deref;
      part.a = std::string(body.substr(0, dot));
      part.b = std::string(body.substr(dot + 1));
    } else {
      part.kind = TemplatePart::Kind::field;
      part.a = std::string(body);
    }
    if ((part.kind == TemplatePart::Kind::count && part.a.empty()) ||
        (part.kind == TemplatePart::Kind::deref && (part.a.empty() || part.b.empty()))) {
      throw std::invalid_argument("malformed placeholder {" + std::string(body) + "}");
    }
    parts.push_back(std::move(part));
    i = close + 1;
  }
  if (!literal.empty()) parts.push_back({TemplatePart::Kind::literal, std::move(literal), {}});
  return parts;
}

}  // namespace webstress::site
