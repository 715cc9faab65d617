#include "dom/dom.hpp"

namespace webstress::dom {

namespace {

void escape_text(std::string& out, std::string_view text) {
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      default: out += c;
    }
  }
}

void escape_attr(std::string& out, std::string_view text) {
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
}

// Printable ASCII becomes &#NN;. Spaces and non-ASCII bytes are left alone.
void over_encode_text(std::string& out, std::string_view text) {
  for (char c : text) {
    const auto u = static_cast<unsigned char>(c);
    if (u > 0x20 && u < 0x7F) {
      out += "&#";
      out += std::to_string(u);
      out += ';';
    } else {
      out += c;
    }
  }
}

void write(std::string& out, const DomNode& node, const SerializeOptions& options) {
  if (node.is_text()) {
    if (options.over_encode && options.over_encode->count(node.id)) {
      over_encode_text(out, node.text);
    } else {
      escape_text(out, node.text);
    }
    return;
  }
  out += '<';
  out += node.tag;
  for (const auto& [name, value] : node.attributes) {
    out += ' ';
    out += name;
    out += "=\"";
    escape_attr(out, value);
    out += '"';
  }
  out += '>';
  if (is_void_element(node.tag)) return;
  for (const auto& child : node.children) write(out, child, options);
  out += "</";
  out += node.tag;
  out += '>';
}

}  // namespace

std::string serialize(const DomTree& tree, const SerializeOptions& options) {
  std::string out;
  for (const auto& root : tree.roots) write(out, root, options);
  return out;
}

std::string serialize(const DomNode& node, const SerializeOptions& options) {
  std::string out;
  write(out, node, options);
  return out;
}

}  // namespace webstress::dom
