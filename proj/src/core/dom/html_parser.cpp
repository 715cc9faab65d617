#include <algorithm>
#include <array>
#include <cctype>
#include <cstdint>
#include <utility>

#include "dom/dom.hpp"

namespace webstress::dom {

namespace {

struct NamedEntity {
  std::string_view name;
  std::string_view utf8;
};

constexpr std::array<NamedEntity, 24> kNamedEntities = {{
    {"amp", "&"},         {"lt", "<"},          {"gt", ">"},          {"quot", "\""},
    {"apos", "'"},        {"nbsp", "\xC2\xA0"}, {"copy", "\xC2\xA9"}, {"reg", "\xC2\xAE"},
    {"trade", "\xE2\x84\xA2"}, {"times", "\xC3\x97"}, {"middot", "\xC2\xB7"},
    {"hellip", "\xE2\x80\xA6"}, {"mdash", "\xE2\x80\x94"}, {"ndash", "\xE2\x80\x93"},
    {"lsquo", "\xE2\x80\x98"}, {"rsquo", "\xE2\x80\x99"}, {"ldquo", "\xE2\x80\x9C"},
    {"rdquo", "\xE2\x80\x9D"}, {"laquo", "\xC2\xAB"}, {"raquo", "\xC2\xBB"},
    {"larr", "\xE2\x86\x90"}, {"rarr", "\xE2\x86\x92"}, {"euro", "\xE2\x82\xAC"},
    {"pound", "\xC2\xA3"},
}};

bool is_name_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) != 0; }

bool is_tag_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '-';
}

bool is_attr_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '-' || c == '_' || c == ':' ||
         c == '.';
}

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f'; }

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

void append_utf8(std::string& out, std::uint32_t cp) {
  if (cp < 0x80) {
    out += static_cast<char>(cp);
  } else if (cp < 0x800) {
    out += static_cast<char>(0xC0 | (cp >> 6));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else if (cp < 0x10000) {
    out += static_cast<char>(0xE0 | (cp >> 12));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else {
    out += static_cast<char>(0xF0 | (cp >> 18));
    out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  }
}

class Parser {
 public:
  explicit Parser(std::string_view src) : src_(src) {}

  DomTree run() {
    DomTree tree;
    while (pos_ < src_.size()) {
      if (src_[pos_] == '<') {
        parse_markup(tree);
      } else {
        parse_text(tree);
      }
    }
    if (!open_.empty()) {
      throw ParseError(ParseErrorKind::unbalanced_tag, open_.back().offset,
                       "element <" + current().tag + "> is never closed");
    }
    assign_ids(tree);
    return tree;
  }

 private:
  struct Open {
    std::vector<std::size_t> path;  // child indices from the tree roots
    std::size_t offset;
  };

  DomNode& resolve(DomTree& tree, const std::vector<std::size_t>& path) {
    DomNode* node = &tree.roots[path[0]];
    for (std::size_t i = 1; i < path.size(); ++i) node = &node->children[path[i]];
    return *node;
  }

  const DomNode& current() const { return *current_node_; }

  std::vector<DomNode>& insertion_list(DomTree& tree) {
    if (open_.empty()) return tree.roots;
    return resolve(tree, open_.back().path).children;
  }

  void insert(DomTree& tree, DomNode node, std::size_t offset, bool push) {
    auto& list = insertion_list(tree);
    std::vector<std::size_t> path = open_.empty() ? std::vector<std::size_t>{} : open_.back().path;
    path.push_back(list.size());
    list.push_back(std::move(node));
    if (push) {
      open_.push_back({std::move(path), offset});
      current_node_ = &resolve(tree, open_.back().path);
    }
  }

  void parse_text(DomTree& tree) {
    const std::size_t start = pos_;
    while (pos_ < src_.size() && src_[pos_] != '<') ++pos_;
    std::string text = decode_entities(src_.substr(start, pos_ - start), start);
    auto& list = insertion_list(tree);
    if (!list.empty() && list.back().is_text()) {
      list.back().text += text;
    } else if (!text.empty()) {
      insert(tree, DomNode::text_node(std::move(text)), start, false);
    }
  }

  void parse_markup(DomTree& tree) {
    const std::size_t start = pos_;
    if (src_.substr(pos_, 4) == "<!--") {
      const auto end = src_.find("-->", pos_ + 4);
      if (end == std::string_view::npos) {
        throw ParseError(ParseErrorKind::malformed_tag, start, "unterminated comment");
      }
      pos_ = end + 3;
      return;
    }
    if (src_.substr(pos_, 2) == "<!") {
      const auto end = src_.find('>', pos_);
      if (end == std::string_view::npos) {
        throw ParseError(ParseErrorKind::malformed_tag, start, "unterminated declaration");
      }
      pos_ = end + 1;
      return;
    }
    if (src_.substr(pos_, 2) == "</") {
      parse_close(tree, start);
      return;
    }
    parse_open(tree, start);
  }

  std::string read_tag_name(std::size_t start) {
    if (pos_ >= src_.size() || !is_name_start(src_[pos_])) {
      throw ParseError(ParseErrorKind::malformed_tag, start, "expected a tag name");
    }
    const std::size_t name_start = pos_;
    while (pos_ < src_.size() && is_tag_char(src_[pos_])) ++pos_;
    std::string name = lower(src_.substr(name_start, pos_ - name_start));
    if (!is_known_tag(name)) {
      throw ParseError(ParseErrorKind::unknown_tag, name_start, "tag <" + name + "> is not supported");
    }
    return name;
  }

  void skip_space() {
    while (pos_ < src_.size() && is_space(src_[pos_])) ++pos_;
  }

  void parse_close(DomTree& tree, std::size_t start) {
    pos_ += 2;
    std::string name = read_tag_name(start);
    skip_space();
    if (pos_ >= src_.size() || src_[pos_] != '>') {
      throw ParseError(ParseErrorKind::malformed_tag, start, "expected '>' after </" + name);
    }
    ++pos_;
    if (is_void_element(name)) {
      throw ParseError(ParseErrorKind::stray_close_tag, start, "void element </" + name + "> has no end tag");
    }
    if (open_.empty()) {
      throw ParseError(ParseErrorKind::stray_close_tag, start, "</" + name + "> closes nothing");
    }
    if (current().tag != name) {
      const bool open_somewhere = std::any_of(open_.begin(), open_.end(), [&](const Open& o) {
        return resolve(tree, o.path).tag == name;
      });
      if (open_somewhere) {
        throw ParseError(ParseErrorKind::unbalanced_tag, start,
                         "</" + name + "> while <" + current().tag + "> is still open");
      }
      throw ParseError(ParseErrorKind::stray_close_tag, start, "</" + name + "> has no matching start tag");
    }
    open_.pop_back();
    current_node_ = open_.empty() ? nullptr : &resolve(tree, open_.back().path);
  }

  void parse_open(DomTree& tree, std::size_t start) {
    ++pos_;
    std::string name = read_tag_name(start);
    DomNode node = DomNode::element(name);
    bool self_closing = false;
    for (;;) {
      const std::size_t before = pos_;
      skip_space();
      if (pos_ >= src_.size()) {
        throw ParseError(ParseErrorKind::malformed_tag, start, "unterminated <" + name + ">");
      }
      const char c = src_[pos_];
      if (c == '>') {
        ++pos_;
        break;
      }
      if (c == '/') {
        if (pos_ + 1 < src_.size() && src_[pos_ + 1] == '>') {
          pos_ += 2;
          self_closing = true;
          break;
        }
        throw ParseError(ParseErrorKind::malformed_tag, pos_, "unexpected '/' in <" + name + ">");
      }
      if (before == pos_) {
        throw ParseError(ParseErrorKind::malformed_attribute, pos_, "attributes must be separated by whitespace");
      }
      parse_attribute(node);
    }
    const bool is_void = is_void_element(name);
    insert(tree, std::move(node), start, !(is_void || self_closing));
  }

  void parse_attribute(DomNode& node) {
    const std::size_t start = pos_;
    if (!is_attr_char(src_[pos_]) || src_[pos_] == '-' || src_[pos_] == '.') {
      throw ParseError(ParseErrorKind::malformed_attribute, start, "invalid attribute name");
    }
    while (pos_ < src_.size() && is_attr_char(src_[pos_])) ++pos_;
    std::string name = lower(src_.substr(start, pos_ - start));
    std::string value;
    skip_space();
    if (pos_ < src_.size() && src_[pos_] == '=') {
      ++pos_;
      skip_space();
      if (pos_ >= src_.size()) {
        throw ParseError(ParseErrorKind::malformed_attribute, start, "missing value for '" + name + "'");
      }
      const char q = src_[pos_];
      if (q == '"' || q == '\'') {
        const auto end = src_.find(q, pos_ + 1);
        if (end == std::string_view::npos) {
          throw ParseError(ParseErrorKind::malformed_attribute, pos_, "unterminated value for '" + name + "'");
        }
        value = decode_entities(src_.substr(pos_ + 1, end - pos_ - 1), pos_ + 1);
        pos_ = end + 1;
      } else {
        const std::size_t vstart = pos_;
        while (pos_ < src_.size() && !is_space(src_[pos_]) && src_[pos_] != '>' && src_[pos_] != '"' &&
               src_[pos_] != '\'' && src_[pos_] != '<' && src_[pos_] != '=' && src_[pos_] != '`') {
          if (src_[pos_] == '/' && pos_ + 1 < src_.size() && src_[pos_ + 1] == '>') break;
          ++pos_;
        }
        if (pos_ == vstart) {
          throw ParseError(ParseErrorKind::malformed_attribute, vstart, "missing value for '" + name + "'");
        }
        value = decode_entities(src_.substr(vstart, pos_ - vstart), vstart);
      }
    }
    if (!node.attributes.emplace(name, std::move(value)).second) {
      throw ParseError(ParseErrorKind::malformed_attribute, start, "duplicate attribute '" + name + "'");
    }
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  std::vector<Open> open_;
  const DomNode* current_node_ = nullptr;
};

}  // namespace

std::string_view to_string(ParseErrorKind kind) {
  switch (kind) {
    case ParseErrorKind::unbalanced_tag: return "unbalanced_tag";
    case ParseErrorKind::stray_close_tag: return "stray_close_tag";
    case ParseErrorKind::malformed_attribute: return "malformed_attribute";
    case ParseErrorKind::malformed_tag: return "malformed_tag";
    case ParseErrorKind::unknown_entity: return "unknown_entity";
    case ParseErrorKind::unknown_tag: return "unknown_tag";
  }
  return "unknown";
}

ParseError::ParseError(ParseErrorKind kind, std::size_t offset, const std::string& detail)
    : std::runtime_error(std::string(to_string(kind)) + " at byte " + std::to_string(offset) + ": " + detail),
      kind_(kind),
      offset_(offset) {}

std::string decode_entities(std::string_view text, std::size_t base_offset) {
  std::string out;
  out.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    const char c = text[i];
    if (c != '&') {
      out += c;
      ++i;
      continue;
    }
    const auto semi = text.find(';', i + 1);
    if (semi == std::string_view::npos || semi - i > 12) {
      throw ParseError(ParseErrorKind::unknown_entity, base_offset + i, "unterminated character reference");
    }
    const std::string_view body = text.substr(i + 1, semi - i - 1);
    if (!body.empty() && body[0] == '#') {
      std::uint32_t cp = 0;
      const bool hex = body.size() > 1 && (body[1] == 'x' || body[1] == 'X');
      const std::string_view digits = body.substr(hex ? 2 : 1);
      bool ok = !digits.empty();
      for (char d : digits) {
        int v;
        if (d >= '0' && d <= '9') {
          v = d - '0';
        } else if (hex && d >= 'a' && d <= 'f') {
          v = d - 'a' + 10;
        } else if (hex && d >= 'A' && d <= 'F') {
          v = d - 'A' + 10;
        } else {
          ok = false;
          break;
        }
        cp = cp * (hex ? 16 : 10) + static_cast<std::uint32_t>(v);
        if (cp > 0x10FFFF) {
          ok = false;
          break;
        }
      }
      if (!ok || cp == 0 || (cp >= 0xD800 && cp <= 0xDFFF)) {
        throw ParseError(ParseErrorKind::unknown_entity, base_offset + i,
                         "invalid numeric reference &" + std::string(body) + ";");
      }
      append_utf8(out, cp);
    } else {
      auto it = std::find_if(kNamedEntities.begin(), kNamedEntities.end(),
                             [&](const NamedEntity& e) { return e.name == body; });
      if (it == kNamedEntities.end()) {
        throw ParseError(ParseErrorKind::unknown_entity, base_offset + i,
                         "unknown entity &" + std::string(body) + ";");
      }
      out += it->utf8;
    }
    i = semi + 1;
  }
  return out;
}

DomTree parse_html(std::string_view text) { return Parser(text).run(); }

}  // namespace webstress::dom
