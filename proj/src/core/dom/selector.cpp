#include "dom/selector.hpp"

#include <algorithm>
#include <cctype>

namespace webstress::dom {

namespace {

bool is_ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '-' || c == '_';
}

std::string_view trim(std::string_view s) {
  const auto is_ws = [](char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f'; };
  while (!s.empty() && is_ws(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_ws(s.back())) s.remove_suffix(1);
  return s;
}

class SelectorParser {
 public:
  explicit SelectorParser(std::string_view text) : src_(text) {}

  Selector run() {
    skip_space();
    if (pos_ == src_.size()) fail("empty selector");
    Selector sel;
    if (src_.substr(pos_, 5) == "text=") {
      pos_ += 5;
      skip_space();
      sel.exact_text = read_quoted();
      finish();
      return sel;
    }
    if (std::isalpha(static_cast<unsigned char>(src_[pos_]))) {
      std::string tag = read_ident("tag name");
      for (auto& c : tag) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
      sel.tag = std::move(tag);
    }
    while (pos_ < src_.size()) {
      const char c = src_[pos_];
      if (c == '#') {
        ++pos_;
        if (sel.id) fail("only one id per selector");
        sel.id = read_ident("id");
      } else if (c == '.') {
        ++pos_;
        sel.classes.push_back(read_ident("class name"));
      } else if (c == '[') {
        ++pos_;
        sel.attr_tests.push_back(read_attr_test());
      } else if (c == ':') {
        read_pseudo(sel);
        break;
      } else {
        break;
      }
    }
    finish();
    std::sort(sel.classes.begin(), sel.classes.end());
    sel.classes.erase(std::unique(sel.classes.begin(), sel.classes.end()), sel.classes.end());
    if (!sel.tag && !sel.id && sel.classes.empty() && sel.attr_tests.empty() && !sel.has_text) {
      fail("selector has no components");
    }
    return sel;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const { throw SelectorError(pos_, msg); }

  void skip_space() {
    while (pos_ < src_.size() && (src_[pos_] == ' ' || src_[pos_] == '\t')) ++pos_;
  }

  void finish() {
    skip_space();
    if (pos_ == src_.size()) return;
    const char c = src_[pos_];
    if (c == '>' || c == '+' || c == '~' || is_ident_char(c) || c == '.' || c == '#' || c == '[') {
      fail("combinators are not supported");
    }
    fail(std::string("unexpected character '") + c + "'");
  }

  std::string read_ident(const char* what) {
    const std::size_t start = pos_;
    while (pos_ < src_.size() && is_ident_char(src_[pos_])) ++pos_;
    if (pos_ == start) fail(std::string("expected ") + what);
    return std::string(src_.substr(start, pos_ - start));
  }

  std::string read_quoted() {
    if (pos_ >= src_.size() || (src_[pos_] != '"' && src_[pos_] != '\'')) fail("expected a quoted string");
    const char q = src_[pos_++];
    std::string out;
    while (pos_ < src_.size() && src_[pos_] != q) {
      if (src_[pos_] == '\\' && pos_ + 1 < src_.size()) ++pos_;
      out += src_[pos_++];
    }
    if (pos_ >= src_.size()) fail("unterminated string");
    ++pos_;
    return out;
  }

  AttrTest read_attr_test() {
    skip_space();
    AttrTest test;
    const std::size_t start = pos_;
    while (pos_ < src_.size() && (is_ident_char(src_[pos_]) || src_[pos_] == ':' || src_[pos_] == '.')) ++pos_;
    if (pos_ == start) fail("expected attribute name");
    test.name = std::string(src_.substr(start, pos_ - start));
    for (auto& c : test.name) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    skip_space();
    if (pos_ >= src_.size() || src_[pos_] != '=') fail("expected '=' in attribute test");
    ++pos_;
    skip_space();
    if (pos_ < src_.size() && (src_[pos_] == '"' || src_[pos_] == '\'')) {
      test.value = read_quoted();
    } else {
      test.value = read_ident("attribute value");
    }
    skip_space();
    if (pos_ >= src_.size() || src_[pos_] != ']') fail("expected ']'");
    ++pos_;
    return test;
  }

  void read_pseudo(Selector& sel) {
    const std::size_t start = pos_;
    ++pos_;
    std::string name;
    while (pos_ < src_.size() && is_ident_char(src_[pos_])) name += src_[pos_++];
    if (name != "has-text") {
      pos_ = start;
      fail("unsupported pseudo-class ':" + name + "'");
    }
    if (pos_ >= src_.size() || src_[pos_] != '(') fail("expected '(' after :has-text");
    ++pos_;
    skip_space();
    sel.has_text = read_quoted();
    skip_space();
    if (pos_ >= src_.size() || src_[pos_] != ')') fail("expected ')'");
    ++pos_;
  }

  std::string_view src_;
  std::size_t pos_ = 0;
};

bool has_class(const DomNode& node, std::string_view cls) {
  const std::string* value = node.attr("class");
  if (!value) return false;
  std::string_view v = *value;
  std::size_t i = 0;
  while (i < v.size()) {
    while (i < v.size() && v[i] == ' ') ++i;
    std::size_t j = i;
    while (j < v.size() && v[j] != ' ') ++j;
    if (v.substr(i, j - i) == cls) return true;
    i = j;
  }
  return false;
}

bool matches_structure(const DomNode& node, const Selector& s) {
  if (s.tag && node.tag != *s.tag) return false;
  if (s.id) {
    const std::string* id = node.attr("id");
    if (!id || *id != *s.id) return false;
  }
  for (const auto& cls : s.classes) {
    if (!has_class(node, cls)) return false;
  }
  for (const auto& t : s.attr_tests) {
    const std::string* v = node.attr(t.name);
    if (!v || *v != t.value) return false;
  }
  return true;
}

class Matcher {
 public:
  explicit Matcher(const Selector& s) : s_(s), need_text_(s.has_text || s.exact_text) {}

  std::string visit(const DomNode& node) {
    if (node.is_text()) return need_text_ ? node.text : std::string();
    const std::size_t order = counter_++;
    std::string text;
    bool child_has_exact = false;
    for (const auto& child : node.children) {
      std::string t = visit(child);
      if (s_.exact_text && child.is_element() && trim(t) == *s_.exact_text) child_has_exact = true;
      if (need_text_) text += t;
    }
    if (matches_structure(node, s_)) {
      bool ok = true;
      if (s_.has_text) ok = text.find(*s_.has_text) != std::string::npos;
      if (s_.exact_text) ok = !child_has_exact && trim(text) == *s_.exact_text;
      if (ok) hits_.emplace_back(order, node.id);
    }
    return text;
  }

  std::vector<int> result() {
    std::sort(hits_.begin(), hits_.end());
    std::vector<int> ids;
    ids.reserve(hits_.size());
    for (const auto& h : hits_) ids.push_back(h.second);
    return ids;
  }

 private:
  const Selector& s_;
  bool need_text_;
  std::size_t counter_ = 0;
  std::vector<std::pair<std::size_t, int>> hits_;
};

std::string quote(std::string_view s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  out += '"';
  return out;
}

}  // namespace

SelectorError::SelectorError(std::size_t position, const std::string& detail)
    : std::runtime_error("selector error at position " + std::to_string(position) + ": " + detail),
      position_(position) {}

Selector parse_selector(std::string_view text) { return SelectorParser(text).run(); }

std::string to_string(const Selector& s) {
  if (s.exact_text) return "text=" + quote(*s.exact_text);
  std::string out;
  if (s.tag) out += *s.tag;
  if (s.id) out += "#" + *s.id;
  for (const auto& c : s.classes) out += "." + c;
  for (const auto& t : s.attr_tests) out += "[" + t.name + "=" + quote(t.value) + "]";
  if (s.has_text) out += ":has-text(" + quote(*s.has_text) + ")";
  return out;
}

std::vector<int> query(const DomTree& tree, const Selector& selector) {
  Matcher m(selector);
  for (const auto& root : tree.roots) m.visit(root);
  return m.result();
}

}  // namespace webstress::dom
