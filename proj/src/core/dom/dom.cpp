#include "dom/dom.hpp"

#include <algorithm>
#include <array>

namespace webstress::dom {

namespace {

constexpr std::array kKnownTags = {
    "a",      "article", "aside", "b",     "body",     "br",   "button", "div",   "em",
    "footer", "form",    "h1",    "h2",    "h3",       "h4",   "h5",     "h6",    "head",
    "header", "hr",      "html",  "i",     "img",      "input", "label", "li",    "main",
    "nav",    "ol",      "option", "p",    "section",  "select", "small", "span", "strong",
    "table",  "tbody",   "td",    "textarea", "th",    "thead", "title", "tr",    "ul",
};

constexpr std::array kVoidTags = {"br", "hr", "img", "input"};

void count_nodes(const DomNode& node, std::size_t& n) {
  ++n;
  for (const auto& child : node.children) count_nodes(child, n);
}

void number(DomNode& node, int& next) {
  node.id = next++;
  for (auto& child : node.children) number(child, next);
}

void append_text(const DomNode& node, std::string& out) {
  if (node.is_text()) {
    out += node.text;
    return;
  }
  for (const auto& child : node.children) append_text(child, out);
}

}  // namespace

DomNode DomNode::element(std::string tag, std::map<std::string, std::string> attributes,
                         std::vector<DomNode> children) {
  DomNode node;
  node.kind = NodeKind::element;
  node.tag = std::move(tag);
  node.attributes = std::move(attributes);
  node.children = std::move(children);
  return node;
}

DomNode DomNode::text_node(std::string text) {
  DomNode node;
  node.kind = NodeKind::text;
  node.text = std::move(text);
  return node;
}

const std::string* DomNode::attr(std::string_view name) const {
  auto it = attributes.find(std::string(name));
  return it == attributes.end() ? nullptr : &it->second;
}

std::size_t DomTree::size() const {
  std::size_t n = 0;
  for (const auto& root : roots) count_nodes(root, n);
  return n;
}

void assign_ids(DomTree& tree) {
  int next = 1;
  for (auto& root : tree.roots) number(root, next);
}

bool structurally_equal(const DomNode& a, const DomNode& b) {
  if (a.kind != b.kind || a.tag != b.tag || a.attributes != b.attributes || a.text != b.text ||
      a.children.size() != b.children.size()) {
    return false;
  }
  for (std::size_t i = 0; i < a.children.size(); ++i) {
    if (!structurally_equal(a.children[i], b.children[i])) return false;
  }
  return true;
}

bool structurally_equal(const DomTree& a, const DomTree& b) {
  if (a.roots.size() != b.roots.size()) return false;
  for (std::size_t i = 0; i < a.roots.size(); ++i) {
    if (!structurally_equal(a.roots[i], b.roots[i])) return false;
  }
  return true;
}

std::string text_content(const DomNode& node) {
  std::string out;
  append_text(node, out);
  return out;
}

bool is_known_tag(std::string_view tag) {
  return std::find(kKnownTags.begin(), kKnownTags.end(), tag) != kKnownTags.end();
}

bool is_void_element(std::string_view tag) {
  return std::find(kVoidTags.begin(), kVoidTags.end(), tag) != kVoidTags.end();
}

DomIndex::DomIndex(const DomTree& tree) {
  const std::size_t n = tree.size();
  by_id_.assign(n + 1, nullptr);
  parent_.assign(n + 1, 0);
  order_.reserve(n);

  struct Frame {
    const DomNode* node;
    int parent;
  };
  std::vector<Frame> stack;
  for (auto it = tree.roots.rbegin(); it != tree.roots.rend(); ++it) stack.push_back({&*it, 0});
  while (!stack.empty()) {
    Frame f = stack.back();
    stack.pop_back();
    order_.push_back(f.node);
    const int id = f.node->id;
    if (id > 0 && static_cast<std::size_t>(id) <= n) {
      by_id_[id] = f.node;
      parent_[id] = f.parent;
    }
    for (auto it = f.node->children.rbegin(); it != f.node->children.rend(); ++it) {
      stack.push_back({&*it, id});
    }
  }
}

const DomNode* DomIndex::node(int id) const {
  if (id <= 0 || static_cast<std::size_t>(id) >= by_id_.size()) return nullptr;
  return by_id_[id];
}

int DomIndex::parent(int id) const {
  if (id <= 0 || static_cast<std::size_t>(id) >= parent_.size()) return 0;
  return parent_[id];
}

bool DomIndex::is_ancestor_or_self(int ancestor, int id) const {
  while (id > 0) {
    if (id == ancestor) return true;
    id = parent(id);
  }
  return false;
}

}  // namespace webstress::dom
