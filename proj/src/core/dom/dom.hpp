#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace webstress::dom {

enum class NodeKind { element, text };

// A node of the canonical page model. Element nodes carry a lowercase tag and
// an attribute map; text nodes carry decoded text and nothing else.
struct DomNode {
  int id = 0;
  NodeKind kind = NodeKind::element;
  std::string tag;
  std::map<std::string, std::string> attributes;
  std::string text;
  std::vector<DomNode> children;

  static DomNode element(std::string tag, std::map<std::string, std::string> attributes = {},
                         std::vector<DomNode> children = {});
  static DomNode text_node(std::string text);

  bool is_element() const { return kind == NodeKind::element; }
  bool is_text() const { return kind == NodeKind::text; }
  const std::string* attr(std::string_view name) const;
};

// A parsed fragment or document. Top-level nodes are kept in order; a full
// page has a single <html> root.
struct DomTree {
  std::vector<DomNode> roots;

  std::size_t size() const;
};

// Assigns node ids 1..N in pre-order.
void assign_ids(DomTree& tree);

// Structural equality: kinds, tags, attributes, text and child order. Ids are
// ignored.
bool structurally_equal(const DomNode& a, const DomNode& b);
bool structurally_equal(const DomTree& a, const DomTree& b);

// Concatenation of all descendant text.
std::string text_content(const DomNode& node);

bool is_known_tag(std::string_view tag);
bool is_void_element(std::string_view tag);

// Flat pre-order view over a tree with dense ids (as produced by assign_ids).
class DomIndex {
 public:
  explicit DomIndex(const DomTree& tree);

  const DomNode* node(int id) const;
  // 0 for top-level nodes and unknown ids.
  int parent(int id) const;
  std::span<const DomNode* const> preorder() const { return order_; }
  bool is_ancestor_or_self(int ancestor, int id) const;

 private:
  std::vector<const DomNode*> by_id_;
  std::vector<int> parent_;
  std::vector<const DomNode*> order_;
};

enum class ParseErrorKind {
  unbalanced_tag,
  stray_close_tag,
  malformed_attribute,
  malformed_tag,
  unknown_entity,
  unknown_tag,
};

std::string_view to_string(ParseErrorKind kind);

class ParseError : public std::runtime_error {
 public:
  ParseError(ParseErrorKind kind, std::size_t offset, const std::string& detail);

  ParseErrorKind kind() const { return kind_; }
  std::size_t offset() const { return offset_; }

 private:
  ParseErrorKind kind_;
  std::size_t offset_;
};

// Parses the supported HTML subset (see docs/html-subset.md). Node ids are
// assigned in document order starting at 1.
DomTree parse_html(std::string_view text);

// Decodes character references in `text`. Throws ParseError(unknown_entity)
// with offsets relative to `base_offset`.
std::string decode_entities(std::string_view text, std::size_t base_offset = 0);

struct SerializeOptions {
  // Text node ids whose printable characters are emitted as numeric
  // character references.
  const std::unordered_set<int>* over_encode = nullptr;
};

// Canonical form: attributes in name order, minimal escaping.
std::string serialize(const DomTree& tree, const SerializeOptions& options = {});
std::string serialize(const DomNode& node, const SerializeOptions& options = {});

}  // namespace webstress::dom
