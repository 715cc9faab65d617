#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "dom/dom.hpp"

namespace webstress::dom {

struct AttrTest {
  std::string name;
  std::string value;

  bool operator==(const AttrTest&) const = default;
};

// One compound selector. Combinators are intentionally absent; see
// docs/selectors.md for the accepted forms.
struct Selector {
  std::optional<std::string> tag;
  std::optional<std::string> id;
  std::vector<std::string> classes;  // sorted, unique
  std::vector<AttrTest> attr_tests;
  std::optional<std::string> has_text;
  std::optional<std::string> exact_text;

  bool operator==(const Selector&) const = default;
};

class SelectorError : public std::runtime_error {
 public:
  SelectorError(std::size_t position, const std::string& detail);
  std::size_t position() const { return position_; }

 private:
  std::size_t position_;
};

Selector parse_selector(std::string_view text);

// Renders a selector back into the accepted syntax.
std::string to_string(const Selector& selector);

// Ids of matching elements in document order.
std::vector<int> query(const DomTree& tree, const Selector& selector);

}  // namespace webstress::dom
