#pragma once

// Reference implementations the production code is checked against. They are
// deliberately naive and share no code with the library beyond data types.

#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "dom/dom.hpp"
#include "dom/selector.hpp"
#include "harness/record.hpp"

namespace webstress::testing {

// Element plus text node count of an HTML document, from a flat token scan.
// Comments and declarations are skipped; text runs separated only by
// comments count once.
std::size_t naive_node_count(std::string_view html);

// Every element of `tree` tested one by one against `sel`, in document order.
std::vector<int> brute_force_query(const dom::DomTree& tree, const dom::Selector& sel);

// Random markup over a small vocabulary so that selectors hit often.
std::string random_html(std::mt19937_64& rng);
dom::Selector random_selector(std::mt19937_64& rng);

struct RunStats {
  std::size_t total_repeats = 0;
  std::size_t max_run = 0;
  bool any_repeat = false;
};

// Classic run-length encoding over the serialized action identities.
RunStats rle_stats(const std::vector<std::string>& actions);

// A record with the given actions and nothing else of interest.
harness::RunRecord synthetic_record(const std::string& agent, perturb::Mode mode,
                                    const std::vector<nlohmann::json>& actions);

std::string read_file(const std::string& path);
std::vector<std::string> fixture_files(const std::string& dir, std::string_view extension);

}  // namespace webstress::testing
