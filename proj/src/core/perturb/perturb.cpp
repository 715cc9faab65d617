#include "perturb/perturb.hpp"

#include <algorithm>
#include <cstdio>
#include <stdexcept>

namespace webstress::perturb {

using dom::DomNode;

namespace {

constexpr double kChaosRate = 0.4;
constexpr double kMinScale = 0.6, kMaxScale = 1.8;
constexpr double kMaxRotation = 15.0;
constexpr double kMaxShift = 40.0;

constexpr std::array kJunkNames = {"data-v", "data-track", "data-ref", "data-cid"};

bool is_decoy_candidate(const DomNode& n) {
  return n.tag == "button" || n.tag == "a" || n.tag == "input";
}

bool text_is_protected(std::string_view parent_tag) {
  return parent_tag == "textarea" || parent_tag == "title";
}

bool has_visible_text(const std::string& s) {
  return std::any_of(s.begin(), s.end(), [](char c) { return c != ' ' && c != '\n' && c != '\t' && c != '\r'; });
}

std::string hex(std::uint64_t v, int digits) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out(static_cast<std::size_t>(digits), '0');
  for (int i = digits - 1; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = kDigits[v & 0xF];
    v >>= 4;
  }
  return out;
}

std::string fixed2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

void append_style(DomNode& node, const std::string& css) {
  auto& style = node.attributes["style"];
  if (!style.empty() && style.back() != ';') style += ";";
  if (!style.empty()) style += " ";
  style += css;
}

// Renumbers in pre-order. Before the call each node's id holds its origin.
void renumber(DomNode& node, int& next, std::vector<int>& origin) {
  origin.push_back(node.id);
  node.id = next++;
  for (auto& child : node.children) renumber(child, next, origin);
}

PerturbedDom finish(dom::DomTree tree, NoiseStats stats) {
  PerturbedDom out;
  out.origin.push_back(site::kInert);  // index 0 is unused
  int next = 1;
  for (auto& root : tree.roots) renumber(root, next, out.origin);
  out.tree = std::move(tree);
  out.stats = std::move(stats);
  return out;
}

void mark_inert(DomNode& node) {
  node.id = site::kInert;
  node.attributes.erase("id");
  for (auto& child : node.children) mark_inert(child);
}

class Chaos {
 public:
  Chaos(const PerturbConfig& config, const StreamKey& key) : rate_(config.chaos_magnitude * kChaosRate), rng_(key, "chaos") {}

  void apply(DomNode& node, bool in_body, NoiseStats& stats) {
    if (!node.is_element()) return;
    if (in_body) {
      if (rng_.bernoulli(rate_)) {
        const double scale = rng_.uniform(kMinScale, kMaxScale);
        const double rotation = rng_.uniform(-kMaxRotation, kMaxRotation);
        const double dx = rng_.uniform(-kMaxShift, kMaxShift);
        const double dy = rng_.uniform(-kMaxShift, kMaxShift);
        append_style(node, "transform: translate(" + fixed2(dx) + "px, " + fixed2(dy) + "px) rotate(" +
                               fixed2(rotation) + "deg); font-size: " + fixed2(scale) + "em;");
        ++stats.chaos_styled;
        stats.perturbed_attributes.insert(std::to_string(node.id) + ":style");
      }
    }
    const bool child_in_body = in_body || node.tag == "body";
    for (auto& child : node.children) apply(child, child_in_body, stats);
  }

 private:
  double rate_;
  RngStream rng_;
};

class Noise {
 public:
  Noise(const PerturbConfig& config, const StreamKey& key)
      : density_(config.noise_density),
        decoy_(key, "noise.decoy"),
        fragment_(key, "noise.fragment"),
        attr_(key, "noise.attr"),
        encode_(key, "noise.encode") {}

  // Returns the replacement nodes for `node`. Node ids of the result hold
  // provenance until renumbering.
  std::vector<DomNode> transform(const DomNode& node, bool in_body, std::string_view parent_tag, NoiseStats& stats) {
    if (node.is_text()) return transform_text(node, in_body, parent_tag, stats);

    DomNode out = DomNode::element(node.tag, node.attributes);
    out.id = node.id;
    if (in_body) perturb_attributes(out, node.id, stats);
    const bool child_in_body = in_body || node.tag == "body";
    for (const auto& child : node.children) {
      for (auto& c : transform(child, child_in_body, node.tag, stats)) out.children.push_back(std::move(c));
    }

    std::vector<DomNode> result;
    if (in_body && is_decoy_candidate(node) && decoy_.bernoulli(density_)) {
      DomNode decoy = node;
      mark_inert(decoy);
      decoy.attributes["style"] = "display:none";
      decoy.attributes["aria-hidden"] = "true";
      result.push_back(std::move(decoy));
      ++stats.decoys;
    }
    result.push_back(std::move(out));
    return result;
  }

  void encode_pass(const DomNode& node, bool in_body, std::string_view parent_tag, PerturbedDom& out) {
    if (node.is_text()) {
      if (in_body && !text_is_protected(parent_tag) && has_visible_text(node.text) && encode_.bernoulli(density_)) {
        out.over_encoded.insert(node.id);
        ++out.stats.encoded;
      }
      return;
    }
    const bool child_in_body = in_body || node.tag == "body";
    for (const auto& child : node.children) encode_pass(child, child_in_body, node.tag, out);
  }

 private:
  void perturb_attributes(DomNode& node, int canonical_id, NoiseStats& stats) {
    if (!attr_.bernoulli(density_)) return;
    const std::string junk = std::string(kJunkNames[attr_.below(kJunkNames.size())]) + "-" + hex(attr_.next(), 4);
    node.attributes[junk] = hex(attr_.next(), 8);
    stats.perturbed_attributes.insert(std::to_string(canonical_id) + ":" + junk);
    auto it = node.attributes.find("class");
    if (it != node.attributes.end() && !it->second.empty()) {
      const std::string suffix = "_" + hex(attr_.next(), 5);
      std::string rewritten;
      std::size_t i = 0;
      const std::string& v = it->second;
      while (i < v.size()) {
        if (v[i] == ' ') {
          rewritten += v[i++];
          continue;
        }
        std::size_t j = i;
        while (j < v.size() && v[j] != ' ') ++j;
        rewritten += v.substr(i, j - i) + suffix;
        i = j;
      }
      it->second = rewritten;
      stats.perturbed_attributes.insert(std::to_string(canonical_id) + ":class");
    }
  }

  std::vector<DomNode> transform_text(const DomNode& node, bool in_body, std::string_view parent_tag,
                                      NoiseStats& stats) {
    DomNode copy = node;
    if (!in_body || text_is_protected(parent_tag) || !has_visible_text(node.text)) return {copy};

    // Candidate cut points sit on UTF-8 character boundaries.
    std::vector<std::size_t> cuts;
    for (std::size_t i = 1; i < node.text.size(); ++i) {
      if ((static_cast<unsigned char>(node.text[i]) & 0xC0) != 0x80) cuts.push_back(i);
    }
    if (cuts.empty() || !fragment_.bernoulli(density_)) return {copy};

    const std::size_t pieces = std::min<std::size_t>(2 + fragment_.below(3), cuts.size() + 1);
    // Partial Fisher-Yates picks pieces-1 distinct cut points.
    for (std::size_t i = 0; i + 1 < pieces; ++i) {
      const std::size_t j = i + fragment_.below(cuts.size() - i);
      std::swap(cuts[i], cuts[j]);
    }
    std::vector<std::size_t> chosen(cuts.begin(), cuts.begin() + static_cast<std::ptrdiff_t>(pieces - 1));
    std::sort(chosen.begin(), chosen.end());

    std::vector<DomNode> spans;
    std::size_t start = 0;
    chosen.push_back(node.text.size());
    for (std::size_t cut : chosen) {
      DomNode text = DomNode::text_node(node.text.substr(start, cut - start));
      text.id = site::kInserted;
      DomNode span = DomNode::element("span", {}, {std::move(text)});
      span.id = site::kInserted;
      spans.push_back(std::move(span));
      start = cut;
    }
    ++stats.fragments;
    return spans;
  }

  double density_;
  RngStream decoy_;
  RngStream fragment_;
  RngStream attr_;
  RngStream encode_;
};

}  // namespace

std::string_view to_string(Mode m) {
  switch (m) {
    case Mode::clean: return "clean";
    case Mode::chaos: return "chaos";
    case Mode::noise: return "noise";
    case Mode::failure: return "failure";
    case Mode::popup: return "popup";
    case Mode::remap_explicit: return "remapE";
    case Mode::remap: return "remap";
  }
  return "clean";
}

std::optional<Mode> parse_mode(std::string_view s) {
  for (Mode m : kAllModes) {
    if (to_string(m) == s) return m;
  }
  if (s == "pop-up") return Mode::popup;
  return std::nullopt;
}

bool is_remap(Mode m) { return m == Mode::remap || m == Mode::remap_explicit; }

void PerturbConfig::validate() const {
  const auto check = [](double p, const char* name) {
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument(std::string(name) + " must lie in [0, 1]");
  };
  check(failure_p, "failure_p");
  check(popup_f, "popup_f");
  check(chaos_magnitude, "chaos_magnitude");
  check(noise_density, "noise_density");
}

std::string PerturbedDom::serialize() const {
  dom::SerializeOptions options;
  options.over_encode = &over_encoded;
  return dom::serialize(tree, options);
}

PerturbedDom perturb_dom(const dom::DomTree& canonical, const PerturbConfig& config, const StreamKey& key) {
  NoiseStats stats;
  if (config.mode == Mode::chaos) {
    dom::DomTree tree = canonical;
    Chaos chaos(config, key);
    for (auto& root : tree.roots) chaos.apply(root, false, stats);
    PerturbedDom out;
    out.origin.assign(tree.size() + 1, 0);
    for (std::size_t i = 0; i < out.origin.size(); ++i) out.origin[i] = static_cast<int>(i);
    out.tree = std::move(tree);
    out.stats = std::move(stats);
    return out;
  }
  if (config.mode == Mode::noise) {
    Noise noise(config, key);
    dom::DomTree tree;
    for (const auto& root : canonical.roots) {
      for (auto& n : noise.transform(root, false, "", stats)) tree.roots.push_back(std::move(n));
    }
    PerturbedDom out = finish(std::move(tree), std::move(stats));
    for (const auto& root : out.tree.roots) noise.encode_pass(root, false, "", out);
    return out;
  }
  PerturbedDom out;
  out.tree = canonical;
  out.origin.assign(canonical.size() + 1, 0);
  for (std::size_t i = 0; i < out.origin.size(); ++i) out.origin[i] = static_cast<int>(i);
  return out;
}

bool inject_failure(const StreamKey& key, const PerturbConfig& config, site::ActionType action) {
  if (config.mode != Mode::failure) return false;
  if (action != site::ActionType::click && action != site::ActionType::fill && action != site::ActionType::type) {
    return false;
  }
  return RngStream(key, "failure").bernoulli(config.failure_p);
}

site::ModalDescriptor make_modal(site::ModalVariant variant) {
  switch (variant) {
    case site::ModalVariant::confirm_ok:
      return {variant, "Your session is about to expire. Confirm to stay signed in.", "modal-ok"};
    case site::ModalVariant::decline_offer:
      return {variant, "Get 10% off your next order! Would you like to subscribe to our newsletter?", "modal-decline"};
    case site::ModalVariant::close_icon:
      return {variant, "We value your feedback. Would you take a short survey about this site?", "modal-close"};
  }
  return {variant, "", "modal-ok"};
}

std::optional<site::ModalDescriptor> maybe_spawn_popup(const site::EnvState& state, const PerturbConfig& config,
                                                       const StreamKey& key) {
  if (config.mode != Mode::popup || state.ui.modal || state.terminated) return std::nullopt;
  RngStream rng(key, "popup");
  if (!rng.bernoulli(config.popup_f)) return std::nullopt;
  return make_modal(static_cast<site::ModalVariant>(rng.below(3)));
}

GateDecision remap_gate(const site::SiteSpec& spec, const site::EnvState& state, const site::ResolvedTarget& click) {
  if (!click.target || click.target->kind != site::Target::Kind::trigger) return GateDecision::pass;
  if (!spec.remap_eligible(click.target->element_key)) return GateDecision::pass;
  const site::Selection here{click.target->element_key, click.target->entity_id};
  if (state.ui.selected && *state.ui.selected == here) return GateDecision::fire;
  return GateDecision::select;
}

}  // namespace webstress::perturb
