#include <gtest/gtest.h>

#include <map>

#include "dom/selector.hpp"
#include "perturb/perturb.hpp"
#include "perturb/rng.hpp"
#include "site/kernel.hpp"
#include "support/catalog.hpp"

namespace webstress {
namespace {

using perturb::Mode;
using perturb::PerturbConfig;
using perturb::StreamKey;

site::RenderedPage shop_home() {
  const auto& spec = testing::bundled_site("shop");
  return site::render(spec, site::reset(spec, {}));
}

PerturbConfig config(Mode m, std::uint64_t seed = 42) {
  PerturbConfig c;
  c.mode = m;
  c.seed = seed;
  return c;
}

StreamKey key_for(const PerturbConfig& c, std::uint64_t step = 0) {
  return {c.seed, perturb::fnv1a("shop-search-open"), step};
}

// Reference vectors computed with an independent implementation of
// FNV-1a, SplitMix64 and xoshiro256**.
TEST(Rng, ReferenceVectors) {
  EXPECT_EQ(perturb::fnv1a(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(perturb::fnv1a("a"), 0xaf63dc4c8601ec8cULL);
  EXPECT_EQ(perturb::fnv1a("shop-checkout"), 0x54cc372932a3ff48ULL);
  EXPECT_EQ(perturb::mix64(0x9e3779b97f4a7c15ULL), 0xe220a8397b1dcdafULL);

  perturb::RngStream a({42, perturb::fnv1a("shop-checkout"), 3}, "failure");
  EXPECT_EQ(a.next(), 0x4d94d0d40cf09c77ULL);
  EXPECT_EQ(a.next(), 0x58d6bf4d924fa017ULL);
  EXPECT_EQ(a.next(), 0x274b7c3719d71905ULL);

  perturb::RngStream b({0, 0, 0}, "");
  EXPECT_EQ(b.next(), 0x875808cd4792f6a2ULL);
  EXPECT_EQ(b.next(), 0x4537da58edb3fe01ULL);
}

TEST(Rng, StreamsAreKeyedByPurposeAndStep) {
  const StreamKey k{7, 11, 2};
  EXPECT_EQ(perturb::RngStream(k, "x").next(), perturb::RngStream(k, "x").next());
  EXPECT_NE(perturb::RngStream(k, "x").next(), perturb::RngStream(k, "y").next());
  EXPECT_NE(perturb::RngStream(k, "x").next(), perturb::RngStream({7, 11, 3}, "x").next());
}

TEST(Rng, RangesHold) {
  perturb::RngStream r({1, 2, 3}, "range");
  for (int i = 0; i < 10000; ++i) {
    const double u = r.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    ASSERT_LT(r.below(7), 7u);
  }
  EXPECT_EQ(r.below(0), 0u);
}

TEST(Modes, NamesRoundTrip) {
  for (Mode m : perturb::kAllModes) EXPECT_EQ(perturb::parse_mode(perturb::to_string(m)), m);
  EXPECT_EQ(perturb::parse_mode("pop-up"), Mode::popup);
  EXPECT_FALSE(perturb::parse_mode("typo"));
  EXPECT_TRUE(perturb::is_remap(Mode::remap));
  EXPECT_TRUE(perturb::is_remap(Mode::remap_explicit));
  EXPECT_FALSE(perturb::is_remap(Mode::popup));
}

TEST(Modes, ValidateRejectsOutOfRangeProbabilities) {
  PerturbConfig c;
  EXPECT_NO_THROW(c.validate());
  c.failure_p = 1.5;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = {};
  c.noise_density = -0.1;
  EXPECT_THROW(c.validate(), std::invalid_argument);
}

TEST(PerceptionStage, IdentityOutsideChaosAndNoise) {
  const auto page = shop_home();
  const std::string canonical = dom::serialize(page.tree);
  for (Mode m : {Mode::clean, Mode::failure, Mode::popup, Mode::remap, Mode::remap_explicit}) {
    const auto c = config(m);
    const auto v = perturb::perturb_dom(page.tree, c, key_for(c));
    EXPECT_EQ(v.serialize(), canonical);
    for (std::size_t i = 1; i < v.origin.size(); ++i) ASSERT_EQ(v.origin[i], static_cast<int>(i));
  }
}

TEST(PerceptionStage, ChaosOnlyRestyles) {
  const auto page = shop_home();
  const auto c = config(Mode::chaos);
  const auto v = perturb::perturb_dom(page.tree, c, key_for(c));
  EXPECT_GT(v.stats.chaos_styled, 0);
  EXPECT_EQ(v.tree.size(), page.tree.size());
  const dom::DomIndex before(page.tree), after(v.tree);
  int styled = 0;
  for (const auto* n : before.preorder()) {
    const auto* m = after.node(n->id);
    ASSERT_EQ(m->tag, n->tag);
    ASSERT_EQ(m->text, n->text);
    auto attrs = m->attributes;
    if (attrs.erase("style")) {
      ++styled;
      EXPECT_NE(m->attr("style")->find("rotate("), std::string::npos);
    }
    EXPECT_EQ(attrs, n->attributes);
  }
  EXPECT_EQ(styled, v.stats.chaos_styled);
  EXPECT_EQ(perturb::perturb_dom(page.tree, c, key_for(c)).serialize(), v.serialize());
}

TEST(PerceptionStage, NoiseIsSeededAndStable) {
  const auto page = shop_home();
  const auto c = config(Mode::noise, 42);
  const auto v = perturb::perturb_dom(page.tree, c, key_for(c));
  EXPECT_EQ(perturb::perturb_dom(page.tree, c, key_for(c)).serialize(), v.serialize());
  const auto other = config(Mode::noise, 43);
  EXPECT_NE(perturb::perturb_dom(page.tree, other, key_for(other)).serialize(), v.serialize());

  // Frozen counts for seed 42 on the shop home page.
  EXPECT_EQ(v.stats.decoys, 8);
  EXPECT_EQ(v.stats.fragments, 20);
  EXPECT_EQ(v.stats.encoded, 38);
  EXPECT_EQ(v.stats.perturbed_attributes.size(), 49u);
}

TEST(PerceptionStage, NoiseDensityScalesPerturbation) {
  const auto page = shop_home();
  auto lo = config(Mode::noise, 5), hi = config(Mode::noise, 5);
  lo.noise_density = 0.1;
  hi.noise_density = 0.9;
  const auto a = perturb::perturb_dom(page.tree, lo, key_for(lo));
  const auto b = perturb::perturb_dom(page.tree, hi, key_for(hi));
  EXPECT_LT(a.stats.decoys + a.stats.fragments + a.stats.encoded, b.stats.decoys + b.stats.fragments + b.stats.encoded);
  lo.noise_density = 0.0;
  EXPECT_EQ(perturb::perturb_dom(page.tree, lo, key_for(lo)).stats.decoys, 0);
}

TEST(PerceptionStage, NoiseKeepsIdsAndTextOfRealElements) {
  const auto page = shop_home();
  const auto c = config(Mode::noise, 42);
  const auto v = perturb::perturb_dom(page.tree, c, key_for(c));
  const dom::DomIndex canon(page.tree), view(v.tree);
  for (const auto* n : canon.preorder()) {
    const std::string* id = n->attr("id");
    if (!id) continue;
    dom::Selector s;
    s.id = *id;
    const auto hits = dom::query(v.tree, s);
    ASSERT_EQ(hits.size(), 1u) << *id;
    EXPECT_EQ(v.origin[hits[0]], n->id);
    EXPECT_EQ(dom::text_content(*view.node(hits[0])).size() >= dom::text_content(*n).size(), true);
  }
}

TEST(PerceptionStage, DecoysAreHiddenAndInert) {
  const auto& spec = testing::bundled_site("shop");
  const auto state = site::reset(spec, {});
  const auto page = site::render(spec, state);
  const auto c = config(Mode::noise, 42);
  const auto v = perturb::perturb_dom(page.tree, c, key_for(c));
  const dom::DomIndex view(v.tree);
  int decoys = 0;
  for (const auto* n : view.preorder()) {
    if (v.origin[n->id] != site::kInert || !n->is_element()) continue;
    const int parent = view.parent(n->id);
    if (parent && v.origin[parent] == site::kInert) continue;
    ++decoys;
    EXPECT_EQ(*n->attr("style"), "display:none");
    EXPECT_EQ(*n->attr("aria-hidden"), "true");
    EXPECT_FALSE(n->attr("id"));
  }
  EXPECT_EQ(decoys, v.stats.decoys);

  // A selector that hits a decoy before the real element resolves to nothing.
  const auto sel = dom::parse_selector("a:has-text(\"Cart\")");
  const auto r = site::resolve(page, v.tree, v.origin, sel);
  ASSERT_TRUE(r.resolved);
  if (v.origin[dom::query(v.tree, sel).front()] == site::kInert) {
    EXPECT_FALSE(r.resolved->target);
    const auto t = site::transition(spec, state, site::KernelAction{site::ActionType::click, r.resolved, {}, {}});
    EXPECT_EQ(t.outcome.kind, site::OutcomeKind::no_effect);
    EXPECT_EQ(t.state, state);
  }
}

TEST(ExecutionStage, FailureOnlyHitsClickFillType) {
  auto c = config(Mode::failure);
  c.failure_p = 1.0;
  for (auto t : {site::ActionType::click, site::ActionType::fill, site::ActionType::type}) {
    EXPECT_TRUE(perturb::inject_failure({1, 2, 3}, c, t));
  }
  for (auto t : {site::ActionType::hotkey, site::ActionType::wait, site::ActionType::done, site::ActionType::fail}) {
    EXPECT_FALSE(perturb::inject_failure({1, 2, 3}, c, t));
  }
  EXPECT_FALSE(perturb::inject_failure({1, 2, 3}, config(Mode::clean), site::ActionType::click));
}

TEST(ExecutionStage, FailureRateTracksProbability) {
  const auto c = config(Mode::failure, 9);
  int drops = 0;
  for (std::uint64_t i = 0; i < 20000; ++i) drops += perturb::inject_failure({9, 77, i}, c, site::ActionType::click);
  EXPECT_NEAR(drops / 20000.0, 0.35, 0.015);
}

TEST(ExecutionStage, PopupsAreDrawnPerStep) {
  const auto c = config(Mode::popup, 3);
  site::EnvState s;
  std::map<site::ModalVariant, int> variants;
  int spawned = 0;
  for (std::uint64_t i = 0; i < 6000; ++i) {
    if (auto m = perturb::maybe_spawn_popup(s, c, {3, 5, i})) {
      ++spawned;
      ++variants[m->variant];
    }
  }
  EXPECT_NEAR(spawned / 6000.0, 0.30, 0.02);
  ASSERT_EQ(variants.size(), 3u);
  for (const auto& [v, n] : variants) EXPECT_NEAR(n / static_cast<double>(spawned), 1.0 / 3, 0.04);

  s.ui.modal = perturb::make_modal(site::ModalVariant::confirm_ok);
  auto always = c;
  always.popup_f = 1.0;
  EXPECT_FALSE(perturb::maybe_spawn_popup(s, always, {3, 5, 0}));
  s.ui.modal.reset();
  s.terminated = true;
  EXPECT_FALSE(perturb::maybe_spawn_popup(s, always, {3, 5, 0}));
  EXPECT_FALSE(perturb::maybe_spawn_popup({}, config(Mode::clean), {3, 5, 0}));
}

TEST(ExecutionStage, ModalVariantsDismissWithTheirOwnControl) {
  EXPECT_EQ(perturb::make_modal(site::ModalVariant::confirm_ok).dismiss_key, "modal-ok");
  EXPECT_EQ(perturb::make_modal(site::ModalVariant::decline_offer).dismiss_key, "modal-decline");
  EXPECT_EQ(perturb::make_modal(site::ModalVariant::close_icon).dismiss_key, "modal-close");
}

TEST(ExecutionStage, ModalInterceptsUntilDismissed) {
  const auto& spec = testing::bundled_site("shop");
  auto s = site::reset(spec, {});
  s.ui.modal = perturb::make_modal(site::ModalVariant::decline_offer);
  auto page = site::render(spec, s);
  const auto nav = site::resolve(page, dom::parse_selector("#nav-cart"));
  auto r = site::transition(spec, s, {site::ActionType::click, nav.resolved, {}, {}});
  EXPECT_EQ(r.outcome.kind, site::OutcomeKind::no_effect);
  EXPECT_EQ(r.state.route, "/");
  EXPECT_TRUE(site::resolve(page, dom::parse_selector("#modal-ok")).rejection);
  const auto dismiss = site::resolve(page, dom::parse_selector("#modal-decline"));
  r = site::transition(spec, s, {site::ActionType::click, dismiss.resolved, {}, {}});
  EXPECT_EQ(r.outcome.kind, site::OutcomeKind::executed);
  EXPECT_FALSE(r.state.ui.modal);
}

TEST(SemanticStage, GateSelectsThenFires) {
  const auto& spec = testing::bundled_site("shop");
  auto s = site::reset(spec, {});
  s.route = "/cart";
  const auto page = site::render(spec, s);
  const auto checkout = *site::resolve(page, dom::parse_selector("#checkout-btn")).resolved;
  const auto nav = *site::resolve(page, dom::parse_selector("#nav-home")).resolved;
  EXPECT_EQ(perturb::remap_gate(spec, s, checkout), perturb::GateDecision::select);
  s.ui.selected = site::Selection{"checkout", ""};
  EXPECT_EQ(perturb::remap_gate(spec, s, checkout), perturb::GateDecision::fire);
  EXPECT_EQ(perturb::remap_gate(spec, s, nav), perturb::GateDecision::pass);
}

TEST(SemanticStage, SelectionIsPerEntity) {
  const auto& spec = testing::bundled_site("calendar");
  auto s = site::reset(spec, {});
  s.route = "/event";
  s.store.find("current")->fields["event"] = std::string("event-1");
  const auto page = site::render(spec, s);
  const auto cancel = *site::resolve(page, dom::parse_selector("#cancel-event")).resolved;
  s.ui.selected = site::Selection{"cancel-event", "event-2"};
  EXPECT_EQ(perturb::remap_gate(spec, s, cancel), perturb::GateDecision::select);
}

TEST(SemanticStage, DefaultRemapSetCoversNavigationAndSubmission) {
  auto spec = testing::bundled_site("notes");
  spec.remap_set.reset();
  EXPECT_TRUE(spec.remap_eligible("nav-new"));
  EXPECT_TRUE(spec.remap_eligible("save-note"));
  EXPECT_FALSE(spec.remap_eligible("pin-note"));
  EXPECT_FALSE(testing::bundled_site("notes").remap_eligible("nav-new"));
}

}  // namespace
}  // namespace webstress
