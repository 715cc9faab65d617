#include <gtest/gtest.h>

#include <algorithm>

#include "dom/selector.hpp"
#include "site/kernel.hpp"
#include "site/loader.hpp"
#include "support/catalog.hpp"
#include "support/oracles.hpp"

namespace webstress {
namespace {

using site::ActionType;
using site::EnvState;
using site::KernelAction;
using site::OutcomeKind;
using testing::bundled_site;

site::ResolvedTarget must_resolve(const site::SiteSpec& spec, const EnvState& s, const std::string& selector) {
  const auto page = site::render(spec, s);
  auto r = site::resolve(page, dom::parse_selector(selector));
  EXPECT_TRUE(r.resolved.has_value()) << selector;
  return r.resolved.value_or(site::ResolvedTarget{});
}

site::TransitionResult click(const site::SiteSpec& spec, const EnvState& s, const std::string& selector) {
  return site::transition(spec, s, KernelAction{ActionType::click, must_resolve(spec, s, selector), {}, {}});
}

site::TransitionResult fill(const site::SiteSpec& spec, const EnvState& s, const std::string& selector,
                            const std::string& text) {
  return site::transition(spec, s, KernelAction{ActionType::fill, must_resolve(spec, s, selector), text, {}});
}

EnvState initial(const std::string& site_id) { return site::reset(bundled_site(site_id), {}); }

bool has_problem(const site::SiteError& e, const std::string& needle) {
  return std::any_of(e.problems().begin(), e.problems().end(),
                     [&](const std::string& p) { return p.find(needle) != std::string::npos; });
}

TEST(SiteLoader, LoadsBundledSites) {
  for (const char* id : {"shop", "notes", "calendar"}) {
    const auto& spec = bundled_site(id);
    EXPECT_EQ(spec.site_id, id);
    EXPECT_TRUE(spec.page("/"));
    EXPECT_FALSE(spec.initial_data.empty());
  }
}

TEST(SiteLoader, CollectsEveryProblem) {
  const char* doc = R"({
    "site_id": "broken",
    "schemas": {"item": [{"name": "n", "kind": "string"}, {"name": "m", "kind": "float"}]},
    "pages": [{"route": "/", "components": [
      {"tag": "button", "attrs": {"id": "go"}, "text": "Go", "key": "missing-behavior"},
      {"tag": "p", "text": "{count:ghost}"}
    ]}],
    "behaviors": {"x": {"navigate": "/nowhere"}},
    "initial_data": [{"type": "item", "id": "i1", "fields": {"n": true}}]
  })";
  try {
    site::load_site(doc);
    FAIL() << "expected SiteError";
  } catch (const site::SiteError& e) {
    EXPECT_GE(e.problems().size(), 4u);
    EXPECT_TRUE(has_problem(e, "float"));
    EXPECT_TRUE(has_problem(e, "missing-behavior"));
    EXPECT_TRUE(has_problem(e, "ghost"));
    EXPECT_TRUE(has_problem(e, "/nowhere"));
  }
}

TEST(SiteLoader, RejectsNonObjectDocument) {
  EXPECT_THROW(site::load_site("[]"), site::SiteError);
  EXPECT_ANY_THROW(site::load_site("{not json"));
}

TEST(SiteRender, ShopHomeMatchesSnapshot) {
  std::string snapshot = testing::read_file(WEBSTRESS_FIXTURE_DIR "/snapshots/shop_home.html");
  while (!snapshot.empty() && snapshot.back() == '\n') snapshot.pop_back();
  EXPECT_EQ(dom::serialize(site::render(bundled_site("shop"), initial("shop")).tree), snapshot);
}

TEST(SiteRender, IsAPureFunctionOfState) {
  const auto& spec = bundled_site("notes");
  const EnvState s = initial("notes");
  EXPECT_EQ(dom::serialize(site::render(spec, s).tree), dom::serialize(site::render(spec, s).tree));
}

TEST(SiteRender, RuleBannerOnlyWhenRequested) {
  const auto& spec = bundled_site("calendar");
  const EnvState s = initial("calendar");
  const auto with = site::render(spec, s, {true});
  const auto without = site::render(spec, s, {false});
  EXPECT_NE(with.banner, 0);
  EXPECT_EQ(without.banner, 0);
  EXPECT_EQ(dom::query(with.tree, dom::parse_selector("#interaction-notice")).size(), 1u);
  EXPECT_TRUE(dom::query(without.tree, dom::parse_selector("#interaction-notice")).empty());
}

TEST(SiteResolve, MapsSelectorToElementKey) {
  const auto& spec = bundled_site("shop");
  EnvState s = initial("shop");
  s.route = "/cart";
  const auto r = must_resolve(spec, s, "#checkout-btn");
  ASSERT_TRUE(r.target);
  EXPECT_EQ(r.target->element_key, "checkout");
}

TEST(SiteResolve, ResolvesListItemsWithTheirEntity) {
  const auto& spec = bundled_site("notes");
  const auto r = must_resolve(spec, initial("notes"), "#pin-note-2");
  ASSERT_TRUE(r.target);
  EXPECT_EQ(r.target->element_key, "pin-note");
  EXPECT_EQ(r.target->entity_id, "note-2");
}

TEST(SiteResolve, NoMatchIsRejected) {
  const auto page = site::render(bundled_site("shop"), initial("shop"));
  auto r = site::resolve(page, dom::parse_selector("#nonexistent"));
  EXPECT_FALSE(r.resolved);
  EXPECT_EQ(r.rejection, site::RejectReason::selector_no_match);
}

TEST(SiteTransition, NavigationTrigger) {
  const auto r = click(bundled_site("shop"), initial("shop"), "#nav-cart");
  EXPECT_EQ(r.outcome.kind, OutcomeKind::executed);
  EXPECT_EQ(r.state.route, "/cart");
}

TEST(SiteTransition, BehaviorlessClickHasNoEffect) {
  const EnvState s = initial("shop");
  const auto r = click(bundled_site("shop"), s, "h1");
  EXPECT_EQ(r.outcome.kind, OutcomeKind::no_effect);
  EXPECT_EQ(r.state, s);
}

TEST(SiteTransition, FillThenSaveCreatesNote) {
  const auto& spec = bundled_site("notes");
  EnvState s = click(spec, initial("notes"), "#nav-new").state;
  s = fill(spec, s, "#note-title", "Groceries").state;
  EXPECT_EQ(s.focused, (site::FieldRef{"new", "title"}));
  s = fill(spec, s, "#note-body", "Milk, eggs, bread").state;
  const auto r = click(spec, s, "#save-note");
  EXPECT_EQ(r.outcome.kind, OutcomeKind::executed);

  EnvState expected = initial("notes");
  expected.store.put(site::Entity{"note", "note-5",
                                  {{"title", std::string("Groceries")},
                                   {"body", std::string("Milk, eggs, bread")},
                                   {"pinned", false},
                                   {"archived", false}}});
  EXPECT_EQ(r.state.store, expected.store);
  EXPECT_EQ(r.state.route, "/");
  EXPECT_TRUE(r.state.form_buffer.empty());
  EXPECT_FALSE(r.state.focused);
}

TEST(SiteTransition, TypeNeedsFocus) {
  const auto& spec = bundled_site("notes");
  const EnvState s = click(spec, initial("notes"), "#nav-new").state;
  const auto r = site::transition(spec, s, KernelAction{ActionType::type, std::nullopt, "abc", {}});
  EXPECT_EQ(r.outcome.kind, OutcomeKind::rejected);
  EXPECT_EQ(r.outcome.reason, site::RejectReason::invalid_target);
}

TEST(SiteTransition, TypeAppendsAndCtrlAReplaces) {
  const auto& spec = bundled_site("notes");
  EnvState s = click(spec, initial("notes"), "#nav-new").state;
  s = click(spec, s, "#note-title").state;
  auto type = [&](const std::string& t) {
    s = site::transition(spec, s, KernelAction{ActionType::type, std::nullopt, t, {}}).state;
  };
  auto key = [&](const std::string& k) {
    return site::transition(spec, s, KernelAction{ActionType::hotkey, std::nullopt, {}, k});
  };
  type("Call ");
  type("mum");
  EXPECT_EQ(s.form_buffer.at({"new", "title"}), "Call mum");
  s = key("Ctrl+A").state;
  type("Call dentist");
  EXPECT_EQ(s.form_buffer.at({"new", "title"}), "Call dentist");
  EXPECT_EQ(key("F5").outcome.kind, OutcomeKind::no_effect);
  const auto enter = key("Enter");
  EXPECT_EQ(enter.outcome.kind, OutcomeKind::executed);
  EXPECT_EQ(enter.state.route, "/");
  ASSERT_TRUE(enter.state.store.find("note-5"));
}

TEST(SiteTransition, WaitDoneFail) {
  const auto& spec = bundled_site("shop");
  const EnvState s = initial("shop");
  EXPECT_EQ(site::transition(spec, s, KernelAction{ActionType::wait, {}, {}, {}}).outcome.kind,
            OutcomeKind::no_effect);
  const auto done = site::transition(spec, s, KernelAction{ActionType::done, {}, {}, {}});
  EXPECT_TRUE(done.state.terminated);
  EXPECT_EQ(done.state.claim, site::Claim::done);
  EXPECT_EQ(done.state.store, s.store);
  const auto fail = site::transition(spec, s, KernelAction{ActionType::fail, {}, {}, {}});
  EXPECT_EQ(fail.state.claim, site::Claim::fail);
}

TEST(SiteTransition, ToggleDeleteAndCount) {
  const auto& spec = bundled_site("notes");
  EnvState s = click(spec, initial("notes"), "#pin-note-2").state;
  EXPECT_EQ(std::get<bool>(s.store.find("note-2")->fields.at("pinned")), true);
  s = click(spec, s, "#pin-note-2").state;
  EXPECT_EQ(std::get<bool>(s.store.find("note-2")->fields.at("pinned")), false);
  s = click(spec, s, "#delete-note-1").state;
  EXPECT_FALSE(s.store.find("note-1"));
  const auto page = site::render(spec, s);
  EXPECT_EQ(dom::query(page.tree, dom::parse_selector("text=\"3 notes\"")).size(), 1u);
}

TEST(SiteTransition, FormSubmissionUsesCountsAndClearsCart) {
  const auto& spec = bundled_site("shop");
  EnvState s = click(spec, initial("shop"), "#open-p03").state;
  s = click(spec, s, "#add-to-cart").state;
  s = click(spec, s, "#add-to-cart").state;
  EXPECT_EQ(s.store.count("cart_item"), 2u);
  s = click(spec, s, "#nav-cart").state;
  s = click(spec, s, "#checkout-btn").state;
  s = fill(spec, s, "#ship-name", "Alex").state;
  s = fill(spec, s, "#ship-address", "1 Road").state;
  s = click(spec, s, "#place-order").state;
  EXPECT_EQ(s.store.count("cart_item"), 0u);
  const auto* order = s.store.find("order-1");
  ASSERT_TRUE(order);
  EXPECT_EQ(std::get<std::int64_t>(order->fields.at("items")), 2);
  EXPECT_EQ(std::get<std::string>(order->fields.at("name")), "Alex");
}

TEST(SiteState, DigestCoversContentOnly) {
  EnvState a = initial("notes");
  EnvState b = a;
  b.ui.selected = site::Selection{"save-note", ""};
  b.step = 9;
  EXPECT_EQ(site::content_digest(a), site::content_digest(b));
  b.route = "/new";
  EXPECT_NE(site::content_digest(a), site::content_digest(b));
  EXPECT_EQ(site::content_digest(a), "0226cd42e01e783f");
}

TEST(SiteState, SameInteractionStateIgnoresModalAndStep) {
  EnvState a = initial("shop");
  EnvState b = a;
  b.step = 4;
  b.ui.modal = site::ModalDescriptor{};
  EXPECT_TRUE(site::same_interaction_state(a, b));
  b.focused = site::FieldRef{"search", "q"};
  EXPECT_FALSE(site::same_interaction_state(a, b));
  EXPECT_TRUE(site::same_content(a, b));
}

TEST(SiteState, AllocatesIdsPastExistingRecords) {
  site::EntityStore store;
  store.put(site::Entity{"note", "note-1", {}});
  store.put(site::Entity{"note", "note-2", {}});
  EXPECT_EQ(store.allocate_id("note"), "note-3");
  EXPECT_EQ(store.allocate_id("order"), "order-1");
}

}  // namespace
}  // namespace webstress
