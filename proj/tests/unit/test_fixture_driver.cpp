#include <gtest/gtest.h>

#include <fstream>
#include <thread>

#include "test_support.hpp"
#include "websynth/environment.hpp"
#include "websynth/util.hpp"

using namespace websynth;
using websynth::testkit::fixtures;

namespace {

std::unique_ptr<FixtureDriver> shop_driver(FixtureDriverOptions opts = {}) {
  auto d = std::make_unique<FixtureDriver>(opts);
  d->load(fixtures() / "shop");
  return d;
}

EnvErrorKind open_error(Driver& d, const std::string& url) {
  try {
    d.open(url, Viewport{});
  } catch (const EnvError& e) {
    return e.kind();
  }
  ADD_FAILURE() << "opened " << url;
  return EnvErrorKind::kProtocolError;
}

}  // namespace

TEST(SafetyPolicy, SubdomainsAndSchemes) {
  SafetyPolicy p;
  p.block("Example.COM");
  p.block(".bank.org");
  EXPECT_FALSE(p.allows("https://example.com/x"));
  EXPECT_FALSE(p.allows("https://a.b.example.com/"));
  EXPECT_TRUE(p.allows("https://notexample.com/"));
  EXPECT_FALSE(p.allows("http://login.bank.org"));
  EXPECT_FALSE(p.allows("ftp://ok.org/"));
  EXPECT_FALSE(p.allows("not a url"));
  EXPECT_THROW(p.check("https://example.com"), EnvError);
  EXPECT_NO_THROW(p.check("https://ok.org"));
}

TEST(SafetyPolicy, FromFileSkipsCommentsAndBlanks) {
  testkit::TempDir dir;
  std::ofstream(dir / "block.txt") << "# comment\n\nevil.com  # trailing\n  Bad.NET\n";
  auto p = SafetyPolicy::from_file(dir / "block.txt");
  EXPECT_EQ(p.blocked(), (std::set<std::string>{"bad.net", "evil.com"}));
}

TEST(MatchOption, ExactThenUniqueSubstring) {
  std::vector<std::string> opts = {"Beige", "Dark Grey", "Grey", "Blue"};
  EXPECT_EQ(match_option(opts, "grey"), 2u);
  EXPECT_EQ(match_option(opts, "dark"), 1u);
  EXPECT_EQ(match_option(opts, "e"), std::nullopt);
  EXPECT_EQ(match_option(opts, "Red"), std::nullopt);
  EXPECT_EQ(match_option(opts, ""), std::nullopt);
}

TEST(FixtureSite, EveryPageMatchesAuditedElements) {
  auto expected = nlohmann::json::parse(read_file(fixtures() / "shop" / "expected_elements.json"));
  auto site = FixtureSite::load(fixtures() / "shop");
  ASSERT_EQ(site->pages().size(), expected.size());
  for (const auto& [id, page] : site->pages()) {
    SCOPED_TRACE(id);
    const auto& want = expected.at(id);
    EXPECT_EQ(page.height(), want["height"].get<int>());
    auto snap = build_a11y(*page.doc, Viewport{}, 0, page.url);
    ASSERT_EQ(snap.elements.size(), want["elements"].size());
    for (std::size_t i = 0; i < snap.elements.size(); ++i) {
      const auto& e = want["elements"][i];
      EXPECT_EQ(snap.elements[i].name, e["name"].get<std::string>());
      EXPECT_EQ(snap.elements[i].role, e["role"].get<std::string>());
      auto b = e["bbox"].get<std::vector<int>>();
      EXPECT_EQ(snap.elements[i].bbox, (BBox{b[0], b[1], b[2], b[3]}));
    }
  }
}

TEST(FixtureSite, BadManifestsRejected) {
  auto base = fixtures() / "shop";
  nlohmann::json m = nlohmann::json::parse(read_file(base / "manifest.json"));
  auto missing_entry = m;
  missing_entry["entry"] = "nowhere";
  EXPECT_THROW(FixtureSite::from_json(missing_entry, base), std::invalid_argument);
  auto bad_transition = m;
  bad_transition["pages"][0]["transitions"] = {{"click [1]", "ghost"}};
  EXPECT_THROW(FixtureSite::from_json(bad_transition, base), std::invalid_argument);
  auto bad_action = m;
  bad_action["pages"][0]["transitions"] = {{"fly [1]", "deals"}};
  EXPECT_THROW(FixtureSite::from_json(bad_action, base), ActionError);
  auto dup = m;
  dup["pages"].push_back(m["pages"][0]);
  EXPECT_THROW(FixtureSite::from_json(dup, base), std::invalid_argument);
}

TEST(FixtureSite, RehostKeepsPaths) {
  auto site = FixtureSite::load(fixtures() / "shop", "shop-b");
  EXPECT_EQ(site->host(), "shop-b");
  EXPECT_EQ(site->page("sofa").url, "fixture://shop-b/sofa");
  EXPECT_NE(site->find_by_url("fixture://shop-b/sofa#top"), nullptr);
  EXPECT_EQ(site->search("  SOFA "), "search");
  EXPECT_EQ(site->search("lamp"), "serp");
}

TEST(FixtureDriver, OpenChecksSafetyFirst) {
  auto d = shop_driver();
  d->safety().block("shop");
  EXPECT_EQ(open_error(*d, "fixture://shop/home"), EnvErrorKind::kBlockedUrl);
  EXPECT_EQ(d->open_sessions(), 0);
  auto d2 = shop_driver();
  EXPECT_EQ(open_error(*d2, "fixture://shop/nowhere"), EnvErrorKind::kNoSuchFixturePage);
  EXPECT_EQ(open_error(*d2, "fixture://elsewhere/home"), EnvErrorKind::kNoSuchFixturePage);
  EXPECT_EQ(open_error(*d2, "javascript:alert(1)"), EnvErrorKind::kBlockedUrl);
}

TEST(FixtureDriver, ObserveHomepage) {
  auto d = shop_driver();
  auto s = d->open("fixture://shop/home", Viewport{});
  auto obs = s->observe();
  EXPECT_EQ(obs.url, "fixture://shop/home");
  EXPECT_EQ(obs.a11y.elements.size(), 12u);
  ASSERT_TRUE(obs.screenshot);
  EXPECT_EQ(obs.screenshot->width(), 1280);
  EXPECT_EQ(obs.screenshot->height(), 720);
  EXPECT_NE(*obs.som_screenshot, *obs.screenshot);
  EXPECT_EQ(obs.digest, s->digest());
  EXPECT_EQ(d->open_sessions(), 1);
}

TEST(FixtureDriver, HrefClickAndTransitions) {
  auto d = shop_driver();
  auto s = d->open("fixture://shop/home", Viewport{});
  auto r = s->execute(act::Click{ElementId{1}});
  EXPECT_TRUE(r.ok);
  EXPECT_TRUE(r.page_changed);
  EXPECT_EQ(s->url(), "fixture://shop/living");

  s->execute(act::Goto{"fixture://shop/sofa"});
  EXPECT_EQ(s->url(), "fixture://shop/sofa");
  EXPECT_TRUE(s->execute(act::Select{ElementId{6}, "dark grey"}).ok);
  EXPECT_EQ(s->url(), "fixture://shop/sofa");
  EXPECT_EQ(s->execute(act::Select{ElementId{6}, "Purple"}).error, EnvErrorKind::kNoSuchOption);
  s->execute(act::Click{ElementId{8}});
  EXPECT_EQ(s->url(), "fixture://shop/cart");
  s->execute(act::Click{ElementId{5}});
  EXPECT_EQ(s->url(), "fixture://shop/checkout");
}

TEST(FixtureDriver, TypeWildcardTransition) {
  auto d = shop_driver();
  auto s = d->open("fixture://shop/home", Viewport{});
  auto r = s->execute(act::Type{ElementId{5}, "anything at all"});
  EXPECT_TRUE(r.ok);
  EXPECT_EQ(s->url(), "fixture://shop/search");
}

TEST(FixtureDriver, TypeWithoutTransitionChangesDigestOnly) {
  auto d = shop_driver();
  auto s = d->open("fixture://shop/checkout", Viewport{});
  auto before = s->digest();
  auto r = s->execute(act::Type{ElementId{5}, "Jane Doe"});
  EXPECT_TRUE(r.page_changed);
  EXPECT_NE(s->digest(), before);
  EXPECT_EQ(s->url(), "fixture://shop/checkout");
}

TEST(FixtureDriver, ScrollClampsToPage) {
  auto d = shop_driver();
  auto s = d->open("fixture://shop/home", Viewport{});
  EXPECT_TRUE(s->execute(act::Scroll{ScrollDirection::kDown}).page_changed);
  EXPECT_EQ(s->scroll_y(), 720);
  s->execute(act::Scroll{ScrollDirection::kDown});
  EXPECT_EQ(s->scroll_y(), 980);
  EXPECT_FALSE(s->execute(act::Scroll{ScrollDirection::kDown}).page_changed);
  auto obs = s->observe();
  EXPECT_EQ(obs.a11y.scroll_y, 980);
  // Only the footer link lies in the last viewport.
  auto visible = viewport_elements(obs.a11y);
  ASSERT_EQ(visible.size(), 1u);
  EXPECT_EQ(visible[0].name, "Customer service");
  s->execute(act::Scroll{ScrollDirection::kUp});
  s->execute(act::Scroll{ScrollDirection::kUp});
  EXPECT_EQ(s->scroll_y(), 0);

  auto short_page = d->open("fixture://shop/cart", Viewport{});
  EXPECT_FALSE(short_page->execute(act::Scroll{ScrollDirection::kDown}).page_changed);
}

TEST(FixtureDriver, ErrorsComeBackInResult) {
  auto d = shop_driver();
  auto s = d->open("fixture://shop/home", Viewport{});
  EXPECT_EQ(s->execute(act::Click{ElementId{99}}).error, EnvErrorKind::kStaleElement);
  EXPECT_EQ(s->execute(act::Goto{"fixture://shop/missing"}).error, EnvErrorKind::kNoSuchFixturePage);
  d->safety().block("blocked.example");
  EXPECT_EQ(s->execute(act::Goto{"https://blocked.example/"}).error, EnvErrorKind::kBlockedUrl);
  EXPECT_TRUE(s->execute(act::SearchGoogle{"sofa"}).ok);
  EXPECT_EQ(s->url(), "fixture://shop/search");
}

TEST(FixtureDriver, StopFinishesAndCloseIsIdempotent) {
  auto d = shop_driver();
  auto s = d->open("fixture://shop/home", Viewport{});
  EXPECT_TRUE(s->execute(act::Stop{}).ok);
  EXPECT_TRUE(s->finished());
  EXPECT_EQ(s->execute(act::Click{ElementId{1}}).error, EnvErrorKind::kSessionFinished);
  s->close();
  s->close();
  EXPECT_EQ(d->open_sessions(), 0);
  try {
    s->observe();
    FAIL();
  } catch (const EnvError& e) {
    EXPECT_EQ(e.kind(), EnvErrorKind::kSessionLost);
  }
  EXPECT_THROW(s->execute(act::Stop{}), EnvError);
}

TEST(FixtureDriver, DigestIsDeterministicAcrossSessions) {
  auto d = shop_driver();
  auto a = d->open("fixture://shop/sofa", Viewport{});
  auto b = d->open("fixture://shop/sofa", Viewport{});
  EXPECT_EQ(a->digest(), b->digest());
  a->execute(act::Select{ElementId{6}, "Blue"});
  EXPECT_NE(a->digest(), b->digest());
  b->execute(act::Select{ElementId{6}, "blue"});
  EXPECT_EQ(a->digest(), b->digest());
  EXPECT_EQ(a->observe().screenshot->digest(), b->observe().screenshot->digest());
}

TEST(FixtureDriver, LatencyAndPeakSessions) {
  auto d = shop_driver(FixtureDriverOptions{std::chrono::milliseconds(20)});
  std::vector<std::thread> threads;
  for (int i = 0; i < 4; ++i) {
    threads.emplace_back([&] {
      auto s = d->open("fixture://shop/home", Viewport{});
      auto r = s->execute(act::Scroll{ScrollDirection::kDown});
      EXPECT_GE(r.latency, std::chrono::milliseconds(20));
    });
  }
  for (auto& t : threads) t.join();
  EXPECT_EQ(d->open_sessions(), 0);
  EXPECT_GE(d->peak_sessions(), 1);
  EXPECT_LE(d->peak_sessions(), 4);
}

TEST(FixtureDriver, GotoAcrossRehostedSites) {
  FixtureDriver d;
  d.add_site(FixtureSite::load(fixtures() / "shop", "a.test"));
  d.add_site(FixtureSite::load(fixtures() / "shop", "b.test"));
  auto s = d.open("fixture://a.test/home", Viewport{});
  EXPECT_TRUE(s->execute(act::Goto{"fixture://b.test/cart"}).ok);
  EXPECT_EQ(s->url(), "fixture://b.test/cart");
  EXPECT_TRUE(s->execute(act::Click{ElementId{0}}).ok);
  EXPECT_EQ(s->url(), "fixture://b.test/deals");
}

TEST(PageReport, ParsesAndRejects) {
  auto ok = nlohmann::json::parse(R"({"ok":true,"elements":[
    {"index":0,"role":"link","name":"Deals","bbox":{"x":40.4,"y":70.6,"w":60,"h":28},"locator":"html[0]/body[1]"},
    {"index":1,"role":"select","bbox":{"x":0,"y":0,"w":1,"h":1},"interactable":false,"options":["a","b"]}]})");
  auto r = parse_page_report(ok);
  ASSERT_EQ(r.size(), 2u);
  EXPECT_EQ(r[0].bbox, (BBox{40, 71, 60, 28}));
  EXPECT_FALSE(r[1].interactable);
  EXPECT_EQ(r[1].options, (std::vector<std::string>{"a", "b"}));

  auto kind = [](const nlohmann::json& j) {
    try {
      parse_page_report(j);
    } catch (const EnvError& e) {
      return e.kind();
    }
    return EnvErrorKind::kSessionLost;
  };
  EXPECT_EQ(kind({{"ok", false}, {"error", "boom"}}), EnvErrorKind::kProtocolError);
  EXPECT_EQ(kind(nlohmann::json::array()), EnvErrorKind::kProtocolError);
  auto gap = ok;
  gap["elements"][1]["index"] = 5;
  EXPECT_EQ(kind(gap), EnvErrorKind::kProtocolError);
}

TEST(PageReport, ReconcileKeepsHostOrder) {
  auto host = build_a11y(read_file(fixtures() / "shop" / "pages" / "home.html"), Viewport{}, 720);
  std::vector<PageElementReport> page;
  // The browser reports element 11 first with a new box, plus one the host lacks.
  page.push_back({0, "link", "Customer service", BBox{10, 20, 30, 40}, false, {}, host.elements[11].source_ref});
  page.push_back({1, "button", "Ghost", BBox{0, 0, 5, 5}, true, {}, "html[0]/body[1]/div[9]"});
  auto order_before = host.elements;
  EXPECT_EQ(reconcile(host, page), 1u);
  ASSERT_EQ(host.elements.size(), order_before.size());
  for (std::size_t i = 0; i < host.elements.size(); ++i) EXPECT_EQ(host.elements[i].index, order_before[i].index);
  EXPECT_EQ(host.elements[11].bbox, (BBox{10, 740, 30, 40}));
  EXPECT_FALSE(host.elements[11].interactable);
  EXPECT_TRUE(host.elements[11].in_viewport);
  EXPECT_EQ(host.elements[0].bbox, order_before[0].bbox);
}
