#include <gtest/gtest.h>

#include <atomic>
#include <chrono>
#include <filesystem>
#include <thread>

#include "json.hpp"
#include "xg/understat.hpp"

using namespace xg;
using namespace xg::understat;
namespace fs = std::filesystem;

namespace {

std::string fixture(const std::string& name) { return read_file(fs::path(XG_FIXTURE_DIR) / name); }

ErrorCode code_of(auto fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::IoError;
}

fs::path fresh_dir(const std::string& name) {
  auto d = fs::temp_directory_path() / ("xg_understat_" + name + "_" + std::to_string(::getpid()));
  fs::remove_all(d);
  return d;
}

}  // namespace

TEST(Unescape, HexUnicodeAndPunctuation) {
  EXPECT_EQ(unescape_js(R"(\x7B\x22a\x22\x3A1\x7D)"), R"({"a":1})");
  EXPECT_EQ(unescape_js(R"(Müller)"), "M\xC3\xBCller");
  EXPECT_EQ(unescape_js(R"(it\'s\n)"), "it's\n");
}

TEST(Parse, FixtureMatchesExpectedFieldByField) {
  const auto shots = parse_embedded_shots(fixture("understat_match_14620.html"));
  const auto expected = nlohmann::json::parse(fixture("understat_match_14620.expected.json"));
  ASSERT_EQ(shots.size(), expected["shot_count"].get<std::size_t>());
  ASSERT_EQ(shots.size(), 11u);
  for (std::size_t i = 0; i < shots.size(); ++i) {
    const auto& e = expected["shots"][i];
    const auto& s = shots[i];
    SCOPED_TRACE(s.provider_id);
    EXPECT_EQ(s.provider_id, e["provider_id"]);
    EXPECT_EQ(s.minute, e["minute"]);
    EXPECT_EQ(s.result, e["result"]);
    EXPECT_EQ(s.x, e["x"]);
    EXPECT_EQ(s.y, e["y"]);
    EXPECT_EQ(s.situation, e["situation"]);
    EXPECT_EQ(s.shot_type, e["shot_type"]);
    EXPECT_EQ(s.last_action, e["last_action"]);
    EXPECT_EQ(s.h_a, e["h_a"]);
    EXPECT_EQ(s.player, e["player"]);
    EXPECT_EQ(s.h_team, e["h_team"]);
    EXPECT_EQ(s.a_team, e["a_team"]);
    EXPECT_EQ(s.match_id, e["match_id"]);
    EXPECT_EQ(s.season, e["season"]);
    EXPECT_EQ(s.date, e["date"]);
  }
}

TEST(Parse, MalformedPagesRaiseTypedErrors) {
  EXPECT_EQ(code_of([] { parse_embedded_shots(fixture("understat_no_payload.html")); }), ErrorCode::PayloadNotFound);
  EXPECT_EQ(code_of([] { parse_embedded_shots(fixture("understat_truncated.html")); }), ErrorCode::MalformedJson);
  EXPECT_EQ(code_of([] { parse_embedded_shots(fixture("understat_bad_json.html")); }), ErrorCode::MalformedJson);
  EXPECT_EQ(code_of([] { parse_embedded_shots(""); }), ErrorCode::PayloadNotFound);
}

TEST(Normalize, MapsProviderVocabulary) {
  const auto raws = parse_embedded_shots(fixture("understat_match_14620.html"));
  std::size_t set_plays = 0, away = 0;
  for (const auto& raw : raws) {
    const auto r = normalize(raw, League::Bundesliga);
    EXPECT_EQ(r.league, League::Bundesliga);
    EXPECT_EQ(r.season, "2020-21");
    EXPECT_EQ(r.date, "2021-01-24");
    EXPECT_EQ(r.match_id, "14620");
    EXPECT_EQ(r.team, raw.h_a == "h" ? "Schalke 04" : "Bayern Munich");
    if (raw.situation == "SetPiece") {
      EXPECT_EQ(r.situation, Situation::SetPlay);
      ++set_plays;
    }
    away += r.home_away == HomeAway::Away;
  }
  EXPECT_GE(set_plays, 1u);
  EXPECT_EQ(away, 6u);
}

TEST(Normalize, RejectsUnknownValues) {
  auto raw = parse_embedded_shots(fixture("understat_match_14620.html")).front();
  auto with = [&](auto edit) {
    auto r = raw;
    edit(r);
    return code_of([&] { normalize(r); });
  };
  EXPECT_EQ(with([](RawProviderShot& r) { r.situation = "Throw"; }), ErrorCode::UnknownEnum);
  EXPECT_EQ(with([](RawProviderShot& r) { r.shot_type = "Knee"; }), ErrorCode::UnknownEnum);
  EXPECT_EQ(with([](RawProviderShot& r) { r.result = "Offside"; }), ErrorCode::UnknownEnum);
  EXPECT_EQ(with([](RawProviderShot& r) { r.h_a = "n"; }), ErrorCode::UnknownEnum);
  EXPECT_EQ(with([](RawProviderShot& r) { r.minute = "0"; }), ErrorCode::BadValue);
  EXPECT_EQ(with([](RawProviderShot& r) { r.x = "1.2"; }), ErrorCode::BadValue);
  EXPECT_EQ(with([](RawProviderShot& r) { r.y = "abc"; }), ErrorCode::BadValue);
}

TEST(Fetch, DownloadsOnceThenServesFromCache) {
  httplib::Server server;
  std::atomic<int> hits{0};
  const auto page = fixture("understat_match_14620.html");
  server.Get(R"(/match/(\w+))", [&](const httplib::Request& req, httplib::Response& res) {
    ++hits;
    if (req.matches[1] == "14620") {
      res.set_content(page, "text/html");
    } else {
      res.status = 404;
    }
  });
  const int port = server.bind_to_any_port("127.0.0.1");
  ASSERT_GT(port, 0);
  std::thread t([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  FetchOptions opt;
  opt.cache_dir = fresh_dir("fetch");
  opt.base_url = "http://127.0.0.1:" + std::to_string(port);
  opt.league = League::Bundesliga;
  opt.timeout_seconds = 5;
  RateLimiter limiter(100.0);

  EXPECT_EQ(fetch_match("14620", opt, limiter).size(), 11u);
  EXPECT_EQ(hits.load(), 1);
  EXPECT_TRUE(fs::exists(cache_path(opt.cache_dir, "14620")));
  EXPECT_EQ(read_file(cache_path(opt.cache_dir, "14620")), page);
  EXPECT_EQ(fetch_match("14620", opt, limiter).size(), 11u);
  EXPECT_EQ(hits.load(), 1);

  try {
    fetch_page("99999", opt, limiter);
    FAIL() << "expected HttpError";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::HttpError);
    EXPECT_EQ(e.detail(), 404);
  }
  EXPECT_FALSE(fs::exists(cache_path(opt.cache_dir, "99999")));
  EXPECT_EQ(code_of([&] { fetch_page("../etc", opt, limiter); }), ErrorCode::BadValue);

  server.stop();
  t.join();
  // cache still answers with the server gone
  EXPECT_EQ(fetch_match("14620", opt, limiter).size(), 11u);
  fs::remove_all(opt.cache_dir);
}

TEST(Fetch, ConnectionFailureIsHttpErrorZero) {
  FetchOptions opt;
  opt.cache_dir = fresh_dir("down");
  opt.base_url = "http://127.0.0.1:1";
  opt.timeout_seconds = 2;
  RateLimiter limiter(0);
  try {
    fetch_page("1", opt, limiter);
    FAIL() << "expected HttpError";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::HttpError);
    EXPECT_EQ(e.detail(), 0);
  }
}

TEST(RateLimit, SpacesRequests) {
  RateLimiter limiter(20.0);
  const auto start = std::chrono::steady_clock::now();
  for (int i = 0; i < 5; ++i) limiter.acquire();
  const auto elapsed = std::chrono::steady_clock::now() - start;
  EXPECT_GE(elapsed, std::chrono::milliseconds(195));
}
