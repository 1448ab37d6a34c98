#pragma once

// Client for provider match pages that embed their shot list as a
// JSON-escaped string literal:
//
//   var shotsData = JSON.parse('\x7B\x22h\x22\x3A\x5B ... \x5D\x7D');
//
// Parsing is a targeted scan for that marker followed by JavaScript string
// unescaping; no general HTML parser is involved.

#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
#define CPPHTTPLIB_OPENSSL_SUPPORT
#endif

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "httplib.h"
#include "json.hpp"
#include "xg/csv.hpp"
#include "xg/error.hpp"
#include "xg/shot_record.hpp"

namespace xg::understat {

struct RawProviderShot {
  std::string provider_id;
  std::string minute;
  std::string result;
  std::string x;
  std::string y;
  std::string situation;
  std::string shot_type;
  std::string last_action;
  std::string h_a;
  std::string player;
  std::string h_team;
  std::string a_team;
  std::string match_id;
  std::string season;
  std::string date;

  bool operator==(const RawProviderShot&) const = default;
};

inline constexpr std::string_view kShotsMarker = "shotsData";
inline constexpr std::string_view kParseOpen = "JSON.parse('";

/// Decodes a single-quoted JavaScript string body (\xHH, \uHHHH, \\, \', \",
/// \n, \r, \t, \/). `offset` is the body's position in the page, used for
/// error positions.
inline std::string unescape_js(std::string_view body, std::size_t offset = 0) {
  auto hex = [&](std::size_t at, std::size_t len) -> unsigned {
    if (at + len > body.size())
      throw Error(ErrorCode::MalformedJson, "truncated escape", static_cast<std::int64_t>(offset + at));
    unsigned v = 0;
    for (std::size_t i = 0; i < len; ++i) {
      const char c = body[at + i];
      v <<= 4;
      if (c >= '0' && c <= '9') v |= static_cast<unsigned>(c - '0');
      else if (c >= 'a' && c <= 'f') v |= static_cast<unsigned>(c - 'a' + 10);
      else if (c >= 'A' && c <= 'F') v |= static_cast<unsigned>(c - 'A' + 10);
      else throw Error(ErrorCode::MalformedJson, "bad hex escape", static_cast<std::int64_t>(offset + at));
    }
    return v;
  };
  auto put_utf8 = [](std::string& out, unsigned cp) {
    if (cp < 0x80) {
      out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
      out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
      out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
      out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
      out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
  };
  std::string out;
  out.reserve(body.size());
  for (std::size_t i = 0; i < body.size(); ++i) {
    const char c = body[i];
    if (c != '\\') {
      out.push_back(c);
      continue;
    }
    if (++i >= body.size())
      throw Error(ErrorCode::MalformedJson, "dangling backslash", static_cast<std::int64_t>(offset + i));
    switch (body[i]) {
      case 'x':
        // \xHH encodes a Latin-1 code unit; the provider only uses it for ASCII.
        put_utf8(out, hex(i + 1, 2));
        i += 2;
        break;
      case 'u':
        put_utf8(out, hex(i + 1, 4));
        i += 4;
        break;
      case 'n': out.push_back('\n'); break;
      case 'r': out.push_back('\r'); break;
      case 't': out.push_back('\t'); break;
      default: out.push_back(body[i]); break;  // \\ \' \" \/
    }
  }
  return out;
}

/// Locates the shots payload and returns the decoded JSON text.
inline std::string extract_payload(std::string_view page) {
  const auto marker = page.find(kShotsMarker);
  if (marker == std::string_view::npos)
    throw Error(ErrorCode::PayloadNotFound, "page has no shotsData script block");
  const auto open = page.find(kParseOpen, marker);
  if (open == std::string_view::npos)
    throw Error(ErrorCode::PayloadNotFound, "shotsData is not assigned from JSON.parse('...')");
  const std::size_t begin = open + kParseOpen.size();
  std::size_t end = begin;
  while (end < page.size() && page[end] != '\'') end += page[end] == '\\' ? 2 : 1;
  if (end >= page.size())
    throw Error(ErrorCode::MalformedJson, "unterminated payload string", static_cast<std::int64_t>(begin));
  return unescape_js(page.substr(begin, end - begin), begin);
}

namespace detail {

inline std::string scalar(const nlohmann::json& obj, const char* key) {
  if (!obj.contains(key))
    throw Error(ErrorCode::MalformedJson, std::string("shot object lacks '") + key + "'");
  const auto& v = obj.at(key);
  if (v.is_string()) return v.get<std::string>();
  if (v.is_null()) return {};
  return v.dump();
}

inline RawProviderShot raw_from_json(const nlohmann::json& s) {
  if (!s.is_object()) throw Error(ErrorCode::MalformedJson, "shot entry is not an object");
  RawProviderShot r;
  r.provider_id = scalar(s, "id");
  r.minute = scalar(s, "minute");
  r.result = scalar(s, "result");
  r.x = scalar(s, "X");
  r.y = scalar(s, "Y");
  r.situation = scalar(s, "situation");
  r.shot_type = scalar(s, "shotType");
  r.last_action = scalar(s, "lastAction");
  r.h_a = scalar(s, "h_a");
  r.player = scalar(s, "player");
  r.h_team = scalar(s, "h_team");
  r.a_team = scalar(s, "a_team");
  r.match_id = scalar(s, "match_id");
  r.season = scalar(s, "season");
  r.date = scalar(s, "date");
  return r;
}

}  // namespace detail

/// Home shots followed by away shots, each in document order.
inline std::vector<RawProviderShot> parse_embedded_shots(std::string_view page) {
  const std::string payload = extract_payload(page);
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(payload);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::MalformedJson, e.what(), static_cast<std::int64_t>(e.byte));
  }
  if (!doc.is_object() || !doc.contains("h") || !doc.contains("a") || !doc["h"].is_array() ||
      !doc["a"].is_array())
    throw Error(ErrorCode::MalformedJson, "payload must be an object with 'h' and 'a' arrays");
  std::vector<RawProviderShot> shots;
  for (const char* side : {"h", "a"})
    for (const auto& s : doc[side]) shots.push_back(detail::raw_from_json(s));
  return shots;
}

inline std::optional<Situation> map_situation(std::string_view s) {
  if (s == "OpenPlay") return Situation::OpenPlay;
  if (s == "FromCorner") return Situation::FromCorner;
  if (s == "SetPiece") return Situation::SetPlay;
  if (s == "DirectFreekick") return Situation::DirectFreekick;
  if (s == "Penalty") return Situation::Penalty;
  return std::nullopt;
}

/// Maps provider vocabularies onto ShotRecord levels. Unknown enum values
/// raise UnknownEnum; own goals pass through (ingestion drops them).
inline ShotRecord normalize(const RawProviderShot& raw, League league = League::Other) {
  ShotRecord r;
  r.shot_id = raw.provider_id;
  r.match_id = raw.match_id;
  r.league = league;
  auto unknown = [](std::string_view field, const std::string& v) {
    return Error(ErrorCode::UnknownEnum, std::string(field) + " '" + v + "'");
  };

  if (raw.h_a == "h") {
    r.home_away = HomeAway::Home;
    r.team = raw.h_team;
  } else if (raw.h_a == "a") {
    r.home_away = HomeAway::Away;
    r.team = raw.a_team;
  } else {
    throw unknown("h_a", raw.h_a);
  }
  auto situation = map_situation(raw.situation);
  if (!situation) throw unknown("situation", raw.situation);
  r.situation = *situation;
  auto type = parse_shot_type(raw.shot_type);
  if (!type) throw unknown("shotType", raw.shot_type);
  r.shot_type = *type;
  auto result = parse_result(raw.result);
  if (!result) throw unknown("result", raw.result);
  r.result = *result;

  long long minute = 0;
  if (!csv::parse_int(raw.minute, minute) || minute < 1)
    throw Error(ErrorCode::BadValue, "shot " + raw.provider_id + ": minute '" + raw.minute + "'");
  r.minute = static_cast<int>(minute);
  if (!csv::parse_double(raw.x, r.coord_l) || !(r.coord_l >= 0.0 && r.coord_l <= 1.0))
    throw Error(ErrorCode::BadValue, "shot " + raw.provider_id + ": X '" + raw.x + "'");
  if (!csv::parse_double(raw.y, r.coord_w) || !(r.coord_w >= 0.0 && r.coord_w <= 1.0))
    throw Error(ErrorCode::BadValue, "shot " + raw.provider_id + ": Y '" + raw.y + "'");

  r.player = raw.player;
  r.last_action = raw.last_action.empty() ? "None" : raw.last_action;
  // Provider seasons are start years ("2020"); records use "2020-21".
  long long year = 0;
  if (raw.season.size() == 4 && csv::parse_int(raw.season, year)) {
    const auto next = (year + 1) % 100;
    r.season = raw.season + "-" + (next < 10 ? "0" : "") + std::to_string(next);
  } else {
    r.season = raw.season;
  }
  r.date = raw.date.substr(0, 10);
  return r;
}

/// Serializes fetches to at most `requests_per_second`.
class RateLimiter {
 public:
  explicit RateLimiter(double requests_per_second)
      : interval_(requests_per_second > 0
                      ? std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                            std::chrono::duration<double>(1.0 / requests_per_second))
                      : std::chrono::steady_clock::duration::zero()) {}

  void acquire() {
    std::lock_guard lock(mutex_);
    const auto now = std::chrono::steady_clock::now();
    if (last_ && now < *last_ + interval_) std::this_thread::sleep_until(*last_ + interval_);
    last_ = std::chrono::steady_clock::now();
  }

 private:
  std::chrono::steady_clock::duration interval_;
  std::optional<std::chrono::steady_clock::time_point> last_;
  std::mutex mutex_;
};

struct FetchOptions {
  std::filesystem::path cache_dir = "cache";
  std::string base_url = "https://understat.com";
  League league = League::Other;
  int timeout_seconds = 30;
};

inline std::filesystem::path cache_path(const std::filesystem::path& dir, std::string_view match_id) {
  return dir / (std::string(match_id) + ".html");
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

/// Returns the raw page for a match, from the cache when present. Fresh
/// downloads are written once per key (temp file + rename).
inline std::string fetch_page(const std::string& match_id, const FetchOptions& opt, RateLimiter& limiter) {
  for (char c : match_id)
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-' && c != '_')
      throw Error(ErrorCode::BadValue, "match id '" + match_id + "' has illegal characters");
  const auto cached = cache_path(opt.cache_dir, match_id);
  if (std::filesystem::exists(cached)) return read_file(cached);

  limiter.acquire();
  httplib::Client client(opt.base_url);
  client.set_connection_timeout(opt.timeout_seconds);
  client.set_read_timeout(opt.timeout_seconds);
  client.set_follow_location(true);
  auto res = client.Get("/match/" + match_id);
  if (!res) throw Error(ErrorCode::HttpError, "request failed: " + httplib::to_string(res.error()), 0);
  if (res->status != 200)
    throw Error(ErrorCode::HttpError, "GET /match/" + match_id + " returned " + std::to_string(res->status),
                res->status);

  std::filesystem::create_directories(opt.cache_dir);
  if (!std::filesystem::exists(cached)) {
    auto tmp = cached;
    tmp += ".tmp";
    {
      std::ofstream out(tmp, std::ios::binary);
      if (!out) throw Error(ErrorCode::IoError, "cannot write " + tmp.string());
      out << res->body;
    }
    std::filesystem::rename(tmp, cached);
  }
  return res->body;
}

inline std::vector<ShotRecord> fetch_match(const std::string& match_id, const FetchOptions& opt,
                                           RateLimiter& limiter) {
  const std::string page = fetch_page(match_id, opt, limiter);
  std::vector<ShotRecord> out;
  for (const auto& raw : parse_embedded_shots(page)) out.push_back(normalize(raw, opt.league));
  return out;
}

}  // namespace xg::understat
