#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "xg/csv.hpp"
#include "xg/error.hpp"
#include "xg/geometry.hpp"
#include "xg/shot_record.hpp"

namespace xg {

inline constexpr std::array<std::string_view, 15> kShotCsvHeader{
    "shot_id", "match_id", "league",    "season",      "date",    "player",  "team",  "home_away",
    "minute",  "situation", "shot_type", "last_action", "coord_l", "coord_w", "result"};

struct RowIssue {
  std::size_t line = 0;  // physical line in the file
  std::string column;
  std::string reason;
};

struct ShotParseResult {
  std::vector<ShotRecord> records;
  std::size_t dropped_own_goals = 0;
  std::vector<RowIssue> skipped;
};

namespace detail {

inline bool valid_season(std::string_view s) {
  if (s.size() != 7 || s[4] != '-') return false;
  for (std::size_t i : {0, 1, 2, 3, 5, 6})
    if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
  return true;
}

inline bool valid_date(std::string_view s) {
  if (s.size() != 10 || s[4] != '-' || s[7] != '-') return false;
  for (std::size_t i : {0, 1, 2, 3, 5, 6, 8, 9})
    if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
  const int month = (s[5] - '0') * 10 + (s[6] - '0');
  const int day = (s[8] - '0') * 10 + (s[9] - '0');
  return month >= 1 && month <= 12 && day >= 1 && day <= 31;
}

struct BadCell {
  std::string column;
  std::string reason;
};

}  // namespace detail

/// Parses rows of the shot CSV. OwnGoal rows are counted and dropped. In
/// strict mode the first malformed row throws BadValue (detail = line);
/// otherwise malformed rows are skipped and listed in `skipped`.
inline ShotParseResult parse_shot_csv(std::istream& in, bool strict) {
  csv::Record rec;
  std::size_t line = 0;
  if (!csv::read_record(in, rec, line)) throw Error(ErrorCode::EmptyFile, "no header row");
  if (!rec.fields.empty() && rec.fields[0].rfind("\xEF\xBB\xBF", 0) == 0)
    rec.fields[0].erase(0, 3);

  std::array<std::size_t, kShotCsvHeader.size()> pos{};
  for (std::size_t k = 0; k < kShotCsvHeader.size(); ++k) {
    auto it = std::find(rec.fields.begin(), rec.fields.end(), kShotCsvHeader[k]);
    if (it == rec.fields.end())
      throw Error(ErrorCode::MissingColumn, std::string(kShotCsvHeader[k]));
    pos[k] = static_cast<std::size_t>(it - rec.fields.begin());
  }

  ShotParseResult result;
  std::size_t data_rows = 0;
  while (csv::read_record(in, rec, line)) {
    if (rec.fields.size() == 1 && rec.fields[0].empty()) continue;
    ++data_rows;
    auto field = [&](std::size_t k) -> const std::string& {
      static const std::string empty;
      return pos[k] < rec.fields.size() ? rec.fields[pos[k]] : empty;
    };
    ShotRecord r;
    std::optional<detail::BadCell> bad;
    auto fail = [&](std::size_t k, std::string reason) {
      if (!bad) bad = detail::BadCell{std::string(kShotCsvHeader[k]), std::move(reason)};
    };

    const bool short_row = std::any_of(pos.begin(), pos.end(),
                                       [&](std::size_t p) { return p >= rec.fields.size(); });
    if (short_row) {
      bad = detail::BadCell{"*", "expected " + std::to_string(kShotCsvHeader.size()) +
                                     " fields, got " + std::to_string(rec.fields.size())};
    } else {
      r.shot_id = field(0);
      if (r.shot_id.empty()) fail(0, "empty");
      r.match_id = field(1);
      if (r.match_id.empty()) fail(1, "empty");
      if (auto v = parse_league(field(2))) r.league = *v; else fail(2, "unknown league '" + field(2) + "'");
      r.season = field(3);
      if (!detail::valid_season(r.season)) fail(3, "expected YYYY-YY, got '" + r.season + "'");
      r.date = field(4);
      if (!detail::valid_date(r.date)) fail(4, "expected YYYY-MM-DD, got '" + r.date + "'");
      r.player = field(5);
      if (r.player.empty()) fail(5, "empty");
      r.team = field(6);
      if (r.team.empty()) fail(6, "empty");
      if (auto v = parse_home_away(field(7))) r.home_away = *v; else fail(7, "expected home|away");
      long long minute = 0;
      if (!csv::parse_int(field(8), minute) || minute < 1)
        fail(8, "minute must be an integer >= 1, got '" + field(8) + "'");
      r.minute = static_cast<int>(minute);
      if (auto v = parse_situation(field(9))) r.situation = *v; else fail(9, "unknown situation '" + field(9) + "'");
      if (auto v = parse_shot_type(field(10))) r.shot_type = *v; else fail(10, "unknown shot_type '" + field(10) + "'");
      r.last_action = field(11).empty() ? "None" : field(11);
      if (!csv::parse_double(field(12), r.coord_l) || !(r.coord_l >= 0.0 && r.coord_l <= 1.0))
        fail(12, "must be a number in [0,1], got '" + field(12) + "'");
      if (!csv::parse_double(field(13), r.coord_w) || !(r.coord_w >= 0.0 && r.coord_w <= 1.0))
        fail(13, "must be a number in [0,1], got '" + field(13) + "'");
      if (auto v = parse_result(field(14))) r.result = *v; else fail(14, "unknown result '" + field(14) + "'");
    }

    if (bad) {
      if (strict) {
        throw Error(ErrorCode::BadValue,
                    "line " + std::to_string(rec.line) + ", column " + bad->column + ": " +
                        bad->reason,
                    static_cast<std::int64_t>(rec.line));
      }
      result.skipped.push_back({rec.line, bad->column, bad->reason});
      continue;
    }
    if (r.result == ShotResult::OwnGoal) {
      ++result.dropped_own_goals;
      continue;
    }
    result.records.push_back(std::move(r));
  }
  if (data_rows == 0) throw Error(ErrorCode::EmptyFile, "header present but no data rows");
  return result;
}

inline ShotParseResult parse_shot_csv(const std::filesystem::path& path, bool strict) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  return parse_shot_csv(in, strict);
}

inline csv::Row shot_to_row(const ShotRecord& r) {
  return {r.shot_id,
          r.match_id,
          std::string(to_string(r.league)),
          r.season,
          r.date,
          r.player,
          r.team,
          std::string(to_string(r.home_away)),
          std::to_string(r.minute),
          std::string(to_string(r.situation)),
          std::string(to_string(r.shot_type)),
          r.last_action,
          csv::format_double(r.coord_l),
          csv::format_double(r.coord_w),
          std::string(to_string(r.result))};
}

/// Writes records in the standard shot CSV layout. With `append` the header
/// is only written when the file is new or empty.
inline void write_shot_csv(std::span<const ShotRecord> records, const std::filesystem::path& path,
                           bool append = false) {
  std::error_code ec;
  const bool need_header =
      !append || !std::filesystem::exists(path, ec) || std::filesystem::file_size(path, ec) == 0;
  std::ofstream out(path, append ? std::ios::binary | std::ios::app : std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  if (need_header) csv::write_row(out, csv::Row(kShotCsvHeader.begin(), kShotCsvHeader.end()));
  for (const auto& r : records) csv::write_row(out, shot_to_row(r));
}

inline DerivedFeatures derive_one(const ShotRecord& r) {
  try {
    return {geometry::compute_distance(r.coord_l, r.coord_w),
            geometry::compute_angle(r.coord_l, r.coord_w)};
  } catch (const Error& e) {
    throw Error(e.code(), "shot " + r.shot_id + ": " + e.message(), e.detail());
  }
}

/// Attaches distance/angle to each record, preserving order. The first
/// failing record aborts with its shot_id in the message.
inline std::vector<FeaturedShot> derive_features(std::span<const ShotRecord> records) {
  std::vector<FeaturedShot> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back({r, derive_one(r)});
  return out;
}

/// Variant used by the pipeline: records whose geometry is degenerate are
/// left out and their ids reported instead of aborting the run.
inline std::vector<FeaturedShot> derive_features(std::span<const ShotRecord> records,
                                                 std::vector<std::string>& skipped_ids) {
  std::vector<FeaturedShot> out;
  out.reserve(records.size());
  for (const auto& r : records) {
    try {
      out.push_back({r, derive_one(r)});
    } catch (const Error& e) {
      if (e.code() != ErrorCode::Degenerate) throw;
      skipped_ids.push_back(r.shot_id);
    }
  }
  return out;
}

struct LeagueSummary {
  std::string league;
  std::size_t match_count = 0;
  std::size_t shot_count = 0;
  double mean_shots_per_match = 0.0;
  std::size_t goal_count = 0;
  double mean_goals_per_match = 0.0;
  double conversion_percent = 0.0;
};

/// Footer rows: "Mean" averages every per-league column, "Total" sums the
/// counts (its per-match means are not defined).
struct LeagueSummaryTable {
  std::vector<LeagueSummary> leagues;
  struct {
    double match_count = 0, shot_count = 0, mean_shots_per_match = 0, goal_count = 0,
           mean_goals_per_match = 0, conversion_percent = 0;
  } mean;
  struct {
    std::size_t match_count = 0, shot_count = 0, goal_count = 0;
  } total;
};

inline LeagueSummaryTable summarize_league(std::span<const ShotRecord> records) {
  struct Acc {
    std::set<std::string> matches;
    std::size_t shots = 0, goals = 0;
  };
  std::map<League, Acc> acc;
  for (const auto& r : records) {
    auto& a = acc[r.league];
    a.matches.insert(r.match_id);
    ++a.shots;
    a.goals += static_cast<std::size_t>(r.status());
  }
  LeagueSummaryTable table;
  for (const auto& [league, a] : acc) {
    LeagueSummary s;
    s.league = std::string(to_string(league));
    s.match_count = a.matches.size();
    s.shot_count = a.shots;
    s.goal_count = a.goals;
    s.mean_shots_per_match = static_cast<double>(a.shots) / static_cast<double>(s.match_count);
    s.mean_goals_per_match = static_cast<double>(a.goals) / static_cast<double>(s.match_count);
    s.conversion_percent = 100.0 * static_cast<double>(a.goals) / static_cast<double>(a.shots);
    table.leagues.push_back(s);
  }
  if (table.leagues.empty()) return table;
  const double k = static_cast<double>(table.leagues.size());
  for (const auto& s : table.leagues) {
    table.mean.match_count += static_cast<double>(s.match_count) / k;
    table.mean.shot_count += static_cast<double>(s.shot_count) / k;
    table.mean.goal_count += static_cast<double>(s.goal_count) / k;
    table.mean.mean_shots_per_match += s.mean_shots_per_match / k;
    table.mean.mean_goals_per_match += s.mean_goals_per_match / k;
    table.mean.conversion_percent += s.conversion_percent / k;
    table.total.match_count += s.match_count;
    table.total.shot_count += s.shot_count;
    table.total.goal_count += s.goal_count;
  }
  return table;
}

}  // namespace xg
