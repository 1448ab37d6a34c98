#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "xg/csv.hpp"
#include "xg/error.hpp"
#include "xg/profiles.hpp"
#include "xg/shot_record.hpp"

namespace xg {

struct ScoredShot {
  FeaturedShot shot;
  double prob = 0.0;

  const ShotRecord& record() const { return shot.record; }
};

/// Cumulative xG: the plain sum of per-shot probabilities.
inline double xg_sum(std::span<const double> probs) {
  if (probs.empty()) throw Error(ErrorCode::EmptyGroup, "xg_sum over zero shots");
  double s = 0.0;
  for (double p : probs) s += p;
  return s;
}

inline double xg_sum(std::span<const ScoredShot> shots) {
  if (shots.empty()) throw Error(ErrorCode::EmptyGroup, "xg_sum over zero shots");
  double s = 0.0;
  for (const auto& sh : shots) s += sh.prob;
  return s;
}

struct TeamMatchRow {
  std::string team;
  HomeAway side = HomeAway::Home;
  std::size_t goals = 0;
  double xg = 0.0;
  std::size_t shots = 0;
  double mean_angle = 0.0;
  double mean_distance = 0.0;
  double offensive_efficiency = 0.0;  // goals - xg
};

struct MatchReport {
  std::string match_id;
  std::string date;
  std::vector<TeamMatchRow> teams;  // home side first
};

struct PlayerSeasonReport {
  std::string player;
  std::string season;
  std::size_t games = 0;
  std::size_t goals = 0;
  double xg = 0.0;
  std::size_t shots = 0;
  double mean_angle = 0.0;
  double mean_distance = 0.0;
  double conversion = 0.0;  // goals / shots
  double offensive_efficiency = 0.0;
};

inline MatchReport match_report(std::span<const ScoredShot> shots) {
  if (shots.empty()) throw Error(ErrorCode::EmptyGroup, "match_report over zero shots");
  MatchReport report;
  report.match_id = shots.front().record().match_id;
  report.date = shots.front().record().date;
  std::map<std::pair<HomeAway, std::string>, TeamMatchRow> rows;
  for (const auto& s : shots) {
    const auto& r = s.record();
    if (r.match_id != report.match_id)
      throw Error(ErrorCode::MixedMatches, "shots from " + report.match_id + " and " + r.match_id);
    auto& row = rows[{r.home_away, r.team}];
    row.team = r.team;
    row.side = r.home_away;
    row.goals += static_cast<std::size_t>(r.status());
    row.xg += s.prob;
    ++row.shots;
    row.mean_angle += s.shot.geometry.angle_to_goal;
    row.mean_distance += s.shot.geometry.distance_to_goal;
  }
  for (auto& [key, row] : rows) {
    row.mean_angle /= static_cast<double>(row.shots);
    row.mean_distance /= static_cast<double>(row.shots);
    row.offensive_efficiency = static_cast<double>(row.goals) - row.xg;
    report.teams.push_back(row);
  }
  return report;
}

inline PlayerSeasonReport player_season_report(std::span<const ScoredShot> shots) {
  if (shots.empty()) throw Error(ErrorCode::EmptyGroup, "player report over zero shots");
  PlayerSeasonReport rep;
  rep.player = shots.front().record().player;
  rep.season = shots.front().record().season;
  std::set<std::string> matches;
  for (const auto& s : shots) {
    const auto& r = s.record();
    if (r.player != rep.player || r.season != rep.season)
      throw Error(ErrorCode::MixedPlayers, rep.player + " " + rep.season + " mixed with " + r.player +
                                               " " + r.season);
    matches.insert(r.match_id);
    rep.goals += static_cast<std::size_t>(r.status());
    rep.xg += s.prob;
    ++rep.shots;
    rep.mean_angle += s.shot.geometry.angle_to_goal;
    rep.mean_distance += s.shot.geometry.distance_to_goal;
  }
  rep.games = matches.size();
  rep.mean_angle /= static_cast<double>(rep.shots);
  rep.mean_distance /= static_cast<double>(rep.shots);
  rep.conversion = static_cast<double>(rep.goals) / static_cast<double>(rep.shots);
  rep.offensive_efficiency = static_cast<double>(rep.goals) - rep.xg;
  return rep;
}

/// Groups shots by a key, keeping first-appearance order of the keys.
template <typename KeyFn>
std::vector<std::vector<ScoredShot>> group_shots(std::span<const ScoredShot> shots, KeyFn&& key) {
  std::map<std::string, std::size_t> index;
  std::vector<std::vector<ScoredShot>> groups;
  for (const auto& s : shots) {
    auto [it, inserted] = index.emplace(key(s.record()), groups.size());
    if (inserted) groups.emplace_back();
    groups[it->second].push_back(s);
  }
  return groups;
}

// ---- tabular output -------------------------------------------------------

namespace detail {

inline std::string render_aligned(const std::vector<csv::Row>& rows) {
  std::vector<std::size_t> width;
  for (const auto& r : rows) {
    if (width.size() < r.size()) width.resize(r.size(), 0);
    for (std::size_t i = 0; i < r.size(); ++i) width[i] = std::max(width[i], r[i].size());
  }
  std::ostringstream out;
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const auto& r = rows[k];
    for (std::size_t i = 0; i < r.size(); ++i) {
      if (i == 0) {
        out << r[i] << std::string(width[i] - r[i].size(), ' ');
      } else {
        out << "  " << std::string(width[i] - r[i].size(), ' ') << r[i];
      }
    }
    out << '\n';
    if (k == 0) {
      std::size_t total = 0;
      for (auto w : width) total += w + 2;
      out << std::string(total - 2, '-') << '\n';
    }
  }
  return out.str();
}

inline void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << text;
}

inline void write_csv(const std::filesystem::path& path, const std::vector<csv::Row>& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  for (const auto& r : rows) csv::write_row(out, r);
}

}  // namespace detail

inline std::vector<csv::Row> match_report_rows(std::span<const MatchReport> reports, bool human) {
  auto f = [&](double v, int digits) { return human ? csv::format_fixed(v, digits) : csv::format_double(v); };
  std::vector<csv::Row> rows{{"match_id", "date", "team", "side", "goals", "xg", "shots", "mean_angle",
                              "mean_distance", "offensive_efficiency"}};
  for (const auto& m : reports)
    for (const auto& t : m.teams)
      rows.push_back({m.match_id, m.date, t.team, std::string(to_string(t.side)), std::to_string(t.goals),
                      f(t.xg, 2), std::to_string(t.shots), f(t.mean_angle, 2), f(t.mean_distance, 2),
                      f(t.offensive_efficiency, 2)});
  return rows;
}

inline std::vector<csv::Row> player_report_rows(std::span<const PlayerSeasonReport> reports, bool human) {
  auto f = [&](double v, int digits) { return human ? csv::format_fixed(v, digits) : csv::format_double(v); };
  std::vector<csv::Row> rows{{"player", "season", "games", "goals", "xg", "shots", "mean_angle",
                              "mean_distance", "conversion", "offensive_efficiency"}};
  for (const auto& p : reports)
    rows.push_back({p.player, p.season, std::to_string(p.games), std::to_string(p.goals), f(p.xg, 2),
                    std::to_string(p.shots), f(p.mean_angle, 2), f(p.mean_distance, 2),
                    f(p.conversion, 3), f(p.offensive_efficiency, 2)});
  return rows;
}

inline void write_match_reports(std::span<const MatchReport> reports, const std::filesystem::path& csv_path,
                                const std::filesystem::path& txt_path) {
  detail::write_csv(csv_path, match_report_rows(reports, false));
  detail::write_file(txt_path, detail::render_aligned(match_report_rows(reports, true)));
}

inline void write_player_reports(std::span<const PlayerSeasonReport> reports,
                                 const std::filesystem::path& csv_path,
                                 const std::filesystem::path& txt_path) {
  detail::write_csv(csv_path, player_report_rows(reports, false));
  detail::write_file(txt_path, detail::render_aligned(player_report_rows(reports, true)));
}

inline void write_scored_shots(std::span<const ScoredShot> shots, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  csv::write_row(out, {"shot_id", "match_id", "league", "season", "date", "player", "team", "home_away",
                       "minute", "situation", "shot_type", "last_action", "distance_to_goal",
                       "angle_to_goal", "status", "xg"});
  for (const auto& s : shots) {
    const auto& r = s.record();
    csv::write_row(out, {r.shot_id, r.match_id, std::string(to_string(r.league)), r.season, r.date, r.player,
                         r.team, std::string(to_string(r.home_away)), std::to_string(r.minute),
                         std::string(to_string(r.situation)), std::string(to_string(r.shot_type)),
                         r.last_action, csv::format_double(s.shot.geometry.distance_to_goal),
                         csv::format_double(s.shot.geometry.angle_to_goal), std::to_string(r.status()),
                         csv::format_double(s.prob)});
  }
}

/// Per-league histograms of distance and angle split by goal status, the raw
/// data behind the shot-distribution figure.
inline void write_geometry_histograms(std::span<const FeaturedShot> shots, const std::filesystem::path& path,
                                      double distance_bin = 2.0, double angle_bin = 5.0) {
  // key: league, feature, status, bin index
  std::map<std::tuple<std::string, std::string, int, long>, std::size_t> counts;
  for (const auto& s : shots) {
    const std::string league(to_string(s.record.league));
    const int status = s.record.status();
    counts[{league, "distance_to_goal", status,
            static_cast<long>(std::floor(s.geometry.distance_to_goal / distance_bin))}]++;
    counts[{league, "angle_to_goal", status, static_cast<long>(std::floor(s.geometry.angle_to_goal / angle_bin))}]++;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  csv::write_row(out, {"league", "feature", "status", "bin_lo", "bin_hi", "count"});
  for (const auto& [key, n] : counts) {
    const auto& [league, feature, status, bin] = key;
    const double w = feature == "distance_to_goal" ? distance_bin : angle_bin;
    csv::write_row(out, {league, feature, std::to_string(status), csv::format_double(static_cast<double>(bin) * w),
                         csv::format_double(static_cast<double>(bin + 1) * w), std::to_string(n)});
  }
}

// ---- SVG ------------------------------------------------------------------

struct SvgOptions {
  double width = 640;
  double height = 420;
  std::string title;
  std::string x_label = "feature value";
  std::string y_label = "average xG per shot";
};

namespace detail {

inline std::string xml_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

inline std::string num(double v) { return csv::format_fixed(v, 2); }

}  // namespace detail

/// Renders one or more curves on a shared canvas. The y axis spans [0, 1];
/// categorical curves are placed at evenly spaced x positions.
inline std::string render_curves_svg(std::span<const ProfileCurve> curves, const SvgOptions& opt = {}) {
  if (curves.empty()) throw Error(ErrorCode::EmptyGroup, "no curves to draw");
  for (const auto& c : curves)
    if (c.values.empty()) throw Error(ErrorCode::EmptyGroup, "curve '" + c.group_label + "' is empty");
  static const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};
  const double left = 70, right = 170, top = 40, bottom = 60;
  const double pw = opt.width - left - right, ph = opt.height - top - bottom;
  const bool categorical = curves.front().grid.kind == FeatureGrid::Kind::Categorical;
  double xmin = 0, xmax = 1;
  if (!categorical) {
    xmin = curves.front().grid.points.front();
    xmax = curves.front().grid.points.back();
    for (const auto& c : curves) {
      xmin = std::min(xmin, c.grid.points.front());
      xmax = std::max(xmax, c.grid.points.back());
    }
    if (xmax == xmin) xmax = xmin + 1;
  }
  auto x_of = [&](const ProfileCurve& c, std::size_t i) {
    if (categorical) {
      const double n = static_cast<double>(c.values.size());
      return left + pw * (static_cast<double>(i) + 0.5) / n;
    }
    return left + pw * (c.grid.points[i] - xmin) / (xmax - xmin);
  };
  auto y_of = [&](double v) { return top + ph * (1.0 - v); };

  std::ostringstream s;
  s << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << detail::num(opt.width) << "\" height=\""
    << detail::num(opt.height) << "\" viewBox=\"0 0 " << detail::num(opt.width) << ' ' << detail::num(opt.height)
    << "\">\n";
  s << "<rect x=\"0\" y=\"0\" width=\"" << detail::num(opt.width) << "\" height=\"" << detail::num(opt.height)
    << "\" fill=\"white\"/>\n";
  if (!opt.title.empty())
    s << "<text x=\"" << detail::num(left + pw / 2) << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">"
      << detail::xml_escape(opt.title) << "</text>\n";
  // axes
  s << "<line x1=\"" << detail::num(left) << "\" y1=\"" << detail::num(top + ph) << "\" x2=\""
    << detail::num(left + pw) << "\" y2=\"" << detail::num(top + ph) << "\" stroke=\"black\"/>\n";
  s << "<line x1=\"" << detail::num(left) << "\" y1=\"" << detail::num(top) << "\" x2=\"" << detail::num(left)
    << "\" y2=\"" << detail::num(top + ph) << "\" stroke=\"black\"/>\n";
  for (int t = 0; t <= 5; ++t) {
    const double v = t / 5.0;
    s << "<text x=\"" << detail::num(left - 8) << "\" y=\"" << detail::num(y_of(v) + 4)
      << "\" text-anchor=\"end\" font-size=\"11\">" << csv::format_fixed(v, 1) << "</text>\n";
  }
  if (categorical) {
    const auto& c = curves.front();
    for (std::size_t i = 0; i < c.values.size(); ++i)
      s << "<text x=\"" << detail::num(x_of(c, i)) << "\" y=\"" << detail::num(top + ph + 16)
        << "\" text-anchor=\"middle\" font-size=\"10\">" << detail::xml_escape(c.grid.levels[i]) << "</text>\n";
  } else {
    for (int t = 0; t <= 5; ++t) {
      const double v = xmin + (xmax - xmin) * t / 5.0;
      const double x = left + pw * t / 5.0;
      s << "<text x=\"" << detail::num(x) << "\" y=\"" << detail::num(top + ph + 16)
        << "\" text-anchor=\"middle\" font-size=\"11\">" << csv::format_fixed(v, 1) << "</text>\n";
    }
  }
  s << "<text x=\"" << detail::num(left + pw / 2) << "\" y=\"" << detail::num(opt.height - 18)
    << "\" text-anchor=\"middle\" font-size=\"12\">" << detail::xml_escape(opt.x_label) << "</text>\n";
  s << "<text x=\"18\" y=\"" << detail::num(top + ph / 2) << "\" text-anchor=\"middle\" font-size=\"12\" "
    << "transform=\"rotate(-90 18 " << detail::num(top + ph / 2) << ")\">" << detail::xml_escape(opt.y_label)
    << "</text>\n";
  for (std::size_t k = 0; k < curves.size(); ++k) {
    const auto& c = curves[k];
    const char* color = kPalette[k % std::size(kPalette)];
    s << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
    for (std::size_t i = 0; i < c.values.size(); ++i) {
      if (i) s << ' ';
      s << detail::num(x_of(c, i)) << ',' << detail::num(y_of(c.values[i]));
    }
    s << "\"/>\n";
    const double ly = top + 16.0 * static_cast<double>(k);
    s << "<line x1=\"" << detail::num(left + pw + 12) << "\" y1=\"" << detail::num(ly) << "\" x2=\""
      << detail::num(left + pw + 32) << "\" y2=\"" << detail::num(ly) << "\" stroke=\"" << color
      << "\" stroke-width=\"2\"/>\n";
    s << "<text x=\"" << detail::num(left + pw + 38) << "\" y=\"" << detail::num(ly + 4) << "\" font-size=\"11\">"
      << detail::xml_escape(c.group_label.empty() ? c.feature : c.group_label) << "</text>\n";
  }
  s << "</svg>\n";
  return s.str();
}

inline void emit_curve_svg(std::span<const ProfileCurve> curves, const std::filesystem::path& path,
                           const SvgOptions& opt = {}) {
  detail::write_file(path, render_curves_svg(curves, opt));
}

inline void emit_curve_svg(const ProfileCurve& curve, const std::filesystem::path& path,
                           const SvgOptions& opt = {}) {
  emit_curve_svg(std::span<const ProfileCurve>(&curve, 1), path, opt);
}

}  // namespace xg
