#pragma once

// Synthetic shot corpus with a known scoring law,
//
//   P(goal) = sigmoid(3 - 0.25 * distance + 0.03 * angle),
//
// and shot locations drawn from a three-zone mixture (close range, penalty
// box edge, long range) so that roughly one shot in ten is a goal. Every
// other attribute (minute, body part, last action, side) is noise.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <tuple>
#include <vector>

#include "xg/geometry.hpp"
#include "xg/rng.hpp"
#include "xg/shot_record.hpp"

namespace xg::synthetic {

struct Zone {
  double weight;
  double x_lo, x_hi;  // meters out from the goal line
  double y_sd;        // lateral spread around the goal center
};

inline constexpr std::array<Zone, 3> kZones{{
    {0.03, 4.0, 10.0, 3.0},
    {0.20, 14.0, 19.0, 5.0},
    {0.77, 28.0, 45.0, 12.0},
}};

struct GeneratorConfig {
  std::size_t n_shots = 20000;
  std::uint64_t seed = 1;
  double penalty_rate = 0.015;
  std::size_t shots_per_match = 25;
  std::size_t teams_per_league = 18;
  std::size_t players_per_team = 12;
  int first_season = 2020;
};

inline double true_probability(double distance, double angle) {
  return 1.0 / (1.0 + std::exp(-(3.0 - 0.25 * distance + 0.03 * angle)));
}

namespace detail {

template <typename T, std::size_t N>
T pick(Rng& rng, const std::array<std::pair<T, double>, N>& table) {
  double u = rng.uniform();
  for (const auto& [v, w] : table) {
    if (u < w) return v;
    u -= w;
  }
  return table.back().first;
}

inline std::string two_digits(std::size_t v) {
  return (v < 10 ? "0" : "") + std::to_string(v);
}

}  // namespace detail

/// Draws a shot location as (meters out, lateral offset).
inline std::pair<double, double> draw_location(Rng& rng) {
  double u = rng.uniform();
  const Zone* zone = &kZones.back();
  for (const auto& z : kZones) {
    if (u < z.weight) {
      zone = &z;
      break;
    }
    u -= z.weight;
  }
  const double x = rng.uniform(zone->x_lo, zone->x_hi);
  const double y = std::clamp(rng.normal(0.0, zone->y_sd), geometry::kGoalCenterW - geometry::kPitchWidth,
                              geometry::kGoalCenterW);
  return {x, y};
}

inline std::vector<ShotRecord> generate(const GeneratorConfig& cfg) {
  static constexpr std::array<League, 5> kLeagues{League::Bundesliga, League::EPL, League::LaLiga,
                                                  League::Ligue1, League::SerieA};
  static constexpr std::array<std::pair<Situation, double>, 4> kSituations{
      {{Situation::OpenPlay, 0.72}, {Situation::FromCorner, 0.15}, {Situation::SetPlay, 0.09},
       {Situation::DirectFreekick, 0.04}}};
  static constexpr std::array<std::pair<ShotType, double>, 4> kBodyParts{
      {{ShotType::RightFoot, 0.50}, {ShotType::LeftFoot, 0.30}, {ShotType::Head, 0.18},
       {ShotType::OtherBodyPart, 0.02}}};
  static constexpr std::array<std::pair<ShotResult, double>, 4> kMisses{
      {{ShotResult::MissedShots, 0.40}, {ShotResult::SavedShot, 0.30}, {ShotResult::BlockedShot, 0.27},
       {ShotResult::ShotOnPost, 0.03}}};
  static const std::array<std::string, 8> kLastActions{"Pass", "Cross", "Aerial", "TakeOn",
                                                       "Rebound", "BallRecovery", "Chipped", "None"};

  Rng rng(cfg.seed, Stream::Synthetic, 0);
  std::vector<ShotRecord> out;
  out.reserve(cfg.n_shots);
  const std::size_t per_match = std::max<std::size_t>(cfg.shots_per_match, 1);
  const std::size_t teams = std::max<std::size_t>(cfg.teams_per_league, 2);
  for (std::size_t m = 0; out.size() < cfg.n_shots; ++m) {
    const League league = kLeagues[m % kLeagues.size()];
    const std::size_t round = m / kLeagues.size();
    const int season_year = cfg.first_season + static_cast<int>(round / 300);
    const std::string season = std::to_string(season_year) + "-" +
                               detail::two_digits(static_cast<std::size_t>((season_year + 1) % 100));
    const std::size_t day = round % 300;
    const std::string date = std::to_string(season_year + (day >= 150 ? 1 : 0)) + "-" +
                             detail::two_digits(day >= 150 ? 1 + (day - 150) / 30 : 8 + std::min<std::size_t>(day / 30, 4)) +
                             "-" + detail::two_digits(1 + day % 28);
    const std::size_t home = rng.index(teams);
    std::size_t away = rng.index(teams - 1);
    if (away >= home) ++away;
    auto team_name = [&](std::size_t t) {
      return std::string(to_string(league)) + " Club " + detail::two_digits(t + 1);
    };
    const std::string match_id = std::to_string(100000 + m);

    for (std::size_t s = 0; s < per_match && out.size() < cfg.n_shots; ++s) {
      ShotRecord r;
      r.shot_id = std::to_string(1000000 + out.size());
      r.match_id = match_id;
      r.league = league;
      r.season = season;
      r.date = date;
      r.home_away = rng.uniform() < 0.55 ? HomeAway::Home : HomeAway::Away;
      const std::size_t team = r.home_away == HomeAway::Home ? home : away;
      r.team = team_name(team);
      r.player = r.team + " Player " + detail::two_digits(rng.index(cfg.players_per_team) + 1);
      r.minute = 1 + static_cast<int>(rng.index(95));

      double x = 0.0, y = 0.0;
      if (rng.uniform() < cfg.penalty_rate) {
        r.situation = Situation::Penalty;
        r.shot_type = rng.uniform() < 0.6 ? ShotType::RightFoot : ShotType::LeftFoot;
        r.last_action = "Standard";
        x = 11.0;
      } else {
        r.situation = detail::pick(rng, kSituations);
        r.shot_type = detail::pick(rng, kBodyParts);
        r.last_action = kLastActions[rng.index(kLastActions.size())];
        std::tie(x, y) = draw_location(rng);
      }
      const auto [l, w] = geometry::fractions_from_offset(x, y);
      r.coord_l = std::clamp(l, 0.0, 1.0);
      r.coord_w = std::clamp(w, 0.0, 1.0);
      const double p = true_probability(geometry::compute_distance(r.coord_l, r.coord_w),
                                        geometry::compute_angle(r.coord_l, r.coord_w));
      r.result = rng.uniform() < p ? ShotResult::Goal : detail::pick(rng, kMisses);
      out.push_back(std::move(r));
    }
  }
  return out;
}

}  // namespace xg::synthetic
