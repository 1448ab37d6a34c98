#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <utility>

namespace xg {

enum class League { Bundesliga, EPL, LaLiga, Ligue1, SerieA, Other };
enum class HomeAway { Home, Away };
enum class Situation { DirectFreekick, FromCorner, OpenPlay, Penalty, SetPlay };
enum class ShotType { Head, LeftFoot, RightFoot, OtherBodyPart };
enum class ShotResult { Goal, MissedShots, SavedShot, BlockedShot, ShotOnPost, OwnGoal };

namespace detail {

template <typename E, std::size_t N>
using Names = std::array<std::pair<E, std::string_view>, N>;

inline constexpr Names<League, 6> kLeagueNames{{{League::Bundesliga, "Bundesliga"},
                                                 {League::EPL, "EPL"},
                                                 {League::LaLiga, "LaLiga"},
                                                 {League::Ligue1, "Ligue1"},
                                                 {League::SerieA, "SerieA"},
                                                 {League::Other, "Other"}}};
inline constexpr Names<HomeAway, 2> kHomeAwayNames{
    {{HomeAway::Home, "home"}, {HomeAway::Away, "away"}}};
inline constexpr Names<Situation, 5> kSituationNames{{{Situation::DirectFreekick, "DirectFreekick"},
                                                       {Situation::FromCorner, "FromCorner"},
                                                       {Situation::OpenPlay, "OpenPlay"},
                                                       {Situation::Penalty, "Penalty"},
                                                       {Situation::SetPlay, "SetPlay"}}};
inline constexpr Names<ShotType, 4> kShotTypeNames{{{ShotType::Head, "Head"},
                                                     {ShotType::LeftFoot, "LeftFoot"},
                                                     {ShotType::RightFoot, "RightFoot"},
                                                     {ShotType::OtherBodyPart, "OtherBodyPart"}}};
inline constexpr Names<ShotResult, 6> kResultNames{{{ShotResult::Goal, "Goal"},
                                                     {ShotResult::MissedShots, "MissedShots"},
                                                     {ShotResult::SavedShot, "SavedShot"},
                                                     {ShotResult::BlockedShot, "BlockedShot"},
                                                     {ShotResult::ShotOnPost, "ShotOnPost"},
                                                     {ShotResult::OwnGoal, "OwnGoal"}}};

template <typename E, std::size_t N>
constexpr std::string_view name_of(const Names<E, N>& names, E value) {
  for (const auto& [e, name] : names)
    if (e == value) return name;
  return {};
}

template <typename E, std::size_t N>
constexpr std::optional<E> parse_name(const Names<E, N>& names, std::string_view text) {
  for (const auto& [e, name] : names)
    if (name == text) return e;
  return std::nullopt;
}

}  // namespace detail

inline std::string_view to_string(League v) { return detail::name_of(detail::kLeagueNames, v); }
inline std::string_view to_string(HomeAway v) { return detail::name_of(detail::kHomeAwayNames, v); }
inline std::string_view to_string(Situation v) { return detail::name_of(detail::kSituationNames, v); }
inline std::string_view to_string(ShotType v) { return detail::name_of(detail::kShotTypeNames, v); }
inline std::string_view to_string(ShotResult v) { return detail::name_of(detail::kResultNames, v); }

inline std::optional<League> parse_league(std::string_view s) {
  return detail::parse_name(detail::kLeagueNames, s);
}
inline std::optional<HomeAway> parse_home_away(std::string_view s) {
  return detail::parse_name(detail::kHomeAwayNames, s);
}
inline std::optional<Situation> parse_situation(std::string_view s) {
  return detail::parse_name(detail::kSituationNames, s);
}
inline std::optional<ShotType> parse_shot_type(std::string_view s) {
  return detail::parse_name(detail::kShotTypeNames, s);
}
inline std::optional<ShotResult> parse_result(std::string_view s) {
  return detail::parse_name(detail::kResultNames, s);
}

/// One shot event as delivered by the data provider.
struct ShotRecord {
  std::string shot_id;
  std::string match_id;
  League league = League::Other;
  std::string season;  // "2020-21"
  std::string date;    // YYYY-MM-DD
  std::string player;
  std::string team;
  HomeAway home_away = HomeAway::Home;
  int minute = 1;  // extra time kept as-is (e.g. 94)
  Situation situation = Situation::OpenPlay;
  ShotType shot_type = ShotType::RightFoot;
  std::string last_action;  // open vocabulary
  double coord_l = 0.0;     // fraction of pitch length, attacked goal at 1
  double coord_w = 0.0;     // fraction of pitch width
  ShotResult result = ShotResult::MissedShots;

  int status() const { return result == ShotResult::Goal ? 1 : 0; }
};

struct DerivedFeatures {
  double distance_to_goal = 0.0;  // meters
  double angle_to_goal = 0.0;     // degrees
};

struct FeaturedShot {
  ShotRecord record;
  DerivedFeatures geometry;
};

}  // namespace xg
