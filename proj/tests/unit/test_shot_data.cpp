#include <gtest/gtest.h>

#include <filesystem>
#include <functional>
#include <sstream>

#include "xg/csv.hpp"
#include "xg/shot_data.hpp"

using namespace xg;

namespace {

const char* kHeader =
    "shot_id,match_id,league,season,date,player,team,home_away,minute,situation,shot_type,last_action,"
    "coord_l,coord_w,result\n";

ShotParseResult parse(const std::string& body, bool strict = false) {
  std::istringstream in(kHeader + body);
  return parse_shot_csv(in, strict);
}

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::IoError;
}

}  // namespace

TEST(Csv, QuotedFieldsAndCrlf) {
  std::istringstream in("a,\"b,c\",\"say \"\"hi\"\"\"\r\n\"multi\nline\",x,\r\n");
  csv::Record r;
  std::size_t line = 0;
  ASSERT_TRUE(csv::read_record(in, r, line));
  EXPECT_EQ(r.fields, (csv::Row{"a", "b,c", "say \"hi\""}));
  ASSERT_TRUE(csv::read_record(in, r, line));
  EXPECT_EQ(r.fields, (csv::Row{"multi\nline", "x", ""}));
  EXPECT_FALSE(csv::read_record(in, r, line));
}

TEST(Csv, EscapeRoundTrip) {
  csv::Row row{"plain", "with,comma", "with \"quote\"", "new\nline", ""};
  std::ostringstream out;
  csv::write_row(out, row);
  std::istringstream in(out.str());
  csv::Record r;
  std::size_t line = 0;
  ASSERT_TRUE(csv::read_record(in, r, line));
  EXPECT_EQ(r.fields, row);
}

TEST(Csv, ShortestRoundTripDoubles) {
  for (double v : {0.1, 1.0 / 3.0, 36.807381798785876, 1e-300, -0.0, 123456789.125}) {
    double back = 0.0;
    ASSERT_TRUE(csv::parse_double(csv::format_double(v), back));
    EXPECT_EQ(back, v);
  }
  double x = 0.0;
  EXPECT_FALSE(csv::parse_double("0.5x", x));
  EXPECT_FALSE(csv::parse_double("", x));
}

TEST(ShotData, ParsesValidRows) {
  auto r = parse(
      "1,10,Bundesliga,2020-21,2021-01-24,Robert Lewandowski,Bayern Munich,away,67,OpenPlay,RightFoot,Rebound,"
      "0.869,0.396,Goal\n"
      "2,10,Bundesliga,2020-21,2021-01-24,Mark Uth,Schalke 04,home,56,SetPlay,Head,,0.889,0.322,ShotOnPost\n");
  ASSERT_EQ(r.records.size(), 2u);
  EXPECT_EQ(r.records[0].status(), 1);
  EXPECT_EQ(r.records[0].minute, 67);
  EXPECT_EQ(r.records[0].home_away, HomeAway::Away);
  EXPECT_EQ(r.records[1].last_action, "None");
  EXPECT_EQ(r.records[1].situation, Situation::SetPlay);
  EXPECT_EQ(r.records[1].status(), 0);
}

TEST(ShotData, DropsOwnGoals) {
  auto r = parse("1,10,EPL,2020-21,2021-01-24,P,T,home,5,OpenPlay,Head,Pass,0.9,0.5,OwnGoal\n"
                 "2,10,EPL,2020-21,2021-01-24,P,T,home,6,OpenPlay,Head,Pass,0.9,0.5,SavedShot\n");
  EXPECT_EQ(r.dropped_own_goals, 1u);
  EXPECT_EQ(r.records.size(), 1u);
}

TEST(ShotData, LenientModeSkipsAndReports) {
  auto r = parse("1,10,EPL,2020-21,2021-01-24,P,T,home,0,OpenPlay,Head,Pass,0.9,0.5,Goal\n"
                 "2,10,EPL,2020-21,2021-01-24,P,T,home,6,OpenPlay,Head,Pass,1.5,0.5,Goal\n"
                 "3,10,EPL,2020-21,2021-01-24,P,T,home,6,Corner,Head,Pass,0.9,0.5,Goal\n"
                 "4,10,EPL,2020/21,2021-01-24,P,T,home,6,OpenPlay,Head,Pass,0.9,0.5,Goal\n"
                 "5,10,EPL,2020-21,2021-01-24,P,T\n"
                 "6,10,EPL,2020-21,2021-01-24,P,T,home,6,OpenPlay,Head,Pass,0.9,0.5,Goal\n");
  ASSERT_EQ(r.records.size(), 1u);
  EXPECT_EQ(r.records[0].shot_id, "6");
  ASSERT_EQ(r.skipped.size(), 5u);
  EXPECT_EQ(r.skipped[0].column, "minute");
  EXPECT_EQ(r.skipped[0].line, 2u);
  EXPECT_EQ(r.skipped[1].column, "coord_l");
  EXPECT_EQ(r.skipped[2].column, "situation");
  EXPECT_EQ(r.skipped[3].column, "season");
  EXPECT_EQ(r.skipped[4].column, "*");
}

TEST(ShotData, StrictModeThrowsWithLine) {
  try {
    parse("1,10,EPL,2020-21,2021-01-24,P,T,home,5,OpenPlay,Head,Pass,0.9,0.5,Goal\n"
          "2,10,EPL,2020-21,2021-01-24,P,T,side,6,OpenPlay,Head,Pass,0.9,0.5,Goal\n",
          true);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::BadValue);
    EXPECT_EQ(e.detail(), 3);
  }
}

TEST(ShotData, MissingColumnAndEmptyFile) {
  std::istringstream no_result("shot_id,match_id\n1,2\n");
  EXPECT_EQ(code_of([&] { parse_shot_csv(no_result, false); }), ErrorCode::MissingColumn);
  std::istringstream empty("");
  EXPECT_EQ(code_of([&] { parse_shot_csv(empty, false); }), ErrorCode::EmptyFile);
  std::istringstream header_only(kHeader);
  EXPECT_EQ(code_of([&] { parse_shot_csv(header_only, false); }), ErrorCode::EmptyFile);
}

TEST(ShotData, WriteParseRoundTrip) {
  auto r = parse("7,10,SerieA,2019-20,2020-02-01,\"Player, Jr.\",T,away,90,Penalty,LeftFoot,Standard,"
                 "0.8952380952380953,0.47794117647058826,Goal\n");
  const auto path = std::filesystem::temp_directory_path() / "xg_roundtrip_shots.csv";
  write_shot_csv(r.records, path);
  auto back = parse_shot_csv(path, true);
  ASSERT_EQ(back.records.size(), 1u);
  EXPECT_EQ(back.records[0].player, "Player, Jr.");
  EXPECT_EQ(back.records[0].coord_l, r.records[0].coord_l);
  EXPECT_EQ(back.records[0].coord_w, r.records[0].coord_w);
  std::filesystem::remove(path);
}

TEST(ShotData, DeriveSkipsGoalLineShots) {
  auto r = parse("1,10,EPL,2020-21,2021-01-24,P,T,home,5,OpenPlay,Head,Pass,1,0.5,Goal\n"
                 "2,10,EPL,2020-21,2021-01-24,P,T,home,6,OpenPlay,Head,Pass,0.9,0.5,Goal\n");
  EXPECT_EQ(code_of([&] { derive_features(r.records); }), ErrorCode::Degenerate);
  std::vector<std::string> skipped;
  auto shots = derive_features(r.records, skipped);
  ASSERT_EQ(shots.size(), 1u);
  EXPECT_EQ(skipped, std::vector<std::string>{"1"});
  EXPECT_NEAR(shots[0].geometry.distance_to_goal, 10.606601717798213, 1e-12);
}

TEST(ShotData, LeagueSummaryCountsAndFooter) {
  auto r = parse("1,10,EPL,2020-21,2021-01-24,P,T,home,5,OpenPlay,Head,Pass,0.9,0.5,Goal\n"
                 "2,10,EPL,2020-21,2021-01-24,P,T,home,6,OpenPlay,Head,Pass,0.9,0.5,SavedShot\n"
                 "3,11,EPL,2020-21,2021-01-25,P,T,home,6,OpenPlay,Head,Pass,0.9,0.5,SavedShot\n"
                 "4,12,LaLiga,2020-21,2021-01-25,P,T,home,6,OpenPlay,Head,Pass,0.9,0.5,Goal\n");
  auto s = summarize_league(r.records);
  ASSERT_EQ(s.leagues.size(), 2u);
  EXPECT_EQ(s.leagues[0].league, "EPL");
  EXPECT_EQ(s.leagues[0].match_count, 2u);
  EXPECT_DOUBLE_EQ(s.leagues[0].mean_shots_per_match, 1.5);
  EXPECT_NEAR(s.leagues[0].conversion_percent, 100.0 / 3.0, 1e-12);
  EXPECT_EQ(s.total.shot_count, 4u);
  EXPECT_EQ(s.total.goal_count, 2u);
  EXPECT_DOUBLE_EQ(s.mean.conversion_percent, (100.0 / 3.0 + 100.0) / 2.0);
}
