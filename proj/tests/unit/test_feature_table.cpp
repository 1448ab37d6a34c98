#include <gtest/gtest.h>

#include <filesystem>
#include <set>

#include "helpers.hpp"
#include "xg/feature_table.hpp"

using namespace xg;

namespace {

FeaturedShot shot(std::string id, Situation s, ShotType t, std::string last, HomeAway side, int status,
                  double dist = 12.0, double angle = 30.0, int minute = 10) {
  FeaturedShot f;
  f.record.shot_id = std::move(id);
  f.record.situation = s;
  f.record.shot_type = t;
  f.record.last_action = std::move(last);
  f.record.home_away = side;
  f.record.minute = minute;
  f.record.result = status ? ShotResult::Goal : ShotResult::SavedShot;
  f.geometry = {dist, angle};
  return f;
}

}  // namespace

TEST(FeatureTable, OneHotLevelsLearnedAndSorted) {
  std::vector<FeaturedShot> shots{
      shot("a", Situation::OpenPlay, ShotType::Head, "Pass", HomeAway::Home, 1, 8.0, 40.0, 3),
      shot("b", Situation::FromCorner, ShotType::RightFoot, "Cross", HomeAway::Away, 0, 20.0, 15.0, 77),
  };
  auto t = encode_features(shots);
  std::vector<std::string> names;
  for (const auto& c : t.schema.columns()) names.push_back(c.name);
  const std::vector<std::string> expected{"minute",
                                          "distance_to_goal",
                                          "angle_to_goal",
                                          "home_away=away",
                                          "home_away=home",
                                          "situation=FromCorner",
                                          "situation=OpenPlay",
                                          "shot_type=Head",
                                          "shot_type=RightFoot",
                                          "last_action=Cross",
                                          "last_action=Pass"};
  EXPECT_EQ(names, expected);
  ASSERT_EQ(t.rows(), 2u);
  const std::vector<double> row0(t.row(0).begin(), t.row(0).end());
  EXPECT_EQ(row0, (std::vector<double>{3, 8, 40, 0, 1, 0, 1, 1, 0, 0, 1}));
  EXPECT_EQ(t.labels, (std::vector<std::uint8_t>{1, 0}));
  EXPECT_EQ(t.row_keys, (std::vector<std::string>{"a", "b"}));
}

TEST(FeatureTable, EachGroupIsOneHot) {
  auto shots = fixtures::synthetic_shots(2000, 5);
  auto t = encode_features(shots);
  for (auto source : kCategoricalSources) {
    const auto group = t.schema.group(source);
    ASSERT_FALSE(group.empty());
    for (std::size_t i = 0; i < t.rows(); ++i) {
      double s = 0.0;
      for (auto j : group) s += t.at(i, j);
      EXPECT_EQ(s, 1.0);
    }
  }
}

TEST(FeatureTable, UnseenLevelEncodesAsZeros) {
  std::vector<FeaturedShot> train{shot("a", Situation::OpenPlay, ShotType::Head, "Pass", HomeAway::Home, 1)};
  auto schema = encode_features(train).schema;
  std::vector<FeaturedShot> other{shot("z", Situation::Penalty, ShotType::Head, "Standard", HomeAway::Home, 0)};
  auto t = encode_features(other, schema);
  EXPECT_EQ(t.schema, schema);
  for (auto j : t.schema.group("situation")) EXPECT_EQ(t.at(0, j), 0.0);
  for (auto j : t.schema.group("last_action")) EXPECT_EQ(t.at(0, j), 0.0);
}

TEST(FeatureTable, SchemaJsonRoundTrip) {
  auto t = encode_features(fixtures::synthetic_shots(300, 2));
  EXPECT_EQ(schema_from_json(to_json(t.schema)), t.schema);
  EXPECT_THROW(schema_from_json(nlohmann::json::object()), Error);
}

TEST(FeatureTable, CsvRoundTripWithSidecar) {
  auto t = encode_features(fixtures::synthetic_shots(500, 9));
  auto split = split_train_test(t, 0.2, 1);
  const auto path = std::filesystem::temp_directory_path() / "xg_features_rt.csv";
  write_feature_table(split.test, path);
  auto back = read_feature_table(path);
  EXPECT_EQ(back.schema, split.test.schema);
  EXPECT_EQ(back.values, split.test.values);
  EXPECT_EQ(back.labels, split.test.labels);
  EXPECT_EQ(back.row_keys, split.test.row_keys);
  EXPECT_EQ(back.origins, split.test.origins);
  std::filesystem::remove(path);
  std::filesystem::remove(sidecar_path(path));
}

TEST(Split, StratifiedCountsAndDisjoint) {
  auto t = fixtures::numeric_table(1000, 2, 4, [](const auto& row, auto&) { return row[0] < 0.1; });
  const std::size_t pos = t.count(1), neg = t.count(0);
  auto s = split_train_test(t, 0.25, 99);
  EXPECT_EQ(s.test.count(1), static_cast<std::size_t>(std::llround(pos * 0.25)));
  EXPECT_EQ(s.test.count(0), static_cast<std::size_t>(std::llround(neg * 0.25)));
  EXPECT_EQ(s.train.rows() + s.test.rows(), t.rows());
  std::set<std::string> train_keys(s.train.row_keys.begin(), s.train.row_keys.end());
  for (const auto& k : s.test.row_keys) EXPECT_FALSE(train_keys.count(k));
  for (auto o : s.train.origins) EXPECT_EQ(o, RowOrigin::Train);
  for (auto o : s.test.origins) EXPECT_EQ(o, RowOrigin::Test);
}

TEST(Split, SeedDeterminesPartition) {
  auto t = fixtures::numeric_table(400, 2, 4, [](const auto& row, auto&) { return row[1] < 0.3; });
  EXPECT_EQ(split_train_test(t, 0.3, 5).test.row_keys, split_train_test(t, 0.3, 5).test.row_keys);
  EXPECT_NE(split_train_test(t, 0.3, 5).test.row_keys, split_train_test(t, 0.3, 6).test.row_keys);
}

TEST(Split, Errors) {
  auto small = fixtures::numeric_table(9, 1, 1, [](const auto&, auto& rng) { return rng.uniform() < 0.5; });
  auto one_pos = fixtures::numeric_table(50, 1, 1, [](const auto& row, auto&) { return row[0] > 0.999; });
  auto codes = [](auto fn) {
    try {
      fn();
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::IoError;
  };
  EXPECT_EQ(codes([&] { split_train_test(small, 0.2, 1); }), ErrorCode::InsufficientData);
  EXPECT_EQ(codes([&] { split_train_test(one_pos, 0.2, 1); }), ErrorCode::DegenerateClass);
  EXPECT_EQ(codes([&] { split_train_test(one_pos, 1.0, 1); }), ErrorCode::OutOfRange);
}
