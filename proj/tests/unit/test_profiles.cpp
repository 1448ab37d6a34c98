#include <gtest/gtest.h>

#include <numeric>

#include "helpers.hpp"
#include "xg/profiles.hpp"

using namespace xg;

namespace {

struct Fixture {
  FeatureTable table;
  EnsembleModel model;
};

const Fixture& fixture() {
  static const Fixture f = [] {
    Fixture x;
    x.table = encode_features(fixtures::synthetic_shots(1500, 21));
    std::fill(x.table.origins.begin(), x.table.origins.end(), RowOrigin::Train);
    ForestParams p;
    p.n_trees = 30;
    p.min_leaf = 5;
    p.vote_mode = VoteMode::LeafProb;
    x.model = fit_forest(x.table, p, 3);
    return x;
  }();
  return f;
}

std::vector<std::size_t> range(std::size_t a, std::size_t b) {
  std::vector<std::size_t> v(b - a);
  std::iota(v.begin(), v.end(), a);
  return v;
}

}  // namespace

TEST(Profiles, GridSpansObservedRange) {
  const auto& f = fixture();
  auto g = grid_for_feature(f.table, "distance_to_goal", 101);
  ASSERT_EQ(g.points.size(), 101u);
  const auto col = *f.table.schema.find("distance_to_goal");
  double lo = 1e9, hi = -1e9;
  for (std::size_t i = 0; i < f.table.rows(); ++i) lo = std::min(lo, f.table.at(i, col)), hi = std::max(hi, f.table.at(i, col));
  EXPECT_EQ(g.points.front(), lo);
  EXPECT_EQ(g.points.back(), hi);
  for (std::size_t i = 1; i < g.points.size(); ++i) EXPECT_GT(g.points[i], g.points[i - 1]);
  auto c = grid_for_feature(f.table, "situation");
  EXPECT_EQ(c.kind, FeatureGrid::Kind::Categorical);
  EXPECT_EQ(c.levels, (std::vector<std::string>{"DirectFreekick", "FromCorner", "OpenPlay", "Penalty", "SetPlay"}));
}

TEST(Profiles, GridErrors) {
  const auto& f = fixture();
  auto code = [](auto fn) {
    try {
      fn();
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::IoError;
  };
  EXPECT_EQ(code([&] { grid_for_feature(f.table, "weather"); }), ErrorCode::UnknownFeature);
  auto constant = f.table;
  const auto col = *constant.schema.find("minute");
  for (std::size_t i = 0; i < constant.rows(); ++i) constant.row(i)[col] = 45.0;
  EXPECT_EQ(code([&] { grid_for_feature(constant, "minute"); }), ErrorCode::ConstantFeature);
  EXPECT_EQ(code([&] { aggregate_profiles(f.model, f.table, std::vector<std::size_t>{}, grid_for_feature(f.table, "minute")); }),
            ErrorCode::EmptyGroup);
}

TEST(Profiles, SingleMemberAggregateIsCpProfile) {
  const auto& f = fixture();
  for (const char* feature : {"distance_to_goal", "shot_type"}) {
    auto g = grid_for_feature(f.table, feature);
    for (std::size_t i : {0u, 7u, 300u}) {
      const std::vector<std::size_t> one{i};
      EXPECT_EQ(aggregate_profiles(f.model, f.table, one, g).values, cp_profile(f.model, f.table.row(i), g).values);
    }
  }
}

TEST(Profiles, PdpIsAggregateOverAllRows) {
  const auto& f = fixture();
  auto g = grid_for_feature(f.table, "angle_to_goal", 21);
  const auto all = range(0, f.table.rows());
  auto p = pdp(f.model, f.table, g);
  EXPECT_EQ(p.values, aggregate_profiles(f.model, f.table, all, g).values);
  EXPECT_EQ(p.group_label, "ALL");
  EXPECT_EQ(p.k, f.table.rows());
}

TEST(Profiles, UnionIsSizeWeightedMean) {
  const auto& f = fixture();
  auto g = grid_for_feature(f.table, "distance_to_goal", 31);
  const auto a = range(0, 120), b = range(120, 400), ab = range(0, 400);
  auto pa = aggregate_profiles(f.model, f.table, a, g), pb = aggregate_profiles(f.model, f.table, b, g);
  auto pab = aggregate_profiles(f.model, f.table, ab, g);
  for (std::size_t k = 0; k < g.size(); ++k)
    EXPECT_NEAR(pab.values[k], (120.0 * pa.values[k] + 280.0 * pb.values[k]) / 400.0, 1e-12);
}

TEST(Profiles, CpAtOwnValueIsPrediction) {
  const auto& f = fixture();
  const auto col = *f.table.schema.find("minute");
  FeatureGrid g;
  g.feature = "minute";
  for (std::size_t i = 0; i < 50; ++i) {
    g.points = {f.table.at(i, col)};
    EXPECT_EQ(cp_profile(f.model, f.table.row(i), g).values[0], predict_row(f.model, f.table.row(i)));
  }
  auto cat = grid_for_feature(f.table, "home_away");
  const auto side = f.table.at(0, *f.table.schema.find("home_away=home")) == 1.0 ? 1 : 0;
  EXPECT_EQ(cp_profile(f.model, f.table.row(0), cat).values[side], predict_row(f.model, f.table.row(0)));
}

TEST(Profiles, ThreadCountDoesNotChangeResult) {
  const auto& f = fixture();
  auto g = grid_for_feature(f.table, "distance_to_goal", 11);
  EXPECT_EQ(pdp(f.model, f.table, g, 1).values, pdp(f.model, f.table, g, 3).values);
}

TEST(WhatIf, InterpolatesAndRatios) {
  ProfileCurve c;
  c.grid.feature = c.feature = "distance_to_goal";
  c.grid.points = {0.0, 10.0, 20.0};
  c.values = {0.5, 0.3, 0.1};
  EXPECT_DOUBLE_EQ(curve_at(c, 15.0), 0.2);
  auto w = what_if_ratio(c, 20.0, 10.0);
  EXPECT_DOUBLE_EQ(w.ratio, 3.0);
  EXPECT_DOUBLE_EQ(w.percent_change, 200.0);
  auto code = [](auto fn) {
    try {
      fn();
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::IoError;
  };
  EXPECT_EQ(code([&] { curve_at(c, 25.0); }), ErrorCode::OutOfGrid);
  c.values = {0.5, 0.3, 0.0};
  EXPECT_EQ(code([&] { what_if_ratio(c, 20.0, 10.0); }), ErrorCode::ZeroBaseline);
}

TEST(Profiles, DistanceProfileFallsForGeometryModel) {
  const auto& f = fixture();
  auto g = grid_for_feature(f.table, "distance_to_goal", 11);
  auto p = pdp(f.model, f.table, g);
  EXPECT_GT(p.values.front(), p.values.back() + 0.2);
}
