#include <gtest/gtest.h>

#include <cmath>
#include <map>

#include "helpers.hpp"
#include "xg/balancing.hpp"

using namespace xg;

namespace {

FeatureTable imbalanced(std::size_t n = 2000, std::uint64_t seed = 11) {
  auto t = encode_features(fixtures::synthetic_shots(n, seed));
  std::fill(t.origins.begin(), t.origins.end(), RowOrigin::Train);
  return t;
}

double minority_fraction(const FeatureTable& t) {
  return static_cast<double>(std::min(t.count(0), t.count(1))) / static_cast<double>(t.rows());
}

BalanceConfig cfg(BalanceMethod m, double target = 0.5) { return {m, target, 77, 1.0}; }

}  // namespace

TEST(Balancing, SilvermanMatchesClosedForm) {
  // Unit sample SD: +-1 alternating around zero with n even gives SD sqrt(n/(n-1)).
  std::vector<double> col;
  for (int i = 0; i < 100; ++i) col.push_back(i % 2 ? 1.0 : -1.0);
  const double sd = std::sqrt(100.0 / 99.0);
  // (4 / (5 * 100))^(1/7) for three continuous columns
  EXPECT_NEAR(silverman_bandwidth(col, 100, 3), sd * 0.5016969106227039, 1e-12);
  EXPECT_EQ(silverman_bandwidth(std::vector<double>(10, 2.0), 10, 3), 0.0);
  EXPECT_THROW(silverman_bandwidth(std::vector<double>{1.0}, 1, 3), Error);
}

TEST(Balancing, AllMethodsHitTarget) {
  auto t = imbalanced();
  for (auto m : {BalanceMethod::Under, BalanceMethod::OverDuplicate, BalanceMethod::OverSmoothed}) {
    auto out = balance(t, cfg(m)).table;
    EXPECT_NEAR(minority_fraction(out), 0.5, 0.002) << to_string(m);
  }
  auto third = balance(t, cfg(BalanceMethod::OverDuplicate, 0.3)).table;
  EXPECT_NEAR(static_cast<double>(third.count(1)) / third.rows(), 0.3, 0.002);
}

TEST(Balancing, UndersampleKeepsAllMinorityAndSubsetOfMajority) {
  auto t = imbalanced();
  auto out = undersample(t, cfg(BalanceMethod::Under));
  EXPECT_EQ(out.count(1), t.count(1));
  EXPECT_EQ(out.count(0), t.count(1));
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < t.rows(); ++i) index[t.row_keys[i]] = i;
  for (std::size_t i = 0; i < out.rows(); ++i) {
    auto it = index.find(out.row_keys[i]);
    ASSERT_NE(it, index.end());
    EXPECT_TRUE(std::equal(out.row(i).begin(), out.row(i).end(), t.row(it->second).begin()));
  }
}

TEST(Balancing, DuplicatesAreExactCopies) {
  auto t = imbalanced();
  auto out = oversample_duplicate(t, cfg(BalanceMethod::OverDuplicate));
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < t.rows(); ++i) index[t.row_keys[i]] = i;
  for (std::size_t i = t.rows(); i < out.rows(); ++i) {
    EXPECT_EQ(out.origins[i], RowOrigin::Synthetic);
    EXPECT_EQ(out.labels[i], 1);
    const auto key = out.row_keys[i].substr(0, out.row_keys[i].find('~'));
    const auto src = index.at(key);
    EXPECT_TRUE(std::equal(out.row(i).begin(), out.row(i).end(), t.row(src).begin()));
  }
}

TEST(Balancing, SmoothedJittersOnlyContinuousWithinRange) {
  auto t = imbalanced();
  auto out = oversample_smoothed(t, cfg(BalanceMethod::OverSmoothed));
  const auto cont = t.schema.continuous();
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < t.rows(); ++i) index[t.row_keys[i]] = i;
  std::size_t moved = 0;
  for (std::size_t i = t.rows(); i < out.rows(); ++i) {
    const auto src = index.at(out.row_keys[i].substr(0, out.row_keys[i].find('~')));
    for (std::size_t j = 0; j < t.cols(); ++j) {
      const bool continuous = std::find(cont.begin(), cont.end(), j) != cont.end();
      if (!continuous) {
        EXPECT_EQ(out.at(i, j), t.at(src, j));
      } else {
        double lo = t.at(0, j), hi = lo;
        for (std::size_t r = 0; r < t.rows(); ++r) lo = std::min(lo, t.at(r, j)), hi = std::max(hi, t.at(r, j));
        EXPECT_GE(out.at(i, j), lo);
        EXPECT_LE(out.at(i, j), hi);
        moved += out.at(i, j) != t.at(src, j);
      }
    }
  }
  EXPECT_GT(moved, 0u);
}

TEST(Balancing, ZeroBandwidthScaleEqualsDuplicationOfSameSources) {
  auto t = imbalanced();
  BalanceConfig c = cfg(BalanceMethod::OverSmoothed);
  c.bandwidth_scale = 0.0;
  auto out = oversample_smoothed(t, c);
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < t.rows(); ++i) index[t.row_keys[i]] = i;
  for (std::size_t i = t.rows(); i < out.rows(); ++i) {
    const auto src = index.at(out.row_keys[i].substr(0, out.row_keys[i].find('~')));
    EXPECT_TRUE(std::equal(out.row(i).begin(), out.row(i).end(), t.row(src).begin()));
  }
}

TEST(Balancing, Deterministic) {
  auto t = imbalanced();
  for (auto m : {BalanceMethod::Under, BalanceMethod::OverDuplicate, BalanceMethod::OverSmoothed}) {
    auto a = balance(t, cfg(m)).table, b = balance(t, cfg(m)).table;
    EXPECT_EQ(a.values, b.values);
    EXPECT_EQ(a.row_keys, b.row_keys);
  }
}

TEST(Balancing, RejectsTestRows) {
  auto t = imbalanced(200);
  t.origins[3] = RowOrigin::Test;
  for (auto m : {BalanceMethod::None, BalanceMethod::Under, BalanceMethod::OverDuplicate, BalanceMethod::OverSmoothed}) {
    try {
      balance(t, cfg(m));
      FAIL() << to_string(m);
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::LeakedTestRows);
    }
  }
}

TEST(Balancing, SingleClassAndBadTarget) {
  auto t = fixtures::numeric_table(100, 2, 1, [](const auto&, auto&) { return false; });
  try {
    balance(t, cfg(BalanceMethod::Under));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DegenerateClass);
  }
  auto u = imbalanced(200);
  try {
    balance(u, cfg(BalanceMethod::Under, 0.7));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::OutOfRange);
  }
}

TEST(Balancing, AlreadyBalancedIsUnchanged) {
  auto t = fixtures::numeric_table(100, 2, 1, [](const auto& row, auto&) { return row[0] < 0.5; });
  const auto lo = std::min(t.count(0), t.count(1));
  auto out = balance(t, cfg(BalanceMethod::Under, static_cast<double>(lo) / t.rows() * 0.9)).table;
  EXPECT_EQ(out.rows(), t.rows());
}

TEST(Balancing, ZeroVarianceColumnWarns) {
  auto t = fixtures::numeric_table(300, 2, 1, [](const auto& row, auto&) { return row[0] < 0.1; });
  for (std::size_t i = 0; i < t.rows(); ++i)
    if (t.labels[i]) t.row(i)[1] = 0.25;
  auto out = balance(t, cfg(BalanceMethod::OverSmoothed));
  ASSERT_EQ(out.warnings.size(), 1u);
  EXPECT_NE(out.warnings[0].find("x1"), std::string::npos);
}
