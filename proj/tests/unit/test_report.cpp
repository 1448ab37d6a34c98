#include <gtest/gtest.h>

#include <map>
#include <regex>
#include <stack>

#include "helpers.hpp"
#include "xg/report.hpp"

using namespace xg;

namespace {

std::vector<ScoredShot> scored(std::size_t n, std::uint64_t seed) {
  std::vector<ScoredShot> out;
  Rng rng(seed);
  for (auto& s : fixtures::synthetic_shots(n, seed)) out.push_back({std::move(s), rng.uniform(0.0, 0.6)});
  return out;
}

ErrorCode code_of(auto fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::IoError;
}

// Minimal tag-balance check: every opened element is closed in order.
bool balanced_xml(const std::string& text) {
  std::regex tag(R"(<(/?)([a-zA-Z]+)[^>]*?(/?)>)");
  std::stack<std::string> open;
  for (auto it = std::sregex_iterator(text.begin(), text.end(), tag); it != std::sregex_iterator(); ++it) {
    const auto& m = *it;
    if (m[3].length()) continue;
    if (m[1].length()) {
      if (open.empty() || open.top() != m[2].str()) return false;
      open.pop();
    } else {
      open.push(m[2].str());
    }
  }
  return open.empty();
}

}  // namespace

TEST(XgSum, PlainSum) {
  const std::vector<double> p{0.5, 0.2, 0.05};
  EXPECT_EQ(xg_sum(p), 0.75);
  EXPECT_EQ(code_of([] { xg_sum(std::span<const double>{}); }), ErrorCode::EmptyGroup);
}

TEST(MatchReport, MatchesRecomputation) {
  const auto shots = scored(250, 4);
  const std::span<const ScoredShot> all(shots);
  for (const auto& group : group_shots(all, [](const ShotRecord& r) { return r.match_id; })) {
    auto rep = match_report(group);
    ASSERT_FALSE(rep.teams.empty());
    if (rep.teams.size() == 2) {
      EXPECT_EQ(rep.teams[0].side, HomeAway::Home);
      EXPECT_EQ(rep.teams[1].side, HomeAway::Away);
    }
    for (const auto& row : rep.teams) {
      double xg = 0, angle = 0, dist = 0;
      std::size_t goals = 0, n = 0;
      for (const auto& s : group) {
        if (s.record().team != row.team) continue;
        xg += s.prob;
        angle += s.shot.geometry.angle_to_goal;
        dist += s.shot.geometry.distance_to_goal;
        goals += s.record().status();
        ++n;
      }
      EXPECT_EQ(row.shots, n);
      EXPECT_EQ(row.goals, goals);
      EXPECT_NEAR(row.xg, xg, 1e-12);
      EXPECT_NEAR(row.mean_angle, angle / n, 1e-12);
      EXPECT_NEAR(row.mean_distance, dist / n, 1e-12);
      EXPECT_NEAR(row.offensive_efficiency, goals - xg, 1e-12);
    }
  }
}

TEST(MatchReport, TeamXgIsSumOfPlayerXg) {
  const auto shots = scored(500, 9);
  const std::span<const ScoredShot> all(shots);
  for (const auto& group : group_shots(all, [](const ShotRecord& r) { return r.match_id; })) {
    auto rep = match_report(group);
    for (const auto& row : rep.teams) {
      std::map<std::string, double> per_player;
      for (const auto& s : group)
        if (s.record().team == row.team) per_player[s.record().player] += s.prob;
      double total = 0;
      for (const auto& [_, v] : per_player) total += v;
      EXPECT_NEAR(row.xg, total, 1e-12);
    }
  }
}

TEST(MatchReport, Errors) {
  auto shots = scored(60, 2);
  EXPECT_EQ(code_of([] { match_report(std::span<const ScoredShot>{}); }), ErrorCode::EmptyGroup);
  std::vector<ScoredShot> mixed{shots.front(), shots.back()};
  ASSERT_NE(mixed[0].record().match_id, mixed[1].record().match_id);
  EXPECT_EQ(code_of([&] { match_report(mixed); }), ErrorCode::MixedMatches);
}

TEST(PlayerReport, Aggregates) {
  auto shots = scored(3000, 5);
  const std::span<const ScoredShot> all(shots);
  auto groups = group_shots(all, [](const ShotRecord& r) { return r.player + "|" + r.season; });
  for (const auto& g : groups) {
    auto rep = player_season_report(g);
    std::set<std::string> matches;
    std::size_t goals = 0;
    double xg = 0;
    for (const auto& s : g) matches.insert(s.record().match_id), goals += s.record().status(), xg += s.prob;
    EXPECT_EQ(rep.shots, g.size());
    EXPECT_EQ(rep.games, matches.size());
    EXPECT_EQ(rep.goals, goals);
    EXPECT_NEAR(rep.xg, xg, 1e-12);
    EXPECT_DOUBLE_EQ(rep.conversion, static_cast<double>(goals) / g.size());
  }
  std::vector<ScoredShot> mixed{groups[0][0], groups[1][0]};
  EXPECT_EQ(code_of([&] { player_season_report(mixed); }), ErrorCode::MixedPlayers);
  EXPECT_EQ(code_of([] { player_season_report(std::span<const ScoredShot>{}); }), ErrorCode::EmptyGroup);
}

TEST(Svg, WellFormedWithOneVertexPerGridPoint) {
  ProfileCurve c;
  c.feature = "distance_to_goal";
  c.group_label = "ALL & <friends>";
  for (int i = 0; i <= 100; ++i) {
    c.grid.points.push_back(i * 0.5);
    c.values.push_back(0.6 - 0.005 * i);
  }
  SvgOptions opt;
  opt.title = "distance";
  const auto svg = render_curves_svg(std::span<const ProfileCurve>(&c, 1), opt);
  EXPECT_TRUE(balanced_xml(svg));
  EXPECT_NE(svg.find("ALL &amp; &lt;friends&gt;"), std::string::npos);
  std::smatch m;
  ASSERT_TRUE(std::regex_search(svg, m, std::regex(R"re(<polyline[^>]*points="([^"]*)")re")));
  const std::string pts = m[1];
  EXPECT_EQ(std::count(pts.begin(), pts.end(), ','), 101);
}

TEST(Svg, FlatCurveAndCategorical) {
  ProfileCurve flat;
  flat.feature = "minute";
  flat.grid.points = {1, 2, 3};
  flat.values = {0.2, 0.2, 0.2};
  const auto a = render_curves_svg(std::span<const ProfileCurve>(&flat, 1));
  EXPECT_TRUE(balanced_xml(a));
  ProfileCurve cat;
  cat.feature = "situation";
  cat.grid.kind = FeatureGrid::Kind::Categorical;
  cat.grid.levels = {"OpenPlay", "Penalty"};
  cat.values = {0.1, 0.77};
  const auto b = render_curves_svg(std::span<const ProfileCurve>(&cat, 1));
  EXPECT_TRUE(balanced_xml(b));
  EXPECT_NE(b.find(">Penalty<"), std::string::npos);
  EXPECT_EQ(code_of([] { render_curves_svg(std::span<const ProfileCurve>{}); }), ErrorCode::EmptyGroup);
}

TEST(Tables, AlignedTextHasOneLinePerRow) {
  auto shots = scored(100, 3);
  const std::span<const ScoredShot> all(shots);
  std::vector<MatchReport> reps;
  for (const auto& g : group_shots(all, [](const ShotRecord& r) { return r.match_id; }))
    reps.push_back(match_report(g));
  auto rows = match_report_rows(reps, true);
  const auto text = detail::render_aligned(rows);
  EXPECT_EQ(static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n')), rows.size() + 1);  // plus the rule under the header
}
