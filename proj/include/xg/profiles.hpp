#pragma once

// Ceteris-paribus profiles and their aggregates. A CP profile varies one
// feature of one observation over a grid; the aggregated profile of a group
// is the pointwise mean of its members' CP profiles,
//
//   ap(z) = (1/k) * sum_i f(x_i with feature := z),
//
// and the partial-dependence profile is the aggregate over a whole table.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "xg/csv.hpp"
#include "xg/error.hpp"
#include "xg/feature_table.hpp"
#include "xg/forest.hpp"
#include "xg/parallel.hpp"

namespace xg {

struct FeatureGrid {
  enum class Kind { Continuous, Categorical };

  std::string feature;
  Kind kind = Kind::Continuous;
  std::vector<double> points;       // continuous grid, strictly increasing
  std::vector<std::string> levels;  // categorical grid, training levels

  std::size_t size() const { return kind == Kind::Continuous ? points.size() : levels.size(); }

  std::string label(std::size_t i) const {
    return kind == Kind::Continuous ? csv::format_double(points[i]) : levels[i];
  }
};

struct ProfileCurve {
  std::string feature;
  FeatureGrid grid;
  std::vector<double> values;
  std::size_t k = 0;
  std::string group_label;
};

inline FeatureGrid grid_for_feature(const FeatureTable& table, const std::string& feature,
                                    std::size_t m = 101) {
  FeatureGrid grid;
  grid.feature = feature;
  if (auto col = table.schema.find(feature); col && table.schema[*col].kind == ColumnKind::Continuous) {
    if (m < 2) throw Error(ErrorCode::OutOfRange, "a continuous grid needs at least 2 points");
    if (table.empty()) throw Error(ErrorCode::EmptyTable, "grid over an empty table");
    double lo = table.at(0, *col), hi = lo;
    for (std::size_t i = 1; i < table.rows(); ++i) {
      lo = std::min(lo, table.at(i, *col));
      hi = std::max(hi, table.at(i, *col));
    }
    if (lo == hi) throw Error(ErrorCode::ConstantFeature, feature + " takes a single value");
    grid.points.resize(m);
    for (std::size_t i = 0; i < m; ++i)
      grid.points[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(m - 1);
    grid.points.back() = hi;
    return grid;
  }
  const auto group = table.schema.group(feature);
  if (group.empty()) throw Error(ErrorCode::UnknownFeature, "no feature named '" + feature + "'");
  grid.kind = FeatureGrid::Kind::Categorical;
  for (std::size_t j : group) grid.levels.push_back(table.schema[j].level);
  return grid;
}

namespace detail {

/// Writes grid point `g` into a copy of an encoded row.
class GridSetter {
 public:
  GridSetter(const FeatureSchema& schema, const FeatureGrid& grid) : grid_(grid) {
    if (grid.size() == 0) throw Error(ErrorCode::OutOfRange, "empty feature grid");
    if (grid.kind == FeatureGrid::Kind::Continuous) {
      auto col = schema.find(grid.feature);
      if (!col || schema[*col].kind != ColumnKind::Continuous)
        throw Error(ErrorCode::SchemaMismatch, "model has no continuous column " + grid.feature);
      column_ = *col;
      return;
    }
    group_ = schema.group(grid.feature);
    if (group_.empty()) throw Error(ErrorCode::SchemaMismatch, "model has no group " + grid.feature);
    for (const auto& level : grid.levels) {
      auto col = schema.find(column_name(grid.feature, level));
      if (!col) throw Error(ErrorCode::SchemaMismatch, "level " + level + " unknown to the model");
      level_cols_.push_back(*col);
    }
  }

  bool continuous() const { return grid_.kind == FeatureGrid::Kind::Continuous; }
  std::size_t column() const { return column_; }

  /// Model output at every grid point for one encoded row.
  void evaluate(const EnsembleModel& model, std::vector<double>& row, double* out) const {
    if (continuous()) {
      const auto v = predict_sweep(model, row, column_, grid_.points);
      std::copy(v.begin(), v.end(), out);
      return;
    }
    for (std::size_t g = 0; g < grid_.size(); ++g) {
      apply(row, g);
      out[g] = predict_row(model, row);
    }
  }

  void apply(std::span<double> row, std::size_t g) const {
    if (grid_.kind == FeatureGrid::Kind::Continuous) {
      row[column_] = grid_.points[g];
      return;
    }
    for (std::size_t j : group_) row[j] = 0.0;
    row[level_cols_[g]] = 1.0;
  }

 private:
  const FeatureGrid& grid_;
  std::size_t column_ = 0;
  std::vector<std::size_t> group_;
  std::vector<std::size_t> level_cols_;
};

}  // namespace detail

inline ProfileCurve cp_profile(const EnsembleModel& model, std::span<const double> observation,
                               const FeatureGrid& grid, std::string group_label = {}) {
  if (observation.size() != model.schema.size())
    throw Error(ErrorCode::SchemaMismatch, "observation width does not match the model");
  detail::GridSetter setter(model.schema, grid);
  ProfileCurve curve{grid.feature, grid, std::vector<double>(grid.size()), 1, std::move(group_label)};
  std::vector<double> row(observation.begin(), observation.end());
  setter.evaluate(model, row, curve.values.data());
  return curve;
}

/// Aggregated profile over the rows `members` of `table`. Member curves are
/// summed in member order, so the result does not depend on the thread count.
inline ProfileCurve aggregate_profiles(const EnsembleModel& model, const FeatureTable& table,
                                       std::span<const std::size_t> members, const FeatureGrid& grid,
                                       std::string group_label = {}, std::size_t threads = 0) {
  if (members.empty()) throw Error(ErrorCode::EmptyGroup, "aggregate over an empty group");
  check_schema(model, table.schema);
  detail::GridSetter setter(model.schema, grid);
  const std::size_t m = grid.size(), k = members.size(), d = table.cols();
  std::vector<double> per_member(k * m);
  constexpr std::size_t kChunk = 16;
  parallel_for(
      (k + kChunk - 1) / kChunk,
      [&](std::size_t c) {
        std::vector<double> row(d);
        const std::size_t end = std::min(k, (c + 1) * kChunk);
        for (std::size_t i = c * kChunk; i < end; ++i) {
          auto src = table.row(members[i]);
          std::copy(src.begin(), src.end(), row.begin());
          setter.evaluate(model, row, per_member.data() + i * m);
        }
      },
      threads);
  ProfileCurve curve{grid.feature, grid, std::vector<double>(m, 0.0), k, std::move(group_label)};
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t g = 0; g < m; ++g) curve.values[g] += per_member[i * m + g];
  for (double& v : curve.values) v /= static_cast<double>(k);
  return curve;
}

inline ProfileCurve pdp(const EnsembleModel& model, const FeatureTable& table, const FeatureGrid& grid,
                        std::size_t threads = 0) {
  if (table.empty()) throw Error(ErrorCode::EmptyGroup, "partial dependence over an empty table");
  std::vector<std::size_t> all(table.rows());
  std::iota(all.begin(), all.end(), std::size_t{0});
  return aggregate_profiles(model, table, all, grid, "ALL", threads);
}

struct WhatIf {
  double ap_from = 0.0;
  double ap_to = 0.0;
  double ratio = 0.0;
  double percent_change = 0.0;
};

/// Linear interpolation of a continuous curve at z.
inline double curve_at(const ProfileCurve& curve, double z) {
  const auto& pts = curve.grid.points;
  if (curve.grid.kind != FeatureGrid::Kind::Continuous || pts.empty())
    throw Error(ErrorCode::OutOfGrid, "what-if queries need a continuous grid");
  if (!(z >= pts.front() && z <= pts.back()))
    throw Error(ErrorCode::OutOfGrid, csv::format_double(z) + " lies outside [" +
                                          csv::format_double(pts.front()) + ", " +
                                          csv::format_double(pts.back()) + "]");
  auto hi = std::lower_bound(pts.begin(), pts.end(), z);
  const auto i = static_cast<std::size_t>(hi - pts.begin());
  if (pts[i] == z) return curve.values[i];
  const double t = (z - pts[i - 1]) / (pts[i] - pts[i - 1]);
  return curve.values[i - 1] + t * (curve.values[i] - curve.values[i - 1]);
}

inline WhatIf what_if_ratio(const ProfileCurve& curve, double from_value, double to_value) {
  WhatIf w;
  w.ap_from = curve_at(curve, from_value);
  w.ap_to = curve_at(curve, to_value);
  if (w.ap_from == 0.0) throw Error(ErrorCode::ZeroBaseline, "baseline average xG is zero");
  w.ratio = w.ap_to / w.ap_from;
  w.percent_change = 100.0 * (w.ratio - 1.0);
  return w;
}

inline void write_curves_csv(std::span<const ProfileCurve> curves, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  csv::write_row(out, {"feature", "z", "value", "k", "group_label"});
  for (const auto& c : curves)
    for (std::size_t g = 0; g < c.values.size(); ++g)
      csv::write_row(out, {c.feature, c.grid.label(g), csv::format_double(c.values[g]),
                           std::to_string(c.k), c.group_label});
}

inline nlohmann::json curve_json(const ProfileCurve& c) {
  nlohmann::json z = nlohmann::json::array();
  for (std::size_t g = 0; g < c.grid.size(); ++g) {
    if (c.grid.kind == FeatureGrid::Kind::Continuous)
      z.push_back(c.grid.points[g]);
    else
      z.push_back(c.grid.levels[g]);
  }
  return nlohmann::json{{"feature", c.feature},
                        {"kind", c.grid.kind == FeatureGrid::Kind::Continuous ? "continuous" : "categorical"},
                        {"z", std::move(z)},
                        {"values", c.values},
                        {"k", c.k},
                        {"group_label", c.group_label}};
}

}  // namespace xg
