#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"
#include "xg/csv.hpp"
#include "xg/error.hpp"
#include "xg/rng.hpp"
#include "xg/shot_record.hpp"

namespace xg {

enum class ColumnKind { Continuous, OneHot };

inline std::string_view to_string(ColumnKind k) {
  return k == ColumnKind::Continuous ? "continuous" : "onehot";
}

struct Column {
  std::string name;
  ColumnKind kind = ColumnKind::Continuous;
  std::string source;  // originating field; one-hot columns share it
  std::string level;   // empty for continuous columns

  bool operator==(const Column&) const = default;
};

inline constexpr std::string_view kMinute = "minute";
inline constexpr std::string_view kDistance = "distance_to_goal";
inline constexpr std::string_view kAngle = "angle_to_goal";
inline constexpr std::array<std::string_view, 3> kContinuousColumns{kMinute, kDistance, kAngle};
inline constexpr std::array<std::string_view, 4> kCategoricalSources{"home_away", "situation",
                                                                     "shot_type", "last_action"};

inline std::string column_name(std::string_view source, std::string_view level) {
  std::string name(source);
  name += '=';
  name += level;
  return name;
}

/// Splits "situation=OpenPlay" into {"situation", "OpenPlay"}; continuous
/// names come back with an empty level.
inline std::pair<std::string, std::string> decode_column_name(std::string_view name) {
  const auto eq = name.find('=');
  if (eq == std::string_view::npos) return {std::string(name), {}};
  return {std::string(name.substr(0, eq)), std::string(name.substr(eq + 1))};
}

class FeatureSchema {
 public:
  FeatureSchema() = default;
  explicit FeatureSchema(std::vector<Column> columns) : columns_(std::move(columns)) {}

  const std::vector<Column>& columns() const { return columns_; }
  std::size_t size() const { return columns_.size(); }
  const Column& operator[](std::size_t i) const { return columns_[i]; }

  std::optional<std::size_t> find(std::string_view name) const {
    for (std::size_t i = 0; i < columns_.size(); ++i)
      if (columns_[i].name == name) return i;
    return std::nullopt;
  }

  /// Column indices of a one-hot group, in schema order.
  std::vector<std::size_t> group(std::string_view source) const {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < columns_.size(); ++i)
      if (columns_[i].kind == ColumnKind::OneHot && columns_[i].source == source) idx.push_back(i);
    return idx;
  }

  std::vector<std::size_t> continuous() const {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < columns_.size(); ++i)
      if (columns_[i].kind == ColumnKind::Continuous) idx.push_back(i);
    return idx;
  }

  bool operator==(const FeatureSchema&) const = default;

 private:
  std::vector<Column> columns_;
};

inline nlohmann::json to_json(const FeatureSchema& schema) {
  nlohmann::json cols = nlohmann::json::array();
  for (const auto& c : schema.columns()) {
    nlohmann::json j{{"name", c.name}, {"kind", to_string(c.kind)}, {"source", c.source}};
    if (c.kind == ColumnKind::OneHot) j["level"] = c.level;
    cols.push_back(std::move(j));
  }
  return nlohmann::json{{"columns", std::move(cols)}};
}

inline FeatureSchema schema_from_json(const nlohmann::json& j) {
  std::vector<Column> cols;
  if (!j.is_object() || !j.contains("columns") || !j["columns"].is_array())
    throw Error(ErrorCode::SchemaMismatch, "schema document lacks a columns array");
  for (const auto& c : j["columns"]) {
    Column col;
    col.name = c.at("name").get<std::string>();
    const auto kind = c.at("kind").get<std::string>();
    if (kind == "continuous") {
      col.kind = ColumnKind::Continuous;
    } else if (kind == "onehot") {
      col.kind = ColumnKind::OneHot;
      col.level = c.at("level").get<std::string>();
    } else {
      throw Error(ErrorCode::SchemaMismatch, "unknown column kind '" + kind + "'");
    }
    col.source = c.at("source").get<std::string>();
    cols.push_back(std::move(col));
  }
  return FeatureSchema(std::move(cols));
}

/// Where a row came from; used to prove the test partition never reaches
/// balancing or fitting.
enum class RowOrigin : std::uint8_t { Unsplit, Train, Test, Synthetic };

inline std::string_view to_string(RowOrigin o) {
  switch (o) {
    case RowOrigin::Unsplit: return "unsplit";
    case RowOrigin::Train: return "train";
    case RowOrigin::Test: return "test";
    case RowOrigin::Synthetic: return "synthetic";
  }
  return "unsplit";
}

/// Model-facing dataset: row-major n x d matrix with labels and row keys.
struct FeatureTable {
  FeatureSchema schema;
  std::vector<double> values;
  std::vector<std::uint8_t> labels;
  std::vector<std::string> row_keys;
  std::vector<RowOrigin> origins;

  std::size_t rows() const { return labels.size(); }
  std::size_t cols() const { return schema.size(); }
  bool empty() const { return labels.empty(); }

  std::span<const double> row(std::size_t i) const {
    return {values.data() + i * cols(), cols()};
  }
  std::span<double> row(std::size_t i) { return {values.data() + i * cols(), cols()}; }
  double at(std::size_t i, std::size_t j) const { return values[i * cols() + j]; }

  void append(std::span<const double> row_values, std::uint8_t label, std::string key,
              RowOrigin origin) {
    values.insert(values.end(), row_values.begin(), row_values.end());
    labels.push_back(label);
    row_keys.push_back(std::move(key));
    origins.push_back(origin);
  }

  std::size_t count(std::uint8_t label) const {
    return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), label));
  }

  FeatureTable select(std::span<const std::size_t> idx) const {
    FeatureTable out;
    out.schema = schema;
    out.values.reserve(idx.size() * cols());
    out.labels.reserve(idx.size());
    out.row_keys.reserve(idx.size());
    out.origins.reserve(idx.size());
    for (std::size_t i : idx) out.append(row(i), labels[i], row_keys[i], origins[i]);
    return out;
  }

  bool has_origin(RowOrigin o) const {
    return std::find(origins.begin(), origins.end(), o) != origins.end();
  }
};

/// Builds the model-facing matrix. Without a schema (training path) the
/// one-hot levels are learned from the data and sorted; with a schema
/// (prediction path) unseen levels encode as an all-zero group.
inline FeatureTable encode_features(std::span<const FeaturedShot> shots,
                                    const std::optional<FeatureSchema>& schema = std::nullopt) {
  auto level_of = [](const ShotRecord& r, std::string_view source) -> std::string {
    if (source == "home_away") return std::string(to_string(r.home_away));
    if (source == "situation") return std::string(to_string(r.situation));
    if (source == "shot_type") return std::string(to_string(r.shot_type));
    return r.last_action;
  };

  FeatureTable table;
  if (schema) {
    for (auto name : kContinuousColumns) {
      auto idx = schema->find(name);
      if (!idx || (*schema)[*idx].kind != ColumnKind::Continuous)
        throw Error(ErrorCode::SchemaMismatch,
                    "supplied schema lacks continuous column '" + std::string(name) + "'");
    }
    table.schema = *schema;
  } else {
    std::vector<Column> cols;
    for (auto name : kContinuousColumns)
      cols.push_back({std::string(name), ColumnKind::Continuous, std::string(name), {}});
    for (auto source : kCategoricalSources) {
      std::set<std::string> levels;
      for (const auto& s : shots) levels.insert(level_of(s.record, source));
      for (const auto& level : levels)
        cols.push_back({column_name(source, level), ColumnKind::OneHot, std::string(source), level});
    }
    table.schema = FeatureSchema(std::move(cols));
  }

  const std::size_t d = table.schema.size();
  std::map<std::string, std::size_t, std::less<>> index;
  for (std::size_t j = 0; j < d; ++j) index.emplace(table.schema[j].name, j);

  table.values.assign(shots.size() * d, 0.0);
  table.labels.reserve(shots.size());
  table.row_keys.reserve(shots.size());
  table.origins.assign(shots.size(), RowOrigin::Unsplit);
  for (std::size_t i = 0; i < shots.size(); ++i) {
    const auto& s = shots[i];
    double* row = table.values.data() + i * d;
    for (std::size_t j = 0; j < d; ++j) {
      const auto& col = table.schema[j];
      if (col.kind != ColumnKind::Continuous) continue;
      if (col.name == kMinute)
        row[j] = static_cast<double>(s.record.minute);
      else if (col.name == kDistance)
        row[j] = s.geometry.distance_to_goal;
      else if (col.name == kAngle)
        row[j] = s.geometry.angle_to_goal;
      else
        throw Error(ErrorCode::SchemaMismatch, "unknown continuous column '" + col.name + "'");
    }
    for (auto source : kCategoricalSources) {
      auto it = index.find(column_name(source, level_of(s.record, source)));
      if (it != index.end()) row[it->second] = 1.0;
    }
    table.labels.push_back(static_cast<std::uint8_t>(s.record.status()));
    table.row_keys.push_back(s.record.shot_id);
  }
  return table;
}

inline std::filesystem::path sidecar_path(const std::filesystem::path& csv_path) {
  auto p = csv_path;
  p.replace_extension(".schema.json");
  return p;
}

/// Writes `row_key,label,origin,<columns...>` plus a JSON schema sidecar.
inline void write_feature_table(const FeatureTable& table, const std::filesystem::path& csv_path) {
  std::ofstream out(csv_path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + csv_path.string());
  csv::Row header{"row_key", "label", "origin"};
  for (const auto& c : table.schema.columns()) header.push_back(c.name);
  csv::write_row(out, header);
  for (std::size_t i = 0; i < table.rows(); ++i) {
    csv::Row row{table.row_keys[i], std::to_string(table.labels[i]),
                 std::string(to_string(table.origins[i]))};
    for (double v : table.row(i)) row.push_back(csv::format_double(v));
    csv::write_row(out, row);
  }
  std::ofstream side(sidecar_path(csv_path), std::ios::binary);
  if (!side) throw Error(ErrorCode::IoError, "cannot write " + sidecar_path(csv_path).string());
  side << to_json(table.schema).dump(2) << '\n';
}

inline FeatureTable read_feature_table(const std::filesystem::path& csv_path) {
  std::ifstream side(sidecar_path(csv_path), std::ios::binary);
  if (!side) throw Error(ErrorCode::IoError, "missing schema sidecar for " + csv_path.string());
  FeatureTable table;
  try {
    table.schema = schema_from_json(nlohmann::json::parse(side));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::SchemaMismatch, std::string("bad schema sidecar: ") + e.what());
  }
  std::ifstream in(csv_path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot read " + csv_path.string());
  csv::Record rec;
  std::size_t line = 0;
  if (!csv::read_record(in, rec, line)) throw Error(ErrorCode::EmptyFile, csv_path.string());
  if (rec.fields.size() != table.cols() + 3)
    throw Error(ErrorCode::SchemaMismatch, "feature CSV header does not match its sidecar");
  for (std::size_t j = 0; j < table.cols(); ++j)
    if (rec.fields[j + 3] != table.schema[j].name)
      throw Error(ErrorCode::SchemaMismatch, "column " + rec.fields[j + 3] + " not in sidecar");
  std::vector<double> row(table.cols());
  while (csv::read_record(in, rec, line)) {
    if (rec.fields.size() == 1 && rec.fields[0].empty()) continue;
    if (rec.fields.size() != table.cols() + 3)
      throw Error(ErrorCode::BadValue, "wrong field count", static_cast<std::int64_t>(rec.line));
    for (std::size_t j = 0; j < table.cols(); ++j)
      if (!csv::parse_double(rec.fields[j + 3], row[j]))
        throw Error(ErrorCode::BadValue, "non-numeric cell", static_cast<std::int64_t>(rec.line));
    RowOrigin origin = RowOrigin::Unsplit;
    for (auto o : {RowOrigin::Unsplit, RowOrigin::Train, RowOrigin::Test, RowOrigin::Synthetic})
      if (rec.fields[2] == to_string(o)) origin = o;
    table.append(row, rec.fields[1] == "1" ? 1 : 0, rec.fields[0], origin);
  }
  return table;
}

struct TrainTestSplit {
  FeatureTable train;
  FeatureTable test;
};

/// Stratified split: each class contributes round(n_class * test_fraction)
/// rows to the test side. Both partitions keep the input row order.
inline TrainTestSplit split_train_test(const FeatureTable& table, double test_fraction,
                                       std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0))
    throw Error(ErrorCode::OutOfRange, "test_fraction must lie in (0, 1)");
  if (table.rows() < 10)
    throw Error(ErrorCode::InsufficientData,
                "need at least 10 rows to split, got " + std::to_string(table.rows()));
  std::vector<bool> in_test(table.rows(), false);
  for (std::uint8_t label : {std::uint8_t{0}, std::uint8_t{1}}) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < table.rows(); ++i)
      if (table.labels[i] == label) members.push_back(i);
    if (members.size() < 2)
      throw Error(ErrorCode::DegenerateClass, "class " + std::to_string(label) + " has " +
                                                  std::to_string(members.size()) + " rows");
    Rng rng(seed, Stream::Split, label);
    rng.shuffle(members);
    const auto n_test =
        static_cast<std::size_t>(std::llround(static_cast<double>(members.size()) * test_fraction));
    for (std::size_t k = 0; k < n_test; ++k) in_test[members[k]] = true;
  }
  std::vector<std::size_t> train_idx, test_idx;
  for (std::size_t i = 0; i < table.rows(); ++i) (in_test[i] ? test_idx : train_idx).push_back(i);
  TrainTestSplit split{table.select(train_idx), table.select(test_idx)};
  std::fill(split.train.origins.begin(), split.train.origins.end(), RowOrigin::Train);
  std::fill(split.test.origins.begin(), split.test.origins.end(), RowOrigin::Test);
  return split;
}

}  // namespace xg
