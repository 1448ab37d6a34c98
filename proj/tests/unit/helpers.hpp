#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "xg/feature_table.hpp"
#include "xg/rng.hpp"
#include "xg/shot_data.hpp"
#include "xg/synthetic.hpp"

namespace xg::fixtures {

/// Table with continuous columns x0..x{d-1} and labels from `label_of`.
template <typename LabelFn>
FeatureTable numeric_table(std::size_t n, std::size_t d, std::uint64_t seed, LabelFn label_of) {
  std::vector<Column> cols;
  for (std::size_t j = 0; j < d; ++j) {
    const std::string name = "x" + std::to_string(j);
    cols.push_back({name, ColumnKind::Continuous, name, {}});
  }
  FeatureTable t;
  t.schema = FeatureSchema(std::move(cols));
  Rng rng(seed);
  std::vector<double> row(d);
  for (std::size_t i = 0; i < n; ++i) {
    for (auto& v : row) v = rng.uniform();
    char key[16];
    std::snprintf(key, sizeof key, "r%06zu", i);
    t.append(row, static_cast<std::uint8_t>(label_of(row, rng) ? 1 : 0), key, RowOrigin::Train);
  }
  return t;
}

inline std::vector<FeaturedShot> synthetic_shots(std::size_t n, std::uint64_t seed) {
  synthetic::GeneratorConfig g;
  g.n_shots = n;
  g.seed = seed;
  const auto records = synthetic::generate(g);
  return derive_features(records);
}

}  // namespace xg::fixtures
