#pragma once

// Class rebalancing of the training partition: random under-sampling of the
// majority, duplicate over-sampling of the minority, and smoothed-bootstrap
// over-sampling (kernel-jittered minority rows).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "xg/error.hpp"
#include "xg/feature_table.hpp"
#include "xg/rng.hpp"

namespace xg {

enum class BalanceMethod { None, Under, OverDuplicate, OverSmoothed };

inline std::string_view to_string(BalanceMethod m) {
  switch (m) {
    case BalanceMethod::None: return "none";
    case BalanceMethod::Under: return "under";
    case BalanceMethod::OverDuplicate: return "over_duplicate";
    case BalanceMethod::OverSmoothed: return "over_smoothed";
  }
  return "none";
}

inline std::optional<BalanceMethod> parse_balance_method(std::string_view s) {
  for (auto m : {BalanceMethod::None, BalanceMethod::Under, BalanceMethod::OverDuplicate,
                 BalanceMethod::OverSmoothed})
    if (to_string(m) == s) return m;
  return std::nullopt;
}

struct BalanceConfig {
  BalanceMethod method = BalanceMethod::None;
  double target_minority_fraction = 0.5;
  std::uint64_t seed = 0;
  double bandwidth_scale = 1.0;
};

/// h = sigma * (4 / ((d + 2) n))^(1 / (d + 4)), sigma the sample standard
/// deviation of the column within the class.
inline double silverman_bandwidth(std::span<const double> column, std::size_t n_class,
                                  std::size_t d_cont) {
  if (n_class < 2 || column.size() < 2)
    throw Error(ErrorCode::InsufficientData, "bandwidth needs at least two class rows");
  double mean = 0.0;
  for (double v : column) mean += v;
  mean /= static_cast<double>(column.size());
  double ss = 0.0;
  for (double v : column) ss += (v - mean) * (v - mean);
  const double sigma = std::sqrt(ss / static_cast<double>(column.size() - 1));
  if (sigma == 0.0) return 0.0;
  const double d = static_cast<double>(d_cont);
  return sigma * std::pow(4.0 / ((d + 2.0) * static_cast<double>(n_class)), 1.0 / (d + 4.0));
}

namespace detail {

struct ClassSplit {
  std::uint8_t minority_label;
  std::vector<std::size_t> minority;
  std::vector<std::size_t> majority;
};

inline ClassSplit classes_of(const FeatureTable& train, const BalanceConfig& cfg) {
  if (train.has_origin(RowOrigin::Test))
    throw Error(ErrorCode::LeakedTestRows, "balancing received rows from the test partition");
  if (!(cfg.target_minority_fraction > 0.0 && cfg.target_minority_fraction <= 0.5))
    throw Error(ErrorCode::OutOfRange, "target_minority_fraction must lie in (0, 0.5]");
  if (cfg.bandwidth_scale < 0.0)
    throw Error(ErrorCode::OutOfRange, "bandwidth_scale must be non-negative");
  std::vector<std::size_t> pos, neg;
  for (std::size_t i = 0; i < train.rows(); ++i) (train.labels[i] ? pos : neg).push_back(i);
  if (pos.empty() || neg.empty())
    throw Error(ErrorCode::DegenerateClass, "balancing needs both classes present");
  if (pos.size() <= neg.size()) return {1, std::move(pos), std::move(neg)};
  return {0, std::move(neg), std::move(pos)};
}

/// Minority rows needed so that minority / total hits the target.
inline std::size_t minority_target(std::size_t n_majority, double t) {
  return static_cast<std::size_t>(std::llround(static_cast<double>(n_majority) * t / (1.0 - t)));
}

inline std::size_t majority_target(std::size_t n_minority, double t) {
  return static_cast<std::size_t>(std::llround(static_cast<double>(n_minority) * (1.0 - t) / t));
}

}  // namespace detail

inline FeatureTable undersample(const FeatureTable& train, const BalanceConfig& cfg) {
  auto cls = detail::classes_of(train, cfg);
  const std::size_t keep = detail::majority_target(cls.minority.size(), cfg.target_minority_fraction);
  if (keep >= cls.majority.size()) return train;
  Rng rng(cfg.seed, Stream::Undersample);
  rng.shuffle(cls.majority);
  std::vector<std::size_t> idx(cls.majority.begin(), cls.majority.begin() + static_cast<std::ptrdiff_t>(keep));
  idx.insert(idx.end(), cls.minority.begin(), cls.minority.end());
  std::sort(idx.begin(), idx.end());
  return train.select(idx);
}

inline FeatureTable oversample_duplicate(const FeatureTable& train, const BalanceConfig& cfg) {
  auto cls = detail::classes_of(train, cfg);
  const std::size_t want = detail::minority_target(cls.majority.size(), cfg.target_minority_fraction);
  if (want <= cls.minority.size()) return train;
  FeatureTable out = train;
  Rng rng(cfg.seed, Stream::Oversample);
  const std::size_t add = want - cls.minority.size();
  out.values.reserve(out.values.size() + add * train.cols());
  for (std::size_t j = 0; j < add; ++j) {
    const std::size_t src = cls.minority[rng.index(cls.minority.size())];
    out.append(train.row(src), train.labels[src], train.row_keys[src] + "~dup" + std::to_string(j),
               RowOrigin::Synthetic);
  }
  return out;
}

/// Smoothed bootstrap: each synthetic row copies a uniformly drawn minority
/// row, jitters its continuous columns with N(0, (scale * h_j)^2) and clips
/// them to the column's observed training range. One-hot columns are copied
/// verbatim. Row j draws from its own stream, so output does not depend on
/// generation order. Columns with zero class variance are reported in
/// `zero_variance`.
inline FeatureTable oversample_smoothed(const FeatureTable& train, const BalanceConfig& cfg,
                                        std::vector<std::string>* zero_variance = nullptr) {
  auto cls = detail::classes_of(train, cfg);
  if (cls.minority.size() < 2)
    throw Error(ErrorCode::DegenerateClass, "smoothed over-sampling needs >= 2 minority rows");
  const std::size_t want = detail::minority_target(cls.majority.size(), cfg.target_minority_fraction);
  if (want <= cls.minority.size()) return train;

  const auto cont = train.schema.continuous();
  std::vector<double> bandwidth(cont.size()), lo(cont.size()), hi(cont.size());
  std::vector<double> column;
  for (std::size_t c = 0; c < cont.size(); ++c) {
    column.clear();
    for (std::size_t i : cls.minority) column.push_back(train.at(i, cont[c]));
    bandwidth[c] = cfg.bandwidth_scale * silverman_bandwidth(column, cls.minority.size(), cont.size());
    if (bandwidth[c] == 0.0 && zero_variance && cfg.bandwidth_scale > 0.0)
      zero_variance->push_back(train.schema[cont[c]].name);
    lo[c] = hi[c] = train.at(0, cont[c]);
    for (std::size_t i = 1; i < train.rows(); ++i) {
      lo[c] = std::min(lo[c], train.at(i, cont[c]));
      hi[c] = std::max(hi[c], train.at(i, cont[c]));
    }
  }

  FeatureTable out = train;
  const std::size_t add = want - cls.minority.size();
  out.values.reserve(out.values.size() + add * train.cols());
  std::vector<double> row(train.cols());
  for (std::size_t j = 0; j < add; ++j) {
    Rng rng(cfg.seed, Stream::Smoothed, j);
    const std::size_t src = cls.minority[rng.index(cls.minority.size())];
    auto src_row = train.row(src);
    std::copy(src_row.begin(), src_row.end(), row.begin());
    for (std::size_t c = 0; c < cont.size(); ++c) {
      if (bandwidth[c] == 0.0) continue;
      row[cont[c]] = std::clamp(row[cont[c]] + bandwidth[c] * rng.normal(), lo[c], hi[c]);
    }
    out.append(row, train.labels[src], train.row_keys[src] + "~syn" + std::to_string(j),
               RowOrigin::Synthetic);
  }
  return out;
}

struct BalanceOutcome {
  FeatureTable table;
  std::vector<std::string> warnings;
};

inline BalanceOutcome balance(const FeatureTable& train, const BalanceConfig& cfg) {
  BalanceOutcome out;
  switch (cfg.method) {
    case BalanceMethod::None:
      if (train.has_origin(RowOrigin::Test))
        throw Error(ErrorCode::LeakedTestRows, "balancing received rows from the test partition");
      out.table = train;
      break;
    case BalanceMethod::Under: out.table = undersample(train, cfg); break;
    case BalanceMethod::OverDuplicate: out.table = oversample_duplicate(train, cfg); break;
    case BalanceMethod::OverSmoothed: {
      std::vector<std::string> zero;
      out.table = oversample_smoothed(train, cfg, &zero);
      for (const auto& name : zero)
        out.warnings.push_back("ZeroVariance: column '" + name +
                               "' is constant in the minority class; synthetic rows duplicate it");
      break;
    }
  }
  return out;
}

}  // namespace xg
