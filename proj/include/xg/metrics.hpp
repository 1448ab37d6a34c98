#pragma once

// Evaluation battery for binary goal/no-goal predictions. The positive class
// is "goal"; a shot is predicted positive when its probability >= threshold.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "xg/csv.hpp"
#include "xg/error.hpp"

namespace xg {

struct ConfusionMatrix {
  std::uint64_t tp = 0, fp = 0, fn = 0, tn = 0;

  std::uint64_t total() const { return tp + fp + fn + tn; }
  bool operator==(const ConfusionMatrix&) const = default;
};

namespace detail {
inline void check_lengths(std::size_t probs, std::size_t labels) {
  if (probs != labels)
    throw Error(ErrorCode::LengthMismatch,
                std::to_string(probs) + " probabilities vs " + std::to_string(labels) + " labels");
  if (probs == 0) throw Error(ErrorCode::EmptyInput, "no predictions to score");
}
}  // namespace detail

inline ConfusionMatrix confusion_at_threshold(std::span<const double> probs,
                                              std::span<const std::uint8_t> labels,
                                              double threshold = 0.5) {
  detail::check_lengths(probs.size(), labels.size());
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    const bool predicted = probs[i] >= threshold;
    if (labels[i]) {
      if (predicted) ++cm.tp; else ++cm.fn;
    } else {
      if (predicted) ++cm.fp; else ++cm.tn;
    }
  }
  return cm;
}

/// Bit flags naming the metrics whose denominator was zero (reported as 0).
enum DegenerateMetric : unsigned {
  kRecallDegenerate = 1u << 0,
  kPrecisionDegenerate = 1u << 1,
  kF1Degenerate = 1u << 2,
  kAccuracyDegenerate = 1u << 3,
  kBalancedAccuracyDegenerate = 1u << 4,
  kMccDegenerate = 1u << 5,
};

struct ThresholdMetrics {
  double recall = 0, precision = 0, f1 = 0, accuracy = 0, balanced_accuracy = 0, mcc = 0;
  unsigned degenerate = 0;
};

inline ThresholdMetrics threshold_metrics(const ConfusionMatrix& cm) {
  ThresholdMetrics m;
  const double tp = static_cast<double>(cm.tp), fp = static_cast<double>(cm.fp);
  const double fn = static_cast<double>(cm.fn), tn = static_cast<double>(cm.tn);
  auto ratio = [&](double num, double den, unsigned flag) {
    if (den == 0.0) {
      m.degenerate |= flag;
      return 0.0;
    }
    return num / den;
  };
  m.recall = ratio(tp, tp + fn, kRecallDegenerate);
  m.precision = ratio(tp, tp + fp, kPrecisionDegenerate);
  m.f1 = ratio(2.0 * tp, 2.0 * tp + fp + fn, kF1Degenerate);
  m.accuracy = ratio(tp + tn, tp + tn + fp + fn, kAccuracyDegenerate);
  if (tp + fn == 0.0 || tn + fp == 0.0) {
    m.degenerate |= kBalancedAccuracyDegenerate;
  } else {
    m.balanced_accuracy = (tp / (tp + fn) + tn / (tn + fp)) / 2.0;
  }
  const double den = (tp + fp) * (tp + fn) * (tn + fp) * (tn + fn);
  m.mcc = ratio(tp * tn - fp * fn, std::sqrt(den), kMccDegenerate);
  return m;
}

/// Mann-Whitney AUC from mid-ranks: the fraction of (positive, negative)
/// pairs ordered correctly, ties counting one half.
inline double auc(std::span<const double> probs, std::span<const std::uint8_t> labels) {
  detail::check_lengths(probs.size(), labels.size());
  const std::size_t n = probs.size();
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return probs[a] < probs[b]; });
  double rank_sum_pos = 0.0;
  std::uint64_t n_pos = 0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && probs[idx[j]] == probs[idx[i]]) ++j;
    const double mid_rank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t k = i; k < j; ++k) {
      if (labels[idx[k]]) {
        rank_sum_pos += mid_rank;
        ++n_pos;
      }
    }
    i = j;
  }
  const std::uint64_t n_neg = n - n_pos;
  if (n_pos == 0 || n_neg == 0) throw Error(ErrorCode::SingleClass, "AUC needs both classes");
  const double np = static_cast<double>(n_pos), nn = static_cast<double>(n_neg);
  return (rank_sum_pos - np * (np + 1.0) / 2.0) / (np * nn);
}

inline double brier(std::span<const double> probs, std::span<const std::uint8_t> labels) {
  detail::check_lengths(probs.size(), labels.size());
  double s = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    const double e = probs[i] - static_cast<double>(labels[i]);
    s += e * e;
  }
  return s / static_cast<double>(probs.size());
}

inline double log_loss(std::span<const double> probs, std::span<const std::uint8_t> labels,
                       double eps = 1e-15) {
  detail::check_lengths(probs.size(), labels.size());
  double s = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    const double p = std::clamp(probs[i], eps, 1.0 - eps);
    s += labels[i] ? std::log(p) : std::log(1.0 - p);
  }
  return -s / static_cast<double>(probs.size());
}

/// One scored shot as needed for the per-match error.
struct MatchTeamScore {
  std::string match_id;
  std::string team;
  int status = 0;
  double prob = 0.0;
};

/// Mean over (match, team) groups of |sum of probabilities - goals scored|.
inline double match_mae(std::span<const MatchTeamScore> shots) {
  if (shots.empty()) throw Error(ErrorCode::EmptyInput, "match_mae on zero shots");
  std::map<std::pair<std::string, std::string>, std::pair<double, double>> groups;
  for (const auto& s : shots) {
    auto& g = groups[{s.match_id, s.team}];
    g.first += s.prob;
    g.second += s.status;
  }
  double total = 0.0;
  for (const auto& [key, g] : groups) total += std::abs(g.first - g.second);
  return total / static_cast<double>(groups.size());
}

struct MetricReport {
  std::string model;
  std::string sampling;
  double recall = 0, precision = 0, f1 = 0, accuracy = 0, auc = 0, mcc = 0, brier = 0,
         log_loss = 0, balanced_accuracy = 0, mae = 0;
  double threshold = 0.5;
  std::size_t n = 0;
  unsigned degenerate = 0;
  ConfusionMatrix confusion;
};

inline MetricReport evaluate(std::span<const double> probs, std::span<const std::uint8_t> labels,
                             double threshold = 0.5,
                             std::span<const MatchTeamScore> match_scores = {}) {
  MetricReport r;
  r.confusion = confusion_at_threshold(probs, labels, threshold);
  const auto t = threshold_metrics(r.confusion);
  r.recall = t.recall;
  r.precision = t.precision;
  r.f1 = t.f1;
  r.accuracy = t.accuracy;
  r.balanced_accuracy = t.balanced_accuracy;
  r.mcc = t.mcc;
  r.degenerate = t.degenerate;
  r.auc = auc(probs, labels);
  r.brier = brier(probs, labels);
  r.log_loss = log_loss(probs, labels);
  r.mae = match_scores.empty() ? 0.0 : match_mae(match_scores);
  r.threshold = threshold;
  r.n = probs.size();
  return r;
}

inline const csv::Row& metric_csv_header() {
  static const csv::Row header{"model", "sampling",  "recall",   "precision",         "f1",
                               "accuracy", "auc",   "mcc",      "brier",             "log_loss",
                               "balanced_accuracy", "mae", "threshold", "n",         "tp",
                               "fp",       "fn",    "tn"};
  return header;
}

/// `digits` > 0 rounds for display; the default keeps full precision.
inline csv::Row metric_csv_row(const MetricReport& r, int digits = 0) {
  auto f = [&](double v) { return digits > 0 ? csv::format_fixed(v, digits) : csv::format_double(v); };
  return {r.model,
          r.sampling,
          f(r.recall),
          f(r.precision),
          f(r.f1),
          f(r.accuracy),
          f(r.auc),
          f(r.mcc),
          f(r.brier),
          f(r.log_loss),
          f(r.balanced_accuracy),
          f(r.mae),
          f(r.threshold),
          std::to_string(r.n),
          std::to_string(r.confusion.tp),
          std::to_string(r.confusion.fp),
          std::to_string(r.confusion.fn),
          std::to_string(r.confusion.tn)};
}

inline nlohmann::json metric_json(const MetricReport& r) {
  return nlohmann::json{{"model", r.model},
                        {"sampling", r.sampling},
                        {"recall", r.recall},
                        {"precision", r.precision},
                        {"f1", r.f1},
                        {"accuracy", r.accuracy},
                        {"auc", r.auc},
                        {"mcc", r.mcc},
                        {"brier", r.brier},
                        {"log_loss", r.log_loss},
                        {"balanced_accuracy", r.balanced_accuracy},
                        {"mae", r.mae},
                        {"mae_definition", "mean over (match, team) of |sum xG - goals|"},
                        {"threshold", r.threshold},
                        {"n", r.n},
                        {"confusion",
                         {{"tp", r.confusion.tp},
                          {"fp", r.confusion.fp},
                          {"fn", r.confusion.fn},
                          {"tn", r.confusion.tn}}}};
}

}  // namespace xg
