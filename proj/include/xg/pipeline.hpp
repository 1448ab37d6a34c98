#pragma once

// Config-driven end-to-end run: ingest -> derive -> encode -> split ->
// balance -> fit -> evaluate -> score -> reports / profiles / what-if.
// All randomness comes from seeds in the config, so two runs over the same
// config write byte-identical artifacts.

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstdint>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <openssl/evp.h>

#include "json.hpp"
#include "xg/balancing.hpp"
#include "xg/error.hpp"
#include "xg/feature_table.hpp"
#include "xg/forest.hpp"
#include "xg/metrics.hpp"
#include "xg/model_io.hpp"
#include "xg/profiles.hpp"
#include "xg/report.hpp"
#include "xg/shot_data.hpp"
#include "xg/synthetic.hpp"
#include "xg/understat.hpp"

namespace xg {

// ---- configuration ---------------------------------------------------------

struct GroupSpec {
  std::map<std::string, std::string> keys;  // team, match, player, season, league

  std::string label() const {
    std::string out;
    for (const auto& [k, v] : keys) out += (out.empty() ? "" : ",") + k + "=" + v;
    return out;
  }

  bool matches(const ShotRecord& r) const {
    for (const auto& [k, v] : keys) {
      const std::string& have = k == "team"     ? r.team
                                : k == "match"  ? r.match_id
                                : k == "player" ? r.player
                                : k == "season" ? r.season
                                                : std::string(to_string(r.league));
      if (have != v) return false;
    }
    return true;
  }
};

inline constexpr std::array<std::string_view, 5> kGroupKeys{"league", "match", "player", "season", "team"};

/// Parses "team=Schalke 04,match=14086" style selectors.
inline GroupSpec parse_group(std::string_view text) {
  GroupSpec g;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto comma = text.find(',', pos);
    const auto part = text.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos);
    const auto eq = part.find('=');
    if (eq == std::string_view::npos || eq == 0)
      throw Error(ErrorCode::ConfigError, "group selector '" + std::string(text) + "' needs key=value pairs");
    const std::string key(part.substr(0, eq));
    if (std::find(kGroupKeys.begin(), kGroupKeys.end(), key) == kGroupKeys.end())
      throw Error(ErrorCode::ConfigError, "unknown group key '" + key + "'");
    g.keys[key] = std::string(part.substr(eq + 1));
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return g;
}

struct WhatIfSpec {
  std::string feature;
  double from = 0.0;
  double to = 0.0;
  std::optional<GroupSpec> group;
};

struct SyntheticSource {
  std::size_t n_shots = 0;
  std::uint64_t seed = 1;
};

struct RunConfig {
  std::filesystem::path base_dir;  // directory the config was read from

  std::vector<std::filesystem::path> csv_paths;
  std::vector<std::string> match_ids;
  std::optional<SyntheticSource> synthetic;
  std::filesystem::path cache_dir = "cache";
  std::string base_url = "https://understat.com";
  double rate_limit = 1.0;
  League league = League::Other;
  bool strict = false;

  std::uint64_t split_seed = 42;
  double test_fraction = 0.25;

  BalanceConfig balance{BalanceMethod::None, 0.5, 42, 1.0};

  ModelKind model_kind = ModelKind::RandomForest;
  std::uint64_t model_seed = 42;
  ForestParams forest;
  GbtParams gbt;
  std::size_t threads = 0;

  double threshold = 0.5;

  std::vector<std::string> profile_features{"distance_to_goal", "angle_to_goal"};
  std::size_t grid_points = 101;
  std::vector<GroupSpec> profile_groups;
  bool exclude_penalties = false;
  std::vector<BalanceMethod> compare_balance;

  std::vector<WhatIfSpec> whatif;

  std::vector<ModelKind> sweep_models;
  std::vector<BalanceMethod> sweep_balance;

  std::filesystem::path output_dir = "out";

  nlohmann::json source;  // config document as read, for hashing
};

namespace detail {

using nlohmann::json;

class ConfigReader {
 public:
  ConfigReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail("must be an object");
  }

  [[noreturn]] void fail(const std::string& what, const std::string& key = {}) const {
    throw Error(ErrorCode::ConfigError, (key.empty() ? path_ : path_ + "." + key) + ": " + what);
  }

  void allow(std::initializer_list<std::string_view> keys) const {
    for (const auto& [k, v] : j_.items())
      if (std::find(keys.begin(), keys.end(), k) == keys.end()) fail("unknown key", k);
  }

  bool has(const char* key) const { return j_.contains(key); }

  ConfigReader child(const char* key) const { return ConfigReader(j_.at(key), path_ + "." + key); }

  const json& raw(const char* key) const { return j_.at(key); }
  std::string path(const char* key) const { return path_ + "." + key; }

  template <typename T>
  void read(const char* key, T& out) const {
    if (!j_.contains(key)) return;
    const auto& v = j_.at(key);
    try {
      if constexpr (std::is_same_v<T, bool>) {
        if (!v.is_boolean()) fail("expected a boolean", key);
      } else if constexpr (std::is_integral_v<T>) {
        if (!v.is_number_integer() || (std::is_unsigned_v<T> && v.get<std::int64_t>() < 0))
          fail("expected a non-negative integer", key);
      } else if constexpr (std::is_floating_point_v<T>) {
        if (!v.is_number()) fail("expected a number", key);
      } else if constexpr (std::is_same_v<T, std::string>) {
        if (!v.is_string()) fail("expected a string", key);
      }
      out = v.get<T>();
    } catch (const json::exception& e) {
      fail(e.what(), key);
    }
  }

  std::vector<std::string> strings(const char* key) const {
    std::vector<std::string> out;
    if (!j_.contains(key)) return out;
    const auto& v = j_.at(key);
    if (v.is_string()) return {v.get<std::string>()};
    if (!v.is_array()) fail("expected a string or list of strings", key);
    for (const auto& e : v) {
      if (!e.is_string() && !e.is_number_integer()) fail("expected strings", key);
      out.push_back(e.is_string() ? e.get<std::string>() : e.dump());
    }
    return out;
  }

 private:
  const json& j_;
  std::string path_;
};

inline BalanceMethod balance_from(const ConfigReader& r, const std::string& text, const char* key) {
  auto m = parse_balance_method(text);
  if (!m) r.fail("unknown balance method '" + text + "'", key);
  return *m;
}

inline ModelKind model_kind_from(const ConfigReader& r, const std::string& text, const char* key) {
  if (text == "forest" || text == "random_forest") return ModelKind::RandomForest;
  if (text == "gbt") return ModelKind::Gbt;
  r.fail("unknown model kind '" + text + "' (forest|gbt)", key);
}

inline GroupSpec group_from_json(const ConfigReader& parent, const json& g, const std::string& where) {
  GroupSpec spec;
  if (g.is_string()) return parse_group(g.get<std::string>());
  if (!g.is_object() || g.empty()) parent.fail("group must be an object or 'key=value,...' string", where);
  for (const auto& [k, v] : g.items()) {
    if (std::find(kGroupKeys.begin(), kGroupKeys.end(), k) == kGroupKeys.end())
      parent.fail("unknown group key '" + k + "'", where);
    if (!v.is_string() && !v.is_number_integer()) parent.fail("group values must be strings", where);
    spec.keys[k] = v.is_string() ? v.get<std::string>() : v.dump();
  }
  return spec;
}

}  // namespace detail

inline std::filesystem::path resolve_against(const std::filesystem::path& base, const std::filesystem::path& p) {
  return p.is_absolute() || base.empty() ? p : base / p;
}

/// Checks cross-field constraints and that referenced inputs exist.
inline void validate_config(const RunConfig& c) {
  auto fail = [](const std::string& m) { throw Error(ErrorCode::ConfigError, m); };
  if (c.csv_paths.empty() && c.match_ids.empty() && !c.synthetic)
    fail("data: no csv, match_ids or synthetic source given");
  for (const auto& p : c.csv_paths)
    if (!std::filesystem::is_regular_file(p)) fail("data.csv: file not found: " + p.string());
  if (!(c.test_fraction > 0.0 && c.test_fraction < 1.0)) fail("split.test_fraction must lie in (0, 1)");
  if (!(c.balance.target_minority_fraction > 0.0 && c.balance.target_minority_fraction < 1.0))
    fail("balance.target_minority_fraction must lie in (0, 1)");
  if (!(c.balance.bandwidth_scale > 0.0)) fail("balance.bandwidth_scale must be positive");
  if (!(c.threshold >= 0.0 && c.threshold <= 1.0)) fail("metrics.threshold must lie in [0, 1]");
  if (c.grid_points < 2) fail("profiles.grid_points must be at least 2");
  if (c.forest.n_trees == 0) fail("model.forest.n_trees must be positive");
  if (c.forest.min_leaf == 0) fail("model.forest.min_leaf must be positive");
  if (!(c.gbt.learning_rate >= 0.0)) fail("model.gbt.learning_rate must be non-negative");
  if (!(c.gbt.subsample > 0.0 && c.gbt.subsample <= 1.0)) fail("model.gbt.subsample must lie in (0, 1]");
  if (c.gbt.min_leaf == 0) fail("model.gbt.min_leaf must be positive");
  if (c.rate_limit <= 0.0) fail("data.rate_limit must be positive");
}

inline RunConfig config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {}) {
  using detail::ConfigReader;
  RunConfig c;
  c.base_dir = base_dir;
  c.source = j;
  ConfigReader root(j, "config");
  root.allow({"data", "split", "balance", "model", "metrics", "profiles", "whatif", "sweep", "output_dir", "threads"});
  root.read("threads", c.threads);

  if (!root.has("data")) root.fail("missing section", "data");
  {
    auto d = root.child("data");
    d.allow({"csv", "match_ids", "synthetic", "cache_dir", "base_url", "rate_limit", "league", "strict"});
    for (const auto& p : d.strings("csv")) c.csv_paths.push_back(resolve_against(base_dir, p));
    c.match_ids = d.strings("match_ids");
    if (d.has("synthetic")) {
      auto s = d.child("synthetic");
      s.allow({"n_shots", "seed"});
      SyntheticSource src;
      s.read("n_shots", src.n_shots);
      s.read("seed", src.seed);
      if (src.n_shots == 0) s.fail("must be positive", "n_shots");
      c.synthetic = src;
    }
    std::string cache = c.cache_dir.string();
    d.read("cache_dir", cache);
    c.cache_dir = resolve_against(base_dir, cache);
    d.read("base_url", c.base_url);
    d.read("rate_limit", c.rate_limit);
    std::string league = "Other";
    d.read("league", league);
    auto l = parse_league(league);
    if (!l) d.fail("unknown league '" + league + "'", "league");
    c.league = *l;
    d.read("strict", c.strict);
  }
  if (root.has("split")) {
    auto s = root.child("split");
    s.allow({"seed", "test_fraction"});
    s.read("seed", c.split_seed);
    s.read("test_fraction", c.test_fraction);
  }
  if (root.has("balance")) {
    auto b = root.child("balance");
    b.allow({"method", "target_minority_fraction", "seed", "bandwidth_scale"});
    std::string method = "none";
    b.read("method", method);
    c.balance.method = detail::balance_from(b, method, "method");
    b.read("target_minority_fraction", c.balance.target_minority_fraction);
    b.read("seed", c.balance.seed);
    b.read("bandwidth_scale", c.balance.bandwidth_scale);
  }
  if (root.has("model")) {
    auto m = root.child("model");
    m.allow({"kind", "seed", "forest", "gbt"});
    std::string kind = "forest";
    m.read("kind", kind);
    c.model_kind = detail::model_kind_from(m, kind, "kind");
    m.read("seed", c.model_seed);
    if (m.has("forest")) {
      auto f = m.child("forest");
      f.allow({"n_trees", "mtry", "min_leaf", "max_depth", "bootstrap", "vote_mode"});
      f.read("n_trees", c.forest.n_trees);
      f.read("mtry", c.forest.mtry);
      f.read("min_leaf", c.forest.min_leaf);
      f.read("max_depth", c.forest.max_depth);
      f.read("bootstrap", c.forest.bootstrap);
      std::string vote = "hard_vote";
      f.read("vote_mode", vote);
      if (vote != "hard_vote" && vote != "leaf_prob") f.fail("expected hard_vote or leaf_prob", "vote_mode");
      c.forest.vote_mode = vote == "hard_vote" ? VoteMode::HardVote : VoteMode::LeafProb;
    }
    if (m.has("gbt")) {
      auto g = m.child("gbt");
      g.allow({"n_rounds", "learning_rate", "max_depth", "min_leaf", "subsample"});
      g.read("n_rounds", c.gbt.n_rounds);
      g.read("learning_rate", c.gbt.learning_rate);
      g.read("max_depth", c.gbt.max_depth);
      g.read("min_leaf", c.gbt.min_leaf);
      g.read("subsample", c.gbt.subsample);
    }
  }
  if (root.has("metrics")) {
    auto m = root.child("metrics");
    m.allow({"threshold"});
    m.read("threshold", c.threshold);
  }
  if (root.has("profiles")) {
    auto p = root.child("profiles");
    p.allow({"features", "grid_points", "groups", "exclude_penalties", "compare_balance"});
    if (p.has("features")) c.profile_features = p.strings("features");
    p.read("grid_points", c.grid_points);
    p.read("exclude_penalties", c.exclude_penalties);
    if (p.has("groups")) {
      if (!p.raw("groups").is_array()) p.fail("expected a list", "groups");
      for (const auto& g : p.raw("groups")) c.profile_groups.push_back(detail::group_from_json(p, g, "groups"));
    }
    for (const auto& m : p.strings("compare_balance"))
      c.compare_balance.push_back(detail::balance_from(p, m, "compare_balance"));
  }
  if (root.has("whatif")) {
    if (!j.at("whatif").is_array()) root.fail("expected a list", "whatif");
    std::size_t k = 0;
    for (const auto& w : j.at("whatif")) {
      ConfigReader r(w, "config.whatif[" + std::to_string(k++) + "]");
      r.allow({"feature", "from", "to", "group"});
      WhatIfSpec spec;
      if (!r.has("feature") || !r.has("from") || !r.has("to")) r.fail("needs feature, from and to");
      r.read("feature", spec.feature);
      r.read("from", spec.from);
      r.read("to", spec.to);
      if (r.has("group")) spec.group = detail::group_from_json(r, r.raw("group"), "group");
      c.whatif.push_back(std::move(spec));
    }
  }
  if (root.has("sweep")) {
    auto s = root.child("sweep");
    s.allow({"models", "balance"});
    for (const auto& m : s.strings("models")) c.sweep_models.push_back(detail::model_kind_from(s, m, "models"));
    for (const auto& b : s.strings("balance")) c.sweep_balance.push_back(detail::balance_from(s, b, "balance"));
  }
  std::string out = c.output_dir.string();
  root.read("output_dir", out);
  c.output_dir = resolve_against(base_dir, out);

  if (const char* env = std::getenv("XG_CACHE_DIR"); env && *env) c.cache_dir = env;
  return c;
}

inline RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::ConfigError, "config file not found: " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ConfigError, path.string() + ": " + e.what());
  }
  return config_from_json(j, path.parent_path());
}

// ---- helpers -----------------------------------------------------------------

inline std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw Error(ErrorCode::IoError, "sha256 failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned i = 0; i < len; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 15]);
  }
  return out;
}

/// Exclusive per-directory lock; removed on destruction.
class OutputLock {
 public:
  explicit OutputLock(const std::filesystem::path& dir) : path_(dir / ".xg.lock") {
    std::filesystem::create_directories(dir);
    const int fd = ::open(path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
    if (fd < 0) {
      if (errno == EEXIST)
        throw Error(ErrorCode::Locked, "another run holds " + path_.string());
      throw Error(ErrorCode::IoError, "cannot create " + path_.string() + ": " + std::strerror(errno));
    }
    const std::string pid = std::to_string(::getpid()) + "\n";
    [[maybe_unused]] auto n = ::write(fd, pid.data(), pid.size());
    ::close(fd);
  }
  ~OutputLock() {
    std::error_code ec;
    std::filesystem::remove(path_, ec);
  }
  OutputLock(const OutputLock&) = delete;
  OutputLock& operator=(const OutputLock&) = delete;

 private:
  std::filesystem::path path_;
};

// ---- pipeline ------------------------------------------------------------------

/// Optional output stages; the core through `score` always runs.
enum PipelineOutputs : unsigned {
  kOutIngestOnly = 1u << 0,  // stop after derive
  kOutTrainOnly = 1u << 1,   // stop after fit
  kOutEvaluate = 1u << 2,
  kOutScore = 1u << 3,
  kOutReports = 1u << 4,
  kOutProfiles = 1u << 5,
  kOutWhatIf = 1u << 6,
  kOutSweep = 1u << 7,
  kOutAll = kOutEvaluate | kOutScore | kOutReports | kOutProfiles | kOutWhatIf | kOutSweep,
};

struct PipelineResult {
  std::vector<std::string> stages;
  std::vector<std::string> warnings;
  std::vector<ShotRecord> records;
  std::vector<FeaturedShot> shots;
  FeatureTable table;
  TrainTestSplit split;
  FeatureTable balanced;
  std::optional<EnsembleModel> model;
  std::optional<MetricReport> metrics;
  std::vector<ScoredShot> scored;
  std::vector<ProfileCurve> curves;
  std::vector<std::pair<WhatIfSpec, WhatIf>> whatifs;
  std::vector<MetricReport> sweep;
  std::vector<std::string> artifacts;  // file names written, in order
  nlohmann::json manifest;
};

namespace detail {

inline EnsembleModel fit_model(const FeatureTable& train, ModelKind kind, const RunConfig& c,
                               BalanceMethod method) {
  EnsembleModel model;
  if (kind == ModelKind::RandomForest) {
    auto p = c.forest;
    p.threads = c.threads;
    model = fit_forest(train, p, c.model_seed);
  } else {
    model = fit_gbt(train, c.gbt, c.model_seed);
  }
  model.meta.balance_method = std::string(to_string(method));
  return model;
}

inline std::vector<MatchTeamScore> match_scores(const FeatureTable& rows, std::span<const double> probs,
                                                const std::map<std::string, const ShotRecord*>& by_id) {
  std::vector<MatchTeamScore> out;
  out.reserve(rows.rows());
  for (std::size_t i = 0; i < rows.rows(); ++i) {
    const ShotRecord& r = *by_id.at(rows.row_keys[i]);
    out.push_back({r.match_id, r.team, r.status(), probs[i]});
  }
  return out;
}

inline std::string model_label(ModelKind k) { return k == ModelKind::RandomForest ? "forest" : "gbt"; }

}  // namespace detail

class Pipeline {
 public:
  explicit Pipeline(RunConfig config) : c_(std::move(config)) {}

  const RunConfig& config() const { return c_; }

  PipelineResult run(unsigned outputs = kOutAll) {
    validate_config(c_);
    OutputLock lock(c_.output_dir);
    PipelineResult r;
    stage(r, "ingest", [&] { ingest(r); });
    stage(r, "derive", [&] { derive(r); });
    if (!(outputs & kOutIngestOnly)) {
      stage(r, "encode", [&] { r.table = encode_features(r.shots); });
      stage(r, "split", [&] { r.split = split_train_test(r.table, c_.test_fraction, c_.split_seed); });
      stage(r, "balance", [&] { balance_train(r); });
      stage(r, "fit", [&] { fit(r); });
      if (!(outputs & kOutTrainOnly)) {
        if (outputs & kOutEvaluate) stage(r, "evaluate", [&] { evaluate_test(r); });
        if (outputs & (kOutScore | kOutReports)) stage(r, "score", [&] { score(r); });
        if (outputs & kOutReports) stage(r, "reports", [&] { reports(r); });
        if (outputs & kOutProfiles) stage(r, "profiles", [&] { profiles(r); });
        if ((outputs & kOutWhatIf) && !c_.whatif.empty()) stage(r, "whatif", [&] { whatif(r); });
        if ((outputs & kOutSweep) && (!c_.sweep_models.empty() || !c_.sweep_balance.empty()))
          stage(r, "sweep", [&] { sweep(r); });
      }
    }
    write_manifest(r);
    return r;
  }

 private:
  template <typename Fn>
  void stage(PipelineResult& r, const char* name, Fn&& fn) {
    try {
      fn();
    } catch (const Error& e) {
      throw Error(e.code(), std::string("stage ") + name + ": " + e.message(), e.detail());
    } catch (const std::exception& e) {
      throw Error(ErrorCode::IoError, std::string("stage ") + name + ": " + e.what());
    }
    r.stages.emplace_back(name);
  }

  std::filesystem::path out(const std::string& name, PipelineResult& r) {
    r.artifacts.push_back(name);
    return c_.output_dir / name;
  }

  void ingest(PipelineResult& r) {
    for (const auto& p : c_.csv_paths) {
      auto parsed = parse_shot_csv(p, c_.strict);
      dropped_own_goals_ += parsed.dropped_own_goals;
      skipped_rows_ += parsed.skipped.size();
      for (const auto& issue : parsed.skipped)
        r.warnings.push_back(p.filename().string() + ":" + std::to_string(issue.line) + ": " + issue.column +
                             ": " + issue.reason);
      for (auto& rec : parsed.records) r.records.push_back(std::move(rec));
    }
    if (!c_.match_ids.empty()) {
      understat::FetchOptions opt;
      opt.cache_dir = c_.cache_dir;
      opt.base_url = c_.base_url;
      opt.league = c_.league;
      understat::RateLimiter limiter(c_.rate_limit);
      for (const auto& id : c_.match_ids)
        for (auto& rec : understat::fetch_match(id, opt, limiter)) {
          if (rec.result == ShotResult::OwnGoal) {
            ++dropped_own_goals_;
            continue;
          }
          r.records.push_back(std::move(rec));
        }
    }
    if (c_.synthetic) {
      synthetic::GeneratorConfig g;
      g.n_shots = c_.synthetic->n_shots;
      g.seed = c_.synthetic->seed;
      for (auto& rec : synthetic::generate(g)) r.records.push_back(std::move(rec));
    }
    // First occurrence of a shot id wins.
    std::set<std::string> seen;
    std::vector<ShotRecord> unique;
    for (auto& rec : r.records) {
      if (seen.insert(rec.shot_id).second)
        unique.push_back(std::move(rec));
      else
        ++duplicates_;
    }
    r.records = std::move(unique);
    if (r.records.empty()) throw Error(ErrorCode::EmptyTable, "no shots ingested");
    write_shot_csv(r.records, out("shots_clean.csv", r), false);
    const auto summary = summarize_league(r.records);
    std::vector<csv::Row> rows{{"league", "matches", "shots", "shots_per_match", "goals", "goals_per_match",
                                "conversion_percent"}};
    auto f2 = [](double v) { return csv::format_fixed(v, 2); };
    for (const auto& s : summary.leagues)
      rows.push_back({s.league, std::to_string(s.match_count), std::to_string(s.shot_count),
                      f2(s.mean_shots_per_match), std::to_string(s.goal_count), f2(s.mean_goals_per_match),
                      f2(s.conversion_percent)});
    rows.push_back({"Mean", f2(summary.mean.match_count), f2(summary.mean.shot_count),
                    f2(summary.mean.mean_shots_per_match), f2(summary.mean.goal_count),
                    f2(summary.mean.mean_goals_per_match), f2(summary.mean.conversion_percent)});
    rows.push_back({"Total", std::to_string(summary.total.match_count), std::to_string(summary.total.shot_count),
                    "", std::to_string(summary.total.goal_count), "", ""});
    detail::write_csv(out("league_summary.csv", r), rows);
    detail::write_file(out("league_summary.txt", r), detail::render_aligned(rows));
  }

  void derive(PipelineResult& r) {
    std::vector<std::string> skipped;
    r.shots = derive_features(r.records, skipped);
    degenerate_ = skipped.size();
    for (const auto& id : skipped) r.warnings.push_back("shot " + id + ": degenerate geometry, skipped");
    if (r.shots.empty()) throw Error(ErrorCode::EmptyTable, "no shots with usable geometry");
    write_geometry_histograms(r.shots, out("geometry_histograms.csv", r));
  }

  void balance_train(PipelineResult& r) {
    auto outcome = balance(r.split.train, c_.balance);
    r.balanced = std::move(outcome.table);
    for (auto& w : outcome.warnings) r.warnings.push_back(std::move(w));
  }

  void fit(PipelineResult& r) {
    r.model = detail::fit_model(r.balanced, c_.model_kind, c_, c_.balance.method);
    save_model(*r.model, out("model.json", r));
  }

  std::map<std::string, const ShotRecord*> records_by_id(const PipelineResult& r) const {
    std::map<std::string, const ShotRecord*> by_id;
    for (const auto& s : r.shots) by_id.emplace(s.record.shot_id, &s.record);
    return by_id;
  }

  MetricReport evaluate_model(const PipelineResult& r, const EnsembleModel& model, BalanceMethod method) {
    const auto probs = predict_proba(model, r.split.test, c_.threads);
    const auto scores = detail::match_scores(r.split.test, probs, records_by_id(r));
    auto m = evaluate(probs, r.split.test.labels, c_.threshold, scores);
    m.model = detail::model_label(model.kind);
    m.sampling = std::string(to_string(method));
    return m;
  }

  void evaluate_test(PipelineResult& r) {
    r.metrics = evaluate_model(r, *r.model, c_.balance.method);
    std::vector<csv::Row> rows{metric_csv_header(), metric_csv_row(*r.metrics)};
    detail::write_csv(out("metrics.csv", r), rows);
    detail::write_file(out("metrics.json", r), metric_json(*r.metrics).dump(2) + "\n");
  }

  void score(PipelineResult& r) {
    const auto probs = predict_proba(*r.model, r.table, c_.threads);
    r.scored.clear();
    r.scored.reserve(r.shots.size());
    for (std::size_t i = 0; i < r.shots.size(); ++i) r.scored.push_back({r.shots[i], probs[i]});
    write_scored_shots(r.scored, out("shots_scored.csv", r));
  }

  void reports(PipelineResult& r) {
    std::vector<MatchReport> matches;
    for (const auto& g : group_shots(std::span<const ScoredShot>(r.scored),
                                     [](const ShotRecord& s) { return s.match_id; }))
      matches.push_back(match_report(g));
    std::vector<PlayerSeasonReport> players;
    for (const auto& g : group_shots(std::span<const ScoredShot>(r.scored),
                                     [](const ShotRecord& s) { return s.player + '\x1f' + s.season; }))
      players.push_back(player_season_report(g));
    std::sort(players.begin(), players.end(), [](const auto& a, const auto& b) {
      return std::tie(a.season, a.player) < std::tie(b.season, b.player);
    });
    write_match_reports(matches, out("match_reports.csv", r), out("match_reports.txt", r));
    write_player_reports(players, out("player_reports.csv", r), out("player_reports.txt", r));
  }

  /// Rows of the full table eligible for profiling, with their records.
  std::vector<std::size_t> profile_rows(const PipelineResult& r, const GroupSpec* group) const {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < r.shots.size(); ++i) {
      const auto& rec = r.shots[i].record;
      if (c_.exclude_penalties && rec.situation == Situation::Penalty) continue;
      if (group && !group->matches(rec)) continue;
      idx.push_back(i);
    }
    if (idx.empty())
      throw Error(ErrorCode::EmptyGroup, "no shots match " + (group ? group->label() : std::string("ALL")));
    return idx;
  }

  ProfileCurve group_curve(const PipelineResult& r, const EnsembleModel& model, const FeatureGrid& grid,
                           const GroupSpec* group) const {
    const auto idx = profile_rows(r, group);
    return aggregate_profiles(model, r.table, idx, grid, group ? group->label() : "ALL", c_.threads);
  }

  static std::string svg_name(const std::string& stem, const std::string& feature) {
    std::string safe;
    for (char ch : feature) safe.push_back(std::isalnum(static_cast<unsigned char>(ch)) ? ch : '_');
    return stem + "_" + safe + ".svg";
  }

  void profiles(PipelineResult& r) {
    const auto base = profile_rows(r, nullptr);
    const FeatureTable pool = r.table.select(base);
    std::vector<ProfileCurve> compare_curves;
    std::vector<std::pair<BalanceMethod, EnsembleModel>> compare_models;
    for (auto method : c_.compare_balance) {
      BalanceConfig bc = c_.balance;
      bc.method = method;
      auto balanced = balance(r.split.train, bc).table;
      compare_models.emplace_back(method, detail::fit_model(balanced, ModelKind::RandomForest, c_, method));
    }
    for (const auto& feature : c_.profile_features) {
      const auto grid = grid_for_feature(pool, feature, c_.grid_points);
      std::vector<ProfileCurve> curves{group_curve(r, *r.model, grid, nullptr)};
      for (const auto& g : c_.profile_groups) curves.push_back(group_curve(r, *r.model, grid, &g));
      SvgOptions opt;
      opt.title = "Aggregated xG profile: " + feature;
      opt.x_label = feature;
      emit_curve_svg(curves, out(svg_name("profile", feature), r), opt);
      for (auto& c : curves) r.curves.push_back(std::move(c));

      if (!compare_models.empty()) {
        std::vector<ProfileCurve> cmp;
        for (const auto& [method, model] : compare_models) {
          auto c = pdp(model, pool, grid, c_.threads);
          c.group_label = std::string(to_string(method));
          cmp.push_back(std::move(c));
        }
        opt.title = "Partial dependence by sampling method: " + feature;
        emit_curve_svg(cmp, out(svg_name("pdp_compare", feature), r), opt);
        for (auto& c : cmp) compare_curves.push_back(std::move(c));
      }
    }
    write_curves_csv(r.curves, out("profiles.csv", r));
    if (!compare_curves.empty()) write_curves_csv(compare_curves, out("pdp_compare.csv", r));
  }

  void whatif(PipelineResult& r) {
    const csv::Row header{"feature", "group_label", "from", "to", "ap_from", "ap_to", "ratio", "percent_change"};
    std::vector<csv::Row> rows{header}, text{header};
    for (const auto& spec : c_.whatif) {
      const auto pool = r.table.select(profile_rows(r, nullptr));
      auto grid = grid_for_feature(pool, spec.feature, c_.grid_points);
      if (grid.kind != FeatureGrid::Kind::Continuous)
        throw Error(ErrorCode::OutOfGrid, "what-if needs a continuous feature, got " + spec.feature);
      const auto curve = group_curve(r, *r.model, grid, spec.group ? &*spec.group : nullptr);
      const auto w = what_if_ratio(curve, spec.from, spec.to);
      r.whatifs.emplace_back(spec, w);
      rows.push_back({spec.feature, curve.group_label, csv::format_double(spec.from), csv::format_double(spec.to),
                      csv::format_double(w.ap_from), csv::format_double(w.ap_to), csv::format_double(w.ratio),
                      csv::format_double(w.percent_change)});
      text.push_back({spec.feature, curve.group_label, csv::format_double(spec.from), csv::format_double(spec.to),
                      csv::format_fixed(w.ap_from, 4), csv::format_fixed(w.ap_to, 4), csv::format_fixed(w.ratio, 3),
                      csv::format_fixed(w.percent_change, 1)});
    }
    detail::write_csv(out("whatif.csv", r), rows);
    detail::write_file(out("whatif.txt", r), detail::render_aligned(text));
  }

  void sweep(PipelineResult& r) {
    auto models = c_.sweep_models.empty() ? std::vector<ModelKind>{c_.model_kind} : c_.sweep_models;
    auto methods = c_.sweep_balance.empty() ? std::vector<BalanceMethod>{c_.balance.method} : c_.sweep_balance;
    std::vector<csv::Row> rows{metric_csv_header()}, text{metric_csv_header()};
    for (auto kind : models)
      for (auto method : methods) {
        BalanceConfig bc = c_.balance;
        bc.method = method;
        const auto balanced = balance(r.split.train, bc).table;
        const auto model = detail::fit_model(balanced, kind, c_, method);
        r.sweep.push_back(evaluate_model(r, model, method));
        rows.push_back(metric_csv_row(r.sweep.back()));
        text.push_back(metric_csv_row(r.sweep.back(), 4));
      }
    detail::write_csv(out("sweep.csv", r), rows);
    detail::write_file(out("sweep.txt", r), detail::render_aligned(text));
  }

  void write_manifest(PipelineResult& r) {
    using nlohmann::json;
    json m;
    m["config_sha256"] = sha256_hex(c_.source.dump());
    m["seeds"] = {{"split", c_.split_seed}, {"balance", c_.balance.seed}, {"model", c_.model_seed}};
    json rows = {{"records", r.records.size()},
                 {"dropped_own_goals", dropped_own_goals_},
                 {"skipped_rows", skipped_rows_},
                 {"duplicate_shot_ids", duplicates_},
                 {"degenerate_geometry", degenerate_},
                 {"featured", r.shots.size()}};
    if (!r.split.train.empty()) {
      rows["train"] = r.split.train.rows();
      rows["test"] = r.split.test.rows();
      rows["balanced"] = r.balanced.rows();
      rows["synthetic"] = static_cast<std::size_t>(
          std::count(r.balanced.origins.begin(), r.balanced.origins.end(), RowOrigin::Synthetic));
      rows["train_goals"] = r.split.train.count(1);
      rows["balanced_goals"] = r.balanced.count(1);
    }
    m["rows"] = rows;
    if (r.metrics) m["metrics"] = metric_json(*r.metrics);
    if (!r.sweep.empty()) {
      m["sweep"] = json::array();
      for (const auto& s : r.sweep) m["sweep"].push_back(metric_json(s));
    }
    m["stages"] = r.stages;
    m["warnings"] = r.warnings;
    json files = json::array();
    for (const auto& name : r.artifacts) {
      std::ifstream in(c_.output_dir / name, std::ios::binary);
      std::stringstream buf;
      buf << in.rdbuf();
      files.push_back({{"name", name}, {"sha256", sha256_hex(buf.str())}});
    }
    m["artifacts"] = files;
    r.manifest = m;
    detail::write_file(c_.output_dir / "manifest.json", m.dump(2) + "\n");
  }

  RunConfig c_;
  std::size_t dropped_own_goals_ = 0;
  std::size_t skipped_rows_ = 0;
  std::size_t duplicates_ = 0;
  std::size_t degenerate_ = 0;
};

inline PipelineResult run_pipeline(const RunConfig& config, unsigned outputs = kOutAll) {
  return Pipeline(config).run(outputs);
}

}  // namespace xg
