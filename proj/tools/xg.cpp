// Command-line front end. Exit codes: 0 success, 1 invalid input or config,
// 2 runtime failure.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "xg/pipeline.hpp"

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct Overrides {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> balance;
  std::optional<std::string> model;
  std::optional<double> threshold;
  std::optional<std::string> out;
  std::optional<std::string> cache;
  std::vector<std::string> features;
  std::vector<std::string> groups;
  std::optional<double> from;
  std::optional<double> to;
};

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config, "run configuration (JSON)")->required()->check(CLI::ExistingFile);
  cmd->add_option("--seed", o.seed, "override split, balance and model seeds");
  cmd->add_option("--balance", o.balance, "none|under|over_duplicate|over_smoothed");
  cmd->add_option("--model", o.model, "forest|gbt");
  cmd->add_option("--threshold", o.threshold, "classification threshold");
  cmd->add_option("--out", o.out, "output directory");
  cmd->add_option("--cache", o.cache, "provider page cache directory");
}

json read_json(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw xg::Error(xg::ErrorCode::ConfigError, path.string() + ": " + e.what());
  }
}

xg::RunConfig build_config(const Overrides& o, bool whatif_command) {
  json j = read_json(o.config);
  if (!j.is_object()) throw xg::Error(xg::ErrorCode::ConfigError, "config must be a JSON object");
  if (o.seed) {
    j["split"]["seed"] = *o.seed;
    j["balance"]["seed"] = *o.seed;
    j["model"]["seed"] = *o.seed;
  }
  if (o.balance) j["balance"]["method"] = *o.balance;
  if (o.model) j["model"]["kind"] = *o.model;
  if (o.threshold) j["metrics"]["threshold"] = *o.threshold;
  if (o.out) j["output_dir"] = fs::absolute(*o.out).string();
  if (o.cache) j["data"]["cache_dir"] = fs::absolute(*o.cache).string();
  if (whatif_command) {
    json w = {{"feature", o.features.front()}, {"from", *o.from}, {"to", *o.to}};
    if (!o.groups.empty()) w["group"] = o.groups.front();
    j["whatif"] = json::array({w});
  } else {
    if (!o.features.empty()) j["profiles"]["features"] = o.features;
    if (!o.groups.empty()) j["profiles"]["groups"] = o.groups;
  }
  return xg::config_from_json(j, fs::path(o.config).parent_path());
}

void print_summary(const xg::PipelineResult& r, const xg::RunConfig& c) {
  std::cout << "stages: ";
  for (std::size_t i = 0; i < r.stages.size(); ++i) std::cout << (i ? " -> " : "") << r.stages[i];
  std::cout << "\nshots: " << r.shots.size();
  if (!r.split.train.empty())
    std::cout << " (train " << r.split.train.rows() << ", test " << r.split.test.rows() << ", balanced "
              << r.balanced.rows() << ")";
  std::cout << "\n";
  if (r.metrics) {
    const auto& m = *r.metrics;
    std::cout << "test metrics @" << m.threshold << ": recall " << xg::csv::format_fixed(m.recall, 3)
              << "  precision " << xg::csv::format_fixed(m.precision, 3) << "  balanced_accuracy "
              << xg::csv::format_fixed(m.balanced_accuracy, 3) << "  auc " << xg::csv::format_fixed(m.auc, 3)
              << "  brier " << xg::csv::format_fixed(m.brier, 4) << "  mae " << xg::csv::format_fixed(m.mae, 3)
              << "\n";
  }
  for (const auto& [spec, w] : r.whatifs)
    std::cout << "what-if " << spec.feature << " " << spec.from << " -> " << spec.to << ": "
              << xg::csv::format_fixed(w.ap_from, 4) << " -> " << xg::csv::format_fixed(w.ap_to, 4) << " ("
              << (w.percent_change >= 0 ? "+" : "") << xg::csv::format_fixed(w.percent_change, 1) << "%)\n";
  if (!r.warnings.empty()) std::cerr << r.warnings.size() << " warning(s); see manifest.json\n";
  std::cout << "artifacts in " << c.output_dir.string() << "\n";
}

int run_fetch(const std::vector<std::string>& ids, const std::string& cache, double rate, const std::string& league,
              const std::string& base_url, const std::string& out) {
  auto parsed_league = xg::parse_league(league);
  if (!parsed_league) throw xg::Error(xg::ErrorCode::ConfigError, "unknown league '" + league + "'");
  xg::understat::FetchOptions opt;
  opt.cache_dir = cache;
  if (const char* env = std::getenv("XG_CACHE_DIR"); env && *env) opt.cache_dir = env;
  opt.base_url = base_url;
  opt.league = *parsed_league;
  xg::understat::RateLimiter limiter(rate);
  std::vector<xg::ShotRecord> all;
  for (const auto& id : ids) {
    auto shots = xg::understat::fetch_match(id, opt, limiter);
    std::cout << "match " << id << ": " << shots.size() << " shots\n";
    for (auto& s : shots) all.push_back(std::move(s));
  }
  xg::write_shot_csv(all, out, false);
  std::cout << "wrote " << all.size() << " shots to " << out << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Expected-goals modelling toolkit"};
  app.require_subcommand(1);

  Overrides o;
  struct Command {
    const char* name;
    const char* help;
    unsigned outputs;
  };
  const Command commands[] = {
      {"ingest", "parse and validate shot data, derive geometry", xg::kOutIngestOnly},
      {"train", "fit the configured model", xg::kOutTrainOnly},
      {"evaluate", "fit and score the test partition", xg::kOutEvaluate},
      {"score", "fit and attach xG to every shot", xg::kOutScore},
      {"report", "match and player-season tables", xg::kOutEvaluate | xg::kOutReports},
      {"profile", "aggregated profiles and SVG curves", xg::kOutProfiles},
      {"whatif", "ratio of aggregated xG between two feature values", xg::kOutWhatIf},
      {"run", "the full pipeline", xg::kOutAll},
  };
  std::vector<std::pair<CLI::App*, const Command*>> subs;
  for (const auto& c : commands) {
    auto* sub = app.add_subcommand(c.name, c.help);
    add_common(sub, o);
    if (std::string(c.name) == "profile") {
      sub->add_option("--feature", o.features, "feature to profile (repeatable)");
      sub->add_option("--group", o.groups, "group selector, e.g. team=X,match=Y (repeatable)");
    }
    if (std::string(c.name) == "whatif") {
      sub->add_option("--feature", o.features, "continuous feature")->required()->expected(1);
      sub->add_option("--from", o.from, "baseline value")->required();
      sub->add_option("--to", o.to, "counterfactual value")->required();
      sub->add_option("--group", o.groups, "group selector, default all shots")->expected(0, 1);
    }
    subs.emplace_back(sub, &c);
  }

  std::vector<std::string> match_ids;
  std::string cache = "cache", league = "Other", base_url = "https://understat.com", fetch_out = "shots.csv";
  double rate = 1.0;
  auto* fetch = app.add_subcommand("fetch", "download provider match pages into a shot CSV");
  fetch->add_option("--match-id", match_ids, "provider match id (repeatable)")->required();
  fetch->add_option("--cache", cache, "page cache directory (XG_CACHE_DIR overrides)");
  fetch->add_option("--rate", rate, "requests per second")->check(CLI::PositiveNumber);
  fetch->add_option("--league", league, "league label for the fetched shots");
  fetch->add_option("--base-url", base_url, "provider base URL");
  fetch->add_option("--out", fetch_out, "output CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    if (fetch->parsed()) return run_fetch(match_ids, cache, rate, league, base_url, fetch_out);
    for (const auto& [sub, cmd] : subs) {
      if (!sub->parsed()) continue;
      const bool whatif = std::string(cmd->name) == "whatif";
      auto config = build_config(o, whatif);
      auto result = xg::run_pipeline(config, cmd->outputs);
      print_summary(result, config);
      return 0;
    }
  } catch (const xg::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.code() == xg::ErrorCode::ConfigError ? 1 : 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
