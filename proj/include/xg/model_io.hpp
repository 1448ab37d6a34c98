#pragma once

// Versioned JSON model files. Reals are written as shortest round-trip
// decimal strings so a reloaded model predicts bit-identically.

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"
#include "xg/csv.hpp"
#include "xg/error.hpp"
#include "xg/forest.hpp"

namespace xg {

inline constexpr int kModelFormatVersion = 1;

namespace detail {

using nlohmann::json;

inline std::string real(double v) { return csv::format_double(v); }

inline double real_from(const json& j) {
  double v = 0.0;
  if (!j.is_string() || !csv::parse_double(j.get<std::string>(), v))
    throw Error(ErrorCode::CorruptModel, "expected a decimal string, got " + j.dump());
  return v;
}

inline json node_to_json(const Tree& tree, std::size_t i) {
  const auto& n = tree.nodes[i];
  if (n.is_leaf()) return json{{"leaf", {{"value", real(n.value)}, {"n", n.n_samples}}}};
  return json{{"split",
               {{"column", n.column},
                {"threshold", real(n.threshold)},
                {"n", n.n_samples},
                {"left", node_to_json(tree, static_cast<std::size_t>(n.left))},
                {"right", node_to_json(tree, static_cast<std::size_t>(n.right))}}}};
}

// Children are allocated in pairs and filled depth-first, left first, which
// reproduces the node order the tree builder uses.
inline void node_from_json(const json& j, Tree& tree, std::size_t index, std::size_t n_columns) {
  if (j.contains("leaf")) {
    const auto& leaf = j.at("leaf");
    tree.nodes[index].value = real_from(leaf.at("value"));
    tree.nodes[index].n_samples = leaf.at("n").get<std::uint32_t>();
    return;
  }
  const auto& split = j.at("split");
  const auto column = split.at("column").get<std::int32_t>();
  if (column < 0 || static_cast<std::size_t>(column) >= n_columns)
    throw Error(ErrorCode::CorruptModel, "split column out of range");
  const auto left = tree.nodes.size();
  tree.nodes.resize(left + 2);
  tree.nodes[index].column = column;
  tree.nodes[index].threshold = real_from(split.at("threshold"));
  tree.nodes[index].n_samples = split.at("n").get<std::uint32_t>();
  tree.nodes[index].left = static_cast<std::int32_t>(left);
  tree.nodes[index].right = static_cast<std::int32_t>(left + 1);
  node_from_json(split.at("left"), tree, left, n_columns);
  node_from_json(split.at("right"), tree, left + 1, n_columns);
}

}  // namespace detail

inline nlohmann::json model_to_json(const EnsembleModel& model) {
  using nlohmann::json;
  json hyper;
  if (model.kind == ModelKind::RandomForest) {
    const auto& p = model.forest_params();
    hyper = {{"n_trees", p.n_trees},     {"mtry", p.mtry},           {"min_leaf", p.min_leaf},
             {"max_depth", p.max_depth}, {"bootstrap", p.bootstrap}, {"vote_mode", to_string(p.vote_mode)}};
  } else {
    const auto& p = model.gbt_params();
    hyper = {{"n_rounds", p.n_rounds},
             {"learning_rate", detail::real(p.learning_rate)},
             {"max_depth", p.max_depth},
             {"min_leaf", p.min_leaf},
             {"subsample", detail::real(p.subsample)}};
  }
  json losses = json::array();
  for (double l : model.meta.loss_history) losses.push_back(detail::real(l));
  json trees = json::array();
  for (const auto& t : model.trees) trees.push_back(detail::node_to_json(t, 0));
  return json{{"format_version", kModelFormatVersion},
              {"kind", to_string(model.kind)},
              {"hyperparams", std::move(hyper)},
              {"column_schema", to_json(model.schema)},
              {"base_score", detail::real(model.base_score)},
              {"trees", std::move(trees)},
              {"train_meta",
               {{"seed", model.meta.seed},
                {"n_train", model.meta.n_train},
                {"class_prior", detail::real(model.meta.class_prior)},
                {"balance_method", model.meta.balance_method},
                {"loss_history", std::move(losses)}}}};
}

inline EnsembleModel model_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("format_version"))
    throw Error(ErrorCode::CorruptModel, "missing format_version");
  if (!j["format_version"].is_number_integer() || j["format_version"].get<int>() != kModelFormatVersion)
    throw Error(ErrorCode::SchemaVersionMismatch,
                "model format " + j["format_version"].dump() + ", loader supports " +
                    std::to_string(kModelFormatVersion));
  try {
    EnsembleModel model;
    const auto kind = j.at("kind").get<std::string>();
    const auto& h = j.at("hyperparams");
    if (kind == "random_forest") {
      model.kind = ModelKind::RandomForest;
      ForestParams p;
      p.n_trees = h.at("n_trees").get<std::size_t>();
      p.mtry = h.at("mtry").get<std::size_t>();
      p.min_leaf = h.at("min_leaf").get<std::size_t>();
      p.max_depth = h.at("max_depth").get<std::size_t>();
      p.bootstrap = h.at("bootstrap").get<bool>();
      const auto vote = h.at("vote_mode").get<std::string>();
      if (vote != "hard_vote" && vote != "leaf_prob")
        throw Error(ErrorCode::CorruptModel, "unknown vote_mode " + vote);
      p.vote_mode = vote == "hard_vote" ? VoteMode::HardVote : VoteMode::LeafProb;
      model.params = p;
    } else if (kind == "gbt") {
      model.kind = ModelKind::Gbt;
      GbtParams p;
      p.n_rounds = h.at("n_rounds").get<std::size_t>();
      p.learning_rate = detail::real_from(h.at("learning_rate"));
      p.max_depth = h.at("max_depth").get<std::size_t>();
      p.min_leaf = h.at("min_leaf").get<std::size_t>();
      p.subsample = detail::real_from(h.at("subsample"));
      model.params = p;
    } else {
      throw Error(ErrorCode::CorruptModel, "unknown model kind " + kind);
    }
    model.schema = schema_from_json(j.at("column_schema"));
    model.base_score = detail::real_from(j.at("base_score"));
    for (const auto& t : j.at("trees")) {
      Tree tree;
      tree.nodes.resize(1);
      detail::node_from_json(t, tree, 0, model.schema.size());
      model.trees.push_back(std::move(tree));
    }
    if (model.kind == ModelKind::RandomForest && model.trees.empty())
      throw Error(ErrorCode::CorruptModel, "forest without trees");
    const auto& meta = j.at("train_meta");
    model.meta.seed = meta.at("seed").get<std::uint64_t>();
    model.meta.n_train = meta.at("n_train").get<std::size_t>();
    model.meta.class_prior = detail::real_from(meta.at("class_prior"));
    model.meta.balance_method = meta.at("balance_method").get<std::string>();
    for (const auto& l : meta.at("loss_history")) model.meta.loss_history.push_back(detail::real_from(l));
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::CorruptModel, e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::SchemaMismatch) throw Error(ErrorCode::CorruptModel, e.what());
    throw;
  }
}

inline void save_model(const EnsembleModel& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << model_to_json(model).dump() << '\n';
  if (!out) throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

inline EnsembleModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot read " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(buf.str());
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::CorruptModel, path.string() + ": " + e.what());
  }
  return model_from_json(j);
}

}  // namespace xg
