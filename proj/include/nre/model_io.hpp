#pragma once

#include <fmt/format.h>
#include <json.hpp>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "nre/detail/table_io.hpp"
#include "nre/ensemble.hpp"
#include "nre/error.hpp"

// Model file: canonical JSON (sorted keys, shortest round-trip doubles) with a
// mandatory version field and an FNV-1a checksum over the compact encoding of
// everything except the checksum itself.
namespace nre {

inline constexpr int model_format_version = 1;

using json = nlohmann::json;

namespace detail {

inline std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : bytes) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string checksum_of(const json& body) { return fmt::format("fnv1a64:{:016x}", fnv1a64(body.dump())); }

inline void require_finite(double v, const char* what) {
  if (!std::isfinite(v)) throw NumericError(fmt::format("cannot serialize non-finite {}", what));
}

template <class T>
json optional_to_json(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

template <class T>
std::optional<T> optional_from_json(const json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<T>();
}

}  // namespace detail

inline json config_to_json(const TrainConfig& c) {
  return json{{"max_depth", c.max_depth},
              {"min_leaf", c.min_leaf},
              {"deep", c.deep},
              {"epochs", c.epochs},
              {"batch_size", detail::optional_to_json(c.batch_size)},
              {"learning_rate", c.learning_rate},
              {"l2", c.l2},
              {"seed", c.seed},
              {"max_rules", detail::optional_to_json(c.max_rules)},
              {"early_stop_patience", detail::optional_to_json(c.early_stop_patience)},
              {"validation_fraction", c.validation_fraction}};
}

inline TrainConfig config_from_json(const json& j) {
  TrainConfig c;
  c.max_depth = j.at("max_depth").get<std::size_t>();
  c.min_leaf = j.at("min_leaf").get<std::size_t>();
  c.deep = j.at("deep").get<bool>();
  c.epochs = j.at("epochs").get<std::size_t>();
  c.batch_size = detail::optional_from_json<std::size_t>(j.at("batch_size"));
  c.learning_rate = j.at("learning_rate").get<double>();
  c.l2 = j.at("l2").get<double>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.max_rules = detail::optional_from_json<std::size_t>(j.at("max_rules"));
  c.early_stop_patience = detail::optional_from_json<std::size_t>(j.at("early_stop_patience"));
  c.validation_fraction = j.at("validation_fraction").get<double>();
  return c;
}

inline json tree_to_json(const DecisionTree& t) {
  json nodes = json::array();
  for (const auto& n : t.nodes()) {
    json jn{{"leaf", n.leaf}, {"n_pos", n.n_pos}, {"n_neg", n.n_neg}, {"depth", n.depth}};
    if (!n.leaf) {
      detail::require_finite(n.threshold, "threshold");
      jn["feature"] = n.feature;
      jn["threshold"] = n.threshold;
      jn["left"] = n.left;
      jn["right"] = n.right;
    }
    nodes.push_back(std::move(jn));
  }
  return json{{"max_depth", t.max_depth()}, {"nodes", std::move(nodes)}};
}

inline DecisionTree tree_from_json(const json& j) {
  if (j.at("nodes").empty()) return DecisionTree{};
  std::vector<TreeNode> nodes;
  for (const auto& jn : j.at("nodes")) {
    TreeNode n;
    n.leaf = jn.at("leaf").get<bool>();
    n.n_pos = jn.at("n_pos").get<std::size_t>();
    n.n_neg = jn.at("n_neg").get<std::size_t>();
    n.depth = jn.at("depth").get<std::size_t>();
    if (!n.leaf) {
      n.feature = jn.at("feature").get<std::size_t>();
      n.threshold = jn.at("threshold").get<double>();
      n.left = jn.at("left").get<std::size_t>();
      n.right = jn.at("right").get<std::size_t>();
    }
    nodes.push_back(n);
  }
  return DecisionTree(std::move(nodes), j.at("max_depth").get<std::size_t>());
}

inline json rule_to_json(const NeuralRule& r) {
  auto layer = [&](bool second) {
    json units = json::array();
    for (std::size_t k = 0; k < r.units(); ++k) {
      json w = json::array();
      const auto width = second ? r.units() : r.inputs();
      for (std::size_t j = 0; j < width; ++j) {
        const double v = second ? r.w2(k, j) : r.w1(k, j);
        detail::require_finite(v, "weight");
        w.push_back(v);
      }
      const double b = second ? r.b2(k) : r.b1(k);
      detail::require_finite(b, "bias");
      units.push_back(json{{"w", std::move(w)}, {"b", b}});
    }
    return units;
  };
  detail::require_finite(r.c(), "rule coefficient");
  json out{{"layer1", layer(false)}, {"c", r.c()}};
  if (r.deep()) out["layer2"] = layer(true);
  return out;
}

inline NeuralRule rule_from_json(const json& j, const std::vector<std::size_t>& tree_features) {
  const auto& l1 = j.at("layer1");
  const bool deep = j.contains("layer2");
  if (!l1.is_array() || l1.empty()) throw ModelError("rule layer1 must be a non-empty array");
  NeuralRule r(tree_features, l1.size(), deep);
  auto read_layer = [&](const json& layer, bool second) {
    if (!layer.is_array() || layer.size() != r.units()) throw ModelError("rule layer has wrong number of units");
    const auto width = second ? r.units() : r.inputs();
    for (std::size_t k = 0; k < r.units(); ++k) {
      const auto& w = layer[k].at("w");
      if (!w.is_array() || w.size() != width) throw ModelError("rule weight vector has wrong length");
      for (std::size_t i = 0; i < width; ++i) (second ? r.w2(k, i) : r.w1(k, i)) = w[i].get<double>();
      (second ? r.b2(k) : r.b1(k)) = layer[k].at("b").get<double>();
    }
  };
  read_layer(l1, false);
  if (deep) read_layer(j.at("layer2"), true);
  r.c() = j.at("c").get<double>();
  return r;
}

inline json model_to_json(const NREModel& m) {
  for (double v : m.standardization.means) detail::require_finite(v, "mean");
  for (double v : m.standardization.stds) detail::require_finite(v, "std");
  json rules = json::array();
  for (const auto& r : m.rules) rules.push_back(rule_to_json(r));
  json body{{"version", model_format_version},
            {"standardization", {{"means", m.standardization.means}, {"stds", m.standardization.stds}}},
            {"tree_features", m.tree_features()},
            {"rules", std::move(rules)},
            {"intercept", m.intercept},
            {"degenerate", m.degenerate},
            {"feature_names", m.feature_names},
            {"source_tree", tree_to_json(m.source_tree)},
            {"config", config_to_json(m.config)}};
  body["checksum"] = detail::checksum_of(body);
  return body;
}

inline NREModel model_from_json(json j) {
  try {
    if (!j.is_object()) throw ModelError("model file is not a JSON object");
    if (!j.contains("version")) throw ModelError("model file has no version field");
    const int version = j.at("version").get<int>();
    if (version != model_format_version) {
      throw ModelError(fmt::format("unsupported model version {} (expected {})", version, model_format_version));
    }
    const auto stored = j.at("checksum").get<std::string>();
    j.erase("checksum");
    if (detail::checksum_of(j) != stored) throw ModelError("model checksum mismatch");

    NREModel m;
    m.standardization.means = j.at("standardization").at("means").get<std::vector<double>>();
    m.standardization.stds = j.at("standardization").at("stds").get<std::vector<double>>();
    if (m.standardization.means.size() != m.standardization.stds.size() || m.standardization.means.empty()) {
      throw ModelError("standardization vectors are empty or differ in length");
    }
    for (double s : m.standardization.stds) {
      if (!(s > 0.0)) throw ModelError("standardization std must be positive");
    }
    const auto tree_features = j.at("tree_features").get<std::vector<std::size_t>>();
    for (auto f : tree_features) {
      if (f >= m.input_dim()) throw ModelError("tree feature index out of range");
    }
    for (const auto& jr : j.at("rules")) m.rules.push_back(rule_from_json(jr, tree_features));
    m.intercept = j.at("intercept").get<double>();
    m.degenerate = j.at("degenerate").get<bool>();
    m.feature_names = j.at("feature_names").get<std::vector<std::string>>();
    m.source_tree = tree_from_json(j.at("source_tree"));
    m.config = config_from_json(j.at("config"));
    if (m.rules.empty() && !m.degenerate) throw ModelError("model has no rules");
    return m;
  } catch (const json::exception& e) {
    throw ModelError(std::string("malformed model file: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ModelError(std::string("malformed model file: ") + e.what());
  }
}

inline std::string serialize_model(const NREModel& m) { return model_to_json(m).dump(1) + "\n"; }

inline NREModel deserialize_model(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ModelError(std::string("model file is not valid JSON: ") + e.what());
  }
  return model_from_json(std::move(j));
}

inline void save_model(const NREModel& m, const std::filesystem::path& path) {
  detail::write_file_bytes(path, serialize_model(m));
}

inline NREModel load_model(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw DataError("no such model file: " + path.string());
  return deserialize_model(detail::read_file_bytes(path));
}

}  // namespace nre
