#pragma once

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "nre/dataset.hpp"
#include "nre/error.hpp"
#include "nre/neural.hpp"
#include "nre/rules.hpp"
#include "nre/tree.hpp"

namespace nre {

// ---------------------------------------------------------------------------
// Losses
// ---------------------------------------------------------------------------

// log(1 + exp(-u y)), evaluated as a softplus so large margins neither
// overflow nor lose the tail.
inline double logistic_loss(double u, int y) {
  const double z = -u * static_cast<double>(y);
  return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

// d/du log(1 + exp(-u y)) = -y / (1 + exp(u y)).
inline double logistic_loss_derivative(double u, int y) {
  const double s = u * static_cast<double>(y);
  if (s >= 0.0) {
    const double e = std::exp(-s);
    return -static_cast<double>(y) * e / (1.0 + e);
  }
  return -static_cast<double>(y) / (1.0 + std::exp(s));
}

// max(0, 1 - u y). Used for rule relevance; training uses the logistic loss.
inline double hinge_loss(double u, int y) { return std::max(0.0, 1.0 - u * static_cast<double>(y)); }

// ---------------------------------------------------------------------------
// Configuration and model
// ---------------------------------------------------------------------------

struct TrainConfig {
  std::size_t max_depth = 4;
  std::size_t min_leaf = 1;
  bool deep = false;
  std::size_t epochs = 200;
  std::optional<std::size_t> batch_size;  // unset: full batch up to 4096 rows, else 256
  double learning_rate = 0.01;
  double l2 = 0.0;
  std::uint64_t seed = 0;
  std::optional<std::size_t> max_rules;
  std::optional<std::size_t> early_stop_patience;  // enables a held-out validation split
  double validation_fraction = 0.1;

  void validate() const {
    if (max_depth < 1) throw std::invalid_argument("max_depth must be >= 1");
    if (min_leaf < 1) throw std::invalid_argument("min_leaf must be >= 1");
    if (epochs < 1) throw std::invalid_argument("epochs must be >= 1");
    if (batch_size && *batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
    if (!(learning_rate > 0.0)) throw std::invalid_argument("learning_rate must be > 0");
    if (!(l2 >= 0.0)) throw std::invalid_argument("l2 must be >= 0");
    if (max_rules && *max_rules < 1) throw std::invalid_argument("max_rules must be >= 1");
    if (early_stop_patience && !(validation_fraction > 0.0 && validation_fraction < 0.5)) {
      throw std::invalid_argument("validation_fraction must be in (0, 0.5)");
    }
  }

  std::size_t resolved_batch_size(std::size_t n) const {
    if (batch_size) return std::min(*batch_size, n);
    return n <= 4096 ? n : 256;
  }
};

struct NREModel {
  StandardizationParams standardization;
  std::vector<NeuralRule> rules;
  TrainConfig config;
  DecisionTree source_tree;
  std::vector<std::string> feature_names;
  // Nonzero only for a degenerate (single-leaf) tree, where it carries the
  // leaf value and `rules` is empty.
  double intercept = 0.0;
  bool degenerate = false;

  std::size_t input_dim() const noexcept { return standardization.size(); }

  std::vector<std::size_t> tree_features() const {
    return rules.empty() ? std::vector<std::size_t>{} : rules.front().tree_features();
  }
};

// Score of an already standardized point.
inline double score_standardized(const NREModel& m, std::span<const double> z) {
  double f = m.intercept;
  for (const auto& r : m.rules) f += rule_output(r, z);
  return f;
}

// Sum of all rule outputs at the raw point x.
inline double nre_score(const NREModel& m, std::span<const double> x) {
  if (x.size() != m.input_dim()) {
    throw DataError(fmt::format("dimension mismatch: point has {} features, model expects {}", x.size(), m.input_dim()));
  }
  thread_local std::vector<double> z;
  z.resize(x.size());
  m.standardization.apply(x, z);
  return score_standardized(m, z);
}

// sign(score), with a score of exactly 0 mapped to +1.
inline int sign_label(double score) { return score >= 0.0 ? 1 : -1; }

inline int nre_predict(const NREModel& m, std::span<const double> x) { return sign_label(nre_score(m, x)); }

// Misclassification rate in [0, 1].
inline double evaluate(const NREModel& m, const Dataset& d) {
  if (d.rows() == 0) throw DataError("evaluate: empty dataset");
  std::size_t wrong = 0;
  for (std::size_t i = 0; i < d.rows(); ++i) wrong += nre_predict(m, d.row(i)) != d.label(i);
  return static_cast<double>(wrong) / static_cast<double>(d.rows());
}

// ---------------------------------------------------------------------------
// Loss and gradient over a batch
// ---------------------------------------------------------------------------

// Mean logistic loss of f(x) = intercept + sum_k r_k(x) over `rows` of a
// standardized dataset, plus l2 * ||beta||^2. When `grads` is non-empty it
// receives the gradient for each rule (overwritten, same layout as params()).
inline double batch_loss_gradient(const std::vector<NeuralRule>& rules, double intercept, const Dataset& z,
                                  std::span<const std::size_t> rows, double l2,
                                  std::vector<std::vector<double>>* grads = nullptr) {
  if (rows.empty()) throw std::invalid_argument("batch_loss_gradient: empty batch");
  thread_local std::vector<ForwardTrace> traces;
  traces.resize(rules.size());
  if (grads) {
    grads->resize(rules.size());
    for (std::size_t k = 0; k < rules.size(); ++k) (*grads)[k].assign(rules[k].parameter_count(), 0.0);
  }

  const double inv_b = 1.0 / static_cast<double>(rows.size());
  double loss = 0.0;
  for (auto i : rows) {
    const auto x = z.row(i);
    double f = intercept;
    for (std::size_t k = 0; k < rules.size(); ++k) {
      forward(rules[k], x, traces[k]);
      f += traces[k].value;
    }
    const int y = z.label(i);
    loss += logistic_loss(f, y);
    if (grads) {
      const double upstream = logistic_loss_derivative(f, y) * inv_b;
      for (std::size_t k = 0; k < rules.size(); ++k) {
        if (traces[k].min_activation > 0.0) backward(rules[k], traces[k], upstream, (*grads)[k]);
      }
    }
  }
  loss *= inv_b;

  if (l2 > 0.0) {
    for (std::size_t k = 0; k < rules.size(); ++k) {
      const auto p = rules[k].params();
      for (std::size_t j = 0; j < p.size(); ++j) {
        loss += l2 * p[j] * p[j];
        if (grads) (*grads)[k][j] += 2.0 * l2 * p[j];
      }
    }
  }
  return loss;
}

// ---------------------------------------------------------------------------
// Training
// ---------------------------------------------------------------------------

enum class TrainStage { standardize, build_tree, extract_rules, map_rules, initialize, train };

inline const char* to_string(TrainStage s) {
  switch (s) {
    case TrainStage::standardize:
      return "standardize";
    case TrainStage::build_tree:
      return "build_tree";
    case TrainStage::extract_rules:
      return "extract_rules";
    case TrainStage::map_rules:
      return "map_rules";
    case TrainStage::initialize:
      return "initialize";
    case TrainStage::train:
      return "train";
  }
  return "unknown";
}

struct EpochStats {
  std::size_t epoch = 0;  // 0 is the untrained baseline
  std::size_t iteration = 0;
  double train_loss = 0.0;
  double train_error = 0.0;
  std::optional<double> validation_loss;
};

struct TrainHooks {
  std::function<void(TrainStage)> on_stage;
  std::function<void(const EpochStats&)> on_epoch;
  // Called with iteration 0 before the first update and after every optimizer
  // step; the model reflects the current parameters.
  std::function<void(std::size_t iteration, const NREModel&)> on_iteration;
};

struct TrainResult {
  NREModel model;
  std::vector<EpochStats> history;  // filled when stats are tracked
  std::size_t iterations = 0;
  bool degenerate_tree = false;  // warning: tree had a single leaf
  bool stopped_early = false;
};

namespace detail {

inline double error_rate_standardized(const NREModel& m, const Dataset& z) {
  std::size_t wrong = 0;
  for (std::size_t i = 0; i < z.rows(); ++i) wrong += sign_label(score_standardized(m, z.row(i))) != z.label(i);
  return static_cast<double>(wrong) / static_cast<double>(z.rows());
}

inline std::vector<std::size_t> all_rows(std::size_t n) {
  std::vector<std::size_t> rows(n);
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  return rows;
}

}  // namespace detail

// Standardize, grow the margin-split tree, decompose it into rules, map each
// rule onto a (deep) neural rule and train all of them jointly with Adam on
// the mean logistic loss.
inline TrainResult nre_train(const Dataset& data, const TrainConfig& cfg, const TrainHooks& hooks = {}) {
  cfg.validate();
  if (data.count_positive() == 0 || data.count_negative() == 0) {
    throw DataError("training data contains a single class");
  }
  auto stage = [&](TrainStage s) {
    if (hooks.on_stage) hooks.on_stage(s);
  };

  // Optional validation split for early stopping, carved out before anything
  // is fitted.
  std::optional<Dataset> train_part;
  std::optional<Dataset> valid_part;
  if (cfg.early_stop_patience) {
    const auto k = std::max<std::size_t>(2, static_cast<std::size_t>(std::lround(1.0 / cfg.validation_fraction)));
    if (data.rows() >= k) {
      const auto folds = stratified_kfold(data, k, cfg.seed ^ 0x9e3779b97f4a7c15ULL);
      train_part = data.subset(folds.train_indices(0));
      valid_part = data.subset(folds.test_indices(0));
    }
  }
  const Dataset& train = train_part ? *train_part : data;
  if (train.count_positive() == 0 || train.count_negative() == 0) {
    throw DataError("training split contains a single class");
  }

  TrainResult result;
  NREModel& model = result.model;
  model.config = cfg;
  model.feature_names = data.feature_names();

  stage(TrainStage::standardize);
  model.standardization = standardize_fit(train);
  const Dataset z = standardize_apply(train, model.standardization);
  std::optional<Dataset> zv;
  if (valid_part) zv = standardize_apply(*valid_part, model.standardization);

  stage(TrainStage::build_tree);
  model.source_tree = build_tree(z, cfg.max_depth, cfg.min_leaf);

  stage(TrainStage::extract_rules);
  auto rules = extract_rules(model.source_tree);
  if (cfg.max_rules && rules.size() > *cfg.max_rules) {
    auto order = rank_rules(rules);
    order.resize(*cfg.max_rules);
    std::sort(order.begin(), order.end());
    std::vector<ConjunctiveRule> kept;
    for (auto k : order) kept.push_back(rules[k]);
    rules = std::move(kept);
  }

  if (model.source_tree.root().leaf) {
    // Nothing to map: the model is the constant leaf vote.
    const auto& root = model.source_tree.root();
    model.intercept = leaf_value(root.n_pos, root.n_neg);
    model.degenerate = true;
    result.degenerate_tree = true;
    return result;
  }

  stage(TrainStage::map_rules);
  const auto& tree_features = model.source_tree.feature_set();
  model.rules.reserve(rules.size());

  stage(TrainStage::initialize);
  for (const auto& r : rules) {
    model.rules.push_back(cfg.deep ? init_deep_from_rule(r, tree_features) : init_from_rule(r, tree_features));
  }

  stage(TrainStage::train);
  AdamHyper hyper;
  hyper.learning_rate = cfg.learning_rate;
  std::vector<AdamState> optim;
  optim.reserve(model.rules.size());
  for (const auto& r : model.rules) optim.emplace_back(r.parameter_count(), hyper);

  const bool track = static_cast<bool>(hooks.on_epoch) || zv.has_value();
  const auto all = detail::all_rows(z.rows());
  const auto valid_rows = zv ? detail::all_rows(zv->rows()) : std::vector<std::size_t>{};

  auto record = [&](std::size_t epoch) {
    EpochStats s;
    s.epoch = epoch;
    s.iteration = result.iterations;
    s.train_loss = batch_loss_gradient(model.rules, model.intercept, z, all, 0.0);
    s.train_error = detail::error_rate_standardized(model, z);
    if (zv) s.validation_loss = batch_loss_gradient(model.rules, model.intercept, *zv, valid_rows, 0.0);
    if (!std::isfinite(s.train_loss)) throw NumericError(fmt::format("training loss became non-finite at epoch {}", epoch));
    result.history.push_back(s);
    if (hooks.on_epoch) hooks.on_epoch(s);
    return s;
  };

  double best_valid = std::numeric_limits<double>::infinity();
  std::vector<NeuralRule> best_rules;
  std::size_t since_best = 0;
  auto check_early_stop = [&](const EpochStats& s) {
    if (!s.validation_loss) return false;
    if (*s.validation_loss < best_valid) {
      best_valid = *s.validation_loss;
      best_rules = model.rules;
      since_best = 0;
      return false;
    }
    return ++since_best >= *cfg.early_stop_patience;
  };

  if (track) check_early_stop(record(0));
  if (hooks.on_iteration) hooks.on_iteration(0, model);

  const std::size_t batch = cfg.resolved_batch_size(z.rows());
  std::mt19937_64 rng(cfg.seed);
  std::vector<std::size_t> order = all;
  std::vector<std::vector<double>> grads;

  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    if (batch < z.rows()) std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < order.size(); start += batch) {
      const auto len = std::min(batch, order.size() - start);
      const double loss = batch_loss_gradient(model.rules, model.intercept, z,
                                              std::span<const std::size_t>(order.data() + start, len), cfg.l2, &grads);
      if (!std::isfinite(loss)) throw NumericError(fmt::format("batch loss became non-finite at epoch {}", epoch));
      for (std::size_t k = 0; k < model.rules.size(); ++k) adam_step(model.rules[k].params(), grads[k], optim[k]);
      ++result.iterations;
      if (hooks.on_iteration) hooks.on_iteration(result.iterations, model);
    }
    if (track && check_early_stop(record(epoch))) {
      result.stopped_early = true;
      break;
    }
  }

  if (zv && !best_rules.empty()) model.rules = std::move(best_rules);
  return result;
}

}  // namespace nre
