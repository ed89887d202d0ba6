#pragma once

#include <fmt/format.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <vector>

#include "nre/dataset.hpp"
#include "nre/ensemble.hpp"
#include "nre/error.hpp"

// k-fold cross-validation of the full training pipeline.
namespace nre {

struct EvalReport {
  std::vector<double> fold_errors;  // fractions in [0, 1]
  double mean = 0.0;
  double std = 0.0;  // population standard deviation over folds
  double wall_time_seconds = 0.0;
  std::size_t k = 0;
  std::uint64_t seed = 0;
  TrainConfig config;
};

inline EvalReport summarize_folds(std::vector<double> errors) {
  if (errors.empty()) throw std::invalid_argument("no fold errors");
  EvalReport r;
  r.k = errors.size();
  const double n = static_cast<double>(errors.size());
  r.mean = std::accumulate(errors.begin(), errors.end(), 0.0) / n;
  double ss = 0.0;
  for (double e : errors) ss += (e - r.mean) * (e - r.mean);
  r.std = std::sqrt(ss / n);
  r.fold_errors = std::move(errors);
  return r;
}

// Trains on each fold complement and tests on the fold. Folds are stratified
// and fixed by `seed`; every fold must contain both classes in its training
// part.
inline EvalReport cross_validate(const Dataset& d, const TrainConfig& cfg, std::size_t k, std::uint64_t seed) {
  if (k < 2) throw std::invalid_argument("cross-validation needs k >= 2");
  cfg.validate();
  const auto start = std::chrono::steady_clock::now();
  const auto folds = stratified_kfold(d, k, seed);
  std::vector<double> errors;
  errors.reserve(k);
  for (std::size_t f = 0; f < k; ++f) {
    const auto test_rows = folds.test_indices(f);
    const auto train_rows = folds.train_indices(f);
    const auto train = d.subset(train_rows);
    if (train.count_positive() == 0 || train.count_negative() == 0) {
      throw DataError(fmt::format("fold {} is too small: its training part lacks a class", f));
    }
    if (test_rows.empty()) throw DataError(fmt::format("fold {} has no test rows", f));
    const auto model = nre_train(train, cfg).model;
    errors.push_back(evaluate(model, d.subset(test_rows)));
  }
  auto report = summarize_folds(std::move(errors));
  report.k = k;
  report.seed = seed;
  report.config = cfg;
  report.wall_time_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

inline constexpr std::size_t depth_grid[] = {2, 4, 6, 8, 10};

struct GridResult {
  std::vector<std::pair<std::size_t, EvalReport>> by_depth;
  std::size_t best_depth = 0;  // lowest mean error, ties to the shallower tree
};

inline GridResult depth_sweep(const Dataset& d, TrainConfig cfg, std::size_t k, std::uint64_t seed) {
  GridResult g;
  double best = 2.0;
  for (auto depth : depth_grid) {
    cfg.max_depth = depth;
    auto r = cross_validate(d, cfg, k, seed);
    if (r.mean < best) {
      best = r.mean;
      g.best_depth = depth;
    }
    g.by_depth.emplace_back(depth, std::move(r));
  }
  return g;
}

}  // namespace nre
