#pragma once

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "nre/dataset.hpp"

// Synthetic datasets. Every generator is a pure function of its arguments and
// seed.
namespace nre {

inline double degrees_to_radians(double deg) { return deg * std::numbers::pi / 180.0; }

// Points uniform in [-1, 1]^2, labelled by the side of a line through the
// origin at angle_deg. Labels alternate +1/-1 so both classes are present for
// n >= 2; points within `margin` of the line are rejected.
inline Dataset gen_linear_separable(std::size_t n, double angle_deg, double margin, std::uint64_t seed) {
  if (n < 2) throw std::invalid_argument("gen_linear_separable: n must be >= 2");
  if (margin < 0.0) throw std::invalid_argument("gen_linear_separable: margin must be >= 0");
  const double theta = degrees_to_radians(angle_deg);
  const double nx = -std::sin(theta);
  const double ny = std::cos(theta);
  // Largest distance any point of the square reaches from the line.
  if (margin >= std::abs(nx) + std::abs(ny)) {
    throw std::invalid_argument("gen_linear_separable: margin leaves no room inside the unit square");
  }

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  std::vector<double> values;
  std::vector<int> labels;
  values.reserve(2 * n);
  labels.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const int want = (i % 2 == 0) ? 1 : -1;
    while (true) {
      const double x = unif(rng);
      const double y = unif(rng);
      const double dist = nx * x + ny * y;
      if (std::abs(dist) <= margin || dist == 0.0) continue;
      if ((dist > 0.0 ? 1 : -1) != want) continue;
      values.push_back(x);
      values.push_back(y);
      labels.push_back(want);
      break;
    }
  }
  return Dataset(std::move(values), 2, std::move(labels), {"x0", "x1"});
}

// Four Gaussian clusters centred on (+-1, +-1), labelled XOR-style (+1 when
// both coordinates share a sign) and then rotated by angle_deg.
inline Dataset gen_rotated_xor(std::size_t n, double angle_deg, double noise_std, std::uint64_t seed) {
  if (n < 4) throw std::invalid_argument("gen_rotated_xor: n must be >= 4");
  if (noise_std < 0.0) throw std::invalid_argument("gen_rotated_xor: noise_std must be >= 0");
  constexpr double centers[4][2] = {{1.0, 1.0}, {-1.0, -1.0}, {-1.0, 1.0}, {1.0, -1.0}};
  constexpr int cluster_label[4] = {1, 1, -1, -1};

  const double theta = degrees_to_radians(angle_deg);
  const double cs = std::cos(theta);
  const double sn = std::sin(theta);

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);

  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::shuffle(order.begin(), order.end(), rng);

  std::vector<double> values(2 * n);
  std::vector<int> labels(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t cluster = i % 4;
    double x = centers[cluster][0];
    double y = centers[cluster][1];
    if (noise_std > 0.0) {
      x += noise_std * noise(rng);
      y += noise_std * noise(rng);
    }
    const std::size_t slot = order[i];
    values[2 * slot] = cs * x - sn * y;
    values[2 * slot + 1] = sn * x + cs * y;
    labels[slot] = cluster_label[cluster];
  }
  return Dataset(std::move(values), 2, std::move(labels), {"x0", "x1"});
}

enum class FeatureOrigin { informative, redundant, distractor };

struct MadelonFeature {
  FeatureOrigin origin;
  std::size_t source_index;  // index within its origin group
};

struct MadelonOptions {
  double cluster_std = 0.1;      // per-coordinate std of each vertex cluster
  double vertex_scale = 1.0;     // vertices sit at +-vertex_scale
  double redundant_noise = 0.0;  // extra Gaussian noise on redundant columns
};

struct MadelonDataset {
  Dataset data;
  std::vector<MadelonFeature> features;  // per output column
  // redundant_coefficients[r][j]: weight of informative column j in redundant column r
  std::vector<std::vector<double>> redundant_coefficients;
};

// Clusters on the vertices of an `informative`-dimensional hypercube with
// balanced random vertex labels, plus redundant linear combinations of the
// informative columns and standard-normal distractors, in seeded column order.
inline MadelonDataset gen_madelon_like(std::size_t n, std::size_t informative, std::size_t redundant,
                                       std::size_t distractors, std::uint64_t seed,
                                       const MadelonOptions& opts = {}) {
  if (informative < 1) throw std::invalid_argument("gen_madelon_like: informative must be >= 1");
  if (informative > 30) throw std::invalid_argument("gen_madelon_like: informative must be <= 30");
  if (n < 1) throw std::invalid_argument("gen_madelon_like: n must be >= 1");

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> coef(-1.0, 1.0);

  const std::size_t vertices = std::size_t{1} << informative;
  std::vector<int> vertex_label(vertices);
  for (std::size_t v = 0; v < vertices; ++v) vertex_label[v] = v < vertices / 2 ? 1 : -1;
  std::shuffle(vertex_label.begin(), vertex_label.end(), rng);

  std::vector<std::vector<double>> coefficients(redundant, std::vector<double>(informative));
  for (auto& row : coefficients) {
    for (auto& a : row) a = coef(rng);
  }

  const std::size_t p = informative + redundant + distractors;
  std::vector<std::size_t> column_order(p);
  for (std::size_t j = 0; j < p; ++j) column_order[j] = j;
  std::shuffle(column_order.begin(), column_order.end(), rng);

  // Balanced labels: alternate between positive and negative vertices.
  std::vector<std::size_t> pos_vertices;
  std::vector<std::size_t> neg_vertices;
  for (std::size_t v = 0; v < vertices; ++v) (vertex_label[v] == 1 ? pos_vertices : neg_vertices).push_back(v);
  std::uniform_int_distribution<std::size_t> pick_pos(0, pos_vertices.size() - 1);
  std::uniform_int_distribution<std::size_t> pick_neg(0, neg_vertices.size() - 1);

  std::vector<double> values(n * p);
  std::vector<int> labels(n);
  std::vector<double> generated(p);
  for (std::size_t i = 0; i < n; ++i) {
    const bool positive = i % 2 == 0;
    const std::size_t vertex = positive ? pos_vertices[pick_pos(rng)] : neg_vertices[pick_neg(rng)];
    for (std::size_t j = 0; j < informative; ++j) {
      const double corner = ((vertex >> j) & 1U) ? 1.0 : -1.0;
      generated[j] = opts.vertex_scale * (corner + opts.cluster_std * normal(rng));
    }
    for (std::size_t r = 0; r < redundant; ++r) {
      double acc = 0.0;
      for (std::size_t j = 0; j < informative; ++j) acc += coefficients[r][j] * generated[j];
      if (opts.redundant_noise > 0.0) acc += opts.redundant_noise * normal(rng);
      generated[informative + r] = acc;
    }
    for (std::size_t k = 0; k < distractors; ++k) generated[informative + redundant + k] = normal(rng);
    for (std::size_t j = 0; j < p; ++j) values[i * p + j] = generated[column_order[j]];
    labels[i] = vertex_label[vertex];
  }

  std::vector<MadelonFeature> features(p);
  std::vector<std::string> names(p);
  for (std::size_t j = 0; j < p; ++j) {
    const std::size_t src = column_order[j];
    if (src < informative) {
      features[j] = {FeatureOrigin::informative, src};
    } else if (src < informative + redundant) {
      features[j] = {FeatureOrigin::redundant, src - informative};
    } else {
      features[j] = {FeatureOrigin::distractor, src - informative - redundant};
    }
    names[j] = fmt::format("f{}", j);
  }
  return {Dataset(std::move(values), p, std::move(labels), std::move(names)), std::move(features),
          std::move(coefficients)};
}

inline const char* to_string(FeatureOrigin o) {
  switch (o) {
    case FeatureOrigin::informative:
      return "informative";
    case FeatureOrigin::redundant:
      return "redundant";
    case FeatureOrigin::distractor:
      return "distractor";
  }
  return "unknown";
}

}  // namespace nre
