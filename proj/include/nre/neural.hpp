#pragma once

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "nre/rules.hpp"

namespace nre {

// A rule relaxed into a small ReLU network with a min-pool head:
//
//   r(x) = c * min_k relu(W1[k] . x_T + b1[k])                       (shallow)
//   r(x) = c * min_k relu(W2[k] . relu(W1 x_T + b1) + b2[k])          (deep)
//
// x_T gathers the columns listed in tree_features. All trainable values live in
// one flat vector laid out as
//   [W1 (H x q, row-major) | b1 (H) | W2 (H x H, deep only) | b2 (H, deep only) | c]
// which is also the order used by the optimizer and the model file.
class NeuralRule {
 public:
  NeuralRule() = default;
  NeuralRule(std::vector<std::size_t> tree_features, std::size_t units, bool deep)
      : features_(std::move(tree_features)), units_(units), deep_(deep) {
    if (units_ == 0) throw std::invalid_argument("neural rule needs at least one hidden unit");
    if (features_.empty()) throw std::invalid_argument("neural rule needs at least one input feature");
    params_.assign(parameter_count(), 0.0);
  }

  const std::vector<std::size_t>& tree_features() const noexcept { return features_; }
  std::size_t inputs() const noexcept { return features_.size(); }
  std::size_t units() const noexcept { return units_; }
  bool deep() const noexcept { return deep_; }

  std::size_t parameter_count() const noexcept {
    const auto h = units_;
    const auto q = features_.size();
    return h * q + h + (deep_ ? h * h + h : 0) + 1;
  }

  std::span<double> params() noexcept { return params_; }
  std::span<const double> params() const noexcept { return params_; }

  double& w1(std::size_t k, std::size_t j) { return params_[k * inputs() + j]; }
  double w1(std::size_t k, std::size_t j) const { return params_[k * inputs() + j]; }
  double& b1(std::size_t k) { return params_[b1_offset() + k]; }
  double b1(std::size_t k) const { return params_[b1_offset() + k]; }
  double& w2(std::size_t k, std::size_t j) { return params_[w2_offset() + k * units_ + j]; }
  double w2(std::size_t k, std::size_t j) const { return params_[w2_offset() + k * units_ + j]; }
  double& b2(std::size_t k) { return params_[b2_offset() + k]; }
  double b2(std::size_t k) const { return params_[b2_offset() + k]; }
  double& c() { return params_.back(); }
  double c() const { return params_.back(); }

  std::size_t b1_offset() const noexcept { return units_ * inputs(); }
  std::size_t w2_offset() const noexcept { return b1_offset() + units_; }
  std::size_t b2_offset() const noexcept { return w2_offset() + units_ * units_; }
  std::size_t c_offset() const noexcept { return params_.size() - 1; }

 private:
  std::vector<std::size_t> features_;
  std::size_t units_ = 0;
  bool deep_ = false;
  std::vector<double> params_;
};

namespace detail {

inline std::size_t feature_position(const std::vector<std::size_t>& tree_features, std::size_t feature) {
  const auto it = std::find(tree_features.begin(), tree_features.end(), feature);
  if (it == tree_features.end()) {
    throw std::invalid_argument(fmt::format("rule feature {} is not among the tree features", feature));
  }
  return static_cast<std::size_t>(it - tree_features.begin());
}

}  // namespace detail

// Hidden unit k copies literal k: weight sign on that literal's feature, 0 on
// every other tree feature, bias from the literal. c is copied.
inline NeuralRule init_from_rule(const ConjunctiveRule& r, const std::vector<std::size_t>& tree_features) {
  if (r.literals.empty()) throw std::invalid_argument("cannot map a rule without literals");
  NeuralRule n(tree_features, r.literals.size(), false);
  for (std::size_t k = 0; k < r.literals.size(); ++k) {
    const auto& lit = r.literals[k];
    n.w1(k, detail::feature_position(tree_features, lit.feature)) = static_cast<double>(lit.sign);
    n.b1(k) = lit.bias;
  }
  n.c() = r.c;
  return n;
}

// Same first layer plus a second hidden layer initialized to the identity.
inline NeuralRule init_deep_from_rule(const ConjunctiveRule& r, const std::vector<std::size_t>& tree_features) {
  const auto shallow = init_from_rule(r, tree_features);
  NeuralRule n(tree_features, r.literals.size(), true);
  std::copy_n(shallow.params().begin(), shallow.b1_offset() + shallow.units(), n.params().begin());
  for (std::size_t k = 0; k < n.units(); ++k) n.w2(k, k) = 1.0;
  n.c() = r.c;
  return n;
}

// Intermediates of one forward pass, reused by backward.
struct ForwardTrace {
  std::vector<double> x_t;
  std::vector<double> preacts1;
  std::vector<double> acts1;
  std::vector<double> preacts2;  // deep only
  std::vector<double> acts2;     // deep only
  std::size_t argmin_index = 0;
  double min_activation = 0.0;
  double value = 0.0;

  const std::vector<double>& final_acts() const { return acts2.empty() ? acts1 : acts2; }
};

// Fills `trace` in place (no allocation once its buffers have grown).
inline void forward(const NeuralRule& n, std::span<const double> x, ForwardTrace& trace) {
  const auto q = n.inputs();
  const auto h = n.units();
  trace.x_t.resize(q);
  for (std::size_t j = 0; j < q; ++j) trace.x_t[j] = x[n.tree_features()[j]];

  trace.preacts1.resize(h);
  trace.acts1.resize(h);
  for (std::size_t k = 0; k < h; ++k) {
    double z = n.b1(k);
    for (std::size_t j = 0; j < q; ++j) z += n.w1(k, j) * trace.x_t[j];
    trace.preacts1[k] = z;
    trace.acts1[k] = z > 0.0 ? z : 0.0;
  }

  if (n.deep()) {
    trace.preacts2.resize(h);
    trace.acts2.resize(h);
    for (std::size_t k = 0; k < h; ++k) {
      double z = n.b2(k);
      for (std::size_t j = 0; j < h; ++j) z += n.w2(k, j) * trace.acts1[j];
      trace.preacts2[k] = z;
      trace.acts2[k] = z > 0.0 ? z : 0.0;
    }
  } else {
    trace.preacts2.clear();
    trace.acts2.clear();
  }

  const auto& acts = trace.final_acts();
  std::size_t arg = 0;
  for (std::size_t k = 1; k < h; ++k) {
    if (acts[k] < acts[arg]) arg = k;
  }
  trace.argmin_index = arg;
  trace.min_activation = acts[arg];
  trace.value = n.c() * trace.min_activation;
}

inline ForwardTrace forward(const NeuralRule& n, std::span<const double> x) {
  ForwardTrace trace;
  forward(n, x, trace);
  return trace;
}

// Output value only; skips storing intermediates.
inline double rule_output(const NeuralRule& n, std::span<const double> x) {
  thread_local ForwardTrace trace;
  forward(n, x, trace);
  return trace.value;
}

// Accumulates upstream * d value / d params into param_grad (same layout as
// n.params()). When input_grad is non-empty (length p) the gradient with
// respect to the raw input point is accumulated there too.
//
// Gradient reaches only the min-selected unit; nothing flows when that unit's
// activation is 0, so samples outside the support contribute nothing. The
// ReLU derivative at exactly 0 is taken as 0.
inline void backward(const NeuralRule& n, const ForwardTrace& trace, double upstream, std::span<double> param_grad,
                     std::span<double> input_grad = {}) {
  if (param_grad.size() != n.parameter_count()) throw std::invalid_argument("backward: gradient buffer size mismatch");
  if (trace.acts1.size() != n.units() || trace.x_t.size() != n.inputs() ||
      (n.deep() != !trace.acts2.empty())) {
    throw std::invalid_argument("backward: trace does not match rule shape");
  }
  if (!(trace.min_activation > 0.0)) return;

  const auto q = n.inputs();
  const auto h = n.units();
  const auto k_star = trace.argmin_index;
  param_grad[n.c_offset()] += upstream * trace.min_activation;
  const double g = upstream * n.c();

  auto push_first_layer = [&](std::size_t k, double dz) {
    for (std::size_t j = 0; j < q; ++j) param_grad[k * q + j] += dz * trace.x_t[j];
    param_grad[n.b1_offset() + k] += dz;
    if (!input_grad.empty()) {
      for (std::size_t j = 0; j < q; ++j) input_grad[n.tree_features()[j]] += dz * n.w1(k, j);
    }
  };

  if (!n.deep()) {
    push_first_layer(k_star, g);
    return;
  }

  for (std::size_t j = 0; j < h; ++j) param_grad[n.w2_offset() + k_star * h + j] += g * trace.acts1[j];
  param_grad[n.b2_offset() + k_star] += g;
  for (std::size_t j = 0; j < h; ++j) {
    if (trace.preacts1[j] > 0.0) push_first_layer(j, g * n.w2(k_star, j));
  }
}

struct RuleGradient {
  std::vector<double> params;
  std::vector<double> input;  // d value / d x over all p input columns
};

inline RuleGradient backward(const NeuralRule& n, const ForwardTrace& trace, double upstream, std::size_t input_dim) {
  RuleGradient g{std::vector<double>(n.parameter_count(), 0.0), std::vector<double>(input_dim, 0.0)};
  backward(n, trace, upstream, g.params, g.input);
  return g;
}

// ---------------------------------------------------------------------------
// Adam
// ---------------------------------------------------------------------------

struct AdamHyper {
  double learning_rate = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamState {
  std::size_t step = 0;
  std::vector<double> m;
  std::vector<double> v;
  AdamHyper hyper;

  AdamState() = default;
  explicit AdamState(std::size_t size, AdamHyper h = {}) : m(size, 0.0), v(size, 0.0), hyper(h) {}
};

// Bias-corrected Adam update, in place.
inline void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state) {
  if (params.size() != grads.size() || params.size() != state.m.size() || params.size() != state.v.size()) {
    throw std::invalid_argument(fmt::format("adam_step: shape mismatch (params {}, grads {}, state {})", params.size(),
                                            grads.size(), state.m.size()));
  }
  const auto& hp = state.hyper;
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double correction1 = 1.0 - std::pow(hp.beta1, t);
  const double correction2 = 1.0 - std::pow(hp.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    state.m[i] = hp.beta1 * state.m[i] + (1.0 - hp.beta1) * grads[i];
    state.v[i] = hp.beta2 * state.v[i] + (1.0 - hp.beta2) * grads[i] * grads[i];
    const double m_hat = state.m[i] / correction1;
    const double v_hat = state.v[i] / correction2;
    params[i] -= hp.learning_rate * m_hat / (std::sqrt(v_hat) + hp.epsilon);
  }
}

}  // namespace nre
