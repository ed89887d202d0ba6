#pragma once

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "nre/tree.hpp"

namespace nre {

// One threshold condition of a path: active when sign * x[feature] + bias > 0.
// Left branch (x <= t): sign = -1, bias = +t. Right branch: sign = +1, bias = -t.
struct Literal {
  std::size_t feature = 0;
  int sign = 1;
  double bias = 0.0;

  double value(std::span<const double> x) const { return sign * x[feature] + bias; }
  double threshold() const { return sign < 0 ? bias : -bias; }
};

// Conjunction of literals with activation value c (a root-to-leaf path).
struct ConjunctiveRule {
  std::vector<Literal> literals;
  double c = 1.0;
  std::size_t n_pos = 0;
  std::size_t n_neg = 0;

  std::size_t count() const noexcept { return n_pos + n_neg; }
};

// Stand-in leaf value for a perfectly balanced leaf, keeping c nonzero.
inline constexpr double balanced_leaf_value = 1e-6;

inline double leaf_value(std::size_t n_pos, std::size_t n_neg) {
  const auto n = n_pos + n_neg;
  if (n == 0) return balanced_leaf_value;
  const double c = (static_cast<double>(n_pos) - static_cast<double>(n_neg)) / static_cast<double>(n);
  return c == 0.0 ? balanced_leaf_value : c;
}

// One rule per leaf, in left-to-right leaf order; literals follow the path
// from the root.
inline std::vector<ConjunctiveRule> extract_rules(const DecisionTree& tree) {
  std::vector<ConjunctiveRule> rules;
  std::vector<Literal> path;
  auto visit = [&](auto&& self, std::size_t i) -> void {
    const auto& n = tree.node(i);
    if (n.leaf) {
      rules.push_back({path, leaf_value(n.n_pos, n.n_neg), n.n_pos, n.n_neg});
      return;
    }
    path.push_back({n.feature, -1, n.threshold});
    self(self, n.left);
    path.back() = {n.feature, +1, -n.threshold};
    self(self, n.right);
    path.pop_back();
  };
  visit(visit, 0);
  return rules;
}

// Heaviside semantics with H(0) = 0: c when every literal is strictly
// positive, otherwise 0.
inline double rule_activate(const ConjunctiveRule& r, std::span<const double> x) {
  for (const auto& lit : r.literals) {
    if (!(lit.value(x) > 0.0)) return 0.0;
  }
  return r.c;
}

// ||r||_2 over the training set: |c| * sqrt(n), since the rule is c on its n
// activated samples and 0 elsewhere.
inline double rule_norm(const ConjunctiveRule& r) {
  if (r.count() == 0) throw std::invalid_argument("rule_norm: rule activates no training samples");
  return std::abs(r.c) * std::sqrt(static_cast<double>(r.count()));
}

// m^2 = (n+ - n-)^2 / n; larger means more relevant.
inline double rule_margin_score(std::size_t n_pos, std::size_t n_neg) {
  const auto n = n_pos + n_neg;
  if (n == 0) throw std::invalid_argument("rule_margin_score: empty rule");
  const double diff = static_cast<double>(n_pos) - static_cast<double>(n_neg);
  return diff * diff / static_cast<double>(n);
}

inline double rule_margin_score(const ConjunctiveRule& r) { return rule_margin_score(r.n_pos, r.n_neg); }

// Indices sorted by decreasing m^2; equal scores keep their original order.
inline std::vector<std::size_t> rank_rules(std::span<const ConjunctiveRule> rules) {
  std::vector<double> score(rules.size());
  for (std::size_t k = 0; k < rules.size(); ++k) score[k] = rule_margin_score(rules[k]);
  std::vector<std::size_t> order(rules.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return score[a] > score[b]; });
  return order;
}

// `IF x3 <= 0.50 AND x7 > -1.20 THEN c=0.43 (n+=12, n-=3, m2=5.4)`
inline std::string format_rule(const ConjunctiveRule& r, const std::vector<std::string>& names = {}) {
  std::string out = "IF ";
  if (r.literals.empty()) out += "TRUE";
  for (std::size_t j = 0; j < r.literals.size(); ++j) {
    const auto& lit = r.literals[j];
    if (j > 0) out += " AND ";
    const auto name = lit.feature < names.size() ? names[lit.feature] : fmt::format("x{}", lit.feature);
    out += fmt::format("{} {} {:.2f}", name, lit.sign < 0 ? "<=" : ">", lit.threshold());
  }
  const double m2 = r.count() > 0 ? rule_margin_score(r) : 0.0;
  out += fmt::format(" THEN c={:.2f} (n+={}, n-={}, m2={:.1f})", r.c, r.n_pos, r.n_neg, m2);
  return out;
}

}  // namespace nre
