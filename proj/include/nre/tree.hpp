#pragma once

#include <fmt/format.h>

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "nre/dataset.hpp"
#include "nre/error.hpp"

namespace nre {

// Gain of splitting a parent into two children under the margin criterion:
//   (nl+ - nl-)^2/nl + (nr+ - nr-)^2/nr - (np+ - np-)^2/np
// Each term is the squared margin score of the rule covering that node.
inline double margin_split_gain(std::int64_t nl_pos, std::int64_t nl_neg, std::int64_t nr_pos, std::int64_t nr_neg) {
  if (nl_pos < 0 || nl_neg < 0 || nr_pos < 0 || nr_neg < 0) throw std::invalid_argument("negative class count");
  const std::int64_t nl = nl_pos + nl_neg;
  const std::int64_t nr = nr_pos + nr_neg;
  if (nl == 0 || nr == 0) throw std::invalid_argument("margin_split_gain: empty child");
  const auto sq = [](std::int64_t v) { return static_cast<double>(v) * static_cast<double>(v); };
  const double dl = sq(nl_pos - nl_neg) / static_cast<double>(nl);
  const double dr = sq(nr_pos - nr_neg) / static_cast<double>(nr);
  const double dp = sq(nl_pos + nr_pos - nl_neg - nr_neg) / static_cast<double>(nl + nr);
  return dl + dr - dp;
}

namespace detail {

// Exact value of (l+ - l-)^2/nl + (r+ - r-)^2/nr as a fraction, so candidate
// splits compare without rounding and the tie rule is honoured exactly.
struct ChildScore {
  __int128 num = 0;
  __int128 den = 1;

  static ChildScore of(std::int64_t lp, std::int64_t ln, std::int64_t rp, std::int64_t rn) {
    const __int128 nl = lp + ln;
    const __int128 nr = rp + rn;
    const __int128 dl = lp - ln;
    const __int128 dr = rp - rn;
    return {dl * dl * nr + dr * dr * nl, nl * nr};
  }

  friend bool operator<(const ChildScore& a, const ChildScore& b) { return a.num * b.den < b.num * a.den; }
  friend bool operator==(const ChildScore& a, const ChildScore& b) { return a.num * b.den == b.num * a.den; }

  // Strictly greater than the parent term (p+ - p-)^2 / np.
  bool beats_parent(std::int64_t pp, std::int64_t pn) const {
    const __int128 np = pp + pn;
    const __int128 dp = pp - pn;
    return num * np > dp * dp * den;
  }
};

}  // namespace detail

struct Split {
  std::size_t feature = 0;
  double threshold = 0.0;  // x <= threshold goes left
  double gain = 0.0;
  std::size_t left_pos = 0, left_neg = 0, right_pos = 0, right_neg = 0;
};

// Exhaustive scan over every feature and every midpoint between consecutive
// distinct sorted values. Returns the split with the largest positive gain;
// ties go to the lowest feature index, then the lowest threshold. Splits that
// leave fewer than min_leaf samples in a child are skipped.
inline std::optional<Split> best_split(const Dataset& d, std::span<const std::size_t> rows, std::size_t min_leaf = 1) {
  if (rows.size() < 2) return std::nullopt;
  min_leaf = std::max<std::size_t>(min_leaf, 1);

  std::int64_t total_pos = 0;
  for (auto i : rows) total_pos += d.label(i) == 1;
  const std::int64_t total_neg = static_cast<std::int64_t>(rows.size()) - total_pos;

  std::optional<Split> best;
  detail::ChildScore best_score;
  std::vector<std::size_t> order(rows.begin(), rows.end());

  for (std::size_t f = 0; f < d.cols(); ++f) {
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return d.at(a, f) < d.at(b, f); });
    std::int64_t lp = 0;
    std::int64_t ln = 0;
    for (std::size_t k = 0; k + 1 < order.size(); ++k) {
      (d.label(order[k]) == 1 ? lp : ln) += 1;
      const double lo = d.at(order[k], f);
      const double hi = d.at(order[k + 1], f);
      if (!(lo < hi)) continue;
      const std::size_t n_left = k + 1;
      if (n_left < min_leaf || order.size() - n_left < min_leaf) continue;

      const auto score = detail::ChildScore::of(lp, ln, total_pos - lp, total_neg - ln);
      if (!score.beats_parent(total_pos, total_neg)) continue;
      // Features are scanned in ascending order and thresholds ascend within a
      // feature, so only a strictly better score replaces the incumbent.
      if (best && !(best_score < score)) continue;

      double threshold = lo + (hi - lo) / 2.0;
      if (!(threshold < hi)) threshold = lo;
      best_score = score;
      best = Split{f,
                   threshold,
                   margin_split_gain(lp, ln, total_pos - lp, total_neg - ln),
                   static_cast<std::size_t>(lp),
                   static_cast<std::size_t>(ln),
                   static_cast<std::size_t>(total_pos - lp),
                   static_cast<std::size_t>(total_neg - ln)};
    }
  }
  return best;
}

inline std::optional<Split> best_split(const Dataset& d, std::size_t min_leaf = 1) {
  std::vector<std::size_t> rows(d.rows());
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  return best_split(d, rows, min_leaf);
}

struct TreeNode {
  static constexpr std::size_t none = static_cast<std::size_t>(-1);

  bool leaf = true;
  std::size_t feature = 0;
  double threshold = 0.0;
  std::size_t left = none;
  std::size_t right = none;
  std::size_t n_pos = 0;
  std::size_t n_neg = 0;
  std::size_t depth = 0;

  std::size_t count() const noexcept { return n_pos + n_neg; }
};

// Binary tree stored as a node arena; nodes[0] is the root.
class DecisionTree {
 public:
  DecisionTree() = default;
  DecisionTree(std::vector<TreeNode> nodes, std::size_t max_depth) : nodes_(std::move(nodes)), max_depth_(max_depth) {
    if (nodes_.empty()) throw std::invalid_argument("tree needs a root node");
    for (const auto& n : nodes_) {
      if (n.leaf) continue;
      if (n.left >= nodes_.size() || n.right >= nodes_.size()) throw std::invalid_argument("dangling child index");
      if (std::find(feature_set_.begin(), feature_set_.end(), n.feature) == feature_set_.end()) {
        feature_set_.push_back(n.feature);
      }
    }
    std::sort(feature_set_.begin(), feature_set_.end());
  }

  const std::vector<TreeNode>& nodes() const noexcept { return nodes_; }
  const TreeNode& root() const { return nodes_.front(); }
  const TreeNode& node(std::size_t i) const { return nodes_.at(i); }
  std::size_t max_depth() const noexcept { return max_depth_; }
  const std::vector<std::size_t>& feature_set() const noexcept { return feature_set_; }

  // Index of the leaf reached by x (x <= threshold goes left).
  std::size_t route(std::span<const double> x) const {
    std::size_t i = 0;
    while (!nodes_[i].leaf) {
      const auto& n = nodes_[i];
      i = x[n.feature] <= n.threshold ? n.left : n.right;
    }
    return i;
  }

  // Leaf node indices in left-to-right order.
  std::vector<std::size_t> leaves() const {
    std::vector<std::size_t> out;
    std::vector<std::size_t> stack{0};
    while (!stack.empty()) {
      const auto i = stack.back();
      stack.pop_back();
      if (nodes_[i].leaf) {
        out.push_back(i);
      } else {
        stack.push_back(nodes_[i].right);
        stack.push_back(nodes_[i].left);
      }
    }
    return out;
  }

  std::size_t leaf_count() const { return leaves().size(); }

  std::size_t depth() const {
    std::size_t d = 0;
    for (const auto& n : nodes_) d = std::max(d, n.depth);
    return d;
  }

  // Majority vote of the leaf x falls into; ties vote +1.
  int predict(std::span<const double> x) const {
    const auto& leaf = nodes_[route(x)];
    return leaf.n_pos >= leaf.n_neg ? 1 : -1;
  }

  // One node per line, two spaces of indent per level.
  std::string pretty(const std::vector<std::string>& feature_names = {}) const {
    std::string out;
    print_node(0, out, feature_names);
    return out;
  }

 private:
  void print_node(std::size_t i, std::string& out, const std::vector<std::string>& names) const {
    const auto& n = nodes_[i];
    const std::string indent(2 * n.depth, ' ');
    if (n.leaf) {
      out += fmt::format("{}leaf (n+={}, n-={})\n", indent, n.n_pos, n.n_neg);
      return;
    }
    const auto name = n.feature < names.size() ? names[n.feature] : fmt::format("x{}", n.feature);
    out += fmt::format("{}{} <= {} (n+={}, n-={})\n", indent, name, n.threshold, n.n_pos, n.n_neg);
    print_node(n.left, out, names);
    print_node(n.right, out, names);
  }

  std::vector<TreeNode> nodes_;
  std::size_t max_depth_ = 0;
  std::vector<std::size_t> feature_set_;
};

struct TreeOptions {
  std::size_t max_depth = 4;
  std::size_t min_leaf = 1;
  // When set, nodes are expanded best-first (largest gain, then creation
  // order) until the tree has this many leaves.
  std::optional<std::size_t> max_leaves;
};

// Greedy recursive partitioning with the margin criterion. A node becomes a
// leaf at max_depth, when pure, when no split has positive gain, or when no
// split keeps min_leaf samples on both sides.
inline DecisionTree build_tree(const Dataset& d, const TreeOptions& opts) {
  if (opts.max_depth < 1) throw std::invalid_argument("build_tree: max_depth must be >= 1");
  if (opts.min_leaf < 1) throw std::invalid_argument("build_tree: min_leaf must be >= 1");
  if (opts.max_leaves && *opts.max_leaves < 1) throw std::invalid_argument("build_tree: max_leaves must be >= 1");
  if (d.rows() == 0) throw DataError("build_tree: empty dataset");

  struct Pending {
    std::size_t node;
    std::vector<std::size_t> rows;
    std::optional<Split> split;
  };
  std::vector<TreeNode> nodes;
  std::vector<Pending> frontier;

  auto open_node = [&](std::size_t idx, std::vector<std::size_t> rows) {
    std::size_t pos = 0;
    for (auto i : rows) pos += d.label(i) == 1;
    nodes[idx].n_pos = pos;
    nodes[idx].n_neg = rows.size() - pos;
    const bool pure = pos == 0 || pos == rows.size();
    if (pure || nodes[idx].depth >= opts.max_depth || rows.size() < 2 * opts.min_leaf) return;
    auto split = best_split(d, rows, opts.min_leaf);
    if (split) frontier.push_back({idx, std::move(rows), split});
  };

  std::vector<std::size_t> all(d.rows());
  std::iota(all.begin(), all.end(), std::size_t{0});
  nodes.push_back(TreeNode{});
  open_node(0, std::move(all));

  std::size_t leaves = 1;
  while (!frontier.empty()) {
    if (opts.max_leaves && leaves >= *opts.max_leaves) break;
    // Depth-first (left subtree first) by default; best-first under a leaf cap.
    auto pick = frontier.end() - 1;
    if (opts.max_leaves) {
      pick = std::max_element(frontier.begin(), frontier.end(), [](const Pending& a, const Pending& b) {
        if (a.split->gain != b.split->gain) return a.split->gain < b.split->gain;
        return a.node > b.node;
      });
    }
    Pending work = std::move(*pick);
    frontier.erase(pick);
    const auto& split = *work.split;

    std::vector<std::size_t> left_rows;
    std::vector<std::size_t> right_rows;
    for (auto i : work.rows) (d.at(i, split.feature) <= split.threshold ? left_rows : right_rows).push_back(i);

    const std::size_t depth = nodes[work.node].depth + 1;
    const std::size_t left = nodes.size();
    nodes.push_back(TreeNode{.depth = depth});
    const std::size_t right = nodes.size();
    nodes.push_back(TreeNode{.depth = depth});
    auto& parent = nodes[work.node];
    parent.leaf = false;
    parent.feature = split.feature;
    parent.threshold = split.threshold;
    parent.left = left;
    parent.right = right;
    ++leaves;
    // Right is opened first so the left child sits on top of the stack.
    open_node(right, std::move(right_rows));
    open_node(left, std::move(left_rows));
  }
  return DecisionTree(std::move(nodes), opts.max_depth);
}

inline DecisionTree build_tree(const Dataset& d, std::size_t max_depth, std::size_t min_leaf = 1) {
  return build_tree(d, TreeOptions{max_depth, min_leaf, std::nullopt});
}

}  // namespace nre
