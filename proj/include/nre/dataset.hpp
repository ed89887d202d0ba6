#pragma once

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "nre/detail/table_io.hpp"
#include "nre/error.hpp"

namespace nre {

// Raw label strings that were mapped onto +1/-1, kept so a dataset can be
// written back in its original vocabulary.
struct LabelCoding {
  std::string column = "label";
  std::string positive = "1";
  std::string negative = "-1";
};

// Immutable N x p feature matrix (row-major) with labels in {-1, +1}.
class Dataset {
 public:
  Dataset(std::vector<double> values, std::size_t cols, std::vector<int> labels,
          std::vector<std::string> feature_names = {}, LabelCoding coding = {})
      : values_(std::move(values)),
        cols_(cols),
        labels_(std::move(labels)),
        names_(std::move(feature_names)),
        coding_(std::move(coding)) {
    if (cols_ == 0) throw DataError("dataset needs at least one feature column");
    if (labels_.empty()) throw DataError("dataset needs at least one row");
    if (values_.size() != labels_.size() * cols_) {
      throw DataError(fmt::format("feature matrix has {} values, expected {} x {}", values_.size(),
                                  labels_.size(), cols_));
    }
    for (int y : labels_) {
      if (y != 1 && y != -1) throw DataError(fmt::format("label {} is not -1 or +1", y));
    }
    for (double v : values_) {
      if (!std::isfinite(v)) throw DataError("non-finite feature value");
    }
    if (names_.empty()) {
      names_.reserve(cols_);
      for (std::size_t j = 0; j < cols_; ++j) names_.push_back(fmt::format("x{}", j));
    }
    if (names_.size() != cols_) throw DataError("feature name count does not match columns");
  }

  std::size_t rows() const noexcept { return labels_.size(); }
  std::size_t cols() const noexcept { return cols_; }

  std::span<const double> row(std::size_t i) const { return {values_.data() + i * cols_, cols_}; }
  double at(std::size_t i, std::size_t j) const { return values_[i * cols_ + j]; }
  int label(std::size_t i) const { return labels_[i]; }

  const std::vector<double>& values() const noexcept { return values_; }
  const std::vector<int>& labels() const noexcept { return labels_; }
  const std::vector<std::string>& feature_names() const noexcept { return names_; }
  const LabelCoding& label_coding() const noexcept { return coding_; }

  std::size_t count_positive() const {
    return static_cast<std::size_t>(std::count(labels_.begin(), labels_.end(), 1));
  }
  std::size_t count_negative() const { return rows() - count_positive(); }

  Dataset subset(std::span<const std::size_t> indices) const {
    std::vector<double> values;
    std::vector<int> labels;
    values.reserve(indices.size() * cols_);
    labels.reserve(indices.size());
    for (auto i : indices) {
      if (i >= rows()) throw DataError("subset index out of range");
      const auto r = row(i);
      values.insert(values.end(), r.begin(), r.end());
      labels.push_back(labels_[i]);
    }
    return Dataset(std::move(values), cols_, std::move(labels), names_, coding_);
  }

 private:
  std::vector<double> values_;
  std::size_t cols_;
  std::vector<int> labels_;
  std::vector<std::string> names_;
  LabelCoding coding_;
};

using LabelColumn = std::variant<std::string, std::size_t>;

namespace detail {

inline std::size_t resolve_label_column(const RawTable& table, const LabelColumn& column) {
  if (const auto* idx = std::get_if<std::size_t>(&column)) {
    if (*idx >= table.header.size()) throw DataError(fmt::format("label column {} out of range", *idx));
    return *idx;
  }
  const auto& name = std::get<std::string>(column);
  const auto it = std::find(table.header.begin(), table.header.end(), name);
  if (it == table.header.end()) throw DataError("label column not found: " + name);
  return static_cast<std::size_t>(it - table.header.begin());
}

// Larger of two raw labels: numeric order when both parse, else lexicographic.
inline bool raw_label_less(const std::string& a, const std::string& b) {
  const auto na = parse_double(a);
  const auto nb = parse_double(b);
  if (na && nb) return *na < *nb;
  return a < b;
}

}  // namespace detail

// Builds a Dataset from an already-parsed table. When positive_label is unset
// the larger of the two raw label values becomes +1.
inline Dataset dataset_from_table(const detail::RawTable& table, const LabelColumn& label_column,
                                  const std::optional<std::string>& positive_label,
                                  const std::string& source = "table") {
  if (table.rows.empty()) throw DataError(source + ": empty file (header only)");
  if (table.header.size() < 2) throw DataError(source + ": need a label column and at least one feature");
  const auto label_idx = detail::resolve_label_column(table, label_column);

  std::vector<std::string> distinct;
  for (const auto& row : table.rows) {
    const auto& v = row[label_idx];
    if (std::find(distinct.begin(), distinct.end(), v) == distinct.end()) {
      distinct.push_back(v);
      if (distinct.size() > 2) throw DataError(source + ": more than two classes in label column");
    }
  }

  LabelCoding coding;
  coding.column = table.header[label_idx];
  if (positive_label) {
    if (std::find(distinct.begin(), distinct.end(), *positive_label) == distinct.end()) {
      throw DataError(source + ": positive label '" + *positive_label + "' not present");
    }
    coding.positive = *positive_label;
    coding.negative.clear();
    for (const auto& v : distinct) {
      if (v != *positive_label) coding.negative = v;
    }
  } else {
    if (distinct.size() < 2) throw DataError(source + ": fewer than two classes and no positive label given");
    std::sort(distinct.begin(), distinct.end(), detail::raw_label_less);
    coding.negative = distinct[0];
    coding.positive = distinct[1];
  }

  const std::size_t cols = table.header.size() - 1;
  std::vector<std::string> names;
  names.reserve(cols);
  for (std::size_t j = 0; j < table.header.size(); ++j) {
    if (j != label_idx) names.push_back(table.header[j]);
  }

  std::vector<double> values;
  std::vector<int> labels;
  values.reserve(table.rows.size() * cols);
  labels.reserve(table.rows.size());
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& row = table.rows[i];
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (j == label_idx) continue;
      const auto v = detail::parse_double(row[j]);
      if (!v) {
        throw DataError(fmt::format("{}: non-numeric feature value '{}' at data row {}, column '{}'", source,
                                    row[j], i + 1, table.header[j]));
      }
      values.push_back(*v);
    }
    labels.push_back(row[label_idx] == coding.positive ? 1 : -1);
  }
  return Dataset(std::move(values), cols, std::move(labels), std::move(names), std::move(coding));
}

// Reads a CSV/TSV file (optionally gzip-compressed) with a header row.
inline Dataset load_table(const std::filesystem::path& path, const LabelColumn& label_column,
                          const std::optional<std::string>& positive_label = std::nullopt) {
  return dataset_from_table(detail::read_table(path), label_column, positive_label, path.string());
}

// Writes features followed by the label column, using the raw label strings.
inline void write_table(const Dataset& d, const std::filesystem::path& path) {
  const char delim = detail::delimiter_for(path, "");
  std::string out;
  for (const auto& name : d.feature_names()) {
    out += name;
    out += delim;
  }
  out += d.label_coding().column;
  out += '\n';
  for (std::size_t i = 0; i < d.rows(); ++i) {
    for (double v : d.row(i)) {
      fmt::format_to(std::back_inserter(out), "{}", v);
      out += delim;
    }
    out += d.label(i) == 1 ? d.label_coding().positive : d.label_coding().negative;
    out += '\n';
  }
  detail::write_file_bytes(path, out);
}

// ---------------------------------------------------------------------------
// Standardization
// ---------------------------------------------------------------------------

struct StandardizationParams {
  std::vector<double> means;
  std::vector<double> stds;

  std::size_t size() const noexcept { return means.size(); }

  static StandardizationParams identity(std::size_t p) {
    return {std::vector<double>(p, 0.0), std::vector<double>(p, 1.0)};
  }

  void apply(std::span<const double> x, std::span<double> out) const {
    if (x.size() != size() || out.size() != size()) {
      throw DataError(fmt::format("dimension mismatch: point has {} features, standardizer {}", x.size(), size()));
    }
    for (std::size_t j = 0; j < x.size(); ++j) out[j] = (x[j] - means[j]) / stds[j];
  }

  std::vector<double> apply(std::span<const double> x) const {
    std::vector<double> out(x.size());
    apply(x, out);
    return out;
  }
};

// Column means and population standard deviations; constant columns get std 1.
inline StandardizationParams standardize_fit(const Dataset& d) {
  const std::size_t n = d.rows();
  const std::size_t p = d.cols();
  StandardizationParams s{std::vector<double>(p, 0.0), std::vector<double>(p, 0.0)};
  for (std::size_t i = 0; i < n; ++i) {
    const auto r = d.row(i);
    for (std::size_t j = 0; j < p; ++j) s.means[j] += r[j];
  }
  for (auto& m : s.means) m /= static_cast<double>(n);
  // Second pass on centered values keeps the variance accurate for large offsets.
  for (std::size_t i = 0; i < n; ++i) {
    const auto r = d.row(i);
    for (std::size_t j = 0; j < p; ++j) {
      const double c = r[j] - s.means[j];
      s.stds[j] += c * c;
    }
  }
  for (std::size_t j = 0; j < p; ++j) {
    const double sd = std::sqrt(s.stds[j] / static_cast<double>(n));
    const double scale = std::max(1.0, std::abs(s.means[j]));
    s.stds[j] = sd > 1e-12 * scale ? sd : 1.0;
  }
  return s;
}

inline Dataset standardize_apply(const Dataset& d, const StandardizationParams& s) {
  if (d.cols() != s.size()) {
    throw DataError(fmt::format("dimension mismatch: dataset has {} features, standardizer {}", d.cols(), s.size()));
  }
  std::vector<double> values(d.values().size());
  for (std::size_t i = 0; i < d.rows(); ++i) {
    s.apply(d.row(i), std::span<double>(values.data() + i * d.cols(), d.cols()));
  }
  return Dataset(std::move(values), d.cols(), d.labels(), d.feature_names(), d.label_coding());
}

inline Dataset standardize_invert(const Dataset& d, const StandardizationParams& s) {
  if (d.cols() != s.size()) throw DataError("dimension mismatch in standardize_invert");
  std::vector<double> values(d.values().size());
  for (std::size_t i = 0; i < d.rows(); ++i) {
    for (std::size_t j = 0; j < d.cols(); ++j) values[i * d.cols() + j] = d.at(i, j) * s.stds[j] + s.means[j];
  }
  return Dataset(std::move(values), d.cols(), d.labels(), d.feature_names(), d.label_coding());
}

// ---------------------------------------------------------------------------
// Stratified k-fold assignment
// ---------------------------------------------------------------------------

struct FoldAssignment {
  std::size_t k = 0;
  std::vector<std::size_t> fold_index;

  std::vector<std::size_t> test_indices(std::size_t fold) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < fold_index.size(); ++i) {
      if (fold_index[i] == fold) out.push_back(i);
    }
    return out;
  }

  std::vector<std::size_t> train_indices(std::size_t fold) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < fold_index.size(); ++i) {
      if (fold_index[i] != fold) out.push_back(i);
    }
    return out;
  }
};

// Each class is shuffled with the seed and dealt round-robin; the negative
// class continues where the positive class stopped so fold sizes stay within
// one of each other.
inline FoldAssignment stratified_kfold(const Dataset& d, std::size_t k, std::uint64_t seed) {
  if (k < 2) throw DataError("k-fold needs k >= 2");
  if (k > d.rows()) throw DataError(fmt::format("k = {} exceeds number of samples {}", k, d.rows()));

  std::vector<std::size_t> pos;
  std::vector<std::size_t> neg;
  for (std::size_t i = 0; i < d.rows(); ++i) (d.label(i) == 1 ? pos : neg).push_back(i);

  std::mt19937_64 rng(seed);
  std::shuffle(pos.begin(), pos.end(), rng);
  std::shuffle(neg.begin(), neg.end(), rng);

  FoldAssignment folds{k, std::vector<std::size_t>(d.rows(), 0)};
  std::size_t slot = 0;
  for (auto i : pos) folds.fold_index[i] = slot++ % k;
  for (auto i : neg) folds.fold_index[i] = slot++ % k;
  return folds;
}

}  // namespace nre
