#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "nre/nre.hpp"

namespace nre_test {

// Per-dataset test errors (percent) from the published comparison of NRE
// against gradient boosting, random forests and a plain neural network.
struct GoldenRow {
  const char* dataset;
  double other;
  double nre;
};

inline const std::vector<GoldenRow> gb_vs_nre = {
    {"wilt", 18.60, 10.40},       {"madelon", 14.50, 10.30},   {"adult", 12.91, 14.22},
    {"phoneme", 9.25, 8.14},      {"dis", 0.71, 1.77},         {"titanic", 27.49, 26.89},
    {"churn", 3.60, 4.13},        {"banana", 9.31, 8.93},      {"ring", 3.15, 3.51},
    {"spambase", 4.34, 4.63},     {"kr-vs-kp", 0.42, 0.20},    {"chess", 0.21, 0.42},
    {"coil2000", 6.04, 5.83},     {"twonorm", 2.34, 2.25},     {"clean2", 0.00, 0.00},
    {"hypothyroid", 1.47, 1.47},  {"agaricus-lepiota", 0.00, 0.00}, {"magic", 11.67, 11.67},
    {"mushroom", 0.00, 0.00},
};

inline const std::vector<GoldenRow> rf_vs_nre = {
    {"madelon", 26.40, 10.30},    {"wilt", 21.60, 10.40},      {"coil2000", 7.06, 5.83},
    {"phoneme", 9.00, 8.14},      {"banana", 9.56, 8.93},      {"titanic", 27.49, 26.89},
    {"spambase", 4.92, 4.63},     {"twonorm", 2.52, 2.25},     {"adult", 14.47, 14.22},
    {"kr-vs-kp", 0.42, 0.20},     {"magic", 11.88, 11.67},     {"hypothyroid", 1.68, 1.47},
    {"chess", 0.62, 0.42},        {"ring", 3.33, 3.51},        {"agaricus-lepiota", 0.00, 0.00},
    {"mushroom", 0.00, 0.00},     {"dis", 1.77, 1.77},         {"clean2", 0.00, 0.00},
    {"churn", 4.13, 4.13},
};

inline const std::vector<GoldenRow> ann_vs_nre = {
    {"madelon", 45.50, 10.30},    {"phoneme", 14.18, 8.14},    {"wilt", 14.20, 10.40},
    {"churn", 6.27, 4.13},        {"coil2000", 7.46, 5.83},    {"spambase", 3.47, 4.63},
    {"ring", 2.52, 3.51},         {"magic", 12.44, 11.67},     {"adult", 14.79, 14.22},
    {"hypothyroid", 1.89, 1.47},  {"kr-vs-kp", 0.62, 0.20},    {"banana", 9.31, 8.93},
    {"twonorm", 2.43, 2.25},      {"dis", 1.94, 1.77},         {"agaricus-lepiota", 0.00, 0.00},
    {"mushroom", 0.00, 0.00},     {"clean2", 0.00, 0.00},      {"chess", 0.42, 0.42},
    {"titanic", 26.89, 26.89},
};

inline nre::stats::ComparisonTable golden_table(const std::vector<GoldenRow>& rows, const std::string& other) {
  std::vector<nre::stats::ComparisonRow> out;
  for (const auto& r : rows) out.push_back({r.dataset, r.other, r.nre});
  return {other, "NRE", std::move(out)};
}

// Random dataset with features drawn from a small integer grid (so duplicate
// values and ties are common) and random labels.
inline nre::Dataset random_grid_dataset(std::mt19937_64& rng, std::size_t n, std::size_t p, int levels = 4) {
  std::uniform_int_distribution<int> v(0, levels - 1);
  std::bernoulli_distribution coin(0.5);
  std::vector<double> values(n * p);
  std::vector<int> labels(n);
  for (auto& x : values) x = v(rng);
  for (auto& y : labels) y = coin(rng) ? 1 : -1;
  return nre::Dataset(std::move(values), p, std::move(labels));
}

inline nre::Dataset random_continuous_dataset(std::mt19937_64& rng, std::size_t n, std::size_t p) {
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<double> values(n * p);
  std::vector<int> labels(n);
  for (auto& x : values) x = g(rng);
  for (std::size_t i = 0; i < n; ++i) {
    // Labels follow a noisy oblique boundary so trees grow a few levels.
    double s = 0.0;
    for (std::size_t j = 0; j < p; ++j) s += (j % 2 == 0 ? 1.0 : -0.7) * values[i * p + j];
    labels[i] = s + 0.3 * g(rng) > 0.0 ? 1 : -1;
  }
  if (std::count(labels.begin(), labels.end(), 1) == 0) labels[0] = 1;
  if (std::count(labels.begin(), labels.end(), -1) == 0) labels[0] = -1;
  return nre::Dataset(std::move(values), p, std::move(labels));
}

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() / ("nre-" + tag + "-" + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

// Independent exhaustive split search: every feature, every midpoint between
// consecutive distinct values, gain compared as an exact fraction
//   G = A/nl + B/nr - C/np  =  (A nr np + B nl np - C nl nr) / (nl nr np).
// Strictly larger gains replace the incumbent, so the first of equal gains
// (lowest feature, then lowest threshold) wins.
struct OracleSplit {
  std::size_t feature;
  double threshold;
};

inline std::optional<OracleSplit> brute_force_split(const nre::Dataset& d, std::size_t min_leaf = 1) {
  std::optional<OracleSplit> best;
  __int128 best_num = 0, best_den = 1;
  for (std::size_t f = 0; f < d.cols(); ++f) {
    std::vector<double> vals;
    for (std::size_t i = 0; i < d.rows(); ++i) vals.push_back(d.at(i, f));
    std::sort(vals.begin(), vals.end());
    vals.erase(std::unique(vals.begin(), vals.end()), vals.end());
    for (std::size_t k = 0; k + 1 < vals.size(); ++k) {
      const double t = (vals[k] + vals[k + 1]) / 2.0;
      long long lp = 0, ln = 0, rp = 0, rn = 0;
      for (std::size_t i = 0; i < d.rows(); ++i) {
        const bool left = d.at(i, f) <= t;
        const bool pos = d.label(i) == 1;
        (left ? (pos ? lp : ln) : (pos ? rp : rn)) += 1;
      }
      const long long nl = lp + ln, nr = rp + rn, np = nl + nr;
      if (nl < static_cast<long long>(min_leaf) || nr < static_cast<long long>(min_leaf)) continue;
      const __int128 A = (__int128)(lp - ln) * (lp - ln);
      const __int128 B = (__int128)(rp - rn) * (rp - rn);
      const __int128 C = (__int128)(lp + rp - ln - rn) * (lp + rp - ln - rn);
      const __int128 num = A * nr * np + B * nl * np - C * nl * nr;
      const __int128 den = (__int128)nl * nr * np;
      if (num <= 0) continue;
      if (!best || num * best_den > best_num * den) {
        best = OracleSplit{f, t};
        best_num = num;
        best_den = den;
      }
    }
  }
  return best;
}

// Distance of the forward pass from every kink: ReLU zero crossings in both
// layers and ties in the min pool.
inline double kink_distance(const nre::ForwardTrace& t) {
  double d = std::numeric_limits<double>::infinity();
  for (double v : t.preacts1) d = std::min(d, std::abs(v));
  for (double v : t.preacts2) d = std::min(d, std::abs(v));
  const auto& a = t.final_acts();
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (k != t.argmin_index) d = std::min(d, a[k] - t.min_activation);
  }
  return d;
}

}  // namespace nre_test
