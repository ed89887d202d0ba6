#pragma once

#include <fmt/format.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "nre/detail/table_io.hpp"
#include "nre/error.hpp"

// Paired comparison of two classifiers over many datasets: Wilcoxon
// signed-rank test and sign test (wins/losses/ties).
namespace nre::stats {

struct ComparisonRow {
  std::string dataset;
  double error_a = 0.0;  // percent
  double error_b = 0.0;  // percent
};

// Errors are given with a handful of decimals; differences are compared on a
// 1e-6 grid so that e.g. 6.04 - 5.83 and 0.21 - 0.42 tie in magnitude.
inline constexpr double difference_resolution = 1e-6;

class ComparisonTable {
 public:
  ComparisonTable() = default;
  ComparisonTable(std::string name_a, std::string name_b, std::vector<ComparisonRow> rows)
      : name_a_(std::move(name_a)), name_b_(std::move(name_b)), rows_(std::move(rows)) {}

  const std::string& name_a() const noexcept { return name_a_; }
  const std::string& name_b() const noexcept { return name_b_; }
  const std::vector<ComparisonRow>& rows() const noexcept { return rows_; }
  std::size_t size() const noexcept { return rows_.size(); }
  bool empty() const noexcept { return rows_.empty(); }

  // error_a - error_b: positive when classifier b has the lower error.
  double difference(std::size_t i) const { return rows_[i].error_a - rows_[i].error_b; }

  // Difference snapped to the comparison grid.
  std::int64_t difference_ticks(std::size_t i) const {
    return static_cast<std::int64_t>(std::llround(difference(i) / difference_resolution));
  }

  ComparisonTable swapped() const {
    std::vector<ComparisonRow> rows = rows_;
    for (auto& r : rows) std::swap(r.error_a, r.error_b);
    return {name_b_, name_a_, std::move(rows)};
  }

 private:
  std::string name_a_ = "A";
  std::string name_b_ = "B";
  std::vector<ComparisonRow> rows_;
};

// Reads `dataset,error_a,error_b` with a header row; the header names of the
// two error columns become the classifier names.
inline ComparisonTable read_comparison_csv(const std::filesystem::path& path) {
  const auto table = nre::detail::read_table(path);
  if (table.header.size() != 3) throw DataError(path.string() + ": expected 3 columns (dataset, error_a, error_b)");
  std::vector<ComparisonRow> rows;
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& r = table.rows[i];
    const auto a = nre::detail::parse_double(r[1]);
    const auto b = nre::detail::parse_double(r[2]);
    if (!a || !b) throw DataError(fmt::format("{}: non-numeric error value on data row {}", path.string(), i + 1));
    rows.push_back({r[0], *a, *b});
  }
  if (rows.empty()) throw DataError(path.string() + ": no comparison rows");
  return {table.header[1], table.header[2], std::move(rows)};
}

// How ranks of zero differences are treated.
enum class ZeroPolicy {
  // Every zero-difference rank is split evenly between R+ and R-.
  split_all,
  // With an odd number of zeros, the zero row with the lexicographically
  // smallest dataset name is removed before ranking; the rest are split.
  drop_one_if_odd,
};

struct WilcoxonResult {
  double r_plus = 0.0;   // ranks where b has the lower error, plus half the zero ranks
  double r_minus = 0.0;  // ranks where a has the lower error, plus half the zero ranks
  double t_statistic = 0.0;
  std::size_t n = 0;  // rows that took part in the ranking
  std::optional<double> critical_value;
  bool reject_null = false;
  std::vector<std::optional<double>> ranks;  // per table row; nullopt for a dropped row
  std::optional<std::size_t> dropped_row;
};

// Average ranks of |difference|, ascending, over the rows flagged in `use`.
inline std::vector<std::optional<double>> signed_rank_ranks(const ComparisonTable& t, const std::vector<bool>& use) {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (use[i]) idx.push_back(i);
  }
  auto mag = [&](std::size_t i) { return std::llabs(t.difference_ticks(i)); };
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return mag(a) < mag(b); });

  std::vector<std::optional<double>> ranks(t.size());
  std::size_t start = 0;
  while (start < idx.size()) {
    std::size_t end = start;
    while (end + 1 < idx.size() && mag(idx[end + 1]) == mag(idx[start])) ++end;
    const double avg = (static_cast<double>(start + 1) + static_cast<double>(end + 1)) / 2.0;
    for (std::size_t k = start; k <= end; ++k) ranks[idx[k]] = avg;
    start = end + 1;
  }
  return ranks;
}

// Embedded two-tailed critical values at alpha = 0.05 for n = 5..30.
struct CriticalValues {
  std::optional<double> wilcoxon_t;  // reject when T <= this; none for n = 5
  std::optional<int> sign_wins;      // reject when adjusted wins >= this
};

namespace detail {

inline constexpr std::size_t table_min_n = 5;
inline constexpr std::size_t table_max_n = 30;

// Exact null distribution of the signed-rank statistic: largest T with
// 2 * P(W <= T) <= 0.05. n = 5 has none (-1).
inline constexpr std::array<int, 26> wilcoxon_critical_005 = {
    -1, 0, 2, 3, 5, 8, 10, 13, 17, 21, 25, 29, 34, 40, 46, 52, 58, 65, 73, 81, 89, 98, 107, 116, 126, 137};

// Exact Binomial(n, 1/2): smallest w with P(X >= w) <= 0.05. This is the
// standard table for the two-classifier sign test (19 datasets -> 14).
inline constexpr std::array<int, 26> sign_critical_005 = {5,  6,  7,  7,  8,  9,  9,  10, 10, 11, 12, 12, 13,
                                                          13, 14, 15, 15, 16, 16, 17, 18, 18, 19, 19, 20, 20};

}  // namespace detail

inline CriticalValues critical_values(std::size_t n, double alpha = 0.05) {
  if (std::abs(alpha - 0.05) > 1e-12) throw std::out_of_range("critical values are tabulated for alpha = 0.05 only");
  if (n < detail::table_min_n || n > detail::table_max_n) {
    throw std::out_of_range(fmt::format("critical values are tabulated for n in [{}, {}], got {}", detail::table_min_n,
                                        detail::table_max_n, n));
  }
  const auto k = n - detail::table_min_n;
  CriticalValues cv;
  if (detail::wilcoxon_critical_005[k] >= 0) cv.wilcoxon_t = detail::wilcoxon_critical_005[k];
  cv.sign_wins = detail::sign_critical_005[k];
  return cv;
}

inline std::optional<CriticalValues> try_critical_values(std::size_t n, double alpha = 0.05) {
  if (n < detail::table_min_n || n > detail::table_max_n) return std::nullopt;
  return critical_values(n, alpha);
}

// T = min(R+, R-); the null hypothesis is rejected when T <= critical_value.
inline WilcoxonResult wilcoxon_signed_rank(const ComparisonTable& t, std::optional<double> critical_value,
                                           ZeroPolicy policy = ZeroPolicy::split_all) {
  if (t.empty()) throw std::invalid_argument("wilcoxon_signed_rank: empty table");

  std::vector<bool> use(t.size(), true);
  WilcoxonResult res;
  if (policy == ZeroPolicy::drop_one_if_odd) {
    std::vector<std::size_t> zeros;
    for (std::size_t i = 0; i < t.size(); ++i) {
      if (t.difference_ticks(i) == 0) zeros.push_back(i);
    }
    if (zeros.size() % 2 == 1) {
      const auto victim = *std::min_element(zeros.begin(), zeros.end(), [&](std::size_t a, std::size_t b) {
        return t.rows()[a].dataset < t.rows()[b].dataset;
      });
      use[victim] = false;
      res.dropped_row = victim;
    }
  }
  res.n = static_cast<std::size_t>(std::count(use.begin(), use.end(), true));
  if (res.n == 0) throw std::invalid_argument("wilcoxon_signed_rank: no rows left after zero handling");

  res.ranks = signed_rank_ranks(t, use);
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (!res.ranks[i]) continue;
    const double r = *res.ranks[i];
    const auto d = t.difference_ticks(i);
    if (d > 0) {
      res.r_plus += r;
    } else if (d < 0) {
      res.r_minus += r;
    } else {
      res.r_plus += r / 2.0;
      res.r_minus += r / 2.0;
    }
  }
  res.t_statistic = std::min(res.r_plus, res.r_minus);
  res.critical_value = critical_value;
  res.reject_null = critical_value && res.t_statistic <= *critical_value;
  return res;
}

// Uses the embedded alpha = 0.05 table for the number of ranked rows; outside
// the table no critical value is available and the null is never rejected.
inline WilcoxonResult wilcoxon_signed_rank(const ComparisonTable& t, ZeroPolicy policy = ZeroPolicy::split_all) {
  auto res = wilcoxon_signed_rank(t, std::nullopt, policy);
  if (const auto cv = try_critical_values(res.n)) {
    res.critical_value = cv->wilcoxon_t;
    res.reject_null = res.critical_value && res.t_statistic <= *res.critical_value;
  }
  return res;
}

struct SignTestResult {
  std::size_t wins_a = 0;  // rows where a has the lower error
  std::size_t wins_b = 0;
  std::size_t ties = 0;
  std::size_t adjusted_wins_a = 0;  // wins plus half of the (even-ized) ties
  std::size_t adjusted_wins_b = 0;
  std::optional<int> critical_wins;
  bool reject_null = false;
};

// Ties are split evenly after dropping one when their count is odd.
inline SignTestResult sign_test(const ComparisonTable& t, std::optional<int> critical_wins) {
  if (t.empty()) throw std::invalid_argument("sign_test: empty table");
  SignTestResult res;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const auto d = t.difference_ticks(i);
    if (d > 0) {
      ++res.wins_b;
    } else if (d < 0) {
      ++res.wins_a;
    } else {
      ++res.ties;
    }
  }
  const std::size_t shared = res.ties / 2;
  res.adjusted_wins_a = res.wins_a + shared;
  res.adjusted_wins_b = res.wins_b + shared;
  res.critical_wins = critical_wins;
  if (critical_wins) {
    const auto best = static_cast<long long>(std::max(res.adjusted_wins_a, res.adjusted_wins_b));
    res.reject_null = best >= *critical_wins;
  }
  return res;
}

inline SignTestResult sign_test(const ComparisonTable& t) {
  const auto cv = try_critical_values(t.size());
  return sign_test(t, cv ? cv->sign_wins : std::nullopt);
}

namespace detail {

inline std::string format_number(double v) {
  if (v == std::floor(v) && std::abs(v) < 1e15) return fmt::format("{}", static_cast<long long>(v));
  return fmt::format("{}", v);
}

}  // namespace detail

// Table layout: one row per dataset ordered by decreasing rank, with the two
// error columns, difference and rank, followed by the wins/ties footer and the
// test decisions.
inline std::string format_report(const ComparisonTable& t, const WilcoxonResult* w, const SignTestResult* s) {
  std::size_t name_width = 7;
  for (const auto& r : t.rows()) name_width = std::max(name_width, r.dataset.size());
  const auto col_a = std::max<std::size_t>(8, t.name_a().size());
  const auto col_b = std::max<std::size_t>(8, t.name_b().size());

  std::vector<std::optional<double>> ranks =
      w ? w->ranks : signed_rank_ranks(t, std::vector<bool>(t.size(), true));
  std::vector<std::size_t> order(t.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return ranks[a].value_or(-1.0) > ranks[b].value_or(-1.0);
  });

  std::string out;
  out += fmt::format("{:<{}}  {:>{}}  {:>{}} | {:>10}  {:>6}\n", "dataset", name_width, t.name_a(), col_a, t.name_b(),
                     col_b, "difference", "rank");
  out += std::string(name_width + col_a + col_b + 25, '-') + "\n";
  for (auto i : order) {
    const auto& r = t.rows()[i];
    const auto rank = ranks[i] ? fmt::format("{:.1f}", *ranks[i]) : std::string("-");
    const double diff = static_cast<double>(t.difference_ticks(i)) * difference_resolution;
    out += fmt::format("{:<{}}  {:>{}.2f}  {:>{}.2f} | {:>10.2f}  {:>6}\n", r.dataset, name_width, r.error_a, col_a,
                       r.error_b, col_b, diff == 0.0 ? 0.0 : diff, rank);
  }
  out += std::string(name_width + col_a + col_b + 25, '-') + "\n";

  SignTestResult counts = s ? *s : sign_test(t, std::nullopt);
  out += fmt::format("{:<{}}  {:>{}}  {:>{}}\n", "wins", name_width, counts.wins_a, col_a, counts.wins_b, col_b);
  out += fmt::format("{:<{}}  {:>{}}  {:>{}}\n", "ties", name_width, counts.ties, col_a, counts.ties, col_b);
  out += fmt::format("n = {}\n", t.size());

  if (w) {
    out += fmt::format("Wilcoxon signed-rank: R+ = {}, R- = {}, T = {}", detail::format_number(w->r_plus),
                       detail::format_number(w->r_minus), detail::format_number(w->t_statistic));
    if (w->dropped_row) out += fmt::format(" (ignored zero row: {})", t.rows()[*w->dropped_row].dataset);
    out += "\n";
    if (w->critical_value) {
      out += fmt::format("T = {}, {} at α=0.05 (critical value {})\n", detail::format_number(w->t_statistic),
                         w->reject_null ? "reject" : "fail to reject", detail::format_number(*w->critical_value));
    } else {
      out += fmt::format("T = {}, no critical value for n = {}; fail to reject\n",
                         detail::format_number(w->t_statistic), w->n);
    }
  }
  if (s) {
    const auto& leader = s->adjusted_wins_b >= s->adjusted_wins_a ? t.name_b() : t.name_a();
    const auto best = std::max(s->adjusted_wins_a, s->adjusted_wins_b);
    out += fmt::format("Sign test: {} wins {}, {} wins {}, ties {}; adjusted wins {} = {}, {} = {}\n", t.name_a(),
                       s->wins_a, t.name_b(), s->wins_b, s->ties, t.name_a(), s->adjusted_wins_a, t.name_b(),
                       s->adjusted_wins_b);
    if (s->critical_wins) {
      out += fmt::format("{} better on {} of {}, {} at α=0.05 (critical wins {})\n", leader, best, t.size(),
                         s->reject_null ? "reject" : "fail to reject", *s->critical_wins);
    } else {
      out += fmt::format("{} better on {} of {}, no critical value for n = {}; fail to reject\n", leader, best,
                         t.size(), t.size());
    }
  }
  return out;
}

}  // namespace nre::stats
