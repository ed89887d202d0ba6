// Paired significance tests over the published per-dataset test errors of
// NRE against gradient boosting, random forests and a neural network.
//
//   demo_compare_classifiers [results.csv]
// With a CSV (dataset,error_a,error_b) only that table is tested.
#include <iostream>

#include "nre/nre.hpp"

namespace st = nre::stats;

namespace {

struct Row {
  const char* dataset;
  double other, nre;
};

const Row gb[] = {{"wilt", 18.60, 10.40},    {"madelon", 14.50, 10.30},  {"adult", 12.91, 14.22},
                  {"phoneme", 9.25, 8.14},   {"dis", 0.71, 1.77},        {"titanic", 27.49, 26.89},
                  {"churn", 3.60, 4.13},     {"banana", 9.31, 8.93},     {"ring", 3.15, 3.51},
                  {"spambase", 4.34, 4.63},  {"kr-vs-kp", 0.42, 0.20},   {"chess", 0.21, 0.42},
                  {"coil2000", 6.04, 5.83},  {"twonorm", 2.34, 2.25},    {"clean2", 0.00, 0.00},
                  {"hypothyroid", 1.47, 1.47}, {"agaricus-lepiota", 0.00, 0.00}, {"magic", 11.67, 11.67},
                  {"mushroom", 0.00, 0.00}};

const Row rf[] = {{"madelon", 26.40, 10.30}, {"wilt", 21.60, 10.40},     {"coil2000", 7.06, 5.83},
                  {"phoneme", 9.00, 8.14},   {"banana", 9.56, 8.93},     {"titanic", 27.49, 26.89},
                  {"spambase", 4.92, 4.63},  {"twonorm", 2.52, 2.25},    {"adult", 14.47, 14.22},
                  {"kr-vs-kp", 0.42, 0.20},  {"magic", 11.88, 11.67},    {"hypothyroid", 1.68, 1.47},
                  {"chess", 0.62, 0.42},     {"ring", 3.33, 3.51},       {"agaricus-lepiota", 0.00, 0.00},
                  {"mushroom", 0.00, 0.00},  {"dis", 1.77, 1.77},        {"clean2", 0.00, 0.00},
                  {"churn", 4.13, 4.13}};

const Row ann[] = {{"madelon", 45.50, 10.30}, {"phoneme", 14.18, 8.14},  {"wilt", 14.20, 10.40},
                   {"churn", 6.27, 4.13},     {"coil2000", 7.46, 5.83},  {"spambase", 3.47, 4.63},
                   {"ring", 2.52, 3.51},      {"magic", 12.44, 11.67},   {"adult", 14.79, 14.22},
                   {"hypothyroid", 1.89, 1.47}, {"kr-vs-kp", 0.62, 0.20}, {"banana", 9.31, 8.93},
                   {"twonorm", 2.43, 2.25},   {"dis", 1.94, 1.77},       {"agaricus-lepiota", 0.00, 0.00},
                   {"mushroom", 0.00, 0.00},  {"clean2", 0.00, 0.00},    {"chess", 0.42, 0.42},
                   {"titanic", 26.89, 26.89}};

template <std::size_t N>
st::ComparisonTable table(const char* other, const Row (&rows)[N]) {
  std::vector<st::ComparisonRow> out;
  for (const auto& r : rows) out.push_back({r.dataset, r.other, r.nre});
  return {other, "NRE", std::move(out)};
}

void report(const st::ComparisonTable& t) {
  const auto w = st::wilcoxon_signed_rank(t);
  const auto s = st::sign_test(t);
  std::cout << st::format_report(t, &w, &s) << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  try {
    if (argc > 1) {
      report(st::read_comparison_csv(argv[1]));
      return 0;
    }
    report(table("GB", gb));
    report(table("RF", rf));
    report(table("ANN", ann));
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
