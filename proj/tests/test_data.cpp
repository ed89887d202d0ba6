#include <gtest/gtest.h>
#include <zlib.h>

#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <set>

#include "support.hpp"

using nre::Dataset;
using nre_test::TempDir;

namespace {

void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

void write_gz(const std::filesystem::path& p, const std::string& text) {
  gzFile f = gzopen(p.string().c_str(), "wb");
  ASSERT_NE(f, nullptr);
  ASSERT_EQ(gzwrite(f, text.data(), static_cast<unsigned>(text.size())), static_cast<int>(text.size()));
  gzclose(f);
}

}  // namespace

TEST(LoadTable, RelabelsPositiveValueInRowOrder) {
  TempDir dir("load");
  write_file(dir / "t.csv", "a,b,label\n1,2,yes\n3,4,no\n5,6,yes\n");
  const auto d = nre::load_table(dir / "t.csv", std::string("label"), std::string("yes"));
  ASSERT_EQ(d.rows(), 3u);
  ASSERT_EQ(d.cols(), 2u);
  EXPECT_EQ(d.labels(), (std::vector<int>{1, -1, 1}));
  EXPECT_EQ(d.feature_names(), (std::vector<std::string>{"a", "b"}));
  EXPECT_DOUBLE_EQ(d.at(1, 1), 4.0);
}

TEST(LoadTable, LabelColumnByIndexKeepsColumnOrder) {
  TempDir dir("load");
  write_file(dir / "t.csv", "y,a,b\n0,1,2\n1,3,4\n");
  const auto d = nre::load_table(dir / "t.csv", std::size_t{0});
  EXPECT_EQ(d.feature_names(), (std::vector<std::string>{"a", "b"}));
  EXPECT_EQ(d.labels(), (std::vector<int>{-1, 1}));
}

TEST(LoadTable, ThreeClassesIsAnError) {
  TempDir dir("load");
  write_file(dir / "t.csv", "a,label\n1,x\n2,y\n3,z\n");
  try {
    nre::load_table(dir / "t.csv", std::string("label"), std::string("x"));
    FAIL() << "expected DataError";
  } catch (const nre::DataError& e) {
    EXPECT_NE(std::string(e.what()).find("more than two classes"), std::string::npos);
  }
}

TEST(LoadTable, ErrorPaths) {
  TempDir dir("load");
  EXPECT_THROW(nre::load_table(dir / "missing.csv", std::string("label")), nre::DataError);
  write_file(dir / "empty.csv", "");
  EXPECT_THROW(nre::load_table(dir / "empty.csv", std::string("label")), nre::DataError);
  write_file(dir / "header.csv", "a,label\n");
  EXPECT_THROW(nre::load_table(dir / "header.csv", std::string("label")), nre::DataError);
  write_file(dir / "text.csv", "a,label\nfoo,1\n2,-1\n");
  EXPECT_THROW(nre::load_table(dir / "text.csv", std::string("label")), nre::DataError);
  write_file(dir / "nan.csv", "a,label\nnan,1\n2,-1\n");
  EXPECT_THROW(nre::load_table(dir / "nan.csv", std::string("label")), nre::DataError);
  write_file(dir / "ragged.csv", "a,b,label\n1,2,1\n3,-1\n");
  EXPECT_THROW(nre::load_table(dir / "ragged.csv", std::string("label")), nre::DataError);
  write_file(dir / "ok.csv", "a,label\n1,1\n2,-1\n");
  EXPECT_THROW(nre::load_table(dir / "ok.csv", std::string("nope")), nre::DataError);
  EXPECT_THROW(nre::load_table(dir / "ok.csv", std::string("label"), std::string("7")), nre::DataError);
}

TEST(LoadTable, SingleClassNeedsExplicitPositiveLabel) {
  TempDir dir("load");
  write_file(dir / "one.csv", "a,label\n1,1\n2,1\n");
  EXPECT_THROW(nre::load_table(dir / "one.csv", std::string("label")), nre::DataError);
  const auto d = nre::load_table(dir / "one.csv", std::string("label"), std::string("1"));
  EXPECT_EQ(d.count_positive(), 2u);
}

TEST(LoadTable, GzipTsvWithTargetColumn) {
  TempDir dir("load");
  write_gz(dir / "bench.tsv.gz", "x\ty\ttarget\n0.5\t1\t0\n-2\t3\t1\n4\t5\t1\n");
  const auto d = nre::load_table(dir / "bench.tsv.gz", std::string("target"));
  ASSERT_EQ(d.rows(), 3u);
  ASSERT_EQ(d.cols(), 2u);
  EXPECT_EQ(d.labels(), (std::vector<int>{-1, 1, 1}));
  EXPECT_DOUBLE_EQ(d.at(1, 0), -2.0);
}

TEST(LoadTable, WriteThenLoadReproducesDataset) {
  TempDir dir("load");
  write_file(dir / "t.csv", "a,b,cls\n0.1,2.5,cat\n-3.25,1e-7,dog\n0.3333333333333333,4,cat\n");
  const auto d = nre::load_table(dir / "t.csv", std::string("cls"), std::string("dog"));
  nre::write_table(d, dir / "back.csv");
  const auto e = nre::load_table(dir / "back.csv", std::string("cls"), std::string("dog"));
  EXPECT_EQ(d.values(), e.values());
  EXPECT_EQ(d.labels(), e.labels());
  EXPECT_EQ(d.feature_names(), e.feature_names());
}

TEST(DatasetInvariants, RejectsBadConstruction) {
  EXPECT_THROW(Dataset({1.0}, 1, {0}), nre::DataError);
  EXPECT_THROW(Dataset({1.0, 2.0}, 1, {1}), nre::DataError);
  EXPECT_THROW(Dataset({}, 1, {}), nre::DataError);
  EXPECT_THROW(Dataset({INFINITY}, 1, {1}), nre::DataError);
  EXPECT_THROW(Dataset({1.0}, 0, {1}), nre::DataError);
}

TEST(Standardize, ColumnOneTwoThree) {
  const Dataset d({1, 2, 3}, 1, {1, -1, 1});
  const auto s = nre::standardize_fit(d);
  EXPECT_DOUBLE_EQ(s.means[0], 2.0);
  EXPECT_NEAR(s.stds[0], std::sqrt(2.0 / 3.0), 1e-15);
}

TEST(Standardize, ConstantColumnClampsToOne) {
  const Dataset d({5, 5, 5}, 1, {1, -1, 1});
  const auto s = nre::standardize_fit(d);
  EXPECT_DOUBLE_EQ(s.means[0], 5.0);
  EXPECT_DOUBLE_EQ(s.stds[0], 1.0);
}

TEST(Standardize, FitApplyGivesZeroMeanUnitStdAndIsIdempotent) {
  std::mt19937_64 rng(11);
  const auto d = nre_test::random_continuous_dataset(rng, 97, 4);
  const auto s = nre::standardize_fit(d);
  const auto z = nre::standardize_apply(d, s);
  const auto s2 = nre::standardize_fit(z);
  for (std::size_t j = 0; j < 4; ++j) {
    EXPECT_NEAR(s2.means[j], 0.0, 1e-9);
    EXPECT_NEAR(s2.stds[j], 1.0, 1e-9);
  }
  const auto zz = nre::standardize_apply(z, s2);
  for (std::size_t i = 0; i < z.values().size(); ++i) EXPECT_NEAR(zz.values()[i], z.values()[i], 1e-12);
  EXPECT_EQ(z.labels(), d.labels());
}

TEST(Standardize, IdentityParamsAreIdentity) {
  std::mt19937_64 rng(3);
  const auto d = nre_test::random_continuous_dataset(rng, 20, 3);
  const auto z = nre::standardize_apply(d, nre::StandardizationParams::identity(3));
  EXPECT_EQ(z.values(), d.values());
}

TEST(Standardize, HeldOutApplyMatchesScalarLoop) {
  std::mt19937_64 rng(5);
  const auto train = nre_test::random_continuous_dataset(rng, 50, 3);
  const auto test = nre_test::random_continuous_dataset(rng, 17, 3);
  const auto s = nre::standardize_fit(train);
  const auto z = nre::standardize_apply(test, s);
  for (std::size_t j = 0; j < 3; ++j) {
    double mean = 0.0;
    for (std::size_t i = 0; i < train.rows(); ++i) mean += train.at(i, j);
    mean /= static_cast<double>(train.rows());
    double var = 0.0;
    for (std::size_t i = 0; i < train.rows(); ++i) var += (train.at(i, j) - mean) * (train.at(i, j) - mean);
    const double sd = std::sqrt(var / static_cast<double>(train.rows()));
    for (std::size_t i = 0; i < test.rows(); ++i) EXPECT_NEAR(z.at(i, j), (test.at(i, j) - mean) / sd, 1e-12);
  }
}

TEST(Standardize, InvertRecoversInputs) {
  std::mt19937_64 rng(8);
  const auto d = nre_test::random_continuous_dataset(rng, 40, 5);
  const auto s = nre::standardize_fit(d);
  const auto back = nre::standardize_invert(nre::standardize_apply(d, s), s);
  for (std::size_t i = 0; i < d.values().size(); ++i) {
    EXPECT_LE(std::abs(back.values()[i] - d.values()[i]), 1e-9 * std::max(1.0, std::abs(d.values()[i])));
  }
}

TEST(Standardize, DimensionMismatchThrows) {
  const Dataset d({1, 2}, 2, {1});
  EXPECT_THROW(nre::standardize_apply(d, nre::StandardizationParams::identity(3)), nre::DataError);
}

TEST(KFold, TenSamplesFiveFoldsOnePairEach) {
  const Dataset d({0, 1, 2, 3, 4, 5, 6, 7, 8, 9}, 1, {1, 1, 1, 1, 1, -1, -1, -1, -1, -1});
  const auto f = nre::stratified_kfold(d, 5, 42);
  for (std::size_t k = 0; k < 5; ++k) {
    const auto test = f.test_indices(k);
    ASSERT_EQ(test.size(), 2u);
    EXPECT_EQ(d.label(test[0]) + d.label(test[1]), 0);
  }
}

TEST(KFold, SeedDeterminism) {
  std::mt19937_64 rng(1);
  const auto d = nre_test::random_continuous_dataset(rng, 73, 2);
  EXPECT_EQ(nre::stratified_kfold(d, 5, 9).fold_index, nre::stratified_kfold(d, 5, 9).fold_index);
}

TEST(KFold, SevenPositiveThreeNegativeTwoFolds) {
  const Dataset d({0, 1, 2, 3, 4, 5, 6, 7, 8, 9}, 1, {1, 1, 1, 1, 1, 1, 1, -1, -1, -1});
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto f = nre::stratified_kfold(d, 2, seed);
    std::multiset<std::pair<int, int>> shape;
    for (std::size_t k = 0; k < 2; ++k) {
      int pos = 0, neg = 0;
      for (auto i : f.test_indices(k)) (d.label(i) == 1 ? pos : neg) += 1;
      shape.insert({pos, neg});
    }
    // Either (4,1)+(3,2) or (4,2)+(3,1): positives split 4/3, negatives 2/1.
    int pos_hi = 0, neg_hi = 0;
    for (const auto& [p, n] : shape) {
      pos_hi = std::max(pos_hi, p);
      neg_hi = std::max(neg_hi, n);
    }
    EXPECT_EQ(pos_hi, 4);
    EXPECT_EQ(neg_hi, 2);
    int pos_total = 0, neg_total = 0;
    for (const auto& [p, n] : shape) {
      pos_total += p;
      neg_total += n;
    }
    EXPECT_EQ(pos_total, 7);
    EXPECT_EQ(neg_total, 3);
  }
}

TEST(KFold, PartitionAndStratificationProperty) {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 10 + rng() % 90;
    const std::size_t k = 2 + rng() % 9;
    const auto d = nre_test::random_grid_dataset(rng, n, 1);
    const auto f = nre::stratified_kfold(d, k, rng());
    std::size_t total = 0;
    std::vector<std::size_t> pos(k), neg(k);
    for (std::size_t i = 0; i < n; ++i) {
      ASSERT_LT(f.fold_index[i], k);
      (d.label(i) == 1 ? pos : neg)[f.fold_index[i]] += 1;
    }
    for (std::size_t j = 0; j < k; ++j) {
      total += f.test_indices(j).size();
      EXPECT_GE(pos[j] + neg[j], 1u);
      EXPECT_EQ(f.test_indices(j).size() + f.train_indices(j).size(), n);
    }
    EXPECT_EQ(total, n);
    EXPECT_LE(*std::max_element(pos.begin(), pos.end()) - *std::min_element(pos.begin(), pos.end()), 1u);
    EXPECT_LE(*std::max_element(neg.begin(), neg.end()) - *std::min_element(neg.begin(), neg.end()), 1u);
  }
}

TEST(KFold, Errors) {
  const Dataset d({0, 1, 2}, 1, {1, -1, 1});
  EXPECT_THROW(nre::stratified_kfold(d, 4, 0), nre::DataError);
  EXPECT_THROW(nre::stratified_kfold(d, 1, 0), nre::DataError);
}

TEST(GenLinear, LabelsFollowTheInclinedLineWithMargin) {
  const auto d = nre::gen_linear_separable(500, 45.0, 0.05, 7);
  ASSERT_EQ(d.cols(), 2u);
  for (std::size_t i = 0; i < d.rows(); ++i) {
    const double s = (d.at(i, 1) - d.at(i, 0)) / std::sqrt(2.0);
    EXPECT_GT(s * d.label(i), 0.0);
    EXPECT_GT(std::abs(s), 0.05);
  }
}

TEST(GenLinear, TwoPointsWithUnitMargin) {
  const auto d = nre::gen_linear_separable(2, 45.0, 1.0, 3);
  ASSERT_EQ(d.rows(), 2u);
  EXPECT_NE(d.label(0), d.label(1));
  for (std::size_t i = 0; i < 2; ++i) {
    EXPECT_GE(std::abs(d.at(i, 1) - d.at(i, 0)) / std::sqrt(2.0), 1.0);
  }
}

TEST(GenLinear, AxisAlignedTreeNeedsManyLeaves) {
  const auto d = nre::gen_linear_separable(2000, 45.0, 0.05, 1);
  const auto t = nre::build_tree(d, 10);
  std::size_t wrong = 0;
  for (std::size_t i = 0; i < d.rows(); ++i) wrong += t.predict(d.row(i)) != d.label(i);
  EXPECT_EQ(wrong, 0u);
  EXPECT_GT(t.leaf_count(), 5u);
}

TEST(GenRotatedXor, AngleZeroNoNoiseIsExactXor) {
  const auto d = nre::gen_rotated_xor(40, 0.0, 0.0, 5);
  for (std::size_t i = 0; i < d.rows(); ++i) {
    EXPECT_EQ(std::abs(d.at(i, 0)), 1.0);
    EXPECT_EQ(std::abs(d.at(i, 1)), 1.0);
    EXPECT_EQ(d.label(i), d.at(i, 0) * d.at(i, 1) > 0 ? 1 : -1);
  }
  EXPECT_EQ(d.count_positive(), 20u);
}

TEST(GenRotatedXor, RotatingBackRecoversAxisXor) {
  for (double angle : {17.0, 45.0, 130.0}) {
    const auto d = nre::gen_rotated_xor(100, angle, 0.0, 2);
    const double t = -nre::degrees_to_radians(angle);
    for (std::size_t i = 0; i < d.rows(); ++i) {
      const double x = std::cos(t) * d.at(i, 0) - std::sin(t) * d.at(i, 1);
      const double y = std::sin(t) * d.at(i, 0) + std::cos(t) * d.at(i, 1);
      EXPECT_NEAR(std::abs(x), 1.0, 1e-12);
      EXPECT_NEAR(std::abs(y), 1.0, 1e-12);
      EXPECT_EQ(d.label(i), x * y > 0 ? 1 : -1);
    }
  }
}

TEST(GenRotatedXor, NoHyperplaneSeparatesNoiselessClasses) {
  const auto d = nre::gen_rotated_xor(200, 33.0, 0.0, 4);
  // Perceptron oracle: on separable data it converges; here it must not.
  double w0 = 0, w1 = 0, b = 0;
  bool converged = false;
  for (int epoch = 0; epoch < 2000 && !converged; ++epoch) {
    converged = true;
    for (std::size_t i = 0; i < d.rows(); ++i) {
      const double s = w0 * d.at(i, 0) + w1 * d.at(i, 1) + b;
      if (s * d.label(i) <= 0) {
        w0 += d.label(i) * d.at(i, 0);
        w1 += d.label(i) * d.at(i, 1);
        b += d.label(i);
        converged = false;
      }
    }
  }
  EXPECT_FALSE(converged);
  // Certificate: both class centroids coincide, so any separating hyperplane
  // would have to put one point on both sides.
  double c[2][2] = {{0, 0}, {0, 0}};
  for (std::size_t i = 0; i < d.rows(); ++i) {
    const int k = d.label(i) == 1 ? 0 : 1;
    c[k][0] += d.at(i, 0) / 100.0;
    c[k][1] += d.at(i, 1) / 100.0;
  }
  EXPECT_NEAR(c[0][0], c[1][0], 1e-12);
  EXPECT_NEAR(c[0][1], c[1][1], 1e-12);
}

TEST(Generators, BitIdenticalForSameSeed) {
  EXPECT_EQ(nre::gen_rotated_xor(300, 45, 0.15, 9).values(), nre::gen_rotated_xor(300, 45, 0.15, 9).values());
  EXPECT_EQ(nre::gen_linear_separable(300, 30, 0.1, 9).values(), nre::gen_linear_separable(300, 30, 0.1, 9).values());
  const auto a = nre::gen_madelon_like(50, 3, 2, 4, 9);
  const auto b = nre::gen_madelon_like(50, 3, 2, 4, 9);
  EXPECT_EQ(a.data.values(), b.data.values());
  EXPECT_EQ(a.data.labels(), b.data.labels());
  EXPECT_NE(nre::gen_rotated_xor(300, 45, 0.15, 9).values(), nre::gen_rotated_xor(300, 45, 0.15, 10).values());
}

TEST(GenMadelon, FiveHundredColumnsAndBalancedLabels) {
  const auto m = nre::gen_madelon_like(260, 5, 15, 480, 1);
  EXPECT_EQ(m.data.cols(), 500u);
  EXPECT_EQ(m.features.size(), 500u);
  EXPECT_EQ(m.data.count_positive(), 130u);
  std::size_t counts[3] = {0, 0, 0};
  for (const auto& f : m.features) counts[static_cast<int>(f.origin)] += 1;
  EXPECT_EQ(counts[0], 5u);
  EXPECT_EQ(counts[1], 15u);
  EXPECT_EQ(counts[2], 480u);
}

TEST(GenMadelon, OneInformativeFeatureIsLinearlySeparable) {
  const auto m = nre::gen_madelon_like(200, 1, 0, 0, 6);
  ASSERT_EQ(m.data.cols(), 1u);
  // Two clusters at +-1 with spread 0.1: the sign of x times a fixed sign
  // gives the label for every sample.
  const int orient = m.data.label(0) * (m.data.at(0, 0) > 0 ? 1 : -1);
  for (std::size_t i = 0; i < m.data.rows(); ++i) {
    EXPECT_EQ(m.data.label(i), orient * (m.data.at(i, 0) > 0 ? 1 : -1));
  }
}

TEST(GenMadelon, RedundantColumnsLieInInformativeSpan) {
  const auto m = nre::gen_madelon_like(300, 5, 15, 10, 12);
  const auto& d = m.data;
  std::vector<std::size_t> inf_cols(5);
  for (std::size_t j = 0; j < d.cols(); ++j) {
    if (m.features[j].origin == nre::FeatureOrigin::informative) inf_cols[m.features[j].source_index] = j;
  }
  for (std::size_t j = 0; j < d.cols(); ++j) {
    if (m.features[j].origin != nre::FeatureOrigin::redundant) continue;
    // Least squares via normal equations and Gaussian elimination.
    double a[5][6] = {};
    for (std::size_t i = 0; i < d.rows(); ++i) {
      for (int r = 0; r < 5; ++r) {
        for (int c = 0; c < 5; ++c) a[r][c] += d.at(i, inf_cols[r]) * d.at(i, inf_cols[c]);
        a[r][5] += d.at(i, inf_cols[r]) * d.at(i, j);
      }
    }
    for (int p = 0; p < 5; ++p) {
      for (int r = p + 1; r < 5; ++r) {
        const double f = a[r][p] / a[p][p];
        for (int c = p; c < 6; ++c) a[r][c] -= f * a[p][c];
      }
    }
    double beta[5];
    for (int r = 4; r >= 0; --r) {
      double s = a[r][5];
      for (int c = r + 1; c < 5; ++c) s -= a[r][c] * beta[c];
      beta[r] = s / a[r][r];
    }
    double ss_res = 0.0, ss_tot = 0.0, mean = 0.0;
    for (std::size_t i = 0; i < d.rows(); ++i) mean += d.at(i, j) / static_cast<double>(d.rows());
    for (std::size_t i = 0; i < d.rows(); ++i) {
      double fit = 0.0;
      for (int r = 0; r < 5; ++r) fit += beta[r] * d.at(i, inf_cols[r]);
      ss_res += (d.at(i, j) - fit) * (d.at(i, j) - fit);
      ss_tot += (d.at(i, j) - mean) * (d.at(i, j) - mean);
    }
    EXPECT_GT(1.0 - ss_res / ss_tot, 0.99);
    const auto& coef = m.redundant_coefficients[m.features[j].source_index];
    for (int r = 0; r < 5; ++r) EXPECT_NEAR(beta[r], coef[r], 1e-9);
  }
}
