// SPDX-License-Identifier: Apache-2.0
#include <numeric>
#include <set>

#include <gtest/gtest.h>

#include "slicetopo/classifier.hpp"

namespace slicetopo {
namespace {

struct Toy {
  FeatureMatrix x;
  std::vector<int> y;
};

// Gaussian clusters around well-separated centers; the last `zero_tail` columns stay zero.
Toy clusters(int classes, int per_class, int dim, double spread, std::uint64_t seed, int zero_tail = 0) {
  rng::Engine e(seed);
  std::vector<Eigen::VectorXd> centers;
  for (int c = 0; c < classes; ++c) {
    Eigen::VectorXd m = Eigen::VectorXd::Zero(dim);
    for (int j = 0; j < dim - zero_tail; ++j) m(j) = rng::uniform(e, -3.0, 3.0);
    centers.push_back(m);
  }
  Toy t;
  t.x.resize(classes * per_class, dim);
  int row = 0;
  for (int c = 0; c < classes; ++c)
    for (int i = 0; i < per_class; ++i, ++row) {
      for (int j = 0; j < dim; ++j) t.x(row, j) = j < dim - zero_tail ? centers[c](j) + spread * rng::normal(e) : 0.0;
      t.y.push_back(c);
    }
  return t;
}

std::vector<std::string> names(int n) {
  std::vector<std::string> out;
  for (int i = 0; i < n; ++i) out.push_back("c" + std::to_string(i));
  return out;
}

std::span<const double> row(const FeatureMatrix& x, Eigen::Index i) {
  return {x.data() + i * x.cols(), static_cast<std::size_t>(x.cols())};
}

TEST(Rng, BelowAndShuffle) {
  rng::Engine e(1);
  std::vector<int> counts(7, 0);
  for (int i = 0; i < 7000; ++i) ++counts[rng::below(e, 7)];
  for (int c : counts) EXPECT_NEAR(c, 1000, 150);
  std::vector<int> v(20);
  std::iota(v.begin(), v.end(), 0);
  rng::shuffle(v.begin(), v.end(), e);
  EXPECT_EQ(std::set<int>(v.begin(), v.end()).size(), 20u);
  for (int i = 0; i < 1000; ++i) {
    const double u = rng::unit(e);
    EXPECT_GE(u, 0.0);
    EXPECT_LT(u, 1.0);
  }
}

TEST(Rng, FixedSequence) {
  rng::Engine a(99), b(99);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(rng::below(a, 1000003), rng::below(b, 1000003));
}

TEST(SoftmaxRegression, ProbabilitiesSumToOne) {
  const Toy t = clusters(3, 20, 8, 0.5, 2);
  const auto m = SoftmaxRegression::train(t.x, t.y, names(3));
  for (Eigen::Index i = 0; i < t.x.rows(); ++i) {
    const auto p = m.predict(row(t.x, i));
    ASSERT_EQ(p.size(), 3u);
    EXPECT_NEAR(std::accumulate(p.begin(), p.end(), 0.0), 1.0, 1e-9);
    for (double v : p) EXPECT_GE(v, 0.0);
  }
  const auto zero = m.predict(std::vector<double>(8, 0.0));
  EXPECT_NEAR(std::accumulate(zero.begin(), zero.end(), 0.0), 1.0, 1e-9);
}

TEST(SoftmaxRegression, SeparableTwoClass) {
  const Toy t = clusters(2, 15, 5, 0.1, 3);
  const auto m = SoftmaxRegression::train(t.x, t.y, names(2));
  for (Eigen::Index i = 0; i < t.x.rows(); ++i) EXPECT_EQ(static_cast<int>(m.argmax(row(t.x, i))), t.y[i]);
}

TEST(SoftmaxRegression, PadsShortAndRejectsLong) {
  const Toy t = clusters(2, 5, 6, 0.1, 4);
  const auto m = SoftmaxRegression::train(t.x, t.y, names(2));
  const std::vector<double> full{1, 2, 3, 0, 0, 0};
  const std::vector<double> short_x{1, 2, 3};
  EXPECT_EQ(m.predict(full), m.predict(short_x));
  try {
    m.predict(std::vector<double>(7, 0.0));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDimensionMismatch);
  }
}

TEST(SoftmaxRegression, ZeroTailCarriesNoWeight) {
  const Toy t = clusters(3, 10, 12, 0.3, 5, 4);
  const auto m = SoftmaxRegression::train(t.x, t.y, names(3));
  EXPECT_EQ(m.active_dim(), 8u);
  EXPECT_EQ(m.input_dim(), 12u);
  std::vector<double> a(12, 0.0), b(12, 0.0);
  a[0] = b[0] = 1.0;
  b[11] = 5.0;
  EXPECT_EQ(m.predict(a), m.predict(b));
}

TEST(SoftmaxRegression, DeterministicAndRoundTrips) {
  const Toy t = clusters(4, 12, 10, 0.8, 6);
  BinaryWriter w1, w2;
  write_classifier(SoftmaxRegression::train(t.x, t.y, names(4)), w1);
  write_classifier(SoftmaxRegression::train(t.x, t.y, names(4)), w2);
  EXPECT_EQ(w1.data(), w2.data());

  BinaryReader r(w1.data());
  const auto back = read_classifier(r);
  EXPECT_TRUE(r.done());
  BinaryWriter w3;
  write_classifier(*back, w3);
  EXPECT_EQ(w3.data(), w1.data());
  EXPECT_EQ(back->class_labels(), names(4));

  BinaryReader bad(std::string_view(w1.data()).substr(0, w1.data().size() - 3));
  EXPECT_THROW(read_classifier(bad), Error);
}

TEST(SoftmaxRegression, LabelPermutationPermutesOutputs) {
  const Toy t = clusters(3, 10, 6, 1.0, 7);
  const std::vector<int> perm{2, 0, 1};
  std::vector<int> y2;
  for (int c : t.y) y2.push_back(perm[static_cast<std::size_t>(c)]);
  const auto a = SoftmaxRegression::train(t.x, t.y, names(3));
  const auto b = SoftmaxRegression::train(t.x, y2, names(3));
  for (Eigen::Index i = 0; i < t.x.rows(); ++i) {
    const auto pa = a.predict(row(t.x, i));
    const auto pb = b.predict(row(t.x, i));
    for (std::size_t c = 0; c < 3; ++c) EXPECT_NEAR(pb[static_cast<std::size_t>(perm[c])], pa[c], 1e-9);
  }
}

TEST(SoftmaxRegression, RejectsBadInput) {
  FeatureMatrix x(2, 3);
  x.setZero();
  EXPECT_THROW(SoftmaxRegression::train(x, {0}, names(2)), Error);
  EXPECT_THROW(SoftmaxRegression::train(x, {0, 5}, names(2)), Error);
}

TEST(StratifiedFolds, BalancedPerClass) {
  std::vector<int> labels;
  for (int c = 0; c < 3; ++c)
    for (int i = 0; i < 11; ++i) labels.push_back(c);
  const auto fold = stratified_folds(labels, 5, 1);
  for (int c = 0; c < 3; ++c) {
    std::vector<int> per(5, 0);
    for (std::size_t i = 0; i < labels.size(); ++i)
      if (labels[i] == c) ++per[static_cast<std::size_t>(fold[i])];
    EXPECT_LE(*std::max_element(per.begin(), per.end()) - *std::min_element(per.begin(), per.end()), 1);
  }
  labels.push_back(3);
  try {
    stratified_folds(labels, 5, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInsufficientData);
  }
}

CrossValReport run_cv(const Toy& t, int classes, std::uint64_t seed) {
  return crossval(t.y, names(classes), 5, seed, [&](const auto& train, const auto& test) {
    FeatureMatrix xtr(static_cast<Eigen::Index>(train.size()), t.x.cols());
    std::vector<int> ytr;
    for (std::size_t i = 0; i < train.size(); ++i) {
      xtr.row(static_cast<Eigen::Index>(i)) = t.x.row(static_cast<Eigen::Index>(train[i]));
      ytr.push_back(t.y[train[i]]);
    }
    const auto m = SoftmaxRegression::train(xtr, ytr, names(classes));
    std::vector<int> out;
    for (std::size_t i : test) out.push_back(static_cast<int>(m.argmax(row(t.x, static_cast<Eigen::Index>(i)))));
    return out;
  });
}

TEST(CrossVal, SeparableIsPerfect) {
  const Toy t = clusters(2, 20, 4, 0.05, 8);
  const CrossValReport r = run_cv(t, 2, 1);
  EXPECT_EQ(r.mean, 1.0);
  EXPECT_EQ(r.std, 0.0);
  EXPECT_EQ(r.fold_accuracy.size(), 5u);
}

TEST(CrossVal, RandomLabelsNearChance) {
  Toy t = clusters(4, 50, 6, 1.0, 9);
  rng::Engine e(10);
  for (auto& y : t.y) y = static_cast<int>(rng::below(e, 4));
  // every class needs at least 5 samples for stratification
  std::vector<int> counts(4, 0);
  for (int y : t.y) ++counts[static_cast<std::size_t>(y)];
  ASSERT_GE(*std::min_element(counts.begin(), counts.end()), 5);
  const CrossValReport r = run_cv(t, 4, 2);
  EXPECT_GE(r.mean, 0.25 - 0.15);
  EXPECT_LE(r.mean, 0.25 + 0.15);
}

TEST(CrossVal, SameSeedSameReport) {
  const Toy t = clusters(3, 15, 5, 1.5, 11);
  EXPECT_EQ(run_cv(t, 3, 4).to_text(), run_cv(t, 3, 4).to_text());
}

}  // namespace
}  // namespace slicetopo
