// SPDX-License-Identifier: Apache-2.0
//
// Probabilistic classifiers over object descriptors, and stratified k-fold
// cross-validation.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "slicetopo/binary_io.hpp"
#include "slicetopo/error.hpp"
#include "slicetopo/rng.hpp"
#include "slicetopo/vectorize.hpp"

namespace slicetopo {

using FeatureMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

class ProbClassifier {
 public:
  virtual ~ProbClassifier() = default;

  virtual std::string kind() const = 0;
  virtual const std::vector<std::string>& class_labels() const = 0;
  virtual std::size_t input_dim() const = 0;
  /// `x.size() == input_dim()`.
  virtual std::vector<double> predict_raw(std::span<const double> x) const = 0;
  virtual void write(BinaryWriter& out) const = 0;

  /// Shorter descriptors are zero-padded; longer ones are rejected.
  std::vector<double> predict(std::span<const double> x) const {
    if (x.size() > input_dim())
      throw Error(ErrorCode::kDimensionMismatch,
                  "descriptor length " + std::to_string(x.size()) + " > " + std::to_string(input_dim()));
    if (x.size() == input_dim()) return predict_raw(x);
    std::vector<double> padded(input_dim(), 0.0);
    std::copy(x.begin(), x.end(), padded.begin());
    return predict_raw(padded);
  }
  std::vector<double> predict(const ObjectDescriptor& d) const { return predict(std::span<const double>(d.values)); }

  std::size_t argmax(std::span<const double> x) const {
    const auto p = predict(x);
    return static_cast<std::size_t>(std::max_element(p.begin(), p.end()) - p.begin());
  }
};

struct SoftmaxParams {
  double l2 = 1e-4;
  int iterations = 300;
  int power_iterations = 30;
  friend bool operator==(const SoftmaxParams&, const SoftmaxParams&) = default;
};

namespace detail {

inline void softmax_rows(Eigen::MatrixXd& z) {
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    const double m = z.row(i).maxCoeff();
    z.row(i) = (z.row(i).array() - m).exp().matrix();
    z.row(i) /= z.row(i).sum();
  }
}

}  // namespace detail

/// Multinomial logistic regression with L2 penalty, trained by full-batch
/// accelerated gradient descent (fixed step 1/L, fixed iteration count).
/// Weights exist only for the leading `active_dim` features; trailing
/// features that are zero in every training sample carry zero weight.
class SoftmaxRegression final : public ProbClassifier {
 public:
  static constexpr const char* kKind = "softmax-regression";

  SoftmaxRegression() = default;

  static SoftmaxRegression train(const FeatureMatrix& x, const std::vector<int>& y,
                                 std::vector<std::string> class_labels, const SoftmaxParams& params = {}) {
    const auto n = x.rows();
    const auto classes = static_cast<Eigen::Index>(class_labels.size());
    if (n == 0 || static_cast<std::size_t>(n) != y.size())
      throw Error(ErrorCode::kInsufficientData, "empty or mismatched training set");
    if (classes < 1) throw Error(ErrorCode::kInsufficientData, "no classes");
    for (int c : y)
      if (c < 0 || c >= classes) throw Error(ErrorCode::kInvalidParams, "label index out of range");

    Eigen::Index active = 0;
    for (Eigen::Index j = x.cols(); j-- > 0;)
      if ((x.col(j).array() != 0.0).any()) {
        active = j + 1;
        break;
      }
    const FeatureMatrix xa = x.leftCols(active);

    Eigen::MatrixXd targets = Eigen::MatrixXd::Zero(n, classes);
    for (Eigen::Index i = 0; i < n; ++i) targets(i, y[static_cast<std::size_t>(i)]) = 1.0;

    // Largest eigenvalue of [X 1]^T [X 1] / n by power iteration from a fixed start.
    Eigen::VectorXd v = Eigen::VectorXd::Ones(active + 1);
    double lambda = 1.0;
    for (int it = 0; it < params.power_iterations; ++it) {
      const Eigen::VectorXd xv = xa * v.head(active) + Eigen::VectorXd::Constant(n, v(active));
      Eigen::VectorXd w(active + 1);
      w.head(active) = xa.transpose() * xv;
      w(active) = xv.sum();
      w /= static_cast<double>(n);
      lambda = w.norm() / v.norm();
      if (!(lambda > 0.0)) {
        lambda = 1.0;
        break;
      }
      v = w / w.norm();
    }
    const double lipschitz = 0.5 * lambda * 1.05 + params.l2;
    const double step = 1.0 / lipschitz;

    SoftmaxRegression m;
    m.labels_ = std::move(class_labels);
    m.input_dim_ = static_cast<std::size_t>(x.cols());
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(classes, active);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(classes);
    Eigen::MatrixXd w_prev = w;
    Eigen::VectorXd b_prev = b;
    for (int it = 0; it < params.iterations; ++it) {
      const double mom = static_cast<double>(it) / (it + 3.0);
      const Eigen::MatrixXd wy = w + mom * (w - w_prev);
      const Eigen::VectorXd by = b + mom * (b - b_prev);
      Eigen::MatrixXd z = xa * wy.transpose();
      z.rowwise() += by.transpose();
      detail::softmax_rows(z);
      const Eigen::MatrixXd g = (z - targets) / static_cast<double>(n);
      w_prev = w;
      b_prev = b;
      w = wy - step * (g.transpose() * xa + params.l2 * wy);
      b = by - step * g.colwise().sum().transpose();
    }
    m.weights_ = std::move(w);
    m.bias_ = std::move(b);
    return m;
  }

  std::string kind() const override { return kKind; }
  const std::vector<std::string>& class_labels() const override { return labels_; }
  std::size_t input_dim() const override { return input_dim_; }
  std::size_t active_dim() const { return static_cast<std::size_t>(weights_.cols()); }

  std::vector<double> predict_raw(std::span<const double> x) const override {
    if (x.size() != input_dim_) throw Error(ErrorCode::kDimensionMismatch, "descriptor length mismatch");
    const Eigen::Map<const Eigen::VectorXd> xv(x.data(), weights_.cols());
    Eigen::MatrixXd z = (weights_ * xv + bias_).transpose();
    detail::softmax_rows(z);
    return std::vector<double>(z.data(), z.data() + z.size());
  }

  void write(BinaryWriter& out) const override {
    out.u64(labels_.size());
    for (const auto& l : labels_) out.str(l);
    out.u64(input_dim_);
    out.u64(static_cast<std::uint64_t>(weights_.cols()));
    for (Eigen::Index r = 0; r < weights_.rows(); ++r)
      for (Eigen::Index c = 0; c < weights_.cols(); ++c) out.f64(weights_(r, c));
    for (Eigen::Index r = 0; r < bias_.size(); ++r) out.f64(bias_(r));
  }

  static SoftmaxRegression read(BinaryReader& in) {
    SoftmaxRegression m;
    const auto classes = in.u64();
    if (classes > 1u << 20) throw Error(ErrorCode::kParseError, "implausible class count");
    for (std::uint64_t i = 0; i < classes; ++i) m.labels_.push_back(in.str());
    m.input_dim_ = in.u64();
    const auto active = in.u64();
    if (active > m.input_dim_) throw Error(ErrorCode::kParseError, "active width exceeds input width");
    m.weights_.resize(static_cast<Eigen::Index>(classes), static_cast<Eigen::Index>(active));
    for (Eigen::Index r = 0; r < m.weights_.rows(); ++r)
      for (Eigen::Index c = 0; c < m.weights_.cols(); ++c) m.weights_(r, c) = in.f64();
    m.bias_.resize(static_cast<Eigen::Index>(classes));
    for (Eigen::Index r = 0; r < m.bias_.size(); ++r) m.bias_(r) = in.f64();
    return m;
  }

 private:
  std::vector<std::string> labels_;
  std::size_t input_dim_ = 0;
  Eigen::MatrixXd weights_;
  Eigen::VectorXd bias_;
};

inline void write_classifier(const ProbClassifier& c, BinaryWriter& out) {
  out.str(c.kind());
  c.write(out);
}

inline std::shared_ptr<const ProbClassifier> read_classifier(BinaryReader& in) {
  const std::string kind = in.str();
  if (kind == SoftmaxRegression::kKind) return std::make_shared<SoftmaxRegression>(SoftmaxRegression::read(in));
  throw Error(ErrorCode::kParseError, "unknown classifier kind '" + kind + "'");
}

/// Fold index (0..k-1) of every sample; each class is shuffled and dealt
/// round-robin, continuing where the previous class stopped.
inline std::vector<int> stratified_folds(const std::vector<int>& labels, int k_folds, std::uint64_t seed) {
  if (k_folds < 2) throw Error(ErrorCode::kInvalidParams, "need at least 2 folds");
  const int classes = labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end()) + 1;
  std::vector<std::vector<std::size_t>> members(static_cast<std::size_t>(classes));
  for (std::size_t i = 0; i < labels.size(); ++i) members[static_cast<std::size_t>(labels[i])].push_back(i);
  rng::Engine e(seed);
  std::vector<int> fold(labels.size(), 0);
  int next = 0;
  for (auto& m : members) {
    if (m.empty()) continue;
    if (static_cast<int>(m.size()) < k_folds)
      throw Error(ErrorCode::kInsufficientData, "class with " + std::to_string(m.size()) + " samples < " +
                                                    std::to_string(k_folds) + " folds");
    rng::shuffle(m.begin(), m.end(), e);
    for (std::size_t i : m) {
      fold[i] = next;
      next = (next + 1) % k_folds;
    }
  }
  return fold;
}

struct CrossValReport {
  std::vector<std::string> class_labels;
  std::vector<double> fold_accuracy;      // macro (class-averaged) accuracy per fold
  std::vector<double> per_class_accuracy;  // averaged over folds
  double mean = 0.0;
  double std = 0.0;  // population std over folds

  std::string to_text() const {
    std::string out = "mean " + detail::format_real(100.0 * mean) + " std " + detail::format_real(100.0 * std) + "\n";
    for (std::size_t c = 0; c < class_labels.size(); ++c)
      out += class_labels[c] + " " + detail::format_real(100.0 * per_class_accuracy[c]) + "\n";
    return out;
  }
};

/// Stratified k-fold evaluation under several test conditions sharing one
/// split. `fold_fn(train, test)` returns, per condition, predicted class
/// indices for `test` in order.
template <class FoldFn>
std::vector<CrossValReport> crossval_conditions(const std::vector<int>& labels,
                                                const std::vector<std::string>& class_labels, int k_folds,
                                                std::uint64_t seed, std::size_t conditions, FoldFn&& fold_fn) {
  const std::vector<int> fold = stratified_folds(labels, k_folds, seed);
  const std::size_t classes = class_labels.size();
  std::vector<CrossValReport> reports(conditions);
  std::vector<std::vector<int>> folds_with_class(conditions, std::vector<int>(classes, 0));
  for (auto& r : reports) {
    r.class_labels = class_labels;
    r.per_class_accuracy.assign(classes, 0.0);
  }
  for (int f = 0; f < k_folds; ++f) {
    std::vector<std::size_t> train, test;
    for (std::size_t i = 0; i < labels.size(); ++i) (fold[i] == f ? test : train).push_back(i);
    const std::vector<std::vector<int>> predicted = fold_fn(train, test);
    if (predicted.size() != conditions) throw Error(ErrorCode::kDimensionMismatch, "condition count mismatch");
    for (std::size_t k = 0; k < conditions; ++k) {
      if (predicted[k].size() != test.size()) throw Error(ErrorCode::kDimensionMismatch, "prediction count mismatch");
      std::vector<int> hits(classes, 0), total(classes, 0);
      for (std::size_t t = 0; t < test.size(); ++t) {
        const auto c = static_cast<std::size_t>(labels[test[t]]);
        ++total[c];
        hits[c] += predicted[k][t] == labels[test[t]];
      }
      double macro = 0.0;
      int present = 0;
      for (std::size_t c = 0; c < classes; ++c) {
        if (total[c] == 0) continue;
        const double acc = static_cast<double>(hits[c]) / total[c];
        macro += acc;
        reports[k].per_class_accuracy[c] += acc;
        ++folds_with_class[k][c];
        ++present;
      }
      reports[k].fold_accuracy.push_back(present ? macro / present : 0.0);
    }
  }
  for (std::size_t k = 0; k < conditions; ++k) {
    auto& r = reports[k];
    for (std::size_t c = 0; c < classes; ++c)
      if (folds_with_class[k][c]) r.per_class_accuracy[c] /= folds_with_class[k][c];
    r.mean = std::accumulate(r.fold_accuracy.begin(), r.fold_accuracy.end(), 0.0) / k_folds;
    double var = 0.0;
    for (double a : r.fold_accuracy) var += (a - r.mean) * (a - r.mean);
    r.std = std::sqrt(var / k_folds);
  }
  return reports;
}

/// Stratified k-fold evaluation. `fold_fn(train, test)` returns predicted
/// class indices for `test`, in order.
template <class FoldFn>
CrossValReport crossval(const std::vector<int>& labels, const std::vector<std::string>& class_labels, int k_folds,
                        std::uint64_t seed, FoldFn&& fold_fn) {
  return crossval_conditions(labels, class_labels, k_folds, seed, 1,
                             [&](const std::vector<std::size_t>& train, const std::vector<std::size_t>& test) {
                               return std::vector<std::vector<int>>{fold_fn(train, test)};
                             })
      .front();
}

}  // namespace slicetopo
