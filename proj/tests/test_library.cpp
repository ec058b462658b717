// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <set>

#include <gtest/gtest.h>

#include "slicetopo/datagen.hpp"
#include "slicetopo/library.hpp"

namespace slicetopo {
namespace {

ObbFrame box_frame(double a, double b, double c) {
  ObbFrame f;
  f.extents = {a, b, c};
  return f;
}

TEST(AssignViewSet, FaceAreas) {
  const ObbFrame f = box_frame(2.0, 1.0, 0.5);
  EXPECT_EQ(assign_view_set(Eigen::Vector3d(0, 0, -1), f), ViewSet::kFront);
  EXPECT_EQ(assign_view_set(Eigen::Vector3d(-1, 0, 0), f), ViewSet::kTop);
  EXPECT_EQ(assign_view_set(Eigen::Vector3d(0, -1, 0), f), ViewSet::kSide);
  const ObbFrame cube = box_frame(1.0, 1.0, 1.0);
  for (int k = 0; k < 3; ++k) EXPECT_EQ(assign_view_set(-Eigen::Vector3d::Unit(k), cube), ViewSet::kFront);
}

std::vector<TrainingView> three_classes(int dirs) {
  std::vector<TrainingView> views;
  for (const auto& [kind, dims, label] :
       std::vector<std::tuple<MeshKind, std::vector<double>, std::string>>{
           {MeshKind::kBox, {0.30, 0.20, 0.12}, "box"},
           {MeshKind::kCylinder, {0.08, 0.40}, "cylinder"},
           {MeshKind::kSphere, {0.15}, "sphere"}}) {
    auto v = gen_training_views(kind, dims, label, dirs, 2.0);
    views.insert(views.end(), v.begin(), v.end());
  }
  return views;
}

TrainParams fast_params() {
  TrainParams p;
  p.softmax.iterations = 120;
  return p;
}

class LibraryTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    views_ = new std::vector<TrainingView>(three_classes(6));
    lib_ = new ModelLibrary(train_library(*views_, fast_params()));
  }
  static void TearDownTestSuite() {
    delete lib_;
    delete views_;
  }
  static std::vector<TrainingView>* views_;
  static ModelLibrary* lib_;
};
std::vector<TrainingView>* LibraryTest::views_ = nullptr;
ModelLibrary* LibraryTest::lib_ = nullptr;

TEST_F(LibraryTest, Structure) {
  const ModelLibrary& lib = *lib_;
  EXPECT_EQ(lib.class_labels, (std::vector<std::string>{"box", "cylinder", "sphere"}));
  EXPECT_GE(lib.n_max, 1);
  EXPECT_TRUE(lib.complete());
  EXPECT_LE(lib.models.size(), 3u * static_cast<std::size_t>(lib.n_max));
  for (const auto& [key, m] : lib.models) {
    EXPECT_EQ(m->class_labels(), lib.class_labels);
    EXPECT_EQ(m->input_dim(), static_cast<std::size_t>(lib.n_max * lib.pi_params.size()));
  }
  for (ViewSet v : lib.view_sets())
    for (int n = 1; n <= lib.n_max; ++n) EXPECT_TRUE(lib.models.count({v, n}));
}

TEST_F(LibraryTest, DeterministicBytes) {
  EXPECT_EQ(serialize_library(train_library(*views_, fast_params())), serialize_library(*lib_));
}

TEST_F(LibraryTest, SerializationRoundTrip) {
  const std::string bytes = serialize_library(*lib_);
  const ModelLibrary back = deserialize_library(bytes);
  EXPECT_EQ(serialize_library(back), bytes);
  EXPECT_EQ(back.n_max, lib_->n_max);
  EXPECT_EQ(back.pi_params, lib_->pi_params);
}

TEST_F(LibraryTest, CorruptedBytesFailCleanly) {
  const std::string bytes = serialize_library(*lib_);
  std::string wrong_version = bytes;
  wrong_version[kLibraryMagic.size()] = 9;
  try {
    deserialize_library(wrong_version);
    FAIL() << "expected VersionMismatch";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kVersionMismatch);
  }
  std::string bad_magic = bytes;
  bad_magic[0] = 'X';
  EXPECT_THROW(deserialize_library(bad_magic), Error);
  EXPECT_THROW(deserialize_library(bytes.substr(0, bytes.size() / 2)), Error);
  EXPECT_THROW(deserialize_library(bytes + "x"), Error);
}

TEST_F(LibraryTest, FitsItsOwnTrainingData) {
  const TrainParams params = fast_params();
  const PreparedTraining prep = prepare_training(*views_, params);
  for (ViewSet v : lib_->view_sets())
    for (int k = 1; k <= lib_->n_max; ++k) {
      std::vector<const LibrarySample*> rows;
      for (const auto& s : prep.samples)
        if (s.set == v && s.only_k == 0) rows.push_back(&s);
      const FeatureMatrix x = training_matrix(rows, k, prep.n_max, prep.pi.size());
      const ProbClassifier& m = lib_->model(v, k);
      int hits = 0;
      for (std::size_t i = 0; i < rows.size(); ++i) {
        const Eigen::VectorXd row = x.row(static_cast<Eigen::Index>(i));
        hits += static_cast<int>(m.argmax(std::span<const double>(row.data(), static_cast<std::size_t>(row.size())))) ==
                rows[i]->label;
      }
      EXPECT_GE(static_cast<double>(hits) / rows.size(), 1.0 / 3.0 + 0.2) << to_string(v) << " k=" << k;
    }
}

TEST_F(LibraryTest, TrainingMatricesArePrefixes) {
  const PreparedTraining prep = prepare_training(*views_, fast_params());
  std::vector<const LibrarySample*> rows;
  for (const auto& s : prep.samples) rows.push_back(&s);
  const auto block = static_cast<Eigen::Index>(prep.pi.size());
  for (int k = 1; k < prep.n_max; ++k) {
    const FeatureMatrix a = training_matrix(rows, k, prep.n_max, prep.pi.size());
    const FeatureMatrix b = training_matrix(rows, k + 1, prep.n_max, prep.pi.size());
    ASSERT_EQ(a.cols(), prep.n_max * block);
    EXPECT_TRUE((a.leftCols(k * block).array() == b.leftCols(k * block).array()).all());
    EXPECT_TRUE((a.rightCols((prep.n_max - k) * block).array() == 0.0).all());
  }
}

TEST_F(LibraryTest, TruncatedSamplesTargetOneModel) {
  const PreparedTraining with = prepare_training(*views_, fast_params());
  TrainParams plain = fast_params();
  plain.truncation_keep.clear();
  const PreparedTraining without = prepare_training(*views_, plain);
  EXPECT_EQ(without.n_max, with.n_max);
  EXPECT_EQ(without.pi, with.pi);
  EXPECT_TRUE(std::all_of(without.samples.begin(), without.samples.end(), [](const auto& s) { return s.only_k == 0; }));
  std::size_t truncated = 0;
  for (const auto& s : with.samples) {
    if (s.only_k == 0) continue;
    ++truncated;
    EXPECT_GE(s.only_k, 1);
    EXPECT_LE(s.only_k, with.n_max);
  }
  EXPECT_GT(truncated, 0u);
  EXPECT_EQ(with.samples.size() - truncated, without.samples.size());
}

TEST(TrainLibrary, MirrorAugmentationMultipliesSamples) {
  const auto views = three_classes(6);
  TrainParams p = fast_params();
  p.truncation_keep.clear();
  EXPECT_EQ(prepare_training(views, p).samples.size(), 8 * views.size());
  p.mirror_augmentation = false;
  EXPECT_EQ(prepare_training(views, p).samples.size(), views.size());
}

TEST(TrainLibrary, ErrorsAreTyped) {
  try {
    train_library(std::vector<TrainingView>{});
    FAIL() << "expected InsufficientData";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInsufficientData);
  }
  std::vector<TrainingView> views = three_classes(6);
  views[2].cloud.points.resize(2);
  try {
    train_library(views, fast_params());
    FAIL() << "expected DegenerateCloud";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDegenerateCloud);
    EXPECT_NE(std::string(e.what()).find("training view 2"), std::string::npos);
  }
}

}  // namespace
}  // namespace slicetopo
