// SPDX-License-Identifier: Apache-2.0
#include <cstring>
#include <filesystem>
#include <random>

#include <gtest/gtest.h>

#include "slicetopo/pointcloud.hpp"

namespace slicetopo {
namespace {

DepthScene small_scene(int rows, int cols) {
  DepthScene s;
  s.depth = Grid<double>(rows, cols);
  s.labels = Grid<std::uint32_t>(rows, cols);
  s.intrinsics = {2.0, 4.0, 1.0, 1.0};
  return s;
}

TEST(Backproject, PrincipalPointMapsToOpticalAxis) {
  DepthScene s = small_scene(3, 3);
  s.labels.at(1, 1) = 7;
  s.depth.at(1, 1) = 1.0;
  const PointCloud c = backproject(s, 7);
  ASSERT_EQ(c.size(), 1u);
  EXPECT_EQ(c.points[0], (Point3{0.0, 0.0, 1.0}));
  EXPECT_EQ(c.frame, CloudFrame::kCamera);
}

TEST(Backproject, UnitTangentTimesDepth) {
  DepthScene s = small_scene(3, 5);
  s.intrinsics = {2.0, 2.0, 1.0, 1.0};
  // u = cx + fx = 3, v = cy = 1
  s.labels.at(1, 3) = 1;
  s.depth.at(1, 3) = 2.0;
  const PointCloud c = backproject(s, 1);
  ASSERT_EQ(c.size(), 1u);
  EXPECT_DOUBLE_EQ(c.points[0].x, 2.0);
  EXPECT_DOUBLE_EQ(c.points[0].y, 0.0);
  EXPECT_DOUBLE_EQ(c.points[0].z, 2.0);
}

TEST(Backproject, TwoLabelledPixelsInRowMajorOrder) {
  DepthScene s = small_scene(3, 3);
  s.labels.at(0, 2) = 4;
  s.depth.at(0, 2) = 0.5;
  s.labels.at(2, 0) = 4;
  s.depth.at(2, 0) = 3.0;
  s.labels.at(1, 1) = 5;  // other instance
  s.depth.at(1, 1) = 1.0;
  s.labels.at(2, 2) = 4;  // invalid depth, skipped
  const PointCloud c = backproject(s, 4);
  ASSERT_EQ(c.size(), 2u);
  // (u,v)=(2,0), d=0.5: x=(2-1)*0.5/2, y=(0-1)*0.5/4
  EXPECT_DOUBLE_EQ(c.points[0].x, 0.25);
  EXPECT_DOUBLE_EQ(c.points[0].y, -0.125);
  EXPECT_DOUBLE_EQ(c.points[0].z, 0.5);
  // (u,v)=(0,2), d=3: x=(0-1)*3/2, y=(2-1)*3/4
  EXPECT_DOUBLE_EQ(c.points[1].x, -1.5);
  EXPECT_DOUBLE_EQ(c.points[1].y, 0.75);
  EXPECT_DOUBLE_EQ(c.points[1].z, 3.0);
}

TEST(Backproject, Errors) {
  DepthScene s = small_scene(2, 2);
  s.labels.at(0, 0) = 3;
  EXPECT_THROW(
      {
        try {
          backproject(s, 9);
        } catch (const Error& e) {
          EXPECT_EQ(e.code(), ErrorCode::kUnknownInstance);
          throw;
        }
      },
      Error);
  try {
    backproject(s, 3);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kEmptyCloud);
  }
}

TEST(Backproject, CountAndReprojectionProperties) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> depth(0.3, 4.0);
  std::uniform_int_distribution<int> label(0, 3);
  for (int trial = 0; trial < 20; ++trial) {
    DepthScene s = small_scene(24, 32);
    s.intrinsics = {30.0, 28.0, 15.5, 11.0};
    for (auto& d : s.depth.data) d = (rng() % 5 == 0) ? 0.0 : depth(rng);
    for (auto& l : s.labels.data) l = static_cast<std::uint32_t>(label(rng));
    for (std::uint32_t id : s.instance_ids()) {
      std::size_t expected = 0;
      for (std::size_t k = 0; k < s.labels.data.size(); ++k)
        expected += s.labels.data[k] == id && s.depth.data[k] > 0.0;
      if (expected == 0) continue;
      const PointCloud c = backproject(s, id);
      ASSERT_EQ(c.size(), expected);
      std::size_t k = 0;
      for (int v = 0; v < s.labels.rows; ++v)
        for (int u = 0; u < s.labels.cols; ++u) {
          if (s.labels.at(v, u) != id || s.depth.at(v, u) <= 0.0) continue;
          const Eigen::Vector2d px = project(s.intrinsics, c.points[k++].vec());
          EXPECT_LT(std::abs(px.x() - u), 0.5);
          EXPECT_LT(std::abs(px.y() - v), 0.5);
        }
    }
  }
}

class CloudFileTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = std::filesystem::temp_directory_path() /
           ("slicetopo_pc_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) + "_" +
            ::testing::UnitTest::GetInstance()->current_test_info()->name());
    std::filesystem::create_directories(dir_);
  }
  void TearDown() override { std::filesystem::remove_all(dir_); }
  std::filesystem::path dir_;
};

TEST_F(CloudFileTest, SaveLoadSinglePoint) {
  PointCloud c;
  c.points.push_back({0.1, 0.2, 0.3});
  save_cloud(c, dir_ / "a.xyz");
  EXPECT_EQ(load_cloud(dir_ / "a.xyz"), c);
}

TEST_F(CloudFileTest, RoundTripIsBitExactAndByteStable) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1e3, 1e3);
  PointCloud c;
  for (int i = 0; i < 500; ++i) c.points.push_back({u(rng), u(rng) * 1e-9, u(rng) * 1e7});
  c.points.push_back({-0.0, 5e-324, 1.0 / 3.0});
  save_cloud(c, dir_ / "a.xyz");
  const PointCloud back = load_cloud(dir_ / "a.xyz");
  ASSERT_EQ(back.size(), c.size());
  for (std::size_t i = 0; i < c.size(); ++i) {
    EXPECT_EQ(std::memcmp(&back.points[i], &c.points[i], sizeof(Point3)), 0) << i;
  }
  save_cloud(back, dir_ / "b.xyz");
  EXPECT_EQ(detail::read_file(dir_ / "a.xyz"), detail::read_file(dir_ / "b.xyz"));
}

TEST(CloudParse, CommentsAndErrors) {
  const PointCloud c = parse_cloud("# comment\n0 0 0\n");
  ASSERT_EQ(c.size(), 1u);
  EXPECT_EQ(c.points[0], (Point3{0, 0, 0}));

  try {
    parse_cloud("0 0\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 1u);
  }
  try {
    parse_cloud("1 2 3\n\n1 2 x\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
  EXPECT_THROW(parse_cloud("nan 0 0\n"), ParseError);
  try {
    load_cloud("/nonexistent/dir/cloud.xyz");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kIoError);
  }
}

TEST_F(CloudFileTest, SceneContainerRoundTrip) {
  DepthScene s = small_scene(4, 5);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 3.0);
  for (auto& d : s.depth.data) d = u(rng);
  for (std::size_t k = 0; k < s.labels.data.size(); ++k) s.labels.data[k] = static_cast<std::uint32_t>(k % 3);
  s.intrinsics = {280.0, 281.5, 160.25, 119.75};
  s.camera_pose.rotation = Eigen::AngleAxisd(0.3, Eigen::Vector3d(1, 2, 3).normalized()).toRotationMatrix();
  s.camera_pose.translation = {0.1, -2.0, 1.0 / 7.0};
  save_scene(s, dir_ / "s.scene");
  const DepthScene back = load_scene(dir_ / "s.scene");
  EXPECT_TRUE(back == s);
  save_scene(back, dir_ / "t.scene");
  EXPECT_EQ(detail::read_file(dir_ / "s.scene"), detail::read_file(dir_ / "t.scene"));
}

TEST(SceneParse, RejectsBadInput) {
  EXPECT_THROW(parse_scene("not-a-scene 1\n"), ParseError);
  try {
    parse_scene("slicetopo-depth-scene 9\n");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kVersionMismatch);
  }
  DepthScene s = small_scene(2, 2);
  std::string text = format_scene(s);
  text.replace(text.find("labels\n") + 7, 1, "x");
  EXPECT_THROW(parse_scene(text), ParseError);
}

}  // namespace
}  // namespace slicetopo
