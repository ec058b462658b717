// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "slicetopo/view_normalize.hpp"
#include "test_support.hpp"

namespace slicetopo {
namespace {

using testing_support::box_corners;
using testing_support::gaussian_blob;
using testing_support::random_rotation;
using testing_support::transformed;

bool is_signed_permutation(const Eigen::Matrix3d& m, double tol) {
  for (int r = 0; r < 3; ++r) {
    int ones = 0;
    for (int c = 0; c < 3; ++c) {
      const double a = std::abs(m(r, c));
      if (std::abs(a - 1.0) <= tol) ++ones;
      else if (a > tol) return false;
    }
    if (ones != 1) return false;
  }
  return true;
}

TEST(ComputeObb, CubeCornersGiveIdentityPermutation) {
  const ObbFrame obb = compute_obb(box_corners(1, 1, 1));
  EXPECT_TRUE(is_signed_permutation(obb.rotation, 1e-9));
  EXPECT_NEAR(obb.extents(0), 1.0, 1e-12);
  EXPECT_NEAR(obb.extents(1), 1.0, 1e-12);
  EXPECT_NEAR(obb.extents(2), 1.0, 1e-12);
  EXPECT_NEAR(obb.rotation.determinant(), 1.0, 1e-9);
}

TEST(ComputeObb, RecoversRotatedBox) {
  const Eigen::Matrix3d r = Eigen::AngleAxisd(std::numbers::pi / 6.0, Eigen::Vector3d::UnitZ()).toRotationMatrix();
  const PointCloud cloud = transformed(box_corners(2.0, 1.0, 0.5), r, {0.3, -1.0, 2.0});
  const ObbFrame obb = compute_obb(cloud);
  EXPECT_NEAR(obb.extents(0), 2.0, 1e-6);
  EXPECT_NEAR(obb.extents(1), 1.0, 1e-6);
  EXPECT_NEAR(obb.extents(2), 0.5, 1e-6);
  for (int k = 0; k < 3; ++k) {
    const double dot = std::abs(obb.rotation.col(k).dot(r.col(k)));
    EXPECT_NEAR(dot, 1.0, 1e-6) << "axis " << k;
  }
  const Eigen::Vector3d center = r * Eigen::Vector3d(1.0, 0.5, 0.25) + Eigen::Vector3d(0.3, -1.0, 2.0);
  EXPECT_LT((obb.center.vec() - center).norm(), 1e-9);
}

TEST(ComputeObb, CollinearIsDegenerate) {
  PointCloud c;
  c.points = {{0, 0, 0}, {1, 1, 1}, {2, 2, 2}};
  try {
    compute_obb(c);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDegenerateCloud);
  }
  PointCloud two;
  two.points = {{0, 0, 0}, {1, 0, 0}};
  EXPECT_THROW(compute_obb(two), Error);
}

TEST(ComputeObb, PlanarCloudIsAllowed) {
  PointCloud c;
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 3; ++j) c.points.push_back({i * 0.2, j * 0.1, 0.0});
  const ObbFrame obb = compute_obb(c);
  EXPECT_NEAR(obb.extents(0), 0.8, 1e-12);
  EXPECT_NEAR(obb.extents(1), 0.2, 1e-12);
  EXPECT_NEAR(obb.extents(2), 0.0, 1e-12);
  EXPECT_NEAR(obb.rotation.determinant(), 1.0, 1e-9);
}

TEST(ComputeObb, FrameInvariantsOnRandomClouds) {
  std::mt19937_64 rng(42);
  for (int trial = 0; trial < 50; ++trial) {
    const PointCloud c = gaussian_blob(rng, 200, {1.0, 0.6, 0.2});
    const ObbFrame obb = compute_obb(transformed(c, random_rotation(rng), {1, 2, 3}));
    EXPECT_NEAR(obb.rotation.determinant(), 1.0, 1e-9);
    EXPECT_LT((obb.rotation.transpose() * obb.rotation - Eigen::Matrix3d::Identity()).norm(), 1e-9);
    EXPECT_GE(obb.extents(0), obb.extents(1));
    EXPECT_GE(obb.extents(1), obb.extents(2));
    EXPECT_GE(obb.extents(2), 0.0);
  }
}

TEST(Normalize, UnitCubeLandsInUnitBox) {
  std::mt19937_64 rng(1);
  const PointCloud cube = transformed(box_corners(1, 1, 1), random_rotation(rng), {4.0, -3.0, 0.5});
  const AlignedCloud a = normalize(cube, 0.0);
  for (const auto& p : a.points.points) {
    EXPECT_GE(p.x, -1e-6);
    EXPECT_GE(p.y, -1e-6);
    EXPECT_GE(p.z, -1e-6);
    EXPECT_LE(p.x, 1.0 + 1e-6);
    EXPECT_LE(p.y, 1.0 + 1e-6);
    EXPECT_LE(p.z, 1.0 + 1e-6);
  }
  EXPECT_EQ(a.points.frame, CloudFrame::kNormalized);
}

TEST(Normalize, MirrorReflectsXAboutMidPlane) {
  std::mt19937_64 rng(2);
  const PointCloud c = transformed(gaussian_blob(rng, 100, {1.0, 0.5, 0.2}), random_rotation(rng), {0, 0, 1});
  const AlignedCloud plain = normalize(c, 0.0);
  const AlignedCloud mirrored = normalize(c, 0.0, {true, false, false});
  const double e1 = plain.source_obb.extents(0);
  std::vector<double> expect, got;
  for (const auto& p : plain.points.points) expect.push_back(e1 - p.x);
  for (const auto& p : mirrored.points.points) got.push_back(p.x);
  std::sort(expect.begin(), expect.end());
  std::sort(got.begin(), got.end());
  ASSERT_EQ(expect.size(), got.size());
  for (std::size_t i = 0; i < got.size(); ++i) EXPECT_NEAR(got[i], expect[i], 1e-9);
}

TEST(Normalize, UnitCubeAtFortyFiveDegrees) {
  const AlignedCloud a = normalize(box_corners(1, 1, 1), std::numbers::pi / 4.0);
  const Aabb box = bounds(a.points.points);
  EXPECT_NEAR(box.extent().x(), std::sqrt(2.0), 1e-6);
  EXPECT_NEAR(box.extent().y(), 1.0, 1e-6);
  EXPECT_NEAR(box.extent().z(), std::sqrt(2.0), 1e-6);
}

TEST(Normalize, BoxAlignmentIsIdempotent) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 30; ++trial) {
    const PointCloud c = transformed(gaussian_blob(rng, 300, {0.9, 0.4, 0.1}), random_rotation(rng), {1, 1, 1});
    const ObbFrame obb = compute_obb(c);
    const PointCloud boxed = box_align(c, obb, {});
    const ObbFrame again = compute_obb(boxed);
    EXPECT_TRUE(is_signed_permutation(again.rotation, 1e-6));
    EXPECT_NEAR(again.volume(), obb.volume(), 1e-9 * obb.volume());
  }
}

TEST(Normalize, VolumePreservedForEveryMirrorAndAlpha) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
  const PointCloud c = transformed(gaussian_blob(rng, 300, {0.7, 0.5, 0.3}), random_rotation(rng), {0, 2, 0});
  const double v0 = compute_obb(c).volume();
  for (const auto& mask : all_mirror_masks()) {
    const AlignedCloud a = normalize(c, angle(rng), mask);
    EXPECT_NEAR(compute_obb(a.points).volume(), v0, 1e-9 * v0);
  }
}

TEST(Normalize, MirrorTwiceIsIdentity) {
  std::mt19937_64 rng(5);
  const PointCloud c = transformed(gaussian_blob(rng, 150, {0.8, 0.3, 0.2}), random_rotation(rng), {0, 0, 0});
  const ObbFrame obb = compute_obb(c);
  const PointCloud plain = box_align(c, obb, {});
  for (const auto& mask : all_mirror_masks()) {
    NormalizeMap m;
    const PointCloud once = box_align(c, obb, mask, &m);
    NormalizeMap reflect;
    reflect.box_extent = m.box_extent;
    reflect.mirror = mask;
    for (std::size_t i = 0; i < once.size(); ++i) {
      const Eigen::Vector3d twice = reflect.to_box(once.points[i].vec());
      EXPECT_LT((twice - plain.points[i].vec()).norm(), 1e-9);
    }
  }
}

TEST(Normalize, MapReproducesCloud) {
  std::mt19937_64 rng(6);
  const PointCloud c = transformed(gaussian_blob(rng, 50, {0.8, 0.3, 0.2}), random_rotation(rng), {0, 0, 3});
  const AlignedCloud a = normalize(c, 0.7, {false, true, true});
  for (std::size_t i = 0; i < c.size(); ++i)
    EXPECT_LT((a.map.apply(c.points[i].vec()) - a.points.points[i].vec()).norm(), 1e-12);
}

}  // namespace
}  // namespace slicetopo
