// SPDX-License-Identifier: Apache-2.0
//
// View normalization: PCA oriented box, box alignment into the first octant,
// in-place mirroring, and the final rotation about the y-axis.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <utility>
#include <vector>
#include <numbers>

#include <Eigen/Dense>

#include "slicetopo/error.hpp"
#include "slicetopo/pointcloud.hpp"

namespace slicetopo {

/// PCA approximation of the minimal-volume box. Columns of `rotation` are the box
/// axes; `extents` are sorted descending and match the column order.
struct ObbFrame {
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d extents = Eigen::Vector3d::Zero();
  Point3 center;

  double volume() const { return extents.prod(); }
  /// Area of the face perpendicular to box axis k.
  double face_area(int k) const { return extents((k + 1) % 3) * extents((k + 2) % 3); }
};

using MirrorMask = std::array<bool, 3>;

namespace detail {

inline double third_moment(const std::vector<Point3>& pts, const Eigen::Vector3d& mean,
                           const Eigen::Vector3d& axis) {
  double m3 = 0.0;
  for (const auto& p : pts) {
    const double t = axis.dot(p.vec() - mean);
    m3 += t * t * t;
  }
  return m3 / static_cast<double>(pts.size());
}

// Projections of every point onto the columns of `axes`.
inline Aabb projected_bounds(const std::vector<Point3>& pts, const Eigen::Matrix3d& axes) {
  const Eigen::Matrix3d rt = axes.transpose();
  Aabb box{rt * pts.front().vec(), rt * pts.front().vec()};
  for (const auto& p : pts) {
    const Eigen::Vector3d q = rt * p.vec();
    box.min = box.min.cwiseMin(q);
    box.max = box.max.cwiseMax(q);
  }
  return box;
}

// Minimal-area bounding rectangle of the points projected onto the plane spanned
// by (u, w); returns the rotated in-plane basis and the area.
inline std::pair<std::array<Eigen::Vector3d, 2>, double> min_area_rectangle(const std::vector<Point3>& pts,
                                                                            const Eigen::Vector3d& u,
                                                                            const Eigen::Vector3d& w) {
  std::vector<Eigen::Vector2d> q;
  q.reserve(pts.size());
  for (const auto& p : pts) q.emplace_back(u.dot(p.vec()), w.dot(p.vec()));
  std::sort(q.begin(), q.end(), [](const auto& a, const auto& b) { return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y()); });
  auto cross = [](const Eigen::Vector2d& o, const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
    return (a - o).x() * (b - o).y() - (a - o).y() * (b - o).x();
  };
  std::vector<Eigen::Vector2d> hull(2 * q.size());
  std::size_t k = 0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], q[i]) <= 0.0) --k;
    hull[k++] = q[i];
  }
  for (std::size_t i = q.size() - 1, t = k + 1; i-- > 0;) {
    while (k >= t && cross(hull[k - 2], hull[k - 1], q[i]) <= 0.0) --k;
    hull[k++] = q[i];
  }
  hull.resize(k > 1 ? k - 1 : k);

  Eigen::Vector2d best_dir(1.0, 0.0);
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < hull.size(); ++i) {
    Eigen::Vector2d e = hull[(i + 1) % hull.size()] - hull[i];
    if (e.norm() == 0.0) continue;
    e.normalize();
    const Eigen::Vector2d n(-e.y(), e.x());
    double lo_e = std::numeric_limits<double>::infinity(), hi_e = -lo_e, lo_n = lo_e, hi_n = -lo_e;
    for (const auto& h : hull) {
      lo_e = std::min(lo_e, e.dot(h));
      hi_e = std::max(hi_e, e.dot(h));
      lo_n = std::min(lo_n, n.dot(h));
      hi_n = std::max(hi_n, n.dot(h));
    }
    const double area = (hi_e - lo_e) * (hi_n - lo_n);
    if (area < best * (1.0 - 1e-12)) {
      best = area;
      best_dir = e;
    }
  }
  const Eigen::Vector3d a = best_dir.x() * u + best_dir.y() * w;
  const Eigen::Vector3d b = -best_dir.y() * u + best_dir.x() * w;
  return {{a, b}, best};
}

inline Eigen::Matrix3d complete_basis(const Eigen::Vector3d& a) {
  Eigen::Matrix3d m;
  m.col(0) = a.normalized();
  Eigen::Index arg = 0;
  m.col(0).cwiseAbs().minCoeff(&arg);
  m.col(1) = m.col(0).cross(Eigen::Vector3d::Unit(arg)).normalized();
  m.col(2) = m.col(0).cross(m.col(1));
  return m;
}

// Covariance eigenvectors are arbitrary inside a repeated eigenspace (a cube, a
// square prism). There the box is fitted directly: a rotating-rectangle search in
// a tied plane, or candidate axes from point differences when all three tie.
inline void refine_tied_axes(const std::vector<Point3>& pts, const Eigen::Vector3d& values, Eigen::Matrix3d& axes) {
  const double tol = 1e-6 * values(0);
  const bool tie01 = values(0) - values(1) <= tol;
  const bool tie12 = values(1) - values(2) <= tol;
  if (!tie01 && !tie12) return;
  if (tie01 != tie12) {
    const int p0 = tie01 ? 0 : 1;
    const auto plane = min_area_rectangle(pts, axes.col(p0), axes.col(p0 + 1)).first;
    axes.col(p0) = plane[0];
    axes.col(p0 + 1) = plane[1];
    return;
  }
  const std::size_t stride = std::max<std::size_t>(1, pts.size() / 48);
  std::vector<Eigen::Vector3d> candidates{axes.col(0), axes.col(1), axes.col(2)};
  for (std::size_t i = 0; i < pts.size(); i += stride)
    for (std::size_t j = i + stride; j < pts.size(); j += stride) {
      const Eigen::Vector3d d = pts[j].vec() - pts[i].vec();
      if (d.norm() > 0.0) candidates.push_back(d.normalized());
    }
  double best = std::numeric_limits<double>::infinity();
  for (const auto& c : candidates) {
    const Eigen::Matrix3d basis = complete_basis(c);
    const auto [plane, area] = min_area_rectangle(pts, basis.col(1), basis.col(2));
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (const auto& p : pts) {
      lo = std::min(lo, basis.col(0).dot(p.vec()));
      hi = std::max(hi, basis.col(0).dot(p.vec()));
    }
    const double volume = (hi - lo) * area;
    if (volume < best * (1.0 - 1e-9)) {
      best = volume;
      axes.col(0) = basis.col(0);
      axes.col(1) = plane[0];
      axes.col(2) = plane[1];
    }
  }
}

}  // namespace detail

/// Principal axes of the mean-centered covariance. Each axis sign makes the third
/// moment of projections non-negative (ties fall back to a positive largest
/// component), axes are ordered by descending extent (variance breaks ties), and
/// the last axis is negated if needed so that det = +1.
inline ObbFrame compute_obb(const PointCloud& cloud) {
  const auto& pts = cloud.points;
  if (pts.size() < 3) throw Error(ErrorCode::kDegenerateCloud, "need at least 3 points");
  const Eigen::Vector3d mean = centroid(pts);
  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  for (const auto& p : pts) {
    const Eigen::Vector3d d = p.vec() - mean;
    cov += d * d.transpose();
  }
  cov /= static_cast<double>(pts.size());

  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> solver(cov);
  if (solver.info() != Eigen::Success) throw Error(ErrorCode::kDegenerateCloud, "eigen decomposition failed");
  // Eigen sorts ascending.
  const Eigen::Vector3d values = solver.eigenvalues().reverse();
  Eigen::Matrix3d axes = solver.eigenvectors().rowwise().reverse();
  if (!(values(0) > 0.0) || values(1) <= 1e-12 * values(0))
    throw Error(ErrorCode::kDegenerateCloud, "covariance rank < 2");
  detail::refine_tied_axes(pts, values, axes);

  for (int k = 0; k < 3; ++k) {
    Eigen::Vector3d a = axes.col(k);
    const double m3 = detail::third_moment(pts, mean, a);
    bool flip = false;
    if (std::abs(m3) >= 1e-12) {
      flip = m3 < 0.0;
    } else {
      Eigen::Index arg = 0;
      a.cwiseAbs().maxCoeff(&arg);
      flip = a(arg) < 0.0;
    }
    if (flip) axes.col(k) = -a;
  }

  const Aabb pre = detail::projected_bounds(pts, axes);
  const Eigen::Vector3d ext = pre.extent();
  std::array<int, 3> order{0, 1, 2};
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return ext(a) > ext(b); });

  ObbFrame obb;
  for (int k = 0; k < 3; ++k) obb.rotation.col(k) = axes.col(order[static_cast<std::size_t>(k)]);
  if (obb.rotation.determinant() < 0.0) obb.rotation.col(2) = -obb.rotation.col(2);

  const Aabb box = detail::projected_bounds(pts, obb.rotation);
  obb.extents = box.extent();
  obb.center = Point3::from(obb.rotation * (0.5 * (box.min + box.max)));
  return obb;
}

inline Eigen::Matrix3d rotation_about_y(double angle) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  Eigen::Matrix3d r;
  r << c, 0.0, s, 0.0, 1.0, 0.0, -s, 0.0, c;
  return r;
}

/// Map from the source frame into the normalized frame, kept so that extra
/// points (e.g. occlusion contacts) can follow the same path as the cloud.
struct NormalizeMap {
  Eigen::Matrix3d box_rotation = Eigen::Matrix3d::Identity();  // source <- box
  Eigen::Vector3d box_min = Eigen::Vector3d::Zero();
  Eigen::Vector3d box_extent = Eigen::Vector3d::Zero();
  MirrorMask mirror{false, false, false};
  double alpha = 0.0;

  /// Steps 1-3: box-aligned, first-octant, mirrored coordinates.
  Eigen::Vector3d to_box(const Eigen::Vector3d& p) const {
    // Same evaluation as projected_bounds, so the min corner lands exactly on 0.
    const Eigen::Matrix3d rt = box_rotation.transpose();
    const Eigen::Vector3d r = rt * p;
    Eigen::Vector3d q = r - box_min;
    for (int k = 0; k < 3; ++k)
      if (mirror[static_cast<std::size_t>(k)]) q(k) = box_extent(k) - q(k);
    return q;
  }
  Eigen::Vector3d apply(const Eigen::Vector3d& p) const { return rotation_about_y(alpha) * to_box(p); }
};

/// 𝒫̂: a view-normalized cloud together with the map that produced it.
struct AlignedCloud {
  PointCloud points;  // frame == kNormalized
  double alpha = 0.0;
  MirrorMask mirror_mask{false, false, false};
  ObbFrame source_obb;
  NormalizeMap map;
};

/// Steps 1-3 only: rotate into the box frame, translate the min corner to the
/// origin, reflect about the box mid-planes per `mirror`.
inline PointCloud box_align(const PointCloud& cloud, const ObbFrame& obb, const MirrorMask& mirror,
                            NormalizeMap* map_out = nullptr) {
  NormalizeMap m;
  m.box_rotation = obb.rotation;
  const Aabb box = detail::projected_bounds(cloud.points, obb.rotation);
  m.box_min = box.min;
  m.box_extent = box.extent();
  m.mirror = mirror;

  PointCloud out;
  out.frame = CloudFrame::kNormalized;
  out.points.reserve(cloud.size());
  for (const auto& p : cloud.points) out.points.push_back(Point3::from(m.to_box(p.vec())));
  if (map_out) *map_out = m;
  return out;
}

inline PointCloud rotate_about_y(const PointCloud& cloud, double alpha) {
  const Eigen::Matrix3d r = rotation_about_y(alpha);
  PointCloud out;
  out.frame = cloud.frame;
  out.points.reserve(cloud.size());
  for (const auto& p : cloud.points) out.points.push_back(Point3::from(r * p.vec()));
  return out;
}

inline AlignedCloud normalize(const PointCloud& cloud, double alpha, const MirrorMask& mirror_mask = {}) {
  AlignedCloud out;
  out.source_obb = compute_obb(cloud);
  out.alpha = alpha;
  out.mirror_mask = mirror_mask;
  const PointCloud boxed = box_align(cloud, out.source_obb, mirror_mask, &out.map);
  out.map.alpha = alpha;
  out.points = rotate_about_y(boxed, alpha);
  return out;
}

/// All eight mirror masks in a fixed order (bit k of the index mirrors axis k).
inline std::array<MirrorMask, 8> all_mirror_masks() {
  std::array<MirrorMask, 8> masks{};
  for (std::size_t i = 0; i < 8; ++i) masks[i] = {(i & 1u) != 0, (i & 2u) != 0, (i & 4u) != 0};
  return masks;
}

inline constexpr double kDefaultAlpha = std::numbers::pi / 4.0;

}  // namespace slicetopo
