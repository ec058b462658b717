// SPDX-License-Identifier: Apache-2.0
//
// Slabs along z, x-columns within each slab, and the per-column origin /
// termination anchors that feed the filtration.

#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <vector>

#include "slicetopo/error.hpp"
#include "slicetopo/pointcloud.hpp"
#include "slicetopo/view_normalize.hpp"

namespace slicetopo {

struct SliceParams {
  double sigma1 = 0.1;    // slab thickness along z
  double sigma2 = 0.025;  // column width along x
  double eps1 = 0.1 * 1e-4;
  double eps2 = 0.1 * 3e-4;

  /// eps1 = sigma1 * 1e-4, eps2 = sigma1 * 3e-4.
  static SliceParams with_defaults(double sigma1, double sigma2) {
    return {sigma1, sigma2, sigma1 * 1e-4, sigma1 * 3e-4};
  }

  void validate() const {
    if (!(sigma1 > 0.0) || !(sigma2 > 0.0)) throw Error(ErrorCode::kInvalidParams, "sigma1 and sigma2 must be positive");
    if (!(eps1 > 0.0) || !(2.0 * eps1 < eps2) || !(eps2 < sigma1))
      throw Error(ErrorCode::kInvalidParams, "need 0 < 2*eps1 < eps2 < sigma1");
  }
  friend bool operator==(const SliceParams&, const SliceParams&) = default;
};

/// Origin of the slab/column grid. Holding it fixed across observations is what
/// makes per-slice results independent of points elsewhere in the cloud.
struct SliceFrame {
  double x_origin = 0.0;
  double z_origin = 0.0;
  double z_extent = 0.0;

  static SliceFrame of(const PointCloud& cloud) {
    const Aabb box = bounds(cloud.points);
    return {box.min.x(), box.min.z(), box.max.z() - box.min.z()};
  }
  friend bool operator==(const SliceFrame&, const SliceFrame&) = default;
};

/// 𝒮ⁱ with x shifted to the frame origin and z flattened to i·σ₁.
struct Slice {
  int index = 0;
  std::vector<Point3> points;
};

/// Highest slab index a point inside the frame may take; a point exactly on the
/// top face joins the slab below instead of opening a new one.
inline int last_slab_index(const SliceFrame& frame, const SliceParams& params) {
  if (frame.z_extent <= 0.0) return 0;
  const double q = frame.z_extent / params.sigma1;
  const double top = std::ceil(q) - 1.0;
  return std::max(0, static_cast<int>(top));
}

inline int slab_index(double z, const SliceFrame& frame, const SliceParams& params) {
  double dz = z - frame.z_origin;
  if (dz < 0.0) {
    if (dz < -1e-12) throw Error(ErrorCode::kInvalidParams, "point below the slice frame origin");
    dz = 0.0;
  }
  int i = static_cast<int>(std::floor(dz / params.sigma1));
  if (dz <= frame.z_extent) i = std::min(i, last_slab_index(frame, params));
  return i;
}

/// Slices sorted by index; empty slabs are omitted but indices are kept.
inline std::vector<Slice> slice_cloud(const PointCloud& cloud, const SliceParams& params, const SliceFrame& frame) {
  params.validate();
  if (cloud.empty()) throw Error(ErrorCode::kEmptyCloud, "cannot slice an empty cloud");
  std::map<int, std::vector<Point3>> slabs;
  for (const auto& p : cloud.points) {
    const int i = slab_index(p.z, frame, params);
    slabs[i].push_back({p.x - frame.x_origin, p.y, i * params.sigma1});
  }
  std::vector<Slice> out;
  out.reserve(slabs.size());
  for (auto& [i, pts] : slabs) out.push_back({i, std::move(pts)});
  return out;
}

inline std::vector<Slice> slice_cloud(const AlignedCloud& cloud, const SliceParams& params) {
  return slice_cloud(cloud.points, params, SliceFrame::of(cloud.points));
}

/// A slice after x-quantization, with one origin (min y) and one termination
/// (max y) per occupied column.
struct ColumnizedSlice {
  Slice slice;                        // x snapped to (j+1)·σ₂
  std::vector<Point3> origins;        // z = i·σ₁ + ε₁
  std::vector<Point3> terminations;   // z = i·σ₁ + ε₂
  std::vector<int> occupied_columns;  // sorted j
  std::vector<std::size_t> point_column;  // slice point -> position in occupied_columns

  std::size_t column_count() const { return occupied_columns.size(); }
};

inline int column_index(double x, const SliceParams& params) {
  if (x < 0.0) {
    if (x < -1e-12) throw Error(ErrorCode::kInvalidParams, "point left of the slice frame origin");
    x = 0.0;
  }
  return static_cast<int>(std::floor(x / params.sigma2));
}

inline ColumnizedSlice columnize(const Slice& slice, const SliceParams& params) {
  params.validate();
  if (slice.points.empty()) throw Error(ErrorCode::kEmptySlice, "slice " + std::to_string(slice.index) + " is empty");

  std::vector<int> js(slice.points.size());
  for (std::size_t k = 0; k < slice.points.size(); ++k) js[k] = column_index(slice.points[k].x, params);

  ColumnizedSlice cs;
  cs.occupied_columns = js;
  std::sort(cs.occupied_columns.begin(), cs.occupied_columns.end());
  cs.occupied_columns.erase(std::unique(cs.occupied_columns.begin(), cs.occupied_columns.end()),
                            cs.occupied_columns.end());

  const std::size_t n_cols = cs.occupied_columns.size();
  std::vector<double> y_min(n_cols, 0.0), y_max(n_cols, 0.0);
  std::vector<bool> seen(n_cols, false);
  cs.slice.index = slice.index;
  cs.slice.points.reserve(slice.points.size());
  cs.point_column.reserve(slice.points.size());
  for (std::size_t k = 0; k < slice.points.size(); ++k) {
    const auto it = std::lower_bound(cs.occupied_columns.begin(), cs.occupied_columns.end(), js[k]);
    const auto c = static_cast<std::size_t>(it - cs.occupied_columns.begin());
    const double y = slice.points[k].y;
    if (!seen[c]) {
      y_min[c] = y_max[c] = y;
      seen[c] = true;
    } else {
      y_min[c] = std::min(y_min[c], y);
      y_max[c] = std::max(y_max[c], y);
    }
    cs.slice.points.push_back({(js[k] + 1) * params.sigma2, y, slice.points[k].z});
    cs.point_column.push_back(c);
  }

  const double z0 = slice.index * params.sigma1;
  for (std::size_t c = 0; c < n_cols; ++c) {
    const double x = (cs.occupied_columns[c] + 1) * params.sigma2;
    cs.origins.push_back({x, y_min[c], z0 + params.eps1});
    cs.terminations.push_back({x, y_max[c], z0 + params.eps2});
  }
  return cs;
}

}  // namespace slicetopo
