// SPDX-License-Identifier: Apache-2.0
//
// Cloud -> per-slice filtered diagrams -> stacked descriptor.

#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

#include "slicetopo/slicing.hpp"
#include "slicetopo/topology.hpp"
#include "slicetopo/vectorize.hpp"
#include "slicetopo/view_normalize.hpp"

namespace slicetopo {

/// Filtered diagram per slab index 0..last; slabs without points hold an empty diagram.
struct SliceDiagrams {
  std::vector<PersistenceDiagram> diagrams;
  std::vector<bool> occupied;

  int n_slices() const { return static_cast<int>(diagrams.size()); }
  int n_occupied() const { return static_cast<int>(std::count(occupied.begin(), occupied.end(), true)); }
};

inline SliceDiagrams compute_slice_diagrams(const PointCloud& normalized, const SliceParams& params,
                                            const SliceFrame& frame,
                                            EssentialPolicy policy = EssentialPolicy::kDrop) {
  const auto slices = slice_cloud(normalized, params, frame);
  SliceDiagrams out;
  const int n = slices.back().index + 1;
  out.diagrams.resize(static_cast<std::size_t>(n));
  out.occupied.assign(static_cast<std::size_t>(n), false);
  for (const auto& s : slices) {
    out.diagrams[static_cast<std::size_t>(s.index)] = slice_diagram(s, params, policy);
    out.occupied[static_cast<std::size_t>(s.index)] = true;
  }
  return out;
}

inline SliceDiagrams compute_slice_diagrams(const AlignedCloud& cloud, const SliceParams& params,
                                            EssentialPolicy policy = EssentialPolicy::kDrop) {
  return compute_slice_diagrams(cloud.points, params, SliceFrame::of(cloud.points), policy);
}

/// Images of the first `k` slabs (fewer if the cloud has fewer), padded to `n_slices_padded`.
inline ObjectDescriptor describe_prefix(const SliceDiagrams& sd, int k, int n_slices_padded, const PiParams& params) {
  const int used = std::min(k, sd.n_slices());
  return build_descriptor(std::span<const PersistenceDiagram>(sd.diagrams.data(), static_cast<std::size_t>(used)),
                          n_slices_padded, params);
}

/// Rotation by 180 degrees about the y-axis, used to bring the far end of a
/// cloud to the low-z side.
inline PointCloud flip_about_y(const PointCloud& cloud) {
  PointCloud out = cloud;
  for (auto& p : out.points) {
    p.x = -p.x;
    p.z = -p.z;
  }
  return out;
}

enum class OccludedEnd : std::uint8_t { kLowZ, kHighZ };

inline const char* to_string(OccludedEnd e) { return e == OccludedEnd::kLowZ ? "low_z" : "high_z"; }

/// Side of the normalized cloud (split at the middle of its z-range) holding
/// most of the given camera-frame points.
inline OccludedEnd occluded_end_of(const AlignedCloud& aligned, const std::vector<Eigen::Vector3d>& contacts) {
  const Aabb box = bounds(aligned.points.points);
  const double mid = 0.5 * (box.min.z() + box.max.z());
  std::size_t low = 0, high = 0;
  for (const auto& p : contacts) (aligned.map.apply(p).z() < mid ? low : high) += 1;
  return low > high ? OccludedEnd::kLowZ : OccludedEnd::kHighZ;
}

/// Puts the intact end on the low-z side so it supplies slice 0.
inline PointCloud orient_intact_first(const PointCloud& normalized, OccludedEnd occluded) {
  return occluded == OccludedEnd::kLowZ ? flip_about_y(normalized) : normalized;
}

}  // namespace slicetopo
