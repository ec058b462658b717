// SPDX-License-Identifier: Apache-2.0
//
// Test-time pipeline: occlusion detection, model-set selection, occluded-end
// re-alignment, slice counting, prediction and max-probability fusion.

#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "slicetopo/library.hpp"

namespace slicetopo {

struct Pixel {
  int row = 0;
  int col = 0;
  friend auto operator<=>(const Pixel&, const Pixel&) = default;
};

struct OcclusionReport {
  bool occluded = false;
  std::vector<Pixel> boundary_pixels;  // nearer foreign pixels on the outer boundary
  std::vector<Pixel> contact_pixels;   // object pixels touching them
};

/// An outer-boundary pixel (8-neighbourhood) occludes when it belongs to
/// another instance whose depth is smaller by more than `tau_d`.
inline OcclusionReport detect_occlusion(const DepthScene& scene, std::uint32_t instance_id, double tau_d = 0.01) {
  const auto& lab = scene.labels;
  const auto& dep = scene.depth;
  if (instance_id == 0 || std::find(lab.data.begin(), lab.data.end(), instance_id) == lab.data.end())
    throw Error(ErrorCode::kUnknownInstance, "instance " + std::to_string(instance_id) + " not in scene");
  std::set<Pixel> boundary, contact;
  for (int r = 0; r < lab.rows; ++r)
    for (int c = 0; c < lab.cols; ++c) {
      if (lab.at(r, c) != instance_id) continue;
      const double d = dep.at(r, c);
      for (int dr = -1; dr <= 1; ++dr)
        for (int dc = -1; dc <= 1; ++dc) {
          const int rr = r + dr, cc = c + dc;
          if ((dr == 0 && dc == 0) || rr < 0 || cc < 0 || rr >= lab.rows || cc >= lab.cols) continue;
          const std::uint32_t other = lab.at(rr, cc);
          if (other == 0 || other == instance_id) continue;
          const double od = dep.at(rr, cc);
          if (od > 0.0 && (d <= 0.0 || od < d - tau_d)) {
            boundary.insert({rr, cc});
            contact.insert({r, c});
          }
        }
    }
  OcclusionReport out;
  out.boundary_pixels.assign(boundary.begin(), boundary.end());
  out.contact_pixels.assign(contact.begin(), contact.end());
  out.occluded = !out.boundary_pixels.empty();
  return out;
}

/// Candidate view sets for a viewed face given the other two face areas.
/// Ratios below `tau_ratio` count as ties and admit the neighbouring set.
inline std::vector<ViewSet> select_model_sets(double viewed, double other_a, double other_b, double tau_ratio = 1.15) {
  constexpr double kFloor = 1e-12;
  viewed = std::max(viewed, kFloor);
  const double large = std::max({other_a, other_b, kFloor});
  const double small = std::max(std::min(other_a, other_b), kFloor);
  auto tied = [&](double a, double b) { return std::max(a, b) / std::min(a, b) < tau_ratio; };
  std::vector<ViewSet> out;
  if (viewed >= large || tied(viewed, large)) out.push_back(ViewSet::kFront);
  if ((viewed <= large || tied(viewed, large)) && (viewed >= small || tied(viewed, small)))
    out.push_back(ViewSet::kSide);
  if (viewed <= small || tied(viewed, small)) out.push_back(ViewSet::kTop);
  return out;
}

struct Observation {
  PointCloud cloud;  // camera frame
  std::uint32_t instance_id = 0;
  const DepthScene* scene = nullptr;
  bool occluded = false;
  std::optional<OccludedEnd> occluded_end;  // in the normalized frame; set iff occluded
};

struct RecognizeParams {
  double tau_ratio = 1.15;
  double tau_d = 0.01;
  double scale_tolerance = 0.05;
  bool rescale = false;  // rescale clouds whose camera distance is off the training scale
};

inline Observation make_observation(const DepthScene& scene, std::uint32_t instance_id, double alpha,
                                    const RecognizeParams& params = {}) {
  Observation obs;
  obs.cloud = backproject(scene, instance_id);
  obs.instance_id = instance_id;
  obs.scene = &scene;
  const OcclusionReport occ = detect_occlusion(scene, instance_id, params.tau_d);
  obs.occluded = occ.occluded;
  if (obs.occluded) {
    std::vector<Eigen::Vector3d> contacts;
    for (const auto& px : occ.contact_pixels) {
      const double d = scene.depth.at(px.row, px.col);
      if (d > 0.0) contacts.push_back(unproject(scene.intrinsics, px.col, px.row, d));
    }
    obs.occluded_end = occluded_end_of(normalize(obs.cloud, alpha), contacts);
  }
  return obs;
}

struct ModelQuery {
  ViewSet set = ViewSet::kFront;
  int n_slices = 0;
  std::vector<double> probabilities;
};

struct RecognitionResult {
  std::uint32_t instance_id = 0;
  std::string label;
  std::size_t label_index = 0;
  double probability = 0.0;
  bool occluded = false;
  std::optional<OccludedEnd> occluded_end;
  std::vector<std::pair<ViewSet, int>> models_used;
  int n_slices = 0;      // non-empty slices seen
  bool scale_ok = true;  // centroid distance within tolerance of the training scale
  std::string error;     // set (and label empty) when the instance could not be recognized
};

/// Single highest probability across queries; ties go to view-set priority
/// front > side > top, then fewer slices.
inline std::pair<std::size_t, std::size_t> fuse(const std::vector<ModelQuery>& queries) {
  if (queries.empty()) throw Error(ErrorCode::kInvalidParams, "nothing to fuse");
  std::size_t best_q = 0, best_c = 0;
  double best = -1.0;
  auto rank = [](const ModelQuery& q) { return std::pair(static_cast<int>(q.set), q.n_slices); };
  for (std::size_t q = 0; q < queries.size(); ++q)
    for (std::size_t c = 0; c < queries[q].probabilities.size(); ++c) {
      const double p = queries[q].probabilities[c];
      if (p > best || (p == best && rank(queries[q]) < rank(queries[best_q]))) {
        best = p;
        best_q = q;
        best_c = c;
      }
    }
  return {best_q, best_c};
}

inline RecognitionResult recognize(const Observation& obs, const ModelLibrary& lib, const RecognizeParams& params = {}) {
  RecognitionResult res;
  res.instance_id = obs.instance_id;
  res.occluded = obs.occluded;
  res.occluded_end = obs.occluded_end;

  PointCloud cloud = obs.cloud;
  const double distance = centroid(cloud.points).norm();
  res.scale_ok = std::abs(distance / lib.train_scale - 1.0) <= params.scale_tolerance;
  if (!res.scale_ok && params.rescale) {
    const double s = lib.train_scale / distance;
    for (auto& p : cloud.points) p = Point3::from(s * p.vec());
  }

  const AlignedCloud aligned = normalize(cloud, lib.alpha);
  const PointCloud oriented = obs.occluded ? orient_intact_first(aligned.points, *obs.occluded_end) : aligned.points;
  const SliceDiagrams sd = compute_slice_diagrams(oriented, lib.slice_params, SliceFrame::of(oriented));
  res.n_slices = sd.n_occupied();
  const int k = std::min(obs.occluded ? res.n_slices : lib.n_max, lib.n_max);
  const ObjectDescriptor desc = describe_prefix(sd, k, lib.n_max, lib.pi_params);

  const ObbFrame& obb = aligned.source_obb;
  const int axis = viewed_axis(centroid(cloud.points).normalized(), obb);
  const std::vector<ViewSet> wanted = select_model_sets(obb.face_area(axis), obb.face_area((axis + 1) % 3),
                                                        obb.face_area((axis + 2) % 3), params.tau_ratio);
  const std::vector<ViewSet> present = lib.view_sets();
  std::vector<ViewSet> sets;
  for (ViewSet v : wanted)
    if (std::find(present.begin(), present.end(), v) != present.end()) sets.push_back(v);
  if (sets.empty()) sets = present;

  std::vector<ModelQuery> queries;
  for (ViewSet v : sets) {
    queries.push_back({v, k, lib.model(v, k).predict(desc)});
    res.models_used.emplace_back(v, k);
  }
  const auto [q, c] = fuse(queries);
  res.label_index = c;
  res.label = lib.class_labels[c];
  res.probability = queries[q].probabilities[c];
  return res;
}

/// One result per instance in the scene, ordered by instance id. Instances
/// too degenerate to normalize (slivers, single rows) get an error record.
inline std::vector<RecognitionResult> recognize_scene(const DepthScene& scene, const ModelLibrary& lib,
                                                      const RecognizeParams& params = {}) {
  std::vector<RecognitionResult> out;
  for (std::uint32_t id : scene.instance_ids()) {
    try {
      const Observation obs = make_observation(scene, id, lib.alpha, params);
      out.push_back(recognize(obs, lib, params));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kDegenerateCloud && e.code() != ErrorCode::kEmptyCloud) throw;
      RecognitionResult r;
      r.instance_id = id;
      r.error = e.what();
      out.push_back(std::move(r));
    }
  }
  return out;
}

}  // namespace slicetopo
