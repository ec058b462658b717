// SPDX-License-Identifier: Apache-2.0
//
// Model library: one classifier per (view set, slice count), trained on
// mirror-augmented descriptors of partial training views.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "slicetopo/binary_io.hpp"
#include "slicetopo/classifier.hpp"
#include "slicetopo/datagen.hpp"
#include "slicetopo/descriptor.hpp"

namespace slicetopo {

enum class ViewSet : std::uint8_t { kFront = 0, kSide = 1, kTop = 2 };

inline constexpr std::array<ViewSet, 3> kViewSetPriority{ViewSet::kFront, ViewSet::kSide, ViewSet::kTop};

inline const char* to_string(ViewSet v) {
  switch (v) {
    case ViewSet::kFront: return "front";
    case ViewSet::kSide: return "side";
    case ViewSet::kTop: return "top";
  }
  return "?";
}

/// Index of the box axis whose faces are seen when looking along `view_dir`.
inline int viewed_axis(const Eigen::Vector3d& view_dir, const ObbFrame& obb) {
  int best = 0;
  double best_dot = -1.0;
  for (int k = 0; k < 3; ++k) {
    const double d = std::abs(view_dir.dot(obb.rotation.col(k)));
    if (d > best_dot) {
      best_dot = d;
      best = k;
    }
  }
  return best;
}

/// `view_dir` is the viewing direction (camera toward object) in the frame of
/// `obb`. The seen face is the one most anti-parallel to it; front if it is the
/// largest face, top if the smallest, side otherwise. Equal areas (within 1e-9
/// relative) resolve front > side > top.
inline ViewSet assign_view_set(const Eigen::Vector3d& view_dir, const ObbFrame& obb) {
  const int k = viewed_axis(view_dir, obb);
  const double a = obb.face_area(k);
  const double hi = std::max({obb.face_area(0), obb.face_area(1), obb.face_area(2)});
  const double lo = std::min({obb.face_area(0), obb.face_area(1), obb.face_area(2)});
  if (a >= hi * (1.0 - 1e-9)) return ViewSet::kFront;
  if (a <= lo * (1.0 + 1e-9)) return ViewSet::kTop;
  return ViewSet::kSide;
}

/// Camera-frame cloud: the viewing direction is the direction to its centroid.
inline ViewSet assign_view_set(const PointCloud& camera_cloud, const ObbFrame& obb) {
  return assign_view_set(centroid(camera_cloud.points).normalized(), obb);
}

struct TrainParams {
  SliceParams slice = SliceParams::with_defaults(0.1, 0.025);
  double alpha = kDefaultAlpha;
  int pi_grid = 16;
  double pi_bandwidth = 0.0;  // 0: pers_hi / pi_grid
  PiWeighting pi_weighting = PiWeighting::kLinearPersistence;
  SoftmaxParams softmax;
  double train_scale = 0.0;  // 0: mean centroid distance of the training views
  bool mirror_augmentation = true;
  // Extra samples per view: the cloud cut to each kept fraction of its longest
  // box side (from either end), re-normalized and oriented as at test time.
  // Each one trains only the model matching its slice count.
  std::vector<double> truncation_keep{0.6, 0.7, 0.8};
};

struct ModelLibrary {
  std::vector<std::string> class_labels;
  SliceParams slice_params;
  PiParams pi_params;
  double alpha = kDefaultAlpha;
  int n_max = 0;
  double train_scale = 2.0;  // camera to cloud centroid, meters
  std::map<ViewSet, std::size_t> sample_counts;
  std::map<std::pair<ViewSet, int>, std::shared_ptr<const ProbClassifier>> models;

  std::vector<ViewSet> view_sets() const {
    std::vector<ViewSet> out;
    for (ViewSet v : kViewSetPriority)
      if (models.count({v, 1})) out.push_back(v);
    return out;
  }
  const ProbClassifier& model(ViewSet v, int n) const {
    const auto it = models.find({v, n});
    if (it == models.end())
      throw Error(ErrorCode::kInvalidParams,
                  std::string("no model for ") + to_string(v) + " with " + std::to_string(n) + " slices");
    return *it->second;
  }
  /// Every present view set has models for exactly 1..n_max.
  bool complete() const {
    for (ViewSet v : view_sets())
      for (int n = 1; n <= n_max; ++n)
        if (!models.count({v, n})) return false;
    std::size_t expected = view_sets().size() * static_cast<std::size_t>(n_max);
    return models.size() == expected;
  }
};

/// One augmented training sample: per-slice images of a normalized view.
struct LibrarySample {
  ViewSet set = ViewSet::kFront;
  int label = 0;
  std::vector<PersistenceImage> images;  // slab 0..last, empty slabs are zero images
  int only_k = 0;                         // train only the model with this many slices; 0 = all
};

/// Rows: first `k` slice images of each sample, zero-padded to `n_max` blocks.
inline FeatureMatrix training_matrix(const std::vector<const LibrarySample*>& samples, int k, int n_max, int pi_size) {
  FeatureMatrix x = FeatureMatrix::Zero(static_cast<Eigen::Index>(samples.size()),
                                        static_cast<Eigen::Index>(n_max) * pi_size);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& imgs = samples[i]->images;
    const std::size_t used = std::min<std::size_t>(static_cast<std::size_t>(k), imgs.size());
    for (std::size_t s = 0; s < used; ++s)
      std::copy(imgs[s].values.begin(), imgs[s].values.end(),
                x.row(static_cast<Eigen::Index>(i)).data() + s * static_cast<std::size_t>(pi_size));
  }
  return x;
}

struct PreparedTraining {
  std::vector<std::string> class_labels;
  PiParams pi;
  int n_max = 0;
  double mean_distance = 0.0;  // camera to view centroid
  std::vector<LibrarySample> samples;
};

namespace detail {

struct TruncatedView {
  ViewSet set;
  SliceDiagrams sd;
  int n_occupied;
};

// Cuts the view along the longest box axis to `keep` of its length, dropping
// the `end` side, then repeats the test-time steps on what is left.
inline std::optional<TruncatedView> truncate_view(const PointCloud& cloud, const TrainParams& params, double keep,
                                                  bool drop_far_end) {
  const AlignedCloud full = normalize(cloud, params.alpha);
  const double limit = keep * full.map.box_extent.x();
  PointCloud kept;
  kept.frame = cloud.frame;
  std::vector<Eigen::Vector3d> removed;
  for (const auto& p : cloud.points) {
    const double x = full.map.to_box(p.vec()).x();
    const bool stays = drop_far_end ? x <= limit : x >= full.map.box_extent.x() - limit;
    if (stays)
      kept.points.push_back(p);
    else
      removed.push_back(p.vec());
  }
  if (removed.empty() || kept.points.size() < 16) return std::nullopt;
  try {
    const ObbFrame obb = compute_obb(kept);
    const AlignedCloud aligned = normalize(kept, params.alpha);
    const PointCloud oriented = orient_intact_first(aligned.points, occluded_end_of(aligned, removed));
    SliceDiagrams sd = compute_slice_diagrams(oriented, params.slice, SliceFrame::of(oriented));
    const int n = sd.n_occupied();
    return TruncatedView{assign_view_set(kept, obb), std::move(sd), n};
  } catch (const Error&) {
    return std::nullopt;
  }
}

}  // namespace detail

/// Normalization, slicing, diagrams and images for every view and mirror mask.
inline PreparedTraining prepare_training(const std::vector<TrainingView>& views, const TrainParams& params) {
  params.slice.validate();
  if (views.empty()) throw Error(ErrorCode::kInsufficientData, "no training views");
  PreparedTraining out;
  {
    std::set<std::string> labels;
    for (const auto& v : views) labels.insert(v.label);
    out.class_labels.assign(labels.begin(), labels.end());
  }
  struct Pending {
    ViewSet set;
    int label;
    SliceDiagrams sd;
    int only_k = 0;
  };
  std::vector<Pending> pending;
  double birth_hi = 0.0, pers_hi = 0.0;
  std::vector<MirrorMask> masks{MirrorMask{false, false, false}};
  if (params.mirror_augmentation) {
    const auto all = all_mirror_masks();
    masks.assign(all.begin(), all.end());
  }
  for (std::size_t i = 0; i < views.size(); ++i) {
    const auto& v = views[i];
    const int label = static_cast<int>(
        std::lower_bound(out.class_labels.begin(), out.class_labels.end(), v.label) - out.class_labels.begin());
    ObbFrame obb;
    try {
      obb = compute_obb(v.cloud);
    } catch (const Error& e) {
      throw Error(e.code(), "training view " + std::to_string(i) + " (" + v.label + "): " + e.what());
    }
    const ViewSet set = assign_view_set(v.cloud, obb);
    out.mean_distance += centroid(v.cloud.points).norm() / static_cast<double>(views.size());
    for (const auto& mask : masks) {
      Pending p{set, label, compute_slice_diagrams(normalize(v.cloud, params.alpha, mask), params.slice)};
      for (const auto& pd : p.sd.diagrams)
        for (const auto& pt : pd.points) {
          birth_hi = std::max(birth_hi, pt.birth);
          pers_hi = std::max(pers_hi, pt.persistence());
        }
      out.n_max = std::max(out.n_max, p.sd.n_slices());
      pending.push_back(std::move(p));
    }
    for (double keep : params.truncation_keep)
      for (bool far_end : {false, true}) {
        auto cut = detail::truncate_view(v.cloud, params, keep, far_end);
        if (cut) pending.push_back({cut->set, label, std::move(cut->sd), cut->n_occupied});
      }
  }
  out.pi = PiParams::with_ranges(birth_hi > 0.0 ? birth_hi : 1.0, pers_hi > 0.0 ? pers_hi : 1.0);
  out.pi.rows = out.pi.cols = params.pi_grid;
  out.pi.bandwidth = params.pi_bandwidth > 0.0 ? params.pi_bandwidth : out.pi.pers_hi / params.pi_grid;
  out.pi.weighting = params.pi_weighting;
  out.pi.validate();
  for (auto& p : pending) {
    LibrarySample s{p.set, p.label, {}, std::min(p.only_k, out.n_max)};
    for (const auto& pd : p.sd.diagrams) s.images.push_back(persistence_image(pd, out.pi));
    out.samples.push_back(std::move(s));
  }
  return out;
}

inline ModelLibrary train_library(const PreparedTraining& prep, const TrainParams& params) {
  ModelLibrary lib;
  lib.class_labels = prep.class_labels;
  lib.slice_params = params.slice;
  lib.pi_params = prep.pi;
  lib.alpha = params.alpha;
  lib.n_max = prep.n_max;
  lib.train_scale = params.train_scale > 0.0 ? params.train_scale : prep.mean_distance;
  for (ViewSet v : kViewSetPriority) {
    std::vector<const LibrarySample*> members;
    std::vector<int> y;
    for (const auto& s : prep.samples)
      if (s.set == v && s.only_k == 0) {
        members.push_back(&s);
        y.push_back(s.label);
      }
    if (members.empty()) continue;
    std::vector<int> per_class(prep.class_labels.size(), 0);
    for (int c : y) ++per_class[static_cast<std::size_t>(c)];
    for (std::size_t c = 0; c < per_class.size(); ++c)
      if (per_class[c] == 1)
        throw Error(ErrorCode::kInsufficientData, "class '" + prep.class_labels[c] + "' has a single " +
                                                      to_string(v) + " sample");
    lib.sample_counts[v] = members.size();
    for (int k = 1; k <= prep.n_max; ++k) {
      std::vector<const LibrarySample*> rows = members;
      std::vector<int> yk = y;
      for (const auto& s : prep.samples)
        if (s.set == v && s.only_k == k) {
          rows.push_back(&s);
          yk.push_back(s.label);
        }
      const FeatureMatrix x = training_matrix(rows, k, prep.n_max, prep.pi.size());
      lib.models[{v, k}] =
          std::make_shared<SoftmaxRegression>(SoftmaxRegression::train(x, yk, prep.class_labels, params.softmax));
    }
  }
  return lib;
}

inline ModelLibrary train_library(const std::vector<TrainingView>& views, const TrainParams& params = {}) {
  return train_library(prepare_training(views, params), params);
}

inline constexpr std::string_view kLibraryMagic{"SLICETOPO-LIB\n", 14};
inline constexpr std::uint32_t kLibraryVersion = 1;

/// Little-endian container: magic, version, parameters, labels, then the
/// models ordered by (view set, slice count).
inline std::string serialize_library(const ModelLibrary& lib) {
  BinaryWriter w;
  w.bytes(kLibraryMagic);
  w.u32(kLibraryVersion);
  w.f64(lib.slice_params.sigma1);
  w.f64(lib.slice_params.sigma2);
  w.f64(lib.slice_params.eps1);
  w.f64(lib.slice_params.eps2);
  w.i32(lib.pi_params.rows);
  w.i32(lib.pi_params.cols);
  w.f64(lib.pi_params.birth_lo);
  w.f64(lib.pi_params.birth_hi);
  w.f64(lib.pi_params.pers_lo);
  w.f64(lib.pi_params.pers_hi);
  w.f64(lib.pi_params.bandwidth);
  w.u8(static_cast<std::uint8_t>(lib.pi_params.weighting));
  w.f64(lib.alpha);
  w.i32(lib.n_max);
  w.f64(lib.train_scale);
  w.u64(lib.class_labels.size());
  for (const auto& l : lib.class_labels) w.str(l);
  w.u64(lib.sample_counts.size());
  for (const auto& [v, n] : lib.sample_counts) {
    w.u8(static_cast<std::uint8_t>(v));
    w.u64(n);
  }
  w.u64(lib.models.size());
  for (const auto& [key, m] : lib.models) {
    w.u8(static_cast<std::uint8_t>(key.first));
    w.i32(key.second);
    write_classifier(*m, w);
  }
  return w.data();
}

inline ModelLibrary deserialize_library(std::string_view data) {
  if (data.substr(0, kLibraryMagic.size()) != kLibraryMagic)
    throw Error(ErrorCode::kParseError, "not a model library (bad magic)");
  BinaryReader r(data.substr(kLibraryMagic.size()));
  const std::uint32_t version = r.u32();
  if (version != kLibraryVersion)
    throw Error(ErrorCode::kVersionMismatch,
                "library version " + std::to_string(version) + ", expected " + std::to_string(kLibraryVersion));
  auto view_set = [&](std::uint8_t b) {
    if (b > 2) throw Error(ErrorCode::kParseError, "bad view set tag");
    return static_cast<ViewSet>(b);
  };
  ModelLibrary lib;
  lib.slice_params = {r.f64(), r.f64(), r.f64(), r.f64()};

  lib.pi_params.rows = r.i32();
  lib.pi_params.cols = r.i32();
  lib.pi_params.birth_lo = r.f64();
  lib.pi_params.birth_hi = r.f64();
  lib.pi_params.pers_lo = r.f64();
  lib.pi_params.pers_hi = r.f64();
  lib.pi_params.bandwidth = r.f64();
  const std::uint8_t weighting = r.u8();
  if (weighting > 1) throw Error(ErrorCode::kParseError, "bad weighting tag");
  lib.pi_params.weighting = static_cast<PiWeighting>(weighting);
  lib.alpha = r.f64();
  lib.n_max = r.i32();
  lib.train_scale = r.f64();
  const auto n_labels = r.u64();
  for (std::uint64_t i = 0; i < n_labels; ++i) lib.class_labels.push_back(r.str());
  const auto n_counts = r.u64();
  for (std::uint64_t i = 0; i < n_counts; ++i) {
    const ViewSet v = view_set(r.u8());
    lib.sample_counts[v] = r.u64();
  }
  const auto n_models = r.u64();
  for (std::uint64_t i = 0; i < n_models; ++i) {
    const ViewSet v = view_set(r.u8());
    const int n = r.i32();
    lib.models[{v, n}] = read_classifier(r);
  }
  if (!r.done()) throw Error(ErrorCode::kParseError, "trailing bytes after library");
  try {
    lib.slice_params.validate();
    lib.pi_params.validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::kParseError, std::string("library parameters invalid: ") + e.what());
  }
  if (lib.n_max < 1 || !lib.complete()) throw Error(ErrorCode::kParseError, "library is incomplete");
  return lib;
}

inline void save_library(const ModelLibrary& lib, const std::filesystem::path& path) {
  detail::write_file(path, serialize_library(lib));
}

inline ModelLibrary load_library(const std::filesystem::path& path) {
  return deserialize_library(detail::read_file(path));
}

}  // namespace slicetopo
