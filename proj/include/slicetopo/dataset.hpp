// SPDX-License-Identifier: Apache-2.0
//
// Suite datasets: training views plus test sequences of increasing clutter,
// and their on-disk layout.
//
//   DIR/train/index.txt            "<file> <label> <dx> <dy> <dz>" per view
//   DIR/train/view_NNNN.cloud      camera-frame cloud
//   DIR/sequences/index.txt        "<name> <objects per scene> <scene count>" per sequence
//   DIR/sequences/<name>/scene_NNN.spec   scene spec (ground truth)
//   DIR/sequences/<name>/scene_NNN.scene  rendered depth scene

#pragma once

#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "slicetopo/datagen.hpp"

namespace slicetopo {

struct DatasetParams {
  std::string suite = "mixed";
  std::uint64_t seed = 1;
  int views_per_class = 24;
  double distance = 2.0;  // camera distance for training views and scene centers
  std::vector<int> clutter{2, 5, 8};
  int scenes_per_sequence = 8;
  RenderSettings render;
};

struct Sequence {
  std::string name;
  int objects = 0;
  std::vector<SceneSpec> scenes;
};

struct Dataset {
  std::vector<TrainingView> train;
  std::vector<Sequence> sequences;
};

/// Uniformly random unit vector.
inline Eigen::Vector3d random_direction(rng::Engine& e) {
  for (;;) {
    const Eigen::Vector3d d(rng::normal(e), rng::normal(e), rng::normal(e));
    if (d.norm() > 1e-9) return d.normalized();
  }
}

/// Random views of every class, class by class.
inline std::vector<TrainingView> gen_suite_views(const std::vector<ClassSpec>& classes, int per_class, double distance,
                                                 rng::Engine& e, const RenderSettings& rs = {}) {
  std::vector<TrainingView> out;
  for (const auto& c : classes)
    for (int i = 0; i < per_class; ++i) out.push_back(render_view(c.kind, c.dims, c.label, random_direction(e), distance, rs));
  return out;
}

/// Upright objects with random yaw resting on the z = 0 plane, spread without
/// footprint overlap, seen from a random azimuth and 30-60 degree elevation.
inline SceneSpec gen_clutter_scene(const std::vector<ClassSpec>& classes, int n_objects, double distance,
                                   std::uint64_t seed, const RenderSettings& rs = {}) {
  if (classes.empty() || n_objects < 1) throw Error(ErrorCode::kInvalidParams, "need classes and objects");
  rng::Engine e(seed);
  SceneSpec spec;
  spec.seed = seed;
  spec.intrinsics = rs.intrinsics;
  spec.rows = rs.rows;
  spec.cols = rs.cols;
  std::vector<Eigen::Vector2d> centers;
  std::vector<double> radii;
  double spread = 0.25;
  for (int k = 0; k < n_objects; ++k) {
    const ClassSpec& c = classes[static_cast<std::size_t>(rng::below(e, classes.size()))];
    const PrimitiveMesh mesh = make_mesh(c.kind, c.dims);
    double footprint = 0.0, floor = 0.0;
    for (const auto& v : mesh.vertices) {
      footprint = std::max(footprint, std::hypot(v.x(), v.y()));
      floor = std::min(floor, v.z());
    }
    Eigen::Vector2d at;
    for (int attempt = 0;; ++attempt) {
      if (attempt > 0 && attempt % 200 == 0) spread *= 1.25;
      at = {rng::uniform(e, -spread, spread), rng::uniform(e, -spread, spread)};
      bool clear = true;
      for (std::size_t j = 0; j < centers.size() && clear; ++j)
        clear = (at - centers[j]).norm() >= footprint + radii[j] + 0.02;
      if (clear) break;
    }
    centers.push_back(at);
    radii.push_back(footprint);
    const double yaw = rng::uniform(e, 0.0, 2.0 * std::numbers::pi);
    SceneObject o{static_cast<std::uint32_t>(k + 1), c.label, c.kind, c.dims, {}};
    o.pose.rotation = Eigen::AngleAxisd(yaw, Eigen::Vector3d::UnitZ()).toRotationMatrix();
    o.pose.translation = Eigen::Vector3d(at.x(), at.y(), -floor);
    spec.objects.push_back(std::move(o));
  }
  Eigen::Vector3d center = Eigen::Vector3d::Zero();
  for (const auto& o : spec.objects) center += o.pose.translation;
  center /= static_cast<double>(spec.objects.size());
  const double az = rng::uniform(e, 0.0, 2.0 * std::numbers::pi);
  const double el = rng::uniform(e, std::numbers::pi / 6.0, std::numbers::pi / 3.0);
  const Eigen::Vector3d eye =
      center + distance * Eigen::Vector3d(std::cos(el) * std::cos(az), std::cos(el) * std::sin(az), std::sin(el));
  spec.camera = look_at(eye, center);
  return spec;
}

inline Dataset generate_dataset(const DatasetParams& params) {
  if (params.views_per_class < 1 || params.scenes_per_sequence < 0)
    throw Error(ErrorCode::kInvalidParams, "view and scene counts must be positive");
  const auto classes = suite_classes(params.suite);
  rng::Engine e(params.seed);
  Dataset d;
  d.train = gen_suite_views(classes, params.views_per_class, params.distance, e, params.render);
  for (int n : params.clutter) {
    Sequence s{"clutter_" + std::to_string(n), n, {}};
    for (int i = 0; i < params.scenes_per_sequence; ++i)
      s.scenes.push_back(gen_clutter_scene(classes, n, params.distance, e(), params.render));
    d.sequences.push_back(std::move(s));
  }
  return d;
}

namespace detail {

inline std::string numbered(const char* stem, std::size_t i, int width, const char* ext) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s_%0*zu%s", stem, width, i, ext);
  return buf;
}

inline std::vector<std::vector<std::string>> read_table(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  std::vector<std::vector<std::string>> rows;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const auto end = std::min(text.find('\n', pos), text.size());
    std::vector<std::string> row;
    for (auto t : split_ws(std::string_view(text).substr(pos, end - pos))) row.emplace_back(t);
    if (!row.empty() && row[0][0] != '#') rows.push_back(std::move(row));
    pos = end + 1;
  }
  return rows;
}

}  // namespace detail

/// Writes the layout described at the top of this header. Depth scenes are
/// rendered here so that `recognize` can consume them directly.
inline void save_dataset(const Dataset& d, const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir / "train", ec);
  fs::create_directories(dir / "sequences", ec);
  if (ec) throw Error(ErrorCode::kIoError, "cannot create " + dir.string() + ": " + ec.message());
  std::string index;
  for (std::size_t i = 0; i < d.train.size(); ++i) {
    const auto& v = d.train[i];
    const std::string file = detail::numbered("view", i, 4, ".cloud");
    save_cloud(v.cloud, dir / "train" / file);
    index += file + " " + v.label + " " + detail::format_real(v.viewpoint.x()) + " " +
             detail::format_real(v.viewpoint.y()) + " " + detail::format_real(v.viewpoint.z()) + "\n";
  }
  detail::write_file(dir / "train" / "index.txt", index);
  std::string seq_index;
  for (const auto& s : d.sequences) {
    const fs::path sub = dir / "sequences" / s.name;
    fs::create_directories(sub, ec);
    if (ec) throw Error(ErrorCode::kIoError, "cannot create " + sub.string());
    for (std::size_t i = 0; i < s.scenes.size(); ++i) {
      detail::write_file(sub / detail::numbered("scene", i, 3, ".spec"), format_scene_spec(s.scenes[i]));
      save_scene(render_depth(s.scenes[i]), sub / detail::numbered("scene", i, 3, ".scene"));
    }
    seq_index += s.name + " " + std::to_string(s.objects) + " " + std::to_string(s.scenes.size()) + "\n";
  }
  detail::write_file(dir / "sequences" / "index.txt", seq_index);
}

inline std::vector<TrainingView> load_training_views(const std::filesystem::path& dir) {
  const auto index = dir / "train" / "index.txt";
  if (!std::filesystem::exists(index)) throw Error(ErrorCode::kInsufficientData, "no training index in " + dir.string());
  std::vector<TrainingView> out;
  for (const auto& row : detail::read_table(index)) {
    if (row.size() != 5) throw Error(ErrorCode::kParseError, "bad training index row in " + index.string());
    TrainingView v;
    v.cloud = load_cloud(dir / "train" / row[0]);
    v.cloud.frame = CloudFrame::kCamera;
    v.label = row[1];
    for (int k = 0; k < 3; ++k)
      if (!detail::parse_real(row[static_cast<std::size_t>(k + 2)], v.viewpoint(k)))
        throw Error(ErrorCode::kParseError, "bad viewpoint in " + index.string());
    out.push_back(std::move(v));
  }
  if (out.empty()) throw Error(ErrorCode::kInsufficientData, "no training views in " + dir.string());
  return out;
}

/// Sequences with their scene specs; depth scenes are re-rendered on demand.
inline std::vector<Sequence> load_sequences(const std::filesystem::path& dir) {
  const auto index = dir / "sequences" / "index.txt";
  if (!std::filesystem::exists(index)) throw Error(ErrorCode::kInsufficientData, "no sequence index in " + dir.string());
  std::vector<Sequence> out;
  for (const auto& row : detail::read_table(index)) {
    if (row.size() != 3) throw Error(ErrorCode::kParseError, "bad sequence index row in " + index.string());
    Sequence s{row[0], std::stoi(row[1]), {}};
    const int count = std::stoi(row[2]);
    for (int i = 0; i < count; ++i)
      s.scenes.push_back(parse_scene_spec(
          detail::read_file(dir / "sequences" / s.name / detail::numbered("scene", static_cast<std::size_t>(i), 3, ".spec"))));
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace slicetopo
